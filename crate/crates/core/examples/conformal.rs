//! Integrate the conformal relation from the pole and check the residual of
//! the resulting map.

use biharm::bvp::solve_conformal;
use biharm::functionals::{biharmonic_residual, Normalization};
use biharm::ode::Tolerances;
use biharm::{MapSpec, WarpingProfile};

fn main() -> biharm::Result<()> {
    let spec = MapSpec::new(4, WarpingProfile::euclidean(), WarpingProfile::sphere(1.0)?)?;
    for slope in [0.5, 2.0, 8.0] {
        let sol = solve_conformal(&spec, slope, 3.0, 61, &Tolerances::default())?;
        let worst = sol.nodes[1..sol.nodes.len() - 1]
            .iter()
            .map(|&r| biharmonic_residual(&spec, &sol.map.jet(r), Normalization::Verbatim).map(f64::abs))
            .collect::<biharm::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "slope {slope}: alpha(3) = {:.10}, truncated = {}, max |residual| = {worst:.3e}",
            sol.map.eval(3.0, 0),
            sol.truncated
        );
    }
    Ok(())
}
