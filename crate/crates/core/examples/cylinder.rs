//! Maps from the cylinder: the constant solutions and the rigidity of
//! constant-tension solutions.

use biharm::catalog::{catalog_solution, CaseId, CaseParams};
use biharm::cylinder::{constant_map_residual, cylinder_rigidity, cylinder_tension};
use biharm::verify::constant_tension_jets;
use biharm::WarpingProfile;

fn main() -> biharm::Result<()> {
    let lambda = 3.0;
    let h = WarpingProfile::sphere(1.0)?;
    for id in [CaseId::CylQuarterPi, CaseId::CylThreeQuarterPi] {
        let e = catalog_solution(id, CaseParams::default())?;
        let map = e.map.as_ref().expect("cylinder cases have a closed form");
        let alpha = map.eval(0.0, 0);
        println!(
            "{id}: alpha = {alpha:.6}, tau = {:.6}, residual = {:.3e}",
            cylinder_tension(lambda, &h, &map.jet(0.0)),
            constant_map_residual(lambda, &h, alpha)
        );
    }
    let jets = constant_tension_jets(lambda, &h, 0.5, 0.3, 0.2, 2.0, 50)?;
    let report = cylinder_rigidity(lambda, &h, &jets)?;
    println!("{report:?}");
    Ok(())
}
