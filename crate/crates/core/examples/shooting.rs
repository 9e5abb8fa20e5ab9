//! Recover the stereographic solution on [0, b] by shooting from the pole.

use biharm::bvp::{shoot_dirichlet, BoundaryCondition, PoleSeed, ShootingOptions, DEFAULT_EPS};
use biharm::catalog::{catalog_solution, CaseId, CaseParams};

fn main() -> biharm::Result<()> {
    let e = catalog_solution(CaseId::C1B, CaseParams::new(1.0, 1.0))?;
    let map = e.map.as_ref().expect("C1B has a closed form");
    let b = 1.5;
    let bc = BoundaryCondition::Clamped {
        alpha_b: map.eval(b, 0),
        dalpha_b: map.eval(b, 1),
    };
    let guess = PoleSeed::new(1.8, -0.5, DEFAULT_EPS)?;
    let res = shoot_dirichlet(&e.spec, b, bc, guess, &ShootingOptions::default())?;
    println!(
        "a1 = {:.12} (exact 2), a3 = {:.12} (exact {:.12}), {} iterations, mismatch {:.2e}",
        res.seed.a1,
        res.seed.a3,
        -2.0 / 3.0,
        res.iterations,
        res.residual
    );
    let err = res
        .trajectory
        .r
        .iter()
        .zip(&res.trajectory.states)
        .map(|(r, s)| (s[0] - map.eval(*r, 0)).abs())
        .fold(0.0, f64::max);
    println!("max deviation from the closed form: {err:.3e}");
    Ok(())
}
