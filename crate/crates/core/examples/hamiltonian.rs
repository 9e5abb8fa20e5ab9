//! Conservation of the log-variable Hamiltonian along the stereographic
//! solution.

use biharm::catalog::{catalog_solution, CaseId, CaseParams};
use biharm::hamiltonian::{hamiltonian_drift, DiffSteps, LogLagrangian};
use biharm::logvar::to_log_variable;

fn main() -> biharm::Result<()> {
    let e = catalog_solution(CaseId::C1B, CaseParams::new(1.0, 1.0))?;
    let beta = to_log_variable(e.spec.f(), e.map.as_ref().expect("C1B has a closed form"))?;
    let lag = LogLagrangian::new(4, e.spec.h().clone())?;
    let ts: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
    let drift = hamiltonian_drift(&lag, &beta, &ts, DiffSteps::default())?;
    for (t, h) in ts.iter().zip(&drift.values) {
        println!("t = {t:5.2}  H = {h:.12e}");
    }
    println!("max deviation {:.3e}", drift.max_deviation);
    Ok(())
}
