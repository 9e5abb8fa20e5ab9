//! Tension and biharmonicity residual along closed-form solutions.

use biharm::catalog::{catalog_solution, sample_radii, CaseId, CaseParams};
use biharm::functionals::{biharmonic_residual, tension, Normalization};

fn main() -> biharm::Result<()> {
    for id in [CaseId::C1A, CaseId::C1B, CaseId::C1C, CaseId::C2B] {
        let e = catalog_solution(id, CaseParams::new(1.0, 1.0))?;
        let Some(map) = e.map.as_ref() else { continue };
        let (mut tau, mut res) = (0.0f64, 0.0f64);
        // Stay clear of the C1C blow-up, where the jet grows past what f64 resolves.
        let r_max = 0.95 * e.domain.hi_value();
        for r in sample_radii(&e, 200)?.into_iter().filter(|&r| r < r_max) {
            let jet = map.jet(r);
            tau = tau.max(tension(&e.spec, &jet)?.abs());
            res = res.max(biharmonic_residual(&e.spec, &jet, Normalization::Normalized)?.abs());
        }
        println!(
            "{id} ({:?}): max |tau| = {tau:.3e}, max |residual| = {res:.3e}",
            e.nature
        );
    }
    Ok(())
}
