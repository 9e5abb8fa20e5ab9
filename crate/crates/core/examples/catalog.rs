//! Closed-form catalog entries and the constant-curvature classification.

use biharm::catalog::{catalog_csv, catalog_solution, classify_constant_curvature, CaseId, CaseParams};
use biharm::SpaceForm;

fn main() -> biharm::Result<()> {
    let entries = CaseId::ALL
        .into_iter()
        .map(|id| catalog_solution(id, CaseParams::new(1.0, 1.0)))
        .collect::<biharm::Result<Vec<_>>>()?;
    print!("{}", catalog_csv(&entries));

    let forms = [SpaceForm::Euclidean, SpaceForm::Sphere, SpaceForm::Hyperbolic];
    for from in forms {
        for to in forms {
            println!("{from:?} -> {to:?}: {:?}", classify_constant_curvature(from, to));
        }
    }
    Ok(())
}
