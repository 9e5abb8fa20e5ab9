//! Equivariant stability certificates for the conformal solutions.

use biharm::catalog::{CaseId, CaseParams};
use biharm::stability::{catalog_beta, certificates_csv, min_rayleigh, StabilityCase};

fn main() -> biharm::Result<()> {
    let (sphere, beta_s) = catalog_beta(CaseId::C1B, CaseParams::new(1.0, 1.0))?;
    let (hyperbolic, beta_h) = catalog_beta(CaseId::C1C, CaseParams::new(1.0, 1.0))?;
    let certs = [
        min_rayleigh(&sphere, &beta_s, (-10.0, 0.0), 256)?,
        min_rayleigh(&hyperbolic, &beta_h, (-10.0, -0.1), 256)?,
        min_rayleigh(&StabilityCase::Flat, &beta_h, (-10.0, -0.1), 256)?,
    ];
    print!("{}", certificates_csv(&certs));
    Ok(())
}
