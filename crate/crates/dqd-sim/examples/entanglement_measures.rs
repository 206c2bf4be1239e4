//! DDSE and concurrence on hand-built two-qubit states.
//!
//!     cargo run --example entanglement_measures
//!
//! DDSE is the difference of the descending sorted eigenvalues
//! lambda1 - lambda2 - lambda3 - lambda4 of sqrt(eig(rho rho~)); it can go
//! negative, and clamping it at zero gives the Wootters concurrence.

use num_complex::Complex64;

use dqd_sim::qdyn::{DensityMatrix, Mat4, Vec4};
use dqd_sim::{concurrence, ddse, pure_state_concurrence, Result, StateVector};

fn report(name: &str, rho: &DensityMatrix) -> Result<()> {
    println!("  {name:24} DDSE {:+.4}   concurrence {:.4}", ddse(rho)?, concurrence(rho)?);
    Ok(())
}

fn main() -> Result<()> {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    let mut bell = Vec4::zeros();
    bell[0] = s;
    bell[3] = s;
    let bell = StateVector::new(bell)?;
    report("Bell (|uu>+|dd>)/sqrt2", &bell.density_matrix())?;
    println!(
        "  {:24} closed form {:.4}",
        "  pure-state route", pure_state_concurrence(&bell)
    );

    let mut ud = Vec4::zeros();
    ud[1] = Complex64::new(1.0, 0.0);
    report("product |ud>", &StateVector::new(ud)?.density_matrix())?;
    report("maximally mixed", &DensityMatrix::maximally_mixed())?;

    println!("\n  Werner states p|Bell><Bell| + (1-p) I/4, entangled for p > 1/3:");
    for p in [0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let m = bell.density_matrix().matrix() * Complex64::new(p, 0.0)
            + Mat4::identity() * Complex64::new((1.0 - p) / 4.0, 0.0);
        report(&format!("Werner p = {p:.3}"), &DensityMatrix::new(m)?)?;
    }
    Ok(())
}
