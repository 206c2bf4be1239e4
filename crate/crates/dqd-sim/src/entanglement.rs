//! Wootters concurrence for two qubits, via the spin-flipped state.
//!
//! ρ̃ = (σy⊗σy) ρ* (σy⊗σy). The λi are the square roots of the eigenvalues
//! of ρρ̃, sorted descending; that spectrum is real and nonnegative for any
//! valid ρ and equals the squared spectrum of R = √(√ρ ρ̃ √ρ), so no matrix
//! square roots are formed here. DDSE = λ1 − λ2 − λ3 − λ4 (can be negative,
//! and is what experiments reconstruct); concurrence = max(0, DDSE).

use crate::error::{Error, Result};
use crate::qdyn::{kron, max_abs, pauli, Axis, DensityMatrix, Mat4, StateVector};

/// Eigenvalues of ρρ̃ below this are zeros of the rank-deficient product
/// seen through roundoff: ρ and ρ̃ are unit-trace, so the product carries
/// ~1e-15 absolute assembly noise however small its entries come out.
/// Zeroing before the square root matters: √(1e-16) = 1e-8 would otherwise
/// leak into every λ. An eigenvalue this small shifts DDSE by at most 1e-6.
pub const EIG_FLOOR: f64 = 1e-12;

fn spin_flip_op() -> Mat4 {
    let sy = pauli(Axis::Y);
    kron(&sy, &sy)
}

/// (σy⊗σy) ρ* (σy⊗σy), the time-reversed (spin-flipped conjugate) state.
pub fn time_reversed(rho: &DensityMatrix) -> DensityMatrix {
    let yy = spin_flip_op();
    DensityMatrix::new_unchecked(yy * rho.matrix().conjugate() * yy)
}

/// λ1 ≥ λ2 ≥ λ3 ≥ λ4 ≥ 0 with Σλi² = tr(ρρ̃).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SortedLambdas([f64; 4]);

impl SortedLambdas {
    pub fn values(&self) -> [f64; 4] {
        self.0
    }
}

pub fn sorted_lambdas(rho: &DensityMatrix) -> Result<SortedLambdas> {
    let rho_tilde = time_reversed(rho);
    let prod = rho.matrix() * rho_tilde.matrix();
    let trace = prod.trace();

    // ρρ̃ vanishes identically on product states, up to roundoff from the
    // density-matrix assembly. The QR sweep cannot deflate an all-zero
    // matrix, so treat the whole matrix as zero.
    if max_abs(&prod) < 1e-14 {
        return Ok(SortedLambdas([0.0; 4]));
    }

    let schur = prod
        .try_schur(1e-14, 500)
        .or_else(|| prod.try_schur(1e-12, 5000))
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge on rho*rho_tilde".into()))?;
    let eigs = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("eigenvalues of rho*rho_tilde unavailable".into()))?;

    let mut lambdas = [0.0f64; 4];
    for (k, z) in eigs.iter().enumerate() {
        if z.im.abs() > 1e-8 {
            return Err(Error::Numerical(format!(
                "eigenvalue of rho*rho_tilde has imaginary part {:.3e}",
                z.im
            )));
        }
        if z.re < -EIG_FLOOR {
            return Err(Error::Numerical(format!(
                "eigenvalue {:.3e} of rho*rho_tilde below -{EIG_FLOOR:e}; input not positive semidefinite",
                z.re
            )));
        }
        lambdas[k] = if z.re < EIG_FLOOR { 0.0 } else { z.re.sqrt() };
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let sum_sq: f64 = lambdas.iter().map(|l| l * l).sum();
    if (sum_sq - trace.re).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "eigenvalue sum rule violated: sum of lambda^2 = {sum_sq} vs tr(rho*rho_tilde) = {}",
            trace.re
        )));
    }
    Ok(SortedLambdas(lambdas))
}

/// Difference of the descending sorted eigenvalues, λ1 − λ2 − λ3 − λ4.
pub fn ddse(rho: &DensityMatrix) -> Result<f64> {
    let l = sorted_lambdas(rho)?.values();
    Ok(l[0] - l[1] - l[2] - l[3])
}

/// Wootters concurrence, max(0, DDSE). 0 for separable states, 1 for Bell
/// states.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(ddse(rho)?.max(0.0))
}

/// Concurrence of a pure state from the closed form |⟨ψ|σy⊗σy|ψ*⟩|,
/// which reduces to 2|a1·a4 − a2·a3|.
pub fn pure_state_concurrence(psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
}
