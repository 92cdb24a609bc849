//! Density-matrix helpers shared by the simulators.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{qubit_dense, DenseOperator, HermitianEigen};
use crate::error::{Error, Result};
use crate::pauli::OperatorExpr;

/// Tolerance used when validating user-supplied states.
pub const STATE_TOL: f64 = 1e-10;

/// Checks Hermiticity, unit trace and positivity within `tol`.
pub fn validate_density(rho: &DenseOperator, tol: f64) -> Result<()> {
    let herm = rho.hermiticity_residual();
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = min_eigenvalue(rho)?;
    if min < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

pub fn min_eigenvalue(rho: &DenseOperator) -> Result<f64> {
    Ok(HermitianEigen::new(rho)?
        .values
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a single-qubit density matrix.
pub fn bloch_vector(rho: &DenseOperator) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch vector needs a qubit, got dimension {}",
            rho.dim()
        )));
    }
    let r01 = rho.get(0, 1);
    let r10 = rho.get(1, 0);
    Ok([
        (r01 + r10).re,
        (Complex64::new(0.0, 1.0) * (r01 - r10)).re,
        (rho.get(0, 0) - rho.get(1, 1)).re,
    ])
}

/// `½(I + r·σ)`.
pub fn from_bloch(r: [f64; 3]) -> DenseOperator {
    let e = OperatorExpr::from_real_terms(1, &[("I", 0.5), ("X", 0.5 * r[0]), ("Y", 0.5 * r[1]), ("Z", 0.5 * r[2])])
        .expect("single-site labels");
    qubit_dense(&e)
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    let diff = a.checked_add(&b.scale_real(-1.0))?;
    Ok(0.5 * HermitianEigen::new(&diff)?.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Computational basis ket `|index>` on the profile `dims`.
pub fn basis_ket(dims: &[usize], index: usize) -> DVector<Complex64> {
    let n: usize = dims.iter().product();
    let mut v = DVector::zeros(n);
    v[index] = Complex64::new(1.0, 0.0);
    v
}

/// Haar-random pure state vector from normalized complex Gaussians.
pub fn haar_random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}
