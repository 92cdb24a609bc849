//! Dense complex matrices on a tensor-product space.
//!
//! The first subsystem in `dims` is the most significant factor of the
//! Kronecker product, so for `(Q, M)` qubits the basis index is `2*q + m`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{OperatorExpr, Pauli, PauliLabel, PauliString};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on `max|H - H†|` accepted by [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl DenseOperator {
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        let side: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Structural(format!("invalid dimension profile {dims:?}")));
        }
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, profile {:?} needs {side}x{side}",
                mat.nrows(),
                mat.ncols(),
                dims
            )));
        }
        Ok(DenseOperator { dims, mat })
    }

    pub fn identity(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        DenseOperator {
            dims: dims.to_vec(),
            mat: CMatrix::identity(side, side),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        DenseOperator {
            dims: dims.to_vec(),
            mat: CMatrix::zeros(side, side),
        }
    }

    /// Single-subsystem operator from row-major entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows must form a square matrix".into()));
        }
        Self::new(vec![n], CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        DenseOperator {
            dims: vec![n],
            mat: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    /// `|psi><psi|` for a state vector on `dims`.
    pub fn projector(dims: &[usize], psi: &DVector<Complex64>) -> Result<Self> {
        Self::new(dims.to_vec(), psi * psi.adjoint())
    }

    /// `|k><k|` on a single `d`-level subsystem.
    pub fn basis_projector(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        DenseOperator { dims: vec![d], mat: m }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Same matrix, relabelled subsystem profile.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.mat)
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            dims: self.dims.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DenseOperator {
            dims: self.dims.clone(),
            mat: &self.mat * s,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max|A - A†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `‖U†U - I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - CMatrix::identity(n, n))
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DenseOperator {
            dims,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(DenseOperator {
            dims: self.dims.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(DenseOperator {
            dims: self.dims.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(DenseOperator {
            dims: self.dims.clone(),
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    /// `U† A U`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        self.check_dims(u)?;
        Ok(DenseOperator {
            dims: self.dims.clone(),
            mat: u.mat.adjoint() * &self.mat * &u.mat,
        })
    }

    /// Maximum entrywise distance.
    pub fn max_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        self.checked_add(rhs).expect("dimension mismatch")
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        self.checked_add(&rhs.scale_real(-1.0))
            .expect("dimension mismatch")
    }
}

fn qubit_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d != 2) {
        return Err(Error::Structural(format!(
            "Pauli operators need an all-qubit profile, got {dims:?}"
        )));
    }
    Ok(dims.len())
}

/// `(xmask, zmask, number of Y)` with site 0 on the most significant bit.
fn symplectic(label: &PauliLabel) -> (usize, usize, u32) {
    let n = label.len();
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
    for (s, p) in label.sites().iter().enumerate() {
        let bit = 1 << (n - 1 - s);
        let (bx, bz) = p.xz_bits();
        if bx {
            x |= bit;
        }
        if bz {
            z |= bit;
        }
        if *p == Pauli::Y {
            ny += 1;
        }
    }
    (x, z, ny)
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => -ONE,
        _ => Complex64::new(0.0, -1.0),
    }
}

fn accumulate_label(mat: &mut CMatrix, label: &PauliLabel, coeff: Complex64) {
    let (x, z, ny) = symplectic(label);
    let ph = coeff * i_pow(ny);
    for col in 0..mat.ncols() {
        let sign = if (col & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        mat[(col ^ x, col)] += ph * sign;
    }
}

/// Exact matrix of a Pauli sum on `dims` (all entries must be 2).
pub fn to_dense(expr: &OperatorExpr, dims: &[usize]) -> Result<DenseOperator> {
    let n = qubit_dims(dims)?;
    if n != expr.n_sites() {
        return Err(Error::SiteCountMismatch {
            left: expr.n_sites(),
            right: n,
        });
    }
    let side = 1usize << n;
    let mut mat = CMatrix::zeros(side, side);
    for (label, c) in expr.terms() {
        accumulate_label(&mut mat, label, *c);
    }
    DenseOperator::new(dims.to_vec(), mat)
}

/// Matrix of a Pauli sum on its natural all-qubit profile.
pub fn qubit_dense(expr: &OperatorExpr) -> DenseOperator {
    to_dense(expr, &vec![2; expr.n_sites()]).expect("qubit profile")
}

pub fn pauli_string_dense(p: &PauliString, dims: &[usize]) -> Result<DenseOperator> {
    to_dense(&OperatorExpr::from(p.clone()), dims)
}

/// Expansion `D = Σ c_P P` with `c_P = Tr(P† D) / 2^n`.
pub fn pauli_decompose(d: &DenseOperator) -> Result<OperatorExpr> {
    let n = qubit_dims(d.dims())?;
    let side = d.dim();
    let norm = 1.0 / side as f64;
    let mut out = OperatorExpr::zero(n);
    for label in PauliLabel::all(n) {
        let (x, z, ny) = symplectic(&label);
        // P[k^x][k] = i^ny (-1)^{|k&z|}, so Tr(P D) = Σ_k P[k^x][k] D[k][k^x].
        let mut acc = ZERO;
        for k in 0..side {
            let v = d.mat[(k, k ^ x)];
            if (k & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        // P is Hermitian so Tr(P† D) = Tr(P D).
        let c = acc * i_pow(ny) * norm;
        out.add_term(label, c);
    }
    Ok(out)
}

/// Traces out every subsystem not listed in `keep`.
pub fn partial_trace(d: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    if keep.is_empty() {
        return Err(Error::Structural("partial trace needs a nonempty keep set".into()));
    }
    let dims = d.dims();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Structural(format!(
            "keep set {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    let out_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let side = d.dim();

    // split[i] = (index within kept factors, index within traced factors)
    let split: Vec<(usize, usize)> = (0..side)
        .map(|mut i| {
            let mut digits = vec![0usize; dims.len()];
            for s in (0..dims.len()).rev() {
                digits[s] = i % dims[s];
                i /= dims[s];
            }
            let (mut k, mut t) = (0usize, 0usize);
            for s in 0..dims.len() {
                if keep_sorted.binary_search(&s).is_ok() {
                    k = k * dims[s] + digits[s];
                } else {
                    t = t * dims[s] + digits[s];
                }
            }
            (k, t)
        })
        .collect();

    let out_side: usize = out_dims.iter().product();
    let mut mat = CMatrix::zeros(out_side, out_side);
    for i in 0..side {
        for j in 0..side {
            if split[i].1 == split[j].1 {
                mat[(split[i].0, split[j].0)] += d.mat[(i, j)];
            }
        }
    }
    DenseOperator::new(out_dims, mat)
}

/// Eigendecomposition of a Hermitian operator, reusable across many
/// evolution times.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    dims: Vec<usize>,
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let residual = h.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let sym = (&h.mat + h.mat.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        Ok(HermitianEigen {
            dims: h.dims.clone(),
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// `exp(-i H t)`.
    pub fn evolution(&self, t: f64) -> DenseOperator {
        let n = self.values.len();
        let phases = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -self.values[i] * t)
            } else {
                ZERO
            }
        });
        DenseOperator {
            dims: self.dims.clone(),
            mat: &self.vectors * phases * self.vectors.adjoint(),
        }
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let n = self.values.len();
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(f(self.values[i]), 0.0)
            } else {
                ZERO
            }
        });
        DenseOperator {
            dims: self.dims.clone(),
            mat: &self.vectors * d * self.vectors.adjoint(),
        }
    }
}

/// `exp(-i H t)` by Hermitian eigendecomposition.
pub fn expm_hermitian(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(HermitianEigen::new(h)?.evolution(t))
}

/// Places a single-subsystem operator at position `site` of `dims`.
pub fn embed(op: &DenseOperator, site: usize, dims: &[usize]) -> Result<DenseOperator> {
    if site >= dims.len() || op.dim() != dims[site] {
        return Err(Error::DimensionMismatch(format!(
            "cannot embed a {}-dim operator at site {site} of {dims:?}",
            op.dim()
        )));
    }
    let mut out: Option<DenseOperator> = None;
    for (s, &d) in dims.iter().enumerate() {
        let factor = if s == site {
            op.clone().with_dims(vec![d])?
        } else {
            DenseOperator::identity(&[d])
        };
        out = Some(match out {
            None => factor,
            Some(acc) => acc.kron(&factor),
        });
    }
    Ok(out.expect("nonempty profile"))
}
