//! Conserved quantities, their commutants, and constrained Hamiltonian
//! families.
//!
//! Everything here is a real linear problem over Pauli coefficients: for a
//! Hermitian family `H = Σ p_k A_k` the condition `[H, C] = 0` is one real
//! linear equation per Pauli label (and per real/imaginary part) of the
//! commutators `[A_k, C]`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{qubit_dense, DenseOperator};
use crate::error::{Error, Result};
use crate::linalg::{null_space, rref, RREF_TOL};
use crate::pauli::{commutator, OperatorExpr, PauliLabel};
use crate::witness::MediatorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConservedKind {
    Additive,
    Nonadditive,
    Channel3,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedQuantity {
    pub kind: ConservedKind,
    pub expr: OperatorExpr,
}

impl ConservedQuantity {
    /// `Z_Q + Z_M`.
    pub fn additive() -> Self {
        Self::build(ConservedKind::Additive, 2, &[("ZI", 1.0), ("IZ", 1.0)])
    }

    /// `Z_Q + Z_M + Z_Q Z_M`.
    pub fn nonadditive() -> Self {
        Self::build(ConservedKind::Nonadditive, 2, &[("ZI", 1.0), ("IZ", 1.0), ("ZZ", 1.0)])
    }

    /// `Z_Q + Z_M + Z_M' + Z_Q Z_M' + Z_M Z_M'` on `(Q, M, M')`.
    pub fn channel3() -> Self {
        Self::build(
            ConservedKind::Channel3,
            3,
            &[("ZII", 1.0), ("IZI", 1.0), ("IIZ", 1.0), ("ZIZ", 1.0), ("IZZ", 1.0)],
        )
    }

    pub fn custom(expr: OperatorExpr) -> Result<Self> {
        if !expr.is_hermitian(1e-13) {
            return Err(Error::ContractViolation("conserved quantity must be Hermitian".into()));
        }
        Ok(ConservedQuantity {
            kind: ConservedKind::Custom,
            expr,
        })
    }

    fn build(kind: ConservedKind, n: usize, terms: &[(&str, f64)]) -> Self {
        ConservedQuantity {
            kind,
            expr: OperatorExpr::from_real_terms(n, terms).expect("static labels"),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.expr.n_sites()
    }

    pub fn dense(&self) -> DenseOperator {
        qubit_dense(&self.expr)
    }

    /// True when the quantity is a multiple of the identity.
    pub fn is_trivial(&self) -> bool {
        self.expr.terms().all(|(l, _)| l.is_identity())
    }
}

/// Real coefficient matrix of `[A_k, C]`: rows are (label, re/im) pairs,
/// columns are the operators `A_k`.
fn commutator_constraints(ops: &[OperatorExpr], c: &OperatorExpr) -> Result<DMatrix<f64>> {
    let comms = ops
        .iter()
        .map(|a| commutator(a, c))
        .collect::<Result<Vec<_>>>()?;
    let labels: BTreeSet<PauliLabel> = comms
        .iter()
        .flat_map(|e| e.terms().map(|(l, _)| l.clone()))
        .collect();
    let mut m = DMatrix::zeros(2 * labels.len(), ops.len());
    for (k, e) in comms.iter().enumerate() {
        for (r, l) in labels.iter().enumerate() {
            let z = e.coeff(l);
            m[(2 * r, k)] = z.re;
            m[(2 * r + 1, k)] = z.im;
        }
    }
    Ok(m)
}

/// Real coefficient matrix of a list of operators: rows (label, re/im).
fn coefficient_matrix(ops: &[OperatorExpr]) -> DMatrix<f64> {
    let labels: BTreeSet<PauliLabel> = ops
        .iter()
        .flat_map(|e| e.terms().map(|(l, _)| l.clone()))
        .collect();
    let mut m = DMatrix::zeros(2 * labels.len(), ops.len());
    for (k, e) in ops.iter().enumerate() {
        for (r, l) in labels.iter().enumerate() {
            let z = e.coeff(l);
            m[(2 * r, k)] = z.re;
            m[(2 * r + 1, k)] = z.im;
        }
    }
    m
}

fn combine(ops: &[OperatorExpr], weights: &DVector<f64>, n_sites: usize) -> OperatorExpr {
    ops.iter()
        .zip(weights.iter())
        .filter(|(_, &w)| w != 0.0)
        .fold(OperatorExpr::zero(n_sites), |acc, (a, &w)| &acc + &a.scale_real(w))
}

/// Basis of the allowed generators `{H ∈ span(ambient) : [H, C] = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commutant {
    pub basis: Vec<OperatorExpr>,
    pub ambient_dimension: usize,
    pub constraint_rank: usize,
    /// Set when `C` is a multiple of the identity, so every operator commutes.
    pub degenerate: bool,
}

impl Commutant {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

pub fn commutant_basis(c: &ConservedQuantity, ambient: &[OperatorExpr]) -> Result<Commutant> {
    if ambient.is_empty() {
        return Err(Error::Structural("ambient operator list is empty".into()));
    }
    let n = c.n_sites();
    if let Some(bad) = ambient.iter().find(|a| a.n_sites() != n) {
        return Err(Error::SiteCountMismatch {
            left: n,
            right: bad.n_sites(),
        });
    }
    let (_, independent) = rref(&coefficient_matrix(ambient), RREF_TOL);
    if independent.len() != ambient.len() {
        return Err(Error::Structural(format!(
            "ambient operators are linearly dependent (rank {} of {})",
            independent.len(),
            ambient.len()
        )));
    }
    let m = commutator_constraints(ambient, &c.expr)?;
    let (_, pivots) = rref(&m, RREF_TOL);
    let basis = null_space(&m, RREF_TOL)
        .iter()
        .map(|v| combine(ambient, v, n))
        .collect();
    Ok(Commutant {
        basis,
        ambient_dimension: ambient.len(),
        constraint_rank: pivots.len(),
        degenerate: c.is_trivial(),
    })
}

/// Every Pauli product on `n_sites` sites, identity included.
pub fn pauli_ambient(n_sites: usize) -> Vec<OperatorExpr> {
    PauliLabel::all(n_sites)
        .into_iter()
        .map(|l| OperatorExpr::term(l, Complex64::new(1.0, 0.0)))
        .collect()
}

/// Homogeneous linear relation `Σ coeffs[k] p_k = 0` among family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
}

/// A real-parametrised span `H = Σ p_k basis[k]` plus linear constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFamily {
    pub name: String,
    pub n_sites: usize,
    pub mediator_sites: Vec<usize>,
    pub params: Vec<String>,
    pub basis: Vec<OperatorExpr>,
    /// Rows in reduced echelon form.
    pub constraints: Vec<LinearConstraint>,
    pub conserved: Option<ConservedKind>,
    pub notes: Vec<String>,
}

impl HamiltonianFamily {
    pub fn new(
        name: &str,
        mediator_sites: Vec<usize>,
        params: &[&str],
        basis: Vec<OperatorExpr>,
    ) -> Result<Self> {
        if params.len() != basis.len() {
            return Err(Error::Structural(format!(
                "{} parameter names for {} basis operators",
                params.len(),
                basis.len()
            )));
        }
        let n_sites = basis.first().map(|b| b.n_sites()).unwrap_or(0);
        if basis.iter().any(|b| b.n_sites() != n_sites) {
            return Err(Error::Structural("basis operators differ in site count".into()));
        }
        if mediator_sites.iter().any(|&s| s >= n_sites) {
            return Err(Error::Structural("mediator site out of range".into()));
        }
        if let Some(b) = basis.iter().find(|b| !b.is_hermitian(1e-13)) {
            return Err(Error::ContractViolation(format!("basis operator {b} is not Hermitian")));
        }
        Ok(HamiltonianFamily {
            name: name.to_string(),
            n_sites,
            mediator_sites,
            params: params.iter().map(|s| s.to_string()).collect(),
            basis,
            constraints: Vec::new(),
            conserved: None,
            notes: Vec::new(),
        })
    }

    /// `α X_Q + β Y_Q + γ Z_Q + a X_Q Z_M + b Y_Q Z_M + c Z_Q Z_M`.
    pub fn classical_general() -> Self {
        Self::pauli_family(
            "classical-mediator general",
            vec![1],
            &[("α", "XI"), ("β", "YI"), ("γ", "ZI"), ("a", "XZ"), ("b", "YZ"), ("c", "ZZ")],
        )
    }

    /// Same family with the third single-site term on `Y_Q`, where it
    /// duplicates β.
    pub fn classical_general_y() -> Self {
        let mut f = Self::pauli_family(
            "classical-mediator general (γ on Y_Q)",
            vec![1],
            &[("α", "XI"), ("β", "YI"), ("γ", "YI"), ("a", "XZ"), ("b", "YZ"), ("c", "ZZ")],
        );
        f.notes.push("γ multiplies Y_Q, duplicating β's operator".into());
        f
    }

    /// Three-qubit `(Q, M, M')` channel family.
    pub fn channel() -> Self {
        Self::pauli_family(
            "classical channel extension",
            vec![1, 2],
            &[
                ("α", "XII"),
                ("β", "YII"),
                ("γ", "ZII"),
                ("a", "XIZ"),
                ("b", "YIZ"),
                ("c", "ZIZ"),
                ("a'", "IZZ"),
            ],
        )
    }

    /// `a Z_Q + b Z_M + c Z_Q Z_M + f(XX + YY) + g(XY − YX) + t I`.
    pub fn additive_allowed() -> Self {
        let r = |t: &[(&str, f64)]| OperatorExpr::from_real_terms(2, t).expect("labels");
        Self::new(
            "additive allowed",
            vec![1],
            &["a", "b", "c", "f", "g", "t"],
            vec![
                r(&[("ZI", 1.0)]),
                r(&[("IZ", 1.0)]),
                r(&[("ZZ", 1.0)]),
                r(&[("XX", 1.0), ("YY", 1.0)]),
                r(&[("XY", 1.0), ("YX", -1.0)]),
                r(&[("II", 1.0)]),
            ],
        )
        .expect("static family")
    }

    /// One parameter per label, named as given.
    pub fn pauli_family(name: &str, mediator_sites: Vec<usize>, terms: &[(&str, &str)]) -> Self {
        let params: Vec<&str> = terms.iter().map(|t| t.0).collect();
        let basis = terms.iter().map(|t| OperatorExpr::label(t.1)).collect();
        Self::new(name, mediator_sites, &params, basis).expect("static family")
    }

    pub fn constraint_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.constraints.len(), self.params.len());
        for (r, c) in self.constraints.iter().enumerate() {
            for (k, v) in c.coeffs.iter().enumerate() {
                m[(r, k)] = *v;
            }
        }
        m
    }

    fn set_constraints(&mut self, m: &DMatrix<f64>) {
        let (r, _) = rref(m, RREF_TOL);
        self.constraints = r
            .row_iter()
            .map(|row| LinearConstraint {
                coeffs: row.iter().copied().collect(),
            })
            .collect();
    }

    fn add_constraint_rows(&mut self, rows: &DMatrix<f64>) {
        let old = self.constraint_matrix();
        let mut m = DMatrix::zeros(old.nrows() + rows.nrows(), self.params.len());
        m.rows_mut(0, old.nrows()).copy_from(&old);
        m.rows_mut(old.nrows(), rows.nrows()).copy_from(rows);
        self.set_constraints(&m);
    }

    pub fn constraint_rank(&self) -> usize {
        self.constraints.len()
    }

    /// Basis of parameter vectors satisfying every constraint.
    pub fn solution_space(&self) -> Vec<DVector<f64>> {
        if self.constraints.is_empty() {
            return (0..self.params.len())
                .map(|k| {
                    let mut v = DVector::zeros(self.params.len());
                    v[k] = 1.0;
                    v
                })
                .collect();
        }
        null_space(&self.constraint_matrix(), RREF_TOL)
    }

    pub fn dimension(&self) -> usize {
        self.params.len() - self.constraint_rank()
    }

    /// No nonzero member satisfies the constraints.
    pub fn is_empty(&self) -> bool {
        self.dimension() == 0
    }

    /// Parameters not determined by a pivot of the constraint rows.
    pub fn free_params(&self) -> Vec<String> {
        let pivots = self.pivots();
        (0..self.params.len())
            .filter(|k| !pivots.contains(k))
            .map(|k| self.params[k].clone())
            .collect()
    }

    fn pivots(&self) -> Vec<usize> {
        self.constraints
            .iter()
            .filter_map(|c| c.coeffs.iter().position(|v| v.abs() > RREF_TOL))
            .collect()
    }

    /// Constraints solved for their pivot parameter, e.g. `α = -a`.
    pub fn relations(&self) -> Vec<String> {
        self.constraints
            .iter()
            .filter_map(|c| {
                let p = c.coeffs.iter().position(|v| v.abs() > RREF_TOL)?;
                let rhs = c
                    .coeffs
                    .iter()
                    .enumerate()
                    .skip(p + 1)
                    .filter(|(_, v)| v.abs() > RREF_TOL)
                    .enumerate()
                    .map(|(i, (k, v))| format_term(-v, &self.params[k], i == 0))
                    .collect::<String>();
                let rhs = if rhs.is_empty() { "0".to_string() } else { rhs };
                Some(format!("{} = {}", self.params[p], rhs))
            })
            .collect()
    }

    /// `Σ values[k] basis[k]`; errors if the constraints are violated.
    pub fn member(&self, values: &[f64]) -> Result<OperatorExpr> {
        if values.len() != self.params.len() {
            return Err(Error::Structural(format!(
                "expected {} parameter values, got {}",
                self.params.len(),
                values.len()
            )));
        }
        for c in &self.constraints {
            let r: f64 = c.coeffs.iter().zip(values).map(|(a, b)| a * b).sum();
            if r.abs() > 1e-9 {
                return Err(Error::ContractViolation(format!(
                    "parameters violate a constraint (residual {r:.3e})"
                )));
            }
        }
        Ok(combine(
            &self.basis,
            &DVector::from_column_slice(values),
            self.n_sites,
        ))
    }

    /// Uniform random combination of the solution basis, coefficients in `[-scale, scale]`.
    pub fn random_params<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Vec<f64> {
        let mut v = DVector::zeros(self.params.len());
        for b in self.solution_space() {
            v += b * rng.random_range(-scale..=scale);
        }
        v.iter().copied().collect()
    }

    pub fn audit(&self) -> FamilyAudit {
        FamilyAudit {
            name: self.name.clone(),
            n_sites: self.n_sites,
            mediator_sites: self.mediator_sites.clone(),
            conserved: self.conserved,
            basis: self
                .params
                .iter()
                .zip(&self.basis)
                .map(|(p, b)| BasisEntry {
                    param: p.clone(),
                    terms: b.terms().map(|(l, c)| (l.to_string(), c.re)).collect(),
                })
                .collect(),
            constraints: self.constraints.iter().map(|c| c.coeffs.clone()).collect(),
            relations: self.relations(),
            free_params: self.free_params(),
            dimension: self.dimension(),
            notes: self.notes.clone(),
        }
    }
}

fn format_term(v: f64, name: &str, first: bool) -> String {
    let mag = v.abs();
    let body = if (mag - 1.0).abs() < 1e-12 {
        name.to_string()
    } else {
        format!("{mag} {name}")
    };
    match (first, v < 0.0) {
        (true, true) => format!("-{body}"),
        (true, false) => body,
        (false, true) => format!(" - {body}"),
        (false, false) => format!(" + {body}"),
    }
}

impl fmt::Display for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, self.params.join(", "))?;
        for r in self.relations() {
            write!(f, "; {r}")?;
        }
        Ok(())
    }
}

/// JSON-friendly description of a family for audit trails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyAudit {
    pub name: String,
    pub n_sites: usize,
    pub mediator_sites: Vec<usize>,
    pub conserved: Option<ConservedKind>,
    pub basis: Vec<BasisEntry>,
    pub constraints: Vec<Vec<f64>>,
    pub relations: Vec<String>,
    pub free_params: Vec<String>,
    pub dimension: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub param: String,
    pub terms: Vec<(String, f64)>,
}

/// Adds the linear constraints that make every member commute with `c`.
pub fn constrain_family(family: &HamiltonianFamily, c: &ConservedQuantity) -> Result<HamiltonianFamily> {
    if family.n_sites != c.n_sites() {
        return Err(Error::SiteCountMismatch {
            left: family.n_sites,
            right: c.n_sites(),
        });
    }
    let m = commutator_constraints(&family.basis, &c.expr)?;
    let mut out = family.clone();
    out.add_constraint_rows(&m);
    out.conserved = Some(c.kind);
    if out.is_empty() {
        out.notes.push("constraints admit only the zero Hamiltonian".into());
    }
    Ok(out)
}

/// Whether the residual of `[target, C]` is about a Hamiltonian or a unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConservationMode {
    Hamiltonian,
    Unitary,
}

/// `‖[target, C]‖_F`. The mode's claim (Hermitian or unitary) is checked
/// to `1e-10` first.
pub fn check_conservation(
    target: &DenseOperator,
    c: &ConservedQuantity,
    mode: ConservationMode,
) -> Result<f64> {
    let cd = c.dense();
    if target.dims() != cd.dims() {
        return Err(Error::DimensionMismatch(format!(
            "target {:?} vs conserved quantity {:?}",
            target.dims(),
            cd.dims()
        )));
    }
    match mode {
        ConservationMode::Hamiltonian => {
            let r = target.hermiticity_residual();
            if r > 1e-10 {
                return Err(Error::NotHermitian { residual: r });
            }
        }
        ConservationMode::Unitary => {
            let r = target.unitarity_residual();
            if r > 1e-10 {
                return Err(Error::ContractViolation(format!("target is not unitary ({r:.3e})")));
            }
        }
    }
    Ok(target.commutator(&cd)?.frobenius_norm())
}

/// Restricts a family to members whose mediator-side factors are `I` or
/// `Z_M`. Parameters forced to zero are removed along with their operators.
pub fn classicality_filter(family: &HamiltonianFamily) -> HamiltonianFamily {
    let model = MediatorModel::classical_bit();
    let labels: BTreeSet<PauliLabel> = family
        .basis
        .iter()
        .flat_map(|b| b.terms().map(|(l, _)| l.clone()))
        .filter(|l| !model.admits_label(l, &family.mediator_sites))
        .collect();

    let mut out = family.clone();
    if !labels.is_empty() {
        let mut rows = DMatrix::zeros(2 * labels.len(), family.params.len());
        for (k, b) in family.basis.iter().enumerate() {
            for (r, l) in labels.iter().enumerate() {
                let z = b.coeff(l);
                rows[(2 * r, k)] = z.re;
                rows[(2 * r + 1, k)] = z.im;
            }
        }
        out.add_constraint_rows(&rows);
    }

    let sol = out.solution_space();
    let keep: Vec<usize> = (0..out.params.len())
        .filter(|&k| sol.iter().any(|v| v[k].abs() > RREF_TOL))
        .collect();
    if keep.len() == out.params.len() {
        return out;
    }
    let removed: Vec<String> = (0..out.params.len())
        .filter(|k| !keep.contains(k))
        .map(|k| out.params[k].clone())
        .collect();
    let m = out.constraint_matrix();
    let mut reduced = DMatrix::zeros(m.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        reduced.set_column(j, &m.column(k));
    }
    out.params = keep.iter().map(|&k| out.params[k].clone()).collect();
    out.basis = keep.iter().map(|&k| out.basis[k].clone()).collect();
    out.set_constraints(&reduced);
    out.notes
        .push(format!("removed non-classical terms: {}", removed.join(", ")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::expm_hermitian;
    use crate::linalg::rank_svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn span_residual(v: &OperatorExpr, span: &[OperatorExpr]) -> f64 {
        // least squares of v onto span via normal equations on real coefficients
        let mut all = span.to_vec();
        all.push(v.clone());
        let m = coefficient_matrix(&all);
        let a = m.columns(0, span.len()).into_owned();
        let b = m.column(span.len()).into_owned();
        let x = (a.transpose() * &a).try_inverse().unwrap() * a.transpose() * &b;
        (a * x - b).norm()
    }

    fn additive_reference() -> Vec<OperatorExpr> {
        HamiltonianFamily::additive_allowed().basis
    }

    #[test]
    fn additive_commutant_is_six_dimensional() {
        let com = commutant_basis(&ConservedQuantity::additive(), &pauli_ambient(2)).unwrap();
        assert_eq!(com.dimension(), 6);
        assert!(!com.degenerate);
        let reference = additive_reference();
        for b in &com.basis {
            assert!(span_residual(b, &reference) < 1e-12, "{b}");
        }
        for r in &reference {
            assert!(span_residual(r, &com.basis) < 1e-12, "{r}");
        }
    }

    #[test]
    fn identity_charge_keeps_full_ambient() {
        let id = ConservedQuantity::custom(OperatorExpr::identity(2)).unwrap();
        let com = commutant_basis(&id, &pauli_ambient(2)).unwrap();
        assert_eq!(com.dimension(), 16);
        assert!(com.degenerate);
    }

    #[test]
    fn nonadditive_dimension_matches_independent_rank() {
        let amb = pauli_ambient(2);
        let c = ConservedQuantity::nonadditive();
        let com = commutant_basis(&c, &amb).unwrap();
        let m = commutator_constraints(&amb, &c.expr).unwrap();
        assert_eq!(com.dimension(), amb.len() - rank_svd(&m, 1e-10));
        for b in &com.basis {
            let r = qubit_dense(b).commutator(&c.dense()).unwrap().frobenius_norm();
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn empty_or_dependent_ambient_rejected() {
        let c = ConservedQuantity::additive();
        assert!(matches!(commutant_basis(&c, &[]), Err(Error::Structural(_))));
        let dup = vec![OperatorExpr::label("XX"), OperatorExpr::label("XX")];
        assert!(commutant_basis(&c, &dup).is_err());
    }

    #[test]
    fn classical_family_constraints() {
        let f = constrain_family(&HamiltonianFamily::classical_general(), &ConservedQuantity::nonadditive()).unwrap();
        assert_eq!(f.constraint_rank(), 2);
        assert_eq!(f.relations(), vec!["α = -a", "β = -b"]);
        assert_eq!(f.free_params(), vec!["γ", "a", "b", "c"]);
    }

    #[test]
    fn diagonal_family_unconstrained() {
        let f = HamiltonianFamily::pauli_family("diag", vec![1], &[("p", "ZI"), ("q", "IZ")]);
        let g = constrain_family(&f, &ConservedQuantity::additive()).unwrap();
        assert_eq!(g.constraint_rank(), 0);
    }

    #[test]
    fn channel_family_keeps_mediator_coupling() {
        let f = constrain_family(&HamiltonianFamily::channel(), &ConservedQuantity::channel3()).unwrap();
        assert_eq!(f.relations(), vec!["α = -a", "β = -b"]);
        assert!(f.free_params().contains(&"a'".to_string()));
    }

    #[test]
    fn y_variant_family_couples_beta_and_gamma() {
        let f = constrain_family(&HamiltonianFamily::classical_general_y(), &ConservedQuantity::nonadditive()).unwrap();
        assert_eq!(f.relations(), vec!["α = -a", "β = -γ - b"]);
    }

    #[test]
    fn conservation_residuals() {
        let swap = qubit_dense(&crate::heisenberg::swap_expr());
        let r = check_conservation(&swap, &ConservedQuantity::nonadditive(), ConservationMode::Unitary).unwrap();
        assert!(r < 1e-12);
        let x = qubit_dense(&OperatorExpr::label("XI"));
        let r = check_conservation(&x, &ConservedQuantity::additive(), ConservationMode::Hamiltonian).unwrap();
        assert!(r > 1.0);
        let h = qubit_dense(&crate::heisenberg::hnet_build());
        let r = check_conservation(&h, &ConservedQuantity::nonadditive(), ConservationMode::Hamiltonian).unwrap();
        assert!(r < 1e-12);
        let three = DenseOperator::identity(&[2, 2, 2]);
        assert!(matches!(
            check_conservation(&three, &ConservedQuantity::additive(), ConservationMode::Unitary),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn classicality_filter_examples() {
        let f = HamiltonianFamily::pauli_family("xx", vec![1], &[("k", "XX")]);
        let g = classicality_filter(&f);
        assert!(g.params.is_empty());

        let f = HamiltonianFamily::pauli_family("xz", vec![1], &[("k", "XZ")]);
        assert_eq!(classicality_filter(&f).params, vec!["k"]);

        let f = constrain_family(&HamiltonianFamily::classical_general(), &ConservedQuantity::nonadditive()).unwrap();
        let g = classicality_filter(&f);
        assert_eq!(g.params, f.params);
        assert_eq!(g.relations(), f.relations());
    }

    #[test]
    fn filter_keeps_classical_part_of_mixed_family() {
        let f = HamiltonianFamily::additive_allowed();
        let g = classicality_filter(&f);
        assert_eq!(g.params, vec!["a", "b", "c", "t"]);
    }

    #[test]
    fn constrained_members_generate_conserving_unitaries() {
        let c = ConservedQuantity::nonadditive();
        let f = constrain_family(&HamiltonianFamily::classical_general(), &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = f.random_params(&mut rng, 2.0);
            let h = qubit_dense(&f.member(&p).unwrap());
            let u = expm_hermitian(&h, rng.random_range(0.0..6.3)).unwrap();
            assert!(check_conservation(&u, &c, ConservationMode::Unitary).unwrap() < 1e-10);
        }
    }

    #[test]
    fn member_rejects_constraint_violation() {
        let f = constrain_family(&HamiltonianFamily::classical_general(), &ConservedQuantity::nonadditive()).unwrap();
        assert!(f.member(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(f.member(&[1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).is_ok());
    }
}
