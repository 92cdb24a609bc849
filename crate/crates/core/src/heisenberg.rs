//! Heisenberg-picture evolution of the two-qubit `(Q, M)` descriptor frame.
//!
//! Descriptors are always written in the `t_0` Pauli basis. A gate applied at
//! slice `t_i` is expressed through the descriptors of slice `t_{i-1}`, so the
//! symbolic update is `q(t_i) = G(t_{i-1})† q(t_{i-1}) G(t_{i-1})`. This is
//! the same as conjugating by the composite `U_i ⋯ U_1` of the `t_0` matrices.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{partial_trace, qubit_dense, DenseOperator};
use crate::error::{Error, Result};
use crate::pauli::{commutator, OperatorExpr, Pauli, PauliLabel};
use crate::states::{bloch_vector, validate_density, STATE_TOL};

pub const QUBIT_DIMS: [usize; 2] = [2, 2];
pub const Q: usize = 0;
pub const M: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateSpec {
    /// `½(I + Z_M) + ½(I − Z_M) X_Q`
    CnotMq,
    /// `½(I + Z_M) + ½(I − Z_M) Z_Q`
    CphaseMq,
    /// `cos(θ/2) I − i sin(θ/2) Y_M`
    RyM(f64),
    Swap,
    /// `cos η I + i sin η SWAP`
    PartialSwap(f64),
}

impl GateSpec {
    /// Gate as a Pauli sum on `(Q, M)` in terms of the `t_0` generators.
    pub fn expr(&self) -> OperatorExpr {
        let r = |t: &[(&str, f64)]| OperatorExpr::from_real_terms(2, t).expect("two-site labels");
        match *self {
            GateSpec::CnotMq => r(&[("II", 0.5), ("IZ", 0.5), ("XI", 0.5), ("XZ", -0.5)]),
            GateSpec::CphaseMq => r(&[("II", 0.5), ("IZ", 0.5), ("ZI", 0.5), ("ZZ", -0.5)]),
            GateSpec::RyM(theta) => {
                let mut e = r(&[("II", (theta / 2.0).cos())]);
                e.add_term("IY".parse().unwrap(), Complex64::new(0.0, -(theta / 2.0).sin()));
                e
            }
            GateSpec::Swap => swap_expr(),
            GateSpec::PartialSwap(eta) => {
                let id = OperatorExpr::identity(2).scale_real(eta.cos());
                let s = swap_expr().scale(Complex64::new(0.0, eta.sin()));
                &id + &s
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            GateSpec::RyM(a) | GateSpec::PartialSwap(a) => a.is_finite(),
            _ => true,
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::CnotMq => write!(f, "CNOT_MQ"),
            GateSpec::CphaseMq => write!(f, "CPHASE_MQ"),
            GateSpec::RyM(t) => write!(f, "RY_M({t})"),
            GateSpec::Swap => write!(f, "SWAP"),
            GateSpec::PartialSwap(e) => write!(f, "PARTIAL_SWAP({e})"),
        }
    }
}

impl FromStr for GateSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let param = |prefix: &str| -> Result<f64> {
            let inner = s[prefix.len()..]
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| Error::Structural(format!("expected {prefix}(angle), got {s:?}")))?;
            inner
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Structural(format!("bad angle in {s:?}: {e}")))
        };
        match s {
            "CNOT_MQ" => Ok(GateSpec::CnotMq),
            "CPHASE_MQ" => Ok(GateSpec::CphaseMq),
            "SWAP" => Ok(GateSpec::Swap),
            _ if s.starts_with("RY_M") => Ok(GateSpec::RyM(param("RY_M")?)),
            _ if s.starts_with("PARTIAL_SWAP") => Ok(GateSpec::PartialSwap(param("PARTIAL_SWAP")?)),
            _ => Err(Error::Structural(format!("unknown gate kind {s:?}"))),
        }
    }
}

/// `½(II + XX + YY + ZZ)`.
pub fn swap_expr() -> OperatorExpr {
    OperatorExpr::from_real_terms(2, &[("II", 0.5), ("XX", 0.5), ("YY", 0.5), ("ZZ", 0.5)])
        .expect("two-site labels")
}

pub fn gate_unitary(g: &GateSpec) -> Result<DenseOperator> {
    if !g.is_finite() {
        return Err(Error::Structural(format!("non-finite gate angle in {g}")));
    }
    Ok(qubit_dense(&g.expr()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(gates: Vec<GateSpec>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::Structural("a circuit needs at least one gate".into()));
        }
        Ok(Circuit { gates })
    }

    /// CNOT, RY(π/2) on M, CPHASE, SWAP, RY(−π/2) on M, CNOT.
    pub fn witness() -> Self {
        Circuit {
            gates: vec![
                GateSpec::CnotMq,
                GateSpec::RyM(FRAC_PI_2),
                GateSpec::CphaseMq,
                GateSpec::Swap,
                GateSpec::RyM(-FRAC_PI_2),
                GateSpec::CnotMq,
            ],
        }
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Composite `U_k ⋯ U_1` after each of the first `k` gates, `k = 0..=len`.
    pub fn prefix_unitaries(&self) -> Result<Vec<DenseOperator>> {
        let mut out = vec![DenseOperator::identity(&QUBIT_DIMS)];
        for g in &self.gates {
            let u = gate_unitary(g)?;
            let next = u.checked_mul(out.last().expect("nonempty"))?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn unitary(&self) -> Result<DenseOperator> {
        Ok(self.prefix_unitaries()?.pop().expect("nonempty"))
    }
}

/// Descriptor triples `(q_x, q_y, q_z)` of `Q` and `M` at one time slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorFrame {
    pub time: usize,
    /// Index 0 is `Q`, index 1 is `M`.
    pub triples: Vec<[OperatorExpr; 3]>,
}

impl DescriptorFrame {
    /// The `t_0` frame: `q_α^{(s)} = σ_α` on site `s`.
    pub fn canonical(n_sites: usize) -> Self {
        let triples = (0..n_sites)
            .map(|s| {
                [Pauli::X, Pauli::Y, Pauli::Z].map(|p| OperatorExpr::single(n_sites, s, p))
            })
            .collect();
        DescriptorFrame { time: 0, triples }
    }

    pub fn is_canonical(&self) -> bool {
        self.triples == Self::canonical(self.triples.len()).triples
    }

    pub fn get(&self, subsystem: usize, component: usize) -> &OperatorExpr {
        &self.triples[subsystem][component]
    }

    /// Largest violation of Hermiticity, involution and `[q_i, q_j] = 2i ε_ijk q_k`
    /// over all triples, in dense Frobenius norm.
    pub fn algebra_residual(&self) -> Result<f64> {
        let n = self.triples.first().map(|t| t[0].n_sites()).unwrap_or(0);
        let id = qubit_dense(&OperatorExpr::identity(n));
        let mut worst: f64 = 0.0;
        for triple in &self.triples {
            let dense: Vec<DenseOperator> = triple.iter().map(qubit_dense).collect();
            for d in &dense {
                worst = worst.max(d.hermiticity_residual());
                worst = worst.max((&(d * d) - &id).frobenius_norm());
            }
            for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let lhs = dense[i].commutator(&dense[j])?;
                let rhs = dense[k].scale(Complex64::new(0.0, 2.0));
                worst = worst.max((&lhs - &rhs).frobenius_norm());
            }
        }
        Ok(worst)
    }
}

/// Symbolic gate-at-a-time evolution; returns `len + 1` frames.
pub fn evolve_descriptors(c: &Circuit, frame0: &DescriptorFrame) -> Result<Vec<DescriptorFrame>> {
    if !frame0.is_canonical() {
        return Err(Error::ContractViolation(
            "descriptor evolution starts from the canonical t_0 frame".into(),
        ));
    }
    let mut frames = vec![frame0.clone()];
    for g in c.gates() {
        let prev = frames.last().expect("nonempty");
        let gate = g.expr().substitute(&prev.triples)?;
        let gate_dag = gate.adjoint();
        let triples = prev
            .triples
            .iter()
            .map(|t| -> Result<[OperatorExpr; 3]> {
                let conj = |q: &OperatorExpr| gate_dag.checked_mul(q)?.checked_mul(&gate);
                Ok([conj(&t[0])?, conj(&t[1])?, conj(&t[2])?])
            })
            .collect::<Result<Vec<_>>>()?;
        frames.push(DescriptorFrame {
            time: prev.time + 1,
            triples,
        });
    }
    Ok(frames)
}

/// Frames obtained by conjugating the `t_0` generators with the composite
/// matrix product and expanding back in the Pauli basis.
pub fn evolve_descriptors_dense(c: &Circuit) -> Result<Vec<DescriptorFrame>> {
    let base = DescriptorFrame::canonical(2);
    c.prefix_unitaries()?
        .into_iter()
        .enumerate()
        .map(|(time, u)| {
            let triples = base
                .triples
                .iter()
                .map(|t| -> Result<[OperatorExpr; 3]> {
                    let conj = |q: &OperatorExpr| {
                        crate::dense::pauli_decompose(&qubit_dense(q).conjugate_by(&u)?)
                    };
                    Ok([conj(&t[0])?, conj(&t[1])?, conj(&t[2])?])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DescriptorFrame { time, triples })
        })
        .collect()
}

/// Reference descriptor table for the witness circuit: `[time][subsystem][component]`
/// as signed two-site labels over `(Q, M)`.
pub const REFERENCE_DESCRIPTOR_TABLE: [[[&str; 3]; 2]; 7] = [
    [["+XI", "+YI", "+ZI"], ["+IX", "+IY", "+IZ"]],
    [["+XI", "+YZ", "+ZZ"], ["+XX", "+XY", "+IZ"]],
    [["+XI", "+YZ", "+ZZ"], ["+IZ", "+XY", "-XX"]],
    [["-IX", "-ZY", "+ZZ"], ["+ZI", "+YX", "-XX"]],
    [["+ZI", "+YX", "-XX"], ["-IX", "-ZY", "+ZZ"]],
    [["+ZI", "+YX", "-XX"], ["-ZZ", "-ZY", "-IX"]],
    [["+ZI", "-YI", "+XI"], ["-IZ", "-IY", "-IX"]],
];

/// Parses `"+XZ"` / `"-XZ"` into `±P`.
pub fn parse_signed_label(s: &str) -> Result<OperatorExpr> {
    let (sign, rest) = match s.as_bytes().first() {
        Some(b'+') => (1.0, &s[1..]),
        Some(b'-') => (-1.0, &s[1..]),
        _ => (1.0, s),
    };
    let label: PauliLabel = rest.parse()?;
    Ok(OperatorExpr::term(label, Complex64::new(sign, 0.0)))
}

/// Renders `±P` as `"+P"`/`"-P"`, anything else as its full sum.
pub fn signed_label(e: &OperatorExpr, tol: f64) -> String {
    match e.as_signed_label(tol) {
        Some((1, l)) => format!("+{l}"),
        Some((_, l)) => format!("-{l}"),
        None => e.to_string(),
    }
}

/// One cell of a descriptor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorCell {
    pub time: usize,
    pub subsystem: String,
    pub component: String,
    pub label: String,
    pub expected: String,
    pub matches: bool,
}

/// Compares frames against [`REFERENCE_DESCRIPTOR_TABLE`] cell by cell.
///
/// A cell matches when its Pauli expansion is the expected signed product
/// with every other coefficient below `tol`.
pub fn compare_with_reference(frames: &[DescriptorFrame], tol: f64) -> Result<Vec<DescriptorCell>> {
    let mut cells = Vec::new();
    for f in frames {
        let Some(row) = REFERENCE_DESCRIPTOR_TABLE.get(f.time) else {
            return Err(Error::Structural(format!("no reference row for t_{}", f.time)));
        };
        for (s, name) in ["Q", "M"].iter().enumerate() {
            for (k, comp) in ["x", "y", "z"].iter().enumerate() {
                let expected = parse_signed_label(row[s][k])?;
                let got = f.get(s, k);
                cells.push(DescriptorCell {
                    time: f.time,
                    subsystem: name.to_string(),
                    component: comp.to_string(),
                    label: signed_label(got, tol),
                    expected: row[s][k].to_string(),
                    matches: got.max_coeff_distance(&expected) < tol,
                });
            }
        }
    }
    Ok(cells)
}

/// Bloch vector of `Q` after the witness circuit with `Q` in `|0>` and the
/// mediator in `mediator_state`.
pub fn witness_state_check(mediator_state: &DenseOperator) -> Result<[f64; 3]> {
    if mediator_state.dim() != 2 {
        return Err(Error::DimensionMismatch("mediator must be a qubit".into()));
    }
    validate_density(mediator_state, STATE_TOL)
        .map_err(|e| Error::ContractViolation(format!("mediator state: {e}")))?;
    let q0 = DenseOperator::basis_projector(2, 0);
    let rho = q0.kron(&mediator_state.clone().with_dims(vec![2])?);
    let u = Circuit::witness().unitary()?;
    let out = (&(&u * &rho) * &u.adjoint()).with_dims(QUBIT_DIMS.to_vec())?;
    bloch_vector(&partial_trace(&out, &[Q])?)
}

/// `2 CNOT + R_Y(π/2) + R_Y(−π/2) + CPHASE + SWAP` in the `t_0` basis.
pub fn hnet_build() -> OperatorExpr {
    let terms = [
        GateSpec::CnotMq.expr().scale_real(2.0),
        GateSpec::RyM(FRAC_PI_2).expr(),
        GateSpec::RyM(-FRAC_PI_2).expr(),
        GateSpec::CphaseMq.expr(),
        GateSpec::Swap.expr(),
    ];
    terms
        .iter()
        .fold(OperatorExpr::zero(2), |acc, t| &acc + t)
}

/// `Z_Q + Z_M + Z_Q Z_M` on two qubits.
pub fn nonadditive_charge() -> OperatorExpr {
    OperatorExpr::from_real_terms(2, &[("ZI", 1.0), ("IZ", 1.0), ("ZZ", 1.0)]).expect("labels")
}

/// Symbolic `[H_net, Z_Q + Z_M + Z_Q Z_M]`.
pub fn hnet_conservation_commutator() -> Result<OperatorExpr> {
    commutator(&hnet_build(), &nonadditive_charge())
}

/// `‖[U_circuit, C]‖_F` for the composite witness unitary. Reported only.
pub fn composite_conservation_residual() -> Result<f64> {
    let u = Circuit::witness().unitary()?;
    Ok(u.commutator(&qubit_dense(&nonadditive_charge()))?.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::basis_ket;

    #[test]
    fn swap_moves_01_to_10() {
        let u = gate_unitary(&GateSpec::Swap).unwrap();
        let out = u.matrix() * basis_ket(&QUBIT_DIMS, 1);
        assert!((out - basis_ket(&QUBIT_DIMS, 2)).norm() < 1e-15);
    }

    #[test]
    fn cnot_flips_probe_when_mediator_is_one() {
        let u = gate_unitary(&GateSpec::CnotMq).unwrap();
        // |q=0, m=1> is index 1, |q=1, m=1> is index 3
        let out = u.matrix() * basis_ket(&QUBIT_DIMS, 1);
        assert!((out - basis_ket(&QUBIT_DIMS, 3)).norm() < 1e-15);
        let out = u.matrix() * basis_ket(&QUBIT_DIMS, 0);
        assert!((out - basis_ket(&QUBIT_DIMS, 0)).norm() < 1e-15);
    }

    #[test]
    fn ry_half_pi_matrix() {
        let u = gate_unitary(&GateSpec::RyM(FRAC_PI_2)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = OperatorExpr::term("II".parse().unwrap(), Complex64::new(s, 0.0));
        let want = &want + &OperatorExpr::term("IY".parse().unwrap(), Complex64::new(0.0, -s));
        assert!(u.max_distance(&qubit_dense(&want)) < 1e-15);
    }

    #[test]
    fn every_gate_is_unitary() {
        for g in [
            GateSpec::CnotMq,
            GateSpec::CphaseMq,
            GateSpec::RyM(0.7),
            GateSpec::Swap,
            GateSpec::PartialSwap(0.3),
        ] {
            assert!(gate_unitary(&g).unwrap().unitarity_residual() < 1e-12, "{g}");
        }
    }

    #[test]
    fn gate_parsing() {
        assert_eq!("CNOT_MQ".parse::<GateSpec>().unwrap(), GateSpec::CnotMq);
        assert_eq!("RY_M(0.5)".parse::<GateSpec>().unwrap(), GateSpec::RyM(0.5));
        assert_eq!(
            "PARTIAL_SWAP(1)".parse::<GateSpec>().unwrap(),
            GateSpec::PartialSwap(1.0)
        );
        assert!(matches!("TOFFOLI".parse::<GateSpec>(), Err(Error::Structural(_))));
        assert!("RY_M(abc)".parse::<GateSpec>().is_err());
        assert!(gate_unitary(&GateSpec::RyM(f64::NAN)).is_err());
    }

    #[test]
    fn empty_circuit_rejected() {
        assert!(Circuit::new(vec![]).is_err());
    }

    #[test]
    fn single_swap_exchanges_triples() {
        let c = Circuit::new(vec![GateSpec::Swap]).unwrap();
        let frames = evolve_descriptors(&c, &DescriptorFrame::canonical(2)).unwrap();
        assert_eq!(frames.len(), 2);
        let t0 = &frames[0];
        let t1 = &frames[1];
        assert_eq!(t1.triples[Q], t0.triples[M]);
        assert_eq!(t1.triples[M], t0.triples[Q]);
    }

    #[test]
    fn non_canonical_start_rejected() {
        let mut f = DescriptorFrame::canonical(2);
        f.triples.swap(0, 1);
        assert!(evolve_descriptors(&Circuit::witness(), &f).is_err());
    }

    #[test]
    fn t3_probe_x_is_minus_mediator_x() {
        let frames = evolve_descriptors(&Circuit::witness(), &DescriptorFrame::canonical(2)).unwrap();
        let got = frames[3].get(Q, 0);
        assert!(got.max_coeff_distance(&OperatorExpr::label("IX").scale_real(-1.0)) < 1e-12);
    }

    #[test]
    fn t6_row() {
        let frames = evolve_descriptors(&Circuit::witness(), &DescriptorFrame::canonical(2)).unwrap();
        let t6 = &frames[6];
        let want_q = ["+ZI", "-YI", "+XI"];
        let want_m = ["-IZ", "-IY", "-IX"];
        for k in 0..3 {
            assert!(t6.get(Q, k).max_coeff_distance(&parse_signed_label(want_q[k]).unwrap()) < 1e-12);
            assert!(t6.get(M, k).max_coeff_distance(&parse_signed_label(want_m[k]).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn symbolic_and_dense_routes_agree() {
        let c = Circuit::witness();
        let sym = evolve_descriptors(&c, &DescriptorFrame::canonical(2)).unwrap();
        let den = evolve_descriptors_dense(&c).unwrap();
        assert_eq!(sym.len(), den.len());
        for (a, b) in sym.iter().zip(&den) {
            for s in 0..2 {
                for k in 0..3 {
                    assert!(a.get(s, k).max_coeff_distance(b.get(s, k)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frames_satisfy_su2() {
        let frames = evolve_descriptors(&Circuit::witness(), &DescriptorFrame::canonical(2)).unwrap();
        for f in &frames {
            assert!(f.algebra_residual().unwrap() < 1e-12, "t_{}", f.time);
        }
    }

    #[test]
    fn witness_for_basis_and_mixed_mediators() {
        for m in [
            DenseOperator::basis_projector(2, 0),
            DenseOperator::basis_projector(2, 1),
            DenseOperator::diag_real(&[0.5, 0.5]),
        ] {
            let b = witness_state_check(&m).unwrap();
            assert!((b[0] - 1.0).abs() < 1e-10 && b[1].abs() < 1e-10 && b[2].abs() < 1e-10);
        }
    }

    #[test]
    fn witness_rejects_invalid_mediator() {
        let bad = DenseOperator::diag_real(&[0.7, 0.7]);
        assert!(matches!(witness_state_check(&bad), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn hnet_is_hermitian_with_half_xx() {
        let h = hnet_build();
        assert!(h.is_hermitian(1e-13));
        assert!((h.coeff_of("XX") - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((h.coeff_of("YY") - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hnet_conserves_nonadditive_charge() {
        let c = hnet_conservation_commutator().unwrap();
        assert!(c.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn composite_circuit_does_not_commute_with_charge() {
        // Finding, not a contract: reported by the CLI.
        assert!(composite_conservation_residual().unwrap() > 1.0);
    }
}
