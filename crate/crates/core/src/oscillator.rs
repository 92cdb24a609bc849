//! Holstein–Primakoff image of the two-qubit model on truncated Fock spaces.
//!
//! The probe `Q` uses mode `a` truncated to two levels; the mediator uses
//! mode `b` truncated to `d_b` levels. Site order is `(Q, M)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{CMatrix, DenseOperator, HermitianEigen};
use crate::error::{Error, Result};
use crate::heisenberg::hnet_build;
use crate::pauli::Pauli;
use crate::witness::coherence;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `a`, `a†` and `a†a` on `d` levels.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub d: usize,
    pub a: DenseOperator,
    pub a_dag: DenseOperator,
    pub number: DenseOperator,
}

pub fn fock_ops(d: usize) -> Result<FockOperators> {
    if d < 2 {
        return Err(Error::Structural(format!("Fock truncation needs d >= 2, got {d}")));
    }
    let a = CMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a = DenseOperator::new(vec![d], a)?;
    let a_dag = a.adjoint();
    let number = a_dag.checked_mul(&a)?;
    Ok(FockOperators { d, a, a_dag, number })
}

impl FockOperators {
    /// `[a, a†]`; equals `I − d |d−1><d−1|`.
    pub fn canonical_commutator(&self) -> DenseOperator {
        self.a.commutator(&self.a_dag).expect("same profile")
    }

    /// `f(a†a)` with `f` applied to the diagonal spectrum.
    pub fn number_function(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let v: Vec<f64> = (0..self.d).map(|n| f(n as f64)).collect();
        DenseOperator::diag_real(&v)
    }
}

/// `q = S` for spin `s` under the truncated Holstein–Primakoff map.
#[derive(Debug, Clone)]
pub struct HPQubit {
    pub s: f64,
    pub d: usize,
    pub q_x: DenseOperator,
    pub q_y: DenseOperator,
    pub q_z: DenseOperator,
}

/// `S_z = s − a†a`, `S+ = √(2s) √(1 − a†a/2s) a`, `S− = (S+)†`.
///
/// Negative values of `1 − a†a/2s` on high levels are clamped to zero
/// before the square root; at `s = ½, d = 2` this reproduces `σ/2` exactly.
pub fn hp_qubit(s: f64, d: usize) -> Result<HPQubit> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ContractViolation(format!("spin must be positive, got {s}")));
    }
    let f = fock_ops(d)?;
    let root = f.number_function(|n| (1.0 - n / (2.0 * s)).max(0.0).sqrt());
    let s_plus = root.checked_mul(&f.a)?.scale_real((2.0 * s).sqrt());
    let s_minus = s_plus.adjoint();
    let q_x = s_plus.checked_add(&s_minus)?.scale_real(0.5);
    let q_y = s_plus
        .checked_add(&s_minus.scale_real(-1.0))?
        .scale(Complex64::new(0.0, -0.5));
    let q_z = f.number_function(|n| s - n);
    Ok(HPQubit { s, d, q_x, q_y, q_z })
}

impl HPQubit {
    pub fn component(&self, p: Pauli) -> DenseOperator {
        match p {
            Pauli::I => DenseOperator::identity(&[self.d]),
            Pauli::X => self.q_x.clone(),
            Pauli::Y => self.q_y.clone(),
            Pauli::Z => self.q_z.clone(),
        }
    }

    /// `max_k ‖[q_i, q_j] − i q_k‖_F` over cyclic `(i, j, k)`.
    pub fn su2_residual(&self) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let triples = [
            (&self.q_x, &self.q_y, &self.q_z),
            (&self.q_y, &self.q_z, &self.q_x),
            (&self.q_z, &self.q_x, &self.q_y),
        ];
        triples
            .iter()
            .map(|(a, b, c)| {
                a.commutator(b)
                    .and_then(|x| x.checked_add(&c.scale(-i)))
                    .map(|x| x.frobenius_norm())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }
}

fn kron2(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let dims = vec![a.dim(), b.dim()];
    a.kron(b).with_dims(dims).expect("product profile")
}

/// Probe truncation.
pub const D_A: usize = 2;

/// `3/2 (I − b†b) + 1/2 (I − a†a) + q_x^{(a)} (1/2 + b†b)
///  + 1/4 [b† √(1−b†b) √(1−a†a) a + a† √(1−a†a) √(1−b†b) b]`.
pub fn hp_hamiltonian(d_b: usize) -> Result<DenseOperator> {
    let fa = fock_ops(D_A)?;
    let fb = fock_ops(d_b)?;
    let qa = hp_qubit(0.5, D_A)?;
    let ia = DenseOperator::identity(&[D_A]);
    let ib = DenseOperator::identity(&[d_b]);
    let clamp = |n: f64| (1.0 - n).max(0.0).sqrt();
    let ra = fa.number_function(clamp);
    let rb = fb.number_function(clamp);

    let free_b = kron2(&ia, &ib.checked_add(&fb.number.scale_real(-1.0))?).scale_real(1.5);
    let free_a = kron2(&ia.checked_add(&fa.number.scale_real(-1.0))?, &ib).scale_real(0.5);
    let control = kron2(&qa.q_x, &ib.scale_real(0.5).checked_add(&fb.number)?);
    let hop = kron2(&ra.checked_mul(&fa.a)?, &fb.a_dag.checked_mul(&rb)?);
    let hop = hop.checked_add(&hop.adjoint())?.scale_real(0.25);
    free_b.checked_add(&free_a)?.checked_add(&control)?.checked_add(&hop)
}

/// Qubit Pauli expression mapped through `σ → 2q` on both sites, with the
/// probe on `d_a = 2` and the mediator on `d_b` levels.
pub fn hp_image(expr: &crate::pauli::OperatorExpr, d_b: usize) -> Result<DenseOperator> {
    if expr.n_sites() != 2 {
        return Err(Error::SiteCountMismatch {
            left: 2,
            right: expr.n_sites(),
        });
    }
    let qa = hp_qubit(0.5, D_A)?;
    let qb = hp_qubit(0.5, d_b)?;
    let lift = |q: &HPQubit, p: Pauli| {
        if p == Pauli::I {
            q.component(p)
        } else {
            q.component(p).scale_real(2.0)
        }
    };
    let mut out = DenseOperator::zeros(&[D_A, d_b]);
    for (label, c) in expr.terms() {
        let s = label.sites();
        let term = kron2(&lift(&qa, s[0]), &lift(&qb, s[1])).scale(*c);
        out = out.checked_add(&term)?;
    }
    Ok(out)
}

/// `H − (Tr H / dim) I`.
pub fn traceless_part(h: &DenseOperator) -> DenseOperator {
    let shift = h.trace() / Complex64::new(h.dim() as f64, 0.0);
    h.checked_add(&DenseOperator::identity(h.dims()).scale(-shift))
        .expect("same profile")
}

/// Bosonic Hamiltonian against the mapped qubit `H_net`, modulo identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpComparison {
    pub d_b: usize,
    pub difference_norm: f64,
    pub bosonic_norm: f64,
    pub mapped_norm: f64,
    /// Row-major real and imaginary parts of the traceless difference.
    pub difference: Vec<(f64, f64)>,
}

pub fn compare_with_hnet(d_b: usize) -> Result<HpComparison> {
    let bosonic = traceless_part(&hp_hamiltonian(d_b)?);
    let mapped = traceless_part(&hp_image(&hnet_build(), d_b)?);
    let diff = bosonic.checked_add(&mapped.scale_real(-1.0))?;
    let m = diff.matrix();
    let difference = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)].re, m[(i, j)].im))
        .collect();
    Ok(HpComparison {
        d_b,
        difference_norm: diff.frobenius_norm(),
        bosonic_norm: bosonic.frobenius_norm(),
        mapped_norm: mapped.frobenius_norm(),
        difference,
    })
}

/// Reported commutator norms for the truncated Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorAudit {
    pub d_b: usize,
    pub hermiticity_residual: f64,
    /// `‖U†U − I‖_F` at `t = 1`.
    pub unitarity_residual: f64,
    /// `‖[H, C]‖_F` with `C` the image of `Z_Q + Z_M + Z_Q Z_M`.
    pub nonadditive_residual: f64,
    /// `‖[H, b†b]‖_F`.
    pub number_residual: f64,
}

pub fn oscillator_audit(d_b: usize) -> Result<OscillatorAudit> {
    let h = hp_hamiltonian(d_b)?;
    let c = hp_image(&crate::heisenberg::nonadditive_charge(), d_b)?;
    let nb = kron2(&DenseOperator::identity(&[D_A]), &fock_ops(d_b)?.number);
    let u = HermitianEigen::new(&h)?.evolution(1.0);
    Ok(OscillatorAudit {
        d_b,
        hermiticity_residual: h.hermiticity_residual(),
        unitarity_residual: u.unitarity_residual(),
        nonadditive_residual: h.commutator(&c)?.frobenius_norm(),
        number_residual: h.commutator(&nb)?.frobenius_norm(),
    })
}

/// Coherence of `Q` over time for each mediator Fock state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorRun {
    pub d_b: usize,
    pub times: Vec<f64>,
    /// `coherence[k][i]`: mediator `|k>`, time `times[i]`.
    pub coherence: Vec<Vec<f64>>,
    pub max_coherence: Vec<f64>,
    /// Largest `|‖ψ(t)‖ − 1|` along all trajectories.
    pub norm_drift: f64,
}

/// `Q` starts in `|0>`; the mediator in each `|k>`, `k < d_b`.
pub fn oscillator_witness_run(d_b: usize, t_grid: &[f64]) -> Result<OscillatorRun> {
    let h = hp_hamiltonian(d_b)?;
    let eig = HermitianEigen::new(&h)?;
    let per_time: Vec<Result<(Vec<f64>, f64)>> = t_grid
        .par_iter()
        .map(|&t| {
            let u = eig.evolution(t);
            let mut cohs = Vec::with_capacity(d_b);
            let mut drift: f64 = 0.0;
            for k in 0..d_b {
                // |q=0, k> has index k
                let psi = u.matrix().column(k).into_owned();
                drift = drift.max((psi.norm() - 1.0).abs());
                let rho01: Complex64 = (0..d_b).map(|m| psi[m] * psi[d_b + m].conj()).sum();
                let rho00: f64 = (0..d_b).map(|m| psi[m].norm_sqr()).sum();
                let rq = DenseOperator::new(
                    vec![2],
                    DMatrix::from_row_slice(
                        2,
                        2,
                        &[
                            ONE * rho00,
                            rho01,
                            rho01.conj(),
                            ONE * (psi.norm_squared() - rho00),
                        ],
                    ),
                )?;
                cohs.push(coherence(&rq)?);
            }
            Ok((cohs, drift))
        })
        .collect();
    let mut coh = vec![Vec::with_capacity(t_grid.len()); d_b];
    let mut norm_drift: f64 = 0.0;
    for r in per_time {
        let (c, d) = r?;
        norm_drift = norm_drift.max(d);
        for (k, v) in c.into_iter().enumerate() {
            coh[k].push(v);
        }
    }
    let max_coherence = coh.iter().map(|c| c.iter().copied().fold(0.0, f64::max)).collect();
    Ok(OscillatorRun {
        d_b,
        times: t_grid.to_vec(),
        coherence: coh,
        max_coherence,
        norm_drift,
    })
}
