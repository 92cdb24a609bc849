//! Partial-SWAP homogenizer and the classical-reservoir check.
//!
//! Each reservoir qubit meets the system once and is then discarded, so a
//! step only needs the 4×4 joint state `ρ ⊗ ξ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conservation::HamiltonianFamily;
use crate::dense::{partial_trace, qubit_dense, DenseOperator};
use crate::error::{Error, Result};
use crate::heisenberg::{swap_expr, M, Q, QUBIT_DIMS};
use crate::pauli::{OperatorExpr, Pauli};
use crate::states::{bloch_vector, from_bloch, trace_distance, validate_density, STATE_TOL};
use crate::witness::{Measurement, Parameter, Relation, WitnessReport};

/// `P(η) = cos η I + i sin η SWAP`.
pub fn partial_swap(eta: f64) -> DenseOperator {
    let s = qubit_dense(&swap_expr());
    DenseOperator::identity(&QUBIT_DIMS)
        .scale_real(eta.cos())
        .checked_add(&s.scale(Complex64::new(0.0, eta.sin())))
        .expect("same profile")
}

fn check_qubit_state(rho: &DenseOperator, what: &str) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::ContractViolation(format!("{what} must be a qubit state")));
    }
    validate_density(rho, STATE_TOL).map_err(|e| Error::ContractViolation(format!("{what}: {e}")))
}

/// One collision, by exact partial traces and by the closed recursion.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub rho: DenseOperator,
    pub xi_used: DenseOperator,
    pub rho_recursion: DenseOperator,
    pub xi_recursion: DenseOperator,
    /// Largest entrywise gap between the two routes.
    pub recursion_gap: f64,
}

/// `ρ' = Tr_M[P (ρ⊗ξ) P†]`, `ξ' = Tr_Q[P (ρ⊗ξ) P†]`, compared with
/// `cos²η ρ + sin²η ξ ± i cos η sin η [ξ, ρ]`.
pub fn homogenize_step(rho: &DenseOperator, xi: &DenseOperator, eta: f64) -> Result<StepResult> {
    check_qubit_state(rho, "system state")?;
    check_qubit_state(xi, "reservoir state")?;
    let p = partial_swap(eta);
    let joint = rho.kron(xi).with_dims(QUBIT_DIMS.to_vec())?;
    let out = joint.conjugate_by(&p.adjoint())?;
    let rho_new = partial_trace(&out, &[Q])?;
    let xi_new = partial_trace(&out, &[M])?;

    let (c, s) = (eta.cos(), eta.sin());
    let comm = xi.commutator(rho)?.scale(Complex64::new(0.0, c * s));
    let rho_rec = rho
        .scale_real(c * c)
        .checked_add(&xi.scale_real(s * s))?
        .checked_add(&comm)?;
    let xi_rec = xi
        .scale_real(c * c)
        .checked_add(&rho.scale_real(s * s))?
        .checked_add(&comm.scale_real(-1.0))?;
    let gap = rho_new.max_distance(&rho_rec).max(xi_new.max_distance(&xi_rec));
    Ok(StepResult {
        rho: rho_new,
        xi_used: xi_new,
        rho_recursion: rho_rec,
        xi_recursion: xi_rec,
        recursion_gap: gap,
    })
}

#[derive(Debug, Clone)]
pub struct HomogenizerConfig {
    pub n: usize,
    pub eta: f64,
    pub rho0: DenseOperator,
    pub xi: DenseOperator,
}

impl HomogenizerConfig {
    pub fn new(n: usize, eta: f64, rho0: DenseOperator, xi: DenseOperator) -> Result<Self> {
        if n == 0 {
            return Err(Error::ContractViolation("reservoir size must be at least 1".into()));
        }
        if !eta.is_finite() {
            return Err(Error::ContractViolation("coupling must be finite".into()));
        }
        check_qubit_state(&rho0, "system state")?;
        check_qubit_state(&xi, "reservoir state")?;
        Ok(HomogenizerConfig { n, eta, rho0, xi })
    }

    /// `ρ0 = ½(I + Z)`, `ξ = ½(I + X)`.
    pub fn standard(n: usize, eta: f64) -> Result<Self> {
        Self::new(n, eta, from_bloch([0.0, 0.0, 1.0]), from_bloch([1.0, 0.0, 0.0]))
    }
}

/// Step `k` of a trajectory; `k = 0` is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizerStep {
    pub step: usize,
    pub trace_distance: f64,
    /// `κ` in `ρ = κ ξ + rest`; `None` when `ξ` is maximally mixed.
    pub xi_coefficient: Option<f64>,
    /// `1 − cos^{2n} η`.
    pub predicted_coefficient: f64,
    pub rest_norm: Option<f64>,
    pub recursion_gap: f64,
    pub min_eigenvalue: f64,
    pub rho_bloch: [f64; 3],
    pub xi_used_bloch: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct HomogenizerTrajectory {
    pub eta: f64,
    pub states: Vec<DenseOperator>,
    pub used_reservoir: Vec<DenseOperator>,
    pub steps: Vec<HomogenizerStep>,
}

impl HomogenizerTrajectory {
    pub fn max_recursion_gap(&self) -> f64 {
        self.steps.iter().map(|s| s.recursion_gap).fold(0.0, f64::max)
    }

    pub fn max_coefficient_error(&self) -> Option<f64> {
        self.steps.iter().try_fold(0.0, |acc: f64, s| {
            s.xi_coefficient
                .map(|k| acc.max((k - s.predicted_coefficient).abs()))
        })
    }

    /// Largest increase of the trace distance between consecutive steps.
    pub fn max_distance_increase(&self) -> f64 {
        self.steps
            .windows(2)
            .map(|w| w[1].trace_distance - w[0].trace_distance)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Splits `ρ = κ ξ + rest` with `rest` carrying no component along ξ's
/// Bloch direction: `κ = (r·s)/|s|²`. Returns `(κ, ‖rest‖_F)`.
pub fn xi_coefficient(rho: &DenseOperator, xi: &DenseOperator) -> Result<Option<(f64, f64)>> {
    let r = bloch_vector(rho)?;
    let s = bloch_vector(xi)?;
    let ss: f64 = s.iter().map(|x| x * x).sum();
    if ss < 1e-24 {
        return Ok(None);
    }
    let kappa = (0..3).map(|i| r[i] * s[i]).sum::<f64>() / ss;
    let rest = rho.checked_add(&xi.scale_real(-kappa))?;
    Ok(Some((kappa, rest.frobenius_norm())))
}

fn record(
    k: usize,
    eta: f64,
    rho: &DenseOperator,
    xi: &DenseOperator,
    xi_used: &DenseOperator,
    gap: f64,
) -> Result<HomogenizerStep> {
    let split = xi_coefficient(rho, xi)?;
    Ok(HomogenizerStep {
        step: k,
        trace_distance: trace_distance(rho, xi)?,
        xi_coefficient: split.map(|s| s.0),
        predicted_coefficient: 1.0 - eta.cos().powi(2 * k as i32),
        rest_norm: split.map(|s| s.1),
        recursion_gap: gap,
        min_eigenvalue: crate::states::min_eigenvalue(rho)?,
        rho_bloch: bloch_vector(rho)?,
        xi_used_bloch: bloch_vector(xi_used)?,
    })
}

/// `N` collisions with fresh reservoir qubits.
pub fn run(config: &HomogenizerConfig) -> Result<HomogenizerTrajectory> {
    let mut rho = config.rho0.clone();
    let mut states = vec![rho.clone()];
    let mut used = vec![config.xi.clone()];
    let mut steps = vec![record(0, config.eta, &rho, &config.xi, &config.xi, 0.0)?];
    for k in 1..=config.n {
        let st = homogenize_step(&rho, &config.xi, config.eta)?;
        rho = st.rho;
        steps.push(record(k, config.eta, &rho, &config.xi, &st.xi_used, st.recursion_gap)?);
        states.push(rho.clone());
        used.push(st.xi_used);
    }
    Ok(HomogenizerTrajectory {
        eta: config.eta,
        states,
        used_reservoir: used,
        steps,
    })
}

/// Largest reservoir handled by [`joint_simulation`].
pub const MAX_JOINT_RESERVOIR: usize = 8;

/// Reduced system states from the full `2^{N+1}` joint evolution.
pub fn joint_simulation(config: &HomogenizerConfig) -> Result<Vec<DenseOperator>> {
    let n = config.n;
    if n > MAX_JOINT_RESERVOIR {
        return Err(Error::ContractViolation(format!(
            "joint simulation limited to {MAX_JOINT_RESERVOIR} reservoir qubits"
        )));
    }
    let sites = n + 1;
    let dims = vec![2; sites];
    let mut joint = config.rho0.clone().with_dims(vec![2])?;
    for _ in 0..n {
        joint = joint.kron(&config.xi.clone().with_dims(vec![2])?);
    }
    let mut joint = joint.with_dims(dims.clone())?;
    let mut out = vec![config.rho0.clone()];
    for k in 1..=n {
        let mut s = OperatorExpr::identity(sites);
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut l = vec![Pauli::I; sites];
            l[0] = p;
            l[k] = p;
            s = &s + &OperatorExpr::term(crate::pauli::PauliLabel::new(l), Complex64::new(1.0, 0.0));
        }
        let s = crate::dense::to_dense(&s.scale_real(0.5), &dims)?;
        let p = DenseOperator::identity(&dims)
            .scale_real(config.eta.cos())
            .checked_add(&s.scale(Complex64::new(0.0, config.eta.sin())))?;
        joint = joint.conjugate_by(&p.adjoint())?;
        out.push(partial_trace(&joint, &[0])?);
    }
    Ok(out)
}

/// `α X_Q + β Y_Q + γ Z_Q − α X_Q Z_M − β Y_Q Z_M + c Z_Q Z_M`.
pub fn reservoir_hamiltonian(alpha: f64, beta: f64, gamma: f64, c: f64) -> OperatorExpr {
    OperatorExpr::from_real_terms(
        2,
        &[
            ("XI", alpha),
            ("YI", beta),
            ("ZI", gamma),
            ("XZ", -alpha),
            ("YZ", -beta),
            ("ZZ", c),
        ],
    )
    .expect("two-site labels")
}

/// `cos η I + i sin η H` is unitary iff `H² = I` (for Hermitian `H`).
pub fn reservoir_admissible(h: &DenseOperator, tol: f64) -> Result<bool> {
    let sq = h.checked_mul(h)?;
    Ok(sq.max_distance(&DenseOperator::identity(h.dims())) < tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirBudget {
    pub grid_points: usize,
    pub grid_range: f64,
    /// Draws on the admissible set `H² = I`.
    pub random_draws: usize,
    pub steps: usize,
}

impl Default for ReservoirBudget {
    fn default() -> Self {
        ReservoirBudget {
            grid_points: 9,
            grid_range: 2.0,
            random_draws: 1000,
            steps: 4,
        }
    }
}

impl ReservoirBudget {
    pub fn none() -> Self {
        ReservoirBudget {
            grid_points: 0,
            grid_range: 2.0,
            random_draws: 0,
            steps: 4,
        }
    }
}

/// `η_k = kπ/32`, `k = 1..=16`.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=16).map(|k| k as f64 * PI / 32.0).collect()
}

/// Thresholds for the reservoir gap verdict.
pub const RESERVOIR_DISTANCE_GAP: f64 = 0.5;
pub const RESERVOIR_IMAGE_GAP: f64 = 0.5;

struct ReservoirSample {
    admissible: bool,
    image_distance: f64,
    /// `(D, η)` minimising the final distance.
    best: (f64, f64),
}

fn reservoir_sample(
    h: &DenseOperator,
    etas: &[f64],
    steps: usize,
    xq: &DenseOperator,
    zq_proj: &DenseOperator,
    proj: &DenseOperator,
) -> Result<ReservoirSample> {
    if !reservoir_admissible(h, 1e-10)? {
        return Ok(ReservoirSample {
            admissible: false,
            image_distance: f64::NAN,
            best: (f64::NAN, 0.0),
        });
    }
    // (H X_Q H − Z_Q)(I + Z_M)
    let img = h.checked_mul(xq)?.checked_mul(h)?.checked_mul(proj)?;
    let image_distance = img.checked_add(&zq_proj.scale_real(-1.0))?.frobenius_norm();

    let xi = DenseOperator::basis_projector(2, 0);
    let plus = from_bloch([1.0, 0.0, 0.0]);
    let id = DenseOperator::identity(&QUBIT_DIMS);
    let mut best = (f64::INFINITY, 0.0);
    for &eta in etas {
        let u = id
            .scale_real(eta.cos())
            .checked_add(&h.scale(Complex64::new(0.0, eta.sin())))?;
        let mut rho = plus.clone();
        for _ in 0..steps {
            let joint = rho.kron(&xi).with_dims(QUBIT_DIMS.to_vec())?;
            // convention U†(ρ⊗ξ)U
            rho = partial_trace(&joint.conjugate_by(&u)?, &[Q])?;
        }
        let b = bloch_vector(&rho)?;
        let d = 0.5 * (b[0].powi(2) + b[1].powi(2) + (b[2] - 1.0).powi(2)).sqrt();
        if d < best.0 {
            best = (d, eta);
        }
    }
    Ok(ReservoirSample {
        admissible: true,
        image_distance,
        best,
    })
}

fn param_index(family: &HamiltonianFamily, name: &str) -> Result<usize> {
    family
        .params
        .iter()
        .position(|p| p == name)
        .ok_or_else(|| Error::Structural(format!("family has no parameter {name}")))
}

/// Searches the constrained classical family for a collision unitary
/// `cos η I + i sin η H` that drives `|+>` to a reservoir of `|0>` bits.
///
/// Parameters with `H² ≠ I` are skipped and counted. Reports the smallest
/// final trace distance to `|0>` and the smallest
/// `‖(H X_Q H − Z_Q)(I + Z_M)‖_F`.
pub fn classical_reservoir_check(
    eta_grid: &[f64],
    family: &HamiltonianFamily,
    budget: &ReservoirBudget,
    seed: u64,
) -> Result<WitnessReport> {
    let idx: Vec<usize> = ["α", "β", "γ", "c", "a", "b"]
        .iter()
        .map(|n| param_index(family, n))
        .collect::<Result<_>>()?;
    let mut report = WitnessReport::new(&format!(
        "classical reservoir of |0> bits, system |+>, {} collisions, family {}",
        budget.steps, family
    ));
    report.unproven = true;
    report.seed = Some(seed);
    report.parameters = vec![
        Parameter::new("grid_points", budget.grid_points as f64),
        Parameter::new("grid_range", budget.grid_range),
        Parameter::new("random_draws", budget.random_draws as f64),
        Parameter::new("steps", budget.steps as f64),
        Parameter::new("eta_values", eta_grid.len() as f64),
    ];

    let grid = crate::witness::search::linspace(-budget.grid_range, budget.grid_range, budget.grid_points);
    let mut tuples: Vec<[f64; 4]> = Vec::new();
    for &a in &grid {
        for &b in &grid {
            for &g in &grid {
                for &c in &grid {
                    tuples.push([a, b, g, c]);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget.random_draws {
        // γ + c = ±1 and (2α, 2β, γ − c) a unit vector
        let u: [f64; 3] = UnitSphere.sample(&mut rng);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let (g, c) = ((sign + u[2]) / 2.0, (sign - u[2]) / 2.0);
        tuples.push([u[0] / 2.0, u[1] / 2.0, g, c]);
    }
    if tuples.is_empty() || eta_grid.is_empty() {
        report.verdict = "UNPROVEN: empty search budget, nothing evaluated".into();
        return Ok(report);
    }

    let xq = qubit_dense(&OperatorExpr::label("XI"));
    let proj = qubit_dense(&OperatorExpr::from_real_terms(2, &[("II", 1.0), ("IZ", 1.0)])?);
    let zq_proj = qubit_dense(&OperatorExpr::from_real_terms(2, &[("ZI", 1.0), ("ZZ", 1.0)])?);
    let results: Vec<Result<ReservoirSample>> = tuples
        .par_iter()
        .map(|&[a, b, g, c]| {
            let mut v = vec![0.0; family.params.len()];
            v[idx[0]] = a;
            v[idx[1]] = b;
            v[idx[2]] = g;
            v[idx[3]] = c;
            v[idx[4]] = -a;
            v[idx[5]] = -b;
            let h = qubit_dense(&family.member(&v)?);
            reservoir_sample(&h, eta_grid, budget.steps, &xq, &zq_proj, &proj)
        })
        .collect();

    let mut skipped = 0;
    let mut best_d = (f64::INFINITY, 0usize, 0.0);
    let mut best_img = (f64::INFINITY, 0usize);
    for (i, r) in results.into_iter().enumerate() {
        let s = r?;
        if !s.admissible {
            skipped += 1;
            continue;
        }
        if s.best.0 < best_d.0 {
            best_d = (s.best.0, i, s.best.1);
        }
        if s.image_distance < best_img.0 {
            best_img = (s.image_distance, i);
        }
    }
    report.samples = tuples.len();
    report.skipped = skipped;
    if skipped == tuples.len() {
        report.verdict = "UNPROVEN: no admissible parameter point in the budget".into();
        return Ok(report);
    }
    let at = |i: usize| {
        let [a, b, g, c] = tuples[i];
        vec![
            Parameter::new("α", a),
            Parameter::new("β", b),
            Parameter::new("γ", g),
            Parameter::new("c", c),
        ]
    };
    let mut at_d = at(best_d.1);
    at_d.push(Parameter::new("eta", best_d.2));
    report.measurements.push(
        Measurement::new(
            "min final trace distance to |0>",
            best_d.0,
            RESERVOIR_DISTANCE_GAP,
            Relation::Above,
        )
        .at(at_d),
    );
    report.measurements.push(
        Measurement::new(
            "min required-image distance",
            best_img.0,
            RESERVOIR_IMAGE_GAP,
            Relation::Above,
        )
        .at(at(best_img.1)),
    );
    let gap = report.passed();
    report.verdict = format!(
        "{} (bounded search, {} points, {} skipped with H^2 != I): min D = {:.16}, min image distance = {:.6}",
        if gap { "POSITIVE-GAP" } else { "NO-GAP" },
        report.samples,
        skipped,
        best_d.0,
        best_img.0
    );
    Ok(report)
}
