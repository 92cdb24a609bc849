//! One function per subcommand. Each writes its artifacts and appends checks
//! and records to the shared [`Run`].

use std::f64::consts::{FRAC_PI_2, PI};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tempwit_core::conservation::{pauli_ambient, Commutant, FamilyAudit};
use tempwit_core::dense::{qubit_dense, to_dense, DenseOperator};
use tempwit_core::heisenberg::{
    compare_with_reference, composite_conservation_residual, evolve_descriptors, evolve_descriptors_dense,
    hnet_conservation_commutator, witness_state_check,
};
use tempwit_core::homogenizer::{classical_reservoir_check, partial_swap, run, ReservoirBudget};
use tempwit_core::oscillator::{compare_with_hnet, oscillator_audit, oscillator_witness_run};
use tempwit_core::states::{from_bloch, haar_random_ket};
use tempwit_core::witness::search::{classical_search_family, linspace};
use tempwit_core::witness::{
    frame_exchange_roots, axis_system_report, classical_impossibility_search, quantum_demo, Interaction, SearchBudget,
    TargetMap, WitnessReport,
};
use tempwit_core::{
    check_conservation, commutant_basis, constrain_family, expm_hermitian, Circuit, ConservationMode,
    ConservedQuantity, DescriptorFrame, HamiltonianFamily, HomogenizerConfig, OperatorExpr,
};

use crate::config::{Experiment, RunConfig, RESERVOIR_MIN_DISTANCE};
use crate::output::{fmt_f64, Artifacts, Check, Comparison, Record};

pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub artifacts: Artifacts,
    pub checks: Vec<Check>,
    pub records: Vec<Record>,
}

impl<'a> Run<'a> {
    pub fn new(config: &'a RunConfig, artifacts: Artifacts) -> Self {
        Run {
            config,
            artifacts,
            checks: Vec::new(),
            records: Vec::new(),
        }
    }

    fn check(&mut self, e: Experiment, name: &str, measured: f64, cmp: Comparison, threshold: f64, anchor: &str) {
        self.checks.push(Check::new(e.name(), name, measured, cmp, threshold, anchor));
    }

    fn record(&mut self, e: Experiment, name: &str, value: f64) {
        self.records.push(Record {
            experiment: e.name().to_string(),
            name: name.to_string(),
            value,
        });
    }

    fn report_checks(&mut self, e: Experiment, report: &WitnessReport, anchor: &str) {
        for m in &report.measurements {
            match Check::from_measurement(e.name(), m, anchor) {
                Some(c) => self.checks.push(c),
                None => self.record(e, &m.name, m.value),
            }
        }
    }

    pub fn experiment(&mut self, e: Experiment) -> Result<()> {
        match e {
            Experiment::Table1 => self.table1(),
            Experiment::Conservation => self.conservation(),
            Experiment::Witness => self.witness(),
            Experiment::Homogenize => self.homogenize(),
            Experiment::Oscillator => self.oscillator(),
            Experiment::All => Experiment::SUITE.iter().try_for_each(|&s| self.experiment(s)),
        }
        .with_context(|| format!("experiment `{e}`"))
    }

    fn table1(&mut self) -> Result<()> {
        const E: Experiment = Experiment::Table1;
        let tol = self.config.tolerances.exact;
        let circuit = Circuit::witness();
        let frames = evolve_descriptors(&circuit, &DescriptorFrame::canonical(2))?;
        // t_0 is the untouched frame; the table proper starts at t_1.
        let cells = compare_with_reference(&frames[1..], tol)?;
        self.artifacts.csv(
            "descriptors.csv",
            &["time", "subsystem", "component", "label", "expected", "match"],
            cells.iter().map(|c| {
                [
                    c.time.to_string(),
                    c.subsystem.clone(),
                    c.component.clone(),
                    c.label.clone(),
                    c.expected.clone(),
                    c.matches.to_string(),
                ]
            }),
        )?;
        let dense = evolve_descriptors_dense(&circuit)?;
        let mut gap: f64 = 0.0;
        let mut algebra: f64 = 0.0;
        for (a, b) in frames.iter().zip(&dense) {
            algebra = algebra.max(a.algebra_residual()?);
            for s in 0..2 {
                for k in 0..3 {
                    gap = gap.max(a.get(s, k).max_coeff_distance(b.get(s, k)));
                }
            }
        }
        let mismatches = cells.iter().filter(|c| !c.matches).count();
        self.check(E, "descriptor cells compared", cells.len() as f64, Comparison::Equal, 36.0,
            "six gate slices, two qubits, three generators");
        self.check(E, "descriptor cell mismatches", mismatches as f64, Comparison::Equal, 0.0,
            "each cell is the reference signed Pauli product");
        self.check(E, "symbolic vs dense descriptor gap", gap, Comparison::Below, tol,
            "substitution rule agrees with matrix conjugation");
        self.check(E, "descriptor algebra residual", algebra, Comparison::Below, tol,
            "evolved generators keep the Pauli algebra");
        Ok(())
    }

    fn conservation(&mut self) -> Result<()> {
        const E: Experiment = Experiment::Conservation;
        let tol = self.config.tolerances;
        let additive = ConservedQuantity::additive();
        let nonadditive = ConservedQuantity::nonadditive();
        let channel = ConservedQuantity::channel3();

        let c_add = commutant_basis(&additive, &pauli_ambient(2))?;
        let span: Vec<OperatorExpr> = [
            &[("II", 1.0)][..],
            &[("ZI", 1.0)],
            &[("IZ", 1.0)],
            &[("ZZ", 1.0)],
            &[("XX", 1.0), ("YY", 1.0)],
            &[("XY", 1.0), ("YX", -1.0)],
        ]
        .iter()
        .map(|t| OperatorExpr::from_real_terms(2, t))
        .collect::<tempwit_core::Result<_>>()?;
        let span_residual = c_add.basis.iter().map(|b| projection_residual(b, &span)).fold(0.0, f64::max);
        self.check(E, "commutant dimension under Z_Q+Z_M", c_add.dimension() as f64, Comparison::Equal, 6.0,
            "allowed two-qubit generators under the additive charge");
        self.check(E, "commutant span residual under Z_Q+Z_M", span_residual, Comparison::Below, tol.exact,
            "allowed generators are diagonal terms plus the exchange pair");
        let c_non = commutant_basis(&nonadditive, &pauli_ambient(2))?;
        let c_chan = commutant_basis(&channel, &pauli_ambient(3))?;
        self.record(E, "commutant dimension under Z_Q+Z_M+Z_QZ_M", c_non.dimension() as f64);
        self.record(E, "commutant dimension under three-qubit channel charge", c_chan.dimension() as f64);

        let general = constrain_family(&HamiltonianFamily::classical_general(), &nonadditive)?;
        let law_residual = general
            .solution_space()
            .iter()
            .map(|v| (v[0] + v[3]).abs().max((v[1] + v[4]).abs()))
            .fold(0.0, f64::max);
        self.check(E, "classical family constraint rank", general.constraint_rank() as f64, Comparison::Equal, 2.0,
            "conservation removes exactly two parameters");
        self.check(E, "classical family relation residual", law_residual, Comparison::Below, tol.exact,
            "surviving members satisfy alpha = -a and beta = -b");
        let families: Vec<FamilyAudit> = [
            constrain_family(&HamiltonianFamily::classical_general(), &nonadditive)?,
            constrain_family(&HamiltonianFamily::classical_general_y(), &nonadditive)?,
            constrain_family(&HamiltonianFamily::channel(), &channel)?,
            constrain_family(&HamiltonianFamily::additive_allowed(), &additive)?,
        ]
        .iter()
        .map(|f| f.audit())
        .collect();

        let classical = classical_search_family(&nonadditive)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let zm = qubit_dense(&OperatorExpr::label("IZ"));
        let mut z_drift: f64 = 0.0;
        for _ in 0..self.config.witness.family_draws {
            let p = classical.random_params(&mut rng, 2.0);
            let t = rng.random_range(0.0..2.0 * PI);
            let h = to_dense(&classical.member(&p)?, &[2, 2])?;
            let u = expm_hermitian(&h, t)?;
            z_drift = z_drift.max(zm.conjugate_by(&u)?.checked_add(&zm.scale_real(-1.0))?.frobenius_norm());
        }
        self.check(E, "classical mediator Z_M drift", z_drift, Comparison::Below, tol.state,
            "a classical mediator's only observable never evolves");

        let swap_residual = self
            .config
            .reservoir
            .etas
            .iter()
            .map(|&eta| check_conservation(&partial_swap(eta), &nonadditive, ConservationMode::Unitary))
            .collect::<tempwit_core::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        self.check(E, "partial swap vs Z_Q+Z_M+Z_QZ_M", swap_residual, Comparison::Below, tol.exact,
            "the collision unitary conserves the non-additive charge");
        let hnet = hnet_conservation_commutator()?.max_abs_coeff();
        self.check(E, "network Hamiltonian commutator coefficient", hnet, Comparison::Below, tol.symbolic,
            "the summed gate generators conserve the non-additive charge");
        let composite = composite_conservation_residual()?;
        self.record(E, "composite circuit commutator norm", composite);

        #[derive(Serialize)]
        struct Out<'a> {
            commutants: Vec<(&'a str, &'a Commutant)>,
            families: Vec<FamilyAudit>,
        }
        self.artifacts.json(
            "conservation.json",
            &Out {
                commutants: vec![
                    ("Z_Q + Z_M", &c_add),
                    ("Z_Q + Z_M + Z_Q Z_M", &c_non),
                    ("Z_Q + Z_M + Z_M' + Z_Q Z_M' + Z_M Z_M'", &c_chan),
                ],
                families,
            },
        )?;
        Ok(())
    }

    fn witness(&mut self) -> Result<()> {
        const E: Experiment = Experiment::Witness;
        let cfg = self.config;
        let tol = cfg.tolerances;

        let mut rows = Vec::new();
        let mut axes = Vec::new();
        for &theta in &cfg.witness.thetas {
            let r = frame_exchange_roots(theta);
            for s in [&r.z_system, &r.x_system, &r.y_system_plus, &r.y_system_minus] {
                for n in &s.real_roots {
                    rows.push(root_row(theta, &s.system.name, n, s.accepted.contains(n)));
                }
            }
            for (name, set) in [("common (+1 y)", &r.common_plus), ("common (-1 y)", &r.common_minus)] {
                for n in set {
                    rows.push(root_row(theta, name, n, true));
                }
            }
            axes.push(axis_system_report(theta));
        }
        self.artifacts.csv("roots.csv", &["theta", "set", "x", "y", "z", "unit_norm"], rows)?;
        self.artifacts.json("witness_axes.json", &axes)?;

        let r = frame_exchange_roots(FRAC_PI_2);
        let single = |roots: &[[f64; 3]], want: [f64; 3]| match roots {
            [n] => (0..3).map(|k| (n[k] - want[k]).abs()).fold(0.0, f64::max),
            _ => f64::INFINITY,
        };
        let z_err = single(&r.z_system.accepted, [0.0, -1.0, 0.0]);
        let x_err = single(&r.x_system.accepted, [0.0, 1.0, 0.0]);
        let residual = [&r.z_system, &r.x_system, &r.y_system_plus, &r.y_system_minus]
            .iter()
            .flat_map(|s| s.real_roots.iter().map(|n| s.system.residual(*n, FRAC_PI_2)))
            .fold(0.0, f64::max);
        let common = (r.common_plus.len() + r.common_minus.len()) as f64;
        self.check(E, "z-system root at quarter turn", z_err, Comparison::Below, tol.state,
            "z-system has the single axis (0,-1,0)");
        self.check(E, "x-system root at quarter turn", x_err, Comparison::Below, tol.state,
            "x-system has the single axis (0,1,0)");
        self.check(E, "axis system root residual", residual, Comparison::Below, tol.state,
            "every reported root solves its system");
        self.check(E, "common axes at quarter turn", common, Comparison::Equal, 0.0,
            "no single rotation realises the frame map");

        let budget = SearchBudget {
            grid_points: cfg.witness.grid_points,
            grid_range: cfg.witness.grid_range,
            time_points: cfg.witness.time_points,
            random_draws: cfg.witness.random_draws,
        };
        let search = classical_impossibility_search(
            &ConservedQuantity::nonadditive(),
            &TargetMap::frame_exchange(),
            &budget,
            cfg.seed,
        )?;
        self.report_checks(E, &search, "conserving classical mediator cannot rotate the probe frame");
        self.artifacts.json("witness_classical.json", &search)?;

        let swap = quantum_demo(Interaction::Swap)?;
        self.report_checks(E, &swap, "quantum mediator prepares an X eigenstate");
        self.artifacts.json("witness_swap.json", &swap)?;
        let exchange = quantum_demo(Interaction::Exchange)?;
        self.report_checks(E, &exchange, "exchange coupling conserves the additive charge");
        self.artifacts.json("witness_exchange.json", &exchange)?;
        if let Some(s) = exchange.series.first() {
            let header: Vec<&str> = s.columns.iter().map(String::as_str).collect();
            let rows = s.rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>());
            self.artifacts.csv("exchange_trajectory.csv", &header, rows)?;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.witness.haar_draws {
            let psi = haar_random_ket(2, &mut rng);
            let b = witness_state_check(&DenseOperator::projector(&[2], &psi)?)?;
            worst = worst.max((b[0] - 1.0).abs()).max(b[1].abs()).max(b[2].abs());
        }
        self.check(E, "witness circuit Bloch error over mediator states", worst, Comparison::Below, tol.state,
            "the probe ends in |+> whatever the mediator state");
        Ok(())
    }

    fn homogenize(&mut self) -> Result<()> {
        const E: Experiment = Experiment::Homogenize;
        let cfg = self.config;
        let tol = cfg.tolerances;
        let h = &cfg.homogenizer;
        let mut rows = Vec::new();
        for &eta in &h.etas {
            let t = run(&HomogenizerConfig::new(h.n, eta, from_bloch(h.rho0), from_bloch(h.xi))?)?;
            for s in &t.steps {
                rows.push(vec![
                    fmt_f64(eta),
                    s.step.to_string(),
                    fmt_f64(s.trace_distance),
                    s.xi_coefficient.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(s.predicted_coefficient),
                    s.rest_norm.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(s.recursion_gap),
                    fmt_f64(s.min_eigenvalue),
                ]);
            }
            let at = format!("eta={eta}");
            match t.max_coefficient_error() {
                Some(err) => self.check(E, &format!("coefficient law error {at}"), err, Comparison::Below, tol.state,
                    "reservoir weight after n collisions is 1 - cos^(2n) eta"),
                None => self.record(E, &format!("coefficient law undefined (mixed reservoir) {at}"), 0.0),
            }
            self.check(E, &format!("trace distance increase {at}"), t.max_distance_increase(), Comparison::Below,
                tol.exact, "distance to the reservoir state never grows");
            self.check(E, &format!("recursion gap {at}"), t.max_recursion_gap(), Comparison::Below, tol.exact,
                "reduced state follows the cos^2/sin^2 mixing recursion");
            let min_eig = t.steps.iter().map(|s| s.min_eigenvalue).fold(f64::INFINITY, f64::min);
            self.check(E, &format!("minimum eigenvalue {at}"), min_eig, Comparison::Above, -tol.exact,
                "every reduced state stays positive");
        }
        self.artifacts.csv(
            "trajectory.csv",
            &["eta", "step", "trace_distance", "xi_coefficient", "predicted_coefficient", "rest_norm",
                "recursion_gap", "min_eigenvalue"],
            rows,
        )?;

        let r = &cfg.reservoir;
        let budget = ReservoirBudget {
            grid_points: r.grid_points,
            grid_range: r.grid_range,
            random_draws: r.random_draws,
            steps: r.steps,
        };
        let family = classical_search_family(&ConservedQuantity::nonadditive())?;
        let report = classical_reservoir_check(&r.etas, &family, &budget, cfg.seed)?;
        self.report_checks(E, &report, "a classical reservoir cannot homogenise the probe");
        if let Some(m) = report.measurement("min final trace distance to |0>") {
            if report.samples > report.skipped {
                self.check(E, "reservoir minimum distance regression", (m.value - RESERVOIR_MIN_DISTANCE).abs(),
                    Comparison::Below, tol.regression, "frozen reservoir distance bound");
            }
        }
        self.artifacts.json("reservoir.json", &report)?;
        Ok(())
    }

    fn oscillator(&mut self) -> Result<()> {
        const E: Experiment = Experiment::Oscillator;
        let cfg = self.config;
        let tol = cfg.tolerances;
        let o = &cfg.oscillator;
        let times = linspace(0.0, o.t_max, o.time_points);
        let mut rows = Vec::new();
        let mut audits = Vec::new();
        let mut runs = Vec::new();
        for &d in &o.d_b {
            let a = oscillator_audit(d)?;
            let at = format!("d_b={d}");
            self.check(E, &format!("hermiticity {at}"), a.hermiticity_residual, Comparison::Below, tol.exact,
                "truncated bosonic Hamiltonian is Hermitian");
            self.check(E, &format!("unitarity {at}"), a.unitarity_residual, Comparison::Below, tol.state,
                "truncated evolution is unitary");
            self.record(E, &format!("charge commutator norm {at}"), a.nonadditive_residual);
            self.record(E, &format!("mediator number commutator norm {at}"), a.number_residual);
            let run = oscillator_witness_run(d, &times)?;
            for (k, series) in run.coherence.iter().enumerate() {
                for (t, c) in run.times.iter().zip(series) {
                    rows.push([d.to_string(), fmt_f64(*t), k.to_string(), fmt_f64(*c)]);
                }
                self.record(E, &format!("max coherence {at} mediator |{k}>"), run.max_coherence[k]);
            }
            self.check(E, &format!("norm drift {at}"), run.norm_drift, Comparison::Below, tol.state,
                "state norm is preserved along every trajectory");
            audits.push(a);
            runs.push(json!({
                "d_b": run.d_b,
                "max_coherence": run.max_coherence,
                "norm_drift": run.norm_drift,
            }));
        }
        self.artifacts.csv("oscillator_coherence.csv", &["d_b", "t", "state", "coherence"], rows)?;
        let cmp = compare_with_hnet(2)?;
        self.record(E, "qubit-limit traceless difference norm", cmp.difference_norm);
        self.artifacts.json(
            "oscillator.json",
            &json!({ "audits": audits, "runs": runs, "qubit_limit": cmp }),
        )?;
        Ok(())
    }
}

fn root_row(theta: f64, set: &str, n: &[f64; 3], unit: bool) -> Vec<String> {
    vec![fmt_f64(theta), set.to_string(), fmt_f64(n[0]), fmt_f64(n[1]), fmt_f64(n[2]), unit.to_string()]
}

/// Coefficient-space distance from `b` to `span`; `span` must be pairwise
/// orthogonal under the Pauli inner product.
fn projection_residual(b: &OperatorExpr, span: &[OperatorExpr]) -> f64 {
    let inner = |x: &OperatorExpr, y: &OperatorExpr| {
        x.terms().map(|(l, c)| c.conj() * y.coeff(l)).sum::<num_complex::Complex64>()
    };
    let proj = span.iter().fold(OperatorExpr::zero(b.n_sites()), |acc, s| {
        &acc + &s.scale(inner(s, b) / inner(s, s))
    });
    (b - &proj).frobenius_norm().abs()
}
