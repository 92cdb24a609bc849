//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Oracles here are built from hand-written 2×2 matrices and explicit
//! polynomials, not from the library's own symbolic routes.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tempwit_core::conservation::{commutant_basis, pauli_ambient, ConservedQuantity, HamiltonianFamily};
use tempwit_core::dense::{to_dense, CMatrix, DenseOperator};
use tempwit_core::heisenberg::{
    composite_conservation_residual, evolve_descriptors, hnet_conservation_commutator,
    witness_state_check, Circuit, DescriptorFrame,
};
use tempwit_core::homogenizer::{
    classical_reservoir_check, default_eta_grid, partial_swap, run, HomogenizerConfig, ReservoirBudget,
};
use tempwit_core::linalg::rank_svd;
use tempwit_core::oscillator::{compare_with_hnet, hp_hamiltonian};
use tempwit_core::states::haar_random_ket;
use tempwit_core::witness::search::classical_search_family;
use tempwit_core::witness::{frame_exchange_roots, quantum_demo, Interaction};
use tempwit_core::{check_conservation, constrain_family, expm_hermitian, ConservationMode};

/// Minimal final trace distance of the classical-reservoir grid search,
/// frozen from the first full run.
const RESERVOIR_MIN_DISTANCE: f64 = 0.707_106_781_186_547_4;

const SEED: u64 = 20_240_917;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli2(ch: char) -> CMatrix {
    let (z, o, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let v = match ch {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => panic!("bad Pauli {ch}"),
    };
    DMatrix::from_row_slice(2, 2, &v)
}

/// Two-site Pauli product with site `Q` as the left Kronecker factor.
fn pauli4(label: &str) -> CMatrix {
    let ch: Vec<char> = label.chars().collect();
    pauli2(ch[0]).kronecker(&pauli2(ch[1]))
}

fn all_labels() -> Vec<String> {
    let p = ['I', 'X', 'Y', 'Z'];
    p.iter()
        .flat_map(|a| p.iter().map(move |b| format!("{a}{b}")))
        .collect()
}

/// Real Pauli coefficients `Tr(P D)/4`.
fn coefficients(d: &CMatrix) -> Vec<(String, Complex64)> {
    all_labels()
        .into_iter()
        .map(|l| {
            let cpl = (pauli4(&l) * d).trace() / c(4.0, 0.0);
            (l, cpl)
        })
        .collect()
}

/// Descriptor table transcribed by hand. Tokens are `<axis><subsystem>`,
/// a leading `-` flips the sign.
const TABLE: [[[&str; 3]; 2]; 7] = [
    [["xQ", "yQ", "zQ"], ["xM", "yM", "zM"]],
    [["xQ", "yQ zM", "zQ zM"], ["xQ xM", "xQ yM", "zM"]],
    [["xQ", "yQ zM", "zQ zM"], ["zM", "xQ yM", "-xQ xM"]],
    [["-xM", "-zQ yM", "zQ zM"], ["zQ", "yQ xM", "-xQ xM"]],
    [["zQ", "yQ xM", "-xQ xM"], ["-xM", "-zQ yM", "zQ zM"]],
    [["zQ", "yQ xM", "-xQ xM"], ["-zQ zM", "-zQ yM", "-xM"]],
    [["zQ", "-yQ", "xQ"], ["-zM", "-yM", "-xM"]],
];

fn transcribed_label(cell: &str) -> (f64, String) {
    let (sign, body) = match cell.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, cell),
    };
    let mut sites = ['I', 'I'];
    for tok in body.split_whitespace() {
        let ch: Vec<char> = tok.chars().collect();
        let idx = if ch[1] == 'Q' { 0 } else { 1 };
        sites[idx] = ch[0].to_ascii_uppercase();
    }
    (sign, sites.iter().collect())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(
    n: usize,
    name: &str,
    limit: Duration,
    body: impl FnOnce() -> Result<Outcome, String>,
) -> bool {
    let start = Instant::now();
    let res = body();
    let elapsed = start.elapsed();
    let (pass, detail) = match res {
        Ok(o) => (o.pass && elapsed < limit, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {n:>2} {} {name} [{:.3}s / {:.0}s] {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn table_reproduction() -> Result<Outcome, String> {
    let frames = evolve_descriptors(&Circuit::witness(), &DescriptorFrame::canonical(2))
        .map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    let mut cells = 0;
    let mut worst_off = 0.0f64;
    for f in &frames {
        for s in 0..2 {
            for k in 0..3 {
                cells += 1;
                let d = to_dense(f.get(s, k), &[2, 2]).map_err(|e| e.to_string())?;
                let (sign, label) = transcribed_label(TABLE[f.time][s][k]);
                let mut ok = true;
                for (l, v) in coefficients(d.matrix()) {
                    if l == label {
                        ok &= (v - c(sign, 0.0)).norm() < 1e-12;
                    } else {
                        worst_off = worst_off.max(v.norm());
                        ok &= v.norm() < 1e-12;
                    }
                }
                if !ok {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(Outcome {
        pass: cells == 42 && mismatches == 0,
        detail: format!(
            "{} evolved cells, {mismatches} mismatches, max off-label coefficient {worst_off:.1e}",
            cells - 6
        ),
    })
}

fn additive_commutant() -> Result<Outcome, String> {
    let cm = commutant_basis(&ConservedQuantity::additive(), &pauli_ambient(2)).map_err(|e| e.to_string())?;
    let expected: Vec<Vec<(&str, f64)>> = vec![
        vec![("II", 1.0)],
        vec![("ZI", 1.0)],
        vec![("IZ", 1.0)],
        vec![("ZZ", 1.0)],
        vec![("XX", 1.0), ("YY", 1.0)],
        vec![("XY", 1.0), ("YX", -1.0)],
    ];
    let labels = all_labels();
    let vec_of = |terms: &[(&str, f64)]| {
        DVector::from_fn(16, |i, _| {
            terms.iter().filter(|t| t.0 == labels[i]).map(|t| t.1).sum::<f64>()
        })
    };
    let e: Vec<DVector<f64>> = expected.iter().map(|t| vec_of(t)).collect();
    let mut worst = 0.0f64;
    for b in &cm.basis {
        let d = to_dense(b, &[2, 2]).map_err(|e| e.to_string())?;
        let v = DVector::from_iterator(16, coefficients(d.matrix()).into_iter().map(|x| x.1.re));
        let mut r = v.clone();
        for ek in &e {
            r -= ek * (v.dot(ek) / ek.dot(ek));
        }
        worst = worst.max(r.norm() / v.norm());
    }
    Ok(Outcome {
        pass: cm.dimension() == 6 && worst < 1e-12,
        detail: format!("dimension {}, max projection residual {worst:.1e}", cm.dimension()),
    })
}

fn classical_family_constraints() -> Result<Outcome, String> {
    let fam = constrain_family(&HamiltonianFamily::classical_general(), &ConservedQuantity::nonadditive())
        .map_err(|e| e.to_string())?;
    // dense oracle: column k is vec([B_k, C]) split into real and imaginary parts
    let ops = ["XI", "YI", "ZI", "XZ", "YZ", "ZZ"];
    let cm = pauli4("ZI") + pauli4("IZ") + pauli4("ZZ");
    let mut m = DMatrix::<f64>::zeros(32, 6);
    for (k, l) in ops.iter().enumerate() {
        let b = pauli4(l);
        let comm = &b * &cm - &cm * &b;
        for (i, z) in comm.iter().enumerate() {
            m[(i, k)] = z.re;
            m[(16 + i, k)] = z.im;
        }
    }
    let rank = rank_svd(&m, 1e-10);
    // α = −a and β = −b as rows (α, β, γ, a, b, c)
    let rel = DMatrix::from_row_slice(2, 6, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    let relations = fam.relations();
    let lib_rank = fam.constraint_rank();
    let mut stacked = DMatrix::<f64>::zeros(6, 6);
    for (i, row) in fam.constraint_matrix().row_iter().enumerate() {
        stacked.set_row(i, &row);
    }
    stacked.set_row(lib_rank, &rel.row(0));
    stacked.set_row(lib_rank + 1, &rel.row(1));
    let same_space = rank_svd(&stacked, 1e-10) == 2;
    // null space of the oracle is 4-dimensional and contains both relation vectors
    let null_ok = (&m * DVector::from_row_slice(&[-1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).norm() < 1e-12
        && (&m * DVector::from_row_slice(&[0.0, -1.0, 0.0, 0.0, 1.0, 0.0])).norm() < 1e-12;
    Ok(Outcome {
        pass: rank == 2 && lib_rank == 2 && same_space && null_ok && relations == ["α = -a", "β = -b"],
        detail: format!(
            "oracle rank {rank}, library rank {lib_rank}, relations {relations:?}, relation vectors in oracle null space: {null_ok}"
        ),
    })
}

/// Written-out axis systems at θ = π/2, in expanded form.
fn expanded_z(n: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = n;
    [-y + x * z - 1.0, x + y * z, 0.5 + 0.5 * (z * z - x * x - y * y)]
}

fn expanded_x(n: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = n;
    [y + x * z - 1.0, -z + x * y, 0.5 + 0.5 * (x * x - y * y - z * z)]
}

fn expanded_y(n: [f64; 3], rhs: f64) -> [f64; 3] {
    let [x, y, z] = n;
    [-x + y * z, z + x * y, 0.5 + 0.5 * (y * y - x * x - z * z) - rhs]
}

fn max_abs(v: [f64; 3]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn root_sets() -> Result<Outcome, String> {
    let r = frame_exchange_roots(FRAC_PI_2);
    let z_ok = r.z_system.accepted == vec![[0.0, -1.0, 0.0]];
    let x_ok = r.x_system.accepted == vec![[0.0, 1.0, 0.0]];
    let mut worst = 0.0f64;
    for n in &r.z_system.real_roots {
        worst = worst.max(max_abs(expanded_z(*n)));
    }
    for n in &r.x_system.real_roots {
        worst = worst.max(max_abs(expanded_x(*n)));
    }
    for n in &r.y_system_plus.real_roots {
        worst = worst.max(max_abs(expanded_y(*n, 1.0)));
    }
    for n in &r.y_system_minus.real_roots {
        worst = worst.max(max_abs(expanded_y(*n, -1.0)));
    }
    let empty = r.common_plus.is_empty() && r.common_minus.is_empty();
    Ok(Outcome {
        pass: z_ok && x_ok && worst < 1e-10 && empty,
        detail: format!(
            "z {:?}, x {:?}, y(+1) {:?}, y(-1) {:?}, intersections {}/{}, max expanded-equation residual {worst:.1e}",
            r.z_system.accepted,
            r.x_system.accepted,
            r.y_system_plus.accepted,
            r.y_system_minus.accepted,
            r.common_plus.len(),
            r.common_minus.len()
        ),
    })
}

fn classical_no_evolution() -> Result<Outcome, String> {
    let fam = classical_search_family(&ConservedQuantity::nonadditive()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let zm = DenseOperator::new(vec![2, 2], pauli4("IZ")).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = fam.random_params(&mut rng, 2.0);
        let h = to_dense(&fam.member(&p).map_err(|e| e.to_string())?, &[2, 2]).map_err(|e| e.to_string())?;
        let t = rng.random_range(0.0..2.0 * PI);
        let u = expm_hermitian(&h, t).map_err(|e| e.to_string())?;
        let moved = zm.conjugate_by(&u).map_err(|e| e.to_string())?;
        worst = worst.max((moved.matrix() - zm.matrix()).norm());
    }
    Ok(Outcome {
        pass: worst < 1e-10,
        detail: format!("100 draws, max ‖U†Z_M U − Z_M‖_F = {worst:.1e}"),
    })
}

fn witness_independence() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = haar_random_ket(2, &mut rng);
        let rho = DenseOperator::new(vec![2], &psi * psi.adjoint()).map_err(|e| e.to_string())?;
        let b = witness_state_check(&rho).map_err(|e| e.to_string())?;
        worst = worst.max((b[0] - 1.0).abs()).max(b[1].abs()).max(b[2].abs());
    }
    Ok(Outcome {
        pass: worst < 1e-10,
        detail: format!("100 Haar mediators, max Bloch deviation from (1,0,0) {worst:.1e}"),
    })
}

fn homogenizer_law() -> Result<Outcome, String> {
    let mut coeff = 0.0f64;
    let mut rise = f64::NEG_INFINITY;
    let mut gap = 0.0f64;
    for eta in [0.2, 0.5, 1.0] {
        let t = run(&HomogenizerConfig::standard(30, eta).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for s in &t.steps {
            let k = s.xi_coefficient.ok_or("no coefficient")?;
            // predicted value computed here, not taken from the trajectory
            let predicted = 1.0 - eta.cos().powi(2 * s.step as i32);
            coeff = coeff.max((k - predicted).abs());
        }
        rise = rise.max(t.max_distance_increase());
        gap = gap.max(t.max_recursion_gap());
    }
    Ok(Outcome {
        pass: coeff < 1e-10 && rise <= 1e-12 && gap < 1e-12,
        detail: format!(
            "max coefficient error {coeff:.1e}, max distance increase {rise:.1e}, max recursion gap {gap:.1e}"
        ),
    })
}

fn partial_swap_conservation() -> Result<Outcome, String> {
    let cm = pauli4("ZI") + pauli4("IZ") + pauli4("ZZ");
    let mut worst = 0.0f64;
    for k in 0..16 {
        let eta = k as f64 * PI / 15.0;
        let p = partial_swap(eta);
        let r = (p.matrix() * &cm - &cm * p.matrix()).norm();
        let lib = check_conservation(&p, &ConservedQuantity::nonadditive(), ConservationMode::Unitary)
            .map_err(|e| e.to_string())?;
        worst = worst.max(r).max(lib);
    }
    Ok(Outcome {
        pass: worst < 1e-12,
        detail: format!("16 eta values, max ‖[P(η), C]‖_F {worst:.1e}"),
    })
}

fn hnet_conservation() -> Result<Outcome, String> {
    let comm = hnet_conservation_commutator().map_err(|e| e.to_string())?;
    let worst = comm.max_abs_coeff();
    let composite = composite_conservation_residual().map_err(|e| e.to_string())?;
    Ok(Outcome {
        pass: worst < 1e-13,
        detail: format!("max Pauli coefficient of [H_net, C] {worst:.1e}; composite circuit residual {composite:.6} (reported)"),
    })
}

fn quantum_demos() -> Result<Outcome, String> {
    let swap = quantum_demo(Interaction::Swap).map_err(|e| e.to_string())?;
    let ex = quantum_demo(Interaction::Exchange).map_err(|e| e.to_string())?;
    let bloch = swap
        .measurements
        .iter()
        .filter(|m| m.name.starts_with("final Q Bloch"))
        .map(|m| m.value)
        .fold(0.0, f64::max);
    let cons = ex
        .measurement("[H, Z_Q+Z_M] residual")
        .map(|m| m.value)
        .ok_or("missing exchange residual")?;
    // independent: 2(XX+YY) against Z_Q + Z_M
    let h = (pauli4("XX") + pauli4("YY")) * c(2.0, 0.0);
    let ca = pauli4("ZI") + pauli4("IZ");
    let oracle = (&h * &ca - &ca * &h).norm();
    Ok(Outcome {
        pass: swap.passed() && bloch < 1e-10 && cons < 1e-12 && oracle < 1e-12,
        detail: format!("SWAP max Bloch error {bloch:.1e}; exchange [H, C_add] {cons:.1e} (oracle {oracle:.1e})"),
    })
}

fn hp_reduction() -> Result<Outcome, String> {
    let cmp = compare_with_hnet(2).map_err(|e| e.to_string())?;
    let mut herm = 0.0f64;
    let mut unit = 0.0f64;
    for d in [2, 3, 4, 8] {
        let h = hp_hamiltonian(d).map_err(|e| e.to_string())?;
        herm = herm.max(h.hermiticity_residual());
        for t in [0.3, 1.0, 7.0] {
            unit = unit.max(expm_hermitian(&h, t).map_err(|e| e.to_string())?.unitarity_residual());
        }
    }
    Ok(Outcome {
        pass: herm < 1e-12 && unit < 1e-10 && cmp.difference_norm.is_finite(),
        detail: format!(
            "d_b=2 traceless difference {:.6} (reported); Hermiticity {herm:.1e}, unitarity {unit:.1e} for d_b in 2,3,4,8",
            cmp.difference_norm
        ),
    })
}

fn reservoir_gap() -> Result<Outcome, String> {
    let fam = classical_search_family(&ConservedQuantity::nonadditive()).map_err(|e| e.to_string())?;
    let r = classical_reservoir_check(&default_eta_grid(), &fam, &ReservoirBudget::default(), SEED)
        .map_err(|e| e.to_string())?;
    let d = r
        .measurement("min final trace distance to |0>")
        .map(|m| m.value)
        .ok_or("no distance measured")?;
    Ok(Outcome {
        pass: d > 0.0 && (d - RESERVOIR_MIN_DISTANCE).abs() < 1e-12 && (d - FRAC_1_SQRT_2).abs() < 1e-12,
        detail: format!(
            "min D = {d:.16} over {} points ({} skipped with H^2 != I), frozen {RESERVOIR_MIN_DISTANCE}",
            r.samples, r.skipped
        ),
    })
}

fn main() {
    // honour `cargo test -- --list` style invocations from the harness
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let results = [
        criterion(1, "descriptor table reproduction", secs(1), table_reproduction),
        criterion(2, "additive commutant", secs(1), additive_commutant),
        criterion(3, "classical family constraint derivation", secs(1), classical_family_constraints),
        criterion(4, "frame-exchange root sets", secs(1), root_sets),
        criterion(5, "classical mediator never evolves", secs(1), classical_no_evolution),
        criterion(6, "witness independent of mediator state", secs(1), witness_independence),
        criterion(7, "homogenizer coefficient law", secs(5), homogenizer_law),
        criterion(8, "partial swap conservation", secs(1), partial_swap_conservation),
        criterion(9, "H_net symbolic conservation", secs(1), hnet_conservation),
        criterion(10, "quantum mediator demos", secs(1), quantum_demos),
        criterion(11, "oscillator reduction", secs(2), hp_reduction),
        criterion(12, "classical reservoir gap", secs(60), reservoir_gap),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
