//! Single-qubit rotations `R = cos(θ/2) I − i sin(θ/2) n·σ` and the
//! polynomial systems that ask for an axis realizing a given frame map.
//!
//! For any real `n` (not necessarily unit),
//!
//! ```text
//! R† σ_j R = cos²(θ/2) σ_j + sin θ (e_j × n)·σ + sin²(θ/2) (2 n_j n − |n|² e_j)·σ
//! ```
//!
//! Setting the coefficient vector equal to a target gives three quadratic
//! equations in `n`. Writing `n = p e_j + w` with `w ⟂ e_j`, the in-plane
//! part is linear in `w` once `p` is known, and the axial equation becomes a
//! quadratic in `p²`; this is how every real root is enumerated.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit-norm tolerance for axes and for accepting roots.
pub const AXIS_NORM_TOL: f64 = 1e-10;
pub const ROOT_ACCEPT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.index()] = 1.0;
        e
    }

    /// Right-handed in-plane basis `(u, v)` with `e_j × e_u = e_v`.
    fn plane(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (2, 0),
            Axis::Z => (0, 1),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    axis: [f64; 3],
    angle: f64,
}

impl RotationSpec {
    pub fn new(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = dot(axis, axis).sqrt();
        if (norm - 1.0).abs() > AXIS_NORM_TOL || !angle.is_finite() {
            return Err(Error::ContractViolation(format!(
                "rotation axis must be a unit vector (|n| = {norm}) and the angle finite"
            )));
        }
        Ok(RotationSpec { axis, angle })
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Pauli coefficients of `R† σ_j R` for an arbitrary real `n`.
pub fn conjugated_generator(n: [f64; 3], theta: f64, generator: Axis) -> [f64; 3] {
    let c = (theta / 2.0).cos().powi(2);
    let s = (theta / 2.0).sin().powi(2);
    let k = theta.sin();
    let e = generator.unit();
    let en = cross(e, n);
    let nn = dot(n, n);
    let nj = n[generator.index()];
    std::array::from_fn(|i| c * e[i] + k * en[i] + s * (2.0 * nj * n[i] - nn * e[i]))
}

/// Pauli coefficients of `R† σ_j R` for a proper rotation.
///
/// Equals `cos θ e_j + sin θ (e_j × n) + (1 − cos θ) n_j n`.
pub fn rotation_image(spec: &RotationSpec, generator: Axis) -> [f64; 3] {
    let (n, theta) = (spec.axis, spec.angle);
    let e = generator.unit();
    let en = cross(e, n);
    let nj = n[generator.index()];
    std::array::from_fn(|i| theta.cos() * e[i] + theta.sin() * en[i] + (1.0 - theta.cos()) * nj * n[i])
}

/// A generator image `±σ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedAxis {
    pub sign: i8,
    pub axis: Axis,
}

impl SignedAxis {
    pub fn vector(&self) -> [f64; 3] {
        let mut v = self.axis.unit();
        v[self.axis.index()] = self.sign as f64;
        v
    }
}

impl fmt::Display for SignedAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "+" };
        write!(f, "{s}{}", self.axis)
    }
}

/// Required images of `(σ_x, σ_y, σ_z)` as signed generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetMap {
    images: [SignedAxis; 3],
    determinant: i8,
}

impl TargetMap {
    /// `images` lists where `x`, `y`, `z` go; must be a signed permutation.
    pub fn new(images: [SignedAxis; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for im in &images {
            if im.sign != 1 && im.sign != -1 {
                return Err(Error::Structural("image signs must be ±1".into()));
            }
            seen[im.axis.index()] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structural(
                "target images must be a signed permutation of x, y, z".into(),
            ));
        }
        let cols: [[f64; 3]; 3] = images.map(|i| i.vector());
        let det = dot(cols[0], cross(cols[1], cols[2]));
        Ok(TargetMap {
            images,
            determinant: det.round() as i8,
        })
    }

    /// `z → x`, `y → −y`, `x → z`.
    pub fn frame_exchange() -> Self {
        Self::new([
            SignedAxis { sign: 1, axis: Axis::Z },
            SignedAxis { sign: -1, axis: Axis::Y },
            SignedAxis { sign: 1, axis: Axis::X },
        ])
        .expect("signed permutation")
    }

    pub fn image(&self, generator: Axis) -> SignedAxis {
        self.images[generator.index()]
    }

    pub fn determinant(&self) -> i8 {
        self.determinant
    }
}

impl fmt::Display for TargetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Axis::ALL
            .iter()
            .map(|a| format!("{a}->{}", self.image(*a)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// `R† σ_j R = target·σ` as three polynomial equations in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSystem {
    pub name: String,
    pub generator: Axis,
    pub target: [f64; 3],
}

impl AxisSystem {
    pub fn for_map(map: &TargetMap, generator: Axis) -> Self {
        AxisSystem {
            name: format!("{generator}-system"),
            generator,
            target: map.image(generator).vector(),
        }
    }

    pub fn residual(&self, n: [f64; 3], theta: f64) -> f64 {
        let f = conjugated_generator(n, theta, self.generator);
        (0..3).map(|i| (f[i] - self.target[i]).abs()).fold(0.0, f64::max)
    }
}

/// All real roots of one system; `accepted` keeps the unit-norm ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRoots {
    pub system: AxisSystem,
    pub theta: f64,
    pub real_roots: Vec<[f64; 3]>,
    pub accepted: Vec<[f64; 3]>,
    /// A one-parameter family of roots exists (only when `sin θ = 0`); it is
    /// not enumerated.
    pub continuum: bool,
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
    let (a, b, c) = (a / scale, b / scale, c / scale);
    if a.abs() < 1e-14 {
        if b.abs() < 1e-14 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    if sq == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let mut r = vec![q / a, c / q];
    if q == 0.0 {
        r = vec![0.0];
    }
    r
}

pub fn solve_system(system: &AxisSystem, theta: f64) -> SystemRoots {
    let c = (theta / 2.0).cos().powi(2);
    let s = (theta / 2.0).sin().powi(2);
    let k = theta.sin();
    let j = system.generator.index();
    let (u, v) = system.generator.plane();
    let t_par = system.target[j];
    let t_perp = Complex64::new(system.target[u], system.target[v]);
    let t2 = t_perp.norm_sqr();
    let degenerate_k = k.abs() < 1e-14;

    let mut candidates: Vec<[f64; 3]> = Vec::new();
    let mut continuum = false;

    // (c + sP − t)(4 s² P + k²) − s |T|² = 0 in P = p²
    let roots_p2 = real_quadratic_roots(
        4.0 * s.powi(3),
        s * k * k + 4.0 * s * s * (c - t_par),
        (c - t_par) * k * k - s * t2,
    );
    for p2 in roots_p2 {
        if p2 < -1e-12 {
            continue;
        }
        let p_abs = p2.max(0.0).sqrt();
        let signs: &[f64] = if p_abs == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for &sg in signs {
            let p = sg * p_abs;
            let denom = Complex64::new(2.0 * s * p, k);
            if denom.norm() < 1e-14 {
                continue;
            }
            let w = t_perp / denom;
            let mut n = [0.0; 3];
            n[j] = p;
            n[u] = w.re;
            n[v] = w.im;
            candidates.push(n);
        }
    }

    // 2sp + ik = 0: the in-plane component is unconstrained by the linear part.
    if degenerate_k && t2 < 1e-24 {
        if s.abs() < 1e-14 {
            continuum = (c - t_par).abs() < 1e-12;
        } else if (c - t_par) / s >= -1e-12 {
            continuum = true;
        }
    }

    let mut real_roots: Vec<[f64; 3]> = Vec::new();
    for n in candidates {
        if system.residual(n, theta) < 1e-9
            && !real_roots.iter().any(|r| (0..3).all(|i| (r[i] - n[i]).abs() < 1e-9))
        {
            real_roots.push(n.map(|x| if x.abs() < 1e-15 { 0.0 } else { x }));
        }
    }
    let accepted = real_roots
        .iter()
        .copied()
        .filter(|n| (dot(*n, *n) - 1.0).abs() < ROOT_ACCEPT_TOL)
        .collect();
    SystemRoots {
        system: system.clone(),
        theta,
        real_roots,
        accepted,
        continuum,
    }
}

/// Root sets of the three per-generator systems and the axes common to all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSolution {
    pub theta: f64,
    pub target: TargetMap,
    pub systems: Vec<SystemRoots>,
    pub common_axes: Vec<[f64; 3]>,
}

pub fn solve_axis_system(target: &TargetMap, theta: f64) -> AxisSolution {
    let systems: Vec<SystemRoots> = Axis::ALL
        .iter()
        .map(|&g| solve_system(&AxisSystem::for_map(target, g), theta))
        .collect();
    let common_axes = intersect(&systems);
    AxisSolution {
        theta,
        target: *target,
        systems,
        common_axes,
    }
}

/// Accepted roots of any system that satisfy every system. Candidates are
/// substituted back, so systems with a continuum of roots are covered.
fn intersect(systems: &[SystemRoots]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for n in systems.iter().flat_map(|s| s.accepted.iter().copied()) {
        let ok = systems.iter().all(|s| s.system.residual(n, s.theta) < 1e-9);
        let dup = out
            .iter()
            .any(|m| (0..3).all(|i| (m[i] - n[i]).abs() < ROOT_ACCEPT_TOL));
        if ok && !dup {
            out.push(n);
        }
    }
    out
}

/// The three systems for the frame map `z → x, y → −y, x → z`, with the
/// `y`-system solved both with a `+1` right-hand side (target `+σ_y`) and
/// with the `−1` that the map requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameExchangeRoots {
    pub theta: f64,
    pub z_system: SystemRoots,
    pub x_system: SystemRoots,
    pub y_system_plus: SystemRoots,
    pub y_system_minus: SystemRoots,
    pub common_plus: Vec<[f64; 3]>,
    pub common_minus: Vec<[f64; 3]>,
}

pub fn frame_exchange_roots(theta: f64) -> FrameExchangeRoots {
    let map = TargetMap::frame_exchange();
    let z_system = solve_system(&AxisSystem::for_map(&map, Axis::Z), theta);
    let x_system = solve_system(&AxisSystem::for_map(&map, Axis::X), theta);
    let plus = AxisSystem {
        name: "y-system (+1 right-hand side)".into(),
        generator: Axis::Y,
        target: [0.0, 1.0, 0.0],
    };
    let mut minus = AxisSystem::for_map(&map, Axis::Y);
    minus.name = "y-system (-1 right-hand side)".into();
    let y_system_plus = solve_system(&plus, theta);
    let y_system_minus = solve_system(&minus, theta);
    let common_plus = intersect(&[z_system.clone(), x_system.clone(), y_system_plus.clone()]);
    let common_minus =
        intersect(&[z_system.clone(), x_system.clone(), y_system_minus.clone()]);
    FrameExchangeRoots {
        theta,
        z_system,
        x_system,
        y_system_plus,
        y_system_minus,
        common_plus,
        common_minus,
    }
}
