//! Exact multi-site Pauli algebra.
//!
//! Site 0 is the probe `Q`, site 1 the mediator `M`, further sites are
//! ancillas in interaction order. Matrix conventions are fixed in
//! [`Pauli::matrix`]: `Z = diag(1, -1)`, `X = [[0, 1], [1, 0]]`,
//! `Y = [[0, -i], [i, 0]]`, and `|0>` is the `+1` eigenvector of `Z`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped during canonicalization.
pub const CANON_EPS: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I_UNIT: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Single-site product `self * other` as `(i^k, P)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    /// Bit-flip and phase-flip parts of the symplectic representation.
    pub(crate) fn xz_bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I_UNIT], [I_UNIT, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

fn phase(k: u8) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I_UNIT,
        2 => -ONE,
        _ => -I_UNIT,
    }
}

/// Ordered tuple of single-site Paulis, e.g. `XZ` is `X_Q Z_M`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PauliLabel(Vec<Pauli>);

impl PauliLabel {
    pub fn new(sites: Vec<Pauli>) -> Self {
        PauliLabel(sites)
    }

    pub fn identity(n_sites: usize) -> Self {
        PauliLabel(vec![Pauli::I; n_sites])
    }

    /// Label with `p` on `site` and identity elsewhere.
    pub fn single(n_sites: usize, site: usize, p: Pauli) -> Self {
        let mut v = vec![Pauli::I; n_sites];
        v[site] = p;
        PauliLabel(v)
    }

    pub fn sites(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Every label on `n_sites` sites, in lexicographic `I < X < Y < Z` order.
    pub fn all(n_sites: usize) -> Vec<PauliLabel> {
        let mut out = vec![PauliLabel(Vec::with_capacity(n_sites))];
        for _ in 0..n_sites {
            out = out
                .into_iter()
                .flat_map(|l| {
                    Pauli::ALL.iter().map(move |&p| {
                        let mut v = l.0.clone();
                        v.push(p);
                        PauliLabel(v)
                    })
                })
                .collect();
        }
        out
    }

    /// Product of two labels as `(i^k, label)`.
    pub fn mul(&self, other: &PauliLabel) -> Result<(u8, PauliLabel)> {
        if self.len() != other.len() {
            return Err(Error::SiteCountMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let mut k = 0u8;
        let sites = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                k = (k + ph) % 4;
                p
            })
            .collect();
        Ok((k, PauliLabel(sites)))
    }

    pub fn commutes_with(&self, other: &PauliLabel) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl From<PauliLabel> for String {
    fn from(l: PauliLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for PauliLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for PauliLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Structural(format!("bad Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliLabel)
    }
}

/// A single weighted Pauli product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub label: PauliLabel,
    pub coeff: Complex64,
}

impl PauliString {
    pub fn new(label: PauliLabel, coeff: Complex64) -> Self {
        PauliString { label, coeff }
    }

    pub fn unit(label: PauliLabel) -> Self {
        PauliString { label, coeff: ONE }
    }

    pub fn n_sites(&self) -> usize {
        self.label.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.norm() < CANON_EPS
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(PauliString::unit(s.parse()?))
    }
}

/// Product of two Pauli strings with the accumulated phase.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    let (k, label) = a.label.mul(&b.label)?;
    Ok(PauliString {
        label,
        coeff: a.coeff * b.coeff * phase(k),
    })
}

/// Weighted sum of Pauli strings on a fixed number of sites.
///
/// Terms are kept in a `BTreeMap` so iteration order (and every serialized
/// form) is deterministic. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorExpr {
    n_sites: usize,
    terms: BTreeMap<PauliLabel, Complex64>,
}

impl OperatorExpr {
    pub fn zero(n_sites: usize) -> Self {
        OperatorExpr {
            n_sites,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_sites: usize) -> Self {
        Self::term(PauliLabel::identity(n_sites), ONE)
    }

    pub fn term(label: PauliLabel, coeff: Complex64) -> Self {
        let mut e = Self::zero(label.len());
        e.add_term(label, coeff);
        e
    }

    /// `p` acting on `site`, identity elsewhere.
    pub fn single(n_sites: usize, site: usize, p: Pauli) -> Self {
        Self::term(PauliLabel::single(n_sites, site, p), ONE)
    }

    /// Parses a unit-coefficient label such as `"XZ"`.
    pub fn label(s: &str) -> Self {
        Self::term(s.parse().expect("valid Pauli label"), ONE)
    }

    /// Builds a real-weighted sum from `(label, weight)` pairs.
    pub fn from_real_terms(n_sites: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let mut e = Self::zero(n_sites);
        for (l, w) in terms {
            let label: PauliLabel = l.parse()?;
            if label.len() != n_sites {
                return Err(Error::SiteCountMismatch {
                    left: n_sites,
                    right: label.len(),
                });
            }
            e.add_term(label, Complex64::new(*w, 0.0));
        }
        Ok(e)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, label: &PauliLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or(ZERO)
    }

    pub fn coeff_of(&self, label: &str) -> Complex64 {
        self.coeff(&label.parse().expect("valid Pauli label"))
    }

    pub fn add_term(&mut self, label: PauliLabel, coeff: Complex64) {
        assert_eq!(label.len(), self.n_sites, "site count mismatch");
        let entry = self.terms.entry(label).or_insert(ZERO);
        *entry += coeff;
        self.canonicalize();
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.norm() >= CANON_EPS);
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.canonicalize();
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_sites(other)?;
        let mut out = self.clone();
        for (l, c) in &other.terms {
            *out.terms.entry(l.clone()).or_insert(ZERO) += c;
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_sites(other)?;
        let mut acc: BTreeMap<PauliLabel, Complex64> = BTreeMap::new();
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                let (k, l) = la.mul(lb)?;
                *acc.entry(l).or_insert(ZERO) += ca * cb * phase(k);
            }
        }
        let mut out = OperatorExpr {
            n_sites: self.n_sites,
            terms: acc,
        };
        out.canonicalize();
        Ok(out)
    }

    /// Hermitian conjugate; the Pauli basis is Hermitian so only the
    /// coefficients are conjugated.
    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = c.conj());
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ|c|²` times `2^n` equals the squared Frobenius norm of the matrix.
    pub fn frobenius_norm(&self) -> f64 {
        let s: f64 = self.terms.values().map(|c| c.norm_sqr()).sum();
        (s * (1u64 << self.n_sites) as f64).sqrt()
    }

    /// If this is `±P` for a single Pauli product, return the sign and label.
    pub fn as_signed_label(&self, tol: f64) -> Option<(i8, PauliLabel)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (l, c) = self.terms.iter().next()?;
        if c.im.abs() > tol {
            return None;
        }
        if (c.re - 1.0).abs() <= tol {
            Some((1, l.clone()))
        } else if (c.re + 1.0).abs() <= tol {
            Some((-1, l.clone()))
        } else {
            None
        }
    }

    /// Replaces every site's Pauli generator by the supplied image.
    ///
    /// `images[site]` holds the images of `(X, Y, Z)` on that site. Images on
    /// distinct sites must commute, which holds for any unitary conjugate of
    /// the canonical generators.
    pub fn substitute(&self, images: &[[OperatorExpr; 3]]) -> Result<Self> {
        if images.len() != self.n_sites {
            return Err(Error::SiteCountMismatch {
                left: self.n_sites,
                right: images.len(),
            });
        }
        let n_out = images
            .first()
            .map(|t| t[0].n_sites)
            .unwrap_or(self.n_sites);
        let mut out = Self::zero(n_out);
        for (label, c) in &self.terms {
            let mut prod = Self::identity(n_out).scale(*c);
            for (site, p) in label.sites().iter().enumerate() {
                let img = match p {
                    Pauli::I => continue,
                    Pauli::X => &images[site][0],
                    Pauli::Y => &images[site][1],
                    Pauli::Z => &images[site][2],
                };
                prod = prod.checked_mul(img)?;
            }
            out = out.checked_add(&prod)?;
        }
        Ok(out)
    }

    /// Coefficient-wise distance `max_P |a_P - b_P|`.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        (self - other).max_abs_coeff()
    }

    fn check_sites(&self, other: &Self) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(Error::SiteCountMismatch {
                left: self.n_sites,
                right: other.n_sites,
            });
        }
        Ok(())
    }
}

impl From<PauliString> for OperatorExpr {
    fn from(p: PauliString) -> Self {
        OperatorExpr::term(p.label, p.coeff)
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (l, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im.abs() < CANON_EPS {
                write!(f, "{}*{}", c.re, l)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, l)?;
            }
        }
        Ok(())
    }
}

/// Panics on mismatched site counts; use [`OperatorExpr::checked_add`] to
/// get an error instead.
impl Add for &OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.checked_add(rhs).expect("site count mismatch")
    }
}

impl Sub for &OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.checked_add(&-rhs).expect("site count mismatch")
    }
}

impl Mul for &OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.checked_mul(rhs).expect("site count mismatch")
    }
}

impl Neg for &OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        self.scale_real(-1.0)
    }
}

/// `AB - BA` in canonical form.
pub fn commutator(a: &OperatorExpr, b: &OperatorExpr) -> Result<OperatorExpr> {
    let ab = a.checked_mul(b)?;
    let ba = b.checked_mul(a)?;
    ab.checked_add(&ba.scale_real(-1.0))
}
