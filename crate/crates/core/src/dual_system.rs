//! The dual system `(A, α)` of `(Γ, T)` on its dense group algebra.
//!
//! Elements are finite sums `Σ c_g λ(g)`; `λ` acts on finitely supported
//! vectors of `ℓ²(Γ)` by `λ(g)δ_h = δ_{gh}`. Word arithmetic is exact, so
//! every algebraic identity holds up to floating rounding of the
//! coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_group::{Alphabet, ReducedWord};

/// Coefficients smaller than this are dropped after every ring operation.
pub const PRUNE: f64 = 1e-14;

fn prune(terms: &mut BTreeMap<ReducedWord, Complex64>) {
    terms.retain(|_, c| c.norm() >= PRUNE);
}

/// A finite combination `Σ c_g λ(g)` in the group algebra `C[Γ]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupAlgebraElement {
    terms: BTreeMap<ReducedWord, Complex64>,
}

/// One `{word, re, im}` record of the JSON encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub word: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn records_to_map(al: &Alphabet, records: &[TermRecord]) -> Result<BTreeMap<ReducedWord, Complex64>> {
    let mut terms = BTreeMap::new();
    for r in records {
        let w = al.parse_word(&r.word)?;
        *terms.entry(w).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(r.re, r.im);
    }
    prune(&mut terms);
    Ok(terms)
}

fn map_to_records(al: &Alphabet, terms: &BTreeMap<ReducedWord, Complex64>) -> Vec<TermRecord> {
    terms
        .iter()
        .map(|(w, c)| TermRecord { word: al.format_word(w), re: c.re, im: c.im })
        .collect()
}

impl GroupAlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::lambda(ReducedWord::identity())
    }

    /// `λ(g)`.
    pub fn lambda(g: ReducedWord) -> Self {
        Self::term(g, Complex64::new(1.0, 0.0))
    }

    pub fn term(g: ReducedWord, c: Complex64) -> Self {
        Self::from_terms([(g, c)])
    }

    pub fn from_terms<I: IntoIterator<Item = (ReducedWord, Complex64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (w, c) in terms {
            *map.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        prune(&mut map);
        Self { terms: map }
    }

    pub fn terms(&self) -> &BTreeMap<ReducedWord, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, g: &ReducedWord) -> Complex64 {
        self.terms.get(g).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// `Σ |c_g|`, an upper bound for the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Longest word in the support.
    pub fn max_word_len(&self) -> u64 {
        self.terms.keys().map(ReducedWord::len).max().unwrap_or(0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * s)))
    }

    /// Convolution product: the coefficient of `w` is `Σ_{uv=w} a_u b_v`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out: BTreeMap<ReducedWord, Complex64> = BTreeMap::new();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                *out.entry(u.concat(v)).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        prune(&mut out);
        Self { terms: out }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.inverse(), c.conj())))
    }

    /// `α^n(a)`: shifts every word by `T^n`.
    pub fn alpha(&self, al: &Alphabet, n: i64) -> Self {
        if n == 0 {
            return self.clone();
        }
        // T^n is a bijection of Γ, so no two words collide.
        Self {
            terms: self.terms.iter().map(|(w, c)| (al.apply_t(w, n), *c)).collect(),
        }
    }

    /// The finite-orbit conditional expectation: keeps `λ(g)` for `g` with a
    /// finite `T`-orbit and drops every other term.
    pub fn cond_expectation(&self, al: &Alphabet) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| al.in_finite_orbit_subgroup(w))
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// True when every word of the support has a finite orbit.
    pub fn is_finite_orbit_supported(&self, al: &Alphabet) -> bool {
        self.terms.keys().all(|w| al.in_finite_orbit_subgroup(w))
    }

    /// `⟨δ_f, a δ_h⟩ = Σ_g c_g [f = g h]`.
    pub fn matrix_element(&self, f: &ReducedWord, h: &ReducedWord) -> Complex64 {
        self.coefficient(&f.concat(&h.inverse()))
    }

    pub fn apply_to_vector(&self, x: &L2Vector) -> L2Vector {
        let mut out: BTreeMap<ReducedWord, Complex64> = BTreeMap::new();
        for (g, c) in &self.terms {
            for (h, a) in &x.amplitudes {
                *out.entry(g.concat(h)).or_insert(Complex64::new(0.0, 0.0)) += c * a;
            }
        }
        prune(&mut out);
        L2Vector { amplitudes: out }
    }

    pub fn from_records(al: &Alphabet, records: &[TermRecord]) -> Result<Self> {
        Ok(Self { terms: records_to_map(al, records)? })
    }

    pub fn to_records(&self, al: &Alphabet) -> Vec<TermRecord> {
        map_to_records(al, &self.terms)
    }

    /// Product of a sequence of elements, evaluated left to right.
    pub fn product<'a, I: IntoIterator<Item = &'a Self>>(factors: I) -> Self {
        factors.into_iter().fold(Self::unit(), |acc, f| acc.multiply(f))
    }
}

impl Add for &GroupAlgebraElement {
    type Output = GroupAlgebraElement;
    fn add(self, rhs: Self) -> GroupAlgebraElement {
        GroupAlgebraElement::from_terms(
            self.terms.iter().chain(rhs.terms.iter()).map(|(w, c)| (w.clone(), *c)),
        )
    }
}

impl Sub for &GroupAlgebraElement {
    type Output = GroupAlgebraElement;
    fn sub(self, rhs: Self) -> GroupAlgebraElement {
        self + &(-rhs)
    }
}

impl Neg for &GroupAlgebraElement {
    type Output = GroupAlgebraElement;
    fn neg(self) -> GroupAlgebraElement {
        GroupAlgebraElement {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Mul for &GroupAlgebraElement {
    type Output = GroupAlgebraElement;
    fn mul(self, rhs: Self) -> GroupAlgebraElement {
        self.multiply(rhs)
    }
}

/// Finitely supported vector of `ℓ²(Γ)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct L2Vector {
    amplitudes: BTreeMap<ReducedWord, Complex64>,
}

impl L2Vector {
    /// `δ_g`.
    pub fn delta(g: ReducedWord) -> Self {
        Self::from_amplitudes([(g, Complex64::new(1.0, 0.0))])
    }

    /// `Ω = δ_1`.
    pub fn omega() -> Self {
        Self::delta(ReducedWord::identity())
    }

    pub fn from_amplitudes<I: IntoIterator<Item = (ReducedWord, Complex64)>>(amps: I) -> Self {
        let mut map = BTreeMap::new();
        for (w, c) in amps {
            *map.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        prune(&mut map);
        Self { amplitudes: map }
    }

    pub fn amplitudes(&self) -> &BTreeMap<ReducedWord, Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self::from_amplitudes(self.amplitudes.iter().map(|(w, c)| (w.clone(), c / n))))
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &L2Vector) -> Complex64 {
        self.amplitudes
            .iter()
            .filter_map(|(w, a)| other.amplitudes.get(w).map(|b| a.conj() * b))
            .sum()
    }

    pub fn from_records(al: &Alphabet, records: &[TermRecord]) -> Result<Self> {
        Ok(Self { amplitudes: records_to_map(al, records)? })
    }

    pub fn to_records(&self, al: &Alphabet) -> Vec<TermRecord> {
        map_to_records(al, &self.amplitudes)
    }
}

/// States on `A`: the canonical trace, vector states and finite mixtures of
/// vector states (density matrices of finite rank).
#[derive(Clone, Debug, PartialEq)]
pub enum DualState {
    Trace,
    Vector(L2Vector),
    DensityMixture(Vec<(f64, L2Vector)>),
}

const UNIT_TOL: f64 = 1e-9;

impl DualState {
    pub fn vector(x: L2Vector) -> Result<Self> {
        if (x.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidState(format!("vector norm {} is not 1", x.norm())));
        }
        Ok(DualState::Vector(x))
    }

    pub fn mixture(components: Vec<(f64, L2Vector)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidState("empty mixture".into()));
        }
        let mut total = 0.0;
        for (p, x) in &components {
            if !(*p > 0.0) {
                return Err(Error::InvalidState(format!("mixture weight {p} is not positive")));
            }
            if (x.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidState(format!("vector norm {} is not 1", x.norm())));
            }
            total += p;
        }
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(DualState::DensityMixture(components))
    }

    /// The values `φ(λ(w))` on the (finite) set of words where they are
    /// nonzero, so that `φ(a) = Σ_w a_w φ(λ(w))`.
    pub fn word_weights(&self) -> BTreeMap<ReducedWord, Complex64> {
        let mut out = BTreeMap::new();
        match self {
            DualState::Trace => {
                out.insert(ReducedWord::identity(), Complex64::new(1.0, 0.0));
            }
            DualState::Vector(x) => add_vector_weights(&mut out, x, 1.0),
            DualState::DensityMixture(parts) => {
                for (p, x) in parts {
                    add_vector_weights(&mut out, x, *p);
                }
            }
        }
        out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        out
    }

    pub fn evaluate(&self, a: &GroupAlgebraElement) -> Complex64 {
        match self {
            DualState::Trace => a.coefficient(&ReducedWord::identity()),
            DualState::Vector(x) => vector_expectation(x, a),
            DualState::DensityMixture(parts) => {
                parts.iter().map(|(p, x)| vector_expectation(x, a) * p).sum()
            }
        }
    }
}

// ⟨x, λ(w) x⟩ picks up conj(x_f) x_h whenever w = f h⁻¹.
fn add_vector_weights(out: &mut BTreeMap<ReducedWord, Complex64>, x: &L2Vector, p: f64) {
    for (f, xf) in &x.amplitudes {
        for (h, xh) in &x.amplitudes {
            let w = f.concat(&h.inverse());
            *out.entry(w).or_insert(Complex64::new(0.0, 0.0)) += xf.conj() * xh * p;
        }
    }
}

fn vector_expectation(x: &L2Vector, a: &GroupAlgebraElement) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (f, xf) in &x.amplitudes {
        for (h, xh) in &x.amplitudes {
            let c = a.matrix_element(f, h);
            if c != Complex64::new(0.0, 0.0) {
                acc += xf.conj() * c * xh;
            }
        }
    }
    acc
}
