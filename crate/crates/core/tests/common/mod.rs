//! Brute-force reference implementations shared by the integration tests.
//! Words are plain letter lists reduced by adjacent cancellation; algebra
//! elements are maps from such lists to coefficients.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use relerg::dual_system::{DualState, GroupAlgebraElement, L2Vector};
use relerg::free_group::{Alphabet, FamilyId, FamilyKind, ReducedWord, SymbolId};

/// `(family, index, ±1)`.
pub type Letter = (u32, i64, i64);
pub type Word = Vec<Letter>;
pub type Naive = BTreeMap<Word, Complex64>;

pub const SHIFT: u32 = 0;
pub const CYCLE: u32 = 1;
pub const CYCLE_LEN: i64 = 3;

/// Shift family `s` and cycle family `c` of length 3.
pub fn alphabet() -> Alphabet {
    Alphabet::from_pairs(&[("s", FamilyKind::Shift), ("c", FamilyKind::Cycle { length: CYCLE_LEN as u32 })]).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn reduce(letters: &[Letter]) -> Word {
    let mut out: Word = Vec::new();
    for &l in letters {
        match out.last() {
            Some(&(f, i, s)) if f == l.0 && i == l.1 && s == -l.2 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

pub fn invert(letters: &[Letter]) -> Word {
    letters.iter().rev().map(|&(f, i, s)| (f, i, -s)).collect()
}

pub fn shift(letters: &[Letter], n: i64) -> Word {
    letters
        .iter()
        .map(|&(f, i, s)| if f == CYCLE { (f, (i + n).rem_euclid(CYCLE_LEN), s) } else { (f, i + n, s) })
        .collect()
}

pub fn has_shift_letter(w: &[Letter]) -> bool {
    w.iter().any(|l| l.0 == SHIFT)
}

pub fn expand(w: &ReducedWord) -> Word {
    let mut out = Vec::new();
    for r in w.runs() {
        for _ in 0..r.exp.abs() {
            out.push((r.symbol.family.0, r.symbol.index, r.exp.signum()));
        }
    }
    out
}

/// Builds a word letter by letter through the library's product.
pub fn build(letters: &[Letter]) -> ReducedWord {
    letters.iter().fold(ReducedWord::identity(), |acc, &(f, i, s)| {
        acc.concat(&ReducedWord::letter(SymbolId { family: FamilyId(f), index: i }, s))
    })
}

pub fn to_naive(a: &GroupAlgebraElement) -> Naive {
    a.terms().iter().map(|(w, c)| (expand(w), *c)).collect()
}

pub fn from_naive(a: &Naive) -> GroupAlgebraElement {
    GroupAlgebraElement::from_terms(a.iter().map(|(w, c)| (build(w), *c)))
}

pub fn mul(a: &Naive, b: &Naive) -> Naive {
    let mut out = Naive::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut w = u.clone();
            w.extend_from_slice(v);
            *out.entry(reduce(&w)).or_insert(c(0.0, 0.0)) += x * y;
        }
    }
    out
}

pub fn alpha(a: &Naive, n: i64) -> Naive {
    a.iter().map(|(w, c)| (shift(w, n), *c)).collect()
}

pub fn expectation(a: &Naive) -> Naive {
    a.iter().filter(|(w, _)| !has_shift_letter(w)).map(|(w, c)| (w.clone(), *c)).collect()
}

pub fn trace(a: &Naive) -> Complex64 {
    a.get(&Vec::new()).copied().unwrap_or_default()
}

pub fn one() -> Naive {
    Naive::from([(Vec::new(), c(1.0, 0.0))])
}

/// `⟨x, a x⟩ = Σ_{w,h} a_w x_h conj(x_{wh})`.
pub fn vector_state(x: &BTreeMap<Word, Complex64>, a: &Naive) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for (w, aw) in a {
        for (h, xh) in x {
            let mut wh = w.clone();
            wh.extend_from_slice(h);
            if let Some(xf) = x.get(&reduce(&wh)) {
                s += aw * xh * xf.conj();
            }
        }
    }
    s
}

/// Largest coefficient difference.
pub fn distance(a: &Naive, b: &Naive) -> f64 {
    let mut d: f64 = 0.0;
    for (w, x) in a {
        d = d.max((x - b.get(w).copied().unwrap_or_default()).norm());
    }
    for (w, y) in b {
        if !a.contains_key(w) {
            d = d.max(y.norm());
        }
    }
    d
}

pub fn random_letter(rng: &mut ChaCha8Rng, shift_range: i64) -> Letter {
    let s = if rng.random_bool(0.5) { 1 } else { -1 };
    if rng.random_bool(0.5) {
        (SHIFT, rng.random_range(-shift_range..=shift_range), s)
    } else {
        (CYCLE, rng.random_range(0..CYCLE_LEN), s)
    }
}

pub fn random_cycle_letter(rng: &mut ChaCha8Rng) -> Letter {
    (CYCLE, rng.random_range(0..CYCLE_LEN), if rng.random_bool(0.5) { 1 } else { -1 })
}

pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize, shift_range: i64) -> Word {
    let len = rng.random_range(0..=max_len);
    reduce(&(0..len).map(|_| random_letter(rng, shift_range)).collect::<Vec<_>>())
}

pub fn random_cycle_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.random_range(0..=max_len);
    reduce(&(0..len).map(|_| random_cycle_letter(rng)).collect::<Vec<_>>())
}

pub fn random_coef(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_element(rng: &mut ChaCha8Rng, terms: usize, max_len: usize) -> Naive {
    let mut a = Naive::new();
    for _ in 0..terms {
        *a.entry(random_word(rng, max_len, 3)).or_insert(c(0.0, 0.0)) += random_coef(rng);
    }
    a
}

pub fn random_cycle_element(rng: &mut ChaCha8Rng, terms: usize, max_len: usize) -> Naive {
    let mut a = Naive::new();
    for _ in 0..terms {
        *a.entry(random_cycle_word(rng, max_len)).or_insert(c(0.0, 0.0)) += random_coef(rng);
    }
    a
}

/// A random unit vector with up to `support` words, as both the library state
/// and its amplitude map.
pub fn random_vector_state(rng: &mut ChaCha8Rng, support: usize, max_len: usize) -> (DualState, BTreeMap<Word, Complex64>) {
    let mut amps: BTreeMap<Word, Complex64> = BTreeMap::new();
    for _ in 0..support.max(1) {
        *amps.entry(random_word(rng, max_len, 3)).or_insert(c(0.0, 0.0)) += random_coef(rng);
    }
    let norm = amps.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in amps.values_mut() {
        *v /= norm;
    }
    let x = L2Vector::from_amplitudes(amps.iter().map(|(w, v)| (build(w), *v)));
    (DualState::vector(x).unwrap(), amps)
}

/// `φ(α^{n_{p(1)}}(a₁)···α^{n_{p(k)}}(a_k))` minus the same with `E`-images.
pub fn correlation_difference(x: &BTreeMap<Word, Complex64>, ops: &[Naive], times: &[i64], perm: &[usize]) -> Complex64 {
    let mut full = one();
    let mut reduced = one();
    for (a, &p) in ops.iter().zip(perm) {
        full = mul(&full, &alpha(a, times[p]));
        reduced = mul(&reduced, &alpha(&expectation(a), times[p]));
    }
    vector_state(x, &full) - vector_state(x, &reduced)
}
