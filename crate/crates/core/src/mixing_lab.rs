//! Mixing diagnostics on dual systems: decay sequences, multitime
//! correlations, gap searches for higher-order mixing, and Furstenberg and
//! Bergelson averages.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::dual_system::{DualState, GroupAlgebraElement};
use crate::error::{Error, Result};
use crate::free_group::{Alphabet, FamilyKind, ReducedWord, SymbolId};

/// Differences smaller than this count as zero in gap scans.
pub const ZERO_TOL: f64 = 1e-12;
/// Largest number of operators accepted by the gap scan.
pub const MAX_ORDER: usize = 5;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `φ(αⁿ(a − Ea))` for `n = 1..=n_max`.
pub fn mixing_decay(al: &Alphabet, state: &DualState, a: &GroupAlgebraElement, n_max: u32) -> Vec<Complex64> {
    let d = a - &a.cond_expectation(al);
    (1..=n_max as i64).map(|n| state.evaluate(&d.alpha(al, n))).collect()
}

/// A multitime correlation `φ(α^{n_{p(1)}}(a₁)···α^{n_{p(k)}}(a_k))`.
/// Permutations are 0-based: `permutation[j]` is the time slot of `a_{j+1}`.
#[derive(Clone, Debug)]
pub struct CorrelationQuery {
    pub state: DualState,
    pub operators: Vec<GroupAlgebraElement>,
    pub times: Vec<i64>,
    pub permutation: Vec<usize>,
}

pub fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    if perm.len() != k {
        return Err(Error::InvalidPermutation(format!("length {} for {k} operators", perm.len())));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection of 0..{k}")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn correlation_product(
    al: &Alphabet,
    operators: &[GroupAlgebraElement],
    times: &[i64],
    perm: &[usize],
) -> Result<GroupAlgebraElement> {
    if operators.is_empty() || operators.len() != times.len() {
        return Err(Error::LengthMismatch(format!(
            "{} operators and {} times",
            operators.len(),
            times.len()
        )));
    }
    check_permutation(perm, operators.len())?;
    let mut acc = GroupAlgebraElement::unit();
    for (a, &p) in operators.iter().zip(perm) {
        acc = acc.multiply(&a.alpha(al, times[p]));
    }
    Ok(acc)
}

pub fn multitime_correlation(al: &Alphabet, q: &CorrelationQuery) -> Result<Complex64> {
    let prod = correlation_product(al, &q.operators, &q.times, &q.permutation)?;
    Ok(q.state.evaluate(&prod))
}

/// The correlation minus its counterpart with every `a_j` replaced by `Ea_j`.
pub fn correlation_difference(
    al: &Alphabet,
    state: &DualState,
    operators: &[GroupAlgebraElement],
    times: &[i64],
    perm: &[usize],
) -> Result<Complex64> {
    let full = correlation_product(al, operators, times, perm)?;
    let images: Vec<_> = operators.iter().map(|a| a.cond_expectation(al)).collect();
    let reduced = correlation_product(al, &images, times, perm)?;
    Ok(state.evaluate(&full) - state.evaluate(&reduced))
}

/// Outcome of a gap scan over `n₁ ≤ window`, `1 ≤ n_{j+1} − n_j ≤ gap_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapThreshold {
    /// Least `G` such that the difference vanishes on every scanned tuple
    /// with `n₁ ≥ G` and all gaps `≥ G`.
    pub g: u32,
    /// False when no `G ≤ min(window, gap_max)` works.
    pub valid: bool,
    /// A nonzero tuple with `min(n₁, gaps) = G − 1`, certifying minimality.
    pub witness: Option<Vec<u32>>,
    pub witness_value: Option<(f64, f64)>,
    /// Set when `valid` is false.
    pub counterexample: Option<Vec<u32>>,
    pub nonzero_tuples: usize,
    pub window: u32,
    pub gap_max: u32,
}

fn min_gap(times: &[u32]) -> u32 {
    let mut m = times[0];
    for w in times.windows(2) {
        m = m.min(w[1] - w[0]);
    }
    m
}

fn threshold_from_hits<'a, I>(hits: I, window: u32, gap_max: u32) -> GapThreshold
where
    I: Iterator<Item = (&'a Vec<u32>, Complex64)>,
{
    let mut best: Option<(u32, Vec<u32>, Complex64)> = None;
    let mut count = 0;
    for (times, d) in hits {
        if d.norm() <= ZERO_TOL {
            continue;
        }
        count += 1;
        let m = min_gap(times);
        let better = match &best {
            None => true,
            Some((bm, bt, _)) => m > *bm || (m == *bm && times < bt),
        };
        if better {
            best = Some((m, times.clone(), d));
        }
    }
    let bound = window.min(gap_max);
    match best {
        None => GapThreshold {
            g: 1,
            valid: true,
            witness: None,
            witness_value: None,
            counterexample: None,
            nonzero_tuples: 0,
            window,
            gap_max,
        },
        Some((m, times, d)) => {
            let g = m + 1;
            let valid = g <= bound;
            GapThreshold {
                g,
                valid,
                witness: Some(times.clone()),
                witness_value: Some((d.re, d.im)),
                counterexample: if valid { None } else { Some(times) },
                nonzero_tuples: count,
                window,
                gap_max,
            }
        }
    }
}

struct Term {
    infinite: bool,
    coef: Complex64,
    /// `shifted[n]` is `Tⁿ w` for `0 ≤ n ≤ max_time`.
    shifted: Vec<ReducedWord>,
    letters: Vec<(SymbolId, i64)>,
    len: u64,
}

struct Scan<'a> {
    al: &'a Alphabet,
    k: usize,
    perm: &'a [usize],
    window: u32,
    gap_max: u32,
    terms: Vec<Vec<Term>>,
    /// Target word → index into `weights`.
    targets: HashMap<ReducedWord, usize>,
    target_words: Vec<ReducedWord>,
    /// `weights[t][s]` = `φ_s(λ(target_t))`.
    weights: Vec<Vec<Complex64>>,
    max_target_len: u64,
    /// `rem_max[j]` bounds the length of the product of factors `j..k`.
    rem_max: Vec<u64>,
    hits: HashMap<Vec<u32>, Vec<Complex64>>,
    num_states: usize,
}

impl Scan<'_> {
    fn global_range(&self, i: usize) -> (u32, u32) {
        (i as u32 + 1, self.window + i as u32 * self.gap_max)
    }

    fn range(&self, i: usize, times: &[Option<u32>]) -> Option<(u32, u32)> {
        let lower = (0..i).rev().find(|&l| times[l].is_some());
        let upper = (i + 1..self.k).find(|&u| times[u].is_some());
        let (mut lo, mut hi) = match lower {
            None => self.global_range(i),
            Some(l) => {
                let nl = times[l].unwrap();
                let d = (i - l) as u32;
                (nl + d, nl + d * self.gap_max)
            }
        };
        if let Some(u) = upper {
            let nu = times[u].unwrap() as i64;
            let d = (u - i) as i64;
            lo = lo.max((nu - d * self.gap_max as i64).max(0) as u32);
            hi = hi.min((nu - d).max(0) as u32);
        }
        (lo <= hi).then_some((lo, hi))
    }

    // Could the letter (sym, sign) at the end of a prefix be cancelled by a
    // letter of some factor at product position ≥ j?
    fn cancellable(&self, j: usize, sym: SymbolId, sign: i64) -> bool {
        for jj in j..self.k {
            let (lo, hi) = self.global_range(self.perm[jj]);
            for term in &self.terms[jj] {
                for &(s, e) in &term.letters {
                    if e != -sign || s.family != sym.family {
                        continue;
                    }
                    match self.al.family(s.family).kind {
                        FamilyKind::Shift => {
                            let n = sym.index - s.index;
                            if n >= lo as i64 && n <= hi as i64 {
                                return true;
                            }
                        }
                        FamilyKind::Cycle { length } => {
                            let m = length as i64;
                            let need = (sym.index - s.index).rem_euclid(m);
                            let first = lo as i64 + (need - lo as i64).rem_euclid(m);
                            if first <= hi as i64 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn viable(&self, j: usize, prefix: &ReducedWord) -> bool {
        let rem = self.rem_max[j];
        let len = prefix.len();
        if len > self.max_target_len + rem {
            return false;
        }
        let mut needs_cancel = true;
        let mut ok = false;
        for w in &self.target_words {
            let cp = prefix.common_prefix_len(w);
            if len - cp <= rem {
                ok = true;
                if cp == len {
                    needs_cancel = false;
                    break;
                }
            }
        }
        if !ok {
            return false;
        }
        if needs_cancel {
            let (sym, sign) = prefix.last_letter().expect("nonempty when cancellation is needed");
            return self.cancellable(j, sym, sign);
        }
        true
    }

    fn dfs(&mut self, j: usize, prefix: &ReducedWord, coef: Complex64, any_inf: bool, times: &mut Vec<Option<u32>>) {
        if j == self.k {
            if !any_inf {
                return;
            }
            if let Some(&t) = self.targets.get(prefix) {
                let key: Vec<u32> = times.iter().map(|t| t.unwrap()).collect();
                let entry = self.hits.entry(key).or_insert_with(|| vec![zero(); self.num_states]);
                for (e, w) in entry.iter_mut().zip(&self.weights[t]) {
                    *e += coef * w;
                }
            }
            return;
        }
        let i = self.perm[j];
        let Some((lo, hi)) = self.range(i, times) else {
            return;
        };
        let last = j + 1 == self.k;
        for ti in 0..self.terms[j].len() {
            let (infinite, c) = {
                let t = &self.terms[j][ti];
                (t.infinite, t.coef)
            };
            if last && !any_inf && !infinite {
                continue;
            }
            for n in lo..=hi {
                let next = prefix.concat(&self.terms[j][ti].shifted[n as usize]);
                if !last && !self.viable(j + 1, &next) {
                    continue;
                }
                times[i] = Some(n);
                self.dfs(j + 1, &next, coef * c, any_inf || infinite, times);
                times[i] = None;
            }
        }
    }
}

fn scan_setup<'a>(
    al: &'a Alphabet,
    states: &[DualState],
    operators: &[GroupAlgebraElement],
    perm: &'a [usize],
    window: u32,
    gap_max: u32,
) -> Result<Scan<'a>> {
    let k = operators.len();
    if k == 0 || k > MAX_ORDER {
        return Err(Error::LengthMismatch(format!("gap scans take 1..={MAX_ORDER} operators, got {k}")));
    }
    check_permutation(perm, k)?;
    if window == 0 || gap_max == 0 {
        return Err(Error::LengthMismatch("empty scan window".into()));
    }
    let max_time = (window + (k as u32 - 1) * gap_max) as usize;
    let terms: Vec<Vec<Term>> = operators
        .iter()
        .map(|a| {
            a.terms()
                .iter()
                .map(|(w, c)| Term {
                    infinite: !al.in_finite_orbit_subgroup(w),
                    coef: *c,
                    shifted: (0..=max_time).map(|n| al.apply_t(w, n as i64)).collect(),
                    letters: w.runs().iter().map(|r| (r.symbol, r.exp.signum())).collect(),
                    len: w.len(),
                })
                .collect()
        })
        .collect();
    let mut rem_max = vec![0; k + 1];
    for j in (0..k).rev() {
        rem_max[j] = rem_max[j + 1] + terms[j].iter().map(|t| t.len).max().unwrap_or(0);
    }
    let mut targets = HashMap::new();
    let mut target_words = Vec::new();
    let mut weights: Vec<Vec<Complex64>> = Vec::new();
    for (s, state) in states.iter().enumerate() {
        for (w, v) in state.word_weights() {
            let t = *targets.entry(w.clone()).or_insert_with(|| {
                target_words.push(w.clone());
                weights.push(vec![zero(); states.len()]);
                weights.len() - 1
            });
            weights[t][s] += v;
        }
    }
    let max_target_len = target_words.iter().map(ReducedWord::len).max().unwrap_or(0);
    Ok(Scan {
        al,
        k,
        perm,
        window,
        gap_max,
        terms,
        targets,
        target_words,
        weights,
        max_target_len,
        rem_max,
        hits: HashMap::new(),
        num_states: states.len(),
    })
}

/// Gap thresholds for several states at once; one pruned search covers all
/// of them.
pub fn higher_order_mixing_check_many(
    al: &Alphabet,
    states: &[DualState],
    operators: &[GroupAlgebraElement],
    perm: &[usize],
    window: u32,
    gap_max: u32,
) -> Result<Vec<GapThreshold>> {
    let mut scan = scan_setup(al, states, operators, perm, window, gap_max)?;
    if !scan.target_words.is_empty() {
        let mut times = vec![None; scan.k];
        scan.dfs(0, &ReducedWord::identity(), Complex64::new(1.0, 0.0), false, &mut times);
    }
    Ok((0..states.len())
        .map(|s| threshold_from_hits(scan.hits.iter().map(|(t, v)| (t, v[s])), window, gap_max))
        .collect())
}

pub fn higher_order_mixing_check(
    al: &Alphabet,
    state: &DualState,
    operators: &[GroupAlgebraElement],
    perm: &[usize],
    window: u32,
    gap_max: u32,
) -> Result<GapThreshold> {
    Ok(higher_order_mixing_check_many(al, std::slice::from_ref(state), operators, perm, window, gap_max)?
        .pop()
        .expect("one state in, one threshold out"))
}

/// The same scan by direct evaluation of every tuple in the window.
pub fn higher_order_mixing_check_naive(
    al: &Alphabet,
    state: &DualState,
    operators: &[GroupAlgebraElement],
    perm: &[usize],
    window: u32,
    gap_max: u32,
) -> Result<GapThreshold> {
    let k = operators.len();
    check_permutation(perm, k)?;
    let mut hits: Vec<(Vec<u32>, Complex64)> = Vec::new();
    let mut times = vec![0u32; k];
    fn rec(
        i: usize,
        times: &mut Vec<u32>,
        window: u32,
        gap_max: u32,
        f: &mut dyn FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if i == times.len() {
            return f(times);
        }
        let (lo, hi) = if i == 0 { (1, window) } else { (times[i - 1] + 1, times[i - 1] + gap_max) };
        for n in lo..=hi {
            times[i] = n;
            rec(i + 1, times, window, gap_max, f)?;
        }
        Ok(())
    }
    rec(0, &mut times, window, gap_max, &mut |t| {
        let ts: Vec<i64> = t.iter().map(|&n| n as i64).collect();
        let d = correlation_difference(al, state, operators, &ts, perm)?;
        hits.push((t.to_vec(), d));
        Ok(())
    })?;
    Ok(threshold_from_hits(hits.iter().map(|(t, d)| (t, *d)), window, gap_max))
}

/// A positive element given through a factor: `a = c*c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveElement {
    factor: GroupAlgebraElement,
    value: GroupAlgebraElement,
}

impl PositiveElement {
    pub fn from_factor(c: GroupAlgebraElement) -> Self {
        let value = c.adjoint().multiply(&c);
        Self { factor: c, value }
    }

    pub fn factor(&self) -> &GroupAlgebraElement {
        &self.factor
    }

    pub fn value(&self) -> &GroupAlgebraElement {
        &self.value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FurstenbergResult {
    /// `(1/N) Σ |μ(a αⁿ(a)···α^{kn}(a))|`, or without `|·|`.
    pub average: Complex64,
    /// `μ((Ea)^{k+1})`.
    pub comparison: f64,
    /// The per-`n` correlation values.
    pub values: Vec<Complex64>,
}

/// Furstenberg averages under the canonical trace. `order`, when given,
/// is a permutation of `0..=k` placing `α^{order[j]·n}(a)` at factor `j`.
pub fn furstenberg_average(
    al: &Alphabet,
    a: &PositiveElement,
    k: usize,
    n: u32,
    absolute: bool,
    order: Option<&[usize]>,
) -> Result<FurstenbergResult> {
    let identity: Vec<usize> = (0..=k).collect();
    let order = order.unwrap_or(&identity);
    check_permutation(order, k + 1)?;
    if n == 0 {
        return Err(Error::LengthMismatch("empty average".into()));
    }
    let av = a.value();
    let mut values = Vec::with_capacity(n as usize);
    let mut sum = zero();
    for m in 1..=n as i64 {
        let mut prod = GroupAlgebraElement::unit();
        for &j in order {
            prod = prod.multiply(&av.alpha(al, j as i64 * m));
        }
        let v = DualState::Trace.evaluate(&prod);
        sum += if absolute { Complex64::new(v.norm(), 0.0) } else { v };
        values.push(v);
    }
    let ea = av.cond_expectation(al);
    let power = GroupAlgebraElement::product(std::iter::repeat_n(&ea, k + 1));
    Ok(FurstenbergResult {
        average: sum / n as f64,
        comparison: DualState::Trace.evaluate(&power).re,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BergelsonResult {
    pub average: f64,
    pub e_average: f64,
}

/// The terms `(m, n, |μ(a₀ α^m(a₁) α^n(a₂) α^{m+n}(a₃))|, same for E-images)`
/// for `m ∈ p+1..=p+N`, `n ∈ q+1..=q+N`, row by row.
pub fn bergelson_values(
    al: &Alphabet,
    ops: &[GroupAlgebraElement; 4],
    p: i64,
    q: i64,
    n: u32,
) -> Result<Vec<(i64, i64, f64, f64)>> {
    if n == 0 {
        return Err(Error::LengthMismatch("empty average".into()));
    }
    let images: Vec<GroupAlgebraElement> = ops.iter().map(|a| a.cond_expectation(al)).collect();
    let eval = |a: &[GroupAlgebraElement], m: i64, nn: i64| {
        let prod = a[0]
            .multiply(&a[1].alpha(al, m))
            .multiply(&a[2].alpha(al, nn))
            .multiply(&a[3].alpha(al, m + nn));
        DualState::Trace.evaluate(&prod).norm()
    };
    let mut out = Vec::with_capacity(n as usize * n as usize);
    for m in p + 1..=p + n as i64 {
        for nn in q + 1..=q + n as i64 {
            out.push((m, nn, eval(ops, m, nn), eval(&images, m, nn)));
        }
    }
    Ok(out)
}

/// `(1/N²) Σ_{m=p+1}^{p+N} Σ_{n=q+1}^{q+N} |μ(a₀ α^m(a₁) α^n(a₂) α^{m+n}(a₃))|`
/// together with the same average of the `E`-images.
pub fn bergelson_average(
    al: &Alphabet,
    ops: &[GroupAlgebraElement; 4],
    p: i64,
    q: i64,
    n: u32,
) -> Result<BergelsonResult> {
    let values = bergelson_values(al, ops, p, q, n)?;
    let (s, e) = values.iter().fold((0.0, 0.0), |(s, e), v| (s + v.2, e + v.3));
    let n2 = (n as f64) * (n as f64);
    Ok(BergelsonResult { average: s / n2, e_average: e / n2 })
}

/// Diagonal averages `(1/N) Σ_n φ(α^{(p(1)+1)n}(a₁)···α^{(p(k)+1)n}(a_k))` of
/// the operators and of their `E`-images.
pub fn diagonal_average(
    al: &Alphabet,
    state: &DualState,
    operators: &[GroupAlgebraElement],
    perm: &[usize],
    n: u32,
    absolute: bool,
) -> Result<(Complex64, Complex64)> {
    check_permutation(perm, operators.len())?;
    if n == 0 {
        return Err(Error::LengthMismatch("empty average".into()));
    }
    let images: Vec<GroupAlgebraElement> = operators.iter().map(|a| a.cond_expectation(al)).collect();
    let k = operators.len();
    let ident: Vec<usize> = (0..k).collect();
    let (mut s, mut e) = (zero(), zero());
    let fold = |v: Complex64| if absolute { Complex64::new(v.norm(), 0.0) } else { v };
    for m in 1..=n as i64 {
        let times: Vec<i64> = perm.iter().map(|&p| (p as i64 + 1) * m).collect();
        s += fold(state.evaluate(&correlation_product(al, operators, &times, &ident)?));
        e += fold(state.evaluate(&correlation_product(al, &images, &times, &ident)?));
    }
    Ok((s / n as f64, e / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_system::L2Vector;

    fn al() -> Alphabet {
        Alphabet::from_pairs(&[
            ("s", FamilyKind::Shift),
            ("c", FamilyKind::Cycle { length: 3 }),
        ])
        .unwrap()
    }

    fn lam(al: &Alphabet, t: &str) -> GroupAlgebraElement {
        GroupAlgebraElement::lambda(al.parse_word(t).unwrap())
    }

    #[test]
    fn decay_examples() {
        let al = al();
        assert!(mixing_decay(&al, &DualState::Trace, &lam(&al, "c[0]"), 50).iter().all(|v| v.norm() == 0.0));
        assert!(mixing_decay(&al, &DualState::Trace, &lam(&al, "s[0]"), 50).iter().all(|v| v.norm() == 0.0));
        let x = L2Vector::from_amplitudes([
            (ReducedWord::identity(), Complex64::new(1.0, 0.0)),
            (al.parse_word("s[5]").unwrap(), Complex64::new(1.0, 0.0)),
        ])
        .normalized()
        .unwrap();
        let seq = mixing_decay(&al, &DualState::vector(x).unwrap(), &lam(&al, "s[0]"), 200);
        for (i, v) in seq.iter().enumerate() {
            let expected = if i + 1 == 5 { 0.5 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn correlation_cancellation() {
        let al = al();
        let ops = vec![lam(&al, "s[0]"), lam(&al, "s[0]^-1")];
        for m in 0..6 {
            for n in 0..6 {
                let q = CorrelationQuery {
                    state: DualState::Trace,
                    operators: ops.clone(),
                    times: vec![m, n],
                    permutation: vec![0, 1],
                };
                let v = multitime_correlation(&al, &q).unwrap();
                assert_eq!(v.re, if m == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn trace_gap_example() {
        let al = al();
        let ops = vec![lam(&al, "s[0]"), lam(&al, "s[0]^-1")];
        let g = higher_order_mixing_check(&al, &DualState::Trace, &ops, &[0, 1], 10, 10).unwrap();
        assert_eq!(g.g, 1);
        assert!(g.valid);
        let fin = vec![lam(&al, "c[0]"), lam(&al, "c[1]^2")];
        let g = higher_order_mixing_check(&al, &DualState::Trace, &fin, &[1, 0], 10, 10).unwrap();
        assert_eq!((g.g, g.nonzero_tuples), (1, 0));
    }

    #[test]
    fn pruned_scan_matches_naive() {
        let al = al();
        let x = L2Vector::from_amplitudes([
            (ReducedWord::identity(), Complex64::new(1.0, 0.0)),
            (al.parse_word("s[4] c[1]").unwrap(), Complex64::new(0.0, 1.0)),
        ])
        .normalized()
        .unwrap();
        let state = DualState::vector(x).unwrap();
        let ops = vec![
            &lam(&al, "s[0] c[0]") + &GroupAlgebraElement::unit(),
            lam(&al, "c[2]"),
            &lam(&al, "c[1]^-1 s[1]^-1") + &lam(&al, "s[0]^-1"),
        ];
        for perm in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            let fast = higher_order_mixing_check(&al, &state, &ops, &perm, 8, 6).unwrap();
            let slow = higher_order_mixing_check_naive(&al, &state, &ops, &perm, 8, 6).unwrap();
            assert_eq!(fast, slow, "{perm:?}");
        }
    }

    #[test]
    fn furstenberg_examples() {
        let al = al();
        let one = GroupAlgebraElement::unit();
        let r = furstenberg_average(&al, &PositiveElement::from_factor(one.clone()), 3, 20, true, None).unwrap();
        assert_eq!(r.average, Complex64::new(1.0, 0.0));
        let c = &one + &lam(&al, "s[0]");
        let r = furstenberg_average(&al, &PositiveElement::from_factor(c), 2, 50, true, None).unwrap();
        assert_eq!(r.average.re, 8.0);
        assert_eq!(r.comparison, 8.0);
        let c = &one + &lam(&al, "c[0]");
        let r = furstenberg_average(&al, &PositiveElement::from_factor(c), 2, 30, false, None).unwrap();
        assert_eq!(r.average.re, 12.0);
        assert_eq!(r.comparison, 20.0);
    }

    #[test]
    fn bergelson_examples() {
        let al = al();
        let one = GroupAlgebraElement::unit();
        let units = [one.clone(), one.clone(), one.clone(), one.clone()];
        let r = bergelson_average(&al, &units, 0, 0, 5).unwrap();
        assert_eq!((r.average, r.e_average), (1.0, 1.0));
        let ops = [one.clone(), lam(&al, "s[0]"), one.clone(), one.clone()];
        let r = bergelson_average(&al, &ops, 2, -3, 6).unwrap();
        assert_eq!(r.average, 0.0);
    }

    #[test]
    fn permutation_errors() {
        assert!(check_permutation(&[0, 0], 2).is_err());
        assert!(check_permutation(&[0, 2], 2).is_err());
        assert!(check_permutation(&[0], 2).is_err());
        assert!(check_permutation(&[1, 0], 2).is_ok());
    }
}
