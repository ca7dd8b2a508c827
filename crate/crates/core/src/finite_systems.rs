//! Finite-dimensional dynamical systems on `ℂ^d`: the four-state example,
//! relative ergodicity and weak-mixing checks, limits of weighted means of
//! `αⁿ`, and tensor products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::averaging::{Domain, WeightScheme};
use crate::error::{Error, Result};

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;
pub type Functional = DVector<Complex64>;

const PROJECTION_TOL: f64 = 1e-10;
const UNITAL_TOL: f64 = 1e-12;
pub const MAX_DIMENSION: usize = 4096;

/// `(α, E, S)`: a Markov operator on column vectors, a distinguished
/// projection and a finite family of functionals `x ↦ φ·x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSystem {
    alpha: RMatrix,
    e: RMatrix,
    states: Vec<Functional>,
}

impl FiniteSystem {
    /// Requires `α𝟙 = 𝟙`, `E² = E`, and entrywise `α ≥ 0` when `markov` is set.
    pub fn new(alpha: RMatrix, e: RMatrix, states: Vec<Functional>, markov: bool) -> Result<Self> {
        let d = alpha.nrows();
        if !alpha.is_square() || e.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "alpha {:?} and E {:?} must be square of one size",
                alpha.shape(),
                e.shape()
            )));
        }
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::DimensionOverflow(d));
        }
        if let Some(f) = states.iter().find(|f| f.len() != d) {
            return Err(Error::DimensionMismatch(format!("functional of length {} in dimension {d}", f.len())));
        }
        let one = RVector::from_element(d, 1.0);
        let unital = (&alpha * &one - &one).amax();
        if unital > UNITAL_TOL {
            return Err(Error::InvalidSystem(format!("alpha is not unital (residual {unital:e})")));
        }
        if markov && alpha.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidSystem("alpha has a negative entry".into()));
        }
        let idem = (&e * &e - &e).amax();
        if idem > PROJECTION_TOL {
            return Err(Error::InvalidSystem(format!("E is not idempotent (residual {idem:e})")));
        }
        Ok(Self { alpha, e, states })
    }

    pub fn dimension(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &RMatrix {
        &self.alpha
    }

    pub fn projection(&self) -> &RMatrix {
        &self.e
    }

    pub fn states(&self) -> &[Functional] {
        &self.states
    }

    pub fn with_projection(&self, e: RMatrix) -> Result<Self> {
        Self::new(self.alpha.clone(), e, self.states.clone(), false)
    }

    pub fn with_states(&self, states: Vec<Functional>) -> Result<Self> {
        Self::new(self.alpha.clone(), self.e.clone(), states, false)
    }

    /// `αⁿ x` by repeated squaring.
    pub fn evolve(&self, x: &RVector, n: u64) -> Result<RVector> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!("vector of length {}", x.len())));
        }
        Ok(matrix_power(&self.alpha, n) * x)
    }
}

pub fn matrix_power(m: &RMatrix, mut n: u64) -> RMatrix {
    let mut result = RMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn canonical_basis(d: usize) -> Vec<RVector> {
    (0..d).map(|i| RVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })).collect()
}

pub fn real_functional(values: &[f64]) -> Functional {
    Functional::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)))
}

pub fn evaluate(phi: &Functional, x: &RVector) -> Complex64 {
    phi.iter().zip(x.iter()).map(|(f, v)| f * v).sum()
}

/// `φ(𝟙) = 1`.
pub fn is_unital(phi: &Functional) -> bool {
    (phi.iter().sum::<Complex64>() - 1.0).norm() <= UNITAL_TOL
}

/// `f = h₁ + i h₂` with `h₁ = (f + f*)/2`, `h₂ = (f − f*)/(2i)`, `f*(x) = conj(f(x*))`.
pub fn hermitian_parts(f: &Functional) -> (Functional, Functional) {
    let star = f.map(|c| c.conj());
    let h1 = (f + &star) / Complex64::new(2.0, 0.0);
    let h2 = (f - &star) / Complex64::new(0.0, 2.0);
    (h1, h2)
}

/// The maximizing pair of a check and its running behaviour.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub state: usize,
    pub probe: usize,
    pub mean: f64,
    /// Smallest running mean over the checkpoints in `[N/2, N]`.
    pub running_liminf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub max_defect: f64,
    pub tol: f64,
    pub n: usize,
    pub witness: Option<Witness>,
}

fn check_discrete(scheme: &WeightScheme, n: usize) -> Result<()> {
    if scheme.domain() != Domain::Discrete {
        return Err(Error::InvalidScheme("finite systems run on discrete schemes".into()));
    }
    scheme.check_index(n as f64)
}

fn check_probes(sys: &FiniteSystem, probes: &[RVector]) -> Result<()> {
    if let Some(p) = probes.iter().find(|p| p.len() != sys.dimension()) {
        return Err(Error::DimensionMismatch(format!("probe of length {}", p.len())));
    }
    Ok(())
}

/// `φ(αⁿ(x − Ex))` for `n = 1..=N`.
fn defect_values(sys: &FiniteSystem, phi: &Functional, x: &RVector, n: usize) -> Vec<Complex64> {
    let mut v = x - &sys.e * x;
    (0..n)
        .map(|_| {
            v = &sys.alpha * &v;
            evaluate(phi, &v)
        })
        .collect()
}

fn fold(v: Complex64, absolute: bool) -> Complex64 {
    if absolute {
        Complex64::new(v.norm(), 0.0)
    } else {
        v
    }
}

fn run_check(
    sys: &FiniteSystem,
    probes: &[RVector],
    scheme: &WeightScheme,
    n: usize,
    tol: f64,
    absolute: bool,
) -> Result<CheckReport> {
    check_discrete(scheme, n)?;
    check_probes(sys, probes)?;
    let z = scheme.normalizer(n as f64)?;
    let ns = sys.states.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); ns * probes.len()];
    let mut vs: Vec<RVector> = probes.iter().map(|x| x - &sys.e * x).collect();
    for k in 1..=n {
        let w = scheme.discrete_weight(n, k);
        for (p, v) in vs.iter_mut().enumerate() {
            *v = &sys.alpha * &*v;
            for (s, phi) in sys.states.iter().enumerate() {
                acc[p * ns + s] += fold(evaluate(phi, v), absolute) * w;
            }
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for p in 0..probes.len() {
        for s in 0..ns {
            let m = acc[p * ns + s].norm() / z;
            if best.is_none_or(|(_, _, b)| m > b) {
                best = Some((s, p, m));
            }
        }
    }
    let max_defect = best.map_or(0.0, |b| b.2);
    let witness = match best {
        Some((s, p, mean)) => {
            let values = defect_values(sys, &sys.states[s], &probes[p], n);
            let mut liminf = mean;
            let half = (n / 2).max(1);
            for j in 0..=10 {
                let m = half + (n - half) * j / 10;
                let zm = scheme.normalizer(m as f64)?;
                let sum: Complex64 = values[..m]
                    .iter()
                    .enumerate()
                    .map(|(k, v)| fold(*v, absolute) * scheme.discrete_weight(m, k + 1))
                    .sum();
                liminf = liminf.min(sum.norm() / zm);
            }
            Some(Witness { state: s, probe: p, mean, running_liminf: liminf })
        }
        None => None,
    };
    Ok(CheckReport { pass: max_defect <= tol, max_defect, tol, n, witness })
}

/// `max_{φ, x} |(1/Σf) Σ f(n) φ(αⁿ(x − Ex))|` over the probe vectors.
pub fn unique_es_ergodicity_check(
    sys: &FiniteSystem,
    probes: &[RVector],
    scheme: &WeightScheme,
    n: usize,
    tol: f64,
) -> Result<CheckReport> {
    run_check(sys, probes, scheme, n, tol, false)
}

/// `max_{φ, x} (1/Σf) Σ f(n) |φ(αⁿ(x − Ex))|` over the probe vectors.
pub fn unique_es_weak_mixing_check(
    sys: &FiniteSystem,
    probes: &[RVector],
    scheme: &WeightScheme,
    n: usize,
    tol: f64,
) -> Result<CheckReport> {
    run_check(sys, probes, scheme, n, tol, true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    /// `(1/Σf) Σ f(n) αⁿ`.
    #[serde(serialize_with = "serialize_matrix")]
    pub limit: RMatrix,
    /// `max |Ê² − Ê|`.
    pub idempotence: f64,
    /// `max(|αÊ − Ê|, |Êα − Ê|)`.
    pub invariance: f64,
    /// `max |Ê_N − Ê_{2N}|`.
    pub cauchy: f64,
    pub tol: f64,
    pub pass: bool,
}

fn serialize_matrix<S: serde::Serializer>(m: &RMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in m.row_iter() {
        seq.serialize_element(&r.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

fn weighted_power_mean(alpha: &RMatrix, scheme: &WeightScheme, n: usize) -> Result<RMatrix> {
    check_discrete(scheme, n)?;
    let z = scheme.normalizer(n as f64)?;
    let d = alpha.nrows();
    let mut power = RMatrix::identity(d, d);
    let mut acc = RMatrix::zeros(d, d);
    for k in 1..=n {
        power = alpha * &power;
        acc += &power * (scheme.discrete_weight(n, k) / z);
    }
    Ok(acc)
}

/// Weighted mean of `αⁿ` at `N` and `2N`; fails with `NonConvergence` when the
/// two differ by more than `tol`.
pub fn thm215_limit_check(alpha: &RMatrix, scheme: &WeightScheme, n: usize, tol: f64) -> Result<LimitReport> {
    if !alpha.is_square() {
        return Err(Error::DimensionMismatch("alpha is not square".into()));
    }
    let limit = weighted_power_mean(alpha, scheme, n)?;
    let doubled = weighted_power_mean(alpha, scheme, 2 * n)?;
    let cauchy = (&limit - &doubled).amax();
    if cauchy > tol {
        return Err(Error::NonConvergence(cauchy));
    }
    let idempotence = (&limit * &limit - &limit).amax();
    let invariance = (alpha * &limit - &limit).amax().max((&limit * alpha - &limit).amax());
    let pass = idempotence <= tol && invariance <= tol;
    Ok(LimitReport { limit, idempotence, invariance, cauchy, tol, pass })
}

/// `(α_A ⊗ α_B, E_A ⊗ E_B, {φ ⊗ ψ})`.
pub fn tensor_product(a: &FiniteSystem, b: &FiniteSystem) -> Result<FiniteSystem> {
    let d = a.dimension() * b.dimension();
    if d > MAX_DIMENSION {
        return Err(Error::DimensionOverflow(d));
    }
    let states = a
        .states
        .iter()
        .flat_map(|f| b.states.iter().map(move |g| f.kronecker(g)))
        .collect();
    Ok(FiniteSystem {
        alpha: a.alpha.kronecker(&b.alpha),
        e: a.e.kronecker(&b.e),
        states,
    })
}

/// The four-state example with parameter `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section4Instance {
    pub p: f64,
    pub alpha: RMatrix,
    pub e: RVector,
    pub one: RVector,
    pub k: RVector,
    pub s: RVector,
    /// Projection onto `span{𝟙, k, s}` along `e`.
    pub e_l: RMatrix,
    /// Projection onto `span{𝟙, s}` along `span{e, k}`.
    pub e_fix: RMatrix,
}

pub fn build_section4(p: f64) -> Result<Section4Instance> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidSystem(format!("p = {p} outside [0, 1)")));
    }
    #[rustfmt::skip]
    let alpha = RMatrix::from_row_slice(4, 4, &[
        p, 1.0 - p, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    let e = RVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let one = RVector::from_element(4, 1.0);
    let k = RVector::from_vec(vec![(p - 1.0) / (p + 1.0), 1.0, -1.0, 0.0]);
    let s = RVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
    let basis = RMatrix::from_columns(&[e.clone(), one.clone(), k.clone(), s.clone()]);
    let inv = basis.clone().try_inverse().expect("e, 1, k, s are independent");
    let proj = |mask: [f64; 4]| &basis * RMatrix::from_diagonal(&RVector::from_row_slice(&mask)) * &inv;
    Ok(Section4Instance {
        p,
        e_l: proj([0.0, 1.0, 1.0, 1.0]),
        e_fix: proj([0.0, 1.0, 0.0, 1.0]),
        alpha,
        e,
        one,
        k,
        s,
    })
}

/// `samples` evenly spaced members of `{(0, x, x, y) : x, y ≥ 0}` with
/// `x + y = 1`, or with `2x + y = 1` when `unital` is set.
pub fn section4_states(samples: usize, unital: bool) -> Vec<Functional> {
    let top = if unital { 0.5 } else { 1.0 };
    (0..samples)
        .map(|i| {
            let x = if samples == 1 { 0.0 } else { top * i as f64 / (samples - 1) as f64 };
            let y = if unital { 1.0 - 2.0 * x } else { 1.0 - x };
            real_functional(&[0.0, x, x, y])
        })
        .collect()
}

impl Section4Instance {
    /// Coordinates `(λ, μ, ν, τ)` of `x = λe + μ𝟙 + νk + τs`.
    pub fn coordinates(&self, x: &RVector) -> RVector {
        let basis = RMatrix::from_columns(&[self.e.clone(), self.one.clone(), self.k.clone(), self.s.clone()]);
        basis.try_inverse().expect("independent") * x
    }

    /// `αⁿx = λpⁿe + μ𝟙 + τs + (−1)ⁿνk`.
    pub fn evolve_closed(&self, x: &RVector, n: u64) -> RVector {
        let c = self.coordinates(x);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        &self.e * (c[0] * self.p.powi(n as i32)) + &self.one * c[1] + &self.k * (c[2] * sign) + &self.s * c[3]
    }

    /// Eigenvalues of `α`, sorted by real part.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.alpha.complex_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    pub fn system(&self, e: RMatrix, states: Vec<Functional>) -> Result<FiniteSystem> {
        FiniteSystem::new(self.alpha.clone(), e, states, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::WeightFamily;

    fn uniform() -> WeightScheme {
        WeightScheme::discrete(WeightFamily::Uniform).unwrap()
    }

    #[test]
    fn section4_eigenvectors() {
        let inst = build_section4(0.5).unwrap();
        assert!((&inst.alpha * &inst.k + &inst.k).amax() < 1e-12);
        assert!((inst.k[0] + 1.0 / 3.0).abs() < 1e-15);
        assert!((&inst.alpha * &inst.one - &inst.one).amax() < 1e-12);
        assert!((&inst.alpha * &inst.e - &inst.e * 0.5).amax() < 1e-12);
        assert!((&inst.alpha * &inst.s - &inst.s).amax() < 1e-12);
        assert!(build_section4(1.0).is_err());
        assert!(build_section4(-0.1).is_err());
    }

    #[test]
    fn projections() {
        let inst = build_section4(0.3).unwrap();
        for e in [&inst.e_l, &inst.e_fix] {
            assert!((e * e - e).amax() < 1e-12);
        }
        assert!((&inst.alpha * &inst.e_fix - &inst.e_fix).amax() < 1e-12);
        assert!((&inst.e_l * &inst.k - &inst.k).amax() < 1e-12);
        assert!((&inst.e_l * &inst.e).amax() < 1e-12);
    }

    #[test]
    fn evolve_matches_closed_form() {
        let inst = build_section4(0.5).unwrap();
        let sys = inst.system(inst.e_l.clone(), section4_states(5, false)).unwrap();
        let x = RVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        for n in [0, 1, 2, 7, 10, 33] {
            let a = sys.evolve(&x, n).unwrap();
            assert!((a - inst.evolve_closed(&x, n)).amax() < 1e-12);
        }
        let e10 = sys.evolve(&inst.e, 10).unwrap();
        assert!((e10 - &inst.e * 2f64.powi(-10)).amax() < 1e-15);
    }

    #[test]
    fn section4_checks() {
        let inst = build_section4(0.5).unwrap();
        let basis = canonical_basis(4);
        let fam = section4_states(20, false);
        let sys = inst.system(inst.e_l.clone(), fam.clone()).unwrap();
        let r = unique_es_weak_mixing_check(&sys, &basis, &uniform(), 200, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        let r = unique_es_ergodicity_check(&sys, &basis, &uniform(), 200, 1e-12).unwrap();
        assert!(r.pass);
        let fixed = inst.system(inst.e_fix.clone(), vec![real_functional(&[0.0, 1.0, 0.0, 0.0])]).unwrap();
        let r = unique_es_weak_mixing_check(&fixed, std::slice::from_ref(&inst.k), &uniform(), 500, 1e-3).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        assert!((w.mean - 1.0).abs() < 1e-12 && w.running_liminf > 0.99);
        let all = inst.system(inst.e_fix.clone(), canonical_basis(4).iter().map(|b| b.map(|v| Complex64::new(v, 0.0))).collect()).unwrap();
        let r = unique_es_ergodicity_check(&all, &basis, &uniform(), 10_000, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn identity_projection_is_trivial() {
        let inst = build_section4(0.5).unwrap();
        let sys = inst.system(RMatrix::identity(4, 4), section4_states(3, true)).unwrap();
        let r = unique_es_weak_mixing_check(&sys, &canonical_basis(4), &uniform(), 50, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_defect, 0.0);
    }

    #[test]
    fn limit_matrices() {
        let id = RMatrix::identity(3, 3);
        let r = thm215_limit_check(&id, &uniform(), 10, 1e-12).unwrap();
        assert!((r.limit - id).amax() < 1e-15);
        let swap = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = thm215_limit_check(&swap, &uniform(), 1000, 1e-12).unwrap();
        assert!((r.limit - RMatrix::from_element(2, 2, 0.5)).amax() < 1e-12);
        assert!(matches!(thm215_limit_check(&swap, &uniform(), 1001, 1e-6), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn tensor_with_identity() {
        let inst = build_section4(0.5).unwrap();
        let a = inst.system(inst.e_l.clone(), section4_states(2, false)).unwrap();
        let id = FiniteSystem::new(RMatrix::identity(1, 1), RMatrix::identity(1, 1), vec![real_functional(&[1.0])], true).unwrap();
        let t = tensor_product(&id, &a).unwrap();
        assert_eq!(t, a);
    }

    #[test]
    fn hermitian_decomposition() {
        let f = Functional::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)]);
        let (h1, h2) = hermitian_parts(&f);
        assert!((&h1 + &h2 * Complex64::new(0.0, 1.0) - &f).camax() < 1e-15);
        assert!(h1.iter().chain(h2.iter()).all(|c| c.im == 0.0));
    }

    #[test]
    fn system_validation() {
        let bad = RMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        assert!(FiniteSystem::new(bad, RMatrix::identity(2, 2), vec![], true).is_err());
        let neg = RMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.0, 1.0]);
        assert!(FiniteSystem::new(neg.clone(), RMatrix::identity(2, 2), vec![], true).is_err());
        assert!(FiniteSystem::new(neg, RMatrix::identity(2, 2), vec![], false).is_ok());
        let not_proj = RMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(FiniteSystem::new(RMatrix::identity(2, 2), not_proj, vec![], true).is_err());
        assert!(is_unital(&real_functional(&[0.0, 0.25, 0.25, 0.5])));
        assert!(!is_unital(&real_functional(&[0.0, 0.5, 0.5, 0.5])));
    }
}
