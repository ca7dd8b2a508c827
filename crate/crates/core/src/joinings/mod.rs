//! Joinings of finite classical systems: the joining polytope, relative
//! disjointness certified by linear programming, and weighted averages of
//! transported couplings.

pub mod simplex;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::averaging::{Domain, WeightScheme};
use crate::error::{Error, Result};

pub use simplex::{LpSolution, FEASIBILITY_TOL};

pub type Coupling = DMatrix<f64>;

/// Coordinates whose min and max over the polytope differ by at most this
/// are considered pinned.
pub const SPREAD_TOL: f64 = 1e-9;
const MEASURE_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-9;
/// Largest `n_A·n_B` for the null-space cross-check.
pub const NULLSPACE_LIMIT: usize = 36;

/// A permutation of `{0, …, n−1}` with an invariant probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSystem {
    sigma: Vec<usize>,
    mu: Vec<f64>,
}

impl ClassicalSystem {
    pub fn new(sigma: Vec<usize>, mu: Vec<f64>) -> Result<Self> {
        let n = sigma.len();
        if n == 0 || mu.len() != n {
            return Err(Error::InvalidSystem(format!("permutation of {n} points with {} masses", mu.len())));
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::InvalidPermutation(format!("{sigma:?}")));
            }
            seen[s] = true;
        }
        if mu.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidSystem("negative or non-finite mass".into()));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(Error::InvalidSystem(format!("masses sum to {total}")));
        }
        if let Some(x) = (0..n).find(|&x| (mu[sigma[x]] - mu[x]).abs() > MEASURE_TOL) {
            return Err(Error::InvalidSystem(format!("measure is not invariant at point {x}")));
        }
        Ok(Self { sigma, mu })
    }

    /// The rotation `x ↦ x + 1 mod n` with uniform measure.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new((0..n).map(|x| (x + 1) % n).collect(), vec![1.0 / n as f64; n])
    }

    pub fn size(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `σⁿ(x)`.
    pub fn iterate(&self, x: usize, n: usize) -> usize {
        (0..n).fold(x, |y, _| self.sigma[y])
    }
}

/// A factor of `A × B` given by generating functions, with prescribed cell
/// masses `ψ` on the partition they generate.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpec {
    generators: Vec<DMatrix<f64>>,
    /// Cell label of each point, numbered in row-major order of first appearance.
    cells: DMatrix<usize>,
    masses: Vec<f64>,
}

impl FactorSpec {
    /// `masses[c]` is `ψ` of the indicator of cell `c`.
    pub fn new(a: &ClassicalSystem, b: &ClassicalSystem, generators: Vec<DMatrix<f64>>, masses: Vec<f64>) -> Result<Self> {
        let (na, nb) = (a.size(), b.size());
        if let Some(g) = generators.iter().find(|g| g.shape() != (na, nb)) {
            return Err(Error::InvalidFactor(format!("generator of shape {:?}, expected {:?}", g.shape(), (na, nb))));
        }
        let cells = Self::label(a, b, &generators);
        let count = cells.iter().max().map_or(0, |m| m + 1);
        // The joint map must permute the cells.
        let mut image: Vec<Option<usize>> = vec![None; count];
        for x in 0..na {
            for y in 0..nb {
                let c = cells[(x, y)];
                let d = cells[(a.sigma[x], b.sigma[y])];
                match image[c] {
                    None => image[c] = Some(d),
                    Some(e) if e == d => {}
                    Some(_) => return Err(Error::InvalidFactor("generated partition is not invariant".into())),
                }
            }
        }
        if masses.len() != count {
            return Err(Error::InvalidFactor(format!("{} masses for {count} cells", masses.len())));
        }
        Ok(Self { generators, cells, masses })
    }

    /// The factor generated by `generators` with `ψ` read off a reference coupling.
    pub fn from_reference(
        a: &ClassicalSystem,
        b: &ClassicalSystem,
        generators: Vec<DMatrix<f64>>,
        reference: &Coupling,
    ) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.shape() != (a.size(), b.size())) {
            return Err(Error::InvalidFactor(format!("generator of shape {:?}", g.shape())));
        }
        if reference.shape() != (a.size(), b.size()) {
            return Err(Error::InvalidCoupling(format!("shape {:?}", reference.shape())));
        }
        let cells = Self::label(a, b, &generators);
        let count = cells.iter().max().map_or(0, |m| m + 1);
        let mut masses = vec![0.0; count];
        for x in 0..a.size() {
            for y in 0..b.size() {
                masses[cells[(x, y)]] += reference[(x, y)];
            }
        }
        Self::new(a, b, generators, masses)
    }

    fn label(a: &ClassicalSystem, b: &ClassicalSystem, generators: &[DMatrix<f64>]) -> DMatrix<usize> {
        let mut labels: Vec<Vec<u64>> = Vec::new();
        DMatrix::from_fn(a.size(), b.size(), |x, y| {
            let key: Vec<u64> = generators.iter().map(|g| g[(x, y)].to_bits()).collect();
            match labels.iter().position(|l| *l == key) {
                Some(c) => c,
                None => {
                    labels.push(key);
                    labels.len() - 1
                }
            }
        })
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn cell_count(&self) -> usize {
        self.masses.len()
    }

    pub fn cell(&self, x: usize, y: usize) -> usize {
        self.cells[(x, y)]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// The equality system of `J_R(A, B)` over `π ∈ ℝ^{n_A n_B}`, `π ≥ 0`, with
/// `π(x, y)` at index `x·n_B + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct JoiningPolytope {
    na: usize,
    nb: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

pub fn joining_polytope(a: &ClassicalSystem, b: &ClassicalSystem, factor: Option<&FactorSpec>) -> Result<JoiningPolytope> {
    let (na, nb) = (a.size(), b.size());
    let dim = na * nb;
    let idx = |x: usize, y: usize| x * nb + y;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for x in 0..na {
        let mut r = vec![0.0; dim];
        for y in 0..nb {
            r[idx(x, y)] = 1.0;
        }
        rows.push(r);
        rhs.push(a.mu[x]);
    }
    for y in 0..nb {
        let mut r = vec![0.0; dim];
        for x in 0..na {
            r[idx(x, y)] = 1.0;
        }
        rows.push(r);
        rhs.push(b.mu[y]);
    }
    for x in 0..na {
        for y in 0..nb {
            let (i, j) = (idx(a.sigma[x], b.sigma[y]), idx(x, y));
            if i != j {
                let mut r = vec![0.0; dim];
                r[i] = 1.0;
                r[j] = -1.0;
                rows.push(r);
                rhs.push(0.0);
            }
        }
    }
    if let Some(f) = factor {
        if f.cells.shape() != (na, nb) {
            return Err(Error::InvalidFactor("factor built for other systems".into()));
        }
        for c in 0..f.cell_count() {
            let mut r = vec![0.0; dim];
            for x in 0..na {
                for y in 0..nb {
                    if f.cell(x, y) == c {
                        r[idx(x, y)] = 1.0;
                    }
                }
            }
            rows.push(r);
            rhs.push(f.masses[c]);
        }
    }
    let poly = JoiningPolytope { na, nb, rows, rhs };
    // Feasibility is part of the construction.
    simplex::solve(&poly.rows, &poly.rhs, &vec![0.0; dim])?;
    Ok(poly)
}

fn to_matrix(na: usize, nb: usize, x: &[f64]) -> Coupling {
    Coupling::from_row_slice(na, nb, x)
}

impl JoiningPolytope {
    pub fn shape(&self) -> (usize, usize) {
        (self.na, self.nb)
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Largest equality or sign violation of `pi`.
    pub fn residual(&self, pi: &Coupling) -> f64 {
        let x: Vec<f64> = pi.transpose().iter().copied().collect();
        let eq = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| (r.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        eq.max(neg)
    }

    /// Optimizes `c·π` over the polytope.
    pub fn minimize(&self, c: &[f64]) -> Result<(Coupling, f64)> {
        let sol = simplex::solve(&self.rows, &self.rhs, c)?;
        Ok((to_matrix(self.na, self.nb, &sol.x), sol.value))
    }

    /// Dimension of the null space of the equality system, when small enough.
    pub fn nullspace_dimension(&self) -> Option<usize> {
        let dim = self.na * self.nb;
        if dim > NULLSPACE_LIMIT {
            return None;
        }
        let m = DMatrix::from_fn(self.rows.len(), dim, |i, j| self.rows[i][j]);
        let rank = m.svd(false, false).singular_values.iter().filter(|&&s| s > 1e-10).count();
        Some(dim - rank)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointnessReport {
    pub disjoint: bool,
    /// Largest `max − min` of a coordinate over the polytope.
    pub max_spread: f64,
    #[serde(serialize_with = "serialize_opt_matrix")]
    pub unique_joining: Option<Coupling>,
    #[serde(serialize_with = "serialize_opt_pair")]
    pub witnesses: Option<(Coupling, Coupling)>,
    /// Null-space dimension of the equality system, for small instances.
    pub nullspace_dimension: Option<usize>,
}

pub fn matrix_rows(m: &Coupling) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn serialize_opt_matrix<S: serde::Serializer>(m: &Option<Coupling>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    m.as_ref().map(matrix_rows).serialize(s)
}

fn serialize_opt_pair<S: serde::Serializer>(
    m: &Option<(Coupling, Coupling)>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    m.as_ref().map(|(a, b)| [matrix_rows(a), matrix_rows(b)]).serialize(s)
}

/// Minimizes and maximizes every coordinate over the polytope.
pub fn is_relatively_disjoint(poly: &JoiningPolytope) -> Result<DisjointnessReport> {
    let dim = poly.na * poly.nb;
    let mut max_spread = 0.0;
    let mut widest: Option<(Coupling, Coupling)> = None;
    let mut first: Option<Coupling> = None;
    for j in 0..dim {
        let mut c = vec![0.0; dim];
        c[j] = 1.0;
        let (lo, lo_val) = poly.minimize(&c)?;
        c[j] = -1.0;
        let (hi, hi_val) = poly.minimize(&c)?;
        let spread = -hi_val - lo_val;
        if first.is_none() {
            first = Some(lo.clone());
        }
        if spread > max_spread {
            max_spread = spread;
            widest = Some((lo, hi));
        }
    }
    let disjoint = max_spread <= SPREAD_TOL;
    Ok(DisjointnessReport {
        disjoint,
        max_spread,
        unique_joining: if disjoint { first } else { None },
        witnesses: if disjoint { None } else { widest },
        nullspace_dimension: poly.nullspace_dimension(),
    })
}

/// `(σ_Aⁿ × σ_Bⁿ)_* κ`.
pub fn transport(a: &ClassicalSystem, b: &ClassicalSystem, kappa: &Coupling, n: usize) -> Coupling {
    let mut out = Coupling::zeros(a.size(), b.size());
    for x in 0..a.size() {
        let fx = a.iterate(x, n);
        for y in 0..b.size() {
            out[(fx, b.iterate(y, n))] += kappa[(x, y)];
        }
    }
    out
}

/// The couplings `κ_N` fed to the weighted average at window `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingNet {
    Constant(Coupling),
    /// `κ_N` is entry `(N − 1) mod len`.
    Cycled(Vec<Coupling>),
}

impl CouplingNet {
    pub fn at(&self, n: usize) -> &Coupling {
        match self {
            CouplingNet::Constant(k) => k,
            CouplingNet::Cycled(ks) => &ks[(n - 1) % ks.len()],
        }
    }

    fn members(&self) -> &[Coupling] {
        match self {
            CouplingNet::Constant(k) => std::slice::from_ref(k),
            CouplingNet::Cycled(ks) => ks,
        }
    }
}

pub fn check_coupling(a: &ClassicalSystem, b: &ClassicalSystem, kappa: &Coupling, factor: Option<&FactorSpec>) -> Result<()> {
    if kappa.shape() != (a.size(), b.size()) {
        return Err(Error::InvalidCoupling(format!("shape {:?}", kappa.shape())));
    }
    if kappa.iter().any(|&v| !(v >= -MARGINAL_TOL)) {
        return Err(Error::InvalidCoupling("negative mass".into()));
    }
    for (x, r) in kappa.row_iter().enumerate() {
        if (r.sum() - a.mu[x]).abs() > MARGINAL_TOL {
            return Err(Error::InvalidCoupling(format!("row {x} sums to {}, not {}", r.sum(), a.mu[x])));
        }
    }
    for (y, c) in kappa.column_iter().enumerate() {
        if (c.sum() - b.mu[y]).abs() > MARGINAL_TOL {
            return Err(Error::InvalidCoupling(format!("column {y} sums to {}, not {}", c.sum(), b.mu[y])));
        }
    }
    if let Some(f) = factor {
        let mut mass = vec![0.0; f.cell_count()];
        for x in 0..a.size() {
            for y in 0..b.size() {
                mass[f.cell(x, y)] += kappa[(x, y)];
            }
        }
        if let Some(c) = (0..mass.len()).find(|&c| (mass[c] - f.masses[c]).abs() > MARGINAL_TOL) {
            return Err(Error::InvalidCoupling(format!("cell {c} has mass {}, not {}", mass[c], f.masses[c])));
        }
    }
    Ok(())
}

/// `(1/Σf) Σ_{n=1}^{N} f_N(n) (σ_Aⁿ × σ_Bⁿ)_* κ_N`.
pub fn weighted_coupling_average(
    a: &ClassicalSystem,
    b: &ClassicalSystem,
    net: &CouplingNet,
    factor: Option<&FactorSpec>,
    scheme: &WeightScheme,
    n: usize,
) -> Result<Coupling> {
    if scheme.domain() != Domain::Discrete {
        return Err(Error::InvalidScheme("coupling averages run on discrete schemes".into()));
    }
    if net.members().is_empty() {
        return Err(Error::InvalidCoupling("empty coupling family".into()));
    }
    for k in net.members() {
        check_coupling(a, b, k, factor)?;
    }
    let z = scheme.normalizer(n as f64)?;
    let kappa = net.at(n);
    let mut cur = kappa.clone();
    let mut acc = Coupling::zeros(a.size(), b.size());
    for k in 1..=n {
        cur = transport(a, b, &cur, 1);
        acc += &cur * (scheme.discrete_weight(n, k) / z);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::WeightFamily;

    fn product(a: &ClassicalSystem, b: &ClassicalSystem) -> Coupling {
        Coupling::from_fn(a.size(), b.size(), |x, y| a.mu[x] * b.mu[y])
    }

    #[test]
    fn point_systems() {
        let one = ClassicalSystem::cycle(1).unwrap();
        let p = joining_polytope(&one, &one, None).unwrap();
        let r = is_relatively_disjoint(&p).unwrap();
        assert!(r.disjoint);
        assert_eq!(r.unique_joining.unwrap()[(0, 0)], 1.0);
        let a = ClassicalSystem::new(vec![1, 0, 2], vec![0.25, 0.25, 0.5]).unwrap();
        let r = is_relatively_disjoint(&joining_polytope(&a, &one, None).unwrap()).unwrap();
        assert!(r.disjoint);
        assert!((r.unique_joining.unwrap().column(0).transpose() - nalgebra::RowDVector::from_vec(vec![0.25, 0.25, 0.5])).amax() < 1e-12);
    }

    #[test]
    fn coprime_and_self_pairs() {
        let a = ClassicalSystem::cycle(2).unwrap();
        let b = ClassicalSystem::cycle(3).unwrap();
        let r = is_relatively_disjoint(&joining_polytope(&a, &b, None).unwrap()).unwrap();
        assert!(r.disjoint);
        assert_eq!(r.nullspace_dimension, Some(0));
        assert!((r.unique_joining.unwrap() - product(&a, &b)).amax() < 1e-12);

        let r = is_relatively_disjoint(&joining_polytope(&a, &a, None).unwrap()).unwrap();
        assert!(!r.disjoint);
        assert!((r.max_spread - 0.5).abs() < 1e-12);
        assert_eq!(r.nullspace_dimension, Some(1));
        let (w0, w1) = r.witnesses.unwrap();
        assert!((w0[(0, 0)] - w1[(0, 0)]).abs() > 0.49);
    }

    #[test]
    fn factor_pins_self_joining() {
        let a = ClassicalSystem::cycle(2).unwrap();
        let diag = DMatrix::from_fn(2, 2, |x, y| if x == y { 1.0 } else { 0.0 });
        let f = FactorSpec::new(&a, &a, vec![diag], vec![0.5, 0.5]).unwrap();
        let r = is_relatively_disjoint(&joining_polytope(&a, &a, Some(&f)).unwrap()).unwrap();
        assert!(r.disjoint);
        let j = r.unique_joining.unwrap();
        assert!((j[(0, 0)] - 0.25).abs() < 1e-12);
        let bad = FactorSpec::new(&a, &a, vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])], vec![0.5, 0.5]);
        assert!(matches!(bad, Err(Error::InvalidFactor(_))));
        let infeasible = FactorSpec::new(&a, &a, vec![DMatrix::from_fn(2, 2, |x, y| (x == y) as u8 as f64)], vec![0.9, 0.9]).unwrap();
        assert!(matches!(joining_polytope(&a, &a, Some(&infeasible)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn coupling_average_is_exact_on_a_period() {
        let a = ClassicalSystem::cycle(2).unwrap();
        let b = ClassicalSystem::cycle(3).unwrap();
        let kappa = Coupling::from_row_slice(2, 3, &[1.0 / 3.0, 1.0 / 6.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 3.0]);
        let u = WeightScheme::discrete(WeightFamily::Uniform).unwrap();
        let avg = weighted_coupling_average(&a, &b, &CouplingNet::Constant(kappa.clone()), None, &u, 6).unwrap();
        assert!((avg - product(&a, &b)).amax() < 1e-15);
        let bad = Coupling::from_row_slice(2, 3, &[0.5, 0.0, 0.0, 0.0, 0.25, 0.25]);
        assert!(weighted_coupling_average(&a, &b, &CouplingNet::Constant(bad), None, &u, 6).is_err());
    }

    #[test]
    fn transport_preserves_feasibility() {
        let a = ClassicalSystem::cycle(2).unwrap();
        let p = joining_polytope(&a, &a, None).unwrap();
        let (v, _) = p.minimize(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(p.residual(&v) < 1e-12);
        assert!(p.residual(&transport(&a, &a, &v, 1)) < 1e-12);
    }

    #[test]
    fn system_validation() {
        assert!(ClassicalSystem::new(vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(ClassicalSystem::new(vec![1, 0], vec![0.7, 0.3]).is_err());
        assert!(ClassicalSystem::new(vec![0, 1], vec![0.7, 0.3]).is_ok());
        assert!(ClassicalSystem::new(vec![0, 1], vec![0.7, 0.4]).is_err());
    }
}
