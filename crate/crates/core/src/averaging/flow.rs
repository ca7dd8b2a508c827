use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::weights::{Domain, WeightFamily, WeightScheme, MAX_STEP};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Threshold below which an eigenvalue or singular value counts as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-10;
/// Values in `[ZERO_EIGENVALUE, ILL_CONDITIONED)` are rejected as ambiguous.
pub const ILL_CONDITIONED: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-12;
const CONTRACTION_TOL: f64 = 1e-12;

/// A unitary flow `t ↦ exp(itH₀)` or a contraction semigroup `n ↦ Uⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixFlow {
    Continuous { generator: CMatrix },
    Discrete { step: CMatrix },
}

impl MatrixFlow {
    pub fn continuous(generator: CMatrix) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::DimensionMismatch("generator is not square".into()));
        }
        let scale = generator.norm().max(1.0);
        let residual = (&generator - generator.adjoint()).norm() / scale;
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian(residual));
        }
        Ok(MatrixFlow::Continuous { generator })
    }

    pub fn discrete(step: CMatrix) -> Result<Self> {
        if !step.is_square() {
            return Err(Error::DimensionMismatch("step matrix is not square".into()));
        }
        let norm = step.clone().singular_values().max();
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::NotContraction(norm));
        }
        Ok(MatrixFlow::Discrete { step })
    }

    /// Continuous flow with a real diagonal generator.
    pub fn diagonal(eigenvalues: &[f64]) -> Self {
        let d = CVector::from_iterator(eigenvalues.len(), eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)));
        MatrixFlow::Continuous { generator: CMatrix::from_diagonal(&d) }
    }

    pub fn dimension(&self) -> usize {
        match self {
            MatrixFlow::Continuous { generator } => generator.nrows(),
            MatrixFlow::Discrete { step } => step.nrows(),
        }
    }

    /// `U_t x` (continuous) or `Uⁿ x` (discrete, `t` a nonnegative integer).
    pub fn apply(&self, t: f64, x: &CVector) -> Result<CVector> {
        self.check_vector(x)?;
        match self {
            MatrixFlow::Continuous { generator } => {
                let (vals, vecs) = eigen(generator);
                Ok(spectral_apply(&vals, &vecs, x, |l| Complex64::cis(l * t)))
            }
            MatrixFlow::Discrete { step } => {
                if !(t >= 0.0 && t.fract() == 0.0) {
                    return Err(Error::InvalidScheme(format!("discrete time {t} is not a natural number")));
                }
                let mut v = x.clone();
                for _ in 0..t as u64 {
                    v = step * v;
                }
                Ok(v)
            }
        }
    }

    fn check_vector(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a flow of dimension {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

fn eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let e = h.clone().symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn spectral_apply(vals: &[f64], vecs: &CMatrix, x: &CVector, m: impl Fn(f64) -> Complex64) -> CVector {
    let mut y = vecs.adjoint() * x;
    for (yj, &l) in y.iter_mut().zip(vals) {
        *yj *= m(l);
    }
    vecs * y
}

fn check_zero(value: f64) -> Result<bool> {
    let a = value.abs();
    if a < ZERO_EIGENVALUE {
        Ok(true)
    } else if a < ILL_CONDITIONED {
        Err(Error::IllConditioned { value: a, lower: ZERO_EIGENVALUE, upper: ILL_CONDITIONED })
    } else {
        Ok(false)
    }
}

/// Orthogonal projection onto the fixed space of the flow.
pub fn fixed_space_projection(flow: &MatrixFlow) -> Result<CMatrix> {
    let d = flow.dimension();
    let mut p = CMatrix::zeros(d, d);
    match flow {
        MatrixFlow::Continuous { generator } => {
            let (vals, vecs) = eigen(generator);
            for (j, &l) in vals.iter().enumerate() {
                if check_zero(l)? {
                    let v = vecs.column(j);
                    p += v * v.adjoint();
                }
            }
        }
        MatrixFlow::Discrete { step } => {
            let m = step - CMatrix::identity(d, d);
            let svd = m.svd(false, true);
            let v_t = svd.v_t.expect("requested right singular vectors");
            for (j, &sigma) in svd.singular_values.iter().enumerate() {
                if check_zero(sigma)? {
                    let row = v_t.row(j);
                    p += row.adjoint() * row;
                }
            }
        }
    }
    Ok(p)
}

/// `(1/∫f_N) ∫ f_N(t) U_t x dt`, or its discrete analogue.
pub fn weighted_mean_flow(flow: &MatrixFlow, x: &CVector, scheme: &WeightScheme, n: f64) -> Result<CVector> {
    flow.check_vector(x)?;
    match flow {
        MatrixFlow::Continuous { generator } => {
            let (vals, vecs) = eigen(generator);
            let means = scalar_means(&vals, scheme, n)?;
            let mut y = vecs.adjoint() * x;
            for (yj, m) in y.iter_mut().zip(&means) {
                *yj *= m;
            }
            Ok(&vecs * y)
        }
        MatrixFlow::Discrete { step } => {
            if scheme.domain() != Domain::Discrete {
                return Err(Error::InvalidScheme("a discrete flow needs a discrete scheme".into()));
            }
            let z = scheme.normalizer(n)?;
            let nn = n as usize;
            let mut v = x.clone();
            let mut acc = CVector::zeros(x.len());
            for k in 1..=nn {
                v = step * v;
                acc.axpy(Complex64::new(scheme.discrete_weight(nn, k) / z, 0.0), &v, Complex64::new(1.0, 0.0));
            }
            Ok(acc)
        }
    }
}

/// `(1/∫f_N) ∫ f_N(t) e^{iλt} dt` for each `λ`, from one pass over the nodes.
pub fn scalar_means(eigenvalues: &[f64], scheme: &WeightScheme, n: f64) -> Result<Vec<Complex64>> {
    let mut z = 0.0;
    let mut acc = vec![Complex64::new(0.0, 0.0); eigenvalues.len()];
    scheme.for_each_node(n, &mut |t, w| {
        z += w;
        for (a, &l) in acc.iter_mut().zip(eigenvalues) {
            *a += Complex64::cis(l * t) * w;
        }
    })?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::ZeroNormalizer);
    }
    Ok(acc.into_iter().map(|a| a / z).collect())
}

/// Reparametrizations of the uniform mean that reproduce a weighted mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Substitution {
    /// `(1/N)∫₀ᴺ U_{t^{1/(s+1)}} x dt` against `Power(s)` on `[0, N^{1/(s+1)}]`.
    Power { s: f64 },
    /// `(1/N)∫₀ᴺ U_{e^t} x dt` against `Log` on `[1, e^N]`.
    Exp,
}

impl Substitution {
    fn phi(&self, u: f64) -> f64 {
        match *self {
            Substitution::Power { s } => u.powf(1.0 / (s + 1.0)),
            Substitution::Exp => u.exp(),
        }
    }

    fn dphi(&self, u: f64) -> f64 {
        match *self {
            Substitution::Power { s } => {
                let r = 1.0 / (s + 1.0);
                if u == 0.0 {
                    if r < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    r * u.powf(r - 1.0)
                }
            }
            Substitution::Exp => u.exp(),
        }
    }

    /// The weighted scheme and its window matching uniform window `n`.
    pub fn weighted_counterpart(&self, n: f64) -> Result<(WeightScheme, f64)> {
        match *self {
            Substitution::Power { s } => Ok((
                WeightScheme::continuous(WeightFamily::Power { s })?,
                n.powf(1.0 / (s + 1.0)),
            )),
            Substitution::Exp => Ok((WeightScheme::continuous(WeightFamily::Log)?, n.exp())),
        }
    }
}

const MIN_SUBSTITUTED_STEP: f64 = 1e-9;

/// `(1/N)∫₀ᴺ e^{iλφ(u)} du` for each `λ`, with the step shrunk where `φ` is steep.
pub fn substituted_means(eigenvalues: &[f64], sub: Substitution, n: f64) -> Result<Vec<Complex64>> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidScheme(format!("window index {n} is too small")));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); eigenvalues.len()];
    let mut add = |u: f64, w: f64| {
        let t = sub.phi(u);
        for (a, &l) in acc.iter_mut().zip(eigenvalues) {
            *a += Complex64::cis(l * t) * w;
        }
    };
    let mut u = 0.0;
    while u < n {
        let slope = |v: f64| sub.dphi(v).max(1.0);
        let trial = MAX_STEP / slope(u);
        let h = (MAX_STEP / slope(u).max(slope((u + trial).min(n))))
            .max(MIN_SUBSTITUTED_STEP)
            .min(n - u);
        add(u, h / 6.0);
        add(u + h / 2.0, 4.0 * h / 6.0);
        add(u + h, h / 6.0);
        u += h;
    }
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Both sides of a substitution identity: the weighted mean and the
/// substituted uniform mean at uniform window `n`.
pub fn transformed_average_check(
    flow: &MatrixFlow,
    x: &CVector,
    sub: Substitution,
    n: f64,
) -> Result<(CVector, CVector)> {
    let MatrixFlow::Continuous { generator } = flow else {
        return Err(Error::InvalidScheme("substitution identities need a continuous flow".into()));
    };
    flow.check_vector(x)?;
    let (scheme, window) = sub.weighted_counterpart(n)?;
    let weighted = weighted_mean_flow(flow, x, &scheme, window)?;
    let (vals, vecs) = eigen(generator);
    let means = substituted_means(&vals, sub, n)?;
    let mut y = vecs.adjoint() * x;
    for (yj, m) in y.iter_mut().zip(&means) {
        *yj *= m;
    }
    Ok((weighted, &vecs * y))
}
