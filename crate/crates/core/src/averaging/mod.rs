//! Weighted means over `ℕ` and `ℝ`: weight families, Følner defects and the
//! weighted mean ergodic theorem for finite-dimensional flows.

mod flow;
mod folner;
mod weights;

use num_complex::Complex64;

pub use flow::{
    fixed_space_projection, scalar_means, substituted_means, transformed_average_check, weighted_mean_flow,
    CMatrix, CVector, MatrixFlow, Substitution, ILL_CONDITIONED, ZERO_EIGENVALUE,
};
pub use folner::{folner_defect, folner_defect_parts, indicator_defect, FolnerDefect};
pub use weights::{Domain, WeightFamily, WeightScheme, MAX_STEP};

use crate::error::{Error, Result};

/// `Σ f_N(k) s_k / Σ f_N(k)` over `k = 1..=N`; `seq[k - 1]` holds `s_k`.
pub fn weighted_mean_scalar(seq: &[Complex64], scheme: &WeightScheme, n: usize) -> Result<Complex64> {
    if scheme.domain() != Domain::Discrete {
        return Err(Error::InvalidScheme("scalar sequences need a discrete scheme".into()));
    }
    if seq.len() < n {
        return Err(Error::LengthMismatch(format!("sequence of length {} for window {n}", seq.len())));
    }
    let z = scheme.normalizer(n as f64)?;
    let s: Complex64 = seq[..n]
        .iter()
        .enumerate()
        .map(|(i, v)| v * scheme.discrete_weight(n, i + 1))
        .sum();
    Ok(s / z)
}

/// Weighted mean of `seq(k)` for `k = 1..=N`, computed lazily.
pub fn weighted_mean_with<F: FnMut(usize) -> Complex64>(scheme: &WeightScheme, n: usize, mut seq: F) -> Result<Complex64> {
    if scheme.domain() != Domain::Discrete {
        return Err(Error::InvalidScheme("scalar sequences need a discrete scheme".into()));
    }
    let z = scheme.normalizer(n as f64)?;
    let mut s = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let w = scheme.discrete_weight(n, k);
        if w != 0.0 {
            s += seq(k) * w;
        }
    }
    Ok(s / z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_alternating() {
        let u = WeightScheme::discrete(WeightFamily::Uniform).unwrap();
        let alt: Vec<Complex64> = (1..=100).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        assert_eq!(weighted_mean_scalar(&alt, &u, 100).unwrap(), Complex64::new(0.0, 0.0));
        let c = vec![Complex64::new(2.0, -1.0); 40];
        for family in [WeightFamily::Power { s: 2.0 }, WeightFamily::Log, WeightFamily::Voronoi { s: -0.5 }] {
            let scheme = WeightScheme::discrete(family).unwrap();
            assert!((weighted_mean_scalar(&c, &scheme, 40).unwrap() - c[0]).norm() < 1e-14);
        }
        assert!(weighted_mean_scalar(&c, &u, 41).is_err());
    }

    #[test]
    fn lazy_matches_slice() {
        let scheme = WeightScheme::discrete(WeightFamily::Voronoi { s: 1.5 }).unwrap();
        let seq: Vec<Complex64> = (1..=30).map(|k| Complex64::cis(k as f64 * 0.7)).collect();
        let a = weighted_mean_scalar(&seq, &scheme, 30).unwrap();
        let b = weighted_mean_with(&scheme, 30, |k| seq[k - 1]).unwrap();
        assert!((a - b).norm() < 1e-15);
    }
}
