use super::weights::{Domain, WeightFamily, WeightScheme};
use crate::error::{Error, Result};

/// The two normalized defects of a weighted window under the shift `h ≥ 0`:
/// the mass of `Λ ∖ (Λ + h)` and the variation `∫_{Λ ∩ (Λ + h)} |f(t) − f(t − h)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FolnerDefect {
    pub boundary: f64,
    pub variation: f64,
}

impl FolnerDefect {
    pub fn value(&self) -> f64 {
        self.boundary.max(self.variation)
    }
}

/// Følner defect of `scheme` at window `n` for the shift `h`.
pub fn folner_defect(scheme: &WeightScheme, h: f64, n: f64) -> Result<f64> {
    Ok(folner_defect_parts(scheme, h, n)?.value())
}

pub fn folner_defect_parts(scheme: &WeightScheme, h: f64, n: f64) -> Result<FolnerDefect> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidScheme(format!("shift {h} must be nonnegative")));
    }
    let z = scheme.normalizer(n)?;
    match scheme.domain() {
        Domain::Discrete => {
            if h.fract() != 0.0 {
                return Err(Error::InvalidScheme(format!("discrete shift {h} is not an integer")));
            }
            let nn = n as usize;
            let hh = (h as usize).min(nn);
            let f = |k: usize| scheme.discrete_weight(nn, k);
            let boundary: f64 = (1..=hh).map(f).sum();
            let variation: f64 = (hh + 1..=nn).map(|k| (f(k) - f(k - hh)).abs()).sum();
            Ok(FolnerDefect { boundary: boundary / z, variation: variation / z })
        }
        Domain::Continuous => {
            let a = scheme.window_start();
            let cut = (a + h).min(n);
            let boundary = integrate(scheme, n, a, cut);
            // Every continuous family is monotone, so the variation is the
            // difference of the two shifted masses.
            let variation = (integrate(scheme, n, cut, n) - integrate(scheme, n, a, n - (cut - a))).abs();
            Ok(FolnerDefect { boundary: boundary / z, variation: variation / z })
        }
    }
}

fn integrate(scheme: &WeightScheme, n: f64, a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    scheme.interval_nodes(n, a, b, &mut |_, w| acc += w);
    acc
}

/// `ρ(Λ ∖ (Λ + h)) / ρ(Λ)` for the plain window, computed from the sets.
pub fn indicator_defect(domain: Domain, h: f64, n: f64) -> Result<f64> {
    let scheme = WeightScheme::new(domain, WeightFamily::Uniform)?;
    scheme.check_index(n)?;
    match domain {
        Domain::Discrete => {
            let nn = n as i64;
            let hh = h as i64;
            let outside = (1..=nn).filter(|k| !(1 + hh..=nn + hh).contains(k)).count();
            Ok(outside as f64 / nn as f64)
        }
        Domain::Continuous => {
            let overlap = (n - h.max(0.0)).max(0.0);
            Ok((n - overlap) / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_one_over_n() {
        for domain in [Domain::Discrete, Domain::Continuous] {
            let u = WeightScheme::new(domain, WeightFamily::Uniform).unwrap();
            for n in [10.0, 100.0, 1000.0] {
                let d = folner_defect(&u, 1.0, n).unwrap();
                assert!((d - 1.0 / n).abs() < 1e-12, "{domain:?} {n}: {d}");
                let ind = indicator_defect(domain, 1.0, n).unwrap();
                assert!((d - ind).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_shift_has_no_defect() {
        let p = WeightScheme::continuous(WeightFamily::Power { s: 2.0 }).unwrap();
        assert!(folner_defect(&p, 0.0, 30.0).unwrap().abs() < 1e-12);
        let v = WeightScheme::discrete(WeightFamily::Voronoi { s: 1.0 }).unwrap();
        assert_eq!(folner_defect(&v, 0.0, 30.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_shifts() {
        let u = WeightScheme::discrete(WeightFamily::Uniform).unwrap();
        assert!(folner_defect(&u, 0.5, 10.0).is_err());
        assert!(folner_defect(&u, -1.0, 10.0).is_err());
    }
}
