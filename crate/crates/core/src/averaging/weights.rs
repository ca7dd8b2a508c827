use std::fmt;

use crate::error::{Error, Result};

/// Largest Simpson step on the continuous line.
pub const MAX_STEP: f64 = 0.01;
/// Width of the geometrically graded region next to a singular endpoint.
const GRADED_WIDTH: f64 = 1.0;
/// Innermost distance resolved by graded panels; the rest is integrated in closed form.
const GRADED_START: f64 = 1e-14;
const GRADED_RATIO: f64 = 1.5;
const GRADED_SUBINTERVALS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `ℕ` with counting measure, window `{1, …, N}`.
    Discrete,
    /// `ℝ` with Lebesgue measure, window `[0, N]` (`[1, N]` for `Log`).
    Continuous,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    Uniform,
    /// `t^s`.
    Power { s: f64 },
    /// `1/t`.
    Log,
    /// `(N − t)^s`, discretely `(N − n + 1)^s`.
    Voronoi { s: f64 },
    /// Explicit discrete weights `f(1), f(2), …`.
    Custom { weights: Vec<f64> },
}

/// A family of weight functions `f_N` indexed by the window parameter `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightScheme {
    domain: Domain,
    family: WeightFamily,
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > -1.0 && s <= 4.0) {
        return Err(Error::InvalidScheme(format!("exponent {s} outside (-1, 4]")));
    }
    Ok(())
}

impl WeightScheme {
    pub fn new(domain: Domain, family: WeightFamily) -> Result<Self> {
        match &family {
            WeightFamily::Power { s } | WeightFamily::Voronoi { s } => check_exponent(*s)?,
            WeightFamily::Custom { weights } => {
                if domain == Domain::Continuous {
                    return Err(Error::InvalidScheme("custom weights are discrete only".into()));
                }
                if weights.is_empty() {
                    return Err(Error::InvalidScheme("empty custom weights".into()));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                    return Err(Error::InvalidScheme(format!("custom weight {w} is not a nonnegative number")));
                }
            }
            WeightFamily::Uniform | WeightFamily::Log => {}
        }
        Ok(Self { domain, family })
    }

    pub fn discrete(family: WeightFamily) -> Result<Self> {
        Self::new(Domain::Discrete, family)
    }

    pub fn continuous(family: WeightFamily) -> Result<Self> {
        Self::new(Domain::Continuous, family)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// Left end of the continuous window.
    pub fn window_start(&self) -> f64 {
        match self.family {
            WeightFamily::Log => 1.0,
            _ => 0.0,
        }
    }

    /// Checks that `n` is a usable window index and returns it as a count
    /// for discrete schemes.
    pub fn check_index(&self, n: f64) -> Result<()> {
        if !n.is_finite() || n <= self.window_start() {
            return Err(Error::InvalidScheme(format!("window index {n} is too small")));
        }
        if self.domain == Domain::Discrete {
            if n.fract() != 0.0 {
                return Err(Error::InvalidScheme(format!("discrete window index {n} is not an integer")));
            }
            if let WeightFamily::Custom { weights } = &self.family {
                if (weights.len() as f64) < n {
                    return Err(Error::InvalidScheme(format!(
                        "custom weights cover {} points, window needs {n}",
                        weights.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Discrete weight `f_N(k)` for `1 ≤ k ≤ N`.
    pub fn discrete_weight(&self, n: usize, k: usize) -> f64 {
        let kf = k as f64;
        match &self.family {
            WeightFamily::Uniform => 1.0,
            WeightFamily::Power { s } => kf.powf(*s),
            WeightFamily::Log => 1.0 / kf,
            WeightFamily::Voronoi { s } => ((n - k + 1) as f64).powf(*s),
            WeightFamily::Custom { weights } => weights[k - 1],
        }
    }

    /// Continuous weight `f_N(t)`, zero outside the window.
    pub fn continuous_weight(&self, n: f64, t: f64) -> f64 {
        if t < self.window_start() || t > n {
            return 0.0;
        }
        match &self.family {
            WeightFamily::Uniform => 1.0,
            WeightFamily::Power { s } => t.powf(*s),
            WeightFamily::Log => 1.0 / t,
            WeightFamily::Voronoi { s } => (n - t).powf(*s),
            WeightFamily::Custom { .. } => unreachable!("rejected by the constructor"),
        }
    }

    /// `f_N` at a point of the window, continuous or discrete.
    pub fn weight(&self, n: f64, t: f64) -> f64 {
        match self.domain {
            Domain::Continuous => self.continuous_weight(n, t),
            Domain::Discrete => {
                if t < 1.0 || t > n || t.fract() != 0.0 {
                    0.0
                } else {
                    self.discrete_weight(n as usize, t as usize)
                }
            }
        }
    }

    /// Visits quadrature nodes `(t, w)` with `Σ w g(t) ≈ ∫ f_N g` over the
    /// window. Discrete schemes visit `(k, f_N(k))` exactly.
    pub fn for_each_node(&self, n: f64, visit: &mut dyn FnMut(f64, f64)) -> Result<()> {
        self.check_index(n)?;
        match self.domain {
            Domain::Discrete => {
                let nn = n as usize;
                for k in 1..=nn {
                    visit(k as f64, self.discrete_weight(nn, k));
                }
            }
            Domain::Continuous => self.interval_nodes(n, self.window_start(), n, visit),
        }
        Ok(())
    }

    /// Quadrature nodes for `∫_a^b f_N g` with `[a, b]` inside the window.
    pub(crate) fn interval_nodes(&self, n: f64, a: f64, b: f64, visit: &mut dyn FnMut(f64, f64)) {
        if b <= a {
            return;
        }
        let width = GRADED_WIDTH.min((b - a) / 2.0);
        match self.family {
            WeightFamily::Power { s } if s < 0.0 && a == 0.0 => {
                graded(s, width, &mut |d, w| visit(d, w));
                simpson(a + width, b, &|t| self.continuous_weight(n, t), visit);
            }
            WeightFamily::Voronoi { s } if s < 0.0 && b == n => {
                simpson(a, b - width, &|t| self.continuous_weight(n, t), visit);
                graded(s, width, &mut |d, w| visit(n - d, w));
            }
            _ => simpson(a, b, &|t| self.continuous_weight(n, t), visit),
        }
    }

    /// `Σ f_N` or `∫ f_N` over the window.
    pub fn normalizer(&self, n: f64) -> Result<f64> {
        let mut z = 0.0;
        self.for_each_node(n, &mut |_, w| z += w)?;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::ZeroNormalizer);
        }
        Ok(z)
    }

    pub fn name(&self) -> String {
        let family = match &self.family {
            WeightFamily::Uniform => "uniform".to_string(),
            WeightFamily::Power { s } => format!("power({s})"),
            WeightFamily::Log => "log".to_string(),
            WeightFamily::Voronoi { s } => format!("voronoi({s})"),
            WeightFamily::Custom { weights } => format!("custom({})", weights.len()),
        };
        match self.domain {
            Domain::Discrete => family,
            Domain::Continuous => format!("{family}/R"),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Composite Simpson on `[a, b]` with step at most `MAX_STEP`.
pub(crate) fn simpson(a: f64, b: f64, f: &dyn Fn(f64) -> f64, visit: &mut dyn FnMut(f64, f64)) {
    if b <= a {
        return;
    }
    let mut m = ((b - a) / MAX_STEP).ceil() as usize;
    m = m.max(2);
    if m % 2 == 1 {
        m += 1;
    }
    simpson_fixed(a, b, m, f, visit);
}

pub(crate) fn simpson_fixed(a: f64, b: f64, m: usize, f: &dyn Fn(f64) -> f64, visit: &mut dyn FnMut(f64, f64)) {
    let h = (b - a) / m as f64;
    for i in 0..=m {
        let t = if i == m { b } else { a + i as f64 * h };
        let c = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        visit(t, c * h / 3.0 * f(t));
    }
}

// Nodes for ∫_0^width d^s g(d) dd, s < 0, reported by distance d from the
// singular endpoint.
fn graded(s: f64, width: f64, visit: &mut dyn FnMut(f64, f64)) {
    let d0 = GRADED_START.min(width / 2.0);
    visit(0.0, d0.powf(s + 1.0) / (s + 1.0));
    let mut lo = d0;
    while lo < width {
        let hi = (lo * GRADED_RATIO).min(width);
        let m = GRADED_SUBINTERVALS.max(2 * ((hi - lo) / (2.0 * MAX_STEP)).ceil() as usize);
        simpson_fixed(lo, hi, m, &|d| d.powf(s), visit);
        lo = hi;
    }
}
