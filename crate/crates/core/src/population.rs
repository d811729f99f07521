//! Distributions of kernel values (`R`, with CDF `F`) and models for raw
//! observations (`P`).
//!
//! Every distribution exposes a right-continuous CDF, its left limit, the
//! leftmost generalized inverse, an optional density, its atoms and a sampler.
//! `cdf_centered` returns `F(x) − level` evaluated without cancellation where
//! the family allows it; the analysis layer relies on it when probing `V` very
//! close to `m`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};

use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::roots::{bracket, first_true};
use crate::numeric::{norm_cdf, norm_cdf_centered, norm_pdf, norm_quantile};
use crate::rng::open_unit;

/// Upper end of the admissible window parameter for the log-square CDF.
pub const SMIRNOV_EPS_MAX: f64 = 0.135_335_283_236_612_7; // e^{-2}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PopulationError {
    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },
    #[error("piecewise knots must have strictly increasing x and non-decreasing F in [0,1]: {0}")]
    NonMonotone(String),
    #[error("window epsilon {0} outside (0, e^-2)")]
    Epsilon(f64),
}

fn invalid(family: &str, reason: impl Into<String>) -> PopulationError {
    PopulationError::InvalidParams { family: family.to_string(), reason: reason.into() }
}

/// How the log-square CDF is continued outside `[−ε, ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmirnovClamp {
    /// Continue with the boundary slope until reaching 0 or 1.
    #[default]
    Linear,
    /// Put the remaining mass in atoms at `±ε`.
    Atoms,
}

/// Shape of one piecewise segment between knots `(x_l, F_l)` and `(x_r, F_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Linear,
    /// `F_l + (F_r − F_l)((x − x_l)/w)^p`
    Power(f64),
    /// `F_r − (F_r − F_l)((x_r − x)/w)^p`
    Rpower(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterpSpec {
    One(Interp),
    Each(Vec<Interp>),
}

/// JSON description of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interp: Option<InterpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<SmirnovClamp>,
}

impl DistSpec {
    pub fn builtin(family: &str, params: &[f64]) -> Self {
        DistSpec { family: family.into(), params: params.to_vec(), knots: None, interp: None, clamp: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smirnov {
    eps: f64,
    clamp: SmirnovClamp,
    /// Largest x in the window where the formula is still below 1/2 in
    /// absolute centered value.
    x_star: f64,
    slope: f64,
    reach: f64,
}

/// `sign(x)|x| ln²|x|`, the centered log-square CDF on its window.
pub fn log_square(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        let l = x.abs().ln();
        x * l * l
    }
}

impl Smirnov {
    pub fn new(eps: f64, clamp: SmirnovClamp) -> Result<Self, PopulationError> {
        if !(eps > 0.0 && eps < SMIRNOV_EPS_MAX) {
            return Err(PopulationError::Epsilon(eps));
        }
        let x_star = if log_square(eps) <= 0.5 {
            eps
        } else {
            first_true(0.0, eps, |x| log_square(x) >= 0.5)
        };
        let le = eps.ln();
        let slope = le * (le + 2.0);
        let reach = if x_star < eps || clamp == SmirnovClamp::Atoms {
            x_star
        } else {
            eps + (0.5 - log_square(eps)) / slope
        };
        Ok(Smirnov { eps, clamp, x_star, slope, reach })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn clamp(&self) -> SmirnovClamp {
        self.clamp
    }

    /// Centered formula on `[0, ε]`, capped where it reaches 1/2.
    fn window(&self, y: f64) -> f64 {
        if y <= self.x_star {
            log_square(y)
        } else {
            0.5
        }
    }

    /// `F(y) − 1/2` for `y ≥ 0` under the linear continuation.
    fn linear_right(&self, y: f64) -> f64 {
        if y <= self.eps {
            self.window(y)
        } else if self.x_star == self.eps {
            (log_square(self.eps) + self.slope * (y - self.eps)).min(0.5)
        } else {
            0.5
        }
    }

    /// `F(x) − 1/2`, right-continuous.
    fn centered(&self, x: f64) -> f64 {
        let y = x.abs();
        match self.clamp {
            SmirnovClamp::Linear => self.linear_right(y).copysign(x),
            SmirnovClamp::Atoms => {
                if x >= self.eps {
                    0.5
                } else if x < -self.eps {
                    -0.5
                } else {
                    self.window(y).copysign(x)
                }
            }
        }
    }

    /// `F(x−) − 1/2`.
    fn centered_left(&self, x: f64) -> f64 {
        match self.clamp {
            SmirnovClamp::Atoms if x == self.eps => self.window(self.eps),
            SmirnovClamp::Atoms if x == -self.eps => -0.5,
            _ => self.centered(x),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let y = x.abs();
        if y == 0.0 {
            f64::INFINITY
        } else if y <= self.x_star.min(self.eps) {
            let l = y.ln();
            l * (l + 2.0)
        } else if self.clamp == SmirnovClamp::Linear && self.x_star == self.eps && y <= self.reach {
            self.slope
        } else {
            0.0
        }
    }

    fn atom_mass(&self) -> f64 {
        match self.clamp {
            SmirnovClamp::Atoms => 0.5 - log_square(self.x_star.min(self.eps)),
            SmirnovClamp::Linear => 0.0,
        }
    }

    /// Guess for the quantile from Newton steps on the centered formula.
    fn quantile_guess(&self, u: f64) -> f64 {
        let y = (u - 0.5).abs();
        if y == 0.0 {
            return 0.0;
        }
        let lim = log_square(self.x_star.min(self.eps));
        let x = if y > lim {
            match self.clamp {
                SmirnovClamp::Atoms => self.eps,
                SmirnovClamp::Linear => self.eps + (y - lim) / self.slope,
            }
        } else {
            let mut x = (y / y.ln().powi(2)).min(self.x_star);
            for _ in 0..40 {
                let l = x.ln();
                let step = (x * l * l - y) / (l * (l + 2.0));
                let nx = (x - step).clamp(x * 0.1, self.x_star);
                if (nx - x).abs() <= 1e-16 * x {
                    x = nx;
                    break;
                }
                x = nx;
            }
            x
        };
        if u < 0.5 {
            -x
        } else {
            x
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    xs: Vec<f64>,
    fs: Vec<f64>,
    interp: Vec<Interp>,
}

impl Piecewise {
    pub fn new(knots: &[[f64; 2]], interp: &InterpSpec) -> Result<Self, PopulationError> {
        if knots.len() < 2 {
            return Err(PopulationError::NonMonotone("need at least two knots".into()));
        }
        let xs: Vec<f64> = knots.iter().map(|k| k[0]).collect();
        let fs: Vec<f64> = knots.iter().map(|k| k[1]).collect();
        for w in xs.windows(2) {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(PopulationError::NonMonotone(format!("x values {} then {}", w[0], w[1])));
            }
        }
        for w in fs.windows(2) {
            if w[1] < w[0] {
                return Err(PopulationError::NonMonotone(format!("F values {} then {}", w[0], w[1])));
            }
        }
        if fs.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(PopulationError::NonMonotone("F values must lie in [0,1]".into()));
        }
        let segs = xs.len() - 1;
        let interp = match interp {
            InterpSpec::One(i) => vec![*i; segs],
            InterpSpec::Each(v) if v.len() == segs => v.clone(),
            InterpSpec::Each(v) => {
                return Err(invalid("piecewise", format!("{} interpolation rules for {} segments", v.len(), segs)))
            }
        };
        for i in &interp {
            if let Interp::Power(p) | Interp::Rpower(p) = i {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(invalid("piecewise", format!("power exponent {p} must be positive")));
                }
            }
        }
        Ok(Piecewise { xs, fs, interp })
    }

    pub fn knots(&self) -> Vec<[f64; 2]> {
        self.xs.iter().zip(&self.fs).map(|(&x, &f)| [x, f]).collect()
    }

    pub fn interp(&self) -> &[Interp] {
        &self.interp
    }

    /// Index of the segment `[x_i, x_{i+1})` holding `x`, if any.
    fn segment(&self, x: f64) -> Option<usize> {
        let last = self.xs.len() - 1;
        if x < self.xs[0] || x >= self.xs[last] {
            return None;
        }
        Some(self.xs.partition_point(|&k| k <= x) - 1)
    }

    fn centered(&self, x: f64, level: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x < self.xs[0] {
            return -level;
        }
        if x >= self.xs[last] {
            return 1.0 - level;
        }
        let i = self.segment(x).expect("inside support");
        let (xl, xr, fl, fr) = (self.xs[i], self.xs[i + 1], self.fs[i], self.fs[i + 1]);
        if x == xl {
            return fl - level;
        }
        let w = xr - xl;
        let h = fr - fl;
        match self.interp[i] {
            Interp::Linear => (fl - level) + h * ((x - xl) / w),
            Interp::Power(p) => (fl - level) + h * ((x - xl) / w).powf(p),
            Interp::Rpower(p) => (fr - level) - h * ((xr - x) / w).powf(p),
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            0.0
        } else if x > self.xs[last] {
            1.0
        } else if x == self.xs[last] {
            self.fs[last]
        } else {
            self.centered(x, 0.0)
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else { return 0.0 };
        let (xl, xr, fl, fr) = (self.xs[i], self.xs[i + 1], self.fs[i], self.fs[i + 1]);
        let w = xr - xl;
        let h = fr - fl;
        match self.interp[i] {
            Interp::Linear => h / w,
            Interp::Power(p) => h * p / w * ((x - xl) / w).powf(p - 1.0),
            Interp::Rpower(p) => h * p / w * ((xr - x) / w).powf(p - 1.0),
        }
    }

    fn quantile_guess(&self, u: f64) -> f64 {
        let last = self.xs.len() - 1;
        if u <= self.fs[0] {
            return self.xs[0];
        }
        if u > self.fs[last] {
            return self.xs[last];
        }
        let j = self.fs.partition_point(|&f| f < u);
        let i = j - 1;
        let (xl, xr, fl, fr) = (self.xs[i], self.xs[j], self.fs[i], self.fs[j]);
        let w = xr - xl;
        let h = fr - fl;
        let x = match self.interp[i] {
            Interp::Linear => xl + w * ((u - fl) / h),
            Interp::Power(p) => xl + w * ((u - fl) / h).powf(1.0 / p),
            Interp::Rpower(p) => xr - w * ((fr - u) / h).powf(1.0 / p),
        };
        x.clamp(xl, xr)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        let last = self.xs.len() - 1;
        let mut a = Vec::new();
        if self.fs[0] > 0.0 {
            a.push((self.xs[0], self.fs[0]));
        }
        if self.fs[last] < 1.0 {
            a.push((self.xs[last], 1.0 - self.fs[last]));
        }
        a
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous distribution given by a user CDF (plug-in point).
#[derive(Clone)]
pub struct CustomDist {
    pub name: String,
    pub cdf: ScalarFn,
    pub pdf: Option<ScalarFn>,
    pub support: (f64, f64),
}

impl fmt::Debug for CustomDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDist").field("name", &self.name).field("support", &self.support).finish()
    }
}

/// Law of a real random variable.
#[derive(Debug, Clone)]
pub enum Distribution {
    Normal { mu: f64, sigma: f64 },
    Cauchy { loc: f64, scale: f64 },
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    Smirnov(Smirnov),
    Piecewise(Piecewise),
    Custom(CustomDist),
}

/// Builtin family by id.
pub fn builtin(name: &str, params: &[f64]) -> Result<Distribution, PopulationError> {
    Distribution::from_spec(&DistSpec::builtin(name, params))
}

/// Log-square CDF `1/2 + sign(x)|x|ln²|x|` on `[−ε, ε]`.
pub fn smirnov_cdf(eps: f64, clamp: SmirnovClamp) -> Result<Distribution, PopulationError> {
    Ok(Distribution::Smirnov(Smirnov::new(eps, clamp)?))
}

pub fn piecewise_cdf(knots: &[[f64; 2]], interp: InterpSpec) -> Result<Distribution, PopulationError> {
    Ok(Distribution::Piecewise(Piecewise::new(knots, &interp)?))
}

impl Distribution {
    pub fn from_spec(spec: &DistSpec) -> Result<Self, PopulationError> {
        let p = &spec.params;
        let fam = spec.family.as_str();
        let need = |k: usize| -> Result<(), PopulationError> {
            if p.len() != k {
                Err(invalid(fam, format!("expected {k} parameters, got {}", p.len())))
            } else if p.iter().any(|v| !v.is_finite()) {
                Err(invalid(fam, "parameters must be finite"))
            } else {
                Ok(())
            }
        };
        match fam {
            "normal" => {
                need(2)?;
                if p[1] <= 0.0 {
                    return Err(invalid(fam, "scale must be positive"));
                }
                Ok(Distribution::Normal { mu: p[0], sigma: p[1] })
            }
            "cauchy" => {
                need(2)?;
                if p[1] <= 0.0 {
                    return Err(invalid(fam, "scale must be positive"));
                }
                Ok(Distribution::Cauchy { loc: p[0], scale: p[1] })
            }
            "exponential" => {
                need(1)?;
                if p[0] <= 0.0 {
                    return Err(invalid(fam, "rate must be positive"));
                }
                Ok(Distribution::Exponential { rate: p[0] })
            }
            "uniform" => {
                need(2)?;
                if p[1] <= p[0] {
                    return Err(invalid(fam, "need a < b"));
                }
                Ok(Distribution::Uniform { a: p[0], b: p[1] })
            }
            "smirnov" => {
                need(1)?;
                smirnov_cdf(p[0], spec.clamp.unwrap_or_default())
            }
            "piecewise" => {
                let knots = spec.knots.as_ref().ok_or_else(|| invalid(fam, "missing `knots`"))?;
                let interp = spec.interp.clone().unwrap_or(InterpSpec::One(Interp::Linear));
                piecewise_cdf(knots, interp)
            }
            other => Err(PopulationError::UnknownFamily(other.to_string())),
        }
    }

    pub fn spec(&self) -> DistSpec {
        match self {
            Distribution::Normal { mu, sigma } => DistSpec::builtin("normal", &[*mu, *sigma]),
            Distribution::Cauchy { loc, scale } => DistSpec::builtin("cauchy", &[*loc, *scale]),
            Distribution::Exponential { rate } => DistSpec::builtin("exponential", &[*rate]),
            Distribution::Uniform { a, b } => DistSpec::builtin("uniform", &[*a, *b]),
            Distribution::Smirnov(s) => DistSpec {
                clamp: Some(s.clamp),
                ..DistSpec::builtin("smirnov", &[s.eps])
            },
            Distribution::Piecewise(pw) => DistSpec {
                family: "piecewise".into(),
                params: vec![],
                knots: Some(pw.knots()),
                interp: Some(InterpSpec::Each(pw.interp.clone())),
                clamp: None,
            },
            Distribution::Custom(c) => DistSpec::builtin(&format!("custom:{}", c.name), &[]),
        }
    }

    pub fn family(&self) -> &str {
        match self {
            Distribution::Normal { .. } => "normal",
            Distribution::Cauchy { .. } => "cauchy",
            Distribution::Exponential { .. } => "exponential",
            Distribution::Uniform { .. } => "uniform",
            Distribution::Smirnov(_) => "smirnov",
            Distribution::Piecewise(_) => "piecewise",
            Distribution::Custom(_) => "custom",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Distribution::Cauchy { loc, scale } => 0.5 + ((x - loc) / scale).atan() / std::f64::consts::PI,
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Distribution::Smirnov(s) => 0.5 + s.centered(x),
            Distribution::Piecewise(p) => p.centered(x, 0.0).clamp(0.0, 1.0),
            Distribution::Custom(c) => (c.cdf)(x).clamp(0.0, 1.0),
        }
    }

    /// `F(x−)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::Smirnov(s) => 0.5 + s.centered_left(x),
            Distribution::Piecewise(p) => p.cdf_left(x).clamp(0.0, 1.0),
            _ => self.cdf(x),
        }
    }

    /// `F(x) − level`, free of cancellation where the family allows.
    pub fn cdf_centered(&self, x: f64, level: f64) -> f64 {
        match self {
            Distribution::Normal { mu, sigma } if level == 0.5 => norm_cdf_centered((x - mu) / sigma),
            Distribution::Cauchy { loc, scale } if level == 0.5 => {
                ((x - loc) / scale).atan() / std::f64::consts::PI
            }
            Distribution::Smirnov(s) => s.centered(x) + (0.5 - level),
            Distribution::Piecewise(p) => p.centered(x, level).clamp(-level, 1.0 - level),
            _ => self.cdf(x) - level,
        }
    }

    /// `F(x−) − level`.
    pub fn cdf_left_centered(&self, x: f64, level: f64) -> f64 {
        match self {
            Distribution::Smirnov(s) => s.centered_left(x) + (0.5 - level),
            Distribution::Piecewise(p) => {
                let n = p.xs.len() - 1;
                if x <= p.xs[0] || x >= p.xs[n] {
                    p.cdf_left(x) - level
                } else {
                    p.centered(x, level)
                }
            }
            _ => self.cdf_centered(x, level),
        }
    }

    pub fn pdf(&self, x: f64) -> Option<f64> {
        Some(match self {
            Distribution::Normal { mu, sigma } => norm_pdf((x - mu) / sigma) / sigma,
            Distribution::Cauchy { loc, scale } => {
                let z = (x - loc) / scale;
                1.0 / (std::f64::consts::PI * scale * (1.0 + z * z))
            }
            Distribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Distribution::Uniform { a, b } => {
                if x >= *a && x < *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Distribution::Smirnov(s) => s.pdf(x),
            Distribution::Piecewise(p) => p.pdf(x),
            Distribution::Custom(c) => return c.pdf.as_ref().map(|f| f(x)),
        })
    }

    /// Point masses `(x, mass)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Distribution::Smirnov(s) if s.clamp == SmirnovClamp::Atoms => {
                let w = s.atom_mass();
                if w > 0.0 {
                    vec![(-s.eps, w), (s.eps, w)]
                } else {
                    vec![]
                }
            }
            Distribution::Piecewise(p) => p.atoms(),
            _ => vec![],
        }
    }

    /// Points where the density is non-smooth or singular.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Distribution::Normal { mu, .. } => vec![*mu],
            Distribution::Cauchy { loc, .. } => vec![*loc],
            Distribution::Exponential { .. } => vec![0.0],
            Distribution::Uniform { a, b } => vec![*a, *b],
            Distribution::Smirnov(s) => vec![-s.reach, -s.eps, -s.x_star, 0.0, s.x_star, s.eps, s.reach],
            Distribution::Piecewise(p) => p.xs.clone(),
            Distribution::Custom(c) => [c.support.0, c.support.1].into_iter().filter(|x| x.is_finite()).collect(),
        }
    }

    /// `(lower, upper)` bounds of the support; may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Normal { .. } | Distribution::Cauchy { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Exponential { .. } => (0.0, f64::INFINITY),
            Distribution::Uniform { a, b } => (*a, *b),
            Distribution::Smirnov(s) => (-s.reach, s.reach),
            Distribution::Piecewise(p) => (p.xs[0], *p.xs.last().unwrap()),
            Distribution::Custom(c) => c.support,
        }
    }

    /// Leftmost generalized inverse `inf{x : F(x) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 && hi.is_finite() {
            return first_true(lo, hi, |x| self.cdf(x) >= 1.0).min(hi);
        }
        let guess = match self {
            Distribution::Normal { mu, sigma } => mu + sigma * norm_quantile(u),
            Distribution::Cauchy { loc, scale } => loc + scale * (std::f64::consts::PI * (u - 0.5)).tan(),
            Distribution::Exponential { rate } => -(-u).ln_1p() / rate,
            Distribution::Uniform { a, b } => a + u * (b - a),
            Distribution::Smirnov(s) => s.quantile_guess(u),
            Distribution::Piecewise(p) => p.quantile_guess(u),
            Distribution::Custom(_) => {
                let (l, h) = (lo.max(-1e300), hi.min(1e300));
                if self.cdf(l) >= u {
                    return l;
                }
                return first_true(l, h, |x| self.cdf(x) >= u);
            }
        };
        if lo.is_finite() && self.cdf(lo) >= u {
            return lo;
        }
        self.refine_quantile(guess, u)
    }

    /// Polish an approximate quantile to the exact float-level inverse.
    fn refine_quantile(&self, guess: f64, u: f64) -> f64 {
        let scale = guess.abs().max(f64::MIN_POSITIVE) * 8.0 * f64::EPSILON;
        match bracket(guess, scale, |x| self.cdf(x) >= u) {
            Some((a, b)) => {
                let x = first_true(a, b, |x| self.cdf(x) >= u);
                let (lo, hi) = self.support();
                x.clamp(lo, hi)
            }
            None => guess,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            Distribution::Normal { mu, .. } => Some(*mu),
            Distribution::Cauchy { .. } => None,
            Distribution::Exponential { rate } => Some(1.0 / rate),
            Distribution::Uniform { a, b } => Some(0.5 * (a + b)),
            Distribution::Smirnov(_) => Some(0.0),
            _ => self.moment(|x| x),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match self {
            Distribution::Normal { sigma, .. } => Some(sigma * sigma),
            Distribution::Cauchy { .. } => None,
            Distribution::Exponential { rate } => Some(1.0 / (rate * rate)),
            Distribution::Uniform { a, b } => Some((b - a) * (b - a) / 12.0),
            _ => {
                let mu = self.mean()?;
                self.moment(|x| (x - mu) * (x - mu))
            }
        }
    }

    /// `∫ g dF` through the density plus atoms.
    pub fn moment<G: Fn(f64) -> f64>(&self, g: G) -> Option<f64> {
        let (lo, hi) = self.support();
        let mut total = 0.0;
        self.pdf(0.5 * (lo.max(-1.0) + hi.min(1.0)))?;
        let f = |x: f64| {
            let d = self.pdf(x).unwrap_or(0.0);
            if d == 0.0 {
                0.0
            } else {
                g(x) * d
            }
        };
        total += integrate(f, lo, hi, &self.breakpoints(), &QuadOptions::default()).ok()?;
        for (x, w) in self.atoms() {
            total += w * g(x);
        }
        Some(total)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Normal { mu, sigma } => rand_distr::Normal::new(*mu, *sigma).expect("validated").sample(rng),
            Distribution::Cauchy { loc, scale } => {
                rand_distr::Cauchy::new(*loc, *scale).expect("validated").sample(rng)
            }
            Distribution::Exponential { rate } => rand_distr::Exp::new(*rate).expect("validated").sample(rng),
            Distribution::Uniform { a, b } => rand_distr::Uniform::new(*a, *b).expect("validated").sample(rng),
            _ => self.quantile(open_unit(rng)),
        }
    }
}

/// Row-major observations of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Data {
    dim: usize,
    values: Vec<f64>,
}

impl Data {
    pub fn new(dim: usize, values: Vec<f64>) -> Self {
        assert!(dim > 0 && values.len().is_multiple_of(dim), "values must fill whole rows");
        Data { dim, values }
    }

    pub fn univariate(values: Vec<f64>) -> Self {
        Data { dim: 1, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PopulationError> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(1);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("data", "rows must have the same positive length"));
        }
        Ok(Data { dim, values: rows.iter().flatten().copied().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Model for raw observations.
#[derive(Debug, Clone)]
pub enum RawModel {
    /// Scalar i.i.d. draws.
    Iid(Distribution),
    /// Pairs `(Y, Z)` with `Z = intercept + slope·Y + noise`.
    LinearRegression { regressor: Distribution, noise: Distribution, intercept: f64, slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RawSpec {
    Iid {
        distribution: DistSpec,
    },
    LinearRegression {
        regressor: DistSpec,
        noise: DistSpec,
        #[serde(default)]
        intercept: f64,
        slope: f64,
    },
}

impl RawModel {
    pub fn from_spec(spec: &RawSpec) -> Result<Self, PopulationError> {
        Ok(match spec {
            RawSpec::Iid { distribution } => RawModel::Iid(Distribution::from_spec(distribution)?),
            RawSpec::LinearRegression { regressor, noise, intercept, slope } => RawModel::LinearRegression {
                regressor: Distribution::from_spec(regressor)?,
                noise: Distribution::from_spec(noise)?,
                intercept: *intercept,
                slope: *slope,
            },
        })
    }

    pub fn spec(&self) -> RawSpec {
        match self {
            RawModel::Iid(d) => RawSpec::Iid { distribution: d.spec() },
            RawModel::LinearRegression { regressor, noise, intercept, slope } => RawSpec::LinearRegression {
                regressor: regressor.spec(),
                noise: noise.spec(),
                intercept: *intercept,
                slope: *slope,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RawModel::Iid(_) => 1,
            RawModel::LinearRegression { .. } => 2,
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            RawModel::Iid(d) => out.push(d.sample(rng)),
            RawModel::LinearRegression { regressor, noise, intercept, slope } => {
                let y = regressor.sample(rng);
                let e = noise.sample(rng);
                out.push(y);
                out.push(intercept + slope * y + e);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Data {
        let mut v = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            self.sample_one(rng, &mut v);
        }
        Data { dim: self.dim(), values: v }
    }
}
