//! Population-side analysis.
//!
//! For a kernel law `R` and a convex loss with derivative `ψ`, the population
//! criterion is `V(t) = ∫ ψ(t − x) R(dx)`. Its leftmost root `m` is the target
//! of the minimizer, `ζ` the variance factor (`σ² = l²ζ`), and the local shape
//! of `V` around `m` fixes the attraction class, the normalizing sequence
//! `a_n` and the limit law `H = Φ_σ∘δ`.

mod classify;
mod law;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use classify::{classify, AttractionClass, ClassTag, Classification, Diagnostics, PowerFit};
pub use law::{functional_equation_residual, Branch, DeltaSpec, LimitLaw};

use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::roots::{bracket, first_true};
use crate::numeric::KahanSum;
use crate::population::{DistSpec, Distribution, PopulationError, RawModel, RawSpec};
use crate::problem::{jump_decompose, ConvexLoss, Kernel, KernelSpec, LossSpec, ProblemError};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("integrability failure for {what}: {detail}")]
    Integrability { what: String, detail: String },
    #[error("V has no sign change: {0}")]
    NoSignChange(String),
    #[error("degenerate problem: zeta = {0:e} is not positive")]
    Degenerate(f64),
    #[error("cannot invert V at {target:e}: {detail}")]
    Bracket { target: f64, detail: String },
    #[error("raw observation model required: {0}")]
    MissingRaw(String),
    #[error("one-sided difference quotients do not settle: {0}")]
    Oscillating(String),
    #[error("no normalizing sequence for class {0:?}")]
    NoNormalization(ClassTag),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Kernel law plus, for degree `l ≥ 2`, the raw model and kernel.
#[derive(Debug, Clone)]
pub struct PopulationProblem {
    pub r: Distribution,
    pub l: usize,
    pub raw: Option<(RawModel, Kernel)>,
}

impl PopulationProblem {
    /// Degree one: the kernel is the identity and `R` is the data law.
    pub fn univariate(r: Distribution) -> Self {
        PopulationProblem { r, l: 1, raw: None }
    }

    pub fn with_raw(r: Distribution, raw: RawModel, kernel: Kernel) -> Self {
        PopulationProblem { r, l: kernel.degree(), raw: Some((raw, kernel)) }
    }

    /// Derive `R` from the raw model where the law of the kernel is known in
    /// closed form: the identity kernel, and arithmetic means of normal or
    /// Cauchy draws.
    pub fn from_raw(raw: RawModel, kernel: Kernel) -> Result<Self, AnalysisError> {
        let l = kernel.degree();
        let r = match (&raw, kernel.is_mean()) {
            (RawModel::Iid(p), true) if l == 1 => p.clone(),
            (RawModel::Iid(Distribution::Normal { mu, sigma }), true) => {
                Distribution::Normal { mu: *mu, sigma: sigma / (l as f64).sqrt() }
            }
            (RawModel::Iid(c @ Distribution::Cauchy { .. }), true) => c.clone(),
            _ => {
                return Err(AnalysisError::Unsupported(format!(
                    "law of kernel `{}` under this raw model has no closed form; supply the kernel distribution",
                    kernel.id()
                )))
            }
        };
        Ok(PopulationProblem::with_raw(r, raw, kernel))
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        match &self.raw {
            None if self.l >= 2 => Err(AnalysisError::MissingRaw(format!("degree {} needs a raw model", self.l))),
            Some((raw, k)) if k.degree() != self.l || k.dim().is_some_and(|d| d != raw.dim()) => {
                Err(AnalysisError::Unsupported(format!(
                    "kernel `{}` (degree {}, dim {:?}) does not match degree {} / raw dimension {}",
                    k.id(),
                    k.degree(),
                    k.dim(),
                    self.l,
                    raw.dim()
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Tunables of the analysis. Every report carries a copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    /// First probe offset of the ratio grid.
    pub t0: f64,
    /// Grid ratio, `t_j = t0·ratio^j`.
    pub ratio: f64,
    pub levels: usize,
    pub escalated_levels: usize,
    /// Ratio traces below this are "tending to zero".
    pub zero_ratio: f64,
    /// Relative spread allowed around a constant ratio limit.
    pub const_rel: f64,
    /// Number of trailing grid levels inspected by the ratio rules.
    pub tail: usize,
    pub fit_window: usize,
    pub r2_min: f64,
    pub alpha_min: f64,
    /// Largest residual of the local-slope regression.
    pub local_residual_max: f64,
    /// Relative tolerance between the two side indices in class 3.
    pub alpha_match: f64,
    /// First step of the difference quotients.
    pub h0: f64,
    pub derivative_levels: usize,
    pub inf_threshold: f64,
    /// Relative tolerance for equal one-sided derivatives.
    pub smooth_rel: f64,
    /// `|V|` below this counts as zero when `V` comes from quadrature.
    pub quad_noise: f64,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub zeta_budget: u64,
    pub zeta_seed: u64,
    pub zeta_floor: f64,
    /// Minimal rise of `|V|` beyond a plateau edge.
    pub edge_min: f64,
    /// Sample sizes at which `a_n` is reported.
    pub report_ns: Vec<f64>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            t0: 1e-2,
            ratio: 0.5,
            levels: 20,
            escalated_levels: 40,
            zero_ratio: 1e-3,
            const_rel: 0.02,
            tail: 5,
            fit_window: 8,
            r2_min: 0.999,
            alpha_min: 0.05,
            local_residual_max: 0.02,
            alpha_match: 0.05,
            h0: 1e-2,
            derivative_levels: 8,
            inf_threshold: 1e8,
            smooth_rel: 0.02,
            quad_noise: 1e-9,
            quad_abs_tol: 1e-10,
            quad_rel_tol: 1e-12,
            zeta_budget: 1_000_000,
            zeta_seed: 0x5eed_2e7a,
            zeta_floor: 1e-12,
            edge_min: 1e-10,
            report_ns: vec![1e2, 1e3, 1e4],
        }
    }
}

impl AnalysisSettings {
    fn quad(&self) -> QuadOptions {
        QuadOptions { abs_tol: self.quad_abs_tol, rel_tol: self.quad_rel_tol, ..QuadOptions::default() }
    }
}

/// `V` is evaluated without quadrature for this pair.
pub(crate) fn has_closed_form(prob: &PopulationProblem, loss: &ConvexLoss) -> bool {
    loss.step().is_some()
        || loss.is_square()
        || (loss.is_sigmoid_normal() && matches!(prob.r, Distribution::Normal { .. }))
}

fn probe_point(r: &Distribution) -> f64 {
    match r.support() {
        (a, b) if a.is_finite() && b.is_finite() => 0.5 * (a + b),
        (a, _) if a.is_finite() => a + 1.0,
        (_, b) if b.is_finite() => b - 1.0,
        _ => 0.0,
    }
}

/// `∫ g dR` by density quadrature (or over quantiles when `R` has no
/// density) plus atoms.
fn expect_against<G: Fn(f64) -> f64>(
    r: &Distribution,
    g: G,
    extra_breaks: &[f64],
    opt: &QuadOptions,
    what: &str,
) -> Result<f64, AnalysisError> {
    let (lo, hi) = r.support();
    let fail = |e: crate::numeric::quad::QuadError| AnalysisError::Integrability { what: what.into(), detail: e.to_string() };
    let mut total = if r.pdf(probe_point(r)).is_some() {
        let mut br = r.breakpoints();
        br.extend_from_slice(extra_breaks);
        // An integrable pole of the density (log-square CDF at 0) is a single
        // point; the adaptive error estimate still catches real divergence.
        let f = |x: f64| match r.pdf(x) {
            Some(d) if d > 0.0 && d.is_finite() => g(x) * d,
            _ => 0.0,
        };
        integrate(f, lo, hi, &br, opt).map_err(fail)?
    } else {
        let br: Vec<f64> = extra_breaks.iter().map(|&b| r.cdf(b)).collect();
        integrate(|u| g(r.quantile(u)), 0.0, 1.0, &br, opt).map_err(fail)?
    };
    for (x, w) in r.atoms() {
        total += w * g(x);
    }
    Ok(total)
}

fn v_eval(prob: &PopulationProblem, loss: &ConvexLoss, t: f64, left: bool) -> Result<f64, AnalysisError> {
    let r = &prob.r;
    if let Some((alpha, scale)) = loss.quantile_level() {
        let c = if left { r.cdf_left_centered(t, alpha) } else { r.cdf_centered(t, alpha) };
        return Ok(scale * c);
    }
    if let Some(s) = loss.step() {
        let mut acc = KahanSum::default();
        acc.add(s.level0);
        for (b, d) in s.breaks.iter().zip(&s.jumps) {
            let f = if left { r.cdf_left(t - b) } else { r.cdf(t - b) };
            acc.add(d * f);
        }
        return Ok(acc.value());
    }
    if loss.is_square() {
        let mu = r.mean().ok_or_else(|| AnalysisError::Integrability {
            what: "square loss".into(),
            detail: format!("{} law has no mean", r.family()),
        })?;
        return Ok(2.0 * (t - mu));
    }
    if let (true, Distribution::Normal { mu, sigma }) = (loss.is_sigmoid_normal(), r) {
        return Ok(crate::numeric::norm_cdf_centered((t - mu) / sigma.hypot(1.0)));
    }
    let psi = |x: f64| if left { loss.psi_minus(t - x) } else { loss.psi_plus(t - x) };
    expect_against(r, psi, &[t], &QuadOptions::default(), &format!("V({t}) under loss `{}`", loss.id()))
}

/// `V(t) = ∫ ψ⁺(t − x) R(dx)`, right-continuous and non-decreasing.
pub fn population_v(prob: &PopulationProblem, loss: &ConvexLoss, t: f64) -> Result<f64, AnalysisError> {
    v_eval(prob, loss, t, false)
}

/// `V(t−)`.
pub fn population_v_left(prob: &PopulationProblem, loss: &ConvexLoss, t: f64) -> Result<f64, AnalysisError> {
    v_eval(prob, loss, t, true)
}

/// Run `f` on a predicate that may fail; the first error wins.
fn with_v<T>(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    f: impl FnOnce(&mut dyn FnMut(f64) -> f64) -> T,
) -> Result<T, AnalysisError> {
    let mut err = None;
    let mut v = |t: f64| match population_v(prob, loss, t) {
        Ok(x) => x,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let out = f(&mut v);
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `inf{t : V(t) ≥ y}`.
pub fn v_inverse(prob: &PopulationProblem, loss: &ConvexLoss, center: f64, y: f64) -> Result<f64, AnalysisError> {
    let scale = 1e-3 * center.abs().max(1.0);
    let out = with_v(prob, loss, |v| {
        bracket(center, scale, |t| v(t) >= y).map(|(a, b)| first_true(a, b, |t| v(t) >= y))
    })?;
    out.ok_or_else(|| AnalysisError::Bracket { target: y, detail: "V never crosses the target".into() })
}

fn uniqueness(prob: &PopulationProblem, loss: &ConvexLoss, m: f64, s: &AnalysisSettings) -> Result<bool, AnalysisError> {
    let tol = if has_closed_form(prob, loss) { 0.0 } else { s.quad_noise };
    for j in 0..s.levels {
        let eta = s.t0 * s.ratio.powi(j as i32);
        if population_v(prob, loss, m - eta)? >= -tol || population_v(prob, loss, m + eta)? <= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Leftmost `m` with `V(m−) ≤ 0 ≤ V(m)`, and whether `V` changes sign
/// strictly at `m` on the probe grid.
pub fn find_m(prob: &PopulationProblem, loss: &ConvexLoss) -> Result<(f64, bool), AnalysisError> {
    find_m_with(prob, loss, &AnalysisSettings::default())
}

pub fn find_m_with(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    s: &AnalysisSettings,
) -> Result<(f64, bool), AnalysisError> {
    let c = prob.r.quantile(0.5);
    let c = if c.is_finite() { c } else { 0.0 };
    let m = match v_inverse(prob, loss, c, 0.0) {
        Ok(m) => m,
        Err(AnalysisError::Bracket { .. }) => {
            return Err(AnalysisError::NoSignChange(format!(
                "loss `{}` against the {} law",
                loss.id(),
                prob.r.family()
            )))
        }
        Err(e) => return Err(e),
    };
    // V underflows to zero on subnormal arguments; prefer 0 over such a root.
    let m = if m < 0.0 && m > -f64::MIN_POSITIVE && population_v(prob, loss, 0.0)? == 0.0 { 0.0 } else { m };
    Ok((m, uniqueness(prob, loss, m, s)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaMethod {
    ClosedForm,
    Quadrature,
    NestedMonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub method: ZetaMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ZetaEstimate {
    fn exact(value: f64, method: ZetaMethod) -> Self {
        ZetaEstimate { value, std_error: None, method, budget: None, seed: None }
    }
}

/// `ζ`: the second moment of `x ↦ E ψ⁺(m − k(x, X₂, …, X_l))` under the raw
/// law (for `l = 1`, of `ψ⁺(m − X)` under `R`).
pub fn zeta(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    s: &AnalysisSettings,
) -> Result<ZetaEstimate, AnalysisError> {
    prob.validate()?;
    let z = if prob.l == 1 { zeta_univariate(prob, loss, m, s)? } else { zeta_raw(prob, loss, m, s)? };
    if !(z.value > s.zeta_floor) {
        return Err(AnalysisError::Degenerate(z.value));
    }
    Ok(z)
}

/// `Σ_k L_k²·P(region k)` for a step `ψ`, where `cdf(b)` is the probability
/// that `ψ⁺` sits at or above break `b`.
/// `E f(ψ⁺)` for a step `ψ⁺` given `above(b) = P(argument ≥ b)`.
fn step_moment(s: &crate::problem::StepFunction, f: impl Fn(f64) -> f64, mut above: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = KahanSum::default();
    let mut level = s.level0;
    let mut p_prev = 1.0;
    for (b, d) in s.breaks.iter().zip(&s.jumps) {
        let p = above(*b);
        acc.add(f(level) * (p_prev - p));
        p_prev = p;
        level += d;
    }
    acc.add(f(level) * p_prev);
    acc.value()
}

fn step_second_moment(s: &crate::problem::StepFunction, above: impl FnMut(f64) -> f64) -> f64 {
    step_moment(s, |v| v * v, above)
}

fn zeta_univariate(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    s: &AnalysisSettings,
) -> Result<ZetaEstimate, AnalysisError> {
    let r = &prob.r;
    if let Some(st) = loss.step() {
        // ψ⁺(m − x) ≥ level at break b  ⇔  x ≤ m − b
        return Ok(ZetaEstimate::exact(step_second_moment(st, |b| r.cdf(m - b)), ZetaMethod::ClosedForm));
    }
    if loss.is_square() {
        let (mu, var) = r.mean().zip(r.variance()).ok_or_else(|| AnalysisError::Integrability {
            what: "zeta".into(),
            detail: format!("{} law has no variance", r.family()),
        })?;
        return Ok(ZetaEstimate::exact(4.0 * (var + (mu - m) * (mu - m)), ZetaMethod::ClosedForm));
    }
    let v = expect_against(r, |x| loss.psi_plus(m - x).powi(2), &[m], &s.quad(), "zeta")?;
    Ok(ZetaEstimate::exact(v, ZetaMethod::Quadrature))
}

fn zeta_raw(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    s: &AnalysisSettings,
) -> Result<ZetaEstimate, AnalysisError> {
    let (raw, kernel) = prob.raw.as_ref().expect("validated");
    let l = prob.l as f64;
    if let (RawModel::Iid(p), true) = (raw, kernel.is_mean()) {
        if loss.is_square() {
            if let (Some(mu), Some(var)) = (p.mean(), p.variance()) {
                // E[ψ(m − k) | X₁ = x] = 2(m − (x + (l−1)μ)/l)
                let v = 4.0 * ((m - mu) * (m - mu) + var / (l * l));
                return Ok(ZetaEstimate::exact(v, ZetaMethod::ClosedForm));
            }
        }
        // Law of the other l−1 summands, when known.
        let rest = match p {
            _ if prob.l == 2 => Some(p.clone()),
            Distribution::Normal { mu, sigma } => {
                Some(Distribution::Normal { mu: (l - 1.0) * mu, sigma: sigma * (l - 1.0).sqrt() })
            }
            _ => None,
        };
        if let (Some(st), Some(rest)) = (loss.step(), rest) {
            // ψ⁺(m − (x+S)/l) ≥ level at b  ⇔  S ≤ l(m − b) − x
            let g = |x: f64| step_moment(st, |v| v, |b| rest.cdf(l * (m - b) - x)).powi(2);
            let br: Vec<f64> = st.breaks.iter().map(|b| l * (m - b)).collect();
            let v = expect_against(p, g, &br, &s.quad(), "zeta")?;
            return Ok(ZetaEstimate::exact(v, ZetaMethod::Quadrature));
        }
        // g(x) = E ψ⁺(m − (x+S)/l) as an integral over S, then g² against P.
    }
    zeta_nested(raw, kernel, loss, m, s.zeta_budget, s.zeta_seed)
}

/// Nested Monte Carlo with `⌈√B⌉` outer and inner draws. The squared inner
/// mean is bias-corrected by its own variance over the inner size.
pub fn zeta_nested(
    raw: &RawModel,
    kernel: &Kernel,
    loss: &ConvexLoss,
    m: f64,
    budget: u64,
    seed: u64,
) -> Result<ZetaEstimate, AnalysisError> {
    let side = ((budget as f64).sqrt().ceil() as usize).max(2);
    let (l, d) = (kernel.degree(), raw.dim());
    let terms: Vec<Result<f64, ProblemError>> = (0..side)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut buf = Vec::with_capacity(l * d);
            raw.sample_one(&mut rng, &mut buf);
            let (mut s1, mut s2) = (KahanSum::default(), KahanSum::default());
            for _ in 0..side {
                buf.truncate(d);
                for _ in 1..l {
                    raw.sample_one(&mut rng, &mut buf);
                }
                let args: Vec<&[f64]> = buf.chunks(d).collect();
                let v = loss.psi_plus(m - kernel.eval(&args)?);
                s1.add(v);
                s2.add(v * v);
            }
            let k = side as f64;
            let mean = s1.value() / k;
            let var = ((s2.value() - k * mean * mean) / (k - 1.0)).max(0.0);
            Ok(mean * mean - var / k)
        })
        .collect();
    let mut acc = KahanSum::default();
    let mut acc2 = KahanSum::default();
    for t in terms {
        let t = t?;
        acc.add(t);
        acc2.add(t * t);
    }
    let k = side as f64;
    let value = acc.value() / k;
    let var = ((acc2.value() - k * value * value) / (k - 1.0)).max(0.0);
    Ok(ZetaEstimate {
        value,
        std_error: Some((var / k).sqrt()),
        method: ZetaMethod::NestedMonteCarlo,
        budget: Some((side * side) as u64),
        seed: Some(seed),
    })
}

/// `(∫ ψ⁺(m − x)² dR, ∫ ψ⁻(m − x)² dR)` by quadrature.
pub fn second_moments(prob: &PopulationProblem, loss: &ConvexLoss, m: f64) -> Result<(f64, f64), AnalysisError> {
    let br: Vec<f64> = match loss.step() {
        Some(st) => st.breaks.iter().map(|b| m - b).collect(),
        None => vec![m],
    };
    let opt = QuadOptions::default();
    let p = expect_against(&prob.r, |x| loss.psi_plus(m - x).powi(2), &br, &opt, "second moment")?;
    let q = expect_against(&prob.r, |x| loss.psi_minus(m - x).powi(2), &br, &opt, "second moment")?;
    Ok((p, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    #[serde(with = "crate::numeric::ext_real")]
    pub dminus: f64,
    #[serde(with = "crate::numeric::ext_real")]
    pub dplus: f64,
    pub h: Vec<f64>,
    pub quotients_minus: Vec<f64>,
    pub quotients_plus: Vec<f64>,
}

/// Limit of a quotient sequence taken along a halving step.
fn quotient_limit(q: &[f64], s: &AnalysisSettings) -> Result<f64, String> {
    let last = *q.last().expect("non-empty");
    if !last.is_finite() || last > s.inf_threshold {
        return Ok(f64::INFINITY);
    }
    let scale = q.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let tail = &q[q.len().saturating_sub(s.tail)..];
    let d: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    if d.iter().all(|x| x.abs() <= 1e-7 * scale) {
        return Ok(last);
    }
    if d.iter().all(|&x| x > 0.0) && d.windows(2).all(|w| w[1] >= 0.75 * w[0]) {
        return Ok(f64::INFINITY);
    }
    let rho: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
    let r = *rho.last().expect("tail of at least three");
    if rho.iter().all(|x| (0.0..0.97).contains(x) && (x - r).abs() <= 0.05) {
        let dl = *d.last().unwrap();
        let lim = last + dl * r / (1.0 - r);
        return Ok(if lim.abs() <= 1e-9 * scale { 0.0 } else { lim.max(0.0) });
    }
    Err(format!("quotients {q:?}"))
}

/// One-sided derivatives of `V` at `m` from difference quotients over
/// `h_j = h0·2^{−j}`, extrapolated when the increments shrink geometrically.
pub fn one_sided_derivatives(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    s: &AnalysisSettings,
) -> Result<DerivativeEstimate, AnalysisError> {
    let v0 = population_v(prob, loss, m)?;
    let v0l = population_v_left(prob, loss, m)?;
    let mut h = Vec::new();
    let (mut qm, mut qp) = (Vec::new(), Vec::new());
    for j in 0..s.derivative_levels {
        let hj = s.h0 * 0.5f64.powi(j as i32);
        h.push(hj);
        qp.push((population_v(prob, loss, m + hj)? - v0) / hj);
        qm.push((v0l - population_v(prob, loss, m - hj)?) / hj);
    }
    let dplus = quotient_limit(&qp, s).map_err(|e| AnalysisError::Oscillating(format!("right side: {e}")))?;
    let dminus = quotient_limit(&qm, s).map_err(|e| AnalysisError::Oscillating(format!("left side: {e}")))?;
    Ok(DerivativeEstimate { dminus, dplus, h, quotients_minus: qm, quotients_plus: qp })
}

/// `δ_n(x) = √n·V(m + a_n x)`.
pub fn delta_n(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    a_n: f64,
    n: f64,
    x: f64,
) -> Result<f64, AnalysisError> {
    Ok(n.sqrt() * population_v(prob, loss, m + a_n * x)?)
}

/// `δ_n(x)` split into the part carried by the jump of `ψ` at zero,
/// `κ√n(F(m + a_n x) − F(m))`, and the remainder from the continuous part.
pub fn delta_n_split(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    a_n: f64,
    n: f64,
    x: f64,
) -> Result<(f64, f64), AnalysisError> {
    let jd = jump_decompose(loss);
    let total = delta_n(prob, loss, m, a_n, n, x)?;
    let jump = jd.kappa * n.sqrt() * (prob.r.cdf(m + a_n * x) - prob.r.cdf(m));
    Ok((jump, total - jump))
}

/// Human-readable rule behind `a_n` for a class.
pub fn a_n_rule(tag: ClassTag) -> Option<&'static str> {
    match tag {
        ClassTag::Class1 | ClassTag::Class3 => Some("V^-1(1/sqrt(n)) - m"),
        ClassTag::Class2 => Some("m - V^-1(-1/sqrt(n))"),
        ClassTag::Class4 => Some("(V^-1(1/sqrt(n)) - V^-1(-1/sqrt(n))) / (c1 + c2)"),
        ClassTag::SmoothNormal | ClassTag::SubDistribution => Some("n^(-1/2)"),
        ClassTag::Degenerate | ClassTag::Unclassified => None,
    }
}

/// `a_n` for the class, with `V⁻¹` the leftmost generalized inverse.
pub fn normalizing_sequence(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    class: &AttractionClass,
    n: f64,
) -> Result<f64, AnalysisError> {
    let y = 1.0 / n.sqrt();
    match class.tag {
        ClassTag::SmoothNormal | ClassTag::SubDistribution => Ok(y),
        ClassTag::Class1 | ClassTag::Class3 => Ok(v_inverse(prob, loss, m, y)? - m),
        ClassTag::Class2 => Ok(m - v_inverse(prob, loss, m, -y)?),
        ClassTag::Class4 => {
            let w = class.c1.unwrap_or(0.0) + class.c2.unwrap_or(0.0);
            Ok((v_inverse(prob, loss, m, y)? - v_inverse(prob, loss, m, -y)?) / w)
        }
        tag => Err(AnalysisError::NoNormalization(tag)),
    }
}

/// `H = Φ_σ∘δ` for a classified problem.
pub fn limit_law(class: &AttractionClass, sigma: f64) -> Option<LimitLaw> {
    let pw = |coef: Option<f64>| Branch::Power { coef: coef.unwrap_or(1.0), alpha: class.alpha.unwrap_or(1.0) };
    let delta = match class.tag {
        ClassTag::Class1 => DeltaSpec::Power { neg: Branch::Infinite, pos: pw(class.c) },
        ClassTag::Class2 => DeltaSpec::Power { neg: pw(class.c), pos: Branch::Infinite },
        ClassTag::Class3 => DeltaSpec::Power { neg: pw(class.c), pos: pw(class.d) },
        ClassTag::Class4 => DeltaSpec::Plateau { c1: class.c1?, c2: class.c2? },
        ClassTag::SmoothNormal => {
            // The one-sided estimates agree to within the smoothness tolerance;
            // the limit has a single slope.
            let (dm, dp) = class.slopes?;
            let v = 0.5 * (dm + dp);
            return Some(LimitLaw::from_one_sided(sigma, v, v));
        }
        ClassTag::SubDistribution => {
            let (dm, dp) = class.slopes?;
            return Some(LimitLaw::from_one_sided(sigma, dm, dp));
        }
        ClassTag::Degenerate | ClassTag::Unclassified => return None,
    };
    Some(LimitLaw { sigma, delta })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizingSample {
    pub n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub distribution: DistSpec,
    pub loss: LossSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub m: f64,
    pub m_unique: bool,
    /// `m` was given by the caller rather than located.
    pub m_supplied: bool,
    pub l: usize,
    pub zeta: ZetaEstimate,
    pub sigma2: f64,
    #[serde(default, with = "crate::numeric::ext_real::option")]
    pub dminus_v: Option<f64>,
    #[serde(default, with = "crate::numeric::ext_real::option")]
    pub dplus_v: Option<f64>,
    pub attraction: AttractionClass,
    #[serde(default)]
    pub a_n_rule: Option<String>,
    pub a_n: Vec<NormalizingSample>,
    #[serde(default)]
    pub law: Option<LimitLaw>,
    /// `Var Y` when the limit is Gaussian.
    #[serde(default)]
    pub limit_variance: Option<f64>,
    pub diagnostics: Diagnostics,
    pub settings: AnalysisSettings,
    pub problem: ProblemEcho,
}

impl AsymptoticReport {
    /// `(t, V(m+t))` pairs from the probe grid, increasing in `t`.
    pub fn v_trace(&self) -> Vec<(f64, f64)> {
        let d = &self.diagnostics;
        let mut out: Vec<(f64, f64)> = d.t.iter().zip(&d.v_left).map(|(t, v)| (-t, *v)).collect();
        out.extend(d.t.iter().zip(&d.v_right).map(|(t, v)| (*t, *v)));
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Full population analysis. `m` may be supplied, which is how a
/// non-unique root (a flat stretch of `V`) is pinned.
pub fn analyze(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: Option<f64>,
    s: &AnalysisSettings,
) -> Result<AsymptoticReport, AnalysisError> {
    prob.validate()?;
    let (m, m_unique, m_supplied) = match m {
        Some(m) => (m, uniqueness(prob, loss, m, s)?, true),
        None => {
            let (m, u) = find_m_with(prob, loss, s)?;
            (m, u, false)
        }
    };
    let problem = ProblemEcho {
        distribution: prob.r.spec(),
        loss: loss.spec(),
        kernel: prob.raw.as_ref().map(|(_, k)| k.spec()),
        raw: prob.raw.as_ref().map(|(r, _)| r.spec()),
    };
    let l = prob.l;
    let zeta = match zeta(prob, loss, m, s) {
        Ok(z) => z,
        Err(AnalysisError::Degenerate(v)) => {
            return Ok(AsymptoticReport {
                m,
                m_unique,
                m_supplied,
                l,
                zeta: ZetaEstimate::exact(v, ZetaMethod::ClosedForm),
                sigma2: (l * l) as f64 * v,
                dminus_v: None,
                dplus_v: None,
                attraction: AttractionClass::bare(ClassTag::Degenerate),
                a_n_rule: None,
                a_n: vec![],
                law: None,
                limit_variance: None,
                diagnostics: Diagnostics { notes: vec![format!("zeta = {v:e} at or below the floor")], ..Default::default() },
                settings: s.clone(),
                problem,
            });
        }
        Err(e) => return Err(e),
    };
    let sigma2 = (l * l) as f64 * zeta.value;
    let Classification { class, diagnostics } = classify(prob, loss, m, s)?;
    let law = limit_law(&class, sigma2.sqrt());
    let a_n = if a_n_rule(class.tag).is_some() {
        s.report_ns
            .iter()
            .map(|&n| match normalizing_sequence(prob, loss, m, &class, n) {
                Ok(a) => NormalizingSample { n, a_n: Some(a), error: None },
                Err(e) => NormalizingSample { n, a_n: None, error: Some(e.to_string()) },
            })
            .collect()
    } else {
        vec![]
    };
    let (dminus_v, dplus_v) = match &diagnostics.derivatives {
        Some(d) => (Some(d.dminus), Some(d.dplus)),
        None => (None, None),
    };
    Ok(AsymptoticReport {
        m,
        m_unique,
        m_supplied,
        l,
        zeta,
        sigma2,
        dminus_v,
        dplus_v,
        a_n_rule: a_n_rule(class.tag).map(String::from),
        limit_variance: law.as_ref().and_then(LimitLaw::normal_variance),
        attraction: class,
        a_n,
        law,
        diagnostics,
        settings: s.clone(),
        problem,
    })
}

#[cfg(test)]
mod tests;
