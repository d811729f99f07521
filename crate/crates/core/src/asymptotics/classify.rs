//! Attraction-class detection from the local shape of `V` around `m`.
//!
//! Order of checks:
//! 1. `V` vanishing at probes next to `m` means a flat stretch; its ends give
//!    class 4, provided `V` rises resolvably beyond both ends.
//! 2. Finite, positive and equal one-sided derivatives give the smooth
//!    normal case.
//! 3. The ratio `V(m+t)/V(m−t)` on a geometric grid decides between classes
//!    1, 2 and 3 (limit 0, limit ±∞, negative constant), followed by a power
//!    fit for the index `α`.
//! 4. A zero one-sided derivative next to a finite positive one gives a
//!    sub-distribution law.
//!
//! Anything else is `Unclassified`, with every trace attached.

use serde::{Deserialize, Serialize};

use super::{
    one_sided_derivatives, population_v, AnalysisError, AnalysisSettings, DerivativeEstimate, PopulationProblem,
};
use crate::numeric::linear_fit;
use crate::numeric::roots::{bracket, first_true};
use crate::problem::ConvexLoss;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    Class1,
    Class2,
    Class3,
    Class4,
    SmoothNormal,
    SubDistribution,
    Degenerate,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionClass {
    pub tag: ClassTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    /// `(D⁻V(m), D⁺V(m))` for the linear cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<(f64, f64)>,
}

impl AttractionClass {
    pub fn bare(tag: ClassTag) -> Self {
        AttractionClass { tag, alpha: None, c: None, d: None, c1: None, c2: None, slopes: None }
    }

    fn power(tag: ClassTag, alpha: f64, c: Option<f64>, d: Option<f64>) -> Self {
        AttractionClass { alpha: Some(alpha), c, d, ..Self::bare(tag) }
    }
}

/// Log-log fit of one side of `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// +1 for `V(m+t)`, −1 for `V(m−t)`.
    pub side: i8,
    pub loglog_slope: f64,
    pub loglog_r2: f64,
    /// Central-difference slopes of `ln|V|` against `ln t` in the window.
    pub local_alpha: Vec<f64>,
    /// Intercept of the local slopes regressed on `1/ln t`.
    pub alpha: f64,
    pub max_residual: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub levels: usize,
    pub t: Vec<f64>,
    /// `V(m+t)`
    pub v_right: Vec<f64>,
    /// `V(m−t)`
    pub v_left: Vec<f64>,
    /// `V(m+t)/V(m−t)`
    #[serde(with = "crate::numeric::ext_real::vec")]
    pub ratio: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<PowerFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivativeEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: AttractionClass,
    pub diagnostics: Diagnostics,
}

/// Ends of the zero set of `V` around `m`: `(inf{V ≥ −tol}, sup{V ≤ tol})`.
fn plateau_ends(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    tol: f64,
) -> Result<(f64, f64), AnalysisError> {
    let mut err = None;
    let mut v = |t: f64| match population_v(prob, loss, t) {
        Ok(x) => x,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let scale = 1e-3 * m.abs().max(1.0);
    let right = bracket(m, scale, |t| v(t) > tol).map(|(a, b)| first_true(a, b, |t| v(t) > tol));
    let left = bracket(m, scale, |t| v(t) >= -tol).map(|(a, b)| first_true(a, b, |t| v(t) >= -tol));
    if let Some(e) = err {
        return Err(e);
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((l.min(m), crate::numeric::roots::next_down(r).max(m))),
        _ => Err(AnalysisError::NoSignChange("V does not leave zero around m".into())),
    }
}

fn to_zero(w: &[f64], thr: f64) -> bool {
    w.iter().all(|x| x.is_finite() && x.abs() < thr) && w.windows(2).all(|p| p[1].abs() < p[0].abs())
}

fn to_negative_constant(w: &[f64], rel: f64) -> Option<f64> {
    if w.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut s = w.to_vec();
    s.sort_by(f64::total_cmp);
    let med = s[s.len() / 2];
    if med < 0.0 && w.iter().all(|x| (x - med).abs() <= rel * med.abs()) {
        Some(med)
    } else {
        None
    }
}

fn power_fit(t: &[f64], v: &[f64], side: i8, s: &AnalysisSettings) -> Option<PowerFit> {
    let len = t.len();
    let win = s.fit_window.min(len);
    if win < 4 {
        return None;
    }
    let lo = len - win;
    let lt: Vec<f64> = t[lo..].iter().map(|x| x.ln()).collect();
    let lv: Vec<f64> = v[lo..].iter().map(|x| x.abs().ln()).collect();
    if lv.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let (_, slope, r2) = linear_fit(&lt, &lv);
    let mut xs = Vec::new();
    let mut local = Vec::new();
    for j in 1..win - 1 {
        local.push((lv[j + 1] - lv[j - 1]) / (lt[j + 1] - lt[j - 1]));
        xs.push(1.0 / lt[j]);
    }
    let (alpha, b, _) = linear_fit(&xs, &local);
    let max_residual = xs.iter().zip(&local).map(|(x, y)| (y - alpha - b * x).abs()).fold(0.0, f64::max);
    let accepted = r2 >= s.r2_min && alpha > s.alpha_min && max_residual <= s.local_residual_max;
    Some(PowerFit { side, loglog_slope: slope, loglog_r2: r2, local_alpha: local, alpha, max_residual, accepted })
}

fn trace(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    levels: usize,
    s: &AnalysisSettings,
    d: &mut Diagnostics,
) -> Result<(), AnalysisError> {
    for j in d.t.len()..levels {
        let t = s.t0 * s.ratio.powi(j as i32);
        let vp = population_v(prob, loss, m + t)?;
        let vm = population_v(prob, loss, m - t)?;
        d.t.push(t);
        d.v_right.push(vp);
        d.v_left.push(vm);
        d.ratio.push(if vm == 0.0 { f64::NEG_INFINITY * vp.signum() } else { vp / vm });
    }
    d.levels = levels;
    Ok(())
}

/// Classify `(prob, loss)` at the location `m`.
pub fn classify(
    prob: &PopulationProblem,
    loss: &ConvexLoss,
    m: f64,
    s: &AnalysisSettings,
) -> Result<Classification, AnalysisError> {
    let mut d = Diagnostics::default();
    // Exact zeros only: quadrature noise must not pass for a flat stretch.
    let tol = 0.0;
    trace(prob, loss, m, s.levels, s, &mut d)?;

    // 1. flat stretch
    let flat = d.v_right.iter().chain(&d.v_left).any(|v| v.abs() <= tol);
    if flat {
        let (l, r) = plateau_ends(prob, loss, m, tol)?;
        let (c1, c2) = (m - l, r - m);
        d.plateau = Some((l, r));
        let w = (c1 + c2).max(1e-6 * m.abs().max(1.0));
        let rise_r = population_v(prob, loss, r + 0.1 * w)?;
        let rise_l = population_v(prob, loss, l - 0.1 * w)?;
        if c1.max(c2) > 0.0 && rise_r > s.edge_min && rise_l < -s.edge_min {
            d.notes.push(format!("V vanishes on [{l}, {r}]"));
            let class = AttractionClass { c1: Some(c1), c2: Some(c2), ..AttractionClass::bare(ClassTag::Class4) };
            return Ok(Classification { class, diagnostics: d });
        }
        d.notes.push(format!(
            "V is numerically zero near m on [{l}, {r}] but does not rise resolvably beyond it \
             (V = {rise_l:e} left, {rise_r:e} right); rapid variation or underflow"
        ));
        return Ok(Classification { class: AttractionClass::bare(ClassTag::Unclassified), diagnostics: d });
    }

    // 2. smooth case
    let der = match one_sided_derivatives(prob, loss, m, s) {
        Ok(der) => Some(der),
        Err(AnalysisError::Oscillating(msg)) => {
            d.notes.push(format!("one-sided derivatives: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    d.derivatives = der.clone();
    if let Some(der) = &der {
        let (dm, dp) = (der.dminus, der.dplus);
        if dm.is_finite() && dp.is_finite() && dm > 0.0 && dp > 0.0 && (dp - dm).abs() <= s.smooth_rel * dp.max(dm) {
            let class = AttractionClass {
                alpha: Some(1.0),
                c: Some(1.0),
                d: Some(1.0),
                slopes: Some((dm, dp)),
                ..AttractionClass::bare(ClassTag::SmoothNormal)
            };
            return Ok(Classification { class, diagnostics: d });
        }
    }

    // 3. ratio tests, escalating once
    for (pass, levels) in [s.levels, s.escalated_levels].into_iter().enumerate() {
        trace(prob, loss, m, levels, s, &mut d)?;
        let k = s.tail.min(levels);
        let ratio = &d.ratio[levels - k..];
        let inverse: Vec<f64> = ratio.iter().map(|r| 1.0 / r).collect();
        let decided = if to_zero(ratio, s.zero_ratio) {
            Some((ClassTag::Class1, None))
        } else if to_zero(&inverse, s.zero_ratio) {
            Some((ClassTag::Class2, None))
        } else {
            to_negative_constant(ratio, s.const_rel).map(|a| (ClassTag::Class3, Some(a)))
        };
        let Some((tag, a)) = decided else {
            d.notes.push(format!("pass {pass}: ratio trace undecided over {levels} levels"));
            continue;
        };
        let fit_right = power_fit(&d.t, &d.v_right, 1, s);
        let fit_left = power_fit(&d.t, &d.v_left, -1, s);
        d.fits = fit_right.iter().chain(fit_left.iter()).cloned().collect();
        let ok = |f: &Option<PowerFit>| f.as_ref().filter(|f| f.accepted).map(|f| f.alpha);
        let class = match tag {
            ClassTag::Class1 => ok(&fit_right).map(|al| AttractionClass::power(tag, al, Some(1.0), None)),
            ClassTag::Class2 => ok(&fit_left).map(|al| AttractionClass::power(tag, al, Some(1.0), None)),
            _ => match (ok(&fit_right), ok(&fit_left)) {
                (Some(ar), Some(al)) if (ar - al).abs() <= s.alpha_match * ar.max(al) => {
                    let a = a.expect("class 3 carries its ratio limit");
                    Some(AttractionClass::power(tag, ar, Some(-1.0 / a), Some(1.0)))
                }
                (Some(ar), Some(al)) => {
                    d.notes.push(format!("indices differ across sides: {ar} vs {al}"));
                    None
                }
                _ => None,
            },
        };
        match class {
            Some(class) => return Ok(Classification { class, diagnostics: d }),
            None => d.notes.push(format!("pass {pass}: {tag:?} ratio limit but power fit rejected")),
        }
    }

    // 4. one-sided linear behaviour with a flat side
    if let Some(der) = &der {
        let (dm, dp) = (der.dminus, der.dplus);
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if (dm == 0.0 && finite_pos(dp)) || (dp == 0.0 && finite_pos(dm)) {
            let class = AttractionClass { slopes: Some((dm, dp)), ..AttractionClass::bare(ClassTag::SubDistribution) };
            return Ok(Classification { class, diagnostics: d });
        }
    }
    Ok(Classification { class: AttractionClass::bare(ClassTag::Unclassified), diagnostics: d })
}
