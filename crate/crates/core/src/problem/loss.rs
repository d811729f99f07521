use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bad, ProblemError};
use crate::numeric::{norm_cdf, norm_cdf_centered, norm_pdf, FRAC_1_SQRT_2PI};

pub const LOSS_IDS: &[&str] =
    &["square", "check", "abs", "lp", "sigmoid_normal", "sigmoid_cauchy", "three_step"];

/// Declared regularity of `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    DifferentiableEverywhere,
    DifferentiableOffZero,
    JumpAtZero,
    Step,
}

/// `ψ⁺(t) = level0 + Σ_{j : t ≥ breaks[j]} jumps[j]`, breaks increasing,
/// jumps positive.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub level0: f64,
    pub breaks: Vec<f64>,
    pub jumps: Vec<f64>,
}

impl StepFunction {
    pub fn plus(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= t);
        self.level0 + self.jumps[..k].iter().sum::<f64>()
    }

    pub fn minus(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b < t);
        self.level0 + self.jumps[..k].iter().sum::<f64>()
    }

    pub fn top(&self) -> f64 {
        self.level0 + self.jumps.iter().sum::<f64>()
    }

    /// `∫_0^t ψ`.
    pub fn integral(&self, t: f64) -> f64 {
        let lvl = |s: f64| self.plus(s);
        let mut pts: Vec<f64> = self.breaks.iter().copied().filter(|&b| b > t.min(0.0) && b < t.max(0.0)).collect();
        let (a, b) = if t >= 0.0 { (0.0, t) } else { (t, 0.0) };
        pts.insert(0, a);
        pts.push(b);
        let mut s = 0.0;
        for w in pts.windows(2) {
            s += lvl(w[0]) * (w[1] - w[0]);
        }
        if t >= 0.0 {
            s
        } else {
            -s
        }
    }
}

type F = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied loss. The contract is the [`ConvexLoss`] invariants; `phi`
/// is shifted so that `φ(0) = 0`.
#[derive(Clone)]
pub struct CustomLoss {
    pub name: String,
    pub phi: F,
    pub psi_plus: F,
    pub psi_minus: F,
    pub tag: Smoothness,
    pub step: Option<StepFunction>,
}

impl fmt::Debug for CustomLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss").field("name", &self.name).field("tag", &self.tag).finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Square,
    Check(f64),
    Abs,
    Lp(f64),
    SigmoidNormal,
    SigmoidCauchy,
    ThreeStep { a: f64, b: f64, g: f64, r: f64 },
    Custom(CustomLoss, f64),
}

/// Convex loss `φ` with right and left derivatives.
#[derive(Debug, Clone)]
pub struct ConvexLoss {
    kind: Kind,
    step: Option<StepFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub id: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

pub fn loss_catalog(id: &str, params: &[f64]) -> Result<ConvexLoss, ProblemError> {
    let n = |k: usize| -> Result<(), ProblemError> {
        if params.len() != k {
            Err(bad(id, format!("expected {k} parameters, got {}", params.len())))
        } else if params.iter().any(|p| !p.is_finite()) {
            Err(bad(id, "parameters must be finite"))
        } else {
            Ok(())
        }
    };
    let kind = match id {
        "square" => {
            n(0)?;
            Kind::Square
        }
        "check" => {
            n(1)?;
            let a = params[0];
            if !(a > 0.0 && a < 1.0) {
                return Err(bad(id, "alpha must lie in (0,1)"));
            }
            Kind::Check(a)
        }
        "abs" => {
            n(0)?;
            Kind::Abs
        }
        "lp" => {
            n(1)?;
            let p = params[0];
            if p == 1.0 {
                return Err(bad(id, "p = 1 is the absolute loss; use id `abs` (or `check` with alpha 0.5)"));
            }
            if !(p > 1.0) {
                return Err(bad(id, "p must exceed 1; for p <= 1 use `abs` or `check`"));
            }
            Kind::Lp(p)
        }
        "sigmoid_normal" => {
            n(0)?;
            Kind::SigmoidNormal
        }
        "sigmoid_cauchy" => {
            n(0)?;
            Kind::SigmoidCauchy
        }
        "three_step" => {
            n(4)?;
            let (a, b, g, r) = (params[0], params[1], params[2], params[3]);
            if !(a < 0.0 && 0.0 < b && b < g && r > 0.0) {
                return Err(bad(id, "need levels a < 0 < b < g and offset r > 0"));
            }
            Kind::ThreeStep { a, b, g, r }
        }
        other => return Err(ProblemError::UnknownLoss(other.to_string())),
    };
    Ok(ConvexLoss::from_kind(kind))
}

impl ConvexLoss {
    fn from_kind(kind: Kind) -> Self {
        let step = match &kind {
            Kind::Check(a) => Some(StepFunction { level0: -a, breaks: vec![0.0], jumps: vec![1.0] }),
            Kind::Abs => Some(StepFunction { level0: -1.0, breaks: vec![0.0], jumps: vec![2.0] }),
            Kind::ThreeStep { a, b, g, r } => {
                Some(StepFunction { level0: *a, breaks: vec![0.0, *r], jumps: vec![b - a, g - b] })
            }
            Kind::Custom(c, _) => c.step.clone(),
            _ => None,
        };
        ConvexLoss { kind, step }
    }

    pub fn custom(c: CustomLoss) -> Self {
        let shift = (c.phi)(0.0);
        ConvexLoss::from_kind(Kind::Custom(c, shift))
    }

    pub fn from_spec(spec: &LossSpec) -> Result<Self, ProblemError> {
        loss_catalog(&spec.id, &spec.params)
    }

    pub fn spec(&self) -> LossSpec {
        LossSpec { id: self.id().to_string(), params: self.params() }
    }

    pub fn id(&self) -> &str {
        match &self.kind {
            Kind::Square => "square",
            Kind::Check(_) => "check",
            Kind::Abs => "abs",
            Kind::Lp(_) => "lp",
            Kind::SigmoidNormal => "sigmoid_normal",
            Kind::SigmoidCauchy => "sigmoid_cauchy",
            Kind::ThreeStep { .. } => "three_step",
            Kind::Custom(c, _) => &c.name,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Check(a) => vec![*a],
            Kind::Lp(p) => vec![*p],
            Kind::ThreeStep { a, b, g, r } => vec![*a, *b, *g, *r],
            _ => vec![],
        }
    }

    pub fn tag(&self) -> Smoothness {
        match &self.kind {
            Kind::Square | Kind::SigmoidNormal | Kind::SigmoidCauchy => Smoothness::DifferentiableEverywhere,
            Kind::Lp(p) if *p >= 2.0 => Smoothness::DifferentiableEverywhere,
            Kind::Lp(_) => Smoothness::DifferentiableOffZero,
            Kind::Check(_) | Kind::Abs => Smoothness::JumpAtZero,
            Kind::ThreeStep { .. } => Smoothness::Step,
            Kind::Custom(c, _) => c.tag,
        }
    }

    /// Piecewise-constant representation of `ψ` when it has one.
    pub fn step(&self) -> Option<&StepFunction> {
        self.step.as_ref()
    }

    /// Check-loss level `α` when this is a quantile loss (abs counts as 1/2
    /// with `ψ` doubled).
    pub fn quantile_level(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::Check(a) => Some((*a, 1.0)),
            Kind::Abs => Some((0.5, 2.0)),
            _ => None,
        }
    }

    pub(crate) fn is_square(&self) -> bool {
        matches!(self.kind, Kind::Square)
    }

    pub(crate) fn is_sigmoid_normal(&self) -> bool {
        matches!(self.kind, Kind::SigmoidNormal)
    }

    pub fn phi(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Square => t * t,
            Kind::Check(a) => t * (if t >= 0.0 { 1.0 } else { 0.0 } - a),
            Kind::Abs => t.abs(),
            Kind::Lp(p) => t.abs().powf(*p),
            Kind::SigmoidNormal => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                t * norm_cdf_centered(t) + norm_pdf(t) - FRAC_1_SQRT_2PI
            }
            Kind::SigmoidCauchy => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                (t * t.atan() - 0.5 * t.mul_add(t, 1.0).ln()) / PI
            }
            Kind::ThreeStep { .. } => self.step.as_ref().unwrap().integral(t),
            Kind::Custom(c, shift) => (c.phi)(t) - shift,
        }
    }

    /// Right derivative `D⁺φ`.
    pub fn psi_plus(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Square => 2.0 * t,
            Kind::Check(a) => (if t >= 0.0 { 1.0 } else { 0.0 }) - a,
            Kind::Abs => {
                if t >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Lp(p) => p * t.abs().powf(p - 1.0).copysign(t),
            Kind::SigmoidNormal => norm_cdf(t) - 0.5,
            Kind::SigmoidCauchy => t.atan() / PI,
            Kind::ThreeStep { .. } => self.step.as_ref().unwrap().plus(t),
            Kind::Custom(c, _) => (c.psi_plus)(t),
        }
    }

    /// Left derivative `D⁻φ`.
    pub fn psi_minus(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Check(a) => (if t > 0.0 { 1.0 } else { 0.0 }) - a,
            Kind::Abs => {
                if t > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::ThreeStep { .. } => self.step.as_ref().unwrap().minus(t),
            Kind::Custom(c, _) => (c.psi_minus)(t),
            _ => self.psi_plus(t),
        }
    }

    /// `(ψ(−∞), ψ(+∞))`.
    pub fn psi_limits(&self) -> (f64, f64) {
        match &self.step {
            Some(s) => (s.level0, s.top()),
            None => (self.psi_minus(f64::NEG_INFINITY), self.psi_plus(f64::INFINITY)),
        }
    }

    /// Catalog losses whose `ψ` is continuous and strictly increasing.
    pub fn is_strictly_convex(&self) -> bool {
        matches!(self.kind, Kind::Square | Kind::Lp(_) | Kind::SigmoidNormal | Kind::SigmoidCauchy)
    }

    /// `U_n` is coercive for every sample iff `ψ(−∞) < 0 < ψ(+∞)`.
    pub fn is_coercive(&self) -> bool {
        let (lo, hi) = self.psi_limits();
        lo < 0.0 && hi > 0.0
    }
}

impl LossSpec {
    pub fn new(id: &str, params: &[f64]) -> Self {
        LossSpec { id: id.into(), params: params.to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalog() -> Vec<ConvexLoss> {
        vec![
            loss_catalog("square", &[]).unwrap(),
            loss_catalog("check", &[0.5]).unwrap(),
            loss_catalog("check", &[0.2]).unwrap(),
            loss_catalog("abs", &[]).unwrap(),
            loss_catalog("lp", &[1.5]).unwrap(),
            loss_catalog("lp", &[3.0]).unwrap(),
            loss_catalog("sigmoid_normal", &[]).unwrap(),
            loss_catalog("sigmoid_cauchy", &[]).unwrap(),
            loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.7]).unwrap(),
        ]
    }

    #[test]
    fn catalog_examples() {
        let c = loss_catalog("check", &[0.5]).unwrap();
        assert_eq!(c.psi_plus(0.0), 0.5);
        assert_eq!(c.psi_minus(0.0), -0.5);
        assert_eq!(loss_catalog("square", &[]).unwrap().psi_plus(3.0), 6.0);
        assert!((loss_catalog("lp", &[1.5]).unwrap().psi_plus(-4.0) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        let e = loss_catalog("lp", &[1.0]).unwrap_err().to_string();
        assert!(e.contains("abs"));
        let e = loss_catalog("lp", &[0.5]).unwrap_err().to_string();
        assert!(e.contains("abs") && e.contains("check"));
        assert!(loss_catalog("check", &[1.0]).is_err());
        assert!(loss_catalog("three_step", &[1.0, 0.5, 2.0, 0.7]).is_err());
        assert!(loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.0]).is_err());
        assert!(matches!(loss_catalog("huber", &[]), Err(ProblemError::UnknownLoss(_))));
    }

    #[test]
    fn tags_and_coercivity() {
        let tags: Vec<_> = catalog().iter().map(|l| l.tag()).collect();
        use Smoothness::*;
        assert_eq!(
            tags,
            vec![
                DifferentiableEverywhere,
                JumpAtZero,
                JumpAtZero,
                JumpAtZero,
                DifferentiableOffZero,
                DifferentiableEverywhere,
                DifferentiableEverywhere,
                DifferentiableEverywhere,
                Step
            ]
        );
        assert!(catalog().iter().all(|l| l.is_coercive()));
        let flat = ConvexLoss::custom(CustomLoss {
            name: "hinge".into(),
            phi: Arc::new(|t: f64| t.max(0.0)),
            psi_plus: Arc::new(|t: f64| if t >= 0.0 { 1.0 } else { 0.0 }),
            psi_minus: Arc::new(|t: f64| if t > 0.0 { 1.0 } else { 0.0 }),
            tag: Smoothness::JumpAtZero,
            step: Some(StepFunction { level0: 0.0, breaks: vec![0.0], jumps: vec![1.0] }),
        });
        assert!(!flat.is_coercive());
    }

    #[test]
    fn phi_vanishes_at_zero() {
        for l in catalog() {
            assert_eq!(l.phi(0.0), 0.0, "{}", l.id());
        }
        let shifted = ConvexLoss::custom(CustomLoss {
            name: "shifted_square".into(),
            phi: Arc::new(|t: f64| t * t + 3.0),
            psi_plus: Arc::new(|t: f64| 2.0 * t),
            psi_minus: Arc::new(|t: f64| 2.0 * t),
            tag: Smoothness::DifferentiableEverywhere,
            step: None,
        });
        assert_eq!(shifted.phi(0.0), 0.0);
        assert_eq!(shifted.phi(2.0), 4.0);
    }

    #[test]
    fn three_step_phi_is_integral_of_psi() {
        let l = loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.7]).unwrap();
        assert!((l.phi(1.0) - (0.5 * 0.7 + 2.0 * 0.3)).abs() < 1e-15);
        assert!((l.phi(-2.0) - 2.0).abs() < 1e-15);
        assert_eq!(l.psi_plus(0.7), 2.0);
        assert_eq!(l.psi_minus(0.7), 0.5);
    }

    #[test]
    fn difference_quotients_bracketed_by_psi() {
        let h = 1e-6;
        for l in catalog() {
            for i in 0..1000 {
                let t = -5.0 + 10.0 * i as f64 / 999.0;
                let q = (l.phi(t + h) - l.phi(t)) / h;
                let tol = 1e-6 * (1.0 + l.phi(t).abs());
                assert!(q >= l.psi_plus(t) - tol && q <= l.psi_plus(t + h) + tol, "{} at {t}: {q}", l.id());
            }
        }
    }

    #[test]
    fn c_r_inequality_holds() {
        use crate::rng::stream;
        use rand::Rng;
        let mut rng = stream(5, 0);
        for _ in 0..10_000 {
            let u: f64 = rng.random_range(-10.0..10.0);
            let v: f64 = rng.random_range(-10.0..10.0);
            let r: f64 = rng.random_range(0.1..5.0);
            let lhs = (u + v).abs().powf(r);
            let rhs = super::super::c_r(r) * (u.abs().powf(r) + v.abs().powf(r));
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    proptest! {
        #[test]
        fn one_sided_derivatives_ordered(t in -50.0f64..50.0, which in 0usize..9) {
            let l = &catalog()[which];
            prop_assert!(l.psi_minus(t) <= l.psi_plus(t));
        }

        #[test]
        fn psi_monotone(s in -50.0f64..50.0, d in 0.0f64..10.0, which in 0usize..9) {
            let l = &catalog()[which];
            prop_assert!(l.psi_plus(s) <= l.psi_plus(s + d));
            prop_assert!(l.psi_minus(s) <= l.psi_minus(s + d));
        }

        #[test]
        fn subgradient_inequality(s in -20.0f64..20.0, d in 1e-3f64..10.0, which in 0usize..9) {
            let l = &catalog()[which];
            let t = s + d;
            let diff = l.phi(t) - l.phi(s);
            let tol = 1e-9 * (1.0 + diff.abs() + l.phi(s).abs());
            prop_assert!(diff >= l.psi_plus(s) * (t - s) - tol);
            prop_assert!(diff <= l.psi_plus(t) * (t - s) + tol);
        }

        #[test]
        fn psi_minus_is_left_limit_off_jumps(t in -20.0f64..20.0, which in 0usize..9) {
            let l = &catalog()[which];
            prop_assume!(t.abs() > 1e-3 && (t - 0.7).abs() > 1e-3);
            let left = l.psi_plus(t - 1e-9);
            prop_assert!((l.psi_minus(t) - left).abs() < 1e-6 * (1.0 + t.abs().powi(2)));
        }
    }
}
