//! Limit laws `H(x) = Φ_σ(δ(x))` on the extended real line.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::{norm_cdf, norm_quantile};
use crate::rng::open_unit;

/// One side of `δ`: for `x > 0` the value is `coef·x^alpha`, `+∞` or `0`;
/// for `x < 0` it is `−coef·|x|^alpha`, `−∞` or `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Infinite,
    Zero,
    Power { coef: f64, alpha: f64 },
}

impl Branch {
    fn magnitude(&self, y: f64) -> f64 {
        match *self {
            Branch::Infinite => f64::INFINITY,
            Branch::Zero => 0.0,
            Branch::Power { coef, alpha } => coef * y.powf(alpha),
        }
    }

    /// `inf{y > 0 : magnitude(y) ≥ z}` for `z > 0`.
    fn inverse(&self, z: f64) -> f64 {
        match *self {
            Branch::Infinite => 0.0,
            Branch::Zero => f64::INFINITY,
            Branch::Power { coef, alpha } => (z / coef).powf(1.0 / alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSpec {
    /// `δ(0) = 0` with independent branches on each side.
    Power { neg: Branch, pos: Branch },
    /// `−∞` below `−c1`, `0` on `[−c1, c2)`, `+∞` from `c2` on.
    Plateau { c1: f64, c2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub sigma: f64,
    pub delta: DeltaSpec,
}

impl LimitLaw {
    /// `N(0, variance)` written as `δ(x) = x`, `σ² = variance`.
    pub fn normal(variance: f64) -> Self {
        let b = Branch::Power { coef: 1.0, alpha: 1.0 };
        LimitLaw { sigma: variance.sqrt(), delta: DeltaSpec::Power { neg: b, pos: b } }
    }

    /// Law for one-sided linear behaviour `δ(x) = D⁻x` (x<0), `D⁺x` (x>0);
    /// a zero slope leaves mass 1/2 at the corresponding infinity.
    pub fn from_one_sided(sigma: f64, dminus: f64, dplus: f64) -> Self {
        let side = |d: f64| {
            if d == 0.0 {
                Branch::Zero
            } else if d.is_infinite() {
                Branch::Infinite
            } else {
                Branch::Power { coef: d, alpha: 1.0 }
            }
        };
        LimitLaw { sigma, delta: DeltaSpec::Power { neg: side(dminus), pos: side(dplus) } }
    }

    /// `δ(x)`, right-continuous.
    pub fn delta(&self, x: f64) -> f64 {
        match self.delta {
            DeltaSpec::Power { neg, pos } => {
                if x > 0.0 {
                    pos.magnitude(x)
                } else if x < 0.0 {
                    -neg.magnitude(-x)
                } else {
                    0.0
                }
            }
            DeltaSpec::Plateau { c1, c2 } => {
                if x < -c1 {
                    f64::NEG_INFINITY
                } else if x < c2 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `δ(x−)`.
    pub fn delta_left(&self, x: f64) -> f64 {
        match self.delta {
            DeltaSpec::Power { neg, .. } => {
                if x == 0.0 {
                    if neg == Branch::Infinite {
                        f64::NEG_INFINITY
                    } else {
                        0.0
                    }
                } else {
                    self.delta(x)
                }
            }
            DeltaSpec::Plateau { c1, c2 } => {
                if x <= -c1 {
                    f64::NEG_INFINITY
                } else if x <= c2 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn phi(&self, d: f64) -> f64 {
        if d == f64::INFINITY {
            1.0
        } else if d == f64::NEG_INFINITY {
            0.0
        } else {
            norm_cdf(d / self.sigma)
        }
    }

    /// `H(x)` for extended-real `x`; `H(−∞) = 0` and `H(+∞) = 1`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            0.0
        } else if x == f64::INFINITY {
            1.0
        } else {
            self.phi(self.delta(x))
        }
    }

    /// `H(x−)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            0.0
        } else if x == f64::INFINITY {
            1.0 - self.mass_at_infinity().1
        } else {
            self.phi(self.delta_left(x))
        }
    }

    /// `(P(Y = −∞), P(Y = +∞))`.
    pub fn mass_at_infinity(&self) -> (f64, f64) {
        match self.delta {
            DeltaSpec::Power { neg, pos } => {
                (if neg == Branch::Zero { 0.5 } else { 0.0 }, if pos == Branch::Zero { 0.5 } else { 0.0 })
            }
            DeltaSpec::Plateau { .. } => (0.0, 0.0),
        }
    }

    /// Leftmost generalized inverse of `H` on the extended line.
    pub fn quantile(&self, u: f64) -> f64 {
        let (pm, pp) = self.mass_at_infinity();
        if u <= pm {
            return f64::NEG_INFINITY;
        }
        if u > 1.0 - pp {
            return f64::INFINITY;
        }
        let y = self.sigma * norm_quantile(u);
        match self.delta {
            DeltaSpec::Power { neg, pos } => {
                if y > 0.0 {
                    pos.inverse(y)
                } else if y == 0.0 {
                    0.0
                } else {
                    -neg.inverse(-y)
                }
            }
            DeltaSpec::Plateau { c1, c2 } => {
                if y > 0.0 {
                    c2
                } else {
                    -c1
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(open_unit(rng))
    }

    /// Self-similarity scale `α_k` with `δ(x) = √k·δ(α_k x)`.
    pub fn alpha_k(&self, k: u32) -> f64 {
        match self.delta {
            DeltaSpec::Plateau { .. } => 1.0,
            DeltaSpec::Power { neg, pos } => {
                let a = match (neg, pos) {
                    (Branch::Power { alpha, .. }, _) | (_, Branch::Power { alpha, .. }) => alpha,
                    _ => return 1.0,
                };
                (k as f64).powf(-1.0 / (2.0 * a))
            }
        }
    }

    /// `Var Y` for the Gaussian shapes (`δ` linear with equal slopes).
    pub fn normal_variance(&self) -> Option<f64> {
        match self.delta {
            DeltaSpec::Power {
                neg: Branch::Power { coef: c1, alpha: a1 },
                pos: Branch::Power { coef: c2, alpha: a2 },
            } if a1 == 1.0 && a2 == 1.0 && c1 == c2 => Some((self.sigma / c1).powi(2)),
            _ => None,
        }
    }
}

/// `max_x |δ(x) − √k·δ(α_k x)|` over `grid`, infinities matching infinities
/// of the same sign.
pub fn functional_equation_residual(law: &LimitLaw, k: u32, alpha_k: f64, grid: &[f64]) -> f64 {
    let rk = (k as f64).sqrt();
    let mut worst: f64 = 0.0;
    for &x in grid {
        let a = law.delta(x);
        let b = law.delta(alpha_k * x);
        let b = if b.is_infinite() { b } else { rk * b };
        let r = if a.is_infinite() || b.is_infinite() {
            if a == b {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (a - b).abs()
        };
        worst = worst.max(r);
    }
    worst
}
