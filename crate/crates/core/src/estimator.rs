//! Kernel samples, the empirical derivative processes `V_n±`, the U-process
//! `U_n` and its minimizer interval.
//!
//! `V_n⁺` and `V_n⁻` are non-decreasing, so the interval ends are found by
//! bisection on the predicates `V_n⁺(t) ≥ 0` and `V_n⁻(t) > 0`, carried down
//! to adjacent floats. For step-function `ψ` both are evaluated by rank
//! counting on the sorted kernel values with compensated arithmetic, which
//! makes the quantile case exact.

use serde::{Deserialize, Serialize};

use crate::numeric::roots::{bracket, first_true, next_down};
use crate::numeric::{two_prod, KahanSum};
use crate::population::Data;
use crate::problem::{ConvexLoss, Kernel, ProblemError, StepFunction};

pub const DEFAULT_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("C({n},{l}) = {count} kernel evaluations exceeds the enumeration cap {cap}; raise the cap or subsample the data")]
    CapExceeded { n: usize, l: usize, count: String, cap: u64 },
    #[error("need at least l = {l} observations, got {n}")]
    TooFewObservations { n: usize, l: usize },
    #[error("observations have dimension {got}, kernel `{kernel}` expects {expected}")]
    Dimension { kernel: String, expected: usize, got: usize },
    #[error("kernel evaluation failed: {0}")]
    Kernel(#[from] ProblemError),
    #[error("kernel value is not finite at index combination {0:?}")]
    NonFinite(Vec<usize>),
    #[error("loss `{0}` is not coercive: psi(-inf) < 0 < psi(+inf) fails")]
    NonCoercive(String),
    #[error("kernel sample is empty")]
    Empty,
}

/// `C(n, k)` or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return None;
        }
    }
    Some(r as u64)
}

/// Sorted multiset of kernel values over all index combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    values: Vec<f64>,
    n: usize,
    l: usize,
}

impl KernelSample {
    /// Sample built directly from kernel values (`l = 1`).
    pub fn from_values(mut values: Vec<f64>) -> Result<Self, EstimatorError> {
        if values.is_empty() {
            return Err(EstimatorError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EstimatorError::NonFinite(vec![i]));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        Ok(KernelSample { values, n, l: 1 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn kernel_sample(data: &Data, kernel: &Kernel) -> Result<KernelSample, EstimatorError> {
    kernel_sample_with_cap(data, kernel, DEFAULT_CAP)
}

pub fn kernel_sample_with_cap(data: &Data, kernel: &Kernel, cap: u64) -> Result<KernelSample, EstimatorError> {
    let n = data.len();
    let l = kernel.degree();
    if n < l || n == 0 {
        return Err(EstimatorError::TooFewObservations { n, l });
    }
    if let Some(d) = kernel.dim() {
        if d != data.dim() {
            return Err(EstimatorError::Dimension { kernel: kernel.id().into(), expected: d, got: data.dim() });
        }
    }
    let count = binomial(n, l);
    match count {
        Some(c) if c <= cap => {}
        _ => {
            return Err(EstimatorError::CapExceeded {
                n,
                l,
                count: count.map(|c| c.to_string()).unwrap_or_else(|| "> 2^64".into()),
                cap,
            })
        }
    }
    let mut values = Vec::with_capacity(count.unwrap() as usize);
    let mut idx: Vec<usize> = (0..l).collect();
    let mut args: Vec<&[f64]> = Vec::with_capacity(l);
    loop {
        args.clear();
        args.extend(idx.iter().map(|&i| data.row(i)));
        let v = kernel.eval(&args)?;
        if !v.is_finite() {
            return Err(EstimatorError::NonFinite(idx.clone()));
        }
        values.push(v);
        // next combination in lexicographic order
        let mut j = l;
        loop {
            if j == 0 {
                values.sort_by(f64::total_cmp);
                return Ok(KernelSample { values, n, l });
            }
            j -= 1;
            if idx[j] < n - l + j {
                idx[j] += 1;
                for k in j + 1..l {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `N·V_n±` for a step `ψ` from rank counts, summed with compensation.
fn step_scaled(ks: &KernelSample, s: &StepFunction, t: f64, strict: bool) -> f64 {
    let v = &ks.values;
    let n = v.len() as f64;
    let mut acc = KahanSum::default();
    let (h, l) = two_prod(s.level0, n);
    acc.add(h);
    acc.add(l);
    for (b, d) in s.breaks.iter().zip(&s.jumps) {
        // fl(t − k) is non-increasing in k, so qualifying values form a prefix.
        let c = if strict {
            v.partition_point(|&k| t - k > *b)
        } else {
            v.partition_point(|&k| t - k >= *b)
        } as f64;
        let (h, l) = two_prod(*d, c);
        acc.add(h);
        acc.add(l);
    }
    acc.value()
}

/// `V_n⁺(t) = N⁻¹ Σ ψ⁺(t − k_i)`.
pub fn v_plus(ks: &KernelSample, loss: &ConvexLoss, t: f64) -> f64 {
    match loss.step() {
        Some(s) => step_scaled(ks, s, t, false) / ks.len() as f64,
        None => ks.values.iter().map(|&k| loss.psi_plus(t - k)).sum::<f64>() / ks.len() as f64,
    }
}

/// `V_n⁻(t) = N⁻¹ Σ ψ⁻(t − k_i)`.
pub fn v_minus(ks: &KernelSample, loss: &ConvexLoss, t: f64) -> f64 {
    match loss.step() {
        Some(s) => step_scaled(ks, s, t, true) / ks.len() as f64,
        None => ks.values.iter().map(|&k| loss.psi_minus(t - k)).sum::<f64>() / ks.len() as f64,
    }
}

/// `U_n(t) = N⁻¹ Σ [φ(t − k_i) − φ(t0 − k_i)]`.
pub fn u_value(ks: &KernelSample, loss: &ConvexLoss, t: f64, t0: f64) -> f64 {
    let mut acc = KahanSum::default();
    for &k in &ks.values {
        acc.add(loss.phi(t - k) - loss.phi(t0 - k));
    }
    acc.value() / ks.len() as f64
}

/// Does `t` satisfy `V_n⁻(t) ≤ 0 ≤ V_n⁺(t)`.
pub fn in_argmin(ks: &KernelSample, loss: &ConvexLoss, t: f64) -> bool {
    v_minus(ks, loss, t) <= 0.0 && v_plus(ks, loss, t) >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Smallest,
    Largest,
    #[default]
    Midpoint,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Smallest, Policy::Largest, Policy::Midpoint];

    pub fn select(self, iv: &MinimizerInterval) -> f64 {
        match self {
            Policy::Smallest => iv.smallest,
            Policy::Largest => iv.largest,
            Policy::Midpoint => iv.midpoint(),
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smallest" => Ok(Policy::Smallest),
            "largest" => Ok(Policy::Largest),
            "midpoint" => Ok(Policy::Midpoint),
            other => Err(format!("unknown policy `{other}` (smallest, largest, midpoint)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerInterval {
    pub smallest: f64,
    pub largest: f64,
    pub selected: f64,
    pub policy: Policy,
    pub n: usize,
    pub l: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
}

impl MinimizerInterval {
    pub fn midpoint(&self) -> f64 {
        (0.5 * self.smallest + 0.5 * self.largest).clamp(self.smallest, self.largest)
    }
}

/// The argmin interval `[inf{V_n⁺ ≥ 0}, sup{V_n⁻ ≤ 0}]`.
///
/// For continuous `ψ` the two ends can straddle the root by one float; the
/// interval then collapses onto `smallest`, the first float with `V_n⁺ ≥ 0`.
pub fn argmin_interval(ks: &KernelSample, loss: &ConvexLoss, policy: Policy) -> Result<MinimizerInterval, EstimatorError> {
    if ks.is_empty() {
        return Err(EstimatorError::Empty);
    }
    if !loss.is_coercive() {
        return Err(EstimatorError::NonCoercive(loss.id().to_string()));
    }
    let v = &ks.values;
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let center = 0.5 * lo + 0.5 * hi;
    let scale = 0.5 * (hi - lo) + 1.0;
    let non_coercive = || EstimatorError::NonCoercive(loss.id().to_string());

    let up = |t: f64| v_plus(ks, loss, t) >= 0.0;
    let (a, b) = bracket(center, scale, up).ok_or_else(non_coercive)?;
    let smallest = first_true(a, b, up);

    // A strictly convex U_n has a single minimizer; equal values at
    // neighbouring floats are rounding, not a flat stretch.
    let largest = if loss.is_strictly_convex() {
        smallest
    } else {
        let over = |t: f64| v_minus(ks, loss, t) > 0.0;
        let (a, b) = bracket(center, scale, over).ok_or_else(non_coercive)?;
        let largest = next_down(first_true(a, b, over)).max(smallest);
        if largest == 0.0 {
            0.0
        } else {
            largest
        }
    };

    let mut iv = MinimizerInterval { smallest, largest, selected: smallest, policy, n: ks.n, l: ks.l, big_n: v.len() };
    iv.selected = policy.select(&iv);
    Ok(iv)
}
