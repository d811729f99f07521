//! Bisection on monotone predicates, exact to adjacent floats.
//!
//! Floats are mapped onto an order-preserving integer key so that bisection
//! halves the number of representable values between the bracket ends. Any
//! bracket closes in at most 64 steps.

pub fn key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

pub fn from_key(k: i64) -> f64 {
    let b = if k < 0 { k ^ i64::MAX } else { k };
    f64::from_bits(b as u64)
}

pub fn next_up(x: f64) -> f64 {
    if x == f64::INFINITY {
        x
    } else {
        from_key(key(x) + 1)
    }
}

pub fn next_down(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        x
    } else {
        from_key(key(x) - 1)
    }
}

/// Smallest float in `(lo, hi]` where the non-decreasing predicate holds,
/// given `!pred(lo)` and `pred(hi)`.
pub fn first_true<P: FnMut(f64) -> bool>(lo: f64, hi: f64, mut pred: P) -> f64 {
    let (mut a, mut b) = (key(lo), key(hi));
    while (b as i128) - (a as i128) > 1 {
        let mid = ((a as i128 + b as i128) / 2) as i64;
        let x = from_key(mid);
        if pred(x) {
            b = mid;
        } else {
            a = mid;
        }
    }
    let r = from_key(b);
    // -0.0 and +0.0 are adjacent keys; report zero without a sign.
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Locate a bracket `(lo, hi)` with `!pred(lo)` and `pred(hi)` by doubling
/// outward from `center`. `None` if the predicate never switches on the
/// finite floats.
pub fn bracket<P: FnMut(f64) -> bool>(center: f64, scale: f64, mut pred: P) -> Option<(f64, f64)> {
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let mut w = scale;
    let mut lo = center - w;
    while pred(lo) {
        if lo <= -f64::MAX {
            return None;
        }
        w *= 2.0;
        lo = (center - w).max(-f64::MAX);
    }
    let mut w = scale;
    let mut hi = center + w;
    while !pred(hi) {
        if hi >= f64::MAX {
            return None;
        }
        w *= 2.0;
        hi = (center + w).min(f64::MAX);
    }
    Some((lo, hi))
}

/// Smallest float where a non-decreasing predicate holds, searching outward
/// from `center`.
pub fn infimum<P: FnMut(f64) -> bool>(center: f64, scale: f64, mut pred: P) -> Option<f64> {
    let (lo, hi) = bracket(center, scale, &mut pred)?;
    Some(first_true(lo, hi, pred))
}
