//! Jacobian logarithm.

/// `log(e^x + e^y) = max(x, y) + log(1 + e^-|x-y|)`. `-inf` is an absent term.
#[inline]
pub fn max_star(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    x.max(y) + (-(x - y).abs()).exp().ln_1p()
}

/// `log(sum e^v)` over a slice; `-inf` for an empty or all-absent slice.
#[inline]
pub fn max_star_all(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    let s: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + s.ln()
}

/// Subtract `max_star_all(values)` so the exponentials sum to one. Leaves an
/// all-`-inf` slice untouched and reports it.
#[inline]
pub fn normalize_log(values: &mut [f64]) -> bool {
    let z = max_star_all(values);
    if !z.is_finite() {
        return false;
    }
    for v in values.iter_mut() {
        *v -= z;
    }
    true
}
