//! Truncated power series used to extract low-order pmf coefficients.
//!
//! A series is a `Vec<f64>` whose index is the power of `t`. All operations
//! truncate at the requested order (inclusive).

pub(crate) fn mul(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `outer(inner(t))` for an inner series without constant term.
pub(crate) fn compose(outer: &[f64], inner: &[f64], order: usize) -> Vec<f64> {
    debug_assert!(inner.first().copied().unwrap_or(0.0) == 0.0);
    let mut out = vec![0.0; order + 1];
    if let Some(&c0) = outer.first() {
        out[0] = c0;
    }
    let mut power = vec![0.0; order + 1];
    power[0] = 1.0;
    for (k, &ak) in outer.iter().enumerate().skip(1).take(order) {
        power = mul(&power, inner, order);
        if ak != 0.0 {
            for (o, p) in out.iter_mut().zip(&power).skip(k) {
                *o += ak * p;
            }
        }
    }
    out
}

/// `a(t)^gamma` for a series with nonzero constant term (J.C.P. Miller recurrence).
pub(crate) fn pow(a: &[f64], gamma: f64, order: usize) -> Vec<f64> {
    let a0 = a[0];
    debug_assert!(a0 != 0.0);
    let mut out = vec![0.0; order + 1];
    out[0] = a0.powf(gamma);
    for n in 1..=order {
        let mut acc = 0.0;
        for k in 1..=n.min(a.len() - 1) {
            acc += ((gamma + 1.0) * k as f64 - n as f64) * a[k] * out[n - k];
        }
        out[n] = acc / (n as f64 * a0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_geometric_series() {
        // 1/(1-t) - 1 composed with t/2 is (t/2)/(1-t/2)
        let outer: Vec<f64> = (0..=6).map(|k| if k == 0 { 0.0 } else { 1.0 }).collect();
        let inner = vec![0.0, 0.5];
        let c = compose(&outer, &inner, 6);
        for (k, v) in c.iter().enumerate().skip(1) {
            assert!((v - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn pow_matches_binomial() {
        // (1 + t)^0.5
        let s = pow(&[1.0, 1.0], 0.5, 4);
        let expected = [1.0, 0.5, -0.125, 0.0625, -0.0390625];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
