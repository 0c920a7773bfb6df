//! Fourth-order finite differences that avoid stepping across known kinks.

/// First derivative of `f` at `x` with step `h`.
///
/// Uses the 5-point central stencil unless it would cross zero or one of
/// `breaks`; then the 4th-order one-sided stencil on the clear side is used.
/// Returns `None` when `x` sits on a break or no side is clear.
pub fn derivative<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, breaks: &[f64]) -> Option<f64> {
    let blocked = |lo: f64, hi: f64| lo <= 0.0 || breaks.iter().any(|&b| b >= lo && b <= hi);
    if breaks.iter().any(|&b| b == x) {
        return None;
    }
    if !blocked(x - 2.0 * h, x + 2.0 * h) {
        let d = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        return Some(d);
    }
    if !blocked(x, x + 4.0 * h) {
        let f0 = f(x);
        let d = (-25.0 * f0 + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h) + 16.0 * f(x + 3.0 * h) - 3.0 * f(x + 4.0 * h))
            / (12.0 * h);
        return Some(d);
    }
    if !blocked(x - 4.0 * h, x.next_down()) {
        let f0 = f(x);
        let d = (25.0 * f0 - 48.0 * f(x - h) + 36.0 * f(x - 2.0 * h) - 16.0 * f(x - 3.0 * h) + 3.0 * f(x - 4.0 * h))
            / (12.0 * h);
        return Some(d);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_and_one_sided() {
        let f = |x: f64| x.sin();
        let d = derivative(&f, 1.0, 1e-3, &[]).unwrap();
        assert!((d - 1f64.cos()).abs() < 1e-12);
        // near zero: forward stencil
        let d = derivative(&f, 1e-4, 1e-3, &[]).unwrap();
        assert!((d - (1e-4f64).cos()).abs() < 1e-11);
        // just left of a break: backward stencil
        let g = |x: f64| if x <= 2.0 { x * x } else { 0.0 };
        let d = derivative(&g, 2.0 - 1e-4, 1e-3, &[2.0]).unwrap();
        assert!((d - 2.0 * (2.0 - 1e-4)).abs() < 1e-9);
        assert!(derivative(&g, 2.0, 1e-3, &[2.0]).is_none());
    }
}
