//! Numerical building blocks: quadrature, root finding, stable exponentials.

pub mod fd;
pub mod quad;
pub mod roots;

pub use quad::{integrate, integrate_pieces, integrate_to_infinity, QuadResult, Tolerance};

/// `1 - e^{-x}` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `ln(1 - e^{-x})` for `x > 0`, accurate at both ends.
#[inline]
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x < std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// Geometric grid of `n` points on `[a, b]` with `0 < a < b`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log1mexp_matches_naive_in_safe_range() {
        for &x in &[0.01, 0.5, 1.0, 3.0, 20.0] {
            let naive = (1.0 - (-x as f64).exp()).ln();
            assert!((ln_one_minus_exp_neg(x) - naive).abs() < 1e-12);
        }
        // tiny x keeps relative precision
        let x = 1e-12;
        assert!((ln_one_minus_exp_neg(x) - x.ln()).abs() < 1e-9);
    }
}
