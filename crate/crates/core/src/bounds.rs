//! Explicit distance bounds between PE, GPE and scaled PG laws.
//!
//! Every bound is returned as a [`BoundReport`] whose `terms` re-sum to
//! `value`. The norm convention fixes `‖h̃‖` and `‖h'‖`: total variation uses
//! `‖h̃‖ = 2` together with the halved supremum, so its net coefficient is 1.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{GPEParams, PEParams};
use crate::error::{check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Raw,
    Dtv,
    Dbw,
}

/// Norms of the test-function class a bound is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConvention {
    pub metric: Metric,
    pub label: &'static str,
    pub h_tilde_norm: f64,
    pub h_prime_norm: Option<f64>,
    /// Multiplier applied after the supremum (1/2 for total variation).
    pub scale: f64,
}

impl NormConvention {
    /// User-supplied norms.
    pub fn raw(h_tilde_norm: f64, h_prime_norm: Option<f64>) -> Self {
        Self {
            metric: Metric::Raw,
            label: "raw",
            h_tilde_norm,
            h_prime_norm,
            scale: 1.0,
        }
    }

    /// Total variation: `‖h‖ ≤ 1`, `‖h̃‖ ≤ 2`, halved.
    pub fn dtv() -> Self {
        Self {
            metric: Metric::Dtv,
            label: "dtv",
            h_tilde_norm: 2.0,
            h_prime_norm: None,
            scale: 0.5,
        }
    }

    /// Bounded Wasserstein over `Lip_b(1)`: `‖h̃‖ = 2`, `‖h'‖ = 1`.
    pub fn dbw() -> Self {
        Self {
            metric: Metric::Dbw,
            label: "dbw",
            h_tilde_norm: 2.0,
            h_prime_norm: Some(1.0),
            scale: 1.0,
        }
    }

    /// Bounded Wasserstein read literally as `{‖h‖ ≤ 1, ‖h̃‖ ≤ 1}` with `‖h'‖ = 1`.
    pub fn dbw_literal() -> Self {
        Self {
            metric: Metric::Dbw,
            label: "dbw-literal",
            h_tilde_norm: 1.0,
            h_prime_norm: Some(1.0),
            scale: 1.0,
        }
    }

    /// Looks a convention up by its label.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "dtv" => Some(Self::dtv()),
            "dbw" => Some(Self::dbw()),
            "dbw-literal" => Some(Self::dbw_literal()),
            _ => None,
        }
    }

    /// Net multiplier of the `‖h̃‖`-bracket.
    pub fn coefficient(&self) -> f64 {
        self.h_tilde_norm * self.scale
    }

    fn h_prime(&self, theorem: &'static str) -> Result<f64> {
        match (self.metric, self.h_prime_norm) {
            (Metric::Dtv, _) => Err(Error::Hypothesis {
                theorem,
                message: "needs a derivative norm; total variation has none (use dbw, dbw-literal or raw)".into(),
            }),
            (_, Some(d)) => Ok(d * self.scale),
            (_, None) => Err(Error::Hypothesis {
                theorem,
                message: "needs ‖h'‖; supply it with the raw convention".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "Thm3.1")]
    Thm31,
    #[serde(rename = "Thm3.1-dTV")]
    Thm31Dtv,
    #[serde(rename = "EqualTheta")]
    EqualTheta,
    #[serde(rename = "Thm3.3")]
    Thm33,
    #[serde(rename = "Cor-GPE-equal")]
    CorGpeEqual,
    #[serde(rename = "Triangle")]
    Triangle,
    #[serde(rename = "Thm3.4")]
    Thm34,
    #[serde(rename = "PatternCor")]
    PatternCor,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::Thm31 => "Thm3.1",
            FormulaId::Thm31Dtv => "Thm3.1-dTV",
            FormulaId::EqualTheta => "EqualTheta",
            FormulaId::Thm33 => "Thm3.3",
            FormulaId::CorGpeEqual => "Cor-GPE-equal",
            FormulaId::Triangle => "Triangle",
            FormulaId::Thm34 => "Thm3.4",
            FormulaId::PatternCor => "PatternCor",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where `E X₂` comes from in the GPE comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMode {
    /// Closed-form upper bound on the GPE mean.
    #[default]
    Lemma,
    /// Quadrature mean (diagnostic).
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    pub inputs: BTreeMap<String, f64>,
    pub convention: NormConvention,
    pub terms: Vec<BoundTerm>,
    pub value: f64,
}

impl BoundReport {
    fn assemble(formula_id: FormulaId, inputs: &[(&str, f64)], convention: NormConvention, terms: Vec<(String, f64)>) -> Self {
        let terms: Vec<BoundTerm> = terms.into_iter().map(|(name, value)| BoundTerm { name, value }).collect();
        let value = terms.iter().map(|t| t.value).sum();
        Self {
            formula_id,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            convention,
            terms,
            value,
        }
    }

    /// `|Σ terms - value| / max(1, value)`.
    pub fn resum_error(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.value).sum();
        (s - self.value).abs() / self.value.abs().max(1.0)
    }
}

fn norm(theta: f64) -> f64 {
    -(-theta).exp_m1()
}

/// PE(θ₁, λ₁) against PE(θ₂, λ₂) with `λ₁ ≤ λ₂`.
pub fn bound_pe_pe(p1: &PEParams, p2: &PEParams, conv: NormConvention) -> Result<BoundReport> {
    let (t1, l1, t2, l2) = (p1.theta(), p1.lambda(), p2.theta(), p2.lambda());
    if l1 > l2 {
        return Err(Error::Ordering {
            theorem: "PE vs PE",
            message: format!("requires λ₁ ≤ λ₂ (got {l1} > {l2}); swap the two distributions"),
        });
    }
    let c = conv.coefficient();
    let ratio = (t2 * l2 / (t1 * l1) - 1.0).abs();
    let rate = (l2 / l1 - 1.0) * (l1 * t2 * norm(t1) / (l2 * norm(t2)) + 2.0);
    let id = if conv.metric == Metric::Dtv { FormulaId::Thm31Dtv } else { FormulaId::Thm31 };
    Ok(BoundReport::assemble(
        id,
        &[("theta1", t1), ("lambda1", l1), ("theta2", t2), ("lambda2", l2)],
        conv,
        vec![("shape_ratio".into(), c * ratio), ("rate_gap".into(), c * rate)],
    ))
}

/// PE(θ, λ₁) against PE(θ, λ₂), `λ₁ ≤ λ₂`: `‖h̃‖(λ₂/λ₁ - 1)(λ₁θ/λ₂ + 3)`.
pub fn bound_pe_pe_equal_theta(theta: f64, lambda1: f64, lambda2: f64, conv: NormConvention) -> Result<BoundReport> {
    check_positive("theta", theta)?;
    check_positive("lambda1", lambda1)?;
    check_positive("lambda2", lambda2)?;
    if lambda1 > lambda2 {
        return Err(Error::Ordering {
            theorem: "PE vs PE, equal θ",
            message: format!("requires λ₁ ≤ λ₂ (got {lambda1} > {lambda2})"),
        });
    }
    let v = (lambda2 / lambda1 - 1.0) * (lambda1 * theta / lambda2 + 3.0);
    Ok(BoundReport::assemble(
        FormulaId::EqualTheta,
        &[("theta", theta), ("lambda1", lambda1), ("lambda2", lambda2)],
        conv,
        vec![("rate_gap".into(), conv.coefficient() * v)],
    ))
}

/// PE(θ₁, λ₁) against GPE(θ₂, λ₂, β) with `λ₁ ≤ λ₂`.
pub fn bound_gpe_pe(p1: &PEParams, p2: &GPEParams, conv: NormConvention, mean_mode: MeanMode) -> Result<BoundReport> {
    let (t1, l1) = (p1.theta(), p1.lambda());
    let (t2, l2, b) = (p2.theta(), p2.lambda(), p2.beta());
    if l2 < l1 {
        return Err(Error::Ordering {
            theorem: "GPE vs PE",
            message: format!("requires λ₂ ≥ λ₁ (got {l2} < {l1}); use the triangle bound instead"),
        });
    }
    let mean = match mean_mode {
        MeanMode::Lemma => p2.mean_upper(),
        MeanMode::Numeric => p2.mean()?,
    };
    let c = conv.coefficient();
    let beta_term = l2 / l1 * (b - 1.0).abs();
    let ratio = (l2 * t2 * b / (l1 * t1) - 1.0).abs();
    let rate = (l2 / l1 - 1.0) * (l1 * mean + 2.0);
    Ok(BoundReport::assemble(
        FormulaId::Thm33,
        &[
            ("theta1", t1),
            ("lambda1", l1),
            ("theta2", t2),
            ("lambda2", l2),
            ("beta", b),
            ("mean_x2", mean),
        ],
        conv,
        vec![
            ("beta_gap".into(), c * beta_term),
            ("shape_ratio".into(), c * ratio),
            ("rate_gap".into(), c * rate),
        ],
    ))
}

/// GPE(θ, λ, β) against PE(θ, λ) for `β ≥ 1`: `‖h̃‖|β - 1|`.
pub fn bound_gpe_pe_equal(theta: f64, lambda: f64, beta: f64, conv: NormConvention) -> Result<BoundReport> {
    GPEParams::new(theta, lambda, beta)?;
    if beta < 1.0 {
        return Err(Error::Hypothesis {
            theorem: "GPE vs PE, equal parameters",
            message: format!("requires β ≥ 1 (got {beta}); use the general GPE vs PE bound"),
        });
    }
    Ok(BoundReport::assemble(
        FormulaId::CorGpeEqual,
        &[("theta", theta), ("lambda", lambda), ("beta", beta)],
        conv,
        vec![("beta_gap".into(), conv.coefficient() * (beta - 1.0).abs())],
    ))
}

/// GPE(θ₂, λ₂, β) against PE(θ₁, λ₁) through PE(θ₂, λ₂): the equal-parameter
/// GPE bound plus the PE-vs-PE bound, with the PE pair ordered by rate.
///
/// With equal rates both orderings are admissible and the smaller is used.
pub fn bound_gpe_pe_triangle(p1: &PEParams, p2: &GPEParams, conv: NormConvention) -> Result<BoundReport> {
    let (t1, l1) = (p1.theta(), p1.lambda());
    let (t2, l2, b) = (p2.theta(), p2.lambda(), p2.beta());
    if b < 1.0 {
        return Err(Error::Hypothesis {
            theorem: "GPE vs PE, triangle",
            message: format!("the first leg needs β ≥ 1 (got {b}); this case is not covered"),
        });
    }
    let leg1 = bound_gpe_pe_equal(t2, l2, b, conv)?;
    let mid = p2.base();
    let leg2 = if l2 < l1 {
        bound_pe_pe(&mid, p1, conv)?
    } else if l1 < l2 {
        bound_pe_pe(p1, &mid, conv)?
    } else {
        let a = bound_pe_pe(&mid, p1, conv)?;
        let c = bound_pe_pe(p1, &mid, conv)?;
        if a.value <= c.value {
            a
        } else {
            c
        }
    };
    let mut terms: Vec<(String, f64)> = Vec::new();
    for t in &leg1.terms {
        terms.push((format!("gpe_leg.{}", t.name), t.value));
    }
    for t in &leg2.terms {
        terms.push((format!("pe_leg.{}", t.name), t.value));
    }
    Ok(BoundReport::assemble(
        FormulaId::Triangle,
        &[("theta1", t1), ("lambda1", l1), ("theta2", t2), ("lambda2", l2), ("beta", b)],
        conv,
        terms,
    ))
}

fn pg_terms(theta: f64, lambda: f64, n: f64, conv: NormConvention, theorem: &'static str) -> Result<Vec<(String, f64)>> {
    check_positive("theta", theta)?;
    check_positive("lambda", lambda)?;
    if !(n > lambda) || !n.is_finite() {
        return Err(Error::Domain(format!("{theorem}: requires n > λ (got n = {n}, λ = {lambda})")));
    }
    let hp = conv.h_prime(theorem)?;
    let ht = conv.coefficient();
    let (t, l) = (theta, lambda);
    let r = l / n;
    let q = 1.0 - r;
    let e1 = (t * l / n).exp();
    let e2 = (t * l * l / (n * (n - l))).exp();
    let pref = e1 / (n * q * q);
    let theta_bracket = 10.5
        + 3.0 * (-t * l / n).exp() * q
        + (8.0 + 3.0 * e2) / norm(t)
        + (1.0 + e1 + 9.0 * e2) / (3.0 * q)
        + 1.5 / (q * q)
        + 8.0 / (3.0 * q.powi(4));
    let lambda_bracket = 5.5 + 2.0 * (r - 2.0).abs() * (-t * l / n).exp() + 6.0 * e1 / q + 4.0 / (q * q);
    Ok(vec![
        ("shape_bracket".into(), pref * t * l * theta_bracket * ht),
        ("rate_bracket".into(), pref * l * lambda_bracket * ht),
        ("derivative".into(), pref * 0.5 * hp),
    ])
}

/// Scaled PG(θ, λ/n)/n against PE(θ, λ); decays like `1/n`.
pub fn bound_pg_pe(theta: f64, lambda: f64, n: f64, conv: NormConvention) -> Result<BoundReport> {
    let terms = pg_terms(theta, lambda, n, conv, "scaled PG vs PE")?;
    Ok(BoundReport::assemble(
        FormulaId::Thm34,
        &[("theta", theta), ("lambda", lambda), ("n", n)],
        conv,
        terms,
    ))
}

/// Maxima of first pattern occurrences against PE(θ, λ): the geometric
/// coupling term `2θλ(k - 1)/(n(1 - e^{-θ}))` plus the scaled PG bound.
pub fn bound_pattern(theta: f64, lambda: f64, n: f64, k: u32, conv: NormConvention) -> Result<BoundReport> {
    if k < 1 {
        return Err(Error::Domain("pattern length k must be at least 1".into()));
    }
    let mut terms = vec![(
        "pattern_coupling".to_string(),
        2.0 * theta * lambda * (k as f64 - 1.0) / (n * norm(theta)),
    )];
    terms.extend(pg_terms(theta, lambda, n, conv, "pattern maxima vs PE")?);
    Ok(BoundReport::assemble(
        FormulaId::PatternCor,
        &[("theta", theta), ("lambda", lambda), ("n", n), ("k", k as f64)],
        conv,
        terms,
    ))
}

/// Both sides of the second-difference inequality used for the PG comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixACheck {
    pub theta: f64,
    pub lambda: f64,
    pub n: f64,
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Left side: `|2(λ²θ/n²)K(θe^{-λz} - 1) - k|`, `K = e^{-λz - θe^{-λz}}` and
/// `k = e^{-aq} - e^{-a} - e^{-a/q} + e^{-a/q²}` with `a = θq^{nz}`.
///
/// `k` is evaluated as `e^{-a}expm1(aλ/n) + e^{-a/q}expm1(-aλ/(nq²))`; the
/// plain four-exponential form cancels to nothing for large `n`.
pub fn appendix_a_lhs(theta: f64, lambda: f64, n: f64, z: f64) -> f64 {
    let (t, l) = (theta, lambda);
    let q = 1.0 - l / n;
    let a = t * (n * z * (-l / n).ln_1p()).exp();
    let w = (-l * z).exp();
    let kern = (-l * z - t * w).exp();
    let main = 2.0 * l * l * t / (n * n) * kern * (t * w - 1.0);
    let k = (-a).exp() * (a * l / n).exp_m1() + (-a / q).exp() * (-a * l / (n * q * q)).exp_m1();
    (main - k).abs()
}

/// Right side: the three-group bound.
pub fn appendix_a_rhs(theta: f64, lambda: f64, n: f64, z: f64) -> f64 {
    let (t, l) = (theta, lambda);
    let q = 1.0 - l / n;
    let qi = 1.0 / q;
    let w = (-l * z).exp();
    let kern = (-l * z - t * w).exp();
    let kern2 = (-2.0 * l * z - t * w).exp();
    let e = (t * l / n).exp();
    let n3 = n * n * n;
    let g1 = 2.0 * l * l * t / (n * n) * (1.0 - qi * qi).abs() * (kern * (t * w - 1.0)).abs();
    let inner = qi / 3.0 * (t + t * e + 6.0 * e + 12.0 * qi + 8.0 * t * qi.powi(3)) + 2.0 * (t + 2.0 * l * z);
    let g2 = t * t * l.powi(3) / n3 * qi * qi * e * inner * kern2;
    let g3 = 2.0 * t * l.powi(3) / n3 * qi * qi * e * (qi * e + l * z + t) * kern;
    g1 + g2 + g3
}

pub fn verify_inequality_appendix_a(theta: f64, lambda: f64, n: f64, z: f64) -> Result<AppendixACheck> {
    check_positive("theta", theta)?;
    check_positive("lambda", lambda)?;
    check_positive("z", z)?;
    if !(n > lambda) {
        return Err(Error::Domain(format!("requires n > λ (got n = {n}, λ = {lambda})")));
    }
    let lhs = appendix_a_lhs(theta, lambda, n, z);
    let rhs = appendix_a_rhs(theta, lambda, n, z);
    Ok(AppendixACheck {
        theta,
        lambda,
        n,
        z,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// Least-squares slope of `ln lhs` against `ln n`.
pub fn appendix_a_decay_slope(theta: f64, lambda: f64, z: f64, ns: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| (n.ln(), appendix_a_lhs(theta, lambda, n, z).ln()))
        .filter(|p| p.1.is_finite())
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(t: f64, l: f64) -> PEParams {
        PEParams::new(t, l).unwrap()
    }

    #[test]
    fn identical_laws_give_zero() {
        let p = pe(1.3, 0.7);
        assert_eq!(bound_pe_pe(&p, &p, NormConvention::dtv()).unwrap().value, 0.0);
        let g = GPEParams::new(1.3, 0.7, 1.0).unwrap();
        assert_eq!(bound_gpe_pe(&p, &g, NormConvention::dtv(), MeanMode::Lemma).unwrap().value, 0.0);
        assert_eq!(bound_gpe_pe_equal(1.3, 0.7, 1.0, NormConvention::dtv()).unwrap().value, 0.0);
    }

    #[test]
    fn equal_theta_matches_general_form() {
        for &(t, l1, l2) in &[(1.0, 1.0, 1.1), (3.0, 0.2, 0.9), (0.4, 2.0, 2.5)] {
            let a = bound_pe_pe(&pe(t, l1), &pe(t, l2), NormConvention::dtv()).unwrap().value;
            let b = bound_pe_pe_equal_theta(t, l1, l2, NormConvention::dtv()).unwrap().value;
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn ordering_errors() {
        assert!(matches!(
            bound_pe_pe(&pe(1.0, 2.0), &pe(1.0, 1.0), NormConvention::dtv()),
            Err(Error::Ordering { .. })
        ));
        let g = GPEParams::new(1.0, 0.5, 2.0).unwrap();
        assert!(matches!(
            bound_gpe_pe(&pe(1.0, 1.0), &g, NormConvention::dtv(), MeanMode::Lemma),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(
            bound_gpe_pe_equal(1.0, 1.0, 0.5, NormConvention::dtv()),
            Err(Error::Hypothesis { .. })
        ));
        let g = GPEParams::new(1.0, 0.5, 0.5).unwrap();
        assert!(bound_gpe_pe_triangle(&pe(1.0, 1.0), &g, NormConvention::dtv()).is_err());
    }

    #[test]
    fn equal_rates_reduce_third_term() {
        let g = GPEParams::new(2.0, 0.5, 1.7).unwrap();
        let r = bound_gpe_pe(&pe(3.0, 0.5), &g, NormConvention::raw(1.0, None), MeanMode::Lemma).unwrap();
        let expect = 0.7 + (2.0 * 1.7 / 3.0 - 1.0f64).abs();
        assert!((r.value - expect).abs() < 1e-14);
    }

    #[test]
    fn corollary_and_triangle() {
        assert_eq!(bound_gpe_pe_equal(1.0, 1.0, 2.0, NormConvention::raw(1.0, None)).unwrap().value, 1.0);
        let g = GPEParams::new(2.0, 0.5, 1.7).unwrap();
        let tri = bound_gpe_pe_triangle(&pe(2.0, 0.5), &g, NormConvention::dtv()).unwrap();
        assert!((tri.value - 0.7).abs() < 1e-14);
    }

    #[test]
    fn pg_bound_rate_and_pattern_term() {
        let c = NormConvention::dbw();
        for &n in &[1e3, 1e4] {
            let r = bound_pg_pe(1.0, 1.0, n, c).unwrap().value / bound_pg_pe(1.0, 1.0, 2.0 * n, c).unwrap().value;
            assert!((r - 2.0).abs() < 0.1);
        }
        let v = bound_pg_pe(1.0, 1.0, 100.0, c).unwrap().value;
        assert!(v > 0.0 && v.is_finite());
        assert_eq!(bound_pattern(1.0, 1.0, 100.0, 1, c).unwrap().value, v);
        let p3 = bound_pattern(1.0, 1.0, 100.0, 3, c).unwrap();
        assert!((p3.terms[0].value - 0.063_279_4).abs() < 1e-6);
        assert!(bound_pg_pe(1.0, 1.0, 100.0, NormConvention::dtv()).is_err());
        assert!(bound_pg_pe(1.0, 2.0, 2.0, c).is_err());
    }

    #[test]
    fn reports_resum() {
        let g = GPEParams::new(16.97757, 0.02694903, 2.902245).unwrap();
        let r = bound_gpe_pe_triangle(&pe(49.00702, 0.02691199), &g, NormConvention::dtv()).unwrap();
        assert!(r.resum_error() < 1e-12);
        let r = bound_pattern(2.0, 1.5, 300.0, 4, NormConvention::dbw_literal()).unwrap();
        assert!(r.resum_error() < 1e-12);
    }

    #[test]
    fn appendix_a_spot_values() {
        let c = verify_inequality_appendix_a(1.0, 1.0, 50.0, 1.0).unwrap();
        assert!(c.holds);
        let far = verify_inequality_appendix_a(1.0, 1.0, 50.0, 60.0).unwrap();
        assert!(far.lhs < 1e-20 && far.rhs < 1e-20);
    }
}
