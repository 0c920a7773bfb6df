use approx::assert_relative_eq;
use pestein::bounds::{bound_gpe_pe, bound_pe_pe, bound_pg_pe, MeanMode, NormConvention};
use pestein::distance::{dk_continuous, dtv_continuous, w1_cdf};
use pestein::distributions::{GPEParams, PEParams, PGParams};
use proptest::prelude::*;

fn pe() -> impl Strategy<Value = PEParams> {
    (0.05f64..20.0, 0.1f64..5.0).prop_map(|(t, l)| PEParams::new(t, l).unwrap())
}

fn gpe() -> impl Strategy<Value = GPEParams> {
    (0.05f64..20.0, 0.1f64..5.0, 0.3f64..4.0).prop_map(|(t, l, b)| GPEParams::new(t, l, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pe_quantile_inverts_cdf(p in pe(), u in 1e-6f64..0.999_999) {
        let x = p.quantile(u).unwrap();
        prop_assert!((p.cdf(x) - u).abs() < 1e-9);
        prop_assert!((p.cdf(x) + p.sf(x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gpe_quantile_inverts_cdf(g in gpe(), u in 1e-6f64..0.999_999) {
        let x = g.quantile(u).unwrap();
        prop_assert!((g.cdf(x) - u).abs() < 1e-9);
    }

    #[test]
    fn gpe_with_unit_beta_is_pe(p in pe(), x in 0.0f64..10.0) {
        let g = GPEParams::new(p.theta(), p.lambda(), 1.0).unwrap();
        prop_assert!((g.cdf(x) - p.cdf(x)).abs() < 1e-12);
        assert_relative_eq!(g.pdf(x), p.pdf(x), max_relative = 1e-10, epsilon = 1e-300);
    }

    #[test]
    fn pg_cdf_is_monotone(theta in 0.05f64..10.0, prob in 0.01f64..0.99, y in 0u64..200) {
        let g = PGParams::new(theta, prob).unwrap();
        prop_assert!(g.cdf(y as f64) <= g.cdf((y + 1) as f64) + 1e-15);
        prop_assert!(g.pmf(y + 1).unwrap() >= 0.0);
    }

    #[test]
    fn dtv_is_a_metric(a in pe(), b in pe(), c in pe()) {
        let ab = dtv_continuous(&a, &b).unwrap();
        let ba = dtv_continuous(&b, &a).unwrap();
        let ac = dtv_continuous(&a, &c).unwrap().value;
        let cb = dtv_continuous(&c, &b).unwrap().value;
        let tol = 1e-8;
        prop_assert!((ab.value - ba.value).abs() < tol);
        prop_assert!((0.0..=1.0 + tol).contains(&ab.value));
        prop_assert!(ab.value <= ac + cb + tol);
    }

    #[test]
    fn kolmogorov_below_total_variation(a in pe(), b in gpe()) {
        let tv = dtv_continuous(&a, &b).unwrap().value;
        let k = dk_continuous(&a, &b).value;
        prop_assert!(k <= tv + 1e-8, "dK {k} > dTV {tv}");
    }

    #[test]
    fn wasserstein_symmetric(a in pe(), b in pe()) {
        let ab = w1_cdf(&a, &b).unwrap().value;
        let ba = w1_cdf(&b, &a).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-7 * ab.max(1.0));
    }

    #[test]
    fn pe_bound_resums_and_dominates(a in pe(), b in pe()) {
        let (p1, p2) = if a.lambda() <= b.lambda() { (a, b) } else { (b, a) };
        let r = bound_pe_pe(&p1, &p2, NormConvention::dtv()).unwrap();
        prop_assert!(r.resum_error() < 1e-12);
        let d = dtv_continuous(&p1, &p2).unwrap().value;
        prop_assert!(d <= r.value + 1e-6 * r.value.max(1.0), "dTV {d} > bound {}", r.value);
    }

    #[test]
    fn gpe_bound_resums_and_dominates(theta1 in 0.05f64..20.0, l1 in 0.1f64..5.0, g in gpe()) {
        prop_assume!(l1 <= g.lambda());
        let p = PEParams::new(theta1, l1).unwrap();
        let r = bound_gpe_pe(&p, &g, NormConvention::dtv(), MeanMode::Lemma).unwrap();
        prop_assert!(r.resum_error() < 1e-12);
        let d = dtv_continuous(&p, &g).unwrap().value;
        prop_assert!(d <= r.value + 1e-6 * r.value.max(1.0));
    }

    #[test]
    fn pg_bound_decreases_in_n(theta in 0.1f64..10.0, lambda in 0.1f64..5.0, n in 10.0f64..1e6) {
        let conv = NormConvention::dbw();
        let a = bound_pg_pe(theta, lambda, n, conv).unwrap().value;
        let b = bound_pg_pe(theta, lambda, 2.0 * n, conv).unwrap().value;
        prop_assert!(b < a);
    }
}
