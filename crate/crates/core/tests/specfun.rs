use fracinv_core::specfun::quadrature::{composite_gauss, gauss_legendre};
use fracinv_core::specfun::{bessel_j, bessel_zero, ml_decay, ml_time_derivative, phi_integral, MittagLeffler};
use proptest::prelude::*;

const ALPHAS: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// Largest `s` with `exp(-s)` a normal double; `E_{1,1}(-s)` underflows beyond.
const EXP_UNDERFLOW: f64 = 700.0;

fn upper(alpha: f64) -> f64 {
    if alpha == 1.0 {
        EXP_UNDERFLOW
    } else {
        1e6
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decay_is_positive_and_strictly_decreasing(
        ai in 0..ALPHAS.len(),
        u in 0.0f64..1.0,
        ratio in 1.0001f64..10.0,
    ) {
        let alpha = ALPHAS[ai];
        let ml = MittagLeffler::new(alpha, 1.0).unwrap();
        // log-uniform on [1e-6, upper]
        let top = upper(alpha) / ratio;
        let s1 = 1e-6 * (top / 1e-6).powf(u);
        let s2 = s1 * ratio;
        let (e1, e2) = (ml.eval(-s1).unwrap(), ml.eval(-s2).unwrap());
        prop_assert!(e2 > 0.0, "E({}) = {e2}", -s2);
        prop_assert!(e1 > e2, "alpha {alpha}: E(-{s1}) = {e1} <= E(-{s2}) = {e2}");
    }

    #[test]
    fn time_derivative_matches_central_difference(
        alpha in 0.05f64..=1.0,
        lambda in 1.0f64..100.0,
        lt in (0.01f64).ln()..(10.0f64).ln(),
    ) {
        let t = lt.exp();
        let h = 1e-4 * t;
        let ml = MittagLeffler::new(alpha, 1.0).unwrap();
        let e = |t: f64| ml.eval(-lambda * t.powf(alpha)).unwrap();
        let fd = (e(t + h) - e(t - h)) / (2.0 * h);
        let d = ml_time_derivative(alpha, lambda, t).unwrap();
        prop_assert!(
            (d - fd).abs() <= 1e-5 * fd.abs() + 1e-300,
            "alpha {alpha} lambda {lambda} t {t}: {d} vs {fd}"
        );
    }

    #[test]
    fn phi_integral_order_zero_matches_quadrature(lambda in 1.0f64..2000.0, x in 0.0f64..=1.0) {
        let y = x * lambda.sqrt();
        let rule = gauss_legendre(20);
        let panels = 1 + (y / 2.0).ceil() as usize;
        let oracle = composite_gauss(|r| r * bessel_j(0, r).unwrap(), 0.0, y, panels, &rule);
        let v = phi_integral(0, lambda, x).unwrap();
        prop_assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn phi_integral_higher_orders_match_quadrature(m in 1u32..12, lambda in 1.0f64..2000.0, x in 0.0f64..=1.0) {
        let y = x * lambda.sqrt();
        let rule = gauss_legendre(20);
        let panels = 1 + (y / 2.0).ceil() as usize;
        let oracle = composite_gauss(|r| r * bessel_j(m, r).unwrap(), 0.0, y, panels, &rule);
        let v = phi_integral(m, lambda, x).unwrap();
        prop_assert!((v - oracle).abs() < 1e-10, "m {m}: {v} vs {oracle}");
    }
}

#[test]
fn bessel_zero_residuals_and_interlacing() {
    for m in 0..=30u32 {
        for k in 1..=30u32 {
            let z = bessel_zero(m, k).unwrap();
            assert_eq!((z.degree, z.index), (m, k));
            let r = bessel_j(m, z.value).unwrap();
            assert!(r.abs() < 1e-12, "J_{m}(j_{m},{k}) = {r}");
            let next_order = bessel_zero(m + 1, k).unwrap().value;
            let next_index = bessel_zero(m, k + 1).unwrap().value;
            assert!(z.value < next_order && next_order < next_index, "interlacing at ({m}, {k})");
        }
    }
}

#[test]
fn bessel_j_satisfies_three_term_recurrence() {
    // J_{m-1}(x) + J_{m+1}(x) = (2m/x) J_m(x)
    for &x in &[0.3, 2.0, 7.5, 31.0, 60.0] {
        for m in 1..25u32 {
            let lhs = bessel_j(m - 1, x).unwrap() + bessel_j(m + 1, x).unwrap();
            let rhs = 2.0 * m as f64 / x * bessel_j(m, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "x {x} m {m}: {lhs} vs {rhs}");
        }
    }
}

proptest! {
    #[test]
    fn decay_complements_the_mittag_leffler_function(alpha in 0.05f64..=1.0, lambda in 0.5f64..50.0, t in 0.0f64..3.0) {
        let e = MittagLeffler::new(alpha, 1.0).unwrap().eval(-lambda * t.powf(alpha)).unwrap();
        let d = ml_decay(alpha, lambda, t).unwrap();
        prop_assert!((d + e - 1.0).abs() < 1e-12, "{d} + {e}");
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
