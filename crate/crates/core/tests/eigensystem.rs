use std::f64::consts::PI;

use fracinv_core::eigensystem::EigenMode;
use fracinv_core::specfun::bessel_j;
use fracinv_core::specfun::quadrature::gauss_legendre;
use fracinv_core::{build_basis, eigenfunction_value, Phase};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `∫_Ω f g` on the unit disc: trapezoid in θ (exact for the angular
/// harmonics involved) and composite Gauss-Legendre in r.
fn disc_inner(a: &EigenMode, b: &EigenMode) -> f64 {
    let n_theta = 4 * (a.m.max(b.m) as usize + 2);
    let rule = gauss_legendre(16);
    let panels = 12;
    let mut total = 0.0;
    for p in 0..panels {
        let (lo, hi) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            let mut ring = 0.0;
            for j in 0..n_theta {
                let t = 2.0 * PI * j as f64 / n_theta as f64;
                ring += eigenfunction_value(a, r, t) * eigenfunction_value(b, r, t);
            }
            total += 0.5 * (hi - lo) * w * r * ring * 2.0 * PI / n_theta as f64;
        }
    }
    total
}

#[test]
fn modes_are_normalized() {
    let basis = build_basis(300.0).unwrap();
    for md in &basis.modes {
        let n = disc_inner(md, md);
        assert!((n - 1.0).abs() < 1e-6, "mode {} (m {}, k {}): {n}", md.n, md.m, md.k);
    }
}

#[test]
fn random_pairs_are_orthogonal() {
    let basis = build_basis(300.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let pair: Vec<&EigenMode> = basis.modes.choose_multiple(&mut rng, 2).collect();
        let v = disc_inner(pair[0], pair[1]);
        assert!(v.abs() < 1e-6, "modes {} and {}: {v}", pair[0].n, pair[1].n);
    }
}

#[test]
fn ordering_pairing_and_flux_coefficients() {
    let basis = build_basis(2000.0).unwrap();
    assert!(basis.modes.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    for (i, md) in basis.modes.iter().enumerate() {
        assert_eq!(md.n, i + 1);
        assert!(md.lambda > 0.0);
        assert!(md.b.is_finite());
        assert_eq!(md.b.signum(), (1.0 / md.j_next).signum());
        let expect = 1.0 / (md.eta * PI * md.lambda.powf(1.5) * md.j_next);
        assert!((md.b - expect).abs() <= 1e-14 * expect.abs());
        // |J_{m+1}(j_{m,k})| ~ sqrt(2 / (π j)), so this stays moderate
        assert!((md.b * md.lambda.powf(1.5)).abs() < 10.0);
        if md.m == 0 {
            assert_eq!(md.phase, Phase::Cos);
            assert_eq!(md.eta, 1.0);
        }
    }
    let cos = basis.modes.iter().filter(|m| m.m > 0 && m.phase == Phase::Cos).count();
    let sin = basis.modes.iter().filter(|m| m.phase == Phase::Sin).count();
    assert_eq!(cos, sin);
    for md in basis.modes.iter().filter(|m| m.phase == Phase::Sin) {
        let partner = basis
            .modes
            .iter()
            .find(|o| o.m == md.m && o.k == md.k && o.phase == Phase::Cos)
            .expect("cosine partner");
        assert_eq!(partner.lambda, md.lambda);
    }
}

#[test]
fn weyl_law_counts() {
    // N(Λ) ~ |Ω| Λ / (4π) = Λ / 4 on the unit disc
    for lambda_max in [100.0, 500.0, 1000.0, 2000.0] {
        let n = build_basis(lambda_max).unwrap().len() as f64;
        let weyl = lambda_max / 4.0;
        assert!(n > weyl / 2.0 && n < 2.0 * weyl, "Λ {lambda_max}: {n} modes");
    }
}

#[test]
fn basis_contains_exactly_the_zeros_below_the_cutoff() {
    // count sign changes of J_m on a fine grid as an independent oracle
    let lambda_max: f64 = 400.0;
    let x_max = lambda_max.sqrt();
    let basis = build_basis(lambda_max).unwrap();
    for m in 0..30u32 {
        let steps = 20_000;
        let mut count = 0;
        let mut prev = bessel_j(m, 1e-9).unwrap();
        for i in 1..=steps {
            let x = x_max * i as f64 / steps as f64;
            let v = bessel_j(m, x).unwrap();
            if prev != 0.0 && v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
        let found = basis
            .modes
            .iter()
            .filter(|md| md.m == m && md.phase == Phase::Cos)
            .count();
        assert_eq!(found, count, "order {m}");
        if count == 0 {
            assert!(m > basis.degree_max);
        }
    }
}

#[test]
fn eigenfunctions_vanish_on_the_boundary_and_solve_the_eigenproblem() {
    let basis = build_basis(200.0).unwrap();
    let h = 1e-4;
    for md in basis.modes.iter().step_by(5) {
        for t in [0.0, 1.3, 4.0] {
            assert!(eigenfunction_value(md, 1.0, t).abs() < 1e-12);
            // polar Laplacian by central differences at an interior point
            let (r, f) = (0.6, |r: f64, t: f64| eigenfunction_value(md, r, t));
            let u = f(r, t);
            let urr = (f(r + h, t) - 2.0 * u + f(r - h, t)) / (h * h);
            let ur = (f(r + h, t) - f(r - h, t)) / (2.0 * h);
            let utt = (f(r, t + h) - 2.0 * u + f(r, t - h)) / (h * h);
            let lap = urr + ur / r + utt / (r * r);
            let scale = md.lambda * md.weight;
            assert!((lap + md.lambda * u).abs() < 1e-4 * scale, "mode {}", md.n);
        }
    }
}
