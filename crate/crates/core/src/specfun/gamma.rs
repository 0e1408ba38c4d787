//! Gamma-function helpers on top of `statrs`.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    (PI * r).sin()
}

/// `1 / Gamma(x)`, entire in `x`: exactly zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if (1.0..=30.0).contains(&x) && x == x.floor() {
        // exact for small integers: 1/(x-1)!
        let mut f = 1.0;
        for k in 2..(x as u32) {
            f *= k as f64;
        }
        return 1.0 / f;
    }
    if x < 0.5 {
        // reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        let s = sin_pi(x);
        let g = gamma(1.0 - x);
        if g.is_infinite() {
            // Gamma(1 - x) overflows only for x < -170; the product is huge
            // but finite in exact arithmetic. Go through logs.
            let lg = ln_gamma(1.0 - x);
            return s.signum() * (s.abs().ln() + lg - PI.ln()).exp();
        }
        s * g / PI
    } else if x > 171.0 {
        (-ln_gamma(x)).exp()
    } else {
        1.0 / gamma(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recip_gamma_known_values() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!((recip_gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((recip_gamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
        // Gamma(-0.5) = -2 sqrt(pi)
        assert!((recip_gamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        // Gamma(1.5) = sqrt(pi)/2
        assert!((gamma(1.5) / (PI.sqrt() / 2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sin_pi_is_exact_on_integers() {
        for k in -5..5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
    }
}
