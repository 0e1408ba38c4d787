//! Bessel functions of the first kind of integer order, their positive
//! zeros, and the radial moments `int_0^y rho J_m(rho) d rho`.

use std::f64::consts::PI;

use super::quadrature::{composite_gauss, gauss_legendre};
use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: u32 = 200;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 500.0;

/// `J_m(x)` for `0 <= m <= 200`, `0 <= x <= 500`; absolute error ~1e-15.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    check_range(m, x)?;
    let mut scratch = BesselScratch::default();
    Ok(scratch.orders(x, m as usize)[m as usize])
}

fn check_range(m: u32, x: f64) -> Result<()> {
    if m > MAX_ORDER {
        return Err(Error::domain("bessel_j", format!("order {m} > {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(
            "bessel_j",
            format!("argument {x} outside [0, {MAX_ARGUMENT}]"),
        ));
    }
    Ok(())
}

/// Reusable buffers for Miller's backward recurrence.
///
/// One pass produces `J_0(x) ..= J_n(x)` together with `int_0^x J_0`, which is
/// what the moment recurrences need.
#[derive(Debug, Default, Clone)]
pub struct BesselScratch {
    seq: Vec<f64>,
    int_j0: f64,
}

impl BesselScratch {
    /// Fills and returns `J_0(x) ..= J_n(x)` (length `n + 1`).
    pub fn orders(&mut self, x: f64, n: usize) -> &[f64] {
        self.fill(x, n);
        &self.seq[..=n]
    }

    /// `int_0^x J_0(t) dt` from the last call to `orders`.
    pub fn integral_j0(&self) -> f64 {
        self.int_j0
    }

    fn fill(&mut self, x: f64, n: usize) {
        if x < 1e-6 {
            // two-term ascending series is exact to rounding here
            self.seq.clear();
            self.seq.resize(n + 2, 0.0);
            let h = 0.5 * x;
            let mut lead = 1.0; // (x/2)^k / k!
            for k in 0..=n + 1 {
                let kf = k as f64;
                if k > 0 {
                    lead *= h / kf;
                }
                self.seq[k] = lead * (1.0 - h * h / (kf + 1.0));
                if lead == 0.0 {
                    break;
                }
            }
            self.int_j0 = x * (1.0 - x * x / 12.0);
            return;
        }

        let top = n.max(x.ceil() as usize);
        let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
        start += start % 2;
        self.seq.clear();
        self.seq.resize(start + 2, 0.0);

        let two_over_x = 2.0 / x;
        let mut next = 0.0; // j_{k+1}
        let mut cur = 1e-30; // j_k
        self.seq[start] = cur;
        let mut even_sum = 0.0;
        let mut odd_sum = 0.0;
        if start.is_multiple_of(2) {
            even_sum += cur;
        } else {
            odd_sum += cur;
        }
        for k in (1..=start).rev() {
            let prev = k as f64 * two_over_x * cur - next;
            next = cur;
            cur = prev;
            let idx = k - 1;
            self.seq[idx] = cur;
            if idx % 2 == 0 {
                if idx > 0 {
                    even_sum += cur;
                }
            } else {
                odd_sum += cur;
            }
            if cur.abs() > 1e250 {
                let s = 1e-250;
                for v in &mut self.seq[idx..=start] {
                    *v *= s;
                }
                cur *= s;
                next *= s;
                even_sum *= s;
                odd_sum *= s;
            }
        }
        // J_0 + 2 sum_{k>=1} J_{2k} = 1
        let norm = self.seq[0] + 2.0 * even_sum;
        let inv = 1.0 / norm;
        for v in &mut self.seq[..=n + 1] {
            *v *= inv;
        }
        // int_0^x J_0 = 2 sum_k J_{2k+1}
        self.int_j0 = 2.0 * odd_sum * inv;
    }

    /// `(J_m(y), Phi_m(y))` with `Phi_m(y) = int_0^y rho J_m(rho) d rho`,
    /// from one Miller pass plus upward moment recurrences.
    pub fn value_and_moment(&mut self, y: f64, m: usize) -> (f64, f64) {
        self.fill(y, m + 1);
        let j = &self.seq;
        if m == 0 {
            return (j[0], y * j[1]);
        }
        // K_j = int_0^y J_j,  I_j = int_0^y t J_j(t) dt
        let mut k_prev = self.int_j0; // K_0
        let mut k_cur = 1.0 - j[0]; // K_1
        let mut i_prev = y * j[1]; // I_0
        let mut i_cur = self.int_j0 - y * j[0]; // I_1
        for (order, &jo) in j.iter().enumerate().take(m).skip(1) {
            let i_next = -i_prev + 2.0 * order as f64 * k_cur;
            let k_next = k_prev - 2.0 * jo;
            i_prev = i_cur;
            i_cur = i_next;
            k_prev = k_cur;
            k_cur = k_next;
        }
        (j[m], i_cur)
    }
}

/// A positive zero `j_{m,k}` of `J_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselZero {
    pub degree: u32,
    pub index: u32,
    pub value: f64,
}

/// The `k`-th positive zero of `J_m` (`k >= 1`).
pub fn bessel_zero(m: u32, k: u32) -> Result<BesselZero> {
    if k == 0 {
        return Err(Error::InvalidInput("zero index k starts at 1".into()));
    }
    if m > MAX_ORDER {
        return Err(Error::domain("bessel_zero", format!("order {m} > {MAX_ORDER}")));
    }
    // interlacing needs k + m zeros of J_0
    let mut level = zeros_of_j0(k as usize + m as usize)?;
    for order in 1..=m {
        level = next_level(order, &level)?;
    }
    Ok(BesselZero {
        degree: m,
        index: k,
        value: level[k as usize - 1],
    })
}

/// All zeros `j_{m,k} <= x_max`, grouped by degree `m = 0, 1, ...` (only
/// degrees with at least one zero below `x_max` are returned).
pub fn zeros_below(x_max: f64) -> Result<Vec<Vec<f64>>> {
    if !(x_max > 0.0 && x_max <= MAX_ARGUMENT) {
        return Err(Error::domain("zeros_below", format!("x_max = {x_max}")));
    }
    // j_{m,1} > m, so degrees above x_max contribute nothing; each level of
    // the interlacing ladder loses one bracket, about pi of range.
    let m_cap = x_max.ceil() as usize + 1;
    let count0 = ((x_max + (m_cap as f64 + 2.0) * PI) / PI).ceil() as usize + 2;
    let mut level = zeros_of_j0(count0)?;
    let mut out = Vec::new();
    for order in 0..=m_cap {
        if order > 0 {
            level = next_level(order as u32, &level)?;
        }
        let below: Vec<f64> = level.iter().copied().take_while(|&z| z <= x_max).collect();
        if below.is_empty() {
            break;
        }
        if below.len() == level.len() {
            return Err(Error::Internal(format!(
                "zero ladder too short at degree {order}"
            )));
        }
        out.push(below);
    }
    Ok(out)
}

fn zeros_of_j0(count: usize) -> Result<Vec<f64>> {
    let mut scratch = BesselScratch::default();
    (1..=count)
        .map(|k| {
            let seed = mcmahon(0, k);
            refine_zero(0, seed - 0.5, seed + 0.5, &mut scratch)
        })
        .collect()
}

fn next_level(order: u32, prev: &[f64]) -> Result<Vec<f64>> {
    let mut scratch = BesselScratch::default();
    prev.windows(2)
        .map(|w| refine_zero(order, w[0], w[1], &mut scratch))
        .collect()
}

/// McMahon's large-zero expansion.
fn mcmahon(m: u32, k: usize) -> f64 {
    let mu = 4.0 * (m as f64).powi(2);
    let b = (k as f64 + 0.5 * m as f64 - 0.25) * PI;
    let e = 8.0 * b;
    b - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

fn refine_zero(m: u32, a: f64, b: f64, scratch: &mut BesselScratch) -> Result<f64> {
    let mm = m as usize;
    let mut eval = |x: f64| scratch.orders(x, mm + 1).to_vec();
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = eval(lo)[mm];
    let f_hi = eval(hi)[mm];
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::Internal(format!(
            "no sign change of J_{m} on [{a}, {b}]"
        )));
    }
    while hi - lo > 1e-7 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)[mm];
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid * f_lo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let j = eval(x);
        let deriv = if mm == 0 {
            -j[1]
        } else {
            0.5 * (j[mm - 1] - j[mm + 1])
        };
        let step = j[mm] / deriv;
        let nx = x - step;
        // the root may sit on a bracket end up to rounding
        let slack = hi - lo;
        if !(lo - slack..=hi + slack).contains(&nx) {
            break;
        }
        x = nx;
        if step.abs() < 1e-15 * x {
            break;
        }
    }
    let resid = eval(x)[mm];
    if resid.abs() >= 1e-12 {
        return Err(Error::Internal(format!(
            "zero of J_{m} near {x} has residual {resid:e}"
        )));
    }
    Ok(x)
}

/// `Phi(x) = int_0^{x sqrt(lambda)} rho J_m(rho) d rho` for `x` in `[0, 1]`.
///
/// Closed form `y J_1(y)` for `m = 0`; composite Gauss-Legendre otherwise,
/// with 8-point panels at most `pi/2` wide (16 nodes per period of `J_m`).
pub fn phi_integral(m: u32, lambda: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("x must lie in [0, 1], got {x}")));
    }
    let y = x * lambda.sqrt();
    check_range(m, y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut scratch = BesselScratch::default();
    if m == 0 {
        return Ok(y * scratch.orders(y, 1)[1]);
    }
    let rule = gauss_legendre(8);
    let panels = ((y / (0.5 * PI)).ceil() as usize).max(1);
    let mm = m as usize;
    Ok(composite_gauss(
        |r| r * scratch.orders(r, mm)[mm],
        0.0,
        y,
        panels,
        &rule,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values: 40-digit arbitrary-precision evaluation
    const J_REF: &[(u32, f64, f64)] = &[
        (0, 0.5, 0.938_469_807_240_812_9),
        (1, 1.0, 0.440_050_585_744_933_5),
        (2, 7.5, -0.230_273_410_525_790_26),
        (5, 3.0, 0.043_028_434_877_047_584),
        (10, 44.0, -0.113_617_056_264_556_59),
        (30, 20.0, 1.240_153_636_035_432_8e-4),
        (38, 44.7, -0.013_328_493_870_138_715),
        (0, 44.7, 0.119_039_976_031_327_75),
        (3, 100.0, 0.076_284_201_720_331_94),
        (50, 10.0, 1.784_513_607_871_595_3e-30),
        (200, 450.0, -0.014_110_567_167_523_835),
        (120, 30.0, 3.102_435_352_276_823e-59),
    ];

    #[test]
    fn matches_reference_values() {
        for &(m, x, want) in J_REF {
            let got = bessel_j(m, x).unwrap();
            assert!((got - want).abs() < 1e-13, "J_{m}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(matches!(bessel_j(201, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_j(0, -1.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_j(0, 501.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn tiny_argument_uses_series() {
        let x = 1e-8;
        assert!((bessel_j(0, x).unwrap() - 1.0).abs() < 1e-15);
        assert!((bessel_j(1, x).unwrap() - 0.5e-8).abs() < 1e-22);
    }

    const ZERO_REF: &[(u32, u32, f64)] = &[
        (0, 1, 2.404_825_557_695_773),
        (1, 1, 3.831_705_970_207_512_3),
        (2, 1, 5.135_622_301_840_683),
        (1, 2, 7.015_586_669_815_619),
        (0, 10, 30.634_606_468_431_975),
        (10, 1, 14.475_500_686_554_541),
        (10, 30, 108.711_256_698_525_42),
        (30, 1, 36.098_336_956_747_72),
        (30, 30, 137.296_471_977_500_87),
        (5, 7, 28.626_618_307_291_14),
    ];

    #[test]
    fn zeros_match_reference() {
        for &(m, k, want) in ZERO_REF {
            let z = bessel_zero(m, k).unwrap();
            assert!((z.value - want).abs() < 1e-12, "j_{m},{k} = {}", z.value);
        }
    }

    #[test]
    fn zero_index_starts_at_one() {
        assert!(bessel_zero(0, 0).is_err());
    }

    #[test]
    fn zeros_below_is_complete_and_sorted() {
        let table = zeros_below(44.72).unwrap();
        assert_eq!(table[38][0], bessel_zero(38, 1).unwrap().value);
        assert!(table.len() == 39);
        for (m, row) in table.iter().enumerate() {
            assert!(row.windows(2).all(|w| w[0] < w[1]));
            let next = bessel_zero(m as u32, row.len() as u32 + 1).unwrap().value;
            assert!(next > 44.72);
        }
    }

    #[test]
    fn moment_recurrence_matches_quadrature() {
        let mut s = BesselScratch::default();
        // reference: adaptive high-precision quadrature, 22 digits
        let refs = [
            (1usize, 3.0, 2.167_723_116_715_665),
            (3, 10.0, 0.393_894_298_005_835_7),
            (7, 25.0, 11.226_825_264_411_883),
            (20, 40.0, 22.084_720_281_853_21),
            (38, 44.0, 50.658_369_463_057_82),
            (2, 0.3, 2.518_620_414_766_225e-4),
        ];
        for (m, y, want) in refs {
            let (_, phi) = s.value_and_moment(y, m);
            assert!((phi - want).abs() < 1e-11, "Phi_{m}({y}) = {phi}, want {want}");
        }
    }
}
