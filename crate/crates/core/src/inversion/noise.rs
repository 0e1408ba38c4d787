//! Multiplicative uniform noise `g (1 + δ U)`, `U ~ U[-1, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trace::FluxTrace;

pub fn add_noise(g: &FluxTrace, delta: f64, seed: u64) -> Result<FluxTrace> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("noise level {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = g.clone();
    for row in &mut out.values {
        for v in row.iter_mut() {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            *v *= 1.0 + delta * u;
        }
    }
    out.delta = delta;
    out.seed = Some(seed);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::MeasurementSchedule;

    fn trace() -> FluxTrace {
        let s = MeasurementSchedule::uniform(0.0, 1.0, 0.01).unwrap();
        let vals = (0..3)
            .map(|l| s.times().iter().map(|t| -(t + l as f64)).collect())
            .collect();
        FluxTrace::new(s, vec![0.0, 1.0, 2.0], vals).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let g = trace();
        assert_eq!(add_noise(&g, 0.0, 7).unwrap().values, g.values);
    }

    #[test]
    fn reproducible_and_bounded() {
        let g = trace();
        let a = add_noise(&g, 0.05, 11).unwrap();
        let b = add_noise(&g, 0.05, 11).unwrap();
        assert_eq!(a, b);
        let c = add_noise(&g, 0.05, 12).unwrap();
        assert_ne!(a.values, c.values);
        for (ra, rg) in a.values.iter().zip(&g.values) {
            for (x, y) in ra.iter().zip(rg) {
                assert!((x - y).abs() <= 0.05 * y.abs() * (1.0 + 1e-15));
            }
        }
    }
}
