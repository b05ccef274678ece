use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// `mean + amplitude * Σ_k w_k sin(a_k lat + b_k lon + c_k t + φ_k)` with
/// `t` in days and `Σ w_k² = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothField {
    pub mean: f64,
    pub amplitude: f64,
    /// `(a, b, c, φ, w)` per component.
    pub components: Vec<[f64; 5]>,
    /// Clamp floor for non-negative quantities.
    pub floor: Option<f64>,
}

impl SmoothField {
    /// Random low-frequency mixture: spatial wavelengths 6-25°, periods
    /// 8-60 days.
    pub fn random<R: Rng>(rng: &mut R, mean: f64, amplitude: f64, floor: Option<f64>) -> Self {
        let k = 4;
        let w = 1.0 / (k as f64).sqrt();
        let components = (0..k)
            .map(|_| {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                [
                    TAU / rng.random_range(6.0..25.0) * sign,
                    TAU / rng.random_range(6.0..25.0),
                    TAU / rng.random_range(8.0..60.0),
                    rng.random_range(0.0..TAU),
                    w,
                ]
            })
            .collect();
        Self { mean, amplitude, components, floor }
    }

    pub fn eval(&self, lat: f64, lon: f64, t_days: f64) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .map(|[a, b, c, phi, w]| w * (a * lat + b * lon + c * t_days + phi).sin())
            .sum();
        let v = self.mean + self.amplitude * s;
        self.floor.map_or(v, |f| v.max(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bounded_and_smooth() {
        let f = SmoothField::random(&mut ChaCha8Rng::seed_from_u64(1), 2.0, 1.0, Some(0.1));
        let bound = 2.0 + 1.0 * 4.0 * 0.5;
        for i in 0..200 {
            let v = f.eval(i as f64 * 0.1, 100.0, i as f64);
            assert!((0.1..=bound).contains(&v));
        }
        let d = (f.eval(5.0, 100.0, 3.0) - f.eval(5.01, 100.0, 3.0)).abs();
        assert!(d < 0.01);
    }
}
