//! The Gaussian function, Gaussian convolution of sampled signals, and the
//! ideal Gaussian magnitude response used as the approximation target.

use thiserror::Error;

use crate::tf::{Waveform, TWO_PI};

/// Kernel support half-width in units of sigma. Mass beyond the truncation
/// is below 2e-9.
const TRUNCATION_SIGMAS: f64 = 6.0;

#[derive(Debug, Error, PartialEq)]
pub enum GaussianError {
    #[error("input under-resolved: dt = {dt} exceeds sigma/4 = {limit}")]
    UnderResolved { dt: f64, limit: f64 },
}

/// Time shift mu and scale sigma of the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        Self { mu, sigma }
    }
}

/// Gaussian density (1/(sigma sqrt(2 pi))) exp(-(x - mu)^2 / (2 sigma^2)).
pub fn pdf(p: &GaussianParams, x: f64) -> f64 {
    let z = (x - p.mu) / p.sigma;
    (-0.5 * z * z).exp() / (p.sigma * TWO_PI.sqrt())
}

/// Magnitude of the Fourier transform of the unit-area Gaussian at f Hz:
/// exp(-sigma^2 (2 pi f)^2 / 2). Independent of mu, which contributes
/// phase only.
pub fn magnitude_target(p: &GaussianParams, f_hz: f64) -> f64 {
    magnitude_target_sigma(p.sigma, f_hz)
}

/// Same target parameterized by sigma alone.
pub fn magnitude_target_sigma(sigma: f64, f_hz: f64) -> f64 {
    let w = TWO_PI * f_hz;
    (-0.5 * sigma * sigma * w * w).exp()
}

/// Discrete Gaussian kernel on a dt grid: pdf samples scaled by dt over
/// [mu - 6 sigma, mu + 6 sigma], renormalized to unit sum. The endpoint
/// samples sit at exp(-18) of the peak, so cell weights and trapezoidal
/// weights agree to well below the truncation loss.
pub struct Kernel {
    /// Normalized weights, indexed by `offset_lo..=offset_hi`.
    pub weights: Vec<f64>,
    /// Grid offset (in samples) of `weights[0]` relative to the output index.
    pub offset_lo: i64,
    /// Quadrature mass before renormalization; near 1 for well-resolved dt.
    pub raw_mass: f64,
}

impl Kernel {
    pub fn build(p: &GaussianParams, dt: f64) -> Self {
        let center = (p.mu / dt).round() as i64;
        let half = (TRUNCATION_SIGMAS * p.sigma / dt).floor() as i64;
        let lo = center - half;
        let hi = center + half;
        let mut weights: Vec<f64> = (lo..=hi).map(|m| pdf(p, m as f64 * dt) * dt).collect();
        let raw_mass: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= raw_mass;
        }
        Self {
            weights,
            offset_lo: lo,
            raw_mass,
        }
    }
}

/// Convolve a waveform with the Gaussian kernel (Weierstrass transform).
///
/// The output shares the input grid; the input is extended by edge
/// replication. Requires dt <= sigma/4 for adequate sampling.
pub fn convolve(x: &Waveform, p: &GaussianParams) -> Result<Waveform, GaussianError> {
    let limit = p.sigma / 4.0;
    if x.dt > limit {
        return Err(GaussianError::UnderResolved { dt: x.dt, limit });
    }
    let kernel = Kernel::build(p, x.dt);
    let n = x.samples.len() as i64;
    let sample_at = |idx: i64| -> f64 {
        let clamped = idx.clamp(0, n - 1) as usize;
        x.samples[clamped]
    };
    let out: Vec<f64> = (0..n)
        .map(|k| {
            kernel
                .weights
                .iter()
                .enumerate()
                .map(|(j, &w)| w * sample_at(k - (kernel.offset_lo + j as i64)))
                .sum()
        })
        .collect();
    Ok(Waveform::new(x.t0, x.dt, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV_SQRT_2PI: f64 = 0.3989422804014327;

    #[test]
    fn pdf_peak_and_analytic_points() {
        let std = GaussianParams::new(0.0, 1.0);
        assert!((pdf(&std, 0.0) - INV_SQRT_2PI).abs() < 1e-15);
        assert!((pdf(&std, 1.0) - (-0.5f64).exp() * INV_SQRT_2PI).abs() < 1e-15);
        let shifted = GaussianParams::new(2.0, 3.0);
        assert!((pdf(&shifted, 2.0) - INV_SQRT_2PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_symmetric_about_mu() {
        let p = GaussianParams::new(1.5, 0.7);
        for d in [0.1, 0.5, 2.0] {
            assert!((pdf(&p, 1.5 + d) - pdf(&p, 1.5 - d)).abs() < 1e-16);
        }
    }

    #[test]
    fn magnitude_target_values() {
        let p = GaussianParams::new(0.0, 1.0);
        assert_eq!(magnitude_target(&p, 0.0), 1.0);
        let f = 1.0 / TWO_PI;
        assert!((magnitude_target(&p, f) - (-0.5f64).exp()).abs() < 1e-15);
        // mu-independence
        let a = GaussianParams::new(0.0, 2.0);
        let b = GaussianParams::new(5.0, 2.0);
        assert_eq!(magnitude_target(&a, 0.3), magnitude_target(&b, 0.3));
    }

    #[test]
    fn kernel_mass_near_unity_and_normalized_exactly() {
        let p = GaussianParams::new(0.0, 1.0);
        let k = Kernel::build(&p, 1.0 / 8.0);
        assert!((k.raw_mass - 1.0).abs() < 2e-9, "raw mass {}", k.raw_mass);
        let total: f64 = k.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn convolving_constant_returns_constant() {
        let x = Waveform::new(0.0, 0.1, vec![3.5; 200]);
        let y = convolve(&x, &GaussianParams::new(0.0, 1.0)).unwrap();
        for &v in &y.samples {
            assert!((v - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn under_resolved_input_rejected() {
        let x = Waveform::new(0.0, 1.0, vec![0.0; 10]);
        let err = convolve(&x, &GaussianParams::new(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, GaussianError::UnderResolved { .. }));
    }

    #[test]
    fn step_convolution_matches_normal_cdf() {
        let sigma = 1.0;
        let dt = 0.01;
        let n = 4001; // t in [-20, 20]
        let t0 = -20.0;
        // Sample the discontinuity at its midpoint value so the discrete
        // step carries the same quadrature mass as the continuous one.
        let samples: Vec<f64> = (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                if t.abs() < dt / 2.0 {
                    0.5
                } else if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let x = Waveform::new(t0, dt, samples);
        let y = convolve(&x, &GaussianParams::new(0.0, sigma)).unwrap();
        for k in (0..n).step_by(37) {
            let t = t0 + k as f64 * dt;
            if t.abs() > 8.0 {
                continue; // edge-replication region
            }
            let expected = normal_cdf(t / sigma);
            assert!(
                (y.samples[k] - expected).abs() < 1e-4,
                "t={t} got {} want {expected}",
                y.samples[k]
            );
        }
    }

    #[test]
    fn impulse_recovers_pdf_samples() {
        let dt = 0.05;
        let n = 1601;
        let t0 = -40.0 * dt;
        // dt-wide pulse of unit area at t = 0 (center of grid offset 40).
        let mut samples = vec![0.0; n];
        samples[40] = 1.0 / dt;
        let x = Waveform::new(t0, dt, samples);
        let p = GaussianParams::new(0.0, 1.0);
        let y = convolve(&x, &p).unwrap();
        for k in 0..n {
            let t = t0 + k as f64 * dt;
            if t.abs() < 4.0 {
                assert!(
                    (y.samples[k] - pdf(&p, t)).abs() < 1e-3,
                    "t={t}: {} vs {}",
                    y.samples[k],
                    pdf(&p, t)
                );
            }
        }
    }

    #[test]
    fn monotone_input_gives_monotone_output() {
        let n = 400;
        let mut v = 0.0;
        let mut rng: u64 = 0x9E3779B97F4A7C15;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1);
                v += ((rng >> 40) as f64) / (1 << 24) as f64;
                v
            })
            .collect();
        let x = Waveform::new(0.0, 0.05, samples);
        let y = convolve(&x, &GaussianParams::new(0.0, 0.5)).unwrap();
        for w in y.samples.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn linearity_of_convolution() {
        let n = 300;
        let dt = 0.05;
        let xa: Vec<f64> = (0..n).map(|k| ((k as f64) * 0.11).sin()).collect();
        let xb: Vec<f64> = (0..n).map(|k| ((k as f64) * 0.041).cos()).collect();
        let combo: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let p = GaussianParams::new(0.0, 0.4);
        let ya = convolve(&Waveform::new(0.0, dt, xa), &p).unwrap();
        let yb = convolve(&Waveform::new(0.0, dt, xb), &p).unwrap();
        let yc = convolve(&Waveform::new(0.0, dt, combo), &p).unwrap();
        for k in 0..n {
            let want = 2.0 * ya.samples[k] - 3.0 * yb.samples[k];
            assert!((yc.samples[k] - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn mu_shift_shifts_output_on_grid() {
        let n = 500;
        let dt = 0.05;
        let samples: Vec<f64> = (0..n).map(|k| ((k as f64) * 0.07).sin()).collect();
        let x = Waveform::new(0.0, dt, samples);
        let y0 = convolve(&x, &GaussianParams::new(0.0, 0.5)).unwrap();
        let shift = 12;
        let y1 = convolve(&x, &GaussianParams::new(shift as f64 * dt, 0.5)).unwrap();
        for k in shift + 60..n - 60 {
            assert!(
                (y1.samples[k] - y0.samples[k - shift]).abs() < 1e-12,
                "k={k}"
            );
        }
    }

    /// Abramowitz-Stegun 7.1.26 rational erf approximation (|err| < 1.5e-7),
    /// plenty for 1e-4 comparisons.
    fn normal_cdf(z: f64) -> f64 {
        0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
    }

    fn erf(x: f64) -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let x = x.abs();
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let y = 1.0
            - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
                + 0.254829592)
                * t
                * (-x * x).exp();
        sign * y
    }
}
