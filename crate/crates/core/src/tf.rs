//! Rational transfer functions H(s) = N(s)/D(s) and their frequency-domain
//! and time-domain characterization: evaluation, Bode data, -3 dB cutoff,
//! phase, step response, and distance from an ideal Gaussian magnitude.

use num_complex::Complex64;
use thiserror::Error;

use crate::gaussian;
use crate::linalg::LuFactors;
use crate::poly::Polynomial;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// The conventional "-3 dB" drop is the half-power point, 10 log10(2) dB.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

/// Search interval for the -3 dB crossing, in Hz.
pub const CUTOFF_SEARCH_HZ: (f64, f64) = (1e-4, 1e9);
/// Number of log-spaced bracketing points across the search interval.
pub const CUTOFF_BRACKET_POINTS: usize = 50;
/// Relative tolerance of the cutoff bisection.
pub const CUTOFF_REL_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum TfError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },
    #[error("denominator vanishes at the evaluation point (|D(s)| = {mag:.3e})")]
    PoleEvaluation { mag: f64 },
    #[error("denominator has a zero constant term: no finite DC gain")]
    DcPole,
    #[error("no {drop_db} dB crossing found in [{lo:.1e}, {hi:.1e}] Hz")]
    NoCutoffFound { drop_db: f64, lo: f64, hi: f64 },
    #[error("frequencies must be strictly increasing and positive")]
    BadFrequencyGrid,
}

/// Proper rational transfer function with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, TfError> {
        if den.is_zero() {
            return Err(TfError::ZeroDenominator);
        }
        if !num.is_zero() && num.degree() > den.degree() {
            return Err(TfError::Improper {
                num: num.degree(),
                den: den.degree(),
            });
        }
        Ok(Self { num, den })
    }

    /// Convenience constructor from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, TfError> {
        Self::new(Polynomial::new(num), Polynomial::new(den))
    }

    /// The identity system H(s) = 1.
    pub fn unit() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }

    /// First-order low-pass 1/(1 + s/omega0).
    pub fn first_order_lowpass(omega0: f64) -> Self {
        assert!(omega0 > 0.0);
        Self::from_coeffs(&[1.0], &[1.0, 1.0 / omega0]).unwrap()
    }

    /// Built-in 4th-order Gaussian-approximant low-pass:
    /// H(s) = (0.2 s^3 + 1.2 s^2 - 5 s + 40) / (2.9 s^4 + 12 s^3 + 27.4 s^2 + 34 s + 19).
    pub fn fourth_order_gaussian() -> Self {
        Self::from_coeffs(&[40.0, -5.0, 1.2, 0.2], &[19.0, 34.0, 27.4, 12.0, 2.9]).unwrap()
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    /// H(s1) * H2(s): series connection of two systems.
    pub fn cascade(&self, other: &RationalTf) -> RationalTf {
        RationalTf {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// Evaluate H at a complex point by Horner's scheme on both polynomials.
    pub fn eval_at(&self, s: Complex64) -> Result<Complex64, TfError> {
        let d = self.den.eval_complex(s);
        let scale = self.den.magnitude_scale(s.norm()).max(f64::MIN_POSITIVE);
        if d.norm() <= 1e3 * f64::EPSILON * scale {
            return Err(TfError::PoleEvaluation { mag: d.norm() });
        }
        Ok(self.num.eval_complex(s) / d)
    }

    /// Evaluate at s = j*2*pi*f.
    pub fn eval_at_hz(&self, f_hz: f64) -> Result<Complex64, TfError> {
        self.eval_at(Complex64::new(0.0, TWO_PI * f_hz))
    }

    /// Sample H(j 2 pi f) over a strictly increasing positive grid.
    pub fn freq_response(&self, freqs: &[f64]) -> Result<FrequencyResponse, TfError> {
        let samples = freqs
            .iter()
            .map(|&f| self.eval_at_hz(f).map(|v| (f, v)))
            .collect::<Result<Vec<_>, _>>()?;
        FrequencyResponse::from_samples(samples)
    }

    /// DC gain a0/b0.
    pub fn dc_gain(&self) -> Result<f64, TfError> {
        let b0 = self.den.constant_term();
        if b0 == 0.0 {
            return Err(TfError::DcPole);
        }
        Ok(self.num.constant_term() / b0)
    }

    /// Conventional -3 dB (half-power) cutoff referenced to the DC level.
    pub fn half_power_cutoff(&self) -> Result<f64, TfError> {
        self.cutoff_frequency(HALF_POWER_DB)
    }

    /// Smallest f > 0 where the magnitude falls `drop_db` below the DC level.
    pub fn cutoff_frequency(&self, drop_db: f64) -> Result<f64, TfError> {
        self.cutoff_frequency_ref(drop_db, CutoffReference::Dc)
    }

    /// Cutoff with an explicit reference level (DC magnitude or sweep peak).
    pub fn cutoff_frequency_ref(
        &self,
        drop_db: f64,
        reference: CutoffReference,
    ) -> Result<f64, TfError> {
        let (lo, hi) = CUTOFF_SEARCH_HZ;
        let grid = log_grid(lo, hi, CUTOFF_BRACKET_POINTS);
        let mags: Vec<f64> = grid
            .iter()
            .map(|&f| self.eval_at_hz(f).map(|v| db(v.norm())))
            .collect::<Result<_, _>>()?;

        let ref_db = match reference {
            CutoffReference::Dc => {
                let g = self.dc_gain()?;
                if g == 0.0 {
                    return Err(TfError::NoCutoffFound { drop_db, lo, hi });
                }
                db(g.abs())
            }
            CutoffReference::Peak => mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        };
        let target = ref_db - drop_db;

        let mag_at = |f: f64| -> Result<f64, TfError> { Ok(db(self.eval_at_hz(f)?.norm())) };

        // For a peak reference the search starts at the peak itself.
        let start = match reference {
            CutoffReference::Dc => 0,
            CutoffReference::Peak => mags
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0),
        };

        let mut bracket = None;
        for i in start..grid.len() {
            let above = mags[i] >= target;
            if !above {
                if i == start && matches!(reference, CutoffReference::Dc) && mags[i] < target {
                    // Already below target at the bottom of the interval:
                    // the crossing is not inside the configured search range.
                    return Err(TfError::NoCutoffFound { drop_db, lo, hi });
                }
                bracket = Some((grid[i.saturating_sub(1)], grid[i]));
                break;
            }
        }
        let (mut f_lo, mut f_hi) = bracket.ok_or(TfError::NoCutoffFound { drop_db, lo, hi })?;

        while (f_hi - f_lo) > CUTOFF_REL_TOL * f_lo {
            let mid = (f_lo * f_hi).sqrt();
            if mag_at(mid)? >= target {
                f_lo = mid;
            } else {
                f_hi = mid;
            }
        }
        Ok((f_lo * f_hi).sqrt())
    }

    /// Principal-value phase of H(j 2 pi f), in degrees, in (-180, 180].
    pub fn phase_at(&self, f_hz: f64) -> Result<f64, TfError> {
        let v = self.eval_at_hz(f_hz)?;
        let mut deg = v.arg().to_degrees();
        if deg <= -180.0 {
            deg += 360.0;
        }
        Ok(deg)
    }

    /// Unit-step response via trapezoidal integration of the controllable
    /// canonical state-space realization. The divergence flag is set (not
    /// fatal) once a sample exceeds 1e6 * |dc gain|.
    pub fn step_response(&self, t_end: f64, dt: f64) -> Result<StepResponse, TfError> {
        assert!(dt > 0.0 && t_end >= dt, "need dt > 0 and t_end >= dt");
        let (a, b, c, d) = self.state_space()?;
        let n = a.len();
        let steps = (t_end / dt + 1e-9).floor() as usize;

        let divergence_scale = {
            let g = self.dc_gain()?.abs();
            1e6 * if g > 0.0 { g } else { 1.0 }
        };

        let mut samples = Vec::with_capacity(steps + 1);
        let mut unstable = false;

        if n == 0 {
            // Pure gain: y = d for every sample.
            for _ in 0..=steps {
                samples.push(d);
            }
            return Ok(StepResponse {
                waveform: Waveform::new(0.0, dt, samples),
                unstable,
            });
        }

        // (I - dt/2 A) x_{k+1} = (I + dt/2 A) x_k + dt B  (step input: u == 1)
        let mut m_left = vec![vec![0.0; n]; n];
        let mut m_right = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m_left[i][j] = -0.5 * dt * a[i][j];
                m_right[i][j] = 0.5 * dt * a[i][j];
            }
            m_left[i][i] += 1.0;
            m_right[i][i] += 1.0;
        }
        let lu = LuFactors::factor(m_left).ok_or(TfError::ZeroDenominator)?;

        let mut x = vec![0.0; n];
        for _ in 0..=steps {
            let y: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum::<f64>() + d;
            if y.is_finite() && y.abs() > divergence_scale {
                unstable = true;
            }
            if !y.is_finite() {
                unstable = true;
                samples.push(y);
                break;
            }
            samples.push(y);
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = (0..n).map(|j| m_right[i][j] * x[j]).sum::<f64>() + dt * b[i];
            }
            x = lu.solve(&rhs);
        }
        Ok(StepResponse {
            waveform: Waveform::new(0.0, dt, samples),
            unstable,
        })
    }

    /// Controllable canonical form (A, B, C, D) of the monic-denominator system.
    fn state_space(&self) -> Result<StateSpace, TfError> {
        if self.den.is_zero() {
            return Err(TfError::ZeroDenominator);
        }
        let lead = *self.den.coeffs().last().unwrap();
        let bn: Vec<f64> = self.den.coeffs().iter().map(|&v| v / lead).collect();
        let n = bn.len() - 1;
        let mut an = vec![0.0; n + 1];
        for (k, &v) in self.num.coeffs().iter().enumerate() {
            an[k] = v / lead;
        }
        let d = an[n];
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n.saturating_sub(1) {
            a[i][i + 1] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[n - 1][j] = -bn[j];
            }
        }
        let mut b = vec![0.0; n];
        if n > 0 {
            b[n - 1] = 1.0;
        }
        let c: Vec<f64> = (0..n).map(|k| an[k] - d * bn[k]).collect();
        Ok((a, b, c, d))
    }

    /// Error between the normalized magnitude response and the ideal Gaussian
    /// magnitude exp(-sigma^2 (2 pi f)^2 / 2), under the chosen norm.
    pub fn gaussian_approx_error(
        &self,
        sigma: f64,
        grid: &[f64],
        norm: ErrorNorm,
    ) -> Result<f64, TfError> {
        assert!(!grid.is_empty(), "grid must be non-empty");
        let dc = self.dc_gain()?;
        if dc == 0.0 {
            return Err(TfError::DcPole);
        }
        let mut acc: f64 = 0.0;
        for &f in grid {
            let m = self.eval_at_hz(f)?.norm() / dc.abs();
            let diff = (m - gaussian::magnitude_target_sigma(sigma, f)).abs();
            match norm {
                ErrorNorm::L2 => acc += diff * diff,
                ErrorNorm::Linf => acc = acc.max(diff),
            }
        }
        Ok(match norm {
            ErrorNorm::L2 => acc.sqrt(),
            ErrorNorm::Linf => acc,
        })
    }

    /// Golden-section search (over ln sigma) for the sigma minimizing
    /// `gaussian_approx_error`. Returns (sigma, error).
    pub fn best_gaussian_sigma(
        &self,
        grid: &[f64],
        norm: ErrorNorm,
    ) -> Result<(f64, f64), TfError> {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let mut lo = (1e-4f64).ln();
        let mut hi = (1e4f64).ln();
        let err_at = |ls: f64| self.gaussian_approx_error(ls.exp(), grid, norm);
        let mut x1 = hi - golden * (hi - lo);
        let mut x2 = lo + golden * (hi - lo);
        let mut f1 = err_at(x1)?;
        let mut f2 = err_at(x2)?;
        for _ in 0..200 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = err_at(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = err_at(x2)?;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        let ls = 0.5 * (lo + hi);
        Ok((ls.exp(), err_at(ls)?))
    }
}

/// (A, B, C, D) state-space matrices.
type StateSpace = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64);

/// Reference level for the cutoff search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffReference {
    /// Drop measured from the DC magnitude (conventional low-pass definition).
    Dc,
    /// Drop measured from the peak of the bracketing sweep.
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    L2,
    Linf,
}

/// Step-response output; `unstable` reports divergence without failing.
#[derive(Debug, Clone)]
pub struct StepResponse {
    pub waveform: Waveform,
    pub unstable: bool,
}

/// Percent overshoot of a waveform relative to its final value.
pub fn overshoot(w: &Waveform, final_value: f64) -> f64 {
    assert!(final_value != 0.0, "final value must be nonzero");
    let peak = w.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((peak - final_value) / final_value.abs() * 100.0).max(0.0)
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl Waveform {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        assert!(
            !samples.is_empty(),
            "waveform must hold at least one sample"
        );
        Self { t0, dt, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Sample nearest to time t (clamped to the grid).
    pub fn sample_near(&self, t: f64) -> f64 {
        let k = ((t - self.t0) / self.dt).round();
        let k = k.clamp(0.0, (self.samples.len() - 1) as f64) as usize;
        self.samples[k]
    }
}

/// Ordered (frequency, complex gain) samples with derived dB magnitude and
/// degree phase, both principal-value and unwrapped.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    samples: Vec<(f64, Complex64)>,
    magnitude_db: Vec<f64>,
    phase_deg: Vec<f64>,
    phase_deg_unwrapped: Vec<f64>,
}

impl FrequencyResponse {
    pub fn from_samples(samples: Vec<(f64, Complex64)>) -> Result<Self, TfError> {
        if samples.is_empty() || samples[0].0 <= 0.0 || samples.windows(2).any(|w| w[0].0 >= w[1].0)
        {
            return Err(TfError::BadFrequencyGrid);
        }
        let magnitude_db = samples.iter().map(|&(_, v)| db(v.norm())).collect();
        let phase_deg: Vec<f64> = samples
            .iter()
            .map(|&(_, v)| {
                let mut d = v.arg().to_degrees();
                if d <= -180.0 {
                    d += 360.0;
                }
                d
            })
            .collect();
        let phase_deg_unwrapped = unwrap_degrees(&phase_deg);
        Ok(Self {
            samples,
            magnitude_db,
            phase_deg,
            phase_deg_unwrapped,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn freqs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(f, _)| f)
    }

    pub fn samples(&self) -> &[(f64, Complex64)] {
        &self.samples
    }

    pub fn magnitude_db(&self) -> &[f64] {
        &self.magnitude_db
    }

    pub fn phase_deg(&self) -> &[f64] {
        &self.phase_deg
    }

    pub fn phase_deg_unwrapped(&self) -> &[f64] {
        &self.phase_deg_unwrapped
    }
}

/// Remove >180-degree jumps so the sequence is continuous.
fn unwrap_degrees(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let prev = out[i - 1];
            let mut cur = p + offset;
            while cur - prev > 180.0 {
                offset -= 360.0;
                cur -= 360.0;
            }
            while cur - prev < -180.0 {
                offset += 360.0;
                cur += 360.0;
            }
            out.push(cur);
        } else {
            out.push(p);
        }
    }
    out
}

pub fn db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

/// n log-spaced points covering [lo, hi] inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let l0 = lo.ln();
    let l1 = hi.ln();
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
