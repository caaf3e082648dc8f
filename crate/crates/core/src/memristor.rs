//! One-state-variable memristor: linear ion drift with a Joglekar window.
//!
//! Memristance interpolates between r_on (fully doped, w = d) and r_off
//! (undoped, w = 0); the state advances with the charge that flows, and the
//! device obeys v(t) = M(w(t)) i(t). Sine drive produces the signature
//! pinched hysteresis loop whose area shrinks with frequency.

use thiserror::Error;

use crate::tf::TWO_PI;

#[derive(Debug, Error, PartialEq)]
pub enum MemristorError {
    #[error("invalid memristor parameters: {0}")]
    InvalidParams(String),
    #[error("i-v trajectory is not a closed loop (v gap {v_gap:.3e}, i gap {i_gap:.3e})")]
    OpenLoop { v_gap: f64, i_gap: f64 },
}

/// Device constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorParams {
    /// Fully-doped memristance, ohms.
    pub r_on: f64,
    /// Undoped memristance, ohms.
    pub r_off: f64,
    /// Device length, meters.
    pub d: f64,
    /// Ion mobility, m^2 V^-1 s^-1.
    pub mu_v: f64,
    /// Joglekar window exponent p >= 1.
    pub window_p: u32,
}

impl MemristorParams {
    pub fn new(
        r_on: f64,
        r_off: f64,
        d: f64,
        mu_v: f64,
        window_p: u32,
    ) -> Result<Self, MemristorError> {
        let p = Self {
            r_on,
            r_off,
            d,
            mu_v,
            window_p,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), MemristorError> {
        if !(self.r_on > 0.0 && self.r_on < self.r_off) {
            return Err(MemristorError::InvalidParams(format!(
                "need 0 < r_on < r_off, got r_on={} r_off={}",
                self.r_on, self.r_off
            )));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(MemristorError::InvalidParams(format!("d={} <= 0", self.d)));
        }
        if !(self.mu_v.is_finite() && self.mu_v > 0.0) {
            return Err(MemristorError::InvalidParams(format!(
                "mu_v={} <= 0",
                self.mu_v
            )));
        }
        if self.window_p < 1 {
            return Err(MemristorError::InvalidParams("window_p < 1".into()));
        }
        Ok(())
    }
}

impl Default for MemristorParams {
    /// r_on 100 ohm, r_off 16 kohm, d 10 nm, mu_v 1e-14 m^2/Vs, p = 1.
    fn default() -> Self {
        Self {
            r_on: 100.0,
            r_off: 16e3,
            d: 10e-9,
            mu_v: 1e-14,
            window_p: 1,
        }
    }
}

/// Internal device state: doped-region width plus charge/flux bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorState {
    /// Doped-region width, meters, in [0, d].
    pub w: f64,
    /// Accumulated charge, coulombs.
    pub q: f64,
    /// Accumulated flux, webers.
    pub phi: f64,
}

impl MemristorState {
    /// Fresh state at the given doped fraction w/d, zero bookkeeping.
    pub fn from_fraction(params: &MemristorParams, frac: f64) -> Self {
        assert!((0.0..=1.0).contains(&frac), "w/d fraction outside [0, 1]");
        Self {
            w: frac * params.d,
            q: 0.0,
            phi: 0.0,
        }
    }

    pub fn fraction(&self, params: &MemristorParams) -> f64 {
        self.w / params.d
    }
}

/// Instantaneous memristance M = r_on (w/d) + r_off (1 - w/d).
pub fn memristance(params: &MemristorParams, state: &MemristorState) -> f64 {
    let u = state.w / params.d;
    (params.r_on * u + params.r_off * (1.0 - u)).clamp(params.r_on, params.r_off)
}

/// Joglekar window F(u) = 1 - (2u - 1)^(2p); zero at the boundaries.
fn window(u: f64, p: u32) -> f64 {
    1.0 - (2.0 * u - 1.0).powi(2 * p as i32)
}

/// Advance the state one step under current `i` held for `dt` seconds.
/// The width saturates smoothly via the window and is clamped to [0, d].
pub fn step_state(
    params: &MemristorParams,
    state: &MemristorState,
    i: f64,
    dt: f64,
) -> MemristorState {
    debug_assert!(dt > 0.0);
    let u = state.w / params.d;
    let dw = params.mu_v * (params.r_on / params.d) * i * window(u, params.window_p) * dt;
    let m = memristance(params, state);
    MemristorState {
        w: (state.w + dw).clamp(0.0, params.d),
        q: state.q + i * dt,
        phi: state.phi + m * i * dt,
    }
}

/// One sampled point of a voltage-driven trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvSample {
    pub v: f64,
    pub i: f64,
    pub t: f64,
}

/// Drive the device with v(t) = amplitude * sin(2 pi f t), solving
/// i = v / M at each sample and advancing the state between samples.
/// Returns cycles * steps_per_cycle + 1 samples (the closing sample
/// lands exactly on the period boundary).
pub fn simulate_iv(
    params: &MemristorParams,
    amplitude: f64,
    freq_hz: f64,
    cycles: usize,
    steps_per_cycle: usize,
    initial: MemristorState,
) -> Vec<IvSample> {
    assert!(cycles >= 1, "need at least one cycle");
    assert!(steps_per_cycle >= 100, "need at least 100 steps per cycle");
    assert!(freq_hz > 0.0);
    let dt = 1.0 / (freq_hz * steps_per_cycle as f64);
    let n = cycles * steps_per_cycle;
    let mut state = initial;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let v = amplitude * (TWO_PI * freq_hz * t).sin();
        let i = v / memristance(params, &state);
        out.push(IvSample { v, i, t });
        if k < n {
            state = step_state(params, &state, i, dt);
        }
    }
    out
}

/// Voltage-driven trajectory together with its final state.
pub fn simulate_iv_with_state(
    params: &MemristorParams,
    amplitude: f64,
    freq_hz: f64,
    cycles: usize,
    steps_per_cycle: usize,
    initial: MemristorState,
) -> (Vec<IvSample>, MemristorState) {
    assert!(cycles >= 1 && steps_per_cycle >= 100 && freq_hz > 0.0);
    let dt = 1.0 / (freq_hz * steps_per_cycle as f64);
    let n = cycles * steps_per_cycle;
    let mut state = initial;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let v = amplitude * (TWO_PI * freq_hz * t).sin();
        let i = v / memristance(params, &state);
        out.push(IvSample { v, i, t });
        if k < n {
            state = step_state(params, &state, i, dt);
        }
    }
    (out, state)
}

/// Shoelace area of a closed i-v cycle, absolute value.
///
/// The first and last samples must agree within 1e-6 of the signal scale,
/// otherwise the loop is reported open.
pub fn loop_area(iv: &[IvSample]) -> Result<f64, MemristorError> {
    assert!(iv.len() >= 3, "need at least three samples for an area");
    let v_scale = iv
        .iter()
        .map(|s| s.v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let i_scale = iv
        .iter()
        .map(|s| s.i.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let first = iv.first().unwrap();
    let last = iv.last().unwrap();
    let v_gap = (first.v - last.v).abs();
    let i_gap = (first.i - last.i).abs();
    if v_gap > 1e-6 * v_scale || i_gap > 1e-6 * i_scale {
        return Err(MemristorError::OpenLoop { v_gap, i_gap });
    }
    let mut acc = 0.0;
    for k in 0..iv.len() {
        let a = &iv[k];
        let b = &iv[(k + 1) % iv.len()];
        acc += a.v * b.i - b.v * a.i;
    }
    Ok(0.5 * acc.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid_state(p: &MemristorParams) -> MemristorState {
        MemristorState::from_fraction(p, 0.5)
    }

    #[test]
    fn memristance_boundaries_and_midpoint() {
        let p = MemristorParams::default();
        let lo = MemristorState::from_fraction(&p, 0.0);
        let hi = MemristorState::from_fraction(&p, 1.0);
        assert_eq!(memristance(&p, &lo), p.r_off);
        assert_eq!(memristance(&p, &hi), p.r_on);
        assert_eq!(memristance(&p, &mid_state(&p)), 8050.0);
    }

    #[test]
    fn zero_current_leaves_state_unchanged() {
        let p = MemristorParams::default();
        let s0 = mid_state(&p);
        let s1 = step_state(&p, &s0, 0.0, 1.0);
        assert_eq!(s0, s1);
    }

    #[test]
    fn constant_current_accumulates_exact_charge() {
        let p = MemristorParams::default();
        let mut s = mid_state(&p);
        let i = 1e-6;
        let dt = 1e-3;
        let n = 1000;
        for _ in 0..n {
            s = step_state(&p, &s, i, dt);
        }
        // q = n*i*dt exactly: each increment is the same representable product.
        assert_eq!(s.q, (0..n).fold(0.0, |acc, _| acc + i * dt));
        assert!((s.q - n as f64 * i * dt).abs() < 1e-18);
    }

    #[test]
    fn sign_reversal_returns_to_midpoint() {
        // The continuous dynamics are exactly time-reversible when the
        // current flips sign; fine steps keep the discrete drift below 1e-9.
        let p = MemristorParams::default();
        let mut s = mid_state(&p);
        let i = 1e-5;
        let dt = 1e-5;
        let n = 2000;
        for _ in 0..n {
            s = step_state(&p, &s, i, dt);
        }
        assert!(s.fraction(&p) > 0.5);
        for _ in 0..n {
            s = step_state(&p, &s, -i, dt);
        }
        assert!(
            (s.fraction(&p) - 0.5).abs() < 1e-9,
            "w/d drifted to {}",
            s.fraction(&p)
        );
    }

    #[test]
    fn window_keeps_width_inside_device() {
        let p = MemristorParams::default();
        let mut s = mid_state(&p);
        // Hammer with a large positive current; the window + clamp must
        // keep w within [0, d].
        for _ in 0..100_000 {
            s = step_state(&p, &s, 1e-3, 1e-3);
            assert!((0.0..=p.d).contains(&s.w));
        }
        let m = memristance(&p, &s);
        assert!((p.r_on..=p.r_off).contains(&m));
    }

    #[test]
    fn zero_amplitude_gives_zero_trajectory() {
        let p = MemristorParams::default();
        let iv = simulate_iv(&p, 0.0, 1.0, 1, 200, mid_state(&p));
        assert!(iv.iter().all(|s| s.v == 0.0 && s.i == 0.0));
    }

    #[test]
    fn constitutive_law_holds_at_every_sample() {
        let p = MemristorParams::default();
        let mut state = mid_state(&p);
        let dt = 1.0 / (1.0 * 500.0);
        let iv = simulate_iv(&p, 1.0, 1.0, 2, 500, state);
        // Replay the state stepping and verify v = M * i within 1e-12 rel.
        for (k, s) in iv.iter().enumerate() {
            let m = memristance(&p, &state);
            assert!(
                (s.v - m * s.i).abs() <= 1e-12 * s.v.abs().max(1e-30),
                "sample {k}"
            );
            assert!((p.r_on..=p.r_off).contains(&m));
            if k < iv.len() - 1 {
                state = step_state(&p, &state, s.i, dt);
            }
        }
    }

    #[test]
    fn loop_area_shrinks_with_frequency() {
        let p = MemristorParams::default();
        let area_at = |f: f64| {
            let spc = 2000;
            let iv = simulate_iv(&p, 1.0, f, 6, spc, mid_state(&p));
            loop_area(&iv[iv.len() - spc - 1..]).unwrap()
        };
        let a1 = area_at(1.0);
        let a10 = area_at(10.0);
        let a100 = area_at(100.0);
        assert!(a1 > a10 && a10 > a100, "{a1} {a10} {a100}");
        assert!(a1.is_finite() && a1 > 0.0);
    }

    #[test]
    fn resistor_trajectory_has_zero_area() {
        let r = 1000.0;
        let iv: Vec<IvSample> = (0..=720)
            .map(|k| {
                let t = k as f64 / 720.0;
                let v = (TWO_PI * t).sin();
                IvSample { v, i: v / r, t }
            })
            .collect();
        let a = loop_area(&iv).unwrap();
        assert!(a < 1e-15, "area {a}");
    }

    #[test]
    fn unit_circle_area_is_pi() {
        let iv: Vec<IvSample> = (0..=1000)
            .map(|k| {
                let th = TWO_PI * k as f64 / 1000.0;
                IvSample {
                    v: th.cos(),
                    i: th.sin(),
                    t: k as f64,
                }
            })
            .collect();
        let a = loop_area(&iv).unwrap();
        assert!((a - std::f64::consts::PI).abs() < 1e-4, "area {a}");
    }

    #[test]
    fn open_loop_is_rejected() {
        let iv: Vec<IvSample> = (0..=300)
            .map(|k| {
                let th = 0.75 * TWO_PI * k as f64 / 300.0;
                IvSample {
                    v: th.cos(),
                    i: th.sin(),
                    t: k as f64,
                }
            })
            .collect();
        assert!(matches!(
            loop_area(&iv),
            Err(MemristorError::OpenLoop { .. })
        ));
    }

    #[test]
    fn charge_and_flux_match_trapezoidal_integrals() {
        let p = MemristorParams::default();
        let spc = 2000;
        let cycles = 3;
        let (iv, end) = simulate_iv_with_state(&p, 1.0, 1.0, cycles, spc, mid_state(&p));
        let dt = 1.0 / (1.0 * spc as f64);
        let mut q_trap = 0.0;
        let mut phi_trap = 0.0;
        for w in iv.windows(2) {
            q_trap += 0.5 * (w[0].i + w[1].i) * dt;
            phi_trap += 0.5 * (w[0].v + w[1].v) * dt;
        }
        let q_scale: f64 = iv.iter().map(|s| s.i.abs() * dt).sum();
        let phi_scale: f64 = iv.iter().map(|s| s.v.abs() * dt).sum();
        assert!(
            (end.q - q_trap).abs() <= 1e-9 * q_scale,
            "q {} vs {}",
            end.q,
            q_trap
        );
        assert!(
            (end.phi - phi_trap).abs() <= 1e-9 * phi_scale,
            "phi {} vs {}",
            end.phi,
            phi_trap
        );
    }

    #[test]
    fn chord_ratio_equals_time_average_of_memristance() {
        // Constant current with the window disabled: a large exponent makes
        // F(u) == 1 in floating point while u stays interior, so w moves
        // linearly in time and M's time average is the endpoint midpoint.
        let p = MemristorParams {
            window_p: 50,
            ..MemristorParams::default()
        };
        let i = 2e-7;
        let dt = 1e-4;
        let n = 400_000;
        let mut s = MemristorState::from_fraction(&p, 0.5);
        let m0 = memristance(&p, &s);
        for _ in 0..n {
            s = step_state(&p, &s, i, dt);
        }
        let m1 = memristance(&p, &s);
        let ratio = (s.phi - 0.0) / (s.q - 0.0);
        let time_avg = 0.5 * (m0 + m1);
        assert!(
            ((ratio - time_avg) / time_avg).abs() < 1e-6,
            "ratio {ratio} vs time average {time_avg}"
        );
    }

    #[test]
    fn pinched_at_origin() {
        let p = MemristorParams::default();
        let iv = simulate_iv(&p, 1.0, 1.0, 2, 1000, mid_state(&p));
        for s in &iv {
            assert!(s.i.abs() <= s.v.abs() / p.r_on + 1e-30);
            if s.v == 0.0 {
                assert_eq!(s.i, 0.0);
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(MemristorParams::new(0.0, 100.0, 1e-8, 1e-14, 1).is_err());
        assert!(MemristorParams::new(200.0, 100.0, 1e-8, 1e-14, 1).is_err());
        assert!(MemristorParams::new(100.0, 16e3, -1.0, 1e-14, 1).is_err());
        assert!(MemristorParams::new(100.0, 16e3, 1e-8, 0.0, 1).is_err());
        assert!(MemristorParams::new(100.0, 16e3, 1e-8, 1e-14, 0).is_err());
    }
}
