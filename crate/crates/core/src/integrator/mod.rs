//! Direct numerical integration of the coupled second-order field equations
//! and of the rotating-frame envelope equations, plus energy-flow
//! bookkeeping on simulated trajectories.

mod energy;
pub mod rk;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::with_carrier;
use crate::model::{derived_detunings, InitialConditions, PumpConfig, SystemConfig, TimeSeries};
use rk::{rk4_step, AdaptiveControl, AdaptiveFailure, Dopri5};

pub use energy::{coarse_grain, energy_flow_numeric, oscillator_energy, EnergyFlow};

/// Minimum number of steps per period of the fastest driven frequency.
pub const MIN_STEPS_PER_CYCLE: f64 = 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step {dt} s exceeds the stability limit {limit} s (need >= 200 steps per fastest cycle)")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("solution became non-finite at t = {t} s")]
    NonFinite { t: f64 },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("adaptive step size underflow at t = {t} s")]
    StepUnderflow { t: f64 },
    #[error("time series carries no field derivatives")]
    MissingVelocity,
}

impl From<AdaptiveFailure> for IntegrationError {
    fn from(f: AdaptiveFailure) -> Self {
        match f {
            AdaptiveFailure::NonFinite { t } => IntegrationError::NonFinite { t },
            AdaptiveFailure::StepUnderflow { t } | AdaptiveFailure::TooManySteps { t } => {
                IntegrationError::StepUnderflow { t }
            }
        }
    }
}

/// Largest admissible fixed step: `1 / (200 f_max)` with
/// `f_max = max(ω_e, ν + ω_e) / 2π`.
pub fn max_full_step(cfg: &SystemConfig, pump: &PumpConfig) -> f64 {
    let f_max = cfg.omega_e.max(pump.nu + cfg.omega_e) / TAU;
    1.0 / (MIN_STEPS_PER_CYCLE * f_max)
}

/// Fixed-step settings for [`integrate_full`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `sample_stride`-th step.
    pub sample_stride: usize,
}

impl FullSettings {
    /// Step chosen so the fastest driven oscillation gets `steps_per_cycle` steps.
    pub fn resolved(cfg: &SystemConfig, pump: &PumpConfig, t_end: f64, steps_per_cycle: f64) -> Self {
        let dt = max_full_step(cfg, pump) * MIN_STEPS_PER_CYCLE / steps_per_cycle.max(MIN_STEPS_PER_CYCLE);
        Self { dt, t_end, sample_stride: 1 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn step_count(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self, cfg: &SystemConfig, pump: &PumpConfig) -> Result<(), IntegrationError> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(IntegrationError::InvalidSettings(format!(
                "dt and t_end must be positive (dt={}, t_end={})",
                self.dt, self.t_end
            )));
        }
        if self.sample_stride == 0 {
            return Err(IntegrationError::InvalidSettings("sample_stride must be >= 1".into()));
        }
        let limit = max_full_step(cfg, pump);
        // Allow for rounding in callers that compute dt from the limit.
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(IntegrationError::StepTooLarge { dt: self.dt, limit });
        }
        Ok(())
    }
}

#[inline]
fn full_rhs(cfg: &SystemConfig, pump: &PumpConfig, t: f64, y: &[f64; 4]) -> [f64; 4] {
    let ep = pump.field(t);
    [
        y[1],
        -cfg.omega_e * cfg.omega_e * y[0] + cfg.chi_g * y[2] * ep,
        y[3],
        -cfg.omega_g * cfg.omega_g * y[2] + cfg.chi_e * y[0] * ep,
    ]
}

/// Integrate the full equations, handing every step's `(t, [E_e, Ė_e, E_g, Ė_g])`
/// (including t = 0) to `observer`.
pub fn integrate_full_with(
    cfg: &SystemConfig,
    pump: &PumpConfig,
    init: &InitialConditions,
    settings: &FullSettings,
    mut observer: impl FnMut(usize, f64, &[f64; 4]),
) -> Result<(), IntegrationError> {
    settings.validate(cfg, pump)?;
    let f = |t: f64, y: &[f64; 4]| full_rhs(cfg, pump, t, y);
    let mut y = init.real_state(cfg);
    observer(0, 0.0, &y);
    for k in 0..settings.step_count() {
        let t = k as f64 * settings.dt;
        y = rk4_step(&f, t, &y, settings.dt);
        let t_next = (k + 1) as f64 * settings.dt;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(IntegrationError::NonFinite { t: t_next });
        }
        observer(k + 1, t_next, &y);
    }
    Ok(())
}

/// Classical 4th-order fixed-step integration of
/// `Ë_e = −ω_e² E_e + χ_g E_g E_p`, `Ë_g = −ω_g² E_g + χ_e E_e E_p`.
///
/// Initial fields come from the complex envelopes via `E = Re Ẽ`,
/// `Ė = Re(−iωẼ)`. The returned series stores derivatives as well.
pub fn integrate_full(
    cfg: &SystemConfig,
    pump: &PumpConfig,
    init: &InitialConditions,
    settings: &FullSettings,
) -> Result<TimeSeries, IntegrationError> {
    let n_samples = settings.step_count() / settings.sample_stride.max(1) + 1;
    let mut e = Vec::with_capacity(n_samples);
    let mut ve = Vec::with_capacity(n_samples);
    let mut g = Vec::with_capacity(n_samples);
    let mut vg = Vec::with_capacity(n_samples);
    integrate_full_with(cfg, pump, init, settings, |k, _t, y| {
        if k % settings.sample_stride == 0 {
            e.push(y[0]);
            ve.push(y[1]);
            g.push(y[2]);
            vg.push(y[3]);
        }
    })?;
    if e.len() < 2 {
        return Err(IntegrationError::InvalidSettings("run too short for two samples".into()));
    }
    Ok(TimeSeries {
        t0: 0.0,
        dt: settings.dt * settings.sample_stride as f64,
        samples_e: e,
        samples_g: g,
        velocities: Some((ve, vg)),
    })
}

/// Complex fields reconstructed from a full trajectory as `Ẽ = E + iĖ/ω`,
/// which equals the rotating-frame field exactly for a pure carrier.
pub fn complex_fields(ts: &TimeSeries, cfg: &SystemConfig) -> Result<(Vec<Complex64>, Vec<Complex64>), IntegrationError> {
    let (ve, vg) = ts.velocities.as_ref().ok_or(IntegrationError::MissingVelocity)?;
    let e = ts.samples_e.iter().zip(ve).map(|(&x, &v)| Complex64::new(x, v / cfg.omega_e)).collect();
    let g = ts.samples_g.iter().zip(vg).map(|(&x, &v)| Complex64::new(x, v / cfg.omega_g)).collect();
    Ok((e, g))
}

/// Which reduced envelope system to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeForm {
    /// Both difference- and sum-detuned terms retained.
    Detuned,
    /// Sum-frequency terms only.
    Opa,
    /// Difference-frequency terms only.
    Dpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSettings {
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    /// Output spacing; outputs land exactly on multiples of it.
    pub sample_dt: f64,
}

impl EnvelopeSettings {
    pub fn new(t_end: f64, sample_dt: f64) -> Self {
        Self { rtol: 1e-11, atol: 1e-13, t_end, sample_dt }
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        if !(1e-12..=1e-6).contains(&self.rtol) {
            return Err(IntegrationError::InvalidSettings(format!("rtol {} outside [1e-12, 1e-6]", self.rtol)));
        }
        if !(self.atol > 0.0 && self.t_end > 0.0 && self.sample_dt > 0.0 && self.sample_dt <= self.t_end) {
            return Err(IntegrationError::InvalidSettings(
                "atol, t_end and sample_dt must be positive with sample_dt <= t_end".into(),
            ));
        }
        Ok(())
    }
}

/// Rotating-frame envelopes ℰ_e, ℰ_g on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    pub t0: f64,
    pub dt: f64,
    pub e: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl EnvelopeSeries {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Complex fields Ẽ = ℰ e^{−iωt}.
    pub fn with_carrier(&self, cfg: &SystemConfig) -> (Vec<Complex64>, Vec<Complex64>) {
        (0..self.len())
            .map(|i| with_carrier(cfg, (self.e[i], self.g[i]), self.time(i)))
            .unzip()
    }

    /// Real fields `E = Re Ẽ` as a [`TimeSeries`].
    pub fn real_fields(&self, cfg: &SystemConfig) -> TimeSeries {
        let (e, g) = self.with_carrier(cfg);
        TimeSeries {
            t0: self.t0,
            dt: self.dt,
            samples_e: e.iter().map(|z| z.re).collect(),
            samples_g: g.iter().map(|z| z.re).collect(),
            velocities: None,
        }
    }
}

/// Adaptive integration of the first-order envelope equations.
pub fn integrate_envelope(
    cfg: &SystemConfig,
    pump: &PumpConfig,
    init: &InitialConditions,
    settings: &EnvelopeSettings,
    form: EnvelopeForm,
) -> Result<EnvelopeSeries, IntegrationError> {
    settings.validate()?;
    let ep = pump.complex_amplitude();
    let d = derived_detunings(cfg, pump);
    let i = Complex64::new(0.0, 1.0);
    let ke = i * cfg.chi_g / (4.0 * cfg.omega_e);
    let kg = i * cfg.chi_e / (4.0 * cfg.omega_g);
    let (use_diff, use_sum) = match form {
        EnvelopeForm::Detuned => (true, true),
        EnvelopeForm::Opa => (false, true),
        EnvelopeForm::Dpa => (true, false),
    };
    let rhs = move |t: f64, y: &[f64; 4]| -> [f64; 4] {
        let e = Complex64::new(y[0], y[1]);
        let g = Complex64::new(y[2], y[3]);
        let mut de = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        if use_diff {
            let ph = Complex64::from_polar(1.0, -d.delta * t);
            de += ke * g * ep * ph;
            dg += kg * e * ep.conj() * ph.conj();
        }
        if use_sum {
            let ph = Complex64::from_polar(1.0, -d.delta_s * t);
            de += ke * g.conj() * ep * ph;
            dg += kg * e.conj() * ep * ph;
        }
        [de.re, de.im, dg.re, dg.im]
    };

    let n = (settings.t_end / settings.sample_dt + 1e-9).floor() as usize;
    let mut out_e = Vec::with_capacity(n + 1);
    let mut out_g = Vec::with_capacity(n + 1);
    let mut y = [init.envelope_e0.re, init.envelope_e0.im, init.envelope_g0.re, init.envelope_g0.im];
    out_e.push(init.envelope_e0);
    out_g.push(init.envelope_g0);
    let control = AdaptiveControl { rtol: settings.rtol, atol: settings.atol, max_steps: 10_000_000 };
    let mut solver = Dopri5::new(control, settings.sample_dt.min(1e-4));
    let mut t = 0.0;
    for k in 1..=n {
        let target = k as f64 * settings.sample_dt;
        solver.advance(&rhs, &mut t, &mut y, target)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(IntegrationError::NonFinite { t });
        }
        out_e.push(Complex64::new(y[0], y[1]));
        out_g.push(Complex64::new(y[2], y[3]));
    }
    Ok(EnvelopeSeries { t0: 0.0, dt: settings.sample_dt, e: out_e, g: out_g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{dpa_envelope, gain_rate, opa_envelope};
    use crate::model::{Branch, Symmetry};

    #[test]
    fn step_limit_is_enforced() {
        let cfg = SystemConfig::baseline(Symmetry::Negative);
        let pump = PumpConfig::resonant(&cfg, Branch::Dpa, 1.0);
        let limit = max_full_step(&cfg, &pump);
        let bad = FullSettings { dt: 1.01 * limit, t_end: 0.01, sample_stride: 1 };
        assert!(matches!(
            integrate_full(&cfg, &pump, &InitialConditions::unit_e(), &bad),
            Err(IntegrationError::StepTooLarge { .. })
        ));
        let ok = FullSettings { dt: limit, t_end: 0.01, sample_stride: 1 };
        assert!(integrate_full(&cfg, &pump, &InitialConditions::unit_e(), &ok).is_ok());
    }

    #[test]
    fn zero_pump_conserves_oscillator_energy() {
        let cfg = SystemConfig::baseline(Symmetry::Negative);
        let pump = PumpConfig::new(0.0, cfg.difference_frequency(), 0.0).unwrap();
        let init = InitialConditions::new(Complex64::new(1.0, 0.3), Complex64::new(-0.4, 0.5)).unwrap();
        let settings = FullSettings { dt: 5e-7, t_end: 1.0, sample_stride: 1000 };
        let ts = integrate_full(&cfg, &pump, &init, &settings).unwrap();
        let (ve, vg) = ts.velocities.clone().unwrap();
        let energy = |w: f64, x: f64, v: f64| w * w * x * x + v * v;
        let e0 = energy(cfg.omega_e, ts.samples_e[0], ve[0]);
        let g0 = energy(cfg.omega_g, ts.samples_g[0], vg[0]);
        for i in 0..ts.len() {
            let de = (energy(cfg.omega_e, ts.samples_e[i], ve[i]) - e0).abs() / e0;
            let dg = (energy(cfg.omega_g, ts.samples_g[i], vg[i]) - g0).abs() / g0;
            assert!(de < 1e-8 && dg < 1e-8, "drift e={de} g={dg} at {}", ts.time(i));
        }
        // exact sinusoid
        let t = ts.time(ts.len() - 1);
        let exact = (init.envelope_e0 * Complex64::from_polar(1.0, -cfg.omega_e * t)).re;
        assert!((ts.samples_e[ts.len() - 1] - exact).abs() < 1e-6);
    }

    #[test]
    fn envelope_dpa_matches_closed_form() {
        let cfg = SystemConfig::baseline(Symmetry::Negative);
        let pump = PumpConfig::resonant(&cfg, Branch::Dpa, 1.0);
        let init = InitialConditions::unit_e();
        let period = TAU / gain_rate(&cfg, &pump, Branch::Dpa).re;
        let env = integrate_envelope(&cfg, &pump, &init, &EnvelopeSettings::new(2.0 * period, period / 200.0), EnvelopeForm::Dpa)
            .unwrap();
        for i in 0..env.len() {
            let (e, g) = dpa_envelope(&cfg, &pump, &init, env.time(i));
            let scale = e.norm().max(g.norm());
            assert!((env.e[i] - e).norm() / scale < 1e-6);
            assert!((env.g[i] - g).norm() / scale < 1e-6);
        }
    }

    #[test]
    fn envelope_zero_pump_is_constant() {
        let cfg = SystemConfig::baseline(Symmetry::Positive);
        let pump = PumpConfig::new(0.0, 100.0, 0.0).unwrap();
        let init = InitialConditions::new(Complex64::new(0.2, 0.1), Complex64::new(0.3, -0.9)).unwrap();
        for form in [EnvelopeForm::Detuned, EnvelopeForm::Opa, EnvelopeForm::Dpa] {
            let env = integrate_envelope(&cfg, &pump, &init, &EnvelopeSettings::new(0.1, 0.01), form).unwrap();
            assert!(env.e.iter().all(|&z| z == init.envelope_e0));
            assert!(env.g.iter().all(|&z| z == init.envelope_g0));
        }
    }

    #[test]
    fn detuned_form_tracks_opa_form_at_sum_pump() {
        let cfg = SystemConfig::baseline(Symmetry::Positive);
        let pump = PumpConfig::resonant(&cfg, Branch::Opa, 1.0);
        let init = InitialConditions::unit_e();
        let settings = EnvelopeSettings::new(0.2, 1e-3);
        let full = integrate_envelope(&cfg, &pump, &init, &settings, EnvelopeForm::Detuned).unwrap();
        let opa = integrate_envelope(&cfg, &pump, &init, &settings, EnvelopeForm::Opa).unwrap();
        for i in 0..full.len() {
            let (e, g) = opa_envelope(&cfg, &pump, &init, full.time(i));
            let scale = e.norm().max(g.norm());
            assert!((full.e[i] - opa.e[i]).norm() / scale < 2e-2);
            assert!((full.g[i] - opa.g[i]).norm() / scale < 2e-2);
            assert!((opa.e[i] - e).norm() / scale < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let cfg = SystemConfig::baseline(Symmetry::Positive);
        let pump = PumpConfig::resonant(&cfg, Branch::Opa, 1.0);
        let mut s = EnvelopeSettings::new(0.1, 0.01);
        s.rtol = 1e-3;
        assert!(matches!(
            integrate_envelope(&cfg, &pump, &InitialConditions::unit_e(), &s, EnvelopeForm::Opa),
            Err(IntegrationError::InvalidSettings(_))
        ));
    }
}
