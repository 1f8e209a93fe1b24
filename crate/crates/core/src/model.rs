//! Domain types shared by every other module.
//!
//! Frequencies are stored as angular frequencies (rad/s). Configuration files
//! and the command line speak Hz; conversion happens at the boundary through
//! [`RunConfig`]. Field amplitudes are dimensionless and the vacuum
//! permittivity in energy expressions is taken as 1.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mode frequencies of the baseline acoustic system, Hz.
pub const BASELINE_OMEGA_E_HZ: f64 = 1460.0;
pub const BASELINE_OMEGA_G_HZ: f64 = 1240.0;
/// Coupling magnitude giving a resonant gain rate of about 2π·10 rad/s at unit pump.
pub const BASELINE_CHI: f64 = 1.0625e6;
pub const BASELINE_PUMP_AMPLITUDE: f64 = 1.0;

#[inline]
pub fn hz_to_rad(f_hz: f64) -> f64 {
    f_hz * TAU
}

#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TAU
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("mode frequencies must satisfy omega_e > omega_g > 0 (got omega_e={omega_e}, omega_g={omega_g})")]
    ModeOrdering { omega_e: f64, omega_g: f64 },
    #[error("coupling {name} is not finite: {value}")]
    NonFiniteCoupling { name: &'static str, value: f64 },
    #[error("pump amplitude must be finite and non-negative (got {0})")]
    PumpAmplitude(f64),
    #[error("pump frequency must be finite and positive (got {0} rad/s)")]
    PumpFrequency(f64),
    #[error("pump phase must be finite (got {0})")]
    PumpPhase(f64),
    #[error("initial envelope is not finite")]
    InitialConditions,
    #[error("{0}")]
    Invalid(String),
}

/// Two target modes and their parametric couplings.
///
/// `chi_g` drives the e-mode through `E_g E_p`; `chi_e` drives the g-mode
/// through `E_e E_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub omega_e: f64,
    pub omega_g: f64,
    pub chi_e: f64,
    pub chi_g: f64,
}

impl SystemConfig {
    pub fn new(omega_e: f64, omega_g: f64, chi_e: f64, chi_g: f64) -> Result<Self, ConfigError> {
        if !(omega_g.is_finite() && omega_e.is_finite() && omega_g > 0.0 && omega_e > omega_g) {
            return Err(ConfigError::ModeOrdering { omega_e, omega_g });
        }
        if !chi_e.is_finite() {
            return Err(ConfigError::NonFiniteCoupling { name: "chi_e", value: chi_e });
        }
        if !chi_g.is_finite() {
            return Err(ConfigError::NonFiniteCoupling { name: "chi_g", value: chi_g });
        }
        Ok(Self { omega_e, omega_g, chi_e, chi_g })
    }

    pub fn from_hz(omega_e_hz: f64, omega_g_hz: f64, chi_e: f64, chi_g: f64) -> Result<Self, ConfigError> {
        Self::new(hz_to_rad(omega_e_hz), hz_to_rad(omega_g_hz), chi_e, chi_g)
    }

    /// 1460/1240 Hz modes with `|chi_e| = |chi_g| = BASELINE_CHI` and the
    /// requested symmetry sign (`Zero` leaves both couplings at zero).
    pub fn baseline(symmetry: Symmetry) -> Self {
        let (chi_e, chi_g) = match symmetry {
            Symmetry::Positive => (BASELINE_CHI, BASELINE_CHI),
            Symmetry::Negative => (BASELINE_CHI, -BASELINE_CHI),
            Symmetry::Zero => (0.0, 0.0),
        };
        Self {
            omega_e: hz_to_rad(BASELINE_OMEGA_E_HZ),
            omega_g: hz_to_rad(BASELINE_OMEGA_G_HZ),
            chi_e,
            chi_g,
        }
    }

    pub fn with_couplings(self, chi_e: f64, chi_g: f64) -> Result<Self, ConfigError> {
        Self::new(self.omega_e, self.omega_g, chi_e, chi_g)
    }

    /// Normal-mode splitting Δω = ω_e − ω_g.
    pub fn difference_frequency(&self) -> f64 {
        self.omega_e - self.omega_g
    }

    /// Σω = ω_e + ω_g.
    pub fn sum_frequency(&self) -> f64 {
        self.omega_e + self.omega_g
    }

    /// Pump frequency that is exactly resonant with `branch`.
    pub fn resonant_pump(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Opa => self.sum_frequency(),
            Branch::Dpa => self.difference_frequency(),
        }
    }

    pub fn coupling_product(&self) -> f64 {
        self.chi_e * self.chi_g
    }
}

/// External pump `E_p(t) = A₀ cos(νt + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    pub amplitude: f64,
    pub nu: f64,
    pub phi: f64,
}

impl PumpConfig {
    pub fn new(amplitude: f64, nu: f64, phi: f64) -> Result<Self, ConfigError> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(ConfigError::PumpAmplitude(amplitude));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(ConfigError::PumpFrequency(nu));
        }
        if !phi.is_finite() {
            return Err(ConfigError::PumpPhase(phi));
        }
        Ok(Self { amplitude, nu, phi })
    }

    /// Zero-phase pump exactly on the `branch` resonance of `cfg`.
    pub fn resonant(cfg: &SystemConfig, branch: Branch, amplitude: f64) -> Self {
        Self { amplitude, nu: cfg.resonant_pump(branch), phi: 0.0 }
    }

    /// Complex pump amplitude Ẽ_p = A₀ e^{−iφ}.
    pub fn complex_amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, -self.phi)
    }

    #[inline]
    pub fn field(&self, t: f64) -> f64 {
        self.amplitude * (self.nu * t + self.phi).cos()
    }
}

/// Complex envelopes Ẽ_e(0), Ẽ_g(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub envelope_e0: Complex64,
    pub envelope_g0: Complex64,
}

impl InitialConditions {
    pub fn new(envelope_e0: Complex64, envelope_g0: Complex64) -> Result<Self, ConfigError> {
        if !(envelope_e0.is_finite() && envelope_g0.is_finite()) {
            return Err(ConfigError::InitialConditions);
        }
        Ok(Self { envelope_e0, envelope_g0 })
    }

    /// Ẽ_e(0) = 1, Ẽ_g(0) = 0.
    pub fn unit_e() -> Self {
        Self { envelope_e0: Complex64::new(1.0, 0.0), envelope_g0: Complex64::new(0.0, 0.0) }
    }

    /// Real state `[E_e, dE_e/dt, E_g, dE_g/dt]` at t = 0 using
    /// `E = Re Ẽ` and `Ė = Re(−iω Ẽ)`.
    pub fn real_state(&self, cfg: &SystemConfig) -> [f64; 4] {
        let minus_i = Complex64::new(0.0, -1.0);
        [
            self.envelope_e0.re,
            (minus_i * cfg.omega_e * self.envelope_e0).re,
            self.envelope_g0.re,
            (minus_i * cfg.omega_g * self.envelope_g0).re,
        ]
    }
}

/// Pump detunings from the difference and sum frequencies, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    pub delta: f64,
    pub delta_s: f64,
}

pub fn derived_detunings(cfg: &SystemConfig, pump: &PumpConfig) -> Detunings {
    Detunings {
        delta: pump.nu - cfg.difference_frequency(),
        delta_s: pump.nu - cfg.sum_frequency(),
    }
}

/// Sign of `chi_e * chi_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Positive,
    Negative,
    Zero,
}

impl Symmetry {
    pub fn sign(self) -> i8 {
        match self {
            Symmetry::Positive => 1,
            Symmetry::Negative => -1,
            Symmetry::Zero => 0,
        }
    }

    /// The symmetry sign under which `branch` amplifies.
    pub fn amplifying(branch: Branch) -> Self {
        match branch {
            Branch::Opa => Symmetry::Positive,
            Branch::Dpa => Symmetry::Negative,
        }
    }
}

pub fn symmetry_relation(cfg: &SystemConfig) -> Symmetry {
    // Compare signs instead of multiplying so that tiny couplings cannot underflow to zero.
    if cfg.chi_e == 0.0 || cfg.chi_g == 0.0 {
        Symmetry::Zero
    } else if (cfg.chi_e > 0.0) == (cfg.chi_g > 0.0) {
        Symmetry::Positive
    } else {
        Symmetry::Negative
    }
}

/// Sum-frequency (OPA) or difference-frequency (DPA) branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Opa,
    Dpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Amplify,
    Exchange,
    BelowThreshold,
    OffResonant,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Amplify => "amplify",
            Regime::Exchange => "exchange",
            Regime::BelowThreshold => "below_threshold",
            Regime::OffResonant => "off_resonant",
        }
    }
}

/// Gain classification for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    /// Branch whose detuning is smaller in magnitude.
    pub branch: Branch,
    /// Ω (DPA) or Ω_s (OPA), rad/s, principal root.
    pub gain_rate: Complex64,
    pub regime: Regime,
    /// A₀ / A_threshold evaluated with the amplifying symmetry sign.
    pub threshold_margin: f64,
    /// Envelope growth rate measured from a simulation, if one was run.
    pub fitted_rate: Option<f64>,
}

/// Uniformly sampled real fields, optionally with their time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples_e: Vec<f64>,
    pub samples_g: Vec<f64>,
    /// `(dE_e/dt, dE_g/dt)` per sample.
    pub velocities: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    E,
    G,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples_e: Vec<f64>, samples_g: Vec<f64>) -> Result<Self, ConfigError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ConfigError::Invalid(format!("sample spacing must be positive, got {dt}")));
        }
        if samples_e.len() != samples_g.len() || samples_e.len() < 2 {
            return Err(ConfigError::Invalid(format!(
                "channels need equal length >= 2 (got {} and {})",
                samples_e.len(),
                samples_g.len()
            )));
        }
        Ok(Self { t0, dt, samples_e, samples_g, velocities: None })
    }

    pub fn len(&self) -> usize {
        self.samples_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples_e.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::E => &self.samples_e,
            Channel::G => &self.samples_g,
        }
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    /// `t,E_e,E_g[,dEe_dt,dEg_dt]`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.velocities.is_some() { "t,E_e,E_g,dEe_dt,dEg_dt\n" } else { "t,E_e,E_g\n" });
        for i in 0..self.len() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}", self.time(i), self.samples_e[i], self.samples_g[i]));
            if let Some((ve, vg)) = &self.velocities {
                out.push_str(&format!(",{:.16e},{:.16e}", ve[i], vg[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// JSON run configuration. Frequencies in Hz, phase in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega_e_hz: f64,
    pub omega_g_hz: f64,
    pub chi_e: f64,
    pub chi_g: f64,
    pub pump: PumpJson,
    pub init: InitJson,
    /// Optional integration controls (not part of the physical model).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunControls>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpJson {
    pub a0: f64,
    pub nu_hz: f64,
    pub phi_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitJson {
    pub e0_re: f64,
    pub e0_im: f64,
    pub g0_re: f64,
    pub g0_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunControls {
    pub duration_s: Option<f64>,
    pub dt_s: Option<f64>,
    pub sample_stride: Option<usize>,
}

impl RunConfig {
    /// Baseline run with the given symmetry sign and pump branch.
    pub fn baseline(symmetry: Symmetry, branch: Branch) -> Self {
        let cfg = SystemConfig::baseline(symmetry);
        Self {
            omega_e_hz: BASELINE_OMEGA_E_HZ,
            omega_g_hz: BASELINE_OMEGA_G_HZ,
            chi_e: cfg.chi_e,
            chi_g: cfg.chi_g,
            pump: PumpJson {
                a0: BASELINE_PUMP_AMPLITUDE,
                nu_hz: match branch {
                    Branch::Opa => BASELINE_OMEGA_E_HZ + BASELINE_OMEGA_G_HZ,
                    Branch::Dpa => BASELINE_OMEGA_E_HZ - BASELINE_OMEGA_G_HZ,
                },
                phi_rad: 0.0,
            },
            init: InitJson { e0_re: 1.0, e0_im: 0.0, g0_re: 0.0, g0_im: 0.0 },
            run: None,
        }
    }

    pub fn system(&self) -> Result<SystemConfig, ConfigError> {
        SystemConfig::from_hz(self.omega_e_hz, self.omega_g_hz, self.chi_e, self.chi_g)
    }

    pub fn pump(&self) -> Result<PumpConfig, ConfigError> {
        PumpConfig::new(self.pump.a0, hz_to_rad(self.pump.nu_hz), self.pump.phi_rad)
    }

    pub fn initial(&self) -> Result<InitialConditions, ConfigError> {
        InitialConditions::new(
            Complex64::new(self.init.e0_re, self.init.e0_im),
            Complex64::new(self.init.g0_re, self.init.g0_im),
        )
    }

    pub fn resolve(&self) -> Result<(SystemConfig, PumpConfig, InitialConditions), ConfigError> {
        Ok((self.system()?, self.pump()?, self.initial()?))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }
}
