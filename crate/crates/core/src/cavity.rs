//! Waveguide feedback loop: a receiver antenna at `x_r` feeds a mixer whose
//! output drives both modes, so the couplings become `χ cos(k x_r)`.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::principal_sqrt;
use crate::model::{
    hz_to_rad, rad_to_hz, Branch, ConfigError, PumpConfig, SystemConfig, BASELINE_CHI, BASELINE_OMEGA_E_HZ,
    BASELINE_OMEGA_G_HZ, BASELINE_PUMP_AMPLITUDE,
};
use crate::sweep::{run_sweep, Axis, Metric, Parameter, SweepError, SweepGrid, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// rad/s
    pub omega_e: f64,
    /// rad/s
    pub omega_g: f64,
    /// Wave speed along the line, m/s.
    pub c: f64,
    /// Mixer output efficiency.
    pub chi: f64,
    /// Receiver antenna position, m.
    pub x_r: f64,
    pub a0: f64,
    /// rad/s
    pub nu: f64,
    pub phi: f64,
}

impl CavityConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(omega_e: f64, omega_g: f64, c: f64, chi: f64, x_r: f64, a0: f64, nu: f64, phi: f64) -> Result<Self, ConfigError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ConfigError::Invalid(format!("wave speed must be positive, got {c}")));
        }
        if !(omega_g > 0.0 && omega_e > omega_g && omega_e.is_finite()) {
            return Err(ConfigError::ModeOrdering { omega_e, omega_g });
        }
        if !(chi.is_finite() && chi > 0.0) {
            return Err(ConfigError::Invalid(format!("mixer efficiency must be positive, got {chi}")));
        }
        if !(x_r.is_finite() && x_r >= 0.0) {
            return Err(ConfigError::Invalid(format!("antenna position must be >= 0, got {x_r}")));
        }
        PumpConfig::new(a0, nu, phi)?;
        Ok(Self { omega_e, omega_g, c, chi, x_r, a0, nu, phi })
    }

    /// Baseline modes, `c = 1`, antenna at the origin, resonant pump for `branch`.
    pub fn baseline(branch: Branch) -> Self {
        let omega_e = hz_to_rad(BASELINE_OMEGA_E_HZ);
        let omega_g = hz_to_rad(BASELINE_OMEGA_G_HZ);
        let nu = match branch {
            Branch::Opa => omega_e + omega_g,
            Branch::Dpa => omega_e - omega_g,
        };
        Self { omega_e, omega_g, c: 1.0, chi: BASELINE_CHI, x_r: 0.0, a0: BASELINE_PUMP_AMPLITUDE, nu, phi: 0.0 }
    }

    pub fn at(self, x_r: f64) -> Self {
        Self { x_r, ..self }
    }

    pub fn wavenumbers(&self) -> (f64, f64) {
        (self.omega_e / self.c, self.omega_g / self.c)
    }

    pub fn wavelengths(&self) -> (f64, f64) {
        (TAU * self.c / self.omega_e, TAU * self.c / self.omega_g)
    }

    pub fn system(&self) -> Result<SystemConfig, ConfigError> {
        let (chi_e, chi_g) = effective_coupling(self);
        SystemConfig::new(self.omega_e, self.omega_g, chi_e, chi_g)
    }

    pub fn pump(&self) -> Result<PumpConfig, ConfigError> {
        PumpConfig::new(self.a0, self.nu, self.phi)
    }
}

/// `(χ cos(k_e x_r), χ cos(k_g x_r))`.
pub fn effective_coupling(cav: &CavityConfig) -> (f64, f64) {
    let (ke, kg) = cav.wavenumbers();
    (cav.chi * (ke * cav.x_r).cos(), cav.chi * (kg * cav.x_r).cos())
}

/// Resonant gain `Ω₀ = sqrt(±χ² cos(k_e x_r) cos(k_g x_r) A₀² / (4 ω_e ω_g))`,
/// `+` for the sum pump and `−` for the difference pump.
pub fn cavity_gain(cav: &CavityConfig, branch: Branch) -> Complex64 {
    let (ke, kg) = cav.wavenumbers();
    let sign = match branch {
        Branch::Opa => 1.0,
        Branch::Dpa => -1.0,
    };
    let radicand = sign * cav.chi * cav.chi * (ke * cav.x_r).cos() * (kg * cav.x_r).cos() * cav.a0 * cav.a0
        / (4.0 * cav.omega_e * cav.omega_g);
    principal_sqrt(Complex64::new(radicand, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Both families of difference-pump windows over the same span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpaWindows {
    /// `((2m+1)λ_e/4, (2m+1)λ_g/4)` for each requested `m`.
    pub bracketed: Vec<Interval>,
    /// Every open interval with `cos(k_e x) cos(k_g x) < 0`, up to the end of
    /// the last bracketed window (the final interval is reported whole).
    pub exact: Vec<Interval>,
}

pub fn dpa_windows(cav: &CavityConfig, m_range: RangeInclusive<u32>) -> DpaWindows {
    let (le, lg) = cav.wavelengths();
    let bracketed: Vec<Interval> = m_range
        .clone()
        .map(|m| {
            let q = (2 * m + 1) as f64 / 4.0;
            Interval { lo: q * le, hi: q * lg }
        })
        .collect();
    let span = bracketed.iter().map(|w| w.hi).fold(0.0, f64::max);
    DpaWindows { bracketed, exact: negative_sign_intervals(cav, span) }
}

/// Maximal open intervals on `[0, ∞)` where `χ_e χ_g < 0` that start below `limit`.
pub fn negative_sign_intervals(cav: &CavityConfig, limit: f64) -> Vec<Interval> {
    let (le, lg) = cav.wavelengths();
    // Nodes of each cosine lie at odd multiples of a quarter wavelength.
    let nodes = |lambda: f64| {
        let mut v = Vec::new();
        let mut j = 0u32;
        loop {
            let x = (2 * j + 1) as f64 * lambda / 4.0;
            v.push(x);
            if x > limit + lambda {
                break;
            }
            j += 1;
        }
        v
    };
    let mut zeros = nodes(le);
    zeros.extend(nodes(lg));
    zeros.sort_by(|a, b| a.total_cmp(b));
    zeros.dedup();
    let mut out: Vec<Interval> = Vec::new();
    let mut lo = 0.0;
    for &z in &zeros {
        if lo >= limit {
            break;
        }
        if product_sign(cav, 0.5 * (lo + z)) < 0.0 {
            out.push(Interval { lo, hi: z });
        }
        lo = z;
    }
    out
}

fn product_sign(cav: &CavityConfig, x: f64) -> f64 {
    let (ke, kg) = cav.wavenumbers();
    ((ke * x).cos() * (kg * x).cos()).signum()
}

/// Whether `χ_e χ_g < 0` at `x`.
pub fn in_negative_region(cav: &CavityConfig, x: f64) -> bool {
    let (ke, kg) = cav.wavenumbers();
    (ke * x).cos() * (kg * x).cos() < 0.0
}

/// Antenna-position sweep with `x_r` given in units of `λ_g`. Delegates to
/// [`run_sweep`]; the pump follows `cav.nu`.
pub fn sweep_antenna(
    cav: &CavityConfig,
    x_range: (f64, f64, usize),
    metric: Metric,
    horizon_s: f64,
    jobs: usize,
) -> Result<SweepGrid, SweepError> {
    let spec = antenna_spec(cav, x_range, metric, horizon_s);
    run_sweep(&spec, jobs)
}

/// The sweep specification used by [`sweep_antenna`].
pub fn antenna_spec(cav: &CavityConfig, x_range: (f64, f64, usize), metric: Metric, horizon_s: f64) -> SweepSpec {
    let mut spec = SweepSpec::baseline(
        Axis { parameter: Parameter::XR, min: x_range.0, max: x_range.1, count: x_range.2 },
        None,
        metric,
    );
    spec.base.omega_e_hz = rad_to_hz(cav.omega_e);
    spec.base.omega_g_hz = rad_to_hz(cav.omega_g);
    spec.base.pump.a0 = cav.a0;
    spec.base.pump.nu_hz = rad_to_hz(cav.nu);
    spec.base.pump.phi_rad = cav.phi;
    spec.horizon_s = horizon_s;
    spec.cavity.chi = cav.chi;
    spec.cavity.wave_speed = cav.c;
    spec
}
