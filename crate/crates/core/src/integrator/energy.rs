use crate::model::{PumpConfig, SystemConfig, TimeSeries};

use super::IntegrationError;

/// Instantaneous power delivered by the driving terms and its running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyFlow {
    pub t0: f64,
    pub dt: f64,
    /// `dW_e/dt = Ė_e · χ_g E_g E_p`
    pub flow_e: Vec<f64>,
    /// `dW_g/dt = Ė_g · χ_e E_e E_p`
    pub flow_g: Vec<f64>,
    /// Trapezoidal running integrals of the flows, zero at the first sample.
    pub work_e: Vec<f64>,
    pub work_g: Vec<f64>,
}

impl EnergyFlow {
    pub fn len(&self) -> usize {
        self.flow_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flow_e.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// Flow into each mode through its driving term (ε₀ = 1). The flow into
/// mode e uses the e-equation drive `χ_g E_g E_p`, and vice versa.
pub fn energy_flow_numeric(ts: &TimeSeries, cfg: &SystemConfig, pump: &PumpConfig) -> Result<EnergyFlow, IntegrationError> {
    let (ve, vg) = ts.velocities.as_ref().ok_or(IntegrationError::MissingVelocity)?;
    let n = ts.len();
    let mut flow_e = Vec::with_capacity(n);
    let mut flow_g = Vec::with_capacity(n);
    for i in 0..n {
        let ep = pump.field(ts.time(i));
        flow_e.push(ve[i] * cfg.chi_g * ts.samples_g[i] * ep);
        flow_g.push(vg[i] * cfg.chi_e * ts.samples_e[i] * ep);
    }
    let work_e = cumulative_trapezoid(&flow_e, ts.dt);
    let work_g = cumulative_trapezoid(&flow_g, ts.dt);
    Ok(EnergyFlow { t0: ts.t0, dt: ts.dt, flow_e, flow_g, work_e, work_g })
}

fn cumulative_trapezoid(y: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in y.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Oscillator energies `(Ė² + ω²E²)/2` of both modes.
pub fn oscillator_energy(ts: &TimeSeries, cfg: &SystemConfig) -> Result<(Vec<f64>, Vec<f64>), IntegrationError> {
    let (ve, vg) = ts.velocities.as_ref().ok_or(IntegrationError::MissingVelocity)?;
    let w = |omega: f64, x: &[f64], v: &[f64]| -> Vec<f64> {
        x.iter().zip(v).map(|(&x, &v)| 0.5 * (v * v + omega * omega * x * x)).collect()
    };
    Ok((w(cfg.omega_e, &ts.samples_e, ve), w(cfg.omega_g, &ts.samples_g, vg)))
}

/// Boxcar average over `window` samples. Element `j` of the result averages
/// `values[j..j + window]` and is centred on index `j + (window - 1) / 2`.
pub fn coarse_grain(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    if values.len() < window {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in values {
        acc += v;
        prefix.push(acc);
    }
    (0..=values.len() - window)
        .map(|j| (prefix[j + window] - prefix[j]) / window as f64)
        .collect()
}
