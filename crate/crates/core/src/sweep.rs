//! Parallel parameter sweeps over one or two axes.
//!
//! Cells are independent and are collected in row-major order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::classify_regime;
use crate::cavity::{effective_coupling, CavityConfig};
use crate::integrator::{integrate_full, integrate_full_with, FullSettings, IntegrationError, MIN_STEPS_PER_CYCLE};
use crate::model::{
    hz_to_rad, symmetry_relation, Branch, Channel, ConfigError, GainReport, InitialConditions, PumpConfig, RunConfig,
    Symmetry, SystemConfig, BASELINE_CHI,
};
use crate::spectral::{fit_growth, SpectralError};

pub const DEFAULT_HORIZON_S: f64 = 0.5;
pub const DEFAULT_STEPS_PER_CYCLE: f64 = 256.0;
/// Fraction of the horizon, counted from the end, scanned for the peak.
pub const PEAK_WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "nu_hz")]
    NuHz,
    #[serde(rename = "chi_e")]
    ChiE,
    #[serde(rename = "chi_g")]
    ChiG,
    /// Receiver position in units of `λ_g`.
    #[serde(rename = "x_r")]
    XR,
}

impl Parameter {
    pub fn column(self) -> &'static str {
        match self {
            Parameter::NuHz => "nu_hz",
            Parameter::ChiE => "chi_e",
            Parameter::ChiG => "chi_g",
            Parameter::XR => "x_r_over_lambda_g",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Largest `|Ẽ_e|` over the last 10% of the horizon.
    FinalPeakMagnitude,
    /// Fitted envelope growth of `E_e`, doubled so it compares with Re Ω.
    FittedGrowthRate,
    /// Re Ω of the branch nearest resonance; no simulation.
    AnalyticReOmega,
}

/// Feedback-line parameters used when an axis is `x_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityLine {
    pub chi: f64,
    pub wave_speed: f64,
}

impl Default for CavityLine {
    fn default() -> Self {
        Self { chi: BASELINE_CHI, wave_speed: 1.0 }
    }
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON_S
}

fn default_steps_per_cycle() -> f64 {
    DEFAULT_STEPS_PER_CYCLE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    /// Values not set by an axis.
    pub base: RunConfig,
    pub metric: Metric,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    #[serde(default = "default_steps_per_cycle")]
    pub steps_per_cycle: f64,
    #[serde(default)]
    pub cavity: CavityLine,
}

impl SweepSpec {
    /// Baseline run configuration (negative symmetry, difference pump) with default controls.
    pub fn baseline(axis1: Axis, axis2: Option<Axis>, metric: Metric) -> Self {
        Self {
            axis1,
            axis2,
            base: RunConfig::baseline(Symmetry::Negative, Branch::Dpa),
            metric,
            horizon_s: DEFAULT_HORIZON_S,
            steps_per_cycle: DEFAULT_STEPS_PER_CYCLE,
            cavity: CavityLine::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn cell_count(&self) -> usize {
        self.axis1.count * self.axis2.map_or(1, |a| a.count)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let axes: Vec<&Axis> = std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect();
        for a in &axes {
            let name = a.parameter.column();
            if a.count < 2 {
                return Err(SweepError::InvalidSpec(format!("axis {name} needs count >= 2, got {}", a.count)));
            }
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(SweepError::InvalidSpec(format!("axis {name} needs finite min < max")));
            }
            if matches!(a.parameter, Parameter::XR | Parameter::NuHz) && a.min < 0.0 {
                return Err(SweepError::InvalidSpec(format!("axis {name} must be non-negative")));
            }
        }
        if let [a, b] = axes[..] {
            if a.parameter == b.parameter {
                return Err(SweepError::InvalidSpec("both axes sweep the same parameter".into()));
            }
            if (a.parameter == Parameter::XR) != (b.parameter == Parameter::XR)
                && matches!(a.parameter, Parameter::ChiE | Parameter::ChiG | Parameter::XR)
                && matches!(b.parameter, Parameter::ChiE | Parameter::ChiG | Parameter::XR)
            {
                return Err(SweepError::InvalidSpec("x_r already fixes both couplings".into()));
            }
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return Err(SweepError::InvalidSpec(format!("horizon_s must be positive, got {}", self.horizon_s)));
        }
        if !(self.steps_per_cycle.is_finite() && self.steps_per_cycle >= MIN_STEPS_PER_CYCLE) {
            return Err(SweepError::InvalidSpec(format!(
                "steps_per_cycle must be >= {MIN_STEPS_PER_CYCLE}, got {}",
                self.steps_per_cycle
            )));
        }
        if !(self.cavity.chi.is_finite() && self.cavity.chi > 0.0 && self.cavity.wave_speed > 0.0) {
            return Err(SweepError::InvalidSpec("cavity chi and wave_speed must be positive".into()));
        }
        self.base.resolve()?;
        Ok(())
    }

    fn coordinates(&self, index: usize) -> (f64, Option<f64>) {
        match self.axis2 {
            None => (self.axis1.value(index), None),
            Some(a2) => (self.axis1.value(index / a2.count), Some(a2.value(index % a2.count))),
        }
    }

    /// Run configuration of one cell.
    pub fn cell_config(&self, x1: f64, x2: Option<f64>) -> RunConfig {
        let mut run = self.base;
        let axes = std::iter::once((self.axis1, x1)).chain(self.axis2.zip(x2));
        for (axis, v) in axes {
            match axis.parameter {
                Parameter::NuHz => run.pump.nu_hz = v,
                Parameter::ChiE => run.chi_e = v,
                Parameter::ChiG => run.chi_g = v,
                Parameter::XR => {
                    let omega_g = hz_to_rad(run.omega_g_hz);
                    let lambda_g = std::f64::consts::TAU * self.cavity.wave_speed / omega_g;
                    let cav = CavityConfig {
                        omega_e: hz_to_rad(run.omega_e_hz),
                        omega_g,
                        c: self.cavity.wave_speed,
                        chi: self.cavity.chi,
                        x_r: v * lambda_g,
                        a0: run.pump.a0,
                        nu: hz_to_rad(run.pump.nu_hz),
                        phi: run.pump.phi_rad,
                    };
                    (run.chi_e, run.chi_g) = effective_coupling(&cav);
                }
            }
        }
        run
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub x1: f64,
    pub x2: Option<f64>,
    /// NaN when the cell failed.
    pub metric: f64,
    pub report: Option<GainReport>,
    pub symmetry: Option<Symmetry>,
    /// `error:<kind>` marker for failed cells.
    pub error: Option<String>,
}

impl Cell {
    /// Analytic regime label, or the error marker.
    pub fn label(&self) -> &str {
        match (&self.error, &self.report) {
            (Some(e), _) => e,
            (None, Some(r)) => r.regime.label(),
            (None, None) => "error:unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub cells: Vec<Cell>,
}

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.spec.axis1.count, self.spec.axis2.map_or(1, |a| a.count))
    }

    pub fn csv_header(&self) -> String {
        let mut h = self.spec.axis1.parameter.column().to_string();
        if let Some(a) = self.spec.axis2 {
            h.push(',');
            h.push_str(a.parameter.column());
        }
        h.push_str(",metric,regime");
        h
    }

    /// `axis1[,axis2],metric,regime`, one row per cell in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!("{:.16e}", c.x1));
            if let Some(x2) = c.x2 {
                out.push_str(&format!(",{x2:.16e}"));
            }
            out.push_str(&format!(",{:.16e},{}\n", c.metric, c.label()));
        }
        out
    }

    /// Pretty JSON of the specification that produced the grid.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("sweep spec serializes")
    }

    /// Metric values reshaped as rows along axis1.
    pub fn metric_rows(&self) -> Vec<Vec<f64>> {
        let (_, n2) = self.shape();
        self.cells.chunks(n2).map(|row| row.iter().map(|c| c.metric).collect()).collect()
    }
}

/// Evaluate every cell on a pool of `jobs` threads (`0` lets rayon decide).
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepGrid, SweepError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let cells = pool.install(|| (0..spec.cell_count()).into_par_iter().map(|i| evaluate_cell(spec, i)).collect());
    Ok(SweepGrid { spec: spec.clone(), cells })
}

/// Analytic-only pass: sign of `χ_e χ_g` and the regime label per cell.
pub fn regime_map(spec: &SweepSpec, jobs: usize) -> Result<SweepGrid, SweepError> {
    let spec = SweepSpec { metric: Metric::AnalyticReOmega, ..spec.clone() };
    run_sweep(&spec, jobs)
}

enum CellFailure {
    Config,
    Integration(IntegrationError),
    Fit,
}

impl CellFailure {
    fn marker(&self) -> String {
        let kind = match self {
            CellFailure::Config => "config",
            CellFailure::Integration(IntegrationError::StepTooLarge { .. }) => "step_too_large",
            CellFailure::Integration(IntegrationError::NonFinite { .. }) => "non_finite",
            CellFailure::Integration(_) => "integration",
            CellFailure::Fit => "fit",
        };
        format!("error:{kind}")
    }
}

fn evaluate_cell(spec: &SweepSpec, index: usize) -> Cell {
    let (x1, x2) = spec.coordinates(index);
    let mut cell = Cell { index, x1, x2, metric: f64::NAN, report: None, symmetry: None, error: None };
    let run = spec.cell_config(x1, x2);
    let (cfg, pump, init) = match run.resolve() {
        Ok(v) => v,
        Err(_) => {
            cell.error = Some(CellFailure::Config.marker());
            return cell;
        }
    };
    let mut report = classify_regime(&cfg, &pump);
    cell.symmetry = Some(symmetry_relation(&cfg));
    let metric = match spec.metric {
        Metric::AnalyticReOmega => Ok(report.gain_rate.re),
        Metric::FinalPeakMagnitude => final_peak_magnitude(&cfg, &pump, &init, spec),
        Metric::FittedGrowthRate => fitted_growth(&cfg, &pump, &init, spec).map(|rate| {
            report.fitted_rate = Some(rate);
            2.0 * rate
        }),
    };
    match metric {
        Ok(m) => cell.metric = m,
        Err(f) => cell.error = Some(f.marker()),
    }
    cell.report = Some(report);
    cell
}

fn final_peak_magnitude(
    cfg: &SystemConfig,
    pump: &PumpConfig,
    init: &InitialConditions,
    spec: &SweepSpec,
) -> Result<f64, CellFailure> {
    let settings = FullSettings::resolved(cfg, pump, spec.horizon_s, spec.steps_per_cycle);
    let t_from = (1.0 - PEAK_WINDOW_FRACTION) * spec.horizon_s;
    let mut peak = 0.0f64;
    integrate_full_with(cfg, pump, init, &settings, |_, t, y| {
        if t >= t_from {
            peak = peak.max(y[0].hypot(y[1] / cfg.omega_e));
        }
    })
    .map_err(CellFailure::Integration)?;
    Ok(peak)
}

/// Envelope growth rate of `E_e`; zero when the envelope is not growing.
fn fitted_growth(
    cfg: &SystemConfig,
    pump: &PumpConfig,
    init: &InitialConditions,
    spec: &SweepSpec,
) -> Result<f64, CellFailure> {
    let stride = (spec.steps_per_cycle / 32.0).floor().max(1.0) as usize;
    let settings = FullSettings::resolved(cfg, pump, spec.horizon_s, spec.steps_per_cycle).with_stride(stride);
    let ts = integrate_full(cfg, pump, init, &settings).map_err(CellFailure::Integration)?;
    let carrier_hz = cfg.omega_e / std::f64::consts::TAU;
    match fit_growth(ts.channel(Channel::E), ts.dt, carrier_hz) {
        Ok(fit) => Ok(fit.rate),
        Err(SpectralError::NotGrowing { .. }) => Ok(0.0),
        Err(_) => Err(CellFailure::Fit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi_plane(n: usize) -> SweepSpec {
        let chi = BASELINE_CHI;
        SweepSpec::baseline(
            Axis { parameter: Parameter::ChiE, min: -2.0 * chi, max: 2.0 * chi, count: n },
            Some(Axis { parameter: Parameter::ChiG, min: -2.0 * chi, max: 2.0 * chi, count: n }),
            Metric::AnalyticReOmega,
        )
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis { parameter: Parameter::NuHz, min: 10.0, max: 3000.0, count: 300 };
        assert_eq!(a.value(0), 10.0);
        assert_eq!(a.value(21), 220.0);
        assert_eq!(a.value(269), 2700.0);
        assert_eq!(a.value(299), 3000.0);
    }

    #[test]
    fn analytic_plane_amplifies_in_negative_quadrants() {
        let grid = regime_map(&chi_plane(9), 2).unwrap();
        for c in &grid.cells {
            let product = c.x1 * c.x2.unwrap();
            assert_eq!(c.metric > 0.0, product < 0.0, "cell {c:?}");
            if product == 0.0 {
                assert_eq!(c.symmetry, Some(Symmetry::Zero));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let grid = regime_map(&chi_plane(3), 1).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "chi_e,chi_g,metric,regime");
        assert_eq!(lines.len(), 10);
        assert!(lines[1].ends_with(",exchange"), "{}", lines[1]);
        assert!(lines[3].ends_with(",amplify"), "{}", lines[3]);
    }

    #[test]
    fn invalid_specs() {
        let mut s = chi_plane(3);
        s.axis1.count = 1;
        assert!(matches!(run_sweep(&s, 1), Err(SweepError::InvalidSpec(_))));
        let mut s = chi_plane(3);
        s.axis2.as_mut().unwrap().parameter = Parameter::ChiE;
        assert!(matches!(run_sweep(&s, 1), Err(SweepError::InvalidSpec(_))));
        let mut s = chi_plane(3);
        s.steps_per_cycle = 50.0;
        assert!(matches!(run_sweep(&s, 1), Err(SweepError::InvalidSpec(_))));
        assert!(SweepSpec::from_json("{\"axis1\": 3}").is_err());
    }

    #[test]
    fn failing_cells_become_markers() {
        // ν = 0 is not a valid pump; only that cell fails
        let mut s = chi_plane(3);
        s.axis2 = None;
        s.axis1 = Axis { parameter: Parameter::NuHz, min: 0.0, max: 220.0, count: 3 };
        let grid = run_sweep(&s, 1).unwrap();
        assert_eq!(grid.cells[0].label(), "error:config");
        assert!(grid.cells[0].metric.is_nan());
        assert!(grid.cells[1..].iter().all(|c| c.error.is_none()));
        assert!(grid.to_csv().lines().nth(1).unwrap().ends_with(",NaN,error:config"));
    }

    #[test]
    fn peak_metric_grows_only_with_negative_product() {
        let mut s = chi_plane(3);
        s.metric = Metric::FinalPeakMagnitude;
        s.horizon_s = 0.2;
        let grid = run_sweep(&s, 0).unwrap();
        for c in &grid.cells {
            let product = c.x1 * c.x2.unwrap();
            assert_eq!(c.metric > 2.0, product < 0.0, "cell {c:?}");
        }
    }
}
