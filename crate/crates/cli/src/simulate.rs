use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use pwl_core::analytic::{classify_regime, dpa_envelope, opa_envelope, with_carrier};
use pwl_core::integrator::{
    integrate_envelope, integrate_full, max_full_step, EnvelopeForm, EnvelopeSettings, FullSettings,
};
use pwl_core::model::{Branch, Channel, GainReport, RunConfig, TimeSeries};
use pwl_core::spectral::{fit_growth_rate, SpectralError};
use pwl_core::sweep::DEFAULT_STEPS_PER_CYCLE;
use serde::Serialize;

use crate::error::{core, read_config, CliError};
use crate::output::{snapshot, OutputDir};

pub const DEFAULT_DURATION_S: f64 = 0.5;
pub const DEFAULT_SAMPLE_STRIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Second-order field equations.
    Full,
    /// First-order envelope equations of the branch nearest resonance.
    Envelope,
    /// Closed-form envelopes of the branch nearest resonance.
    Analytic,
}

/// Time grid shared by all modes: step `dt`, one sample every `stride` steps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Grid {
    pub duration_s: f64,
    pub dt_s: f64,
    pub sample_stride: usize,
}

impl Grid {
    pub fn sample_dt(&self) -> f64 {
        self.dt_s * self.sample_stride as f64
    }
}

pub fn resolve_grid(run: &RunConfig) -> Result<Grid, CliError> {
    let (cfg, pump, _) = run.resolve().map_err(core)?;
    let controls = run.run.unwrap_or_default();
    let duration_s = controls.duration_s.unwrap_or(DEFAULT_DURATION_S);
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(CliError::Config(format!("run.duration_s must be positive, got {duration_s}")));
    }
    let limit = max_full_step(&cfg, &pump);
    let dt_s = match controls.dt_s {
        Some(dt) if !(dt.is_finite() && dt > 0.0) => {
            return Err(CliError::Config(format!("run.dt_s must be positive, got {dt}")));
        }
        Some(dt) if dt > limit => {
            return Err(CliError::Config(format!("run.dt_s = {dt} exceeds the stability limit {limit}")));
        }
        Some(dt) => dt,
        None => FullSettings::resolved(&cfg, &pump, duration_s, DEFAULT_STEPS_PER_CYCLE).dt,
    };
    let sample_stride = controls.sample_stride.unwrap_or(DEFAULT_SAMPLE_STRIDE);
    if sample_stride == 0 {
        return Err(CliError::Config("run.sample_stride must be >= 1".into()));
    }
    if dt_s * sample_stride as f64 > duration_s {
        return Err(CliError::Config("sample spacing exceeds run.duration_s".into()));
    }
    Ok(Grid { duration_s, dt_s, sample_stride })
}

/// Result of one simulation in any mode.
pub struct Simulation {
    pub series: TimeSeries,
    /// `(t, ℰ_e, ℰ_g)` for the envelope and analytic modes.
    pub envelopes: Option<(Vec<f64>, Vec<Complex64>, Vec<Complex64>)>,
    pub report: GainReport,
    pub grid: Grid,
}

pub fn simulate(run: &RunConfig, mode: Mode) -> Result<Simulation, CliError> {
    let (cfg, pump, init) = run.resolve().map_err(core)?;
    let grid = resolve_grid(run)?;
    let mut report = classify_regime(&cfg, &pump);
    let sample_dt = grid.sample_dt();
    let (series, envelopes) = match mode {
        Mode::Full => {
            let settings = FullSettings { dt: grid.dt_s, t_end: grid.duration_s, sample_stride: grid.sample_stride };
            let ts = integrate_full(&cfg, &pump, &init, &settings).map_err(core)?;
            match fit_growth_rate(&ts, Channel::E, cfg.omega_e / std::f64::consts::TAU) {
                Ok(rate) => report.fitted_rate = Some(rate),
                Err(SpectralError::NotGrowing { .. } | SpectralError::TooShort { .. }) => {}
                Err(e) => return Err(core(e)),
            }
            (ts, None)
        }
        Mode::Envelope => {
            let form = match report.branch {
                Branch::Dpa => EnvelopeForm::Dpa,
                Branch::Opa => EnvelopeForm::Opa,
            };
            let env = integrate_envelope(&cfg, &pump, &init, &EnvelopeSettings::new(grid.duration_s, sample_dt), form)
                .map_err(core)?;
            let t = (0..env.len()).map(|i| env.time(i)).collect();
            (env.real_fields(&cfg), Some((t, env.e, env.g)))
        }
        Mode::Analytic => {
            let n = (grid.duration_s / sample_dt + 1e-9).floor() as usize;
            let t: Vec<f64> = (0..=n).map(|i| i as f64 * sample_dt).collect();
            let (e, g): (Vec<Complex64>, Vec<Complex64>) = t
                .iter()
                .map(|&t| match report.branch {
                    Branch::Dpa => dpa_envelope(&cfg, &pump, &init, t),
                    Branch::Opa => opa_envelope(&cfg, &pump, &init, t),
                })
                .unzip();
            let (re, rg): (Vec<f64>, Vec<f64>) = t
                .iter()
                .zip(e.iter().zip(&g))
                .map(|(&t, (&e, &g))| {
                    let (fe, fg) = with_carrier(&cfg, (e, g), t);
                    (fe.re, fg.re)
                })
                .unzip();
            let ts = TimeSeries::new(0.0, sample_dt, re, rg).map_err(core)?;
            (ts, Some((t, e, g)))
        }
    };
    Ok(Simulation { series, envelopes, report, grid })
}

/// `t,re_Ee,im_Ee,re_Eg,im_Eg`
pub fn envelope_csv(t: &[f64], e: &[Complex64], g: &[Complex64]) -> String {
    let mut out = String::from("t,re_Ee,im_Ee,re_Eg,im_Eg\n");
    for ((t, e), g) in t.iter().zip(e).zip(g) {
        out.push_str(&format!("{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", e.re, e.im, g.re, g.im));
    }
    out
}

#[derive(Serialize)]
struct Snapshot<'a> {
    mode: Mode,
    run: &'a RunConfig,
    grid: Grid,
}

pub fn cmd_simulate(config: &Path, mode: Mode, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut dir = OutputDir::create(out)?;
    let run = RunConfig::from_json(&read_config(config)?).map_err(core)?;
    let sim = simulate(&run, mode)?;
    dir.write("timeseries.csv", &sim.series.to_csv())?;
    if let Some((t, e, g)) = &sim.envelopes {
        dir.write("envelope.csv", &envelope_csv(t, e, g))?;
    }
    dir.write_json("gain_report.json", &sim.report)?;
    dir.finish("simulate", snapshot(&Snapshot { mode, run: &run, grid: sim.grid }), seed)?;
    Ok(())
}
