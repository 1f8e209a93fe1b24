//! Data presets for the four figure families: resonant time series with
//! spectra, regime maps, energy flows and antenna-position scans.

use std::f64::consts::TAU;
use std::path::Path;

use pwl_core::analytic::{energy_flow_closed_form, gain_rate, FlowScenario};
use pwl_core::cavity::{dpa_windows, sweep_antenna, CavityConfig};
use pwl_core::integrator::{coarse_grain, energy_flow_numeric, integrate_full, FullSettings};
use pwl_core::model::{
    hz_to_rad, Branch, Channel, GainReport, InitialConditions, PumpConfig, RunConfig, Symmetry, SystemConfig,
    BASELINE_CHI, BASELINE_OMEGA_E_HZ, BASELINE_OMEGA_G_HZ, BASELINE_PUMP_AMPLITUDE,
};
use pwl_core::spectral::{dominant_peak, fft_spectrum, fit_growth_rate, Peak, Window};
use pwl_core::sweep::{run_sweep, Axis, Metric, Parameter, SweepGrid, SweepSpec, DEFAULT_STEPS_PER_CYCLE};
use serde::{Deserialize, Serialize};

use crate::error::{core, read_config, CliError};
use crate::output::{snapshot, OutputDir};

/// Preset values; any subset can be overridden from a JSON file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigurePreset {
    pub omega_e_hz: f64,
    pub omega_g_hz: f64,
    /// Coupling magnitude `|χ_e| = |χ_g|`.
    pub chi: f64,
    pub a0: f64,
    pub horizon_s: f64,
    pub steps_per_cycle: f64,
    /// Time-series decimation for the resonant runs.
    pub sample_stride: usize,
    pub nu_min_hz: f64,
    pub nu_max_hz: f64,
    pub nu_count: usize,
    /// Coupling planes span `±chi_span · chi` on both axes.
    pub chi_span: f64,
    pub chi_count: usize,
    pub plane_metric: Metric,
    /// Length of the energy-flow runs in gain periods.
    pub flow_periods: f64,
    /// Antenna scans cover `[0, antenna_max]` in units of `λ_g`.
    pub antenna_max: f64,
    pub antenna_count: usize,
    pub antenna_metric: Metric,
    pub antenna_wave_speed: f64,
}

impl Default for FigurePreset {
    fn default() -> Self {
        Self {
            omega_e_hz: BASELINE_OMEGA_E_HZ,
            omega_g_hz: BASELINE_OMEGA_G_HZ,
            chi: BASELINE_CHI,
            a0: BASELINE_PUMP_AMPLITUDE,
            horizon_s: 0.5,
            steps_per_cycle: DEFAULT_STEPS_PER_CYCLE,
            sample_stride: 4,
            nu_min_hz: 10.0,
            nu_max_hz: 3000.0,
            nu_count: 300,
            chi_span: 2.0,
            chi_count: 21,
            plane_metric: Metric::FinalPeakMagnitude,
            flow_periods: 1.0,
            antenna_max: 2.0,
            antenna_count: 801,
            antenna_metric: Metric::AnalyticReOmega,
            antenna_wave_speed: 1.0,
        }
    }
}

impl FigurePreset {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let p: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("omega_e_hz", self.omega_e_hz),
            ("omega_g_hz", self.omega_g_hz),
            ("chi", self.chi),
            ("horizon_s", self.horizon_s),
            ("chi_span", self.chi_span),
            ("flow_periods", self.flow_periods),
            ("antenna_max", self.antenna_max),
            ("antenna_wave_speed", self.antenna_wave_speed),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.a0.is_finite() && self.a0 >= 0.0) {
            return Err(CliError::Config(format!("a0 must be non-negative, got {}", self.a0)));
        }
        if self.omega_e_hz <= self.omega_g_hz {
            return Err(CliError::Config("omega_e_hz must exceed omega_g_hz".into()));
        }
        if self.sample_stride == 0 {
            return Err(CliError::Config("sample_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Baseline run with the preset frequencies, couplings of the given sign
    /// relation (`χ_e > 0`) and the pump on the branch's resonance.
    pub fn run(&self, symmetry: Symmetry, branch: Branch) -> RunConfig {
        let mut run = RunConfig::baseline(symmetry, branch);
        run.omega_e_hz = self.omega_e_hz;
        run.omega_g_hz = self.omega_g_hz;
        run.chi_e = self.chi;
        run.chi_g = match symmetry {
            Symmetry::Negative => -self.chi,
            _ => self.chi,
        };
        run.pump.a0 = self.a0;
        run.pump.nu_hz = match branch {
            Branch::Dpa => self.omega_e_hz - self.omega_g_hz,
            Branch::Opa => self.omega_e_hz + self.omega_g_hz,
        };
        run
    }

    fn sweep(&self, run: RunConfig, axis1: Axis, axis2: Option<Axis>, metric: Metric) -> SweepSpec {
        let mut spec = SweepSpec::baseline(axis1, axis2, metric);
        spec.base = run;
        spec.horizon_s = self.horizon_s;
        spec.steps_per_cycle = self.steps_per_cycle;
        spec.cavity.chi = self.chi;
        spec.cavity.wave_speed = self.antenna_wave_speed;
        spec
    }

    pub fn nu_sweep(&self, symmetry: Symmetry) -> SweepSpec {
        let branch = amplifying_branch(symmetry);
        let axis = Axis { parameter: Parameter::NuHz, min: self.nu_min_hz, max: self.nu_max_hz, count: self.nu_count };
        self.sweep(self.run(symmetry, branch), axis, None, Metric::FinalPeakMagnitude)
    }

    pub fn chi_plane(&self, branch: Branch) -> SweepSpec {
        let span = self.chi_span * self.chi;
        let axis = |parameter| Axis { parameter, min: -span, max: span, count: self.chi_count };
        let run = self.run(Symmetry::amplifying(branch), branch);
        self.sweep(run, axis(Parameter::ChiE), Some(axis(Parameter::ChiG)), self.plane_metric)
    }

    pub fn cavity(&self, branch: Branch) -> Result<CavityConfig, CliError> {
        let run = self.run(Symmetry::Positive, branch);
        CavityConfig::new(
            hz_to_rad(self.omega_e_hz),
            hz_to_rad(self.omega_g_hz),
            self.antenna_wave_speed,
            self.chi,
            0.0,
            self.a0,
            hz_to_rad(run.pump.nu_hz),
            0.0,
        )
        .map_err(core)
    }
}

fn amplifying_branch(symmetry: Symmetry) -> Branch {
    match symmetry {
        Symmetry::Negative => Branch::Dpa,
        _ => Branch::Opa,
    }
}

fn branch_label(branch: Branch) -> &'static str {
    match branch {
        Branch::Dpa => "dpa",
        Branch::Opa => "opa",
    }
}

#[derive(Debug, Serialize)]
pub struct ResonantSummary {
    pub branch: Branch,
    pub peak_e: Peak,
    pub peak_g: Peak,
    pub bin_width_hz: f64,
    /// Envelope growth of `E_e` from the simulation.
    pub fitted_rate: Option<f64>,
    /// `Re Ω / 2` from the closed form.
    pub expected_rate: f64,
    pub report: GainReport,
}

fn figure2(p: &FigurePreset, dir: &mut OutputDir) -> Result<(), CliError> {
    let mut summary = Vec::new();
    for (sym, branch) in [(Symmetry::Negative, Branch::Dpa), (Symmetry::Positive, Branch::Opa)] {
        let run = p.run(sym, branch);
        let (cfg, pump, init) = run.resolve().map_err(core)?;
        let settings = FullSettings::resolved(&cfg, &pump, p.horizon_s, p.steps_per_cycle).with_stride(p.sample_stride);
        let ts = integrate_full(&cfg, &pump, &init, &settings).map_err(core)?;
        let label = branch_label(branch);
        let se = fft_spectrum(&ts, Channel::E, Window::Hann).map_err(core)?;
        let sg = fft_spectrum(&ts, Channel::G, Window::Hann).map_err(core)?;
        dir.write(&format!("fig2_{label}_timeseries.csv"), &ts.to_csv())?;
        dir.write(&format!("fig2_{label}_spectrum_e.csv"), &se.to_csv())?;
        dir.write(&format!("fig2_{label}_spectrum_g.csv"), &sg.to_csv())?;
        let mut report = pwl_core::analytic::classify_regime(&cfg, &pump);
        let fitted_rate = fit_growth_rate(&ts, Channel::E, cfg.omega_e / TAU).ok();
        report.fitted_rate = fitted_rate;
        summary.push(ResonantSummary {
            branch,
            peak_e: dominant_peak(&se),
            peak_g: dominant_peak(&sg),
            bin_width_hz: se.bin_width(),
            fitted_rate,
            expected_rate: 0.5 * gain_rate(&cfg, &pump, branch).re,
            report,
        });
    }
    dir.write_json("fig2_summary.json", &summary)
}

#[derive(Debug, Serialize)]
struct NuSweepSummary {
    symmetry: Symmetry,
    argmax_nu_hz: f64,
    max_metric: f64,
}

fn write_grid(dir: &mut OutputDir, stem: &str, grid: &SweepGrid) -> Result<(), CliError> {
    dir.write(&format!("{stem}.csv"), &grid.to_csv())?;
    dir.write(&format!("{stem}.json"), &(grid.sidecar_json() + "\n"))
}

fn figure3(p: &FigurePreset, jobs: usize, dir: &mut OutputDir) -> Result<(), CliError> {
    let mut summary = Vec::new();
    for (sym, name) in [(Symmetry::Negative, "negative"), (Symmetry::Positive, "positive")] {
        let grid = run_sweep(&p.nu_sweep(sym), jobs).map_err(core)?;
        let best = grid
            .cells
            .iter()
            .filter(|c| c.metric.is_finite())
            .max_by(|a, b| a.metric.total_cmp(&b.metric))
            .ok_or_else(|| CliError::Numeric("every cell of the pump sweep failed".into()))?;
        summary.push(NuSweepSummary { symmetry: sym, argmax_nu_hz: best.x1, max_metric: best.metric });
        write_grid(dir, &format!("fig3a_nu_sweep_{name}"), &grid)?;
    }
    for (branch, stem) in [(Branch::Opa, "fig3b_chi_plane_opa"), (Branch::Dpa, "fig3c_chi_plane_dpa")] {
        let grid = run_sweep(&p.chi_plane(branch), jobs).map_err(core)?;
        write_grid(dir, stem, &grid)?;
    }
    dir.write_json("fig3_summary.json", &summary)
}

fn flow_csv(t: &[f64], cols: [&[f64]; 4]) -> String {
    let mut out = String::from("t,dWe_dt,dWg_dt,closed_dWe_dt,closed_dWg_dt\n");
    for (i, t) in t.iter().enumerate() {
        out.push_str(&format!(
            "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            cols[0][i], cols[1][i], cols[2][i], cols[3][i]
        ));
    }
    out
}

fn figure4(p: &FigurePreset, dir: &mut OutputDir) -> Result<(), CliError> {
    for scenario in FlowScenario::ALL {
        let run = p.run(scenario.required_symmetry(), scenario.branch());
        let cfg: SystemConfig = run.system().map_err(core)?;
        let pump = PumpConfig::resonant(&cfg, scenario.branch(), p.a0);
        let omega = gain_rate(&cfg, &pump, scenario.branch());
        let rate = if scenario.amplifies() { omega.re } else { omega.im.abs() };
        if !(rate > 0.0) {
            return Err(CliError::Numeric(format!("{}: zero gain rate", scenario.label())));
        }
        let t_end = p.flow_periods * TAU / rate;
        let settings = FullSettings::resolved(&cfg, &pump, t_end, p.steps_per_cycle);
        let ts = integrate_full(&cfg, &pump, &InitialConditions::unit_e(), &settings).map_err(core)?;
        let flow = energy_flow_numeric(&ts, &cfg, &pump).map_err(core)?;
        let t: Vec<f64> = (0..flow.len()).map(|i| flow.time(i)).collect();
        let mut closed_e = Vec::with_capacity(t.len());
        let mut closed_g = Vec::with_capacity(t.len());
        for &t in &t {
            let (e, g) = energy_flow_closed_form(&cfg, p.a0, 1.0, t, scenario).map_err(core)?;
            closed_e.push(e);
            closed_g.push(g);
        }
        let label = scenario.label();
        dir.write(&format!("fig4_{label}.csv"), &flow_csv(&t, [&flow.flow_e, &flow.flow_g, &closed_e, &closed_g]))?;
        // moving average over one beat period of the two carriers
        let window = ((TAU / cfg.difference_frequency()) / flow.dt).round().max(1.0) as usize;
        let ce = coarse_grain(&flow.flow_e, window);
        let cg = coarse_grain(&flow.flow_g, window);
        let mut coarse = String::from("t_mid,dWe_dt,dWg_dt\n");
        for j in 0..ce.len() {
            coarse.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t[j + window / 2], ce[j], cg[j]));
        }
        dir.write(&format!("fig4_{label}_coarse.csv"), &coarse)?;
    }
    Ok(())
}

fn figure5(p: &FigurePreset, jobs: usize, dir: &mut OutputDir) -> Result<(), CliError> {
    for branch in [Branch::Dpa, Branch::Opa] {
        let cav = p.cavity(branch)?;
        let range = (0.0, p.antenna_max, p.antenna_count);
        let grid = sweep_antenna(&cav, range, p.antenna_metric, p.horizon_s, jobs).map_err(core)?;
        write_grid(dir, &format!("fig5_antenna_{}", branch_label(branch)), &grid)?;
    }
    let cav = p.cavity(Branch::Dpa)?;
    let (_, lg) = cav.wavelengths();
    let w = dpa_windows(&cav, 0..=3);
    let mut out = String::from("kind,m,lo_over_lambda_g,hi_over_lambda_g\n");
    for (kind, list) in [("bracketed", &w.bracketed), ("exact", &w.exact)] {
        for (m, iv) in list.iter().enumerate() {
            out.push_str(&format!("{kind},{m},{:.16e},{:.16e}\n", iv.lo / lg, iv.hi / lg));
        }
    }
    dir.write("fig5_windows.csv", &out)
}

pub fn cmd_figure(
    n: u8,
    config: Option<&Path>,
    jobs: usize,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut dir = OutputDir::create(out)?;
    let preset = match config {
        Some(path) => FigurePreset::from_json(&read_config(path)?)?,
        None => FigurePreset::default(),
    };
    match n {
        2 => figure2(&preset, &mut dir)?,
        3 => figure3(&preset, jobs, &mut dir)?,
        4 => figure4(&preset, &mut dir)?,
        5 => figure5(&preset, jobs, &mut dir)?,
        _ => return Err(CliError::Config(format!("no figure preset {n}; choose 2, 3, 4 or 5"))),
    }
    #[derive(Serialize)]
    struct Snapshot {
        figure: u8,
        preset: FigurePreset,
    }
    dir.finish("figure", snapshot(&Snapshot { figure: n, preset }), seed)?;
    Ok(())
}
