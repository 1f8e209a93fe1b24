use std::path::Path;

use num_complex::Complex64;
use pwl_core::quantum::{evolve, hermiticity_defect, QuantumConfig, QuantumSample, QuantumTrajectory};
use serde::Serialize;

use crate::error::{core, read_config, CliError};
use crate::output::{snapshot, OutputDir};

/// Upper bound on trajectory rows.
pub const MAX_SAMPLES: usize = 1000;
/// Relative change under cutoff doubling below which a run counts as converged.
pub const DOUBLING_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Serialize)]
pub struct DoublingReport {
    pub n_max: usize,
    pub rel_change_a_e: Option<f64>,
    pub rel_change_a_g: Option<f64>,
    pub rel_change_energy: Option<f64>,
    pub converged: bool,
    /// Set when the doubled run itself failed.
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct QuantumReport {
    pub n_max: usize,
    pub dimension: usize,
    pub rotating_wave: bool,
    pub hermiticity_defect: f64,
    pub max_abs_im_energy: f64,
    pub final_norm: f64,
    pub final_edge_fraction: f64,
    pub final_occupation: f64,
    pub doubling: DoublingReport,
}

fn rel_change(a: &[QuantumSample], b: &[QuantumSample], f: impl Fn(&QuantumSample) -> Complex64) -> f64 {
    let scale = b.iter().map(|s| f(s).norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(b).map(|(x, y)| (f(x) - f(y)).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

fn doubling(cfg: &QuantumConfig, n_max: usize, stride: usize, base: &QuantumTrajectory) -> DoublingReport {
    let n2 = 2 * n_max;
    let run = || -> Result<QuantumTrajectory, CliError> {
        let h = cfg.hamiltonian(n2).map_err(core)?;
        // integer refinement keeps the sample times aligned
        let ratio = (cfg.dt / h.max_step()).ceil().max(1.0) as usize;
        let state = cfg.initial_state(n2).map_err(core)?;
        evolve(&state, &h, cfg.t_end, cfg.dt / ratio as f64, stride * ratio).map_err(core)
    };
    match run() {
        Ok(fine) if fine.samples.len() == base.samples.len() => {
            let (a, b) = (&base.samples, &fine.samples);
            let ce = rel_change(a, b, |s| s.a_e);
            let cg = rel_change(a, b, |s| s.a_g);
            let ch = rel_change(a, b, |s| s.energy);
            DoublingReport {
                n_max: n2,
                rel_change_a_e: Some(ce),
                rel_change_a_g: Some(cg),
                rel_change_energy: Some(ch),
                converged: ce.max(cg).max(ch) < DOUBLING_TOLERANCE,
                error: None,
            }
        }
        Ok(_) => DoublingReport {
            n_max: n2,
            rel_change_a_e: None,
            rel_change_a_g: None,
            rel_change_energy: None,
            converged: false,
            error: Some("sample grids of the two cutoffs differ".into()),
        },
        Err(e) => DoublingReport {
            n_max: n2,
            rel_change_a_e: None,
            rel_change_a_g: None,
            rel_change_energy: None,
            converged: false,
            error: Some(e.to_string()),
        },
    }
}

pub fn cmd_quantum(config: &Path, n_max: usize, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut dir = OutputDir::create(out)?;
    let cfg: QuantumConfig = serde_json::from_str(&read_config(config)?).map_err(|e| CliError::Config(e.to_string()))?;
    if !(cfg.t_end.is_finite() && cfg.t_end > 0.0 && cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(CliError::Config("t_end and dt must be positive".into()));
    }
    let h = cfg.hamiltonian(n_max).map_err(core)?;
    if cfg.dt > h.max_step() {
        return Err(CliError::Config(format!("dt = {} exceeds the step limit {} at n_max = {n_max}", cfg.dt, h.max_step())));
    }
    let state = cfg.initial_state(n_max).map_err(core)?;
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let stride = steps.div_ceil(MAX_SAMPLES).max(1);
    let traj = evolve(&state, &h, cfg.t_end, cfg.dt, stride).map_err(core)?;
    let fin = &traj.final_state;
    let report = QuantumReport {
        n_max,
        dimension: h.basis.dim(),
        rotating_wave: h.is_rotating_wave(),
        hermiticity_defect: hermiticity_defect(&h.schrodinger_at(0.0)),
        max_abs_im_energy: traj.samples.iter().map(|s| s.energy.im.abs()).fold(0.0, f64::max),
        final_norm: fin.norm_sqr(),
        final_edge_fraction: fin.edge_population(),
        final_occupation: fin.mean_occupation(),
        doubling: doubling(&cfg, n_max, stride, &traj),
    };
    dir.write("quantum_trajectory.csv", &traj.to_csv())?;
    dir.write_json("quantum_report.json", &report)?;
    #[derive(Serialize)]
    struct Snapshot {
        n_max: usize,
        config: QuantumConfig,
    }
    dir.finish("quantum", snapshot(&Snapshot { n_max, config: cfg }), seed)?;
    Ok(())
}
