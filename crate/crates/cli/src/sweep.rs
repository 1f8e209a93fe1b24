use std::path::Path;

use pwl_core::sweep::{run_sweep, SweepSpec};

use crate::error::{core, read_config, CliError};
use crate::output::{snapshot, OutputDir};

pub fn cmd_sweep(spec_path: &Path, jobs: usize, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut dir = OutputDir::create(out)?;
    let spec = SweepSpec::from_json(&read_config(spec_path)?).map_err(core)?;
    let grid = run_sweep(&spec, jobs).map_err(core)?;
    dir.write("sweep.csv", &grid.to_csv())?;
    dir.write("sweep.json", &(grid.sidecar_json() + "\n"))?;
    dir.finish("sweep", snapshot(&spec), seed)?;
    Ok(())
}
