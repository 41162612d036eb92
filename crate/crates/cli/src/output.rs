//! Run directories.
//!
//! ```text
//! run.toml                resolved spec
//! index.csv               step,time,file for every stored state
//! quantiles/step_NNNNNN.csv
//! densities/step_NNNNNN.csv
//! diagnostics.csv         one row per step
//! checks.csv
//! plots/quantile_step_NNNNNN.svg, plots/density_step_NNNNNN.svg
//! ```
//!
//! Nothing is written when the emit set is empty.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mmdflow_core::io::{self, IndexEntry};
use mmdflow_core::{
    check_trajectory, density_and_atoms, run_flow, BoundCheck, Error, FlowTrajectory, Result,
};

use crate::spec::{Emit, RunSpec};
use crate::svg;

pub const RUN_SPEC_FILE: &str = "run.toml";
pub const INDEX_FILE: &str = "index.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CHECKS_FILE: &str = "checks.csv";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outdir: PathBuf,
    pub snapshots: usize,
    pub files: Vec<PathBuf>,
    pub checks: Vec<BoundCheck>,
}

impl RunSummary {
    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| c.failed()).count()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn step_name(step: usize) -> String {
    format!("step_{step:06}")
}

/// Solves the flow described by `spec` and writes its run directory.
pub fn execute(spec: &RunSpec) -> Result<RunSummary> {
    let cfg = spec.solver_config()?;
    let target = spec.target();
    let traj = run_flow(&spec.mu0, &target, &cfg)?;
    let checks = check_trajectory(&traj, &target);
    let files = write_run(spec, &traj, &checks)?;
    Ok(RunSummary {
        outdir: spec.outdir.clone(),
        snapshots: traj.len(),
        files,
        checks,
    })
}

/// Writes the requested outputs of a finished trajectory.
pub fn write_run(
    spec: &RunSpec,
    traj: &FlowTrajectory,
    checks: &[BoundCheck],
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if spec.emit.is_empty() {
        return Ok(files);
    }
    let dir = &spec.outdir;
    let put = |rel: String, files: &mut Vec<PathBuf>| {
        let p = dir.join(&rel);
        files.push(p.clone());
        (rel, p)
    };

    let (_, p) = put(RUN_SPEC_FILE.into(), &mut files);
    write_text(&p, &spec.to_toml())?;

    let mut index = Vec::new();
    for ((&step, &time), g) in traj.steps.iter().zip(&traj.times).zip(&traj.states) {
        let name = step_name(step);
        let title = format!("{} t = {time}", spec.scheme);
        let mut listed = None;
        if spec.emits(Emit::Quantiles) {
            let (rel, p) = put(format!("quantiles/{name}.csv"), &mut files);
            io::write_grid(create(&p)?, g)?;
            listed = Some(rel);
            if spec.svg {
                let (_, p) = put(format!("plots/quantile_{name}.svg"), &mut files);
                write_text(&p, &svg::quantile_svg(g, &title))?;
            }
        }
        if spec.emits(Emit::Densities) {
            let d = density_and_atoms(g);
            let (rel, p) = put(format!("densities/{name}.csv"), &mut files);
            io::write_density(create(&p)?, &d)?;
            listed.get_or_insert(rel);
            if spec.svg {
                let (_, p) = put(format!("plots/density_{name}.svg"), &mut files);
                write_text(&p, &svg::density_svg(&d, &title))?;
            }
        }
        if let Some(file) = listed {
            index.push(IndexEntry { step, time, file });
        }
    }
    if !index.is_empty() {
        let (_, p) = put(INDEX_FILE.into(), &mut files);
        io::write_index(create(&p)?, &index)?;
    }
    if spec.emits(Emit::Diagnostics) {
        let (_, p) = put(DIAGNOSTICS_FILE.into(), &mut files);
        io::write_diagnostics(create(&p)?, &traj.diagnostics)?;
    }
    if spec.emits(Emit::Checks) {
        let (_, p) = put(CHECKS_FILE.into(), &mut files);
        io::write_checks(create(&p)?, checks)?;
    }
    Ok(files)
}
