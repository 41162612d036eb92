//! Re-checking stored runs.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use mmdflow_core::io;
use mmdflow_core::{check_trajectory, BoundCheck, Error, FlowTrajectory, Result};

use crate::output::{DIAGNOSTICS_FILE, INDEX_FILE, RUN_SPEC_FILE};
use crate::spec::parse_run_spec;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Run directories under `root`: `root` itself if it holds a spec, otherwise
/// every nested run directory in path order.
pub fn find_runs(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join(RUN_SPEC_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    if !root.is_dir() {
        return Err(Error::Io(format!(
            "{}: not a run directory",
            root.display()
        )));
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::Io(format!("{}: {e}", root.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut out = Vec::new();
    for d in subdirs {
        if let Ok(mut runs) = find_runs(&d) {
            out.append(&mut runs);
        }
    }
    if out.is_empty() {
        return Err(Error::Io(format!(
            "{}: no {RUN_SPEC_FILE} found",
            root.display()
        )));
    }
    Ok(out)
}

/// Rebuilds the trajectory stored in `dir` from its quantile files.
pub fn load_trajectory(dir: &Path) -> Result<(FlowTrajectory, mmdflow_core::Target)> {
    let text = fs::read_to_string(dir.join(RUN_SPEC_FILE))
        .map_err(|e| Error::Io(format!("{}: {e}", dir.join(RUN_SPEC_FILE).display())))?;
    let spec = parse_run_spec(&text)?;
    let index = io::read_index(open(&dir.join(INDEX_FILE))?)?;
    let mut traj = FlowTrajectory {
        scheme: spec.scheme,
        tau: spec.tau,
        times: Vec::new(),
        steps: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        mu0: Some(spec.mu0.clone()),
    };
    for e in index {
        if !e.file.starts_with("quantiles/") {
            return Err(Error::Config(format!(
                "{}: run stores no quantile grids; re-run with \"quantiles\" in emit",
                dir.display()
            )));
        }
        traj.states.push(io::read_grid(open(&dir.join(&e.file))?)?);
        traj.steps.push(e.step);
        traj.times.push(e.time);
    }
    if traj.states.is_empty() {
        return Err(Error::Config(format!("{}: empty index", dir.display())));
    }
    let diag = dir.join(DIAGNOSTICS_FILE);
    if diag.is_file() {
        traj.diagnostics = io::read_diagnostics(open(&diag)?)?;
    }
    Ok((traj, spec.target()))
}

pub fn check_run(dir: &Path) -> Result<Vec<BoundCheck>> {
    let (traj, target) = load_trajectory(dir)?;
    Ok(check_trajectory(&traj, &target))
}
