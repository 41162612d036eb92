//! Run specifications.
//!
//! A spec is a TOML document. Sectioned and flat layouts are both accepted:
//!
//! ```toml
//! [mu0]
//! measure = "gaussian(5, 1)"
//! [nu]
//! measure = "gaussian(-5, 1)"
//! [solver]
//! scheme = "implicit"
//! tau = 0.01
//! n = 1000
//! t_end = 100
//! [output]
//! outdir = "runs/shift"
//! snapshots = [10, 100, 1000]   # integers are steps, floats are times
//! emit = ["quantiles", "densities", "diagnostics", "checks"]
//! ```
//!
//! or `mu0 = "gaussian(5,1)"`, `scheme = "implicit"`, ... at the top level.

use std::path::PathBuf;

use mmdflow_core::presets;
use mmdflow_core::{
    Error, Measure, MonotonicityPolicy, Result, Scheme, Snapshots, SolverConfig, Target,
};
use toml::{Table, Value};

pub const REQUIRED_KEYS: [&str; 5] = ["mu0", "nu", "scheme", "tau", "n"];
pub const DEFAULT_OUTDIR: &str = "flow-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emit {
    Quantiles,
    Densities,
    Diagnostics,
    Checks,
}

impl Emit {
    pub const ALL: [Emit; 4] = [
        Emit::Quantiles,
        Emit::Densities,
        Emit::Diagnostics,
        Emit::Checks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emit::Quantiles => "quantiles",
            Emit::Densities => "densities",
            Emit::Diagnostics => "diagnostics",
            Emit::Checks => "checks",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Requested snapshots, resolved against the step size at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotRequest {
    /// The preset schedule, cut at the last step.
    Default,
    Steps(Vec<usize>),
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mu0_text: String,
    pub nu_text: String,
    pub mu0: Measure,
    pub nu: Measure,
    pub scheme: Scheme,
    pub tau: f64,
    pub n: usize,
    pub t_end: f64,
    pub bisect_atol: f64,
    pub policy: MonotonicityPolicy,
    pub snapshots: SnapshotRequest,
    pub outdir: PathBuf,
    pub emit: Vec<Emit>,
    pub svg: bool,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub scheme: Option<Scheme>,
    pub outdir: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

// Looks a key up in `[section]` first, then at the top level, where the
// section name itself may hold the value (`mu0 = "..."`).
fn lookup<'a>(doc: &'a Table, section: &str, keys: &[&str]) -> Option<(&'a Value, String)> {
    if let Some(Value::Table(t)) = doc.get(section) {
        for k in keys {
            if let Some(v) = t.get(*k) {
                return Some((v, format!("{section}.{k}")));
            }
        }
    }
    for k in keys {
        if let Some(v) = doc.get(*k) {
            if !v.is_table() {
                return Some((v, (*k).to_string()));
            }
        }
    }
    None
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(config_err(format!("'{key}' must be a number"))),
    }
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(config_err(format!("'{key}' must be a nonnegative integer"))),
    }
}

fn as_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| config_err(format!("'{key}' must be a string")))
}

fn measure_text(doc: &Table, section: &str) -> Option<Result<(String, String)>> {
    if let Some(Value::Table(t)) = doc.get(section) {
        return t.get("measure").or_else(|| t.get("expr")).map(|v| {
            let key = format!("{section}.measure");
            as_str(v, &key).map(|s| (s.to_string(), key))
        });
    }
    doc.get(section)
        .map(|v| as_str(v, section).map(|s| (s.to_string(), section.to_string())))
}

fn parse_measure_at(text: &str, key: &str) -> Result<Measure> {
    Measure::parse(text).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("in '{key}': {message}"),
        },
        other => config_err(format!("in '{key}': {other}")),
    })
}

/// Parses and validates a run specification.
pub fn parse_run_spec(text: &str) -> Result<RunSpec> {
    parse_run_spec_with(text, &Overrides::default())
}

pub fn parse_run_spec_with(text: &str, ov: &Overrides) -> Result<RunSpec> {
    let doc: Table = text.parse::<Table>().map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let mu0 = measure_text(&doc, "mu0").transpose()?;
    let nu = measure_text(&doc, "nu").transpose()?;
    let scheme = lookup(&doc, "solver", &["scheme"]);
    let tau = lookup(&doc, "solver", &["tau"]);
    let n = lookup(&doc, "solver", &["n"]);
    let mut missing = Vec::new();
    if mu0.is_none() {
        missing.push("mu0");
    }
    if nu.is_none() {
        missing.push("nu");
    }
    if scheme.is_none() && ov.scheme.is_none() {
        missing.push("scheme");
    }
    if tau.is_none() && ov.tau.is_none() {
        missing.push("tau");
    }
    if n.is_none() && ov.n.is_none() {
        missing.push("n");
    }
    if !missing.is_empty() {
        return Err(config_err(format!(
            "missing required key(s): {} (required: {})",
            missing.join(", "),
            REQUIRED_KEYS.join(", ")
        )));
    }
    let (mu0_text, mu0_key) = mu0.unwrap();
    let (nu_text, nu_key) = nu.unwrap();
    let mu0 = parse_measure_at(&mu0_text, &mu0_key)?;
    let nu = parse_measure_at(&nu_text, &nu_key)?;

    let scheme = match (ov.scheme, scheme) {
        (Some(s), _) => s,
        (None, Some((v, key))) => as_str(v, &key)?.parse()?,
        (None, None) => unreachable!(),
    };
    let tau = match (ov.tau, tau) {
        (Some(t), _) => t,
        (None, Some((v, key))) => as_f64(v, &key)?,
        (None, None) => unreachable!(),
    };
    let n = match (ov.n, n) {
        (Some(n), _) => n,
        (None, Some((v, key))) => as_usize(v, &key)?,
        (None, None) => unreachable!(),
    };
    let t_end = match (ov.t_end, lookup(&doc, "solver", &["t_end", "t-end", "T"])) {
        (Some(t), _) => t,
        (None, Some((v, key))) => as_f64(v, &key)?,
        (None, None) => presets::SNAPSHOT_STEPS[presets::SNAPSHOT_STEPS.len() - 1] as f64 * tau,
    };
    let bisect_atol = match lookup(&doc, "solver", &["bisect_atol"]) {
        Some((v, key)) => as_f64(v, &key)?,
        None => mmdflow_core::solver::DEFAULT_BISECT_ATOL,
    };
    let policy = match lookup(&doc, "solver", &["monotonicity_policy", "policy"]) {
        Some((v, key)) => as_str(v, &key)?.parse()?,
        None => MonotonicityPolicy::default(),
    };

    let snapshots = match lookup(&doc, "output", &["snapshots"]) {
        None => SnapshotRequest::Default,
        Some((Value::Array(items), key)) => {
            if items.iter().all(Value::is_integer) {
                SnapshotRequest::Steps(
                    items
                        .iter()
                        .map(|v| as_usize(v, &key))
                        .collect::<Result<_>>()?,
                )
            } else {
                let times = items
                    .iter()
                    .map(|v| as_f64(v, &key))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(bad) = times.iter().find(|&&t| !(t >= 0.0 && t <= t_end + 1e-12)) {
                    return Err(config_err(format!(
                        "snapshot time {bad} outside [0, t_end = {t_end}]"
                    )));
                }
                SnapshotRequest::Times(times)
            }
        }
        Some((_, key)) => return Err(config_err(format!("'{key}' must be a list"))),
    };
    let outdir = match (&ov.outdir, lookup(&doc, "output", &["outdir"])) {
        (Some(d), _) => d.clone(),
        (None, Some((v, key))) => PathBuf::from(as_str(v, &key)?),
        (None, None) => PathBuf::from(DEFAULT_OUTDIR),
    };
    let emit = match lookup(&doc, "output", &["emit"]) {
        None => Emit::ALL.to_vec(),
        Some((Value::Array(items), key)) => {
            let mut out = Vec::new();
            for v in items {
                let name = as_str(v, &key)?;
                let e = Emit::from_name(name).ok_or_else(|| {
                    config_err(format!(
                        "unknown emit kind '{name}' (expected one of quantiles, densities, diagnostics, checks)"
                    ))
                })?;
                if !out.contains(&e) {
                    out.push(e);
                }
            }
            out.sort();
            out
        }
        Some((_, key)) => return Err(config_err(format!("'{key}' must be a list"))),
    };
    let svg = match lookup(&doc, "output", &["svg"]) {
        Some((Value::Boolean(b), _)) => *b,
        Some((_, key)) => return Err(config_err(format!("'{key}' must be true or false"))),
        None => true,
    };

    let spec = RunSpec {
        mu0_text,
        nu_text,
        mu0,
        nu,
        scheme,
        tau,
        n,
        t_end,
        bisect_atol,
        policy,
        snapshots,
        outdir,
        emit,
        svg,
    };
    spec.validate()?;
    Ok(spec)
}

impl RunSpec {
    /// Builds a spec for a preset under `scheme`.
    pub fn from_preset(
        p: &presets::Preset,
        scheme: Scheme,
        ov: &Overrides,
        outdir: PathBuf,
    ) -> Result<Self> {
        let tau = ov.tau.unwrap_or(presets::TAU);
        let spec = RunSpec {
            mu0_text: p.mu0.to_string(),
            nu_text: p.nu.to_string(),
            mu0: p.initial(),
            nu: p.target().measure().clone(),
            scheme,
            tau,
            n: ov.n.unwrap_or(presets::N),
            t_end: ov
                .t_end
                .unwrap_or(presets::SNAPSHOT_STEPS[presets::SNAPSHOT_STEPS.len() - 1] as f64 * tau),
            bisect_atol: mmdflow_core::solver::DEFAULT_BISECT_ATOL,
            policy: MonotonicityPolicy::default(),
            snapshots: SnapshotRequest::Default,
            outdir,
            emit: Emit::ALL.to_vec(),
            svg: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn target(&self) -> Target {
        Target::new(self.nu.clone())
    }

    /// Checks scheme preconditions and solver parameters.
    pub fn validate(&self) -> Result<()> {
        self.solver_config()?;
        let t = self.target();
        match self.scheme {
            Scheme::ExplicitEuler if t.has_atoms() => Err(Error::AtomicTarget),
            Scheme::ClosedFormDiscrete if t.atoms().is_none() => Err(Error::NotDiscreteTarget),
            _ => Ok(()),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig::new(self.scheme, self.tau, self.n, self.t_end)?
            .with_policy(self.policy)
            .with_bisect_atol(self.bisect_atol);
        let last = cfg.n_steps();
        let steps: Vec<usize> = match &self.snapshots {
            SnapshotRequest::Default => presets::SNAPSHOT_STEPS
                .iter()
                .copied()
                .filter(|&k| k <= last)
                .collect(),
            SnapshotRequest::Steps(v) => v.iter().copied().filter(|&k| k <= last).collect(),
            SnapshotRequest::Times(v) => v
                .iter()
                .map(|&t| ((t / self.tau).round() as usize).min(last))
                .collect(),
        };
        Ok(cfg.with_snapshots(Snapshots::Steps(steps)))
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    /// The resolved spec, written next to the outputs. The output directory
    /// is left out so that identical runs write identical files.
    pub fn to_toml(&self) -> String {
        let mut doc = Table::new();
        let mut mu0 = Table::new();
        mu0.insert("measure".into(), Value::String(self.mu0_text.clone()));
        let mut nu = Table::new();
        nu.insert("measure".into(), Value::String(self.nu_text.clone()));
        let mut solver = Table::new();
        solver.insert("scheme".into(), Value::String(self.scheme.name().into()));
        solver.insert("tau".into(), Value::Float(self.tau));
        solver.insert("n".into(), Value::Integer(self.n as i64));
        solver.insert("t_end".into(), Value::Float(self.t_end));
        solver.insert("bisect_atol".into(), Value::Float(self.bisect_atol));
        solver.insert(
            "monotonicity_policy".into(),
            Value::String(self.policy.name().into()),
        );
        let mut output = Table::new();
        let snaps = match &self.snapshots {
            SnapshotRequest::Default => None,
            SnapshotRequest::Steps(v) => {
                Some(v.iter().map(|&k| Value::Integer(k as i64)).collect())
            }
            SnapshotRequest::Times(v) => Some(v.iter().map(|&t| Value::Float(t)).collect()),
        };
        if let Some(s) = snaps {
            output.insert("snapshots".into(), Value::Array(s));
        }
        output.insert(
            "emit".into(),
            Value::Array(
                self.emit
                    .iter()
                    .map(|e| Value::String(e.name().into()))
                    .collect(),
            ),
        );
        output.insert("svg".into(), Value::Boolean(self.svg));
        doc.insert("mu0".into(), Value::Table(mu0));
        doc.insert("nu".into(), Value::Table(nu));
        doc.insert("solver".into(), Value::Table(solver));
        doc.insert("output".into(), Value::Table(output));
        toml::to_string(&doc).expect("tables always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_layout() {
        let s = parse_run_spec(
            "mu0=\"gaussian(5,1)\"\nnu=\"gaussian(-5,1)\"\nscheme=\"implicit\"\ntau=0.01\nn=1000\n",
        )
        .unwrap();
        assert_eq!(s.mu0, Measure::gaussian(5.0, 1.0).unwrap());
        assert_eq!(s.nu, Measure::gaussian(-5.0, 1.0).unwrap());
        assert_eq!(s.scheme, Scheme::ImplicitEuler);
        assert_eq!((s.tau, s.n), (0.01, 1000));
        assert!((s.t_end - 100.0).abs() < 1e-12);
        assert_eq!(s.emit, Emit::ALL.to_vec());
    }

    #[test]
    fn sectioned_layout_and_round_trip() {
        let text = r#"
[mu0]
measure = "uniform(0, 1)"
[nu]
measure = "uniform(2, 3)"
[solver]
scheme = "explicit"
tau = 0.01
n = 200
t_end = 2.0
[output]
outdir = "out/u"
snapshots = [0.5, 1.0]
emit = ["checks", "quantiles"]
"#;
        let s = parse_run_spec(text).unwrap();
        assert_eq!(s.snapshots, SnapshotRequest::Times(vec![0.5, 1.0]));
        assert_eq!(s.emit, vec![Emit::Quantiles, Emit::Checks]);
        assert_eq!(
            s.solver_config().unwrap().snapshots,
            Snapshots::Steps(vec![50, 100])
        );
        let mut again = parse_run_spec(&s.to_toml()).unwrap();
        assert_eq!(again.outdir, PathBuf::from(DEFAULT_OUTDIR));
        again.outdir = s.outdir.clone();
        assert_eq!(again, s);
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let err = parse_run_spec("").unwrap_err().to_string();
        for k in REQUIRED_KEYS {
            assert!(err.contains(k), "{err}");
        }
    }

    #[test]
    fn explicit_with_atomic_target_rejected() {
        let text = "mu0=\"gaussian(0,1)\"\nnu=\"discrete(x=[0,1], w=[0.5,0.5])\"\nscheme=\"explicit\"\ntau=0.01\nn=100\n";
        assert_eq!(parse_run_spec(text), Err(Error::AtomicTarget));
    }

    #[test]
    fn measure_errors_keep_positions() {
        let text =
            "mu0=\"cauchy(0,1)\"\nnu=\"gaussian(0,1)\"\nscheme=\"implicit\"\ntau=0.01\nn=100\n";
        match parse_run_spec(text) {
            Err(Error::Parse {
                column, message, ..
            }) => {
                assert_eq!(column, 1);
                assert!(
                    message.contains("mu0") && message.contains("cauchy"),
                    "{message}"
                );
            }
            other => panic!("{other:?}"),
        }
        match parse_run_spec("mu0 = [") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn snapshot_times_beyond_end_rejected() {
        let text = "mu0=\"dirac(0)\"\nnu=\"uniform(0,1)\"\nscheme=\"implicit\"\ntau=0.1\nn=10\nt_end=1.0\nsnapshots=[0.5, 2.5]\n";
        assert!(matches!(parse_run_spec(text), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides {
            tau: Some(0.5),
            scheme: Some(Scheme::ClosedFormDiscrete),
            ..Default::default()
        };
        let s = parse_run_spec_with("mu0=\"dirac(-1)\"\nnu=\"dirac(0)\"\nn=10\n", &ov).unwrap();
        assert_eq!((s.tau, s.scheme), (0.5, Scheme::ClosedFormDiscrete));
    }
}
