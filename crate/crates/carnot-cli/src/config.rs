use std::str::FromStr;

use carnot::oracle::suite::{Suite, SuiteTolerances};
use carnot::symfields::poly::{parse_q, Q};
use carnot::GroupKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "carnot", version, about = "Curvature, geodesics and growth vectors of rank-two Carnot groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// `goursat:<n>` (n ≥ 3) or `cartan`.
    #[arg(long, global = true, default_value = "goursat:3")]
    pub group: String,
    /// Frame coordinates at the origin, comma separated; `a/b`, integers and
    /// decimals are read exactly.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub covector: Option<String>,
    /// Time horizon.
    #[arg(long = "T", global = true)]
    pub t: Option<f64>,
    /// RK4 step.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Zero threshold for stratum and growth classification.
    #[arg(long, global = true, default_value_t = carnot::elliptic::EPS_CLASS)]
    pub tol_class: f64,
    /// Allowed drift of conserved quantities along a trajectory.
    #[arg(long, global = true, default_value_t = carnot::hamiltonian::DEFAULT_DRIFT_BOUND)]
    pub tol_drift: f64,
    #[arg(long, global = true, default_value_t = carnot::oracle::suite::FIT_LEAD_TOL)]
    pub tol_fit_lead: f64,
    #[arg(long, global = true, default_value_t = carnot::oracle::suite::FIT_LIN_TOL)]
    pub tol_fit_lin: f64,
    #[arg(long, global = true, default_value_t = carnot::oracle::suite::PROBE_TOL)]
    pub tol_probe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the normal geodesic flow from a covector at the origin.
    Geodesic,
    /// Stratum, growth vector and times of loss of equiregularity.
    Classify {
        /// Chart coordinates `θ,c,α` (Engel) or `θ,c,α,β` (Cartan) on the
        /// unit level, instead of `--covector`.
        #[arg(long, allow_hyphen_values = true)]
        chart: Option<String>,
    },
    /// Exact curvature report at an ample equiregular covector.
    Curvature,
    /// Run the verification suites.
    Verify {
        #[arg(long, default_value = "exact")]
        suite: String,
    },
    /// Tabulate stratum, growth, r11 and the energy bound over a chart grid.
    Sweep {
        /// `theta=a:b:n,c=a:b:n,alpha=a:b:n[,beta=a:b:n]`; `n` evenly spaced
        /// points from `a` to `b` inclusive.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
}

/// Parsed configuration, echoed at the head of every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub group: String,
    pub covector: Option<String>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub step: Option<f64>,
    pub format: Format,
    pub out: Option<String>,
    pub seed: u64,
    pub tol_class: f64,
    pub tol_drift: f64,
    pub tol_fit_lead: f64,
    pub tol_fit_lin: f64,
    pub tol_probe: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

impl RunConfig {
    pub fn new(cli: &Cli) -> Self {
        let g = &cli.global;
        let (command, default_format, chart, suite, grid) = match &cli.command {
            Command::Geodesic => ("geodesic", Format::Csv, None, None, None),
            Command::Classify { chart } => ("classify", Format::Json, chart.clone(), None, None),
            Command::Curvature => ("curvature", Format::Json, None, None, None),
            Command::Verify { suite } => ("verify", Format::Json, None, Some(suite.clone()), None),
            Command::Sweep { grid } => ("sweep", Format::Csv, None, None, Some(grid.clone())),
        };
        RunConfig {
            command,
            group: g.group.clone(),
            covector: g.covector.clone(),
            t: g.t,
            step: g.step,
            format: g.format.unwrap_or(default_format),
            out: g.out.clone(),
            seed: g.seed,
            tol_class: g.tol_class,
            tol_drift: g.tol_drift,
            tol_fit_lead: g.tol_fit_lead,
            tol_fit_lin: g.tol_fit_lin,
            tol_probe: g.tol_probe,
            chart,
            suite,
            grid,
        }
    }

    pub fn group_kind(&self) -> Result<GroupKind, CliError> {
        GroupKind::from_str(&self.group).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn covector_exact(&self, kind: GroupKind) -> Result<Vec<Q>, CliError> {
        let raw = self.covector.as_deref().ok_or_else(|| CliError::Usage("--covector is required".into()))?;
        let h = parse_covector(raw)?;
        if h.len() != kind.dim() {
            return Err(CliError::Usage(format!("{} expects {} covector components, got {}", kind, kind.dim(), h.len())));
        }
        Ok(h)
    }

    pub fn covector_f64(&self, kind: GroupKind) -> Result<Vec<f64>, CliError> {
        use carnot::scalar::Scalar;
        Ok(self.covector_exact(kind)?.iter().map(|x| x.to_f64()).collect())
    }

    pub fn t_or(&self, default: f64) -> Result<f64, CliError> {
        positive("--T", self.t.unwrap_or(default))
    }

    pub fn step_or_default(&self) -> Result<f64, CliError> {
        positive("--step", self.step.unwrap_or(carnot::hamiltonian::DEFAULT_STEP))
    }

    pub fn suite_kind(&self) -> Result<Suite, CliError> {
        Suite::from_str(self.suite.as_deref().unwrap_or("exact")).map_err(CliError::Usage)
    }

    pub fn suite_tolerances(&self) -> SuiteTolerances {
        SuiteTolerances { fit_lead: self.tol_fit_lead, fit_lin: self.tol_fit_lin, probe: self.tol_probe }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{} must be positive, got {}", name, v)))
    }
}

pub fn parse_covector(raw: &str) -> Result<Vec<Q>, CliError> {
    raw.split(',')
        .map(|s| parse_q(s).ok_or_else(|| CliError::Usage(format!("cannot read '{}' as a rational", s.trim()))))
        .collect()
}

pub fn parse_floats(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("cannot read '{}' in {}", s.trim(), what))))
        .collect()
}

/// One axis of a sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let d = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + d * i as f64).collect()
    }
}

/// Axes in the order `theta, c, alpha[, beta]`; `beta` only for Cartan.
pub fn parse_grid(raw: &str, kind: GroupKind) -> Result<Vec<Axis>, CliError> {
    let bad = |m: String| CliError::Usage(format!("malformed grid: {}", m));
    let mut axes: Vec<Axis> = Vec::new();
    for part in raw.split(',') {
        let (name, range) = part.split_once('=').ok_or_else(|| bad(format!("'{}' has no '='", part)))?;
        let f: Vec<&str> = range.split(':').collect();
        if f.len() != 3 {
            return Err(bad(format!("'{}' is not start:end:count", range)));
        }
        let start: f64 = f[0].trim().parse().map_err(|_| bad(format!("start '{}'", f[0])))?;
        let end: f64 = f[1].trim().parse().map_err(|_| bad(format!("end '{}'", f[1])))?;
        let count: usize = f[2].trim().parse().map_err(|_| bad(format!("count '{}'", f[2])))?;
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return Err(bad(format!("axis '{}' is empty or not finite", name)));
        }
        let name = name.trim().to_string();
        if axes.iter().any(|a| a.name == name) {
            return Err(bad(format!("axis '{}' given twice", name)));
        }
        axes.push(Axis { name, start, end, count });
    }
    let wanted: &[&str] = match kind {
        GroupKind::Cartan => &["theta", "c", "alpha", "beta"],
        GroupKind::Goursat(4) => &["theta", "c", "alpha"],
        _ => return Err(CliError::Usage(format!("sweep needs the Engel group (goursat:4) or cartan, got {}", kind))),
    };
    let mut out = Vec::new();
    for w in wanted {
        let i = axes.iter().position(|a| a.name == *w).ok_or_else(|| bad(format!("missing axis '{}'", w)))?;
        out.push(axes.remove(i));
    }
    if let Some(a) = axes.first() {
        return Err(bad(format!("unknown axis '{}'", a.name)));
    }
    Ok(out)
}
