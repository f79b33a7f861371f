use std::fmt::Write as _;

use carnot::curvature::{curvature_operator, energy, energy_bound, r11, CurvatureReport};
use carnot::elliptic::{classify_pendulum_tol, closed_form_loss_times, EllipticError, PendulumChart};
use carnot::groups::{h_from_chart, GroupKind};
use carnot::hamiltonian::{fmt17, integrate_flow, FlowOptions, Trajectory};
use carnot::oracle::suite::{run_suite_with, SuiteReport};
use carnot::regularity::{closed_form_status_tol, equiregularity_loss_times, growth_vector_closed_form_tol, RegularityStatus};
use carnot::{build_group, Covector};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_floats, parse_grid, Format, RunConfig};
use crate::error::CliError;

pub const GEODESIC_T: f64 = 1.0;
pub const CLASSIFY_T: f64 = 10.0;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(cfg: &RunConfig, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Report { config: cfg, body }).expect("report serializes");
    s.push('\n');
    s
}

fn json_only(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{} writes JSON only", cfg.command))),
    }
}

pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct GeodesicBody<'a> {
    trajectory: &'a Trajectory,
}

pub fn geodesic(cfg: &RunConfig) -> Result<String, CliError> {
    let kind = cfg.group_kind()?;
    let model = build_group(kind)?;
    let h = cfg.covector_f64(kind)?;
    let t = cfg.t_or(GEODESIC_T)?;
    let opts = FlowOptions { step: cfg.step_or_default()?, with_variational: false, drift_bound: cfg.tol_drift };
    let tr = integrate_flow(&model, &Covector::at_origin(h), t, &opts)?;
    Ok(match cfg.format {
        Format::Csv => tr.to_csv(),
        Format::Json => json(cfg, GeodesicBody { trajectory: &tr }),
    })
}

#[derive(Serialize)]
struct ClassifyBody {
    group: String,
    covector: Vec<f64>,
    status: RegularityStatus,
    stratum: Option<String>,
    abnormal: bool,
    ample: bool,
    equiregular: bool,
    growth: Vec<usize>,
    step: usize,
    young_diagram: Option<[usize; 2]>,
    pendulum: Option<PendulumChart>,
    #[serde(rename = "T")]
    t: f64,
    loss_times: Vec<f64>,
    closed_form_loss_times: Option<Vec<f64>>,
    loss_spacing: Option<f64>,
}

fn covector_for_classify(cfg: &RunConfig, kind: GroupKind) -> Result<Vec<f64>, CliError> {
    match (&cfg.chart, &cfg.covector) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --chart or --covector, not both".into())),
        (Some(raw), None) => {
            let v = parse_floats(raw, "--chart")?;
            let want = if kind == GroupKind::Cartan { 4 } else { 3 };
            if v.len() != want {
                return Err(CliError::Usage(format!("--chart for {} takes {} values, got {}", kind, want, v.len())));
            }
            let beta = v.get(3).copied().unwrap_or(0.0);
            h_from_chart(kind, v[0], v[1], v[2], beta)
                .ok_or_else(|| CliError::Usage(format!("--chart needs goursat:4 or cartan, got {}", kind)))
        }
        (None, _) => cfg.covector_f64(kind),
    }
}

pub fn classify(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg)?;
    let kind = cfg.group_kind()?;
    let model = build_group(kind)?;
    let h = covector_for_classify(cfg, kind)?;
    let t = cfg.t_or(CLASSIFY_T)?;
    let status = closed_form_status_tol(kind, &h, cfg.tol_class);
    let growth = growth_vector_closed_form_tol(kind, &h, cfg.tol_class);
    let pendulum = match classify_pendulum_tol(kind, &h, cfg.tol_class) {
        Ok(p) => Some(p),
        Err(EllipticError::UnsupportedGroup(_)) | Err(EllipticError::NotUnitSpeed(_)) => None,
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let loss_times = if growth.ample {
        equiregularity_loss_times(&model, &h, t, cfg.step_or_default()?)?
    } else {
        Vec::new()
    };
    let loss_spacing = (loss_times.len() >= 2)
        .then(|| (loss_times[loss_times.len() - 1] - loss_times[0]) / (loss_times.len() - 1) as f64);
    let body = ClassifyBody {
        group: kind.to_string(),
        covector: h,
        status,
        stratum: pendulum.as_ref().map(|p| p.stratum.to_string()),
        abnormal: growth.abnormal,
        ample: growth.ample,
        equiregular: growth.equiregular,
        growth: growth.growth,
        step: growth.step,
        young_diagram: growth.young_diagram,
        closed_form_loss_times: pendulum.as_ref().map(|p| closed_form_loss_times(p, t)),
        pendulum,
        t,
        loss_times,
        loss_spacing,
    };
    Ok(json(cfg, body))
}

#[derive(Serialize)]
struct CurvatureBody {
    report: CurvatureReport,
}

pub fn curvature(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg)?;
    let kind = cfg.group_kind()?;
    let model = build_group(kind)?;
    let h = cfg.covector_exact(kind)?;
    let report = curvature_operator(&model, &h)?;
    Ok(json(cfg, CurvatureBody { report }))
}

#[derive(Serialize)]
struct VerifyBody {
    report: SuiteReport,
}

/// Report text, and whether every check passed.
pub fn verify(cfg: &RunConfig) -> Result<(String, Result<(), CliError>), CliError> {
    json_only(cfg)?;
    let kind = cfg.group_kind()?;
    let suite = cfg.suite_kind()?;
    let model = build_group(kind)?;
    let report = run_suite_with(&model, suite, cfg.seed, &cfg.suite_tolerances())?;
    let status = if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed { failed: report.failed, total: report.passed + report.failed })
    };
    Ok((json(cfg, VerifyBody { report }), status))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub chart: Vec<f64>,
    pub stratum: String,
    pub growth: Vec<usize>,
    /// `None` at a pole.
    pub r11: Option<f64>,
    #[serde(rename = "E")]
    pub energy: f64,
    pub slack: Option<f64>,
}

fn sweep_row(kind: GroupKind, chart: Vec<f64>, tol: f64) -> SweepRow {
    let beta = chart.get(3).copied().unwrap_or(0.0);
    let h = h_from_chart(kind, chart[0], chart[1], chart[2], beta).expect("grid checked the group");
    let stratum = match classify_pendulum_tol(kind, &h, tol) {
        Ok(p) => p.stratum.to_string(),
        Err(e) => format!("error: {}", e),
    };
    let growth = growth_vector_closed_form_tol(kind, &h, tol).growth;
    let r = r11::<f64>(kind, &h).ok();
    let bound = energy_bound::<f64>(kind, &h).map(|(b, _)| b);
    SweepRow {
        chart,
        stratum,
        growth,
        r11: r,
        energy: energy::<f64>(kind, &h).expect("engel or cartan"),
        slack: r.zip(bound).map(|(r, b)| b - r),
    }
}

fn cartesian(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in points {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_else(|| "singular".into())
}

#[derive(Serialize)]
struct SweepBody<'a> {
    axes: Vec<&'a str>,
    rows: &'a [SweepRow],
}

pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let kind = cfg.group_kind()?;
    let axes = parse_grid(cfg.grid.as_deref().unwrap_or(""), kind)?;
    let grid = cartesian(&axes.iter().map(|a| a.points()).collect::<Vec<_>>());
    let rows: Vec<SweepRow> = grid.into_par_iter().map(|c| sweep_row(kind, c, cfg.tol_class)).collect();
    let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    Ok(match cfg.format {
        Format::Json => json(cfg, SweepBody { axes: names, rows: &rows }),
        Format::Csv => {
            let mut out = names.join(",");
            out.push_str(",stratum,growth,r11,E,slack\n");
            for r in &rows {
                for v in &r.chart {
                    out.push_str(&fmt17(*v));
                    out.push(',');
                }
                let g: Vec<String> = r.growth.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.stratum,
                    g.join(";"),
                    opt_cell(r.r11),
                    fmt17(r.energy),
                    opt_cell(r.slack)
                );
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_order_is_row_major() {
        let g = cartesian(&[vec![0.0, 1.0], vec![5.0, 6.0]]);
        assert_eq!(g, vec![vec![0.0, 5.0], vec![0.0, 6.0], vec![1.0, 5.0], vec![1.0, 6.0]]);
    }

    #[test]
    fn engel_slack_is_nonnegative() {
        let row = sweep_row(GroupKind::Goursat(4), vec![0.7, 0.3, 1.2], 1e-10);
        assert!(row.slack.unwrap() >= 0.0);
        let pole = sweep_row(GroupKind::Goursat(4), vec![0.0, 0.3, 1.2], 1e-10);
        assert_eq!(pole.r11, None);
    }
}
