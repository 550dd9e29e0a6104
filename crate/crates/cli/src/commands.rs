//! The subcommands as library functions returning rendered output and an exit code.

use std::time::Instant;

use parametrix::bounds::{calibrate_c6, lower_estimate, q_upper, regime_holds, upper_estimate_series, Calibration};
use parametrix::gaussian_core::SpaceTimePair;
use parametrix::parametrix_engine::{
    solve_cauchy_with, solve_nonhomogeneous_with, BackwardKernel, DriftSpec, ForwardKernel, NeumannConfig,
    NeumannResult,
};
use parametrix::validation::{run_invariant_suite, GridSpec, InvariantEntry, InvariantReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Problem, RunConfig};
use crate::error::{config_err, CliError, CliResult};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EvalKernel,
    EvalBounds,
    Solve,
    Validate,
    CalibrateBounds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
}

pub fn run(command: Command, cfg: &RunConfig, verbose: bool) -> CliResult<Outcome> {
    let start = Instant::now();
    let out = match command {
        Command::EvalKernel => render(eval_kernel(cfg, verbose)?, cfg),
        Command::EvalBounds => render(eval_bounds(cfg, verbose)?, cfg),
        Command::Solve => render(solve(cfg)?, cfg),
        Command::Validate => {
            let report = validate(cfg)?;
            let mut body = serde_json::to_string_pretty(&report).map_err(config_err)?;
            body.push('\n');
            Ok(Outcome {
                body,
                exit_code: report.exit_code(),
            })
        }
        Command::CalibrateBounds => Ok(Outcome {
            body: calibration_toml(cfg, &calibrate(cfg)?)?,
            exit_code: 0,
        }),
    };
    if verbose {
        eprintln!("{command:?} finished in {:.2?}", start.elapsed());
    }
    out
}

fn render(table: Table, cfg: &RunConfig) -> CliResult<Outcome> {
    Ok(Outcome {
        body: table.render(cfg.output.format, cfg.output.precision)?,
        exit_code: 0,
    })
}

/// Forward kernels for every (s, y) of the grid, with each grid point's value.
struct GridValues {
    points: Vec<SpaceTimePair>,
    results: Vec<NeumannResult>,
}

fn grid_values(drift: &DriftSpec, config: &NeumannConfig, grids: &GridSpec, verbose: bool) -> CliResult<GridValues> {
    let anchors = grids.anchors();
    if verbose {
        eprintln!("building kernels for {} anchors at M = {}", anchors.len(), config.max_order);
    }
    let kernels: Vec<ForwardKernel> = anchors
        .par_iter()
        .map(|&((s, y), tau)| ForwardKernel::new(drift, config, s, y, tau))
        .collect::<parametrix::Result<_>>()?;
    let points = grids.points();
    let results = points
        .par_iter()
        .map(|p| {
            let i = anchors
                .iter()
                .position(|(a, _)| *a == (p.s, p.y))
                .expect("every grid point has its anchor");
            kernels[i].eval(p.t, p.x)
        })
        .collect::<parametrix::Result<Vec<_>>>()?;
    Ok(GridValues { points, results })
}

/// Columns t,x,s,y,Z,p,term_1..term_M,tail_bound.
pub fn eval_kernel(cfg: &RunConfig, verbose: bool) -> CliResult<Table> {
    let drift = cfg.drift_spec()?;
    let config = cfg.neumann_config()?;
    let gv = grid_values(&drift, &config, &cfg.grids, verbose)?;
    let m = config.max_order;
    let mut header: Vec<String> = ["t", "x", "s", "y", "Z", "p"].map(String::from).to_vec();
    header.extend((1..=m).map(|i| format!("term_{i}")));
    header.push("tail_bound".into());
    let mut table = Table::new(header);
    for (p, r) in gv.points.iter().zip(&gv.results) {
        let mut row = vec![
            Cell::Num(p.t),
            Cell::Num(p.x),
            Cell::Num(p.s),
            Cell::Num(p.y),
            Cell::Num(r.leading_z),
            Cell::Num(r.value_p),
        ];
        row.extend((0..m).map(|i| r.terms.get(i).map_or(Cell::Empty, |v| Cell::Num(*v))));
        row.push(Cell::Num(r.analytic_tail_bound));
        table.rows.push(row);
    }
    Ok(table)
}

/// Columns t,x,s,y,lower,p,upper_series,q_upper,regime_flag. q_upper is
/// empty outside the regime; lower is empty without a calibration and K₋.
pub fn eval_bounds(cfg: &RunConfig, verbose: bool) -> CliResult<Table> {
    let drift = cfg.drift_spec()?;
    let config = cfg.neumann_config()?;
    let gv = grid_values(&drift, &config, &cfg.grids, verbose)?;
    let (gamma, k) = (drift.gamma, drift.k);
    let b = &cfg.bounds;
    let mut table = Table::new(["t", "x", "s", "y", "lower", "p", "upper_series", "q_upper", "regime_flag"]);
    for (p, r) in gv.points.iter().zip(&gv.results) {
        let regime = regime_holds(p, gamma, b.b);
        let q = if regime {
            Cell::Num(q_upper(p, gamma, k, b.b)?.value)
        } else {
            Cell::Empty
        };
        let lower = match (&b.calibration, drift.k_minus) {
            (Some(c), Some(_)) if regime_holds(p, gamma, b.b1) => {
                Cell::Num(lower_estimate(p, gamma, drift.k_minus, c.delta, c.b1, c.c6)?)
            }
            _ => Cell::Empty,
        };
        table.rows.push(vec![
            Cell::Num(p.t),
            Cell::Num(p.x),
            Cell::Num(p.s),
            Cell::Num(p.y),
            lower,
            Cell::Num(r.value_p),
            Cell::Num(upper_estimate_series(p, gamma, k, config.delta)?),
            q,
            Cell::Flag(regime),
        ]);
    }
    Ok(table)
}

/// Columns t,x,s,u over the t and x axes of the grid.
pub fn solve(cfg: &RunConfig) -> CliResult<Table> {
    let sec = cfg
        .solve
        .ok_or_else(|| CliError::Config("solve needs a [solve] section".into()))?;
    let drift = cfg.drift_spec()?;
    let config = cfg.neumann_config()?;
    let mut tx = Vec::new();
    for t in cfg.grids.t.values() {
        for x in cfg.grids.x.values() {
            if t > sec.s && x.abs() >= cfg.grids.exclusion {
                tx.push((t, x));
            }
        }
    }
    let growth = sec.datum.growth();
    let u = tx
        .par_iter()
        .map(|&(t, x)| {
            let kernel = BackwardKernel::new(&drift, &config, t, x, t - sec.s)?;
            match sec.problem {
                Problem::Cauchy => solve_cauchy_with(&kernel, sec.s, |y| sec.datum.eval(y), &growth),
                Problem::Nonhomogeneous => {
                    solve_nonhomogeneous_with(&kernel, sec.s, |_, y| sec.datum.eval(y), &growth)
                }
            }
        })
        .collect::<parametrix::Result<Vec<_>>>()?;
    let mut table = Table::new(["t", "x", "s", "u"]);
    for (&(t, x), u) in tx.iter().zip(u) {
        table.rows.push(vec![Cell::Num(t), Cell::Num(x), Cell::Num(sec.s), Cell::Num(u)]);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub status: Status,
    pub failing: Vec<String>,
    pub entries: Vec<InvariantEntry>,
}

impl ValidationReport {
    pub fn from_report(r: InvariantReport) -> Self {
        let status = if r.has_errors() {
            Status::Error
        } else if r.all_pass() {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            status,
            failing: r.failing().iter().map(|e| e.name.clone()).collect(),
            entries: r.entries,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }
}

pub fn validate(cfg: &RunConfig) -> CliResult<ValidationReport> {
    let report = run_invariant_suite(&cfg.drift_spec()?, &cfg.grids, &cfg.neumann_config()?, &cfg.suite_config())?;
    Ok(ValidationReport::from_report(report))
}

/// Largest C₆ keeping the minorant below p at every in-regime grid point.
pub fn calibrate(cfg: &RunConfig) -> CliResult<Calibration> {
    let drift = cfg.drift_spec()?;
    if drift.k_minus.is_none() {
        return Err(CliError::Config("calibrate-bounds needs drift.k_minus".into()));
    }
    let config = cfg.neumann_config()?;
    let gv = grid_values(&drift, &config, &cfg.grids, false)?;
    let samples: Vec<(SpaceTimePair, f64)> = gv.points.iter().copied().zip(gv.results.iter().map(|r| r.value_p)).collect();
    Ok(calibrate_c6(&samples, drift.gamma, config.delta, cfg.bounds.b1)?)
}

fn calibration_toml(cfg: &RunConfig, c: &Calibration) -> CliResult<String> {
    #[derive(Serialize)]
    struct Bounds<'a> {
        b: f64,
        b1: f64,
        calibration: &'a Calibration,
    }
    #[derive(Serialize)]
    struct Snippet<'a> {
        bounds: Bounds<'a>,
    }
    toml::to_string(&Snippet {
        bounds: Bounds {
            b: cfg.bounds.b,
            b1: cfg.bounds.b1,
            calibration: c,
        },
    })
    .map_err(config_err)
}
