use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use levarray_core::entanglement::{self, QuadratureReading};
use levarray_core::optimizer::{brute_force_verify, LambdaPoint, OptimizationProblem};
use levarray_core::sweep::{sweep, Execution};
use levarray_core::system;

use crate::config::ScenarioConfig;
use crate::output::{self, SqueezingRow, SummaryRow};
use crate::scenario::{self, SeriesKind};

pub const OUT_ENV: &str = "LEVARRAY_OUT";

/// `--out` (or `run.out`) wins; otherwise `$LEVARRAY_OUT/<scenario>`, then
/// `levarray-out/<scenario>`.
pub fn resolve_out_dir(config: &ScenarioConfig) -> PathBuf {
    if let Some(dir) = &config.out {
        return dir.clone();
    }
    let base = std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from("levarray-out"), PathBuf::from);
    base.join(config.scenario.name())
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Vec<SummaryRow>,
}

/// Mechanical-quadrature variances of the whole catalog at one optimum.
fn readings(problem: &OptimizationProblem, point: LambdaPoint, couplings: [f64; 3]) -> Result<Vec<QuadratureReading>> {
    let spec = point.spec(couplings)?;
    let table = system::couplings_from_bogoliubov(&spec)?;
    let state = system::steady_state(&table, &problem.params)?;
    Ok(entanglement::quadrature_readings(&state.mechanical(), &entanglement::squeezing_catalog())?)
}

pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let plan = scenario::plan(config)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let execution = Execution::Parallel { workers: config.workers };

    let mut landscape = Vec::new();
    let mut cuts = Vec::new();
    let mut summary = Vec::new();
    let mut squeezing = Vec::new();
    for series in &plan {
        let clock = Instant::now();
        let mut rows = sweep(&series.template, &series.grid, execution)?;
        let best = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_ok())
            .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .map(|(i, r)| (series.grid.points[i], r.clone()));
        let objective = series.template.objective.label();
        match best {
            Some((point, best)) => {
                eprintln!(
                    "{}: {} [{} points, {:.1} s] max {objective} = {:.4} at lambda1 = {}, lambda2 = {}",
                    config.scenario,
                    series.label,
                    rows.len(),
                    clock.elapsed().as_secs_f64(),
                    best.value,
                    output::fmt_num(best.lambda1),
                    output::fmt_num(best.lambda2),
                );
                let oracle = if config.oracle {
                    let problem = OptimizationProblem { point, ..series.template.clone() };
                    Some(brute_force_verify(&problem, config.oracle_step).context("lattice oracle")?.0)
                } else {
                    None
                };
                if config.squeezing {
                    for reading in readings(&series.template, point, best.couplings)? {
                        squeezing.push(SqueezingRow {
                            series: series.label.clone(),
                            objective: objective.clone(),
                            lambda1: best.lambda1,
                            lambda2: best.lambda2,
                            couplings: best.couplings,
                            reading,
                        });
                    }
                }
                summary.push(SummaryRow { series: series.label.clone(), objective, best, oracle });
            }
            None => eprintln!("{}: {} has no successful point", config.scenario, series.label),
        }
        output::sort_rows(&mut rows);
        match series.kind {
            SeriesKind::Landscape => landscape = rows,
            SeriesKind::Cut => cuts.push((series.label.clone(), rows)),
        }
    }

    let mut files = Vec::new();
    let mut emit = |name: &str, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        write(&path)?;
        files.push(path);
        Ok(())
    };
    if plan.iter().any(|s| s.kind == SeriesKind::Landscape) {
        emit("landscape.csv", &|p| output::write_landscape(p, &landscape))?;
    }
    if !cuts.is_empty() {
        emit("cuts.csv", &|p| output::write_cuts(p, &cuts))?;
    }
    emit("summary.csv", &|p| output::write_summary(p, &summary))?;
    if config.squeezing {
        emit("squeezing.csv", &|p| output::write_squeezing(p, &squeezing))?;
    }
    if let Some(bad) = summary.iter().find(|r| r.oracle_ok() == Some(false)) {
        anyhow::bail!(
            "optimizer below lattice oracle on {}: {} < {}",
            bad.series,
            bad.best.value,
            bad.oracle.unwrap_or(f64::NAN)
        );
    }
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), files, summary })
}
