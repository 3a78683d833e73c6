//! Landscapes and cuts: one independent optimization per lambda point.
//!
//! Points are embarrassingly parallel. With the `parallel` feature they are
//! distributed over a rayon pool; otherwise every execution mode runs
//! sequentially. Rows always come back in grid order.

use serde::Serialize;

use crate::entanglement::Arity;
use crate::error::{Error, Result};
use crate::optimizer::{self, Diagnostics, LambdaPoint, OptimizationProblem};

/// Inclusive, evenly spaced axis `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(Error::InvalidParameter(format!("bad axis range [{start}, {stop}]")));
        }
        if !(step > 0.0) && stop > start {
            return Err(Error::InvalidParameter(format!("axis step must be positive, got {step}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn single(value: f64) -> Self {
        Self { start: value, stop: value, step: 1.0 }
    }

    /// Grid values; the last one is snapped to `stop` when within 1e-9 steps.
    pub fn values(&self) -> Vec<f64> {
        if self.stop == self.start {
            return vec![self.start];
        }
        let span = (self.stop - self.start) / self.step;
        let n = (span + 1e-9).floor() as usize;
        (0..=n)
            .map(
                |i| {
                    if i == n && (span - n as f64).abs() < 1e-9 {
                        self.stop
                    } else {
                        self.start + i as f64 * self.step
                    }
                },
            )
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub points: Vec<LambdaPoint>,
}

impl SweepGrid {
    /// Full `(lambda1, lambda2)` landscape, lambda1-major.
    pub fn landscape(lambda1: Axis, lambda2: Axis) -> Self {
        let l2 = lambda2.values();
        let points = lambda1
            .values()
            .into_iter()
            .flat_map(|a| l2.iter().map(move |&b| LambdaPoint::ThreeParticle { lambda1: a, lambda2: b }))
            .collect();
        Self { points }
    }

    /// Two-particle modes along `lambda1`.
    pub fn two_particle(lambda1: Axis) -> Self {
        Self { points: lambda1.values().into_iter().map(|lambda1| LambdaPoint::TwoParticle { lambda1 }).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Execution {
    Sequential,
    /// `None` uses rayon's default thread count.
    Parallel {
        workers: Option<usize>,
    },
}

/// One optimized point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda1: f64,
    pub lambda2: f64,
    /// NaN when the point is infeasible.
    pub lambda3: f64,
    pub couplings: [f64; 3],
    /// Pair negativities for 12, 23, 31.
    pub dyadic: [f64; 3],
    /// Split negativities for 1|23, 2|31, 3|12.
    pub triadic: [f64; 3],
    /// `[E1, E2, E3]` of the objective's arity at the optimum.
    pub fom: [f64; 3],
    /// Optimized objective value.
    pub value: f64,
    pub stable: bool,
    pub occupations: [f64; 3],
    pub diagnostics: Diagnostics,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(point: &LambdaPoint, lambda3: f64, error: &Error) -> Self {
        let nan = [f64::NAN; 3];
        Self {
            lambda1: point.lambda1(),
            lambda2: point.lambda2(),
            lambda3,
            couplings: nan,
            dyadic: nan,
            triadic: nan,
            fom: nan,
            value: f64::NAN,
            stable: false,
            occupations: nan,
            diagnostics: Diagnostics::default(),
            error: Some(error.to_string()),
        }
    }

    /// `true` unless the point was infeasible or the optimization failed.
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Optimizes one point, reusing every setting of `template` except the point.
pub fn sweep_point(template: &OptimizationProblem, point: LambdaPoint) -> SweepRow {
    let Some(lambda3) = point.lambda3() else {
        let value = 1.0 + point.lambda1().powi(2) - point.lambda2().powi(2);
        return SweepRow::failed(&point, f64::NAN, &Error::Infeasible { value });
    };
    let problem = OptimizationProblem { point, ..template.clone() };
    let outcome = optimizer::optimize_couplings(&problem).and_then(|result| {
        let analysis = optimizer::analyze_point(point, &problem.params, result.couplings)?;
        Ok((result, analysis))
    });
    match outcome {
        Ok((result, analysis)) => {
            let fom = analysis.report.figures(problem.objective.arity);
            SweepRow {
                lambda1: point.lambda1(),
                lambda2: point.lambda2(),
                lambda3,
                couplings: result.couplings,
                dyadic: analysis.report.dyadic,
                triadic: analysis.report.triadic,
                fom: [fom.one, fom.two, fom.all],
                value: result.value,
                stable: analysis.stability.stable,
                occupations: analysis.report.occupations.unwrap_or([f64::NAN; 3]),
                diagnostics: result.diagnostics,
                error: None,
            }
        }
        Err(e) => SweepRow::failed(&point, lambda3, &e),
    }
}

/// Optimizes every grid point; rows follow grid order.
pub fn sweep(template: &OptimizationProblem, grid: &SweepGrid, execution: Execution) -> Result<Vec<SweepRow>> {
    match execution {
        Execution::Sequential => Ok(grid.points.iter().map(|&p| sweep_point(template, p)).collect()),
        Execution::Parallel { workers } => parallel(template, grid, workers),
    }
}

#[cfg(feature = "parallel")]
fn parallel(template: &OptimizationProblem, grid: &SweepGrid, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;

    if workers == Some(0) {
        return Err(Error::InvalidParameter("worker count must be positive".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| grid.points.par_iter().map(|&p| sweep_point(template, p)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel(template: &OptimizationProblem, grid: &SweepGrid, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    if workers == Some(0) {
        return Err(Error::InvalidParameter("worker count must be positive".into()));
    }
    sweep(template, grid, Execution::Sequential)
}

/// Row with the largest objective value among successful rows.
pub fn best_row(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().filter(|r| r.is_ok()).max_by(|a, b| a.value.total_cmp(&b.value))
}

/// Negativities of `arity` in a row.
pub fn row_negativities(row: &SweepRow, arity: Arity) -> [f64; 3] {
    match arity {
        Arity::Dyadic => row.dyadic,
        Arity::Triadic => row.triadic,
    }
}
