//! Maximizing a figure of merit over the Bogoliubov coupling rates.
//!
//! Each objective evaluation builds the coupling table, solves for the
//! steady state and scores the mechanical block; unstable points score 0.
//! The search is a continuation in the bound: boxes `[0, b]^3` (diagonals in
//! equal-couplings mode) with `b` doubling up to `G_max` are each seeded with
//! a coarse lattice, and the best lattice peaks plus the best point so far
//! are refined with a
//! box-constrained Nelder-Mead simplex. Gated figures drop to zero at the
//! gate, so the simplex climbs a penalized surrogate instead while the best
//! exactly-gated point ever evaluated is what gets returned.

use std::collections::HashMap;

use serde::Serialize;

use crate::entanglement::{figures_from_values, sort_descending, Arity, EntanglementReport, GATE_ABS, GATE_RATIO};
use crate::error::{Error, Result};
use crate::system::{self, BogoliubovSpec, StabilityReport, SystemParams, DEFAULT_G_MAX};

/// Figure of merit `E_count^(arity)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Objective {
    pub arity: Arity,
    pub count: u8,
}

impl Objective {
    pub fn new(arity: Arity, count: u8) -> Result<Self> {
        if !(1..=3).contains(&count) {
            return Err(Error::InvalidParameter(format!("bipartition count must be 1, 2 or 3, got {count}")));
        }
        Ok(Self { arity, count })
    }

    pub fn label(&self) -> String {
        format!("E{}^({})", self.count, self.arity.order())
    }
}

/// Where in the Bogoliubov coefficient space a problem sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaPoint {
    /// Three-particle modes with `l3 = sqrt(1 + l1^2 - l2^2)`.
    ThreeParticle { lambda1: f64, lambda2: f64 },
    /// Two-particle modes: `l3 = 0`, `l2 = sqrt(1 + l1^2)`.
    TwoParticle { lambda1: f64 },
}

impl LambdaPoint {
    pub fn spec(&self, couplings: [f64; 3]) -> Result<BogoliubovSpec> {
        match *self {
            LambdaPoint::ThreeParticle { lambda1, lambda2 } => {
                BogoliubovSpec::from_lambdas(lambda1, lambda2, couplings)
            }
            LambdaPoint::TwoParticle { lambda1 } => BogoliubovSpec::two_particle(lambda1, couplings),
        }
    }

    pub fn lambda1(&self) -> f64 {
        match *self {
            LambdaPoint::ThreeParticle { lambda1, .. } | LambdaPoint::TwoParticle { lambda1 } => lambda1,
        }
    }

    pub fn lambda2(&self) -> f64 {
        match *self {
            LambdaPoint::ThreeParticle { lambda2, .. } => lambda2,
            LambdaPoint::TwoParticle { lambda1 } => (1.0 + lambda1 * lambda1).sqrt(),
        }
    }

    /// `None` when the point violates the normalization constraint.
    pub fn lambda3(&self) -> Option<f64> {
        match *self {
            LambdaPoint::ThreeParticle { lambda1, lambda2 } => system::lambda3_from(lambda1, lambda2).ok(),
            LambdaPoint::TwoParticle { .. } => Some(0.0),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.lambda3().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SymmetryMode {
    Free,
    /// `G1 = G2 = G3`, a one-dimensional search.
    EqualCouplings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineSettings {
    /// Lattice points per axis used to seed the search.
    pub seeds_per_axis: usize,
    /// Number of best seeds refined by the simplex.
    pub starts: usize,
    pub max_iter: usize,
    /// Stop once the objective spread over the simplex drops below this.
    pub tol: f64,
    /// Initial simplex edge as a fraction of `G_max`.
    pub initial_step: f64,
    /// Extra seeds per axis between 0 and the first lattice step.
    pub low_seeds: usize,
    /// Smallest box of the bound continuation; boxes double from here
    /// up to `G_max`.
    pub ladder_floor: f64,
    /// Slope of the surrogate penalty on gated figures.
    pub gate_penalty: f64,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self {
            seeds_per_axis: 9,
            starts: 3,
            max_iter: 500,
            tol: 1e-7,
            initial_step: 0.1,
            low_seeds: 3,
            ladder_floor: DEFAULT_G_MAX / 8.0,
            gate_penalty: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationProblem {
    pub objective: Objective,
    pub point: LambdaPoint,
    pub params: SystemParams,
    pub g_max: f64,
    pub symmetry: SymmetryMode,
    pub refine: RefineSettings,
}

impl OptimizationProblem {
    pub fn new(objective: Objective, point: LambdaPoint, params: SystemParams, symmetry: SymmetryMode) -> Self {
        Self { objective, point, params, g_max: DEFAULT_G_MAX, symmetry, refine: RefineSettings::default() }
    }

    pub fn with_g_max(mut self, g_max: f64) -> Self {
        self.g_max = g_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_max >= 0.0) || !self.g_max.is_finite() {
            return Err(Error::InvalidParameter(format!("G_max must be non-negative, got {}", self.g_max)));
        }
        if let Some(value) =
            self.point.lambda3().is_none().then(|| 1.0 + self.point.lambda1().powi(2) - self.point.lambda2().powi(2))
        {
            return Err(Error::Infeasible { value });
        }
        if self.params.n_cavities() != 3 || self.params.n_particles() != 3 {
            return Err(Error::ShapeMismatch("coupling optimization needs 3 particles and 3 cavities".into()));
        }
        self.params.validate()?;
        let r = &self.refine;
        if r.seeds_per_axis < 2
            || r.starts == 0
            || !(r.ladder_floor > 0.0)
            || !(r.tol > 0.0)
            || !(r.initial_step > 0.0)
            || !(r.gate_penalty >= 0.0)
        {
            return Err(Error::InvalidParameter(format!("invalid refinement settings {r:?}")));
        }
        Ok(())
    }

    fn dimension(&self) -> usize {
        match self.symmetry {
            SymmetryMode::Free => 3,
            SymmetryMode::EqualCouplings => 1,
        }
    }

    fn couplings(&self, x: &[f64]) -> [f64; 3] {
        match self.symmetry {
            SymmetryMode::Free => [x[0], x[1], x[2]],
            SymmetryMode::EqualCouplings => [x[0]; 3],
        }
    }
}

/// One scored coupling vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub couplings: [f64; 3],
    pub value: f64,
    /// Gate-free figure minus a linear penalty on the gating violation;
    /// drives the search, never reported.
    pub surrogate: f64,
    pub stable: bool,
}

/// Surrogate score of unstable or unsolvable points.
const UNSTABLE_SURROGATE: f64 = -1e3;

fn surrogate(sorted: [f64; 3], count: u8, penalty: f64) -> f64 {
    let violation = |value: f64, reference: f64| (value - GATE_ABS.max(GATE_RATIO * reference)).max(0.0);
    let [e1, e2, e3] = sorted;
    match count {
        1 => e1 - penalty * violation(e2, e1),
        2 => {
            let pair = (e1 * e2).sqrt();
            pair - penalty * violation(e3, pair)
        }
        _ => (e1 * e2 * e3).cbrt(),
    }
}

/// Scores `couplings`; unstable or otherwise unsolvable points score 0.
pub fn evaluate(problem: &OptimizationProblem, couplings: [f64; 3]) -> Evaluation {
    let score = || -> Result<[f64; 3]> {
        let spec = problem.point.spec(couplings)?;
        let table = system::couplings_from_bogoliubov(&spec)?;
        let state = system::steady_state(&table, &problem.params)?;
        problem.objective.arity.negativities(&state.mechanical())
    };
    match score() {
        Ok(values) => {
            let arity = problem.objective.arity;
            let count = problem.objective.count;
            let sorted = sort_descending(values).map(|(_, v)| v);
            Evaluation {
                couplings,
                value: figures_from_values(values, arity).get(count),
                surrogate: surrogate(sorted, count, problem.refine.gate_penalty),
                stable: true,
            }
        }
        Err(_) => Evaluation { couplings, value: 0.0, surrogate: UNSTABLE_SURROGATE, stable: false },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub unstable_evaluations: usize,
    /// Best value among the lattice seeds.
    pub seed_value: f64,
    pub refine_iterations: usize,
    /// Every simplex run met the spread tolerance before the iteration cap.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub couplings: [f64; 3],
    pub value: f64,
    pub diagnostics: Diagnostics,
}

struct Counter<'a> {
    problem: &'a OptimizationProblem,
    evaluations: usize,
    unstable: usize,
    /// Best reported value seen so far; the first one wins ties.
    best: (f64, [f64; 3]),
    /// Surrogate scores of seed points, keyed by bit pattern.
    seen: HashMap<Vec<u64>, f64>,
}

impl Counter<'_> {
    /// Evaluates and records `x`, returning the surrogate score.
    fn eval(&mut self, x: &[f64]) -> f64 {
        let e = evaluate(self.problem, self.problem.couplings(x));
        self.evaluations += 1;
        if !e.stable {
            self.unstable += 1;
        }
        if e.value > self.best.0 {
            self.best = (e.value, e.couplings);
        }
        e.surrogate
    }

    fn eval_cached(&mut self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&score) = self.seen.get(&key) {
            return score;
        }
        let score = self.eval(x);
        self.seen.insert(key, score);
        score
    }
}

fn lattice(g_max: f64, per_axis: usize, dim: usize) -> Vec<Vec<f64>> {
    lattice_indices(per_axis, dim)
        .into_iter()
        .map(|idx| idx.iter().map(|&i| g_max * i as f64 / (per_axis - 1) as f64).collect())
        .collect()
}

fn lattice_indices(per_axis: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut points = vec![vec![]];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..per_axis).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    points
}

/// Seed values along one axis: `seeds_per_axis` uniform points on
/// `[0, upper]` plus `low_seeds` points halving toward zero below the first
/// uniform step, where gated optima tend to sit.
fn seed_axis(upper: f64, refine: &RefineSettings) -> Vec<f64> {
    let n = refine.seeds_per_axis - 1;
    let mut axis: Vec<f64> = (0..=n).map(|i| upper * i as f64 / n as f64).collect();
    let step = upper / n as f64;
    axis.extend((1..=refine.low_seeds).map(|k| step * 0.5f64.powi(k as i32)));
    axis.sort_by(f64::total_cmp);
    axis
}

/// A seed lattice point and whether it is a peak of its lattice.
struct Candidate {
    peak: bool,
    score: f64,
    x: Vec<f64>,
}

/// Surrogate scores on one product lattice. In free mode only one point per
/// cyclic orbit is evaluated; the others share its score.
struct SeedGrid<'a> {
    axis: &'a [f64],
    dim: usize,
    cyclic: bool,
    scores: Vec<f64>,
}

impl<'a> SeedGrid<'a> {
    fn score(counter: &mut Counter<'_>, axis: &'a [f64], dim: usize, symmetry: SymmetryMode) -> Self {
        let cyclic = symmetry == SymmetryMode::Free;
        let mut grid = Self { axis, dim, cyclic, scores: vec![f64::NAN; axis.len().pow(dim as u32)] };
        for idx in lattice_indices(axis.len(), dim) {
            if grid.representative(&idx) == idx {
                let flat = grid.flat(&idx);
                grid.scores[flat] = counter.eval_cached(&grid.point(&idx));
            }
        }
        grid
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.axis[i]).collect()
    }

    /// Lexicographically largest cyclic shift of the index triple.
    fn representative(&self, idx: &[usize]) -> Vec<usize> {
        if !self.cyclic {
            return idx.to_vec();
        }
        let shifts = [idx.to_vec(), vec![idx[1], idx[2], idx[0]], vec![idx[2], idx[0], idx[1]]];
        shifts.into_iter().max().expect("three shifts")
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.axis.len() + i)
    }

    fn at(&self, idx: &[usize]) -> f64 {
        self.scores[self.flat(&self.representative(idx))]
    }

    /// Every orbit representative; a peak has no axial neighbour scoring
    /// higher and at least one scoring lower.
    fn candidates(&self) -> Vec<Candidate> {
        let n = self.axis.len();
        lattice_indices(n, self.dim)
            .into_iter()
            .filter(|idx| self.representative(idx) == *idx)
            .map(|idx| {
                let score = self.at(&idx);
                let neighbours: Vec<f64> = (0..self.dim)
                    .flat_map(|axis| [(axis, -1isize), (axis, 1)])
                    .filter_map(|(axis, step)| {
                        let j = idx[axis].checked_add_signed(step).filter(|&j| j < n)?;
                        let mut m = idx.clone();
                        m[axis] = j;
                        Some(self.at(&m))
                    })
                    .collect();
                let peak = neighbours.iter().all(|&m| m <= score) && neighbours.iter().any(|&m| m < score);
                Candidate { peak, score, x: self.point(&idx) }
            })
            .collect()
    }
}

/// Seeds the lattice on `[0, bound]^d` and picks up to `starts` points:
/// peaks by descending score, then the best other points.
fn seed_starts(counter: &mut Counter<'_>, bound: f64, dim: usize, symmetry: SymmetryMode) -> Vec<Vec<f64>> {
    let refine = &counter.problem.refine;
    let count = refine.starts;
    let axis = seed_axis(bound, refine);
    let mut candidates = SeedGrid::score(counter, &axis, dim, symmetry).candidates();
    // stable sort keeps lattice order among ties
    candidates.sort_by(|a, b| b.peak.cmp(&a.peak).then(b.score.total_cmp(&a.score)));
    candidates.into_iter().take(count).map(|c| c.x).collect()
}

/// Bounds searched in turn: `floor * 2^k` below `g_max`, then `g_max`.
///
/// Anchoring the ladder at a fixed floor makes the search for a bound on the
/// ladder a prefix of the search for any larger bound.
fn bound_ladder(g_max: f64, floor: f64) -> Vec<f64> {
    let mut ladder = vec![];
    let mut rung = floor;
    while rung < g_max {
        ladder.push(rung);
        rung *= 2.0;
    }
    ladder.push(g_max);
    ladder
}

/// Rotates a coupling vector cyclically so its largest rate comes first.
///
/// A cyclic shift of `(G1, G2, G3)` relabels the particles cyclically and
/// leaves every figure of merit unchanged.
pub fn canonical_rotation(g: [f64; 3]) -> [f64; 3] {
    let lead = (0..3).fold(0, |best, i| if g[i] > g[best] { i } else { best });
    [g[lead], g[(lead + 1) % 3], g[(lead + 2) % 3]]
}

/// Lattice seeding followed by simplex refinement of the best seeds.
pub fn optimize_couplings(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let dim = problem.dimension();
    let mut counter =
        Counter { problem, evaluations: 0, unstable: 0, best: (f64::NEG_INFINITY, [0.0; 3]), seen: HashMap::new() };

    let mut diagnostics = Diagnostics { converged: true, ..Default::default() };
    if problem.g_max == 0.0 {
        counter.eval(&vec![0.0; dim]);
    } else {
        for (stage, bound) in bound_ladder(problem.g_max, problem.refine.ladder_floor).into_iter().enumerate() {
            let mut starts = seed_starts(&mut counter, bound, dim, problem.symmetry);
            if stage == 0 {
                diagnostics.seed_value = counter.best.0;
            } else {
                // carry the best point of the smaller boxes into this one
                let carried: Vec<f64> = counter.best.1[..dim].to_vec();
                starts.retain(|x| *x != carried);
                starts.insert(0, carried);
            }
            let edge = problem.refine.initial_step * bound;
            for x in starts {
                let run = nelder_mead_max(&mut counter, &x, edge, bound, &problem.refine);
                diagnostics.refine_iterations += run.iterations;
                diagnostics.converged &= run.converged;
            }
        }
    }
    if counter.unstable == counter.evaluations {
        return Err(Error::AllUnstable);
    }

    let (mut value, mut couplings) = counter.best;
    if problem.symmetry == SymmetryMode::Free {
        // Near a gate edge the rotated copy can round to the other side;
        // keep the original orientation then.
        let rotated = evaluate(problem, canonical_rotation(couplings));
        counter.evaluations += 1;
        if rotated.value >= value - 1e-9 * value.abs().max(1.0) {
            (value, couplings) = (rotated.value, rotated.couplings);
        }
    }
    diagnostics.evaluations = counter.evaluations;
    diagnostics.unstable_evaluations = counter.unstable;
    Ok(OptimizationResult { couplings, value, diagnostics })
}

struct SimplexRun {
    iterations: usize,
    converged: bool,
}

fn clamp_box(x: &mut [f64], upper: f64) {
    x.iter_mut().for_each(|v| *v = v.clamp(0.0, upper));
}

/// Nelder-Mead maximization of the surrogate on `[0, upper]^d`; trial points
/// are projected onto the box. The best reported value is tracked by `counter`.
fn nelder_mead_max(
    counter: &mut Counter<'_>,
    start: &[f64],
    h: f64,
    upper: f64,
    settings: &RefineSettings,
) -> SimplexRun {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), counter.eval(start)));
    for i in 0..d {
        let mut x = start.to_vec();
        x[i] = if x[i] + h <= upper { x[i] + h } else { x[i] - h };
        let f = counter.eval(&x);
        simplex.push((x, f));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    // values are maximized, so the best vertex has the largest value
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| b.1.total_cmp(&a.1);
    while iterations < settings.max_iter {
        simplex.sort_by(by_value);
        if simplex[0].1 - simplex[d].1 < settings.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..d).map(|i| simplex[..d].iter().map(|(x, _)| x[i]).sum::<f64>() / d as f64).collect();
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..d).map(|i| centroid[i] + t * (worst.0[i] - centroid[i])).collect();
            clamp_box(&mut x, upper);
            x
        };

        let xr = along(-alpha);
        let fr = counter.eval(&xr);
        if fr > simplex[0].1 {
            let xe = along(-alpha * gamma);
            let fe = counter.eval(&xe);
            simplex[d] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr > worst.1 {
            let x = along(-rho);
            let f = counter.eval(&x);
            (x, f)
        } else {
            let x = along(rho);
            let f = counter.eval(&x);
            (x, f)
        };
        if fc > worst.1.max(fr) {
            simplex[d] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = (0..d).map(|i| best[i] + sigma * (vertex.0[i] - best[i])).collect();
            clamp_box(&mut x, upper);
            vertex.1 = counter.eval(&x);
            vertex.0 = x;
        }
    }
    SimplexRun { iterations, converged }
}

/// Exhaustive lattice search with spacing `step`, which must divide `G_max`.
pub fn brute_force_verify(problem: &OptimizationProblem, step: f64) -> Result<(f64, [f64; 3])> {
    problem.validate()?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("lattice step must be positive, got {step}")));
    }
    let intervals = (problem.g_max / step).round();
    if (intervals * step - problem.g_max).abs() > 1e-9 * problem.g_max.max(1.0) {
        return Err(Error::InvalidParameter(format!("step {step} does not divide G_max {}", problem.g_max)));
    }
    let per_axis = intervals as usize + 1;
    let points = if per_axis == 1 {
        vec![vec![0.0; problem.dimension()]]
    } else {
        lattice(problem.g_max, per_axis, problem.dimension())
    };
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for x in points {
        let e = evaluate(problem, problem.couplings(&x));
        if e.value > best.0 {
            best = (e.value, e.couplings);
        }
    }
    Ok(best)
}

/// Full analysis of one coupling vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAnalysis {
    pub spec: BogoliubovSpec,
    pub stability: StabilityReport,
    pub report: EntanglementReport,
}

pub fn analyze_point(point: LambdaPoint, params: &SystemParams, couplings: [f64; 3]) -> Result<PointAnalysis> {
    let spec = point.spec(couplings)?;
    let table = system::couplings_from_bogoliubov(&spec)?;
    let drift = system::assemble_drift(&table, params)?;
    let stability = system::stability_check(&drift, &table);
    let state = system::steady_state(&table, params)?;
    let report = EntanglementReport::analyze(&state.mechanical(), Some(&spec))?;
    Ok(PointAnalysis { spec, stability, report })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioPoint {
    pub result: OptimizationResult,
    pub analysis: PointAnalysis,
}

/// Maximizes the all-bipartition triadic figure with two-particle modes
/// (`l3 = 0`) at fixed `lambda1` and reports the optimum.
pub fn two_particle_bogoliubov_scenario(
    lambda1: f64,
    symmetry: SymmetryMode,
    params: &SystemParams,
    g_max: f64,
) -> Result<ScenarioPoint> {
    let point = LambdaPoint::TwoParticle { lambda1 };
    let objective = Objective::new(Arity::Triadic, 3)?;
    let problem = OptimizationProblem::new(objective, point, params.clone(), symmetry).with_g_max(g_max);
    let result = optimize_couplings(&problem)?;
    let analysis = analyze_point(point, params, result.couplings)?;
    Ok(ScenarioPoint { result, analysis })
}
