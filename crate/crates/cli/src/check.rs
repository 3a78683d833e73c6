//! `levarray check`: fast invariant suite over random systems.

use std::time::Instant;

use anyhow::Result;
use levarray_core::entanglement::Arity;
use levarray_core::gaussian::{self, Bipartition, CovarianceMatrix};
use levarray_core::optimizer::{
    brute_force_verify, optimize_couplings, LambdaPoint, Objective, OptimizationProblem, SymmetryMode,
};
use levarray_core::system::{self, CouplingMatrix, SystemParams};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_point(rng: &mut StdRng) -> (LambdaPoint, [f64; 3]) {
    let l1 = rng.random_range(0.0..1.5);
    let l2 = rng.random_range(0.0..1.0) * (1.0f64 + l1 * l1).sqrt();
    let g = [(); 3].map(|_| rng.random_range(0.0..0.4));
    (LambdaPoint::ThreeParticle { lambda1: l1, lambda2: l2 }, g)
}

fn mechanical(
    point: LambdaPoint,
    g: [f64; 3],
    params: &SystemParams,
) -> Option<(system::SteadyState, CovarianceMatrix)> {
    let table = system::couplings_from_bogoliubov(&point.spec(g).ok()?).ok()?;
    let state = system::steady_state(&table, params).ok()?;
    let mech = state.mechanical();
    Some((state, mech))
}

/// Random local symplectic: rotation, squeezing, rotation on each mode.
fn local_symplectic(rng: &mut StdRng) -> DMatrix<f64> {
    let mut s = DMatrix::identity(6, 6);
    for m in 0..3 {
        let (a, r, b) = (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0));
        let mut block = DMatrix::identity(6, 6);
        let rot = |t: f64| nalgebra::Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let local = rot(a) * nalgebra::Matrix2::new(f64::exp(-r), 0.0, 0.0, f64::exp(r)) * rot(b);
        block.view_mut((2 * m, 2 * m), (2, 2)).copy_from(&local);
        s = block * s;
    }
    s
}

pub fn run_checks(cases: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let params = SystemParams::reference();
    let mut out = Vec::new();
    let mut record = |name, passed, detail: String| out.push(CheckOutcome { name, passed, detail });

    let mut states = Vec::new();
    let (mut residual, mut min_nu) = (0.0f64, f64::MAX);
    while states.len() < cases {
        let (point, g) = random_point(&mut rng);
        let Some((state, mech)) = mechanical(point, g, &params) else { continue };
        residual = residual.max(gaussian::lyapunov_residual(&state.drift, &state.diffusion, &state.covariance));
        min_nu = min_nu.min(gaussian::symplectic_eigenvalues(&state.covariance)?[0]);
        states.push(mech);
    }
    record("lyapunov residual", residual < 1e-8, format!("max {residual:.2e} over {cases} stable systems"));
    record("physicality", min_nu >= 1.0 - 1e-6, format!("min symplectic eigenvalue {min_nu:.9}"));

    let mut involution = true;
    let mut local = 0.0f64;
    let splits = [Bipartition::new(vec![0], vec![1])?, Bipartition::new(vec![2], vec![0, 1])?];
    for v in &states {
        for party in [vec![0], vec![1, 2]] {
            let twice = gaussian::partial_transpose(&gaussian::partial_transpose(v, &party)?, &party)?;
            involution &= twice.matrix() == v.matrix();
        }
        let s = local_symplectic(&mut rng);
        let m = &s * v.matrix() * s.transpose();
        let w = CovarianceMatrix::new((&m + m.transpose()) * 0.5)?;
        for split in &splits {
            local = local.max((gaussian::log_negativity(v, split)? - gaussian::log_negativity(&w, split)?).abs());
        }
    }
    record("partial transpose involution", involution, "bitwise".into());
    record("local invariance", local < 1e-8, format!("max deviation {local:.2e}"));

    let mut tmsv = 0.0f64;
    for r in [0.1, 0.5, 1.0, 2.0] {
        let e =
            gaussian::log_negativity(&CovarianceMatrix::two_mode_squeezed(r), &Bipartition::new(vec![0], vec![1])?)?;
        tmsv = tmsv.max((e - 2.0 * r).abs());
    }
    record("two-mode squeezed oracle", tmsv < 1e-8, format!("max |E_N - 2r| {tmsv:.2e}"));

    let v = system::steady_state(&CouplingMatrix::zeros(3, 3), &params)?.covariance;
    let thermal = 2.0 * params.nbar[0] + 1.0;
    let expected = DMatrix::from_fn(12, 12, |i, j| match (i == j, i < 6) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => thermal,
    });
    let zero = (v.matrix() - &expected).amax() / thermal;
    record("zero coupling", zero < 1e-9, format!("relative deviation {zero:.2e}"));

    let mut perm = 0.0f64;
    let mut compared = 0;
    while compared < cases {
        let (point, g) = random_point(&mut rng);
        let (Some((_, v)), Some((_, w))) =
            (mechanical(point, g, &params), mechanical(point, [g[2], g[0], g[1]], &params))
        else {
            continue;
        };
        for arity in [Arity::Dyadic, Arity::Triadic] {
            let (a, b) = (arity.negativities(&v)?, arity.negativities(&w)?);
            for i in 0..3 {
                perm = perm.max((b[(i + 1) % 3] - a[i]).abs());
            }
        }
        compared += 1;
    }
    record("cyclic permutation covariance", perm < 1e-8, format!("max deviation {perm:.2e}"));

    let problems = (cases / 10).max(2);
    let mut worst = f64::MAX;
    for _ in 0..problems {
        let (point, _) = random_point(&mut rng);
        let objective = Objective::new(Arity::from_order(rng.random_range(2..=3)).unwrap(), rng.random_range(1..=3))?;
        let problem = OptimizationProblem::new(objective, point, params.clone(), SymmetryMode::Free);
        let (lattice, _) = brute_force_verify(&problem, 0.05)?;
        let found = optimize_couplings(&problem).map_or(0.0, |r| r.value);
        worst = worst.min(found - lattice);
    }
    record("optimizer dominates lattice", worst >= -1e-6, format!("min margin {worst:.2e} over {problems} problems"));
    Ok(out)
}

/// Prints one line per check; returns whether all passed.
pub fn run(cases: usize, seed: u64) -> Result<bool> {
    let clock = Instant::now();
    let outcomes = run_checks(cases, seed)?;
    for o in &outcomes {
        println!("{:<30} {}  {}", o.name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} checks, {failed} failed ({:.1} s)", outcomes.len(), clock.elapsed().as_secs_f64());
    Ok(failed == 0)
}
