//! Coupling tables, drift and diffusion matrices for `N` particles coupled
//! to `N` cavity modes by coherent scattering.
//!
//! All rates are in units of the mechanical frequency. Quadratures are
//! ordered `(X_1, Y_1, ..., X_Nc, Y_Nc, x_1, p_1, ..., x_Nm, p_Nm)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{self, CovarianceMatrix, STABILITY_MARGIN};

pub const DEFAULT_KAPPA: f64 = 0.4;
pub const DEFAULT_QUALITY_FACTOR: f64 = 5e9;
pub const DEFAULT_NBAR: f64 = 2e7;
pub const DEFAULT_G_MAX: f64 = 0.4;

/// Tolerance on `-l1^2 + l2^2 + l3^2 = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Damping rates and thermal occupations, one entry per mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
    pub nbar: Vec<f64>,
}

impl SystemParams {
    pub fn uniform(n_cavities: usize, n_particles: usize, kappa: f64, gamma: f64, nbar: f64) -> Result<Self> {
        let params =
            Self { kappa: vec![kappa; n_cavities], gamma: vec![gamma; n_particles], nbar: vec![nbar; n_particles] };
        params.validate()?;
        Ok(params)
    }

    /// Three particles and three cavities with `kappa = 0.4`, `Q = 5e9`
    /// (so `gamma = 2e-10`) and `nbar = 2e7`.
    pub fn reference() -> Self {
        Self::uniform(3, 3, DEFAULT_KAPPA, 1.0 / DEFAULT_QUALITY_FACTOR, DEFAULT_NBAR)
            .expect("reference parameters are valid")
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar.iter_mut().for_each(|n| *n = nbar);
        self
    }

    pub fn n_cavities(&self) -> usize {
        self.kappa.len()
    }

    pub fn n_particles(&self) -> usize {
        self.gamma.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_cavities() + self.n_particles()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_empty() || self.gamma.is_empty() {
            return Err(Error::InvalidParameter("need at least one cavity and one particle".into()));
        }
        if self.nbar.len() != self.gamma.len() {
            return Err(Error::InvalidParameter(format!(
                "{} occupations for {} particles",
                self.nbar.len(),
                self.gamma.len()
            )));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {k}")));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {g}")));
        }
        if let Some(n) = self.nbar.iter().find(|n| !(**n >= 0.0) || !n.is_finite()) {
            return Err(Error::InvalidParameter(format!("nbar must be non-negative, got {n}")));
        }
        Ok(())
    }
}

/// Coefficients and cavity couplings of the three permutation-symmetric
/// Bogoliubov modes
///
/// ```text
/// beta_1 = l1 b1^† + l2 b2   + l3 b3
/// beta_2 = l3 b1   + l1 b2^† + l2 b3
/// beta_3 = l2 b1   + l3 b2   + l1 b3^†
/// ```
///
/// where `beta_k` couples to cavity `k` at rate `couplings[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub couplings: [f64; 3],
}

impl BogoliubovSpec {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, couplings: [f64; 3]) -> Result<Self> {
        let spec = Self { lambda1, lambda2, lambda3, couplings };
        spec.validate()?;
        Ok(spec)
    }

    /// Takes `l3 = +sqrt(1 + l1^2 - l2^2)`.
    pub fn from_lambdas(lambda1: f64, lambda2: f64, couplings: [f64; 3]) -> Result<Self> {
        let lambda3 = lambda3_from(lambda1, lambda2)?;
        Self::new(lambda1, lambda2, lambda3, couplings)
    }

    /// Two-particle modes `beta_k = l1 b_k^† + l2 b_{k+1}` with `l2 = sqrt(1 + l1^2)`.
    pub fn two_particle(lambda1: f64, couplings: [f64; 3]) -> Result<Self> {
        Self::new(lambda1, (1.0 + lambda1 * lambda1).sqrt(), 0.0, couplings)
    }

    /// `-l1^2 + l2^2 + l3^2`, equal to `[beta_k, beta_k^†]`.
    pub fn norm(&self) -> f64 {
        -self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2 + self.lambda3 * self.lambda3
    }

    pub fn validate(&self) -> Result<()> {
        let value = self.norm();
        if !((value - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(Error::NotNormalized { value });
        }
        if let Some(g) = self.couplings.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling rates must be non-negative, got {g}")));
        }
        Ok(())
    }

    /// Mode `k` written as `sum_j u[j] b_j + v[j] b_j^†`, returned as `(u, v)`.
    pub fn mode_coefficients(&self, k: usize) -> ([f64; 3], [f64; 3]) {
        let mut u = [0.0; 3];
        let mut v = [0.0; 3];
        v[k] = self.lambda1;
        u[(k + 1) % 3] = self.lambda2;
        u[(k + 2) % 3] = self.lambda3;
        (u, v)
    }
}

/// `l3 = +sqrt(1 + l1^2 - l2^2)`, or `Infeasible` if the radicand is negative.
pub fn lambda3_from(lambda1: f64, lambda2: f64) -> Result<f64> {
    let value = 1.0 + lambda1 * lambda1 - lambda2 * lambda2;
    if value < 0.0 || !value.is_finite() {
        return Err(Error::Infeasible { value });
    }
    Ok(value.sqrt())
}

/// Beam-splitter (`g_minus`) and two-mode-squeezing (`g_plus`) rates,
/// indexed `[particle j, cavity k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    g_minus: DMatrix<f64>,
    g_plus: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn new(g_minus: DMatrix<f64>, g_plus: DMatrix<f64>) -> Result<Self> {
        if g_minus.shape() != g_plus.shape() {
            return Err(Error::ShapeMismatch(format!("g_minus {:?} vs g_plus {:?}", g_minus.shape(), g_plus.shape())));
        }
        for j in 0..g_minus.nrows() {
            for k in 0..g_minus.ncols() {
                if g_minus[(j, k)] != 0.0 && g_plus[(j, k)] != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "particle {j} has both beam-splitter and squeezing coupling to cavity {k}"
                    )));
                }
            }
        }
        Ok(Self { g_minus, g_plus })
    }

    pub fn zeros(n_particles: usize, n_cavities: usize) -> Self {
        Self { g_minus: DMatrix::zeros(n_particles, n_cavities), g_plus: DMatrix::zeros(n_particles, n_cavities) }
    }

    pub fn g_minus(&self) -> &DMatrix<f64> {
        &self.g_minus
    }

    pub fn g_plus(&self) -> &DMatrix<f64> {
        &self.g_plus
    }

    pub fn n_particles(&self) -> usize {
        self.g_minus.nrows()
    }

    pub fn n_cavities(&self) -> usize {
        self.g_minus.ncols()
    }
}

/// Expands the three Bogoliubov couplings into per-particle rates.
///
/// Cavity `k` couples to particle `k` by two-mode squeezing at `l1 G_k` and
/// to particles `k+1`, `k+2` (cyclically) by beam splitters at `l2 G_k` and
/// `l3 G_k`.
pub fn couplings_from_bogoliubov(spec: &BogoliubovSpec) -> Result<CouplingMatrix> {
    spec.validate()?;
    let mut g_minus = DMatrix::zeros(3, 3);
    let mut g_plus = DMatrix::zeros(3, 3);
    for k in 0..3 {
        let rate = spec.couplings[k];
        let (u, v) = spec.mode_coefficients(k);
        for j in 0..3 {
            g_minus[(j, k)] = rate * u[j];
            g_plus[(j, k)] = rate * v[j];
        }
    }
    CouplingMatrix::new(g_minus, g_plus)
}

/// `G_k^2 = sum_j g_{-,jk}^2 - g_{+,jk}^2`; negative values signal instability.
pub fn effective_coupling(coupling: &CouplingMatrix, cavity: usize) -> f64 {
    (0..coupling.n_particles())
        .map(|j| coupling.g_minus[(j, cavity)].powi(2) - coupling.g_plus[(j, cavity)].powi(2))
        .sum()
}

/// Cooperativity `4 G_k^2 / (kappa_k gamma nbar)`, with `gamma nbar`
/// averaged over the particles. A vanishing thermal rate yields `+inf`
/// (or 0 when `G_k^2` is 0 too).
pub fn cooperativity(coupling: &CouplingMatrix, cavity: usize, params: &SystemParams) -> f64 {
    let g_sq = effective_coupling(coupling, cavity);
    let thermal: f64 =
        params.gamma.iter().zip(&params.nbar).map(|(g, n)| g * n).sum::<f64>() / params.n_particles() as f64;
    let denom = params.kappa[cavity] * thermal;
    if denom == 0.0 {
        return if g_sq == 0.0 { 0.0 } else { g_sq.signum() * f64::INFINITY };
    }
    4.0 * g_sq / denom
}

pub fn is_strong_cooperativity(c: f64) -> bool {
    c > 1.0
}

fn coupling_block(g_minus: f64, g_plus: f64) -> [[f64; 2]; 2] {
    [[0.0, g_minus - g_plus], [-g_minus - g_plus, 0.0]]
}

/// Drift matrix of the linearized Langevin equations in the rotating frame.
pub fn assemble_drift(coupling: &CouplingMatrix, params: &SystemParams) -> Result<DMatrix<f64>> {
    let nc = params.n_cavities();
    let nm = params.n_particles();
    if coupling.n_cavities() != nc || coupling.n_particles() != nm {
        return Err(Error::ShapeMismatch(format!(
            "coupling table is {}x{} but parameters describe {nm} particles and {nc} cavities",
            coupling.n_particles(),
            coupling.n_cavities()
        )));
    }
    let dim = 2 * (nc + nm);
    let mut a = DMatrix::zeros(dim, dim);
    for (k, kappa) in params.kappa.iter().enumerate() {
        a[(2 * k, 2 * k)] = -0.5 * kappa;
        a[(2 * k + 1, 2 * k + 1)] = -0.5 * kappa;
    }
    for (j, gamma) in params.gamma.iter().enumerate() {
        let m = 2 * (nc + j);
        a[(m, m)] = -0.5 * gamma;
        a[(m + 1, m + 1)] = -0.5 * gamma;
    }
    for j in 0..nm {
        for k in 0..nc {
            let block = coupling_block(coupling.g_minus[(j, k)], coupling.g_plus[(j, k)]);
            let (c, m) = (2 * k, 2 * (nc + j));
            for r in 0..2 {
                for s in 0..2 {
                    a[(c + r, m + s)] = block[r][s];
                    a[(m + r, c + s)] = block[r][s];
                }
            }
        }
    }
    Ok(a)
}

/// `diag(kappa_k, kappa_k, ..., gamma_j (2 nbar_j + 1), ...)`.
pub fn assemble_diffusion(params: &SystemParams) -> DMatrix<f64> {
    let diag: Vec<f64> = params
        .kappa
        .iter()
        .flat_map(|&k| [k, k])
        .chain(params.gamma.iter().zip(&params.nbar).flat_map(|(&g, &n)| [g * (2.0 * n + 1.0); 2]))
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub spectral_abscissa: f64,
    pub effective_couplings: Vec<f64>,
    pub stable: bool,
}

/// Eigenvalue stability of the drift plus the per-cavity `G_k^2`.
pub fn stability_check(drift: &DMatrix<f64>, coupling: &CouplingMatrix) -> StabilityReport {
    let spectral_abscissa = gaussian::spectral_abscissa(drift).unwrap_or(f64::NAN);
    StabilityReport {
        spectral_abscissa,
        effective_couplings: (0..coupling.n_cavities()).map(|k| effective_coupling(coupling, k)).collect(),
        stable: spectral_abscissa < STABILITY_MARGIN,
    }
}

/// Steady state of a coupled system together with its drift matrix.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub covariance: CovarianceMatrix,
    pub n_cavities: usize,
}

impl SteadyState {
    /// Covariance block of the mechanical modes only.
    pub fn mechanical(&self) -> CovarianceMatrix {
        let modes: Vec<usize> = (self.n_cavities..self.covariance.modes()).collect();
        gaussian::reduce(&self.covariance, &modes).expect("mechanical modes are in range")
    }
}

pub fn steady_state(coupling: &CouplingMatrix, params: &SystemParams) -> Result<SteadyState> {
    let drift = assemble_drift(coupling, params)?;
    let diffusion = assemble_diffusion(params);
    let covariance = gaussian::lyapunov_solve(&drift, &diffusion)?;
    Ok(SteadyState { drift, diffusion, covariance, n_cavities: params.n_cavities() })
}

/// Pairwise commutators of the three Bogoliubov modes:
/// `same[a][b] = [beta_a, beta_b]` and `dagger[a][b] = [beta_a, beta_b^†]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorTable {
    pub same: [[f64; 3]; 3],
    pub dagger: [[f64; 3]; 3],
}

pub fn bogoliubov_commutators(spec: &BogoliubovSpec) -> CommutatorTable {
    let modes: Vec<_> = (0..3).map(|k| spec.mode_coefficients(k)).collect();
    let mut same = [[0.0; 3]; 3];
    let mut dagger = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let (ua, va) = modes[a];
            let (ub, vb) = modes[b];
            same[a][b] = (0..3).map(|j| ua[j] * vb[j] - va[j] * ub[j]).sum();
            dagger[a][b] = (0..3).map(|j| ua[j] * ub[j] - va[j] * vb[j]).sum();
        }
    }
    CommutatorTable { same, dagger }
}

/// Residual occupation of `beta_2 = v1 b1 + v2 b2^†` once
/// `beta_1 = u1 b1^† + u2 b2` is in its ground state, for particle
/// occupations `n1`, `n2`. Zero requires `u1 v1 = u2 v2`.
pub fn nonorthogonal_cooling_bound(u1: f64, u2: f64, v1: f64, v2: f64, n1: f64, n2: f64) -> Result<f64> {
    if u1 == 0.0 || u2 == 0.0 || v1 == 0.0 || v2 == 0.0 {
        return Err(Error::DivisionByZero("Bogoliubov coefficients must be nonzero"));
    }
    Ok(v1 * v1 * (1.0 - u1 * v2 / (u2 * v1)) * n1
        + v2 * v2 * (1.0 - u2 * v1 / (u1 * v2)) * n2
        + v2 * v2 * (1.0 - u1 * v1 / (u2 * v2)))
}
