//! Gaussian-state linear algebra on covariance matrices.
//!
//! Covariance matrices use the doubled convention
//! `V_jk = <r_j r_k + r_k r_j> - 2 <r_j><r_k>`, so the vacuum is the identity
//! and a thermal mode with occupation `n` has variance `2n + 1`. Quadratures
//! are ordered in `(x, p)` pairs, one pair per mode.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on `V - V^T`.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Smallest symplectic eigenvalue accepted as physical.
pub const PHYSICAL_TOL: f64 = 1e-6;
/// A drift eigenvalue with real part above this is treated as unstable.
pub const STABILITY_MARGIN: f64 = -1e-12;

/// Real symmetric second-moment matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps `matrix` after checking it is square, even-dimensional and
    /// symmetric. Physicality is not required here so that partial
    /// transposes can be represented too; see [`CovarianceMatrix::is_physical`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::InvalidCovariance(format!("not square: {rows}x{cols}")));
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::InvalidCovariance(format!("dimension {rows} is not a positive even number")));
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if diff > SYMMETRY_TOL || diff.is_nan() {
                    return Err(Error::InvalidCovariance(format!(
                        "asymmetric at ({i}, {j}): |V_ij - V_ji| = {diff:e}"
                    )));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes))
    }

    /// Product of identical thermal states, variance `2 nbar + 1` per quadrature.
    pub fn thermal(modes: usize, nbar: f64) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes) * (2.0 * nbar + 1.0))
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`; `x1 - x2` and
    /// `p1 + p2` are the squeezed combinations.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        ]);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// True when every symplectic eigenvalue is at least `1 - PHYSICAL_TOL`.
    pub fn is_physical(&self) -> Result<bool> {
        let nu = symplectic_eigenvalues(self)?;
        Ok(nu.first().is_none_or(|&min| min >= 1.0 - PHYSICAL_TOL))
    }

    /// Smallest eigenvalue of the (real symmetric) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.0.clone()).eigenvalues.min()
    }

    fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.modes() {
            return Err(Error::IndexOutOfRange { index, modes: self.modes() });
        }
        Ok(())
    }
}

/// Block-diagonal symplectic form with `[[0, 1], [-1, 0]]` per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    modes: usize,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Self {
        Self { modes }
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut omega = DMatrix::zeros(self.dim(), self.dim());
        for m in 0..self.modes {
            omega[(2 * m, 2 * m + 1)] = 1.0;
            omega[(2 * m + 1, 2 * m)] = -1.0;
        }
        omega
    }
}

/// Two disjoint, nonempty sets of mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    party_a: Vec<usize>,
    party_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(party_a: Vec<usize>, party_b: Vec<usize>) -> Result<Self> {
        if party_a.is_empty() || party_b.is_empty() {
            return Err(Error::InvalidBipartition("both parties must be nonempty".into()));
        }
        for (name, party) in [("a", &party_a), ("b", &party_b)] {
            let mut sorted = party.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != party.len() {
                return Err(Error::InvalidBipartition(format!("party {name} repeats a mode")));
            }
        }
        if let Some(m) = party_a.iter().find(|m| party_b.contains(m)) {
            return Err(Error::InvalidBipartition(format!("mode {m} appears in both parties")));
        }
        Ok(Self { party_a, party_b })
    }

    pub fn party_a(&self) -> &[usize] {
        &self.party_a
    }

    pub fn party_b(&self) -> &[usize] {
        &self.party_b
    }

    /// Modes of both parties, sorted ascending.
    pub fn modes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.party_a.iter().chain(&self.party_b).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Largest real part over the eigenvalues of `matrix`.
pub fn spectral_abscissa(matrix: &DMatrix<f64>) -> Result<f64> {
    if !matrix.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
    }
    let schur = Schur::try_new(matrix.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Solves `A V + V A^T + N = 0` for the steady-state covariance matrix.
///
/// The equation is vectorized over the upper triangle of `V`, which keeps
/// the solution exactly symmetric, and solved by dense LU with one step of
/// iterative refinement.
pub fn lyapunov_solve(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let n = drift.nrows();
    if !drift.is_square() || diffusion.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "drift {:?} and diffusion {:?} must be equal square shapes",
            drift.shape(),
            diffusion.shape()
        )));
    }
    let abscissa = spectral_abscissa(drift)?;
    if abscissa >= STABILITY_MARGIN {
        return Err(Error::NotStable { abscissa });
    }

    let idx = |i: usize, j: usize| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        lo * n - lo * (lo + 1) / 2 + hi
    };
    let unknowns = n * (n + 1) / 2;
    let mut system = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<f64>::zeros(unknowns);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            rhs[row] = -0.5 * (diffusion[(i, j)] + diffusion[(j, i)]);
            for k in 0..n {
                let a_ik = drift[(i, k)];
                if a_ik != 0.0 {
                    system[(row, idx(k, j))] += a_ik;
                }
                let a_jk = drift[(j, k)];
                if a_jk != 0.0 {
                    system[(row, idx(i, k))] += a_jk;
                }
            }
        }
    }

    let lu = system.clone().lu();
    let mut solution =
        lu.solve(&rhs).ok_or_else(|| Error::SolveFailure("vectorized Lyapunov system is singular".into()))?;
    let residual = &rhs - &system * &solution;
    if let Some(correction) = lu.solve(&residual) {
        solution += correction;
    }
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailure("non-finite entries in the solution".into()));
    }

    let v = DMatrix::from_fn(n, n, |i, j| solution[idx(i, j)]);
    CovarianceMatrix::new(v)
}

/// Max-norm residual `|A V + V A^T + N|_max`.
pub fn lyapunov_residual(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>, v: &CovarianceMatrix) -> f64 {
    let v = v.matrix();
    let r = drift * v + v * drift.transpose() + diffusion;
    r.amax()
}

/// Symplectic eigenvalues (moduli of the eigenvalues of `i Omega V`), sorted
/// ascending.
///
/// Computed from the singular values of `L^T Omega L` with `V = L L^T`; that
/// matrix is antisymmetric and similar to `Omega V`, so its singular values
/// are the wanted moduli, each appearing twice.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = v.modes();
    let chol = v
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("covariance matrix is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * SymplecticForm::new(n).matrix() * &l;
    let svd = k
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Ok(sv.chunks_exact(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

/// Flips the sign of every momentum row and column belonging to `party`.
pub fn partial_transpose(v: &CovarianceMatrix, party: &[usize]) -> Result<CovarianceMatrix> {
    if party.is_empty() {
        return Err(Error::InvalidBipartition("transposed party is empty".into()));
    }
    for &m in party {
        v.check_mode(m)?;
    }
    let mut out = v.0.clone();
    for &m in party {
        let p = 2 * m + 1;
        out.row_mut(p).neg_mut();
        out.column_mut(p).neg_mut();
    }
    Ok(CovarianceMatrix(out))
}

/// Submatrix of the modes in `keep`, in the order given.
pub fn reduce(v: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidBipartition("no modes kept".into()));
    }
    for &m in keep {
        v.check_mode(m)?;
    }
    let rows: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let d = rows.len();
    Ok(CovarianceMatrix(DMatrix::from_fn(d, d, |i, j| v.0[(rows[i], rows[j])])))
}

/// Logarithmic negativity (natural log) across `split`, computed on the
/// state reduced to the modes of both parties.
pub fn log_negativity(v: &CovarianceMatrix, split: &Bipartition) -> Result<f64> {
    for &m in split.party_a().iter().chain(split.party_b()) {
        v.check_mode(m)?;
    }
    let keep = split.modes();
    let reduced = reduce(v, &keep)?;
    let local: Vec<usize> =
        split.party_a().iter().map(|m| keep.iter().position(|k| k == m).expect("party mode is kept")).collect();
    let transposed = partial_transpose(&reduced, &local)?;
    let nu = symplectic_eigenvalues(&transposed)?;
    Ok(nu.iter().map(|&x| (-x.ln()).max(0.0)).sum())
}

/// Variance `c^T V c` of a normalized quadrature, with the norm of the
/// coefficients as supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureVariance {
    pub variance: f64,
    pub norm: f64,
}

/// Variance of the quadrature `sum_i (c_{2i} x_i + c_{2i+1} p_i)` after
/// normalizing `coeffs` to unit length. Below 1 means squeezed below vacuum.
pub fn quadrature_variance(v: &CovarianceMatrix, coeffs: &[f64]) -> Result<QuadratureVariance> {
    if coeffs.len() != v.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for a {}-dimensional covariance matrix",
            coeffs.len(),
            v.dim()
        )));
    }
    let c = DVector::from_column_slice(coeffs);
    let norm = c.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = c / norm;
    let variance = (c.transpose() * v.matrix() * &c)[(0, 0)];
    Ok(QuadratureVariance { variance, norm })
}

/// Smallest quadrature variance over the modes in `modes` with the unit
/// coefficient vector (in the reduced `(x, p)` ordering) that attains it.
pub fn min_variance_quadrature(v: &CovarianceMatrix, modes: &[usize]) -> Result<(f64, DVector<f64>)> {
    let reduced = reduce(v, modes)?;
    let eig = SymmetricEigen::try_new(reduced.into_inner(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigendecomposition did not converge".into()))?;
    let (imin, &lambda) =
        eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty spectrum");
    let mut vec = eig.eigenvectors.column(imin).into_owned();
    // fix the sign so the largest component is positive
    let lead = vec.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if lead < 0.0 {
        vec.neg_mut();
    }
    Ok((lambda, vec))
}
