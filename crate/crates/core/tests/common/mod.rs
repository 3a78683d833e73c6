#![allow(dead_code)]

use levarray_core::gaussian::{CovarianceMatrix, SymplecticForm};
use nalgebra::{DMatrix, Schur};

/// Rotation by `theta` on mode `m`.
pub fn phase_rotation(modes: usize, m: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (c, sn) = (theta.cos(), theta.sin());
    s[(2 * m, 2 * m)] = c;
    s[(2 * m, 2 * m + 1)] = -sn;
    s[(2 * m + 1, 2 * m)] = sn;
    s[(2 * m + 1, 2 * m + 1)] = c;
    s
}

/// Single-mode squeezer on mode `m`.
pub fn squeezer(modes: usize, m: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    s[(2 * m, 2 * m)] = (-r).exp();
    s[(2 * m + 1, 2 * m + 1)] = r.exp();
    s
}

/// Beam splitter with angle `theta` between modes `a` and `b`.
pub fn beam_splitter(modes: usize, a: usize, b: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (c, sn) = (theta.cos(), theta.sin());
    for q in 0..2 {
        s[(2 * a + q, 2 * a + q)] = c;
        s[(2 * a + q, 2 * b + q)] = sn;
        s[(2 * b + q, 2 * a + q)] = -sn;
        s[(2 * b + q, 2 * b + q)] = c;
    }
    s
}

pub fn transform(v: &CovarianceMatrix, s: &DMatrix<f64>) -> CovarianceMatrix {
    let m = s * v.matrix() * s.transpose();
    CovarianceMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// Thermal state pushed through a network of squeezers, rotations and beam
/// splitters; `knobs` supplies the angles, squeezings and occupations in turn.
pub fn random_state(modes: usize, knobs: &[f64]) -> CovarianceMatrix {
    let mut k = knobs.iter().cycle();
    let mut next = || *k.next().unwrap();
    let mut diag = DMatrix::identity(2 * modes, 2 * modes);
    for m in 0..modes {
        let n = 2.0 * next().abs();
        diag[(2 * m, 2 * m)] = 1.0 + n;
        diag[(2 * m + 1, 2 * m + 1)] = 1.0 + n;
    }
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for m in 0..modes {
        s = squeezer(modes, m, next()) * phase_rotation(modes, m, 3.0 * next()) * s;
    }
    for a in 0..modes {
        for b in a + 1..modes {
            s = beam_splitter(modes, a, b, 3.0 * next()) * s;
        }
    }
    for m in 0..modes {
        s = squeezer(modes, m, 0.5 * next()) * s;
    }
    transform(&CovarianceMatrix::new(diag).unwrap(), &s)
}

/// Symplectic eigenvalues as moduli of the complex eigenvalues of `Omega V`,
/// paired up and sorted ascending.
pub fn symplectic_oracle(v: &CovarianceMatrix) -> Vec<f64> {
    let m = SymplecticForm::new(v.modes()).matrix() * v.matrix();
    let eig = Schur::new(m).complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    moduli.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Log-negativity from the oracle spectrum of the partial transpose.
pub fn log_negativity_oracle(v: &CovarianceMatrix, party_a: &[usize], party_b: &[usize]) -> f64 {
    let mut keep: Vec<usize> = party_a.iter().chain(party_b).copied().collect();
    keep.sort_unstable();
    let mut idx = vec![];
    for &m in &keep {
        idx.push(2 * m);
        idx.push(2 * m + 1);
    }
    let mut r = v.matrix().select_rows(&idx).select_columns(&idx);
    for (pos, m) in keep.iter().enumerate() {
        if party_a.contains(m) {
            let p = 2 * pos + 1;
            r.row_mut(p).neg_mut();
            r.column_mut(p).neg_mut();
        }
    }
    let pt = CovarianceMatrix::new(r).unwrap();
    symplectic_oracle(&pt).iter().map(|nu| (-nu.ln()).max(0.0)).sum()
}

/// Permutes quadratures so the state on `modes[i]` moves to slot `i`.
pub fn permute_modes(v: &CovarianceMatrix, order: &[usize]) -> CovarianceMatrix {
    let idx: Vec<usize> = order.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    CovarianceMatrix::new(v.matrix().select_rows(&idx).select_columns(&idx)).unwrap()
}
