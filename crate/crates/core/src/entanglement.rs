//! Dyadic and triadic entanglement of the three-particle mechanical state,
//! the gated figures of merit, and collective-quadrature squeezing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{self, Bipartition, CovarianceMatrix};
use crate::system::BogoliubovSpec;

/// Pair labels in the order reported by [`dyadic_negativities`].
pub const PAIR_LABELS: [&str; 3] = ["12", "23", "31"];
/// Split labels in the order reported by [`triadic_negativities`].
pub const SPLIT_LABELS: [&str; 3] = ["1|23", "2|31", "3|12"];

/// Absolute level below which a negativity counts as negligible.
pub const GATE_ABS: f64 = 1e-3;
/// Ratio standing in for "much smaller than".
pub const GATE_RATIO: f64 = 0.05;
/// A quadrature is squeezed when its variance is below `1 - SQUEEZING_TOL`.
pub const SQUEEZING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Arity {
    /// Pairs of particles, third particle traced out.
    Dyadic,
    /// One particle against the other two.
    Triadic,
}

impl Arity {
    /// 2 for dyadic, 3 for triadic.
    pub fn order(self) -> u8 {
        match self {
            Arity::Dyadic => 2,
            Arity::Triadic => 3,
        }
    }

    pub fn from_order(order: u8) -> Option<Self> {
        match order {
            2 => Some(Arity::Dyadic),
            3 => Some(Arity::Triadic),
            _ => None,
        }
    }

    pub fn negativities(self, v_mech: &CovarianceMatrix) -> Result<[f64; 3]> {
        match self {
            Arity::Dyadic => dyadic_negativities(v_mech),
            Arity::Triadic => triadic_negativities(v_mech),
        }
    }
}

fn require_three_particles(v_mech: &CovarianceMatrix) -> Result<()> {
    if v_mech.modes() != 3 {
        return Err(Error::ShapeMismatch(format!("expected a 3-mode mechanical block, got {} modes", v_mech.modes())));
    }
    Ok(())
}

/// Log-negativity of pairs 12, 23 and 31 after tracing out the third particle.
pub fn dyadic_negativities(v_mech: &CovarianceMatrix) -> Result<[f64; 3]> {
    require_three_particles(v_mech)?;
    let mut out = [0.0; 3];
    for (i, e) in out.iter_mut().enumerate() {
        let split = Bipartition::new(vec![i], vec![(i + 1) % 3])?;
        *e = gaussian::log_negativity(v_mech, &split)?;
    }
    Ok(out)
}

/// Log-negativity of the splits 1|23, 2|31 and 3|12 of the full state.
pub fn triadic_negativities(v_mech: &CovarianceMatrix) -> Result<[f64; 3]> {
    require_three_particles(v_mech)?;
    let mut out = [0.0; 3];
    for (i, e) in out.iter_mut().enumerate() {
        let split = Bipartition::new(vec![i], vec![(i + 1) % 3, (i + 2) % 3])?;
        *e = gaussian::log_negativity(v_mech, &split)?;
    }
    Ok(out)
}

/// Label indices and values sorted by descending value; ties keep label order.
pub fn sort_descending(values: [f64; 3]) -> [(usize, f64); 3] {
    let mut labeled = [(0, values[0]), (1, values[1]), (2, values[2])];
    labeled.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    labeled
}

/// Geometric-mean figures of merit over the sorted negativities of one arity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiguresOfMerit {
    pub arity: Arity,
    /// All three bipartitions entangled: `(E1 E2 E3)^(1/3)`.
    pub all: f64,
    /// Exactly two: `sqrt(E1 E2)`, zero when `E3` is not negligible.
    pub two: f64,
    /// Exactly one: `E1`, zero when `E2` is not negligible.
    pub one: f64,
    pub two_gated: bool,
    pub one_gated: bool,
}

impl FiguresOfMerit {
    /// Figure for `count` entangled bipartitions (1, 2 or 3).
    pub fn get(&self, count: u8) -> f64 {
        match count {
            1 => self.one,
            2 => self.two,
            3 => self.all,
            _ => panic!("bipartition count must be 1, 2 or 3, got {count}"),
        }
    }
}

fn negligible(value: f64, reference: f64) -> bool {
    value < GATE_ABS.max(GATE_RATIO * reference)
}

pub fn figures_of_merit(sorted: [f64; 3], arity: Arity) -> Result<FiguresOfMerit> {
    let [e1, e2, e3] = sorted;
    let ok = sorted.iter().all(|e| e.is_finite() && *e >= 0.0) && e1 >= e2 && e2 >= e3;
    if !ok {
        return Err(Error::UnsortedInput(sorted));
    }
    let all = (e1 * e2 * e3).cbrt();
    let pair_mean = (e1 * e2).sqrt();
    let two_gated = !negligible(e3, pair_mean);
    let one_gated = !negligible(e2, e1);
    Ok(FiguresOfMerit {
        arity,
        all,
        two: if two_gated { 0.0 } else { pair_mean },
        one: if one_gated { 0.0 } else { e1 },
        two_gated,
        one_gated,
    })
}

/// Sorts `values` and evaluates the figures of merit.
pub fn figures_from_values(values: [f64; 3], arity: Arity) -> FiguresOfMerit {
    let sorted = sort_descending(values).map(|(_, v)| v);
    figures_of_merit(sorted, arity).expect("sorted negativities are valid input")
}

/// A normalized collective quadrature over `(x1, p1, x2, p2, x3, p3)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature {
    pub label: String,
    pub coeffs: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    X,
    P,
}

fn quadrature(terms: &[(f64, Kind, usize)]) -> Quadrature {
    let mut coeffs = [0.0; 6];
    let mut label = String::new();
    for (n, &(sign, kind, particle)) in terms.iter().enumerate() {
        let slot = 2 * particle + if kind == Kind::P { 1 } else { 0 };
        coeffs[slot] = sign;
        if sign < 0.0 {
            label.push('-');
        } else if n > 0 {
            label.push('+');
        }
        label.push(if kind == Kind::X { 'x' } else { 'p' });
        label.push_str(&(particle + 1).to_string());
    }
    let norm = (terms.len() as f64).sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    Quadrature { label, coeffs }
}

/// Sign patterns of three terms up to a global sign, at most one minus.
const TRIPLE_SIGNS: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]];

/// Fixed set of two- and three-particle quadratures: `(x_i +- x_j)/sqrt 2`,
/// `(p_i +- p_j)/sqrt 2`, `(+-x1 +-x2 +-x3)/sqrt 3`, `(+-p1 +-p2 +-p3)/sqrt 3`
/// and the mixed `(x_i +- p_j +- p_k)/sqrt 3`.
pub fn squeezing_catalog() -> Vec<Quadrature> {
    let mut out = Vec::new();
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        for kind in [Kind::X, Kind::P] {
            out.push(quadrature(&[(1.0, kind, i), (1.0, kind, j)]));
            out.push(quadrature(&[(1.0, kind, i), (-1.0, kind, j)]));
        }
    }
    for kind in [Kind::X, Kind::P] {
        for s in TRIPLE_SIGNS {
            out.push(quadrature(&[(s[0], kind, 0), (s[1], kind, 1), (s[2], kind, 2)]));
        }
    }
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let (j, k) = (j.min(k), j.max(k));
        for (sj, sk) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            out.push(quadrature(&[(1.0, Kind::X, i), (sj, Kind::P, j), (sk, Kind::P, k)]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureReading {
    pub label: String,
    pub coeffs: [f64; 6],
    pub variance: f64,
}

impl QuadratureReading {
    pub fn squeezed(&self) -> bool {
        self.variance < 1.0 - SQUEEZING_TOL
    }
}

/// Variance of every catalog entry.
pub fn quadrature_readings(v_mech: &CovarianceMatrix, catalog: &[Quadrature]) -> Result<Vec<QuadratureReading>> {
    require_three_particles(v_mech)?;
    catalog
        .iter()
        .map(|q| {
            let variance = gaussian::quadrature_variance(v_mech, &q.coeffs)?.variance;
            Ok(QuadratureReading { label: q.label.clone(), coeffs: q.coeffs, variance })
        })
        .collect()
}

/// Catalog entries squeezed below the vacuum level.
pub fn squeezing_scan(v_mech: &CovarianceMatrix, catalog: &[Quadrature]) -> Result<Vec<QuadratureReading>> {
    Ok(quadrature_readings(v_mech, catalog)?.into_iter().filter(QuadratureReading::squeezed).collect())
}

/// Occupations `<beta_k^† beta_k>` of the three Bogoliubov modes.
///
/// With `beta = sum_j u_j b_j + v_j b_j^†` the mode quadratures are
/// `X = sum (u + v) x_j` and `P = sum (u - v) p_j`, so
/// `<beta^† beta> = (c_X^T V c_X + c_P^T V c_P) / 4 - [beta, beta^†] / 2`.
pub fn collective_mode_occupations(v_mech: &CovarianceMatrix, spec: &BogoliubovSpec) -> Result<[f64; 3]> {
    require_three_particles(v_mech)?;
    spec.validate()?;
    let v = v_mech.matrix();
    let quad = |c: &[f64; 6]| -> f64 { (0..6).map(|a| (0..6).map(|b| c[a] * v[(a, b)] * c[b]).sum::<f64>()).sum() };
    let mut out = [0.0; 3];
    for (k, occ) in out.iter_mut().enumerate() {
        let (u, w) = spec.mode_coefficients(k);
        let mut cx = [0.0; 6];
        let mut cp = [0.0; 6];
        for j in 0..3 {
            cx[2 * j] = u[j] + w[j];
            cp[2 * j + 1] = u[j] - w[j];
        }
        *occ = 0.25 * (quad(&cx) + quad(&cp)) - 0.5 * spec.norm();
    }
    Ok(out)
}

/// Occupation below one counts as effectively in the ground state.
pub fn is_ground_state_cooled(occupation: f64) -> bool {
    occupation < 1.0
}

/// Everything reported about one mechanical steady state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub dyadic: [f64; 3],
    pub triadic: [f64; 3],
    pub dyadic_sorted: [(usize, f64); 3],
    pub triadic_sorted: [(usize, f64); 3],
    pub dyadic_fom: FiguresOfMerit,
    pub triadic_fom: FiguresOfMerit,
    pub squeezed: Vec<QuadratureReading>,
    pub occupations: Option<[f64; 3]>,
}

impl EntanglementReport {
    pub fn analyze(v_mech: &CovarianceMatrix, spec: Option<&BogoliubovSpec>) -> Result<Self> {
        let dyadic = dyadic_negativities(v_mech)?;
        let triadic = triadic_negativities(v_mech)?;
        let dyadic_sorted = sort_descending(dyadic);
        let triadic_sorted = sort_descending(triadic);
        Ok(Self {
            dyadic,
            triadic,
            dyadic_sorted,
            triadic_sorted,
            dyadic_fom: figures_of_merit(dyadic_sorted.map(|(_, v)| v), Arity::Dyadic)?,
            triadic_fom: figures_of_merit(triadic_sorted.map(|(_, v)| v), Arity::Triadic)?,
            squeezed: squeezing_scan(v_mech, &squeezing_catalog())?,
            occupations: spec.map(|s| collective_mode_occupations(v_mech, s)).transpose()?,
        })
    }

    pub fn negativities(&self, arity: Arity) -> [f64; 3] {
        match arity {
            Arity::Dyadic => self.dyadic,
            Arity::Triadic => self.triadic,
        }
    }

    pub fn figures(&self, arity: Arity) -> &FiguresOfMerit {
        match arity {
            Arity::Dyadic => &self.dyadic_fom,
            Arity::Triadic => &self.triadic_fom,
        }
    }

    pub fn is_squeezed(&self, label: &str) -> bool {
        self.squeezed.iter().any(|q| q.label == label)
    }
}
