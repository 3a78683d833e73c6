//! Scenario presets and their expansion into sweep series.

use std::fmt;
use std::str::FromStr;

use levarray_core::entanglement::Arity;
use levarray_core::optimizer::{LambdaPoint, Objective, OptimizationProblem, SymmetryMode};
use levarray_core::sweep::{Axis, SweepGrid};
use levarray_core::system::SystemParams;

use crate::config::{ConfigError, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4a,
    Fig4b,
    Table1,
    Custom,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 10] = [
        ScenarioId::Fig2a,
        ScenarioId::Fig2b,
        ScenarioId::Fig2c,
        ScenarioId::Fig3a,
        ScenarioId::Fig3b,
        ScenarioId::Fig3c,
        ScenarioId::Fig4a,
        ScenarioId::Fig4b,
        ScenarioId::Table1,
        ScenarioId::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Fig2a => "fig2a",
            ScenarioId::Fig2b => "fig2b",
            ScenarioId::Fig2c => "fig2c",
            ScenarioId::Fig3a => "fig3a",
            ScenarioId::Fig3b => "fig3b",
            ScenarioId::Fig3c => "fig3c",
            ScenarioId::Fig4a => "fig4a",
            ScenarioId::Fig4b => "fig4b",
            ScenarioId::Table1 => "table1",
            ScenarioId::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioId::Fig2a => "dyadic E3, equal couplings; cut at lambda2 = 0.8",
            ScenarioId::Fig2b => "dyadic E2, free couplings; cut at lambda2 = 0.23",
            ScenarioId::Fig2c => "dyadic E1, free couplings; cut at lambda2 = 0.01",
            ScenarioId::Fig3a => "triadic E3, equal couplings; cuts at lambda2 = 0.91, 0.92",
            ScenarioId::Fig3b => "triadic E2, free couplings; cut at lambda2 = 0.53",
            ScenarioId::Fig3c => "triadic E1, free couplings; cut at lambda2 = 1.01",
            ScenarioId::Fig4a => "two-particle modes, triadic E3, equal couplings; thermal vs nbar = 0",
            ScenarioId::Fig4b => "two-particle modes, triadic E3, free couplings; thermal vs nbar = 0",
            ScenarioId::Table1 => "collective-quadrature squeezing at the optima of the six reference cuts",
            ScenarioId::Custom => "reference parameters, everything from the config",
        }
    }

    /// Preset configuration before any file or flag is applied.
    pub fn preset(self) -> ScenarioConfig {
        let mut c = ScenarioConfig::base(self);
        let mut objective = |arity, count, symmetry, cuts: &[f64]| {
            c.arity = arity;
            c.count = count;
            c.symmetry = symmetry;
            c.cut_lambda2 = cuts.to_vec();
        };
        match self {
            ScenarioId::Fig2a => objective(Arity::Dyadic, 3, SymmetryMode::EqualCouplings, &[0.8]),
            ScenarioId::Fig2b => objective(Arity::Dyadic, 2, SymmetryMode::Free, &[0.23]),
            ScenarioId::Fig2c => objective(Arity::Dyadic, 1, SymmetryMode::Free, &[0.01]),
            ScenarioId::Fig3a => objective(Arity::Triadic, 3, SymmetryMode::EqualCouplings, &[0.91, 0.92]),
            ScenarioId::Fig3b => objective(Arity::Triadic, 2, SymmetryMode::Free, &[0.53]),
            ScenarioId::Fig3c => objective(Arity::Triadic, 1, SymmetryMode::Free, &[1.01]),
            ScenarioId::Fig4a | ScenarioId::Fig4b => {
                let symmetry =
                    if self == ScenarioId::Fig4a { SymmetryMode::EqualCouplings } else { SymmetryMode::Free };
                objective(Arity::Triadic, 3, symmetry, &[]);
                c.two_particle = true;
                c.lambda1.step = 0.01;
                c.reference_nbar = Some(0.0);
            }
            ScenarioId::Table1 => {
                c.landscape = false;
                c.squeezing = true;
            }
            ScenarioId::Custom => {}
        }
        c
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|id| id.name()).collect();
            format!("unknown scenario `{s}` (expected one of {})", known.join(", "))
        })
    }
}

/// The reference cuts revisited by `table1`: objective, symmetry, lambda2.
pub const TABLE1_CUTS: [(Arity, u8, SymmetryMode, f64); 6] = [
    (Arity::Dyadic, 3, SymmetryMode::EqualCouplings, 0.8),
    (Arity::Dyadic, 2, SymmetryMode::Free, 0.23),
    (Arity::Dyadic, 1, SymmetryMode::Free, 0.01),
    (Arity::Triadic, 3, SymmetryMode::EqualCouplings, 0.92),
    (Arity::Triadic, 2, SymmetryMode::Free, 0.53),
    (Arity::Triadic, 1, SymmetryMode::Free, 1.01),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Landscape,
    Cut,
}

/// One sweep: a problem template and the lambda points it runs over.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub kind: SeriesKind,
    pub template: OptimizationProblem,
    pub grid: SweepGrid,
}

fn template(
    config: &ScenarioConfig,
    arity: Arity,
    count: u8,
    symmetry: SymmetryMode,
    nbar: f64,
) -> Result<OptimizationProblem, ConfigError> {
    let invalid = |e: levarray_core::Error| ConfigError::Invalid(e.to_string());
    let params = SystemParams::uniform(3, 3, config.kappa, config.gamma(), nbar).map_err(invalid)?;
    let objective = Objective::new(arity, count).map_err(invalid)?;
    let mut problem = OptimizationProblem::new(objective, LambdaPoint::TwoParticle { lambda1: 0.0 }, params, symmetry)
        .with_g_max(config.g_max);
    problem.refine = config.refine.clone();
    problem.validate().map_err(invalid)?;
    Ok(problem)
}

fn cut_grid(config: &ScenarioConfig, lambda2: f64) -> SweepGrid {
    SweepGrid::landscape(config.cut_lambda1, Axis::single(lambda2))
}

/// Expands a resolved configuration into the sweeps to run, landscape first.
pub fn plan(config: &ScenarioConfig) -> Result<Vec<Series>, ConfigError> {
    let mut out = Vec::new();
    let base = template(config, config.arity, config.count, config.symmetry, config.nbar)?;
    if config.scenario == ScenarioId::Table1 {
        for (arity, count, symmetry, lambda2) in TABLE1_CUTS {
            let problem = template(config, arity, count, symmetry, config.nbar)?;
            out.push(Series {
                label: format!("{} lambda2={lambda2}", problem.objective.label()),
                kind: SeriesKind::Cut,
                template: problem,
                grid: cut_grid(config, lambda2),
            });
        }
        return Ok(out);
    }
    let landscape_grid = if config.two_particle {
        SweepGrid::two_particle(config.lambda1)
    } else {
        SweepGrid::landscape(config.lambda1, config.lambda2)
    };
    if config.landscape {
        out.push(Series {
            label: "landscape".into(),
            kind: SeriesKind::Landscape,
            template: base.clone(),
            grid: landscape_grid.clone(),
        });
    }
    for &lambda2 in &config.cut_lambda2 {
        out.push(Series {
            label: format!("lambda2={lambda2}"),
            kind: SeriesKind::Cut,
            template: base.clone(),
            grid: cut_grid(config, lambda2),
        });
    }
    if let Some(nbar) = config.reference_nbar {
        out.push(Series {
            label: format!("nbar={nbar}"),
            kind: SeriesKind::Cut,
            template: template(config, config.arity, config.count, config.symmetry, nbar)?,
            grid: landscape_grid,
        });
    }
    Ok(out)
}
