//! Single-square detection-rate sweep over square side and noise level.

use mdlac::imaging::{seeded_rng, synthesize_squares, NoiseConfig, Square};
use mdlac::score::Epsilon;
use mdlac::square_detect::score_single;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Polarity};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleTrial {
    pub side: usize,
    pub delta: f64,
    pub seed: u64,
    pub trial: u64,
    pub row: usize,
    pub col: usize,
    pub mdl_bits: f64,
    pub log10_nfa: f64,
    pub mdl_detect: bool,
    pub nfa_detect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub side: usize,
    pub delta: f64,
    pub seed: u64,
    pub trials: u64,
    pub mdl_rate: f64,
    pub nfa_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSweep {
    pub trials: Vec<SingleTrial>,
    pub cells: Vec<SweepCell>,
}

fn run_trial(
    cfg: &ExperimentConfig,
    eps: Epsilon,
    side: usize,
    delta: f64,
    stream: u64,
    trial: u64,
) -> Result<SingleTrial, CliError> {
    let s = &cfg.single;
    let mut rng = seeded_rng(cfg.seed, stream);
    let row = rng.gen_range(0..=s.height - side);
    let col = rng.gen_range(0..=s.width - side);
    let sq = Square::new(row, col, side);
    let noise = NoiseConfig::new(delta, rng.gen()).map_err(|e| CliError::Config(e.to_string()))?;
    let mut image =
        synthesize_squares(&[sq], s.width, s.height, &noise).map_err(CliError::input)?;
    if s.polarity == Polarity::Minority {
        image = image.with_minority_foreground();
    }
    let score = score_single(&image, &sq).map_err(CliError::input)?;
    Ok(SingleTrial {
        side,
        delta,
        seed: cfg.seed,
        trial,
        row,
        col,
        mdl_bits: score.mdl_bits,
        log10_nfa: score.log10_nfa(),
        mdl_detect: score.mdl_detects(),
        nfa_detect: score.nfa_detects(eps),
    })
}

/// Every (side, delta, trial) combination with a random square position,
/// scored at the true location. Each trial draws from its own RNG stream, so
/// results do not depend on thread scheduling.
pub fn run_sweep_single(cfg: &ExperimentConfig) -> Result<SingleSweep, CliError> {
    cfg.validate_single()?;
    let eps = cfg.epsilon()?;
    let s = &cfg.single;
    let grid: Vec<(usize, f64)> = s
        .sides
        .iter()
        .flat_map(|&side| s.deltas.iter().map(move |&d| (side, d)))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|c| (0..s.seeds).map(move |t| (c, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (side, delta) = grid[c];
            run_trial(cfg, eps, side, delta, c as u64 * s.seeds + t, t)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cells = trials
        .chunks(s.seeds as usize)
        .map(|chunk| {
            let n = chunk.len() as f64;
            SweepCell {
                side: chunk[0].side,
                delta: chunk[0].delta,
                seed: cfg.seed,
                trials: chunk.len() as u64,
                mdl_rate: chunk.iter().filter(|t| t.mdl_detect).count() as f64 / n,
                nfa_rate: chunk.iter().filter(|t| t.nfa_detect).count() as f64 / n,
            }
        })
        .collect();
    Ok(SingleSweep { trials, cells })
}

/// Summary statistics for comparing the two detection-rate maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSummary {
    /// Cells with side below 70 whose majority decisions coincide, as a fraction.
    pub small_agreement: f64,
    /// Cells with side below 70 where the NFA rate is at least the MDL rate, as a fraction.
    pub small_nfa_ge_mdl: f64,
    pub small_cells: usize,
    /// Cells with side above 71 and delta at most 0.2.
    pub large_cells: usize,
    pub large_max_nfa_rate: f64,
    pub large_min_mdl_rate: f64,
}

impl SingleSummary {
    pub fn from_cells(cells: &[SweepCell]) -> Self {
        let small: Vec<&SweepCell> = cells.iter().filter(|c| c.side < 70).collect();
        let large: Vec<&SweepCell> = cells
            .iter()
            .filter(|c| c.side > 71 && c.delta <= 0.2 + 1e-9)
            .collect();
        let frac = |n: usize| {
            if small.is_empty() {
                0.0
            } else {
                n as f64 / small.len() as f64
            }
        };
        Self {
            small_agreement: frac(
                small
                    .iter()
                    .filter(|c| (c.mdl_rate >= 0.5) == (c.nfa_rate >= 0.5))
                    .count(),
            ),
            small_nfa_ge_mdl: frac(small.iter().filter(|c| c.nfa_rate >= c.mdl_rate).count()),
            small_cells: small.len(),
            large_cells: large.len(),
            large_max_nfa_rate: large.iter().map(|c| c.nfa_rate).fold(0.0, f64::max),
            large_min_mdl_rate: large.iter().map(|c| c.mdl_rate).fold(1.0, f64::min),
        }
    }
}
