//! Four-square model selection along the noise or margin axis.

use mdlac::imaging::{seeded_rng, synthesize_squares, NoiseConfig};
use mdlac::score::{Criterion, Epsilon};
use mdlac::square_detect::{select_hypothesis, FourSquareLayout};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Axis, ExperimentConfig};
use crate::error::CliError;

pub const HYPOTHESIS_NAMES: [&str; 4] = ["none", "one_small", "four_small", "large"];
pub const FOUR_SMALL: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiTrial {
    pub axis: &'static str,
    pub delta: f64,
    pub outer: usize,
    pub margin: usize,
    pub seed: u64,
    pub trial: u64,
    pub mdl_choice: &'static str,
    pub nfa_choice: &'static str,
    pub mdl_one_small: f64,
    pub mdl_four_small: f64,
    pub mdl_large: f64,
    pub log10_nfa_one_small: f64,
    pub log10_nfa_four_small: f64,
    pub log10_nfa_large: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiCell {
    pub axis: &'static str,
    pub delta: f64,
    pub outer: usize,
    pub margin: usize,
    pub seed: u64,
    pub trials: u64,
    pub mdl_majority: &'static str,
    pub nfa_majority: &'static str,
    pub mdl_four_rate: f64,
    pub nfa_four_rate: f64,
}

/// Largest grid value that passed, per criterion; `None` when no cell passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Noise level of a margin-axis row; `None` on the noise axis.
    pub delta: Option<f64>,
    pub mdl: Option<f64>,
    pub nfa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiSweep {
    pub axis: Axis,
    pub trials: Vec<MultiTrial>,
    pub cells: Vec<MultiCell>,
    /// Noise axis: one entry. Margin axis: one entry per noise level.
    pub thresholds: Vec<Thresholds>,
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::Noise => "noise",
        Axis::Margin => "margin",
    }
}

fn name(choice: Option<usize>) -> &'static str {
    HYPOTHESIS_NAMES[choice.unwrap_or(0)]
}

fn index(name: &str) -> usize {
    HYPOTHESIS_NAMES
        .iter()
        .position(|&n| n == name)
        .unwrap_or(0)
}

/// Most frequent choice; ties go to the lower hypothesis index.
pub fn majority(choices: impl Iterator<Item = &'static str>) -> &'static str {
    let mut votes = [0usize; 4];
    for c in choices {
        votes[index(c)] += 1;
    }
    let mut best = 0;
    for i in 1..4 {
        if votes[i] > votes[best] {
            best = i;
        }
    }
    HYPOTHESIS_NAMES[best]
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    cfg: &ExperimentConfig,
    eps: Epsilon,
    axis: Axis,
    delta: f64,
    outer: usize,
    margin: usize,
    stream: u64,
    trial: u64,
) -> Result<MultiTrial, CliError> {
    let canvas = cfg.multi.canvas;
    let layout = FourSquareLayout::centred(canvas, outer, margin).ok_or_else(|| {
        CliError::Config(format!("layout outer={outer} margin={margin} does not fit"))
    })?;
    let mut rng = seeded_rng(cfg.seed, stream);
    let noise = NoiseConfig::new(delta, rng.gen()).map_err(|e| CliError::Config(e.to_string()))?;
    let image =
        synthesize_squares(&layout.small, canvas, canvas, &noise).map_err(CliError::input)?;
    let hyps = layout.hypotheses();
    let mdl = select_hypothesis(&image, &hyps, Criterion::Mdl, eps).map_err(CliError::input)?;
    let nfa = select_hypothesis(&image, &hyps, Criterion::Nfa, eps).map_err(CliError::input)?;
    let l10 =
        |i: usize| nfa.scores[i].log2_nfa.unwrap_or(f64::INFINITY) * std::f64::consts::LOG10_2;
    Ok(MultiTrial {
        axis: axis_name(axis),
        delta,
        outer,
        margin,
        seed: cfg.seed,
        trial,
        mdl_choice: name(mdl.chosen),
        nfa_choice: name(nfa.chosen),
        mdl_one_small: mdl.scores[1].mdl_bits,
        mdl_four_small: mdl.scores[2].mdl_bits,
        mdl_large: mdl.scores[3].mdl_bits,
        log10_nfa_one_small: l10(1),
        log10_nfa_four_small: l10(2),
        log10_nfa_large: l10(3),
    })
}

fn largest(values: impl Iterator<Item = (f64, bool)>) -> Option<f64> {
    values
        .filter(|&(_, ok)| ok)
        .map(|(v, _)| v)
        .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// Noise axis: the threshold is the largest noise level whose majority choice
/// is the four-square hypothesis. Margin axis: per noise level, the largest
/// margin whose majority choice is any detection.
pub fn run_sweep_multi(cfg: &ExperimentConfig, axis: Axis) -> Result<MultiSweep, CliError> {
    cfg.validate_multi(axis)?;
    let eps = cfg.epsilon()?;
    let m = &cfg.multi;
    let grid: Vec<(f64, usize, usize)> = match axis {
        Axis::Noise => m
            .noise
            .deltas
            .iter()
            .map(|&d| (d, m.noise.outer, m.noise.margin))
            .collect(),
        Axis::Margin => m
            .margin
            .deltas
            .iter()
            .flat_map(|&d| {
                m.margin
                    .margins
                    .iter()
                    .map(move |&g| (d, m.margin.outer, g))
            })
            .collect(),
    };
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|c| (0..m.seeds).map(move |t| (c, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (d, outer, margin) = grid[c];
            run_trial(cfg, eps, axis, d, outer, margin, c as u64 * m.seeds + t, t)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<MultiCell> = trials
        .chunks(m.seeds as usize)
        .map(|chunk| {
            let n = chunk.len() as f64;
            MultiCell {
                axis: chunk[0].axis,
                delta: chunk[0].delta,
                outer: chunk[0].outer,
                margin: chunk[0].margin,
                seed: cfg.seed,
                trials: chunk.len() as u64,
                mdl_majority: majority(chunk.iter().map(|t| t.mdl_choice)),
                nfa_majority: majority(chunk.iter().map(|t| t.nfa_choice)),
                mdl_four_rate: chunk
                    .iter()
                    .filter(|t| index(t.mdl_choice) == FOUR_SMALL)
                    .count() as f64
                    / n,
                nfa_four_rate: chunk
                    .iter()
                    .filter(|t| index(t.nfa_choice) == FOUR_SMALL)
                    .count() as f64
                    / n,
            }
        })
        .collect();
    let thresholds = match axis {
        Axis::Noise => vec![Thresholds {
            delta: None,
            mdl: largest(
                cells
                    .iter()
                    .map(|c| (c.delta, index(c.mdl_majority) == FOUR_SMALL)),
            ),
            nfa: largest(
                cells
                    .iter()
                    .map(|c| (c.delta, index(c.nfa_majority) == FOUR_SMALL)),
            ),
        }],
        Axis::Margin => m
            .margin
            .deltas
            .iter()
            .map(|&d| {
                let row = cells.iter().filter(|c| c.delta == d);
                Thresholds {
                    delta: Some(d),
                    mdl: largest(
                        row.clone()
                            .map(|c| (c.margin as f64, c.mdl_majority != "none")),
                    ),
                    nfa: largest(row.map(|c| (c.margin as f64, c.nfa_majority != "none"))),
                }
            })
            .collect(),
    };
    Ok(MultiSweep {
        axis,
        trials,
        cells,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_ties_go_low() {
        assert_eq!(majority(["large", "none"].into_iter()), "none");
        assert_eq!(
            majority(["large", "four_small", "large"].into_iter()),
            "large"
        );
    }

    #[test]
    fn noiseless_like_four_squares_are_selected() {
        let mut cfg = ExperimentConfig::default();
        cfg.multi.seeds = 3;
        cfg.multi.noise.deltas = vec![0.05];
        let s = run_sweep_multi(&cfg, Axis::Noise).unwrap();
        assert_eq!(s.cells.len(), 1);
        assert_eq!(s.cells[0].mdl_majority, "four_small");
        assert_eq!(s.cells[0].nfa_majority, "four_small");
        assert_eq!(s.thresholds[0].nfa, Some(0.05));
        assert_eq!(s, run_sweep_multi(&cfg, Axis::Noise).unwrap());
    }

    #[test]
    fn margin_grid_shape() {
        let mut cfg = ExperimentConfig::default();
        cfg.multi.seeds = 2;
        cfg.multi.margin.margins = vec![0, 10];
        let s = run_sweep_multi(&cfg, Axis::Margin).unwrap();
        assert_eq!(s.cells.len(), 4);
        assert_eq!(s.thresholds.len(), 2);
        assert_eq!(s.trials.len(), 8);
    }
}
