//! Subcommand bodies: run an experiment and write its artifacts under `cfg.out`.

use std::fs;
use std::path::Path;

use mdlac::imaging::io::{write_binary, write_gray, write_vertices};
use mdlac::imaging::{seeded_rng, synthesize_squares, BinaryImage, NoiseConfig, Square};
use mdlac::lsd::format_segments;
use mdlac::score::Criterion;
use mdlac::square_detect::FourSquareLayout;
use rand::Rng;
use serde::Serialize;

use crate::config::{Axis, ExperimentConfig, ShapeKind};
use crate::error::CliError;
use crate::{equiv_run, lsd_run, polygon_run, sweep_multi, sweep_single};

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out)?;
    Ok(&cfg.out)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| format!("{v}"))
}

pub fn sweep_single(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sweep = sweep_single::run_sweep_single(cfg)?;
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("single_trials.csv"), &sweep.trials)?;
    write_csv(&dir.join("single_rates.csv"), &sweep.cells)?;
    let s = sweep_single::SingleSummary::from_cells(&sweep.cells);
    fs::write(
        dir.join("single_summary.json"),
        serde_json::to_string_pretty(&s)?,
    )?;
    Ok(format!(
        "cells={} side<70: agreement={:.3} nfa>=mdl={:.3}; side>71 delta<=0.2: max nfa rate={:.3} min mdl rate={:.3}",
        sweep.cells.len(),
        s.small_agreement,
        s.small_nfa_ge_mdl,
        s.large_max_nfa_rate,
        s.large_min_mdl_rate
    ))
}

pub fn sweep_multi(cfg: &ExperimentConfig, axis: Axis) -> Result<String, CliError> {
    let sweep = sweep_multi::run_sweep_multi(cfg, axis)?;
    let dir = out_dir(cfg)?;
    let tag = match axis {
        Axis::Noise => "noise",
        Axis::Margin => "margin",
    };
    write_csv(&dir.join(format!("multi_{tag}_trials.csv")), &sweep.trials)?;
    write_csv(&dir.join(format!("multi_{tag}_cells.csv")), &sweep.cells)?;
    write_csv(
        &dir.join(format!("multi_{tag}_thresholds.csv")),
        &sweep.thresholds,
    )?;
    let lines: Vec<String> = sweep
        .thresholds
        .iter()
        .map(|t| match axis {
            Axis::Noise => format!(
                "four-square threshold: nfa={} mdl={}",
                fmt_opt(t.nfa),
                fmt_opt(t.mdl)
            ),
            Axis::Margin => format!(
                "delta={}: margin threshold nfa={} mdl={}",
                fmt_opt(t.delta),
                fmt_opt(t.nfa),
                fmt_opt(t.mdl)
            ),
        })
        .collect();
    Ok(lines.join("\n"))
}

pub fn polygon(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let (image, initial) = polygon_run::polygon_inputs(cfg)?;
    let outcomes = polygon_run::simplify(&image, &initial, &cfg.criterion.criteria())?;
    let dir = out_dir(cfg)?;
    if cfg.polygon.render {
        write_binary(dir.join("polygon_image.pgm"), &image).map_err(CliError::input)?;
    }
    write_vertices(dir.join("polygon_initial.txt"), initial.vertices()).map_err(CliError::input)?;
    let mut lines = vec![format!("initial vertices: {}", initial.vertex_count())];
    for o in &outcomes {
        let name = o.criterion.to_string();
        write_csv(
            &dir.join(format!("polygon_trajectory_{name}.csv")),
            &polygon_run::trajectory_rows(&o.full, cfg.seed),
        )?;
        write_vertices(
            dir.join(format!("polygon_chosen_{name}.txt")),
            o.greedy.chosen_step().polygon.vertices(),
        )
        .map_err(CliError::input)?;
        write_vertices(
            dir.join(format!("polygon_minimum_{name}.txt")),
            o.full.chosen_step().polygon.vertices(),
        )
        .map_err(CliError::input)?;
        lines.push(format!(
            "{name}: greedy stop at {} vertices, path minimum at {} vertices",
            o.greedy.chosen_step().polygon.vertex_count(),
            o.minimum_vertices()
        ));
    }
    Ok(lines.join("\n"))
}

pub fn lsd(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let lsd_cfg = cfg.lsd_config()?;
    let (image, dets) = lsd_run::detect(cfg)?;
    let dir = out_dir(cfg)?;
    if cfg.lsd.render && cfg.lsd.image.is_none() {
        write_gray(dir.join("lsd_image.pgm"), &image).map_err(CliError::input)?;
    }
    let selected: Vec<_> = dets
        .iter()
        .filter(|d| match cfg.criterion {
            crate::config::CriterionChoice::Mdl => d.mdl_keep,
            crate::config::CriterionChoice::Nfa => d.nfa_keep,
            crate::config::CriterionChoice::Both => true,
        })
        .copied()
        .collect();
    fs::write(dir.join("lsd_segments.txt"), format_segments(&selected))?;
    let rows: Vec<lsd_run::SegmentRow> = dets.iter().map(Into::into).collect();
    write_csv(&dir.join("lsd_candidates.csv"), &rows)?;
    let table =
        lsd_run::boundary_table(cfg.lsd.table_image_pixels, cfg.lsd.table_max_nr, &lsd_cfg)?;
    write_csv(&dir.join("lsd_table.csv"), &table)?;
    write_csv(&dir.join("lsd_boundary.csv"), &lsd_run::boundaries(&table))?;
    let mut lines = vec![format!(
        "candidates={} nfa_kept={} mdl_kept={} agreement={:.3}",
        dets.len(),
        dets.iter().filter(|d| d.nfa_keep).count(),
        dets.iter().filter(|d| d.mdl_keep).count(),
        lsd_run::kept_agreement(&dets)
    )];
    if cfg.lsd.h0_maps > 0 {
        let fa = lsd_run::false_alarms(cfg.lsd.h0_maps, cfg.lsd.h0_size, cfg.seed, &lsd_cfg);
        let rows: Vec<(u64, usize)> = fa.iter().enumerate().map(|(i, &c)| (i as u64, c)).collect();
        let mut w = csv::Writer::from_path(dir.join("lsd_false_alarms.csv"))?;
        w.write_record(["map", "nfa_detections"])?;
        for (i, c) in rows {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush()?;
        let mean = fa.iter().sum::<usize>() as f64 / fa.len() as f64;
        lines.push(format!(
            "false alarms over {} random maps: mean {mean:.3}",
            fa.len()
        ));
    }
    Ok(lines.join("\n"))
}

/// Writes the report; any mismatch is returned as an error after the report
/// is on disk.
pub fn equiv(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let reports = equiv_run::run_equivalence(&cfg.equiv, cfg.seed)?;
    let dir = out_dir(cfg)?;
    let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    fs::write(dir.join("equivalence_report.txt"), &text)?;
    let total: u64 = reports.iter().map(|r| r.total_configurations()).sum();
    let boundary: u64 = reports.iter().map(|r| r.boundary_cases()).sum();
    let mismatches = equiv_run::total_mismatches(&reports);
    if mismatches > 0 {
        return Err(CliError::EquivalenceViolation(mismatches));
    }
    Ok(format!(
        "families={} configurations={total} boundary_cases={boundary} mismatches=0",
        reports.len()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    Square,
    FourSquares,
    Shape,
    Facade,
    Noise,
}

/// Writes one synthetic test image (and the initial polygon for shapes).
pub fn gen(
    cfg: &ExperimentConfig,
    kind: GenKind,
    delta: f64,
    path: &Path,
) -> Result<String, CliError> {
    NoiseConfig::new(delta, 0).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = seeded_rng(cfg.seed, 11);
    let noisy = |layout: &[Square],
                 w: usize,
                 h: usize,
                 rng: &mut dyn rand::RngCore|
     -> Result<BinaryImage, CliError> {
        let noise =
            NoiseConfig::new(delta, rng.gen()).map_err(|e| CliError::Config(e.to_string()))?;
        synthesize_squares(layout, w, h, &noise).map_err(CliError::input)
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let msg = match kind {
        GenKind::Square => {
            let s = &cfg.single;
            let side = *s
                .sides
                .first()
                .ok_or_else(|| CliError::Config("single.sides is empty".into()))?;
            if side == 0 || side > s.width.min(s.height) {
                return Err(CliError::Config(format!("side {side} does not fit")));
            }
            let sq = Square::new(
                rng.gen_range(0..=s.height - side),
                rng.gen_range(0..=s.width - side),
                side,
            );
            write_binary(path, &noisy(&[sq], s.width, s.height, &mut rng)?)
                .map_err(|e| io_err(path, e))?;
            format!("square row={} col={} side={}", sq.row, sq.col, sq.side)
        }
        GenKind::FourSquares => {
            let m = &cfg.multi;
            let layout = FourSquareLayout::centred(m.canvas, m.noise.outer, m.noise.margin)
                .ok_or_else(|| CliError::Config("multi.noise layout does not fit".into()))?;
            write_binary(path, &noisy(&layout.small, m.canvas, m.canvas, &mut rng)?)
                .map_err(|e| io_err(path, e))?;
            format!("four squares of side {}", layout.small[0].side)
        }
        GenKind::Shape => {
            let mut shape = cfg.polygon.shape.clone();
            shape.delta = delta;
            let inst = polygon_run::synthesize_shape(&shape, cfg.seed)?;
            write_binary(path, &inst.image).map_err(|e| io_err(path, e))?;
            let vpath = path.with_extension("txt");
            write_vertices(&vpath, inst.initial.vertices()).map_err(|e| io_err(&vpath, e))?;
            let name = match shape.kind {
                ShapeKind::Star => "star",
                ShapeKind::Blob => "blob",
                ShapeKind::Cross => "cross",
                ShapeKind::Arrow => "arrow",
            };
            format!(
                "{name} with {} initial vertices in {}",
                inst.initial.vertex_count(),
                vpath.display()
            )
        }
        GenKind::Facade => {
            write_gray(path, &lsd_run::facade(512, cfg.seed)).map_err(|e| io_err(path, e))?;
            "512x512 facade".into()
        }
        GenKind::Noise => {
            let s = &cfg.single;
            write_binary(path, &noisy(&[], s.width, s.height, &mut rng)?)
                .map_err(|e| io_err(path, e))?;
            format!("{}x{} pure noise", s.width, s.height)
        }
    };
    Ok(msg)
}

/// Relative difference `|a - b| / max(a, b)`.
pub fn relative_gap(a: usize, b: usize) -> f64 {
    let m = a.max(b);
    if m == 0 {
        0.0
    } else {
        a.abs_diff(b) as f64 / m as f64
    }
}

/// Both chosen polygons of a run, for callers that only need vertex counts.
pub fn chosen_counts(outcomes: &[polygon_run::PolygonOutcome]) -> Vec<(Criterion, usize)> {
    outcomes
        .iter()
        .map(|o| (o.criterion, o.minimum_vertices()))
        .collect()
}
