//! Segment detection, the `(n_r, k_r)` boundary table and the false-alarm check.

use std::f64::consts::PI;

use mdlac::imaging::io::read_gray;
use mdlac::imaging::{gradient_orientation, seeded_rng, GrayImage, OrientationMap};
use mdlac::lsd::{
    detect_on_map, mdl_rect, nfa_rect, parse_candidates, score_candidates, AlignmentCounts,
    LsdConfig, SegmentDetection,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// A bright wall with a grid of dark windows, soft edges and light noise.
pub fn facade(size: usize, seed: u64) -> GrayImage {
    let mut rng = seeded_rng(seed, 5);
    let s = size as f64 / 512.0;
    let soft = |v: f64, lo: f64, hi: f64| ((v - lo + 1.5).min(hi - v + 1.5) / 3.0).clamp(0.0, 1.0);
    GrayImage::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let wall = soft(fx, 40.0 * s, 471.0 * s).min(soft(fy, 30.0 * s, 489.0 * s));
        let (cx, cy) = (
            (fx - 40.0 * s).rem_euclid(72.0 * s),
            (fy - 30.0 * s).rem_euclid(92.0 * s),
        );
        let window = wall
            .min(soft(cx, 18.0 * s, 53.0 * s))
            .min(soft(cy, 20.0 * s, 71.0 * s));
        let base = 110.0 + 80.0 * wall - 130.0 * window;
        (base + rng.gen_range(-1.5..1.5)).round().clamp(0.0, 255.0) as u8
    })
    .expect("facade size is positive")
}

/// Every pixel defined, with an isotropic orientation.
pub fn random_orientation_map(size: usize, seed: u64) -> OrientationMap {
    let mut rng = seeded_rng(seed, 3);
    let cells = (0..size * size)
        .map(|_| Some((rng.gen_range(-PI..PI), rng.gen_range(1.0..100.0))))
        .collect();
    OrientationMap::from_parts(size, size, cells).expect("cell count matches")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n_r: u64,
    pub k_r: u64,
    pub log10_nfa: f64,
    pub mdl_bits: f64,
    pub nfa_detect: bool,
    pub mdl_detect: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub n_r: u64,
    pub nfa_min_k: Option<u64>,
    pub mdl_min_k: Option<u64>,
}

/// Both criteria over every `(n_r, k_r)` with `1 <= n_r <= max_nr`.
pub fn boundary_table(
    n_image: u64,
    max_nr: u64,
    cfg: &LsdConfig,
) -> Result<Vec<TableRow>, CliError> {
    let mut rows = Vec::new();
    for n_r in 1..=max_nr {
        for k_r in 0..=n_r {
            let c = AlignmentCounts::new(n_r, k_r, 0).expect("k_r <= n_r");
            let nfa = nfa_rect(n_image, c, cfg).map_err(CliError::input)?;
            let mdl = mdl_rect(n_image, c, cfg).map_err(CliError::input)?;
            rows.push(TableRow {
                n_r,
                k_r,
                log10_nfa: nfa * std::f64::consts::LOG10_2,
                mdl_bits: mdl,
                nfa_detect: nfa <= cfg.epsilon().log2(),
                mdl_detect: mdl < 0.0,
            });
        }
    }
    Ok(rows)
}

/// Smallest detected `k_r` per `n_r`.
pub fn boundaries(table: &[TableRow]) -> Vec<BoundaryRow> {
    let mut out: Vec<BoundaryRow> = Vec::new();
    for r in table {
        if out.last().is_none_or(|b| b.n_r != r.n_r) {
            out.push(BoundaryRow {
                n_r: r.n_r,
                nfa_min_k: None,
                mdl_min_k: None,
            });
        }
        let b = out.last_mut().expect("pushed above");
        if r.nfa_detect && b.nfa_min_k.is_none() {
            b.nfa_min_k = Some(r.k_r);
        }
        if r.mdl_detect && b.mdl_min_k.is_none() {
            b.mdl_min_k = Some(r.k_r);
        }
    }
    out
}

/// NFA detections per random orientation map.
pub fn false_alarms(maps: u64, size: usize, seed: u64, cfg: &LsdConfig) -> Vec<usize> {
    (0..maps)
        .into_par_iter()
        .map(|i| {
            let map = random_orientation_map(size, seed.wrapping_mul(1_000_003).wrapping_add(i));
            detect_on_map(&map, cfg)
                .iter()
                .filter(|d| d.nfa_keep)
                .count()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentRow {
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
    pub width: f64,
    pub n_r: u64,
    pub k_r: u64,
    pub log10_nfa: f64,
    pub mdl_bits: f64,
    pub nfa_keep: bool,
    pub mdl_keep: bool,
}

impl From<&SegmentDetection> for SegmentRow {
    fn from(d: &SegmentDetection) -> Self {
        Self {
            ax: d.rect.a().x,
            ay: d.rect.a().y,
            bx: d.rect.b().x,
            by: d.rect.b().y,
            width: d.rect.width(),
            n_r: d.counts.n_r,
            k_r: d.counts.k_r,
            log10_nfa: d.score.log10_nfa(),
            mdl_bits: d.score.mdl_bits,
            nfa_keep: d.nfa_keep,
            mdl_keep: d.mdl_keep,
        }
    }
}

/// Fraction of kept candidates (by either criterion) kept by both.
pub fn kept_agreement(dets: &[SegmentDetection]) -> f64 {
    let either = dets.iter().filter(|d| d.nfa_keep || d.mdl_keep).count();
    let both = dets.iter().filter(|d| d.nfa_keep && d.mdl_keep).count();
    if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    }
}

/// Loads or synthesizes the grayscale input, then scores region-grown or
/// file-supplied candidates with both criteria.
pub fn detect(cfg: &ExperimentConfig) -> Result<(GrayImage, Vec<SegmentDetection>), CliError> {
    let lsd = cfg.lsd_config()?;
    let image = match &cfg.lsd.image {
        Some(path) => {
            read_gray(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => facade(512, cfg.seed),
    };
    let map = gradient_orientation(&image, lsd.tau());
    let dets = match &cfg.lsd.candidates {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let rects = parse_candidates(&text).map_err(CliError::input)?;
            score_candidates(&map, &rects, &lsd)
        }
        None => detect_on_map(&map, &lsd),
    };
    Ok((image, dets))
}
