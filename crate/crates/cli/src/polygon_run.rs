//! Noisy synthetic shapes and the polygon simplification experiment.

use std::f64::consts::PI;

use mdlac::imaging::io::{read_binary, read_vertices};
use mdlac::imaging::{
    flip_with_probability, rasterize_polygon, seeded_rng, trace_contour, BinaryImage, Point,
};
use mdlac::polygon::{bss_full_path, bss_simplify, BssTrajectory, PolygonHypothesis};
use mdlac::score::Criterion;
use rand::Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ShapeConfig, ShapeKind};
use crate::error::CliError;

/// Noise-free outline of a shape centred in a `size x size` canvas.
pub fn outline(kind: ShapeKind, size: usize) -> Vec<Point> {
    let c = size as f64 / 2.0;
    let r = size as f64 * 0.4;
    let polar =
        |radius: f64, angle: f64| Point::new(c + radius * angle.cos(), c + radius * angle.sin());
    match kind {
        ShapeKind::Star => (0..10)
            .map(|i| {
                let radius = if i % 2 == 0 { r } else { 0.45 * r };
                polar(radius, PI * i as f64 / 5.0 - PI / 2.0)
            })
            .collect(),
        ShapeKind::Cross => {
            let (a, b) = (0.35 * r, r);
            [
                (-a, -b),
                (a, -b),
                (a, -a),
                (b, -a),
                (b, a),
                (a, a),
                (a, b),
                (-a, b),
                (-a, a),
                (-b, a),
                (-b, -a),
                (-a, -a),
            ]
            .iter()
            .map(|&(x, y)| Point::new(c + x, c + y))
            .collect()
        }
        ShapeKind::Arrow => [
            (-1.0, -0.3),
            (0.2, -0.3),
            (0.1, -0.8),
            (1.0, 0.05),
            (0.15, 0.85),
            (0.25, 0.3),
            (-0.9, 0.35),
            (-0.6, 0.0),
        ]
        .iter()
        .map(|&(x, y)| Point::new(c + r * x, c + r * y))
        .collect(),
        ShapeKind::Blob => (0..48)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 48.0;
                polar(
                    r * (0.8 + 0.15 * (3.0 * t).sin() + 0.06 * (5.0 * t + 1.0).cos()),
                    t,
                )
            })
            .collect(),
    }
}

/// `count` points evenly spaced by arc length along a closed outline.
pub fn resample(outline: &[Point], count: usize) -> Vec<Point> {
    let n = outline.len();
    let seg = |i: usize| {
        let (p, q) = (outline[i], outline[(i + 1) % n]);
        (q.x - p.x).hypot(q.y - p.y)
    };
    let total: f64 = (0..n).map(seg).sum();
    let mut out = Vec::with_capacity(count);
    let (mut i, mut start) = (0, 0.0);
    for j in 0..count {
        let target = total * j as f64 / count as f64;
        while start + seg(i) < target {
            start += seg(i);
            i += 1;
        }
        let (p, q) = (outline[i], outline[(i + 1) % n]);
        let t = if seg(i) > 0.0 {
            (target - start) / seg(i)
        } else {
            0.0
        };
        out.push(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeInstance {
    pub image: BinaryImage,
    pub outline: Vec<Point>,
    pub initial: PolygonHypothesis,
}

/// Renders the shape, applies flip noise and builds an over-sampled,
/// jittered initial polygon.
pub fn synthesize_shape(shape: &ShapeConfig, seed: u64) -> Result<ShapeInstance, CliError> {
    let truth = outline(shape.kind, shape.size);
    let mask = rasterize_polygon(&truth, shape.size, shape.size).map_err(CliError::input)?;
    let clean = BinaryImage::from_pixels(
        shape.size,
        shape.size,
        mask.members().iter().map(|&m| m as u8).collect(),
    )
    .map_err(CliError::input)?;
    let mut rng = seeded_rng(seed, 7);
    let image = flip_with_probability(&clean, shape.delta, &mut rng);
    let base = resample(&truth, shape.initial_vertices);
    for _ in 0..64 {
        let jittered: Vec<Point> = base
            .iter()
            .map(|p| {
                let dx = if shape.jitter > 0.0 {
                    rng.gen_range(-shape.jitter..=shape.jitter)
                } else {
                    0.0
                };
                let dy = if shape.jitter > 0.0 {
                    rng.gen_range(-shape.jitter..=shape.jitter)
                } else {
                    0.0
                };
                Point::new(p.x + dx, p.y + dy)
            })
            .collect();
        if let Ok(initial) = PolygonHypothesis::new(jittered) {
            return Ok(ShapeInstance {
                image,
                outline: truth,
                initial,
            });
        }
    }
    Err(CliError::Input(
        "could not build a simple initial polygon".into(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonOutcome {
    pub criterion: Criterion,
    /// Strict-improvement greedy run.
    pub greedy: BssTrajectory,
    /// Greedy removals continued down to a triangle.
    pub full: BssTrajectory,
}

impl PolygonOutcome {
    pub fn minimum_vertices(&self) -> usize {
        self.full.chosen_step().polygon.vertex_count()
    }

    /// Whether the full-path minimum lies strictly between the initial polygon
    /// and the final triangle.
    pub fn minimum_is_interior(&self) -> bool {
        self.full.chosen > 0 && self.full.chosen + 1 < self.full.steps.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub seed: u64,
    pub criterion: String,
    pub step: usize,
    pub vertex_count: usize,
    pub removed: Option<usize>,
    pub mdl_bits: f64,
    pub log10_nfa: f64,
}

pub fn trajectory_rows(t: &BssTrajectory, seed: u64) -> Vec<TrajectoryRow> {
    t.steps
        .iter()
        .enumerate()
        .map(|(i, s)| TrajectoryRow {
            seed,
            criterion: t.criterion.to_string(),
            step: i,
            vertex_count: s.polygon.vertex_count(),
            removed: s.removed,
            mdl_bits: s.score.mdl_bits,
            log10_nfa: s.score.log10_nfa(),
        })
        .collect()
}

pub fn simplify(
    image: &BinaryImage,
    initial: &PolygonHypothesis,
    criteria: &[Criterion],
) -> Result<Vec<PolygonOutcome>, CliError> {
    criteria
        .iter()
        .map(|&criterion| {
            Ok(PolygonOutcome {
                criterion,
                greedy: bss_simplify(image, initial, criterion).map_err(CliError::input)?,
                full: bss_full_path(image, initial, criterion).map_err(CliError::input)?,
            })
        })
        .collect()
}

/// Loads or synthesizes the image and initial polygon named by the config.
pub fn polygon_inputs(
    cfg: &ExperimentConfig,
) -> Result<(BinaryImage, PolygonHypothesis), CliError> {
    cfg.validate_polygon()?;
    let p = &cfg.polygon;
    let image = match &p.image {
        Some(path) => {
            read_binary(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => {
            let shape = synthesize_shape(&p.shape, cfg.seed)?;
            if p.vertices.is_none() {
                return Ok((shape.image, shape.initial));
            }
            shape.image
        }
    };
    let vertices = match &p.vertices {
        Some(path) => {
            read_vertices(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => trace_contour(&image, p.smoothing_radius, p.max_vertices)
            .ok_or_else(|| CliError::Input("no foreground component to trace".into()))?,
    };
    let initial = PolygonHypothesis::new(vertices).map_err(CliError::input)?;
    Ok((image, initial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_keeps_outline_vertices_on_the_boundary() {
        let sq = vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 4.0),
        ];
        let r = resample(&sq, 8);
        assert_eq!(r.len(), 8);
        assert_eq!(r[2], Point::new(4.0, 0.0));
        assert_eq!(r[5], Point::new(2.0, 4.0));
    }

    #[test]
    fn shapes_are_simple_and_reproducible() {
        for kind in [
            ShapeKind::Star,
            ShapeKind::Blob,
            ShapeKind::Cross,
            ShapeKind::Arrow,
        ] {
            assert!(PolygonHypothesis::new(outline(kind, 128)).is_ok());
            let cfg = ShapeConfig {
                kind,
                ..ShapeConfig::default()
            };
            let a = synthesize_shape(&cfg, 3).unwrap();
            assert_eq!(a, synthesize_shape(&cfg, 3).unwrap());
            assert_eq!(a.initial.vertex_count(), 60);
        }
    }
}
