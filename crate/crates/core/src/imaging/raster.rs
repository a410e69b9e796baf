//! Pixel-center even-odd rasterization of closed polygons.
//!
//! A pixel belongs to the polygon when its center is strictly inside under the
//! even-odd rule or lies on the boundary. Boundary membership makes the
//! vertices themselves part of the region.

use super::{ImagingError, Point, RegionMask};

const EPS: f64 = 1e-9;

/// Inclusive run of member pixels `x0..=x1` on row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSpan {
    pub y: usize,
    pub x0: usize,
    pub x1: usize,
}

/// Shoelace signed area (positive for counter-clockwise in `x`-right,
/// `y`-up axes).
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        * 0.5
}

fn validate(vertices: &[Point], width: usize, height: usize) -> Result<(), ImagingError> {
    if vertices.len() < 3 {
        return Err(ImagingError::TooFewVertices(vertices.len()));
    }
    let (w, h) = (width as f64, height as f64);
    for v in vertices {
        if !(v.x.is_finite() && v.y.is_finite())
            || v.x < -EPS
            || v.y < -EPS
            || v.x > w - 1.0 + EPS
            || v.y > h - 1.0 + EPS
        {
            return Err(ImagingError::VertexOutOfBounds(v.x, v.y));
        }
    }
    if signed_area(vertices).abs() < EPS {
        return Err(ImagingError::DegeneratePolygon);
    }
    Ok(())
}

fn push_interval(out: &mut Vec<(i64, i64)>, lo: f64, hi: f64) {
    let (a, b) = ((lo - EPS).ceil() as i64, (hi + EPS).floor() as i64);
    if a <= b {
        out.push((a, b));
    }
}

/// Member pixels of the polygon as merged row spans, clipped to the image.
pub fn polygon_row_spans(
    vertices: &[Point],
    width: usize,
    height: usize,
) -> Result<Vec<RowSpan>, ImagingError> {
    validate(vertices, width, height)?;
    let nv = vertices.len();
    let ymin = vertices.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    let ymax = vertices
        .iter()
        .map(|v| v.y)
        .fold(f64::NEG_INFINITY, f64::max);
    let y_lo = ((ymin - EPS).ceil().max(0.0)) as usize;
    let y_hi = ((ymax + EPS).floor() as usize).min(height - 1);

    let mut spans = Vec::new();
    let mut crossings = Vec::with_capacity(nv);
    let mut intervals = Vec::with_capacity(nv);
    for y in y_lo..=y_hi {
        let yf = y as f64;
        crossings.clear();
        intervals.clear();
        for i in 0..nv {
            let (p, q) = (vertices[i], vertices[(i + 1) % nv]);
            if (p.y - q.y).abs() < EPS {
                if (p.y - yf).abs() < EPS {
                    push_interval(&mut intervals, p.x.min(q.x), p.x.max(q.x));
                }
                continue;
            }
            let x = p.x + (yf - p.y) * (q.x - p.x) / (q.y - p.y);
            // half-open rule: each edge owns its lower endpoint only
            if (p.y <= yf) != (q.y <= yf) {
                crossings.push(x);
            }
            let (lo, hi) = (p.y.min(q.y), p.y.max(q.y));
            if yf >= lo - EPS && yf <= hi + EPS && (x - x.round()).abs() < EPS {
                push_interval(&mut intervals, x, x);
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for pair in crossings.chunks_exact(2) {
            push_interval(&mut intervals, pair[0], pair[1]);
        }
        intervals.sort_unstable();
        let mut current: Option<(i64, i64)> = None;
        let max_x = width as i64 - 1;
        let mut flush = |iv: (i64, i64)| {
            let (a, b) = (iv.0.max(0), iv.1.min(max_x));
            if a <= b {
                spans.push(RowSpan {
                    y,
                    x0: a as usize,
                    x1: b as usize,
                });
            }
        };
        for &(a, b) in intervals.iter() {
            current = match current {
                Some((ca, cb)) if a <= cb + 1 => Some((ca, cb.max(b))),
                Some(iv) => {
                    flush(iv);
                    Some((a, b))
                }
                None => Some((a, b)),
            };
        }
        if let Some(iv) = current {
            flush(iv);
        }
    }
    Ok(spans)
}

/// Rasterizes a closed polygon into a mask.
pub fn rasterize_polygon(
    vertices: &[Point],
    width: usize,
    height: usize,
) -> Result<RegionMask, ImagingError> {
    let spans = polygon_row_spans(vertices, width, height)?;
    let mut members = vec![false; width * height];
    for s in &spans {
        members[s.y * width + s.x0..=s.y * width + s.x1].fill(true);
    }
    RegionMask::from_members(width, height, members)
}
