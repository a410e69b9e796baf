//! Line-segment candidates on gradient-orientation maps, validated by NFA and
//! by an MDL rectangle code.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{gradient_orientation, wrap_angle as wrap, GrayImage, OrientationMap, Point};
use crate::numeric::{binomial_tail_log, log_binomial, Bits, NumericError};
use crate::score::{Epsilon, Score};

#[derive(Debug, Error)]
pub enum LsdError {
    #[error(transparent)]
    Numeric(#[from] NumericError),

    #[error("invalid configuration: {0}")]
    Config(&'static str),

    #[error("rectangle endpoints coincide")]
    DegenerateRectangle,

    #[error("rectangle width {0} is below one pixel")]
    NarrowRectangle(f64),

    #[error("region of {0} pixels has a singular scatter matrix")]
    SingularRegion(usize),

    #[error("rectangle covers no pixel of the map")]
    OutsideImage,

    #[error("malformed candidate file at line {line}: {msg}")]
    CandidateFile { line: usize, msg: String },
}

/// Orientation (mod `pi`) distance test: `angle` and `lambda` are aligned
/// when the doubled-angle difference, wrapped to `[-pi, pi)`, is within `rho`.
pub fn is_aligned(angle: f64, lambda: f64, rho: f64) -> bool {
    wrap(2.0 * (angle - lambda)).abs() <= rho
}

/// A rectangle of width `w` around the segment `a`-`b`, with normal angle `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleCandidate {
    a: Point,
    b: Point,
    width: f64,
    lambda: f64,
}

impl RectangleCandidate {
    pub fn new(a: Point, b: Point, width: f64) -> Result<Self, LsdError> {
        if a == b {
            return Err(LsdError::DegenerateRectangle);
        }
        if width.is_nan() || width < 1.0 {
            return Err(LsdError::NarrowRectangle(width));
        }
        let lambda = wrap((b.y - a.y).atan2(b.x - a.x) + PI / 2.0);
        Ok(Self {
            a,
            b,
            width,
            lambda,
        })
    }

    pub fn a(&self) -> Point {
        self.a
    }

    pub fn b(&self) -> Point {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Normal angle in `[-pi, pi)`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn length(&self) -> f64 {
        (self.b.x - self.a.x).hypot(self.b.y - self.a.y)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))
    }

    /// Distance from `p` to the centre line (the infinite line through `a`, `b`).
    pub fn line_distance(&self, p: Point) -> f64 {
        let (dx, dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        ((p.x - self.a.x) * dy - (p.y - self.a.y) * dx).abs() / self.length()
    }

    fn contains(&self, p: Point) -> bool {
        let c = self.center();
        let len = self.length();
        let (ux, uy) = ((self.b.x - self.a.x) / len, (self.b.y - self.a.y) / len);
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let along = dx * ux + dy * uy;
        let perp = -dx * uy + dy * ux;
        const TOL: f64 = 1e-9;
        along.abs() <= 0.5 * len + TOL && perp.abs() <= 0.5 * self.width + TOL
    }

    fn corners(&self) -> [Point; 4] {
        let len = self.length();
        let (nx, ny) = (-(self.b.y - self.a.y) / len, (self.b.x - self.a.x) / len);
        let h = 0.5 * self.width;
        [
            Point::new(self.a.x + h * nx, self.a.y + h * ny),
            Point::new(self.a.x - h * nx, self.a.y - h * ny),
            Point::new(self.b.x + h * nx, self.b.y + h * ny),
            Point::new(self.b.x - h * nx, self.b.y - h * ny),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsdConfig {
    rho: f64,
    gamma: f64,
    epsilon: Epsilon,
    tau: f64,
}

impl LsdConfig {
    pub fn new(rho: f64, gamma: f64, epsilon: Epsilon, tau: f64) -> Result<Self, LsdError> {
        if !(rho > 0.0 && rho < PI) {
            return Err(LsdError::Config("rho must lie in (0, pi)"));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(LsdError::Config("gamma must be at least 1"));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(LsdError::Config("tau must be non-negative"));
        }
        Ok(Self {
            rho,
            gamma,
            epsilon,
            tau,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Probability that a pixel is aligned under isotropic noise.
    pub fn theta(&self) -> f64 {
        self.rho / PI
    }
}

impl Default for LsdConfig {
    fn default() -> Self {
        Self {
            rho: PI / 8.0,
            gamma: 1.0,
            epsilon: Epsilon::default(),
            tau: crate::imaging::DEFAULT_GRADIENT_THRESHOLD,
        }
    }
}

/// Pixels in a rectangle (`n_r`), aligned ones (`k_r`) and undefined ones (`u_r`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentCounts {
    pub n_r: u64,
    pub k_r: u64,
    pub u_r: u64,
}

impl AlignmentCounts {
    pub fn new(n_r: u64, k_r: u64, u_r: u64) -> Option<Self> {
        (u_r <= n_r && k_r <= n_r - u_r).then_some(Self { n_r, k_r, u_r })
    }
}

/// Fits a rectangle to a pixel region: magnitude-weighted centroid, principal
/// axis of the weighted scatter, and extents covering every pixel.
pub fn fit_rectangle(
    region: &[(usize, usize)],
    map: &OrientationMap,
) -> Result<RectangleCandidate, LsdError> {
    let weight = |&(x, y): &(usize, usize)| map.magnitude(x, y).max(f64::MIN_POSITIVE);
    let total: f64 = region.iter().map(weight).sum();
    if region.len() < 2 {
        return Err(LsdError::SingularRegion(region.len()));
    }
    let cx = region.iter().map(|p| weight(p) * p.0 as f64).sum::<f64>() / total;
    let cy = region.iter().map(|p| weight(p) * p.1 as f64).sum::<f64>() / total;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in region {
        let (dx, dy) = (p.0 as f64 - cx, p.1 as f64 - cy);
        let w = weight(p);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    if sxx + syy <= 0.0 {
        return Err(LsdError::SingularRegion(region.len()));
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (ux, uy) = (phi.cos(), phi.sin());
    let (mut lmin, mut lmax, mut wmin, mut wmax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in region {
        let (dx, dy) = (p.0 as f64 - cx, p.1 as f64 - cy);
        let l = dx * ux + dy * uy;
        let w = -dx * uy + dy * ux;
        lmin = lmin.min(l);
        lmax = lmax.max(l);
        wmin = wmin.min(w);
        wmax = wmax.max(w);
    }
    let wmid = 0.5 * (wmin + wmax);
    let at = |l: f64| Point::new(cx + l * ux - wmid * uy, cy + l * uy + wmid * ux);
    RectangleCandidate::new(at(lmin - 0.5), at(lmax + 0.5), wmax - wmin + 1.0)
}

/// Counts the map pixels whose centres lie in `rect`.
pub fn count_aligned(
    rect: &RectangleCandidate,
    map: &OrientationMap,
    rho: f64,
) -> Result<AlignmentCounts, LsdError> {
    let cs = rect.corners();
    let lo = |f: fn(&Point) -> f64| cs.iter().map(f).fold(f64::INFINITY, f64::min);
    let hi = |f: fn(&Point) -> f64| cs.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = (map.width() as f64, map.height() as f64);
    let x0 = lo(|p| p.x).ceil().max(0.0);
    let x1 = hi(|p| p.x).floor().min(w - 1.0);
    let y0 = lo(|p| p.y).ceil().max(0.0);
    let y1 = hi(|p| p.y).floor().min(h - 1.0);
    let (mut n, mut k, mut u) = (0, 0, 0);
    if x0 <= x1 && y0 <= y1 {
        for y in y0 as usize..=y1 as usize {
            for x in x0 as usize..=x1 as usize {
                if !rect.contains(Point::new(x as f64, y as f64)) {
                    continue;
                }
                n += 1;
                match map.angle(x, y) {
                    None => u += 1,
                    Some(a) if is_aligned(a, rect.lambda(), rho) => k += 1,
                    Some(_) => {}
                }
            }
        }
    }
    if n == 0 {
        return Err(LsdError::OutsideImage);
    }
    Ok(AlignmentCounts {
        n_r: n,
        k_r: k,
        u_r: u,
    })
}

/// `log2 NFA = 2.5 log2 n + log2 gamma + log2 B(n_r, k_r, theta)`.
pub fn nfa_rect(n_image: u64, counts: AlignmentCounts, cfg: &LsdConfig) -> Result<Bits, LsdError> {
    Ok(2.5 * (n_image as f64).log2()
        + cfg.gamma().log2()
        + binomial_tail_log(counts.n_r, counts.k_r, cfg.theta())?)
}

/// `2.5 log2 n + log2 n_r + log2 C(n_r, k_r) + k_r log2 theta`.
pub fn mdl_rect(n_image: u64, counts: AlignmentCounts, cfg: &LsdConfig) -> Result<Bits, LsdError> {
    if counts.n_r == 0 {
        return Err(NumericError::EmptyRegion.into());
    }
    Ok(2.5 * (n_image as f64).log2()
        + (counts.n_r as f64).log2()
        + log_binomial(counts.n_r, counts.k_r)?
        + counts.k_r as f64 * cfg.theta().log2())
}

/// Greedy region growing from the strongest gradients; each pixel joins at
/// most one region.
pub fn region_grow_candidates(map: &OrientationMap, cfg: &LsdConfig) -> Vec<RectangleCandidate> {
    let (w, h) = (map.width(), map.height());
    let mut seeds: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| map.is_defined(x, y))
        .collect();
    seeds.sort_by(|p, q| map.magnitude(q.0, q.1).total_cmp(&map.magnitude(p.0, p.1)));

    let mut used = vec![false; w * h];
    let mut out = Vec::new();
    for &(sx, sy) in &seeds {
        if used[sy * w + sx] {
            continue;
        }
        used[sy * w + sx] = true;
        let a0 = map.angle(sx, sy).expect("seed is defined");
        let (mut sc, mut ss) = ((2.0 * a0).cos(), (2.0 * a0).sin());
        let mut mean = a0;
        let mut region = vec![(sx, sy)];
        let mut i = 0;
        while i < region.len() {
            let (px, py) = region[i];
            i += 1;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (Some(x), Some(y)) = (px.checked_add_signed(dx), py.checked_add_signed(dy))
                    else {
                        continue;
                    };
                    if x >= w || y >= h || used[y * w + x] {
                        continue;
                    }
                    let Some(a) = map.angle(x, y) else {
                        continue;
                    };
                    if is_aligned(a, mean, cfg.rho()) {
                        used[y * w + x] = true;
                        region.push((x, y));
                        sc += (2.0 * a).cos();
                        ss += (2.0 * a).sin();
                        mean = 0.5 * ss.atan2(sc);
                    }
                }
            }
        }
        if let Ok(rect) = fit_rectangle(&region, map) {
            out.push(rect);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentDetection {
    pub rect: RectangleCandidate,
    pub counts: AlignmentCounts,
    pub score: Score,
    pub nfa_keep: bool,
    pub mdl_keep: bool,
}

/// Scores a fixed candidate set with both criteria.
pub fn score_candidates(
    map: &OrientationMap,
    candidates: &[RectangleCandidate],
    cfg: &LsdConfig,
) -> Vec<SegmentDetection> {
    let n_image = map.len() as u64;
    candidates
        .par_iter()
        .filter_map(|rect| {
            let counts = count_aligned(rect, map, cfg.rho()).ok()?;
            let score = Score::new(
                mdl_rect(n_image, counts, cfg).ok()?,
                nfa_rect(n_image, counts, cfg).ok()?,
            );
            Some(SegmentDetection {
                rect: *rect,
                counts,
                score,
                nfa_keep: score.nfa_detects(cfg.epsilon()),
                mdl_keep: score.mdl_detects(),
            })
        })
        .collect()
}

/// Gradient map, region growing, then both criteria on every candidate.
pub fn detect_segments(image: &GrayImage, cfg: &LsdConfig) -> Vec<SegmentDetection> {
    let map = gradient_orientation(image, cfg.tau());
    detect_on_map(&map, cfg)
}

pub fn detect_on_map(map: &OrientationMap, cfg: &LsdConfig) -> Vec<SegmentDetection> {
    score_candidates(map, &region_grow_candidates(map, cfg), cfg)
}

/// Parses one `ax ay bx by w` rectangle per line; `#` starts a comment.
pub fn parse_candidates(text: &str) -> Result<Vec<RectangleCandidate>, LsdError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| LsdError::CandidateFile { line: i + 1, msg };
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 5 {
            return Err(err(format!("expected 5 fields, got {}", vals.len())));
        }
        let rect = RectangleCandidate::new(
            Point::new(vals[0], vals[1]),
            Point::new(vals[2], vals[3]),
            vals[4],
        )
        .map_err(|e| err(e.to_string()))?;
        out.push(rect);
    }
    Ok(out)
}

/// One line per detection: `ax ay bx by w log10_nfa mdl_bits nfa_keep mdl_keep`.
pub fn format_segments(detections: &[SegmentDetection]) -> String {
    let mut s = String::from("# ax ay bx by w log10_nfa mdl_bits nfa_keep mdl_keep\n");
    for d in detections {
        let (a, b) = (d.rect.a(), d.rect.b());
        s.push_str(&format!(
            "{:.3} {:.3} {:.3} {:.3} {:.3} {:.6} {:.6} {} {}\n",
            a.x,
            a.y,
            b.x,
            b.y,
            d.rect.width(),
            d.score.log10_nfa(),
            d.score.mdl_bits,
            u8::from(d.nfa_keep),
            u8::from(d.mdl_keep)
        ));
    }
    s
}
