//! Polygonal region hypotheses and backward stepwise vertex removal.

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{polygon_row_spans, BinaryImage, ImagingError, OnesIndex, Point};
use crate::numeric::{binomial_tail_log, log_binomial, Bits, NumericError, RegionCounts};
use crate::score::{Criterion, Epsilon, Score};

#[derive(Debug, Error)]
pub enum PolygonError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),

    #[error(transparent)]
    Numeric(#[from] NumericError),

    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),

    #[error("polygon has zero area")]
    Degenerate,

    #[error("polygon leaves no exterior pixels")]
    NoExterior,
}

/// A closed, simple polygon given by its ordered vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonHypothesis {
    vertices: Vec<Point>,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (o1, o2, o3, o4) = (
        orient(a, b, c),
        orient(a, b, d),
        orient(c, d, a),
        orient(c, d, b),
    );
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y)
        .sum::<f64>()
}

fn check_simple(v: &[Point]) -> Result<(), PolygonError> {
    let n = v.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices(n));
    }
    if area(v) == 0.0 {
        return Err(PolygonError::Degenerate);
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a == b {
            return Err(PolygonError::Degenerate);
        }
        for j in i + 1..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // neighbours share one endpoint; they may only fold back onto each other
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(p, shared, q) == 0.0
                    && (p.x - shared.x) * (q.x - shared.x) + (p.y - shared.y) * (q.y - shared.y)
                        > 0.0
                {
                    return Err(PolygonError::SelfIntersecting(i, j));
                }
            } else if segments_touch(a, b, c, d) {
                return Err(PolygonError::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

impl PolygonHypothesis {
    pub fn new(vertices: Vec<Point>) -> Result<Self, PolygonError> {
        check_simple(&vertices)?;
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// `c`, which for a closed polygon is also the number of sides `s`.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// The polygon with vertex `i` removed, if still a valid simple polygon.
    pub fn without_vertex(&self, i: usize) -> Result<Self, PolygonError> {
        let mut v = self.vertices.clone();
        v.remove(i);
        Self::new(v)
    }
}

/// Scores polygons against one image, reusing per-row prefix sums.
#[derive(Debug, Clone)]
pub struct PolygonScorer {
    width: usize,
    height: usize,
    index: OnesIndex,
    whole: RegionCounts,
    l0: Bits,
}

fn enumerative(c: RegionCounts) -> Result<Bits, NumericError> {
    Ok((c.n() as f64).log2() + log_binomial(c.n(), c.k())?)
}

impl PolygonScorer {
    pub fn new(image: &BinaryImage) -> Self {
        let whole = image.counts();
        Self {
            width: image.width(),
            height: image.height(),
            index: OnesIndex::new(image),
            whole,
            l0: enumerative(whole).expect("image counts are valid"),
        }
    }

    /// Inside and outside counts.
    pub fn counts(
        &self,
        poly: &PolygonHypothesis,
    ) -> Result<(RegionCounts, RegionCounts), PolygonError> {
        let spans = polygon_row_spans(poly.vertices(), self.width, self.height)?;
        let (n1, k1) = self.index.count_spans(&spans);
        if n1 == 0 {
            return Err(ImagingError::EmptyRegion.into());
        }
        if n1 == self.whole.n() {
            return Err(PolygonError::NoExterior);
        }
        let inner = RegionCounts::new(n1, k1)?;
        let outer = RegionCounts::new(self.whole.n() - n1, self.whole.k() - k1)?;
        Ok((inner, outer))
    }

    fn log_n(&self) -> Bits {
        (self.whole.n() as f64).log2()
    }

    /// Background-only code length `L0`.
    pub fn l0(&self) -> Bits {
        self.l0
    }

    /// Full code length `1 + c(1 + log2 n) + L(inside) + L(outside)`.
    pub fn mdl_raw(&self, poly: &PolygonHypothesis) -> Result<Bits, PolygonError> {
        let (inner, outer) = self.counts(poly)?;
        let c = poly.vertex_count() as f64;
        Ok(1.0 + c * (1.0 + self.log_n()) + enumerative(inner)? + enumerative(outer)?)
    }

    /// `log2 NFA = s + s log2 n + log2 B(n1, k1, q)` with `s = c`.
    pub fn log2_nfa(&self, poly: &PolygonHypothesis) -> Result<Bits, PolygonError> {
        let (inner, _) = self.counts(poly)?;
        let s = poly.vertex_count() as f64;
        Ok(s + s * self.log_n() + binomial_tail_log(inner.n(), inner.k(), self.whole.q())?)
    }

    /// Both scores, with the MDL part relative to `L0`.
    pub fn score(&self, poly: &PolygonHypothesis) -> Result<Score, PolygonError> {
        let (inner, outer) = self.counts(poly)?;
        let c = poly.vertex_count() as f64;
        let raw = 1.0 + c * (1.0 + self.log_n()) + enumerative(inner)? + enumerative(outer)?;
        let nfa = c + c * self.log_n() + binomial_tail_log(inner.n(), inner.k(), self.whole.q())?;
        Ok(Score::new(raw - self.l0, nfa))
    }
}

pub fn mdl_polygon_score(
    image: &BinaryImage,
    poly: &PolygonHypothesis,
) -> Result<Bits, PolygonError> {
    PolygonScorer::new(image).mdl_raw(poly)
}

/// MDL code length minus `L0`.
pub fn mdl_polygon_relative(
    image: &BinaryImage,
    poly: &PolygonHypothesis,
) -> Result<Bits, PolygonError> {
    let s = PolygonScorer::new(image);
    Ok(s.mdl_raw(poly)? - s.l0())
}

pub fn nfa_polygon_score(
    image: &BinaryImage,
    poly: &PolygonHypothesis,
) -> Result<Bits, PolygonError> {
    PolygonScorer::new(image).log2_nfa(poly)
}

fn key(score: &Score, criterion: Criterion) -> Bits {
    match criterion {
        Criterion::Mdl => score.mdl_bits,
        Criterion::Nfa => score.log2_nfa,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BssStep {
    pub polygon: PolygonHypothesis,
    pub score: Score,
    /// Index (in the parent polygon) of the vertex removed to reach this step.
    pub removed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BssTrajectory {
    pub criterion: Criterion,
    pub steps: Vec<BssStep>,
    pub chosen: usize,
}

impl BssTrajectory {
    pub fn chosen_step(&self) -> &BssStep {
        &self.steps[self.chosen]
    }

    /// Criterion value of every step.
    pub fn curve(&self) -> Vec<(usize, Bits)> {
        self.steps
            .iter()
            .map(|s| (s.polygon.vertex_count(), key(&s.score, self.criterion)))
            .collect()
    }

    /// Whether the chosen polygon is meaningful (`NFA <= eps`); always true for MDL.
    pub fn chosen_is_meaningful(&self, eps: Epsilon) -> bool {
        match self.criterion {
            Criterion::Mdl => true,
            Criterion::Nfa => self.chosen_step().score.nfa_detects(eps),
        }
    }
}

/// Best single-vertex removal; ties go to the lowest index. Invalid children
/// are skipped.
fn best_child(
    scorer: &PolygonScorer,
    poly: &PolygonHypothesis,
    criterion: Criterion,
) -> Option<(usize, PolygonHypothesis, Score)> {
    let children: Vec<(usize, PolygonHypothesis, Score)> = (0..poly.vertex_count())
        .into_par_iter()
        .filter_map(|i| {
            let child = poly.without_vertex(i).ok()?;
            let score = scorer.score(&child).ok()?;
            Some((i, child, score))
        })
        .collect();
    children.into_iter().fold(
        None,
        |best: Option<(usize, PolygonHypothesis, Score)>, cand| match &best {
            Some(b) if key(&b.2, criterion) <= key(&cand.2, criterion) => best,
            _ => Some(cand),
        },
    )
}

fn walk(
    image: &BinaryImage,
    initial: &PolygonHypothesis,
    criterion: Criterion,
    require_improvement: bool,
) -> Result<BssTrajectory, PolygonError> {
    let scorer = PolygonScorer::new(image);
    let mut steps = vec![BssStep {
        polygon: initial.clone(),
        score: scorer.score(initial)?,
        removed: None,
    }];
    loop {
        let current = steps.last().expect("trajectory is never empty");
        if current.polygon.vertex_count() <= 3 {
            break;
        }
        let Some((i, child, score)) = best_child(&scorer, &current.polygon, criterion) else {
            break;
        };
        if require_improvement && key(&score, criterion) >= key(&current.score, criterion) {
            break;
        }
        steps.push(BssStep {
            polygon: child,
            score,
            removed: Some(i),
        });
    }
    let mut chosen = 0;
    for (i, s) in steps.iter().enumerate() {
        if key(&s.score, criterion) < key(&steps[chosen].score, criterion) {
            chosen = i;
        }
    }
    Ok(BssTrajectory {
        criterion,
        steps,
        chosen,
    })
}

/// Backward stepwise selection: repeatedly drop the vertex whose removal
/// gives the best score, while that strictly improves the score and more
/// than three vertices remain.
pub fn bss_simplify(
    image: &BinaryImage,
    initial: &PolygonHypothesis,
    criterion: Criterion,
) -> Result<BssTrajectory, PolygonError> {
    walk(image, initial, criterion, true)
}

/// The same greedy removal order, continued down to three vertices regardless
/// of improvement; `chosen` is the minimum over the whole path.
pub fn bss_full_path(
    image: &BinaryImage,
    initial: &PolygonHypothesis,
    criterion: Criterion,
) -> Result<BssTrajectory, PolygonError> {
    walk(image, initial, criterion, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{render_squares, Square};
    use crate::square_detect::mdl_score_single;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn square_poly() -> PolygonHypothesis {
        PolygonHypothesis::new(pts(&[
            (20.0, 20.0),
            (59.0, 20.0),
            (59.0, 59.0),
            (20.0, 59.0),
        ]))
        .unwrap()
    }

    #[test]
    fn rejects_invalid_polygons() {
        assert!(matches!(
            PolygonHypothesis::new(pts(&[(0.0, 0.0), (1.0, 1.0)])),
            Err(PolygonError::TooFewVertices(2))
        ));
        assert!(matches!(
            PolygonHypothesis::new(pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])),
            Err(PolygonError::Degenerate)
        ));
        let bowtie = pts(&[(0.0, 0.0), (10.0, 10.0), (10.0, 0.0), (0.0, 6.0)]);
        assert!(matches!(
            PolygonHypothesis::new(bowtie),
            Err(PolygonError::SelfIntersecting(..))
        ));
        let spike = pts(&[(0.0, 0.0), (10.0, 0.0), (5.0, 0.0), (5.0, 5.0)]);
        assert!(PolygonHypothesis::new(spike).is_err());
    }

    #[test]
    fn square_polygon_matches_square_score() {
        let img = render_squares(&[Square::new(20, 20, 40)], 100, 100).unwrap();
        let poly = square_poly();
        let log_n = 1e4f64.log2();
        let raw = mdl_polygon_score(&img, &poly).unwrap();
        let l0 = PolygonScorer::new(&img).l0();
        let single = mdl_score_single(&img, &Square::new(20, 20, 40)).unwrap();
        // same region, different header
        let delta = 1.0 + 4.0 * (1.0 + log_n) - 1.5 * log_n;
        assert!(((raw - l0) - (single + delta)).abs() < 1e-9);
        assert_eq!(mdl_polygon_relative(&img, &poly).unwrap(), raw - l0);
    }

    #[test]
    fn collinear_vertex_removal_saves_one_vertex_cost() {
        let img = render_squares(&[Square::new(20, 20, 40)], 100, 100).unwrap();
        let with = PolygonHypothesis::new(pts(&[
            (20.0, 20.0),
            (40.0, 20.0),
            (59.0, 20.0),
            (59.0, 59.0),
            (20.0, 59.0),
        ]))
        .unwrap();
        let saving = 1.0 + 1e4f64.log2();
        let s = PolygonScorer::new(&img);
        let (a, b) = (s.score(&with).unwrap(), s.score(&square_poly()).unwrap());
        assert!((a.mdl_bits - b.mdl_bits - saving).abs() < 1e-9);
        assert!((a.log2_nfa - b.log2_nfa - saving).abs() < 1e-9);
    }

    #[test]
    fn empty_interior_is_not_detected() {
        let img = render_squares(&[Square::new(0, 0, 5)], 100, 100).unwrap();
        assert!(nfa_polygon_score(&img, &square_poly()).unwrap() > 0.0);
    }

    #[test]
    fn optimal_square_stays_put() {
        let img = render_squares(&[Square::new(20, 20, 40)], 100, 100).unwrap();
        for crit in [Criterion::Mdl, Criterion::Nfa] {
            let t = bss_simplify(&img, &square_poly(), crit).unwrap();
            assert_eq!(t.steps.len(), 1);
            assert_eq!(t.chosen, 0);
            assert!(t.chosen_is_meaningful(Epsilon::default()));
        }
    }

    #[test]
    fn redundant_vertices_are_removed() {
        let img = render_squares(&[Square::new(20, 20, 40)], 100, 100).unwrap();
        let init = PolygonHypothesis::new(pts(&[
            (20.0, 20.0),
            (30.0, 20.0),
            (59.0, 20.0),
            (59.0, 40.0),
            (59.0, 59.0),
            (20.0, 59.0),
            (20.0, 35.0),
        ]))
        .unwrap();
        let t = bss_simplify(&img, &init, Criterion::Mdl).unwrap();
        assert_eq!(t.chosen_step().polygon.vertex_count(), 4);
        let full = bss_full_path(&img, &init, Criterion::Mdl).unwrap();
        assert_eq!(full.steps.last().unwrap().polygon.vertex_count(), 3);
        assert_eq!(full.chosen_step().polygon.vertex_count(), 4);
    }
}
