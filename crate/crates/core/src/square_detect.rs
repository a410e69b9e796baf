//! Single-square detection and multi-square model selection on binary images.

use thiserror::Error;

use crate::imaging::{BinaryImage, ImagingError};
use crate::numeric::{
    bernoulli_kld, binomial_tail_log, g_term, log_binomial, Bits, NumericError, RegionCounts,
};

pub use crate::imaging::Square;
pub use crate::score::{Criterion, Epsilon, Score};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),

    #[error(transparent)]
    Numeric(#[from] NumericError),

    #[error("squares {0} and {1} overlap")]
    Overlap(usize, usize),

    #[error("the structure covers the whole image")]
    NoBackground,

    #[error("the NFA is undefined for an empty hypothesis")]
    EmptyHypothesis,

    #[error("no candidate hypotheses supplied")]
    NoCandidates,
}

/// A set of `c >= 0` pairwise-disjoint squares.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SquareHypothesis {
    squares: Vec<Square>,
}

impl SquareHypothesis {
    pub fn new(squares: Vec<Square>) -> Result<Self, DetectError> {
        for i in 0..squares.len() {
            for j in i + 1..squares.len() {
                if squares[i].overlaps(&squares[j]) {
                    return Err(DetectError::Overlap(i, j));
                }
            }
        }
        Ok(Self { squares })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(sq: Square) -> Self {
        Self { squares: vec![sq] }
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn count(&self) -> usize {
        self.squares.len()
    }

    pub fn translated(&self, drow: isize, dcol: isize) -> Option<Self> {
        let squares = self
            .squares
            .iter()
            .map(|s| s.translated(drow, dcol))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { squares })
    }
}

fn log2(x: u64) -> Bits {
    (x as f64).log2()
}

/// Length of a region coded by enumeration: `log2 n + log2 C(n, k)`.
fn enumerative(c: RegionCounts) -> Result<Bits, NumericError> {
    Ok(log2(c.n()) + log_binomial(c.n(), c.k())?)
}

/// Background-only description length `L0`.
pub fn l0_code_length(counts: RegionCounts) -> Result<Bits, NumericError> {
    enumerative(counts)
}

fn split_counts(
    image: &BinaryImage,
    sq: &Square,
) -> Result<(RegionCounts, RegionCounts, RegionCounts), DetectError> {
    let whole = image.counts();
    let inner = image.count_square(sq)?;
    let outer = inner
        .complement_in(&whole)
        .ok_or(DetectError::NoBackground)?;
    if outer.n() == 0 {
        return Err(DetectError::NoBackground);
    }
    Ok((whole, inner, outer))
}

/// `L1 - L0` for one square.
pub fn mdl_score_single(image: &BinaryImage, sq: &Square) -> Result<Bits, DetectError> {
    let (whole, inner, outer) = split_counts(image, sq)?;
    Ok(1.5 * log2(whole.n()) + enumerative(inner)? + enumerative(outer)? - enumerative(whole)?)
}

/// `log2 NFA` for one square.
pub fn nfa_score_single(image: &BinaryImage, sq: &Square) -> Result<Bits, DetectError> {
    let whole = image.counts();
    let inner = image.count_square(sq)?;
    Ok(1.5 * log2(whole.n()) + binomial_tail_log(inner.n(), inner.k(), whole.q())?)
}

/// Both scores of one square.
pub fn score_single(image: &BinaryImage, sq: &Square) -> Result<Score, DetectError> {
    Ok(Score::new(
        mdl_score_single(image, sq)?,
        nfa_score_single(image, sq)?,
    ))
}

/// Hoeffding approximation `1.5 log2 n - n1 D(q1 || q)`; needs `q1 >= q`.
pub fn approx_log_nfa(square: RegionCounts, image: RegionCounts) -> Result<Bits, DetectError> {
    if square.n() == 0 {
        return Err(NumericError::EmptyRegion.into());
    }
    let (q1, q) = (square.q(), image.q());
    if q1 < q {
        return Err(NumericError::OutOfDomain("approximate NFA needs q1 >= q").into());
    }
    Ok(1.5 * log2(image.n()) - square.n() as f64 * bernoulli_kld(q1, q)?)
}

/// Stirling approximation of the single-square MDL score.
pub fn approx_mdl_score(
    square: RegionCounts,
    background: RegionCounts,
    image: RegionCounts,
) -> Result<Bits, DetectError> {
    for c in [square, background, image] {
        if c.k() == 0 || c.k() == c.n() {
            return Err(NumericError::OutOfDomain(
                "approximate MDL needs 0 < k < n in every region",
            )
            .into());
        }
    }
    let q = image.q();
    let d0 = background.n() as f64 * bernoulli_kld(background.q(), q)?;
    let d1 = square.n() as f64 * bernoulli_kld(square.q(), q)?;
    let g = g_term(background.k(), background.n())? + g_term(square.k(), square.n())?
        - g_term(image.k(), image.n())?;
    Ok(1.5 * log2(image.n()) - d0 - d1 + 0.5 * g - 0.5 * (2.0 * std::f64::consts::PI).log2())
}

fn hypothesis_counts(
    image: &BinaryImage,
    hyp: &SquareHypothesis,
) -> Result<Vec<RegionCounts>, DetectError> {
    hyp.squares
        .iter()
        .map(|s| image.count_square(s).map_err(DetectError::from))
        .collect()
}

/// `L_H - L0` for a multi-square hypothesis; the empty hypothesis gives `+1`.
pub fn mdl_score_multi(image: &BinaryImage, hyp: &SquareHypothesis) -> Result<Bits, DetectError> {
    let whole = image.counts();
    let parts = hypothesis_counts(image, hyp)?;
    let (n1, k1) = parts
        .iter()
        .fold((0, 0), |(n, k), c| (n + c.n(), k + c.k()));
    let outer = RegionCounts::new(whole.n() - n1, whole.k() - k1)?;
    if outer.n() == 0 {
        return Err(DetectError::NoBackground);
    }
    let mut structure = 0.0;
    for p in &parts {
        structure += 1.5 * log2(whole.n()) + enumerative(*p)?;
    }
    let prior = parts.len() as f64 + 1.0;
    Ok(structure + enumerative(outer)? - enumerative(whole)? + prior)
}

/// `log2 NFA` for a multi-square hypothesis with `c >= 1` squares.
pub fn nfa_score_multi(image: &BinaryImage, hyp: &SquareHypothesis) -> Result<Bits, DetectError> {
    if hyp.count() == 0 {
        return Err(DetectError::EmptyHypothesis);
    }
    let whole = image.counts();
    let parts = hypothesis_counts(image, hyp)?;
    let (n1, k1) = parts
        .iter()
        .fold((0, 0), |(n, k), c| (n + c.n(), k + c.k()));
    let c = parts.len() as f64;
    Ok(c + 1.5 * c * log2(whole.n()) + binomial_tail_log(n1, k1, whole.q())?)
}

/// Scores of one candidate; `log2_nfa` is `None` for the empty hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisScore {
    pub mdl_bits: Bits,
    pub log2_nfa: Option<Bits>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Index of the selected candidate, `None` for no detection.
    pub chosen: Option<usize>,
    pub scores: Vec<HypothesisScore>,
}

/// Picks the best candidate under `criterion`.
///
/// MDL takes the smallest `L_H`, with the empty hypothesis (`+1` bit relative
/// to `L0`) always in competition. NFA takes the smallest NFA among
/// meaningful candidates (`NFA <= eps`). Ties go to the earlier candidate, and
/// to no detection when an empty hypothesis is involved.
pub fn select_hypothesis(
    image: &BinaryImage,
    candidates: &[SquareHypothesis],
    criterion: Criterion,
    eps: Epsilon,
) -> Result<Selection, DetectError> {
    if candidates.is_empty() {
        return Err(DetectError::NoCandidates);
    }
    let scores = candidates
        .iter()
        .map(|h| {
            Ok(HypothesisScore {
                mdl_bits: mdl_score_multi(image, h)?,
                log2_nfa: if h.count() == 0 {
                    None
                } else {
                    Some(nfa_score_multi(image, h)?)
                },
            })
        })
        .collect::<Result<Vec<_>, DetectError>>()?;

    let chosen = match criterion {
        Criterion::Mdl => {
            let mut best: (Option<usize>, Bits) = (None, 1.0);
            for (i, s) in scores.iter().enumerate() {
                if candidates[i].count() > 0 && s.mdl_bits < best.1 {
                    best = (Some(i), s.mdl_bits);
                }
            }
            best.0
        }
        Criterion::Nfa => {
            let mut best: Option<(usize, Bits)> = None;
            for (i, s) in scores.iter().enumerate() {
                if let Some(v) = s.log2_nfa {
                    if v <= eps.log2() && best.is_none_or(|(_, b)| v < b) {
                        best = Some((i, v));
                    }
                }
            }
            best.map(|(i, _)| i)
        }
    };
    Ok(Selection { chosen, scores })
}

/// Four equal squares in a 2x2 arrangement, centred on the canvas, and the
/// single square that encloses them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourSquareLayout {
    pub small: [Square; 4],
    pub large: Square,
}

impl FourSquareLayout {
    /// `outer` is the extent of the arrangement and `margin` the gap between
    /// neighbouring squares; each small side is `(outer - margin) / 2`.
    pub fn centred(canvas: usize, outer: usize, margin: usize) -> Option<Self> {
        if margin >= outer || outer > canvas {
            return None;
        }
        let s = (outer - margin) / 2;
        if s == 0 {
            return None;
        }
        let off = (canvas - outer) / 2;
        let far = off + s + margin;
        Some(Self {
            small: [
                Square::new(off, off, s),
                Square::new(off, far, s),
                Square::new(far, off, s),
                Square::new(far, far, s),
            ],
            large: Square::new(off, off, 2 * s + margin),
        })
    }

    /// The four competing explanations: none, one small square, four small
    /// squares, one large square.
    pub fn hypotheses(&self) -> [SquareHypothesis; 4] {
        [
            SquareHypothesis::empty(),
            SquareHypothesis::single(self.small[0]),
            SquareHypothesis {
                squares: self.small.to_vec(),
            },
            SquareHypothesis::single(self.large),
        ]
    }
}
