//! Binary and grayscale images, noise synthesis, region rasterization and
//! counting, gradient-orientation maps, and file I/O.

mod contour;
mod gradient;
pub mod io;
mod raster;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numeric::RegionCounts;

pub use contour::trace_contour;
pub(crate) use gradient::wrap_angle;
pub use gradient::{gradient_orientation, OrientationMap, DEFAULT_GRADIENT_THRESHOLD};
pub use raster::{polygon_row_spans, rasterize_polygon, signed_area, RowSpan};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image dimensions {0}x{1} are invalid")]
    InvalidDimensions(usize, usize),

    #[error("pixel buffer has {got} values, expected {expected}")]
    BufferLength { expected: usize, got: usize },

    #[error("pixel value {0} is not binary")]
    NonBinaryPixel(u8),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("flip probability {0} must lie strictly inside (0, 0.5)")]
    InvalidNoise(f64),

    #[error("square at ({row}, {col}) with side {side} does not fit in a {width}x{height} image")]
    SquareOutOfBounds {
        row: usize,
        col: usize,
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("polygon is degenerate (zero area)")]
    DegeneratePolygon,

    #[error("vertex ({0}, {1}) lies outside the image")]
    VertexOutOfBounds(f64, f64),

    #[error("region is empty")]
    EmptyRegion,

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("malformed vertex file at line {line}: {msg}")]
    VertexFile { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A 2D point in pixel coordinates: `x` is the column, `y` the row. Pixel
/// `(c, r)` has its center at `(c, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// An axis-aligned square of pixels with its upper-left corner at `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Square {
    pub row: usize,
    pub col: usize,
    pub side: usize,
}

impl Square {
    pub fn new(row: usize, col: usize, side: usize) -> Self {
        Self { row, col, side }
    }

    pub fn area(&self) -> u64 {
        (self.side * self.side) as u64
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.side >= 1 && self.row + self.side <= height && self.col + self.side <= width
    }

    pub fn overlaps(&self, other: &Square) -> bool {
        self.row < other.row + other.side
            && other.row < self.row + self.side
            && self.col < other.col + other.side
            && other.col < self.col + self.side
    }

    pub fn translated(&self, drow: isize, dcol: isize) -> Option<Square> {
        Some(Square {
            row: self.row.checked_add_signed(drow)?,
            col: self.col.checked_add_signed(dcol)?,
            side: self.side,
        })
    }

    fn check_fits(&self, width: usize, height: usize) -> Result<(), ImagingError> {
        if self.fits(width, height) {
            Ok(())
        } else {
            Err(ImagingError::SquareOutOfBounds {
                row: self.row,
                col: self.col,
                side: self.side,
                width,
                height,
            })
        }
    }
}

/// Row-major `{0, 1}` image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn zeros(width: usize, height: usize) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions(width, height));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![0; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions(width, height));
        }
        if pixels.len() != width * height {
            return Err(ImagingError::BufferLength {
                expected: width * height,
                got: pixels.len(),
            });
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(ImagingError::NonBinaryPixel(bad));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels `n`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = u8::from(value);
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn count_ones(&self) -> u64 {
        self.pixels.iter().map(|&p| u64::from(p)).sum()
    }

    /// Whole-image counts `(n, k)`.
    pub fn counts(&self) -> RegionCounts {
        RegionCounts::new(self.len() as u64, self.count_ones())
            .expect("a non-empty image always has valid counts")
    }

    pub fn inverted(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| 1 - p).collect(),
        }
    }

    /// The image with polarity chosen so that ones are the minority value
    /// (inverted when more than half the pixels are ones).
    pub fn with_minority_foreground(&self) -> BinaryImage {
        if 2 * self.count_ones() > self.len() as u64 {
            self.inverted()
        } else {
            self.clone()
        }
    }

    /// Counts of ones inside a square.
    pub fn count_square(&self, sq: &Square) -> Result<RegionCounts, ImagingError> {
        sq.check_fits(self.width, self.height)?;
        let k = (sq.row..sq.row + sq.side)
            .map(|y| {
                self.row(y)[sq.col..sq.col + sq.side]
                    .iter()
                    .map(|&p| u64::from(p))
                    .sum::<u64>()
            })
            .sum();
        Ok(RegionCounts::new(sq.area(), k).expect("k <= side^2"))
    }

    /// Copy of the image with content shifted by `(dx, dy)`; vacated pixels are
    /// filled from the wrapped-around source (a cyclic shift).
    pub fn cyclic_shift(&self, dx: usize, dy: usize) -> BinaryImage {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0; w * h];
        for y in 0..h {
            for x in 0..w {
                out[((y + dy) % h) * w + (x + dx) % w] = self.pixels[y * w + x];
            }
        }
        BinaryImage {
            width: w,
            height: h,
            pixels: out,
        }
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions(width, height));
        }
        if pixels.len() != width * height {
            return Err(ImagingError::BufferLength {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImagingError> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn to_binary(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| u8::from(p >= 128)).collect(),
        }
    }
}

impl From<&BinaryImage> for GrayImage {
    fn from(img: &BinaryImage) -> Self {
        GrayImage {
            width: img.width,
            height: img.height,
            pixels: img.pixels.iter().map(|&p| p * 255).collect(),
        }
    }
}

/// Per-pixel membership mask with at least one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    width: usize,
    height: usize,
    members: Vec<bool>,
}

impl RegionMask {
    pub fn from_members(
        width: usize,
        height: usize,
        members: Vec<bool>,
    ) -> Result<Self, ImagingError> {
        if members.len() != width * height {
            return Err(ImagingError::BufferLength {
                expected: width * height,
                got: members.len(),
            });
        }
        if !members.iter().any(|&m| m) {
            return Err(ImagingError::EmptyRegion);
        }
        Ok(Self {
            width,
            height,
            members,
        })
    }

    pub fn from_square(width: usize, height: usize, sq: &Square) -> Result<Self, ImagingError> {
        sq.check_fits(width, height)?;
        let mut members = vec![false; width * height];
        for y in sq.row..sq.row + sq.side {
            members[y * width + sq.col..y * width + sq.col + sq.side].fill(true);
        }
        Self::from_members(width, height, members)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.members[y * self.width + x]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    /// The complement mask; fails if it would be empty.
    pub fn complement(&self) -> Result<RegionMask, ImagingError> {
        Self::from_members(
            self.width,
            self.height,
            self.members.iter().map(|&m| !m).collect(),
        )
    }
}

/// Flip probability and seed for Bernoulli noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    delta: f64,
    seed: u64,
}

impl NoiseConfig {
    pub fn new(delta: f64, seed: u64) -> Result<Self, ImagingError> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(ImagingError::InvalidNoise(delta));
        }
        Ok(Self { delta, seed })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The generator behind every synthetic image: ChaCha8 keyed by `seed`,
/// on stream `stream`. Distinct streams give independent sequences, so one
/// base seed can be split across sweep trials.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Flips every pixel independently with probability `p` (any `p` in `[0, 1]`).
pub fn flip_with_probability<R: Rng + ?Sized>(
    image: &BinaryImage,
    p: f64,
    rng: &mut R,
) -> BinaryImage {
    let pixels = image
        .pixels
        .iter()
        .map(|&v| if rng.gen_bool(p) { 1 - v } else { v })
        .collect();
    BinaryImage {
        width: image.width,
        height: image.height,
        pixels,
    }
}

/// Applies seeded flip noise; identical `cfg` gives identical output.
pub fn flip_noise(image: &BinaryImage, cfg: &NoiseConfig) -> BinaryImage {
    let mut rng = seeded_rng(cfg.seed, 0);
    flip_with_probability(image, cfg.delta, &mut rng)
}

/// Noiseless image with ones on the union of `layout`.
pub fn render_squares(
    layout: &[Square],
    width: usize,
    height: usize,
) -> Result<BinaryImage, ImagingError> {
    let mut img = BinaryImage::zeros(width, height)?;
    for sq in layout {
        sq.check_fits(width, height)?;
        for y in sq.row..sq.row + sq.side {
            img.pixels[y * width + sq.col..y * width + sq.col + sq.side].fill(1);
        }
    }
    Ok(img)
}

/// Ground-truth squares followed by flip noise.
pub fn synthesize_squares(
    layout: &[Square],
    width: usize,
    height: usize,
    cfg: &NoiseConfig,
) -> Result<BinaryImage, ImagingError> {
    Ok(flip_noise(&render_squares(layout, width, height)?, cfg))
}

/// Counts over the masked pixels.
pub fn count_region(image: &BinaryImage, mask: &RegionMask) -> Result<RegionCounts, ImagingError> {
    if image.width != mask.width || image.height != mask.height {
        return Err(ImagingError::DimensionMismatch(
            image.width,
            image.height,
            mask.width,
            mask.height,
        ));
    }
    let (n, k) = image
        .pixels
        .iter()
        .zip(&mask.members)
        .filter(|(_, &m)| m)
        .fold((0u64, 0u64), |(n, k), (&p, _)| (n + 1, k + u64::from(p)));
    RegionCounts::new(n, k).map_err(|_| ImagingError::EmptyRegion)
}

/// Per-row prefix sums of ones, for `O(1)` span counts.
#[derive(Debug, Clone)]
pub struct OnesIndex {
    width: usize,
    prefix: Vec<u32>,
}

impl OnesIndex {
    pub fn new(image: &BinaryImage) -> Self {
        let w = image.width;
        let mut prefix = Vec::with_capacity(image.height * (w + 1));
        for y in 0..image.height {
            let mut acc = 0u32;
            prefix.push(0);
            for &p in image.row(y) {
                acc += u32::from(p);
                prefix.push(acc);
            }
        }
        Self { width: w, prefix }
    }

    /// Ones in row `y`, columns `x0..=x1`.
    pub fn span(&self, y: usize, x0: usize, x1: usize) -> u64 {
        let base = y * (self.width + 1);
        u64::from(self.prefix[base + x1 + 1] - self.prefix[base + x0])
    }

    /// `(n, k)` over a set of spans.
    pub fn count_spans(&self, spans: &[RowSpan]) -> (u64, u64) {
        spans.iter().fold((0, 0), |(n, k), s| {
            (n + (s.x1 - s.x0 + 1) as u64, k + self.span(s.y, s.x0, s.x1))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_config_bounds() {
        assert!(NoiseConfig::new(0.0, 1).is_err());
        assert!(NoiseConfig::new(0.5, 1).is_err());
        assert!(NoiseConfig::new(0.49, 1).is_ok());
    }

    #[test]
    fn tiny_delta_leaves_image_unchanged() {
        let img = BinaryImage::zeros(100, 100).unwrap();
        let out = flip_noise(&img, &NoiseConfig::new(1e-9, 7).unwrap());
        assert_eq!(out, img);
    }

    #[test]
    fn forced_flip_is_an_involution() {
        let base = render_squares(&[Square::new(3, 4, 5)], 16, 12).unwrap();
        let mut rng = seeded_rng(1, 0);
        let once = flip_with_probability(&base, 1.0, &mut rng);
        assert_eq!(once, base.inverted());
        assert_eq!(flip_with_probability(&once, 1.0, &mut rng), base);
    }

    #[test]
    fn flip_noise_is_reproducible() {
        let img = BinaryImage::zeros(64, 64).unwrap();
        let cfg = NoiseConfig::new(0.3, 42).unwrap();
        assert_eq!(flip_noise(&img, &cfg), flip_noise(&img, &cfg));
        let other = NoiseConfig::new(0.3, 43).unwrap();
        assert_ne!(flip_noise(&img, &cfg), flip_noise(&img, &other));
    }

    #[test]
    fn noiseless_square_count() {
        let cfg = NoiseConfig::new(0.2, 0).unwrap();
        let layout = [Square::new(30, 30, 40)];
        let clean = render_squares(&layout, 100, 100).unwrap();
        assert_eq!(clean.count_ones(), 1600);
        assert!(synthesize_squares(&layout, 100, 100, &cfg).is_ok());
        assert!(matches!(
            render_squares(&[Square::new(70, 70, 40)], 100, 100),
            Err(ImagingError::SquareOutOfBounds { .. })
        ));
    }

    #[test]
    fn count_region_full_and_square() {
        let cfg = NoiseConfig::new(0.3, 5).unwrap();
        let img = synthesize_squares(&[], 40, 30, &cfg).unwrap();
        let full = RegionMask::from_members(40, 30, vec![true; 1200]).unwrap();
        assert_eq!(count_region(&img, &full).unwrap(), img.counts());

        let sq = Square::new(5, 6, 10);
        let clean = render_squares(&[sq], 40, 30).unwrap();
        let mask = RegionMask::from_square(40, 30, &sq).unwrap();
        let c = count_region(&clean, &mask).unwrap();
        assert_eq!(c.q(), 1.0);
        assert_eq!(clean.count_square(&sq).unwrap(), c);
    }

    #[test]
    fn count_region_errors() {
        let img = BinaryImage::zeros(4, 4).unwrap();
        assert!(RegionMask::from_members(4, 4, vec![false; 16]).is_err());
        let mask = RegionMask::from_members(2, 2, vec![true; 4]).unwrap();
        assert!(matches!(
            count_region(&img, &mask),
            Err(ImagingError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn minority_foreground() {
        let img = render_squares(&[Square::new(0, 0, 9)], 10, 10).unwrap();
        let flipped = img.with_minority_foreground();
        assert_eq!(flipped.count_ones(), 19);
        let small = render_squares(&[Square::new(0, 0, 3)], 10, 10).unwrap();
        assert_eq!(small.with_minority_foreground(), small);
    }

    #[test]
    fn ones_index_spans() {
        let img = render_squares(&[Square::new(1, 2, 3)], 8, 6).unwrap();
        let idx = OnesIndex::new(&img);
        assert_eq!(idx.span(2, 0, 7), 3);
        assert_eq!(idx.span(2, 3, 3), 1);
        assert_eq!(idx.span(0, 0, 7), 0);
    }
}
