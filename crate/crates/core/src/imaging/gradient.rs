use std::f64::consts::PI;

use super::GrayImage;

/// Gradient magnitudes at or below this many gray levels are undefined.
pub const DEFAULT_GRADIENT_THRESHOLD: f64 = 2.0;

/// Per-pixel gradient angle in `[-pi, pi)` and magnitude, with a defined flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationMap {
    width: usize,
    height: usize,
    angles: Vec<f64>,
    magnitudes: Vec<f64>,
    defined: Vec<bool>,
}

/// Wraps any finite angle into `[-pi, pi)`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

impl OrientationMap {
    /// Builds a map from raw parts. Angles are wrapped into `[-pi, pi)`;
    /// `None` marks an undefined pixel.
    pub fn from_parts(width: usize, height: usize, cells: Vec<Option<(f64, f64)>>) -> Option<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return None;
        }
        let mut angles = Vec::with_capacity(cells.len());
        let mut magnitudes = Vec::with_capacity(cells.len());
        let mut defined = Vec::with_capacity(cells.len());
        for c in cells {
            match c {
                Some((a, m)) if a.is_finite() && m.is_finite() => {
                    angles.push(wrap_angle(a));
                    magnitudes.push(m);
                    defined.push(true);
                }
                _ => {
                    angles.push(0.0);
                    magnitudes.push(0.0);
                    defined.push(false);
                }
            }
        }
        Some(Self {
            width,
            height,
            angles,
            magnitudes,
            defined,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angle at `(x, y)`, or `None` where undefined.
    pub fn angle(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        self.defined[i].then(|| self.angles[i])
    }

    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitudes[y * self.width + x]
    }

    pub fn is_defined(&self, x: usize, y: usize) -> bool {
        self.defined[y * self.width + x]
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    /// The same map with every defined angle rotated by `delta`.
    pub fn rotated(&self, delta: f64) -> OrientationMap {
        let mut out = self.clone();
        for (a, &d) in out.angles.iter_mut().zip(&self.defined) {
            if d {
                *a = wrap_angle(*a + delta);
            }
        }
        out
    }
}

/// Gradient orientation from the 2x2 forward-difference scheme.
///
/// With `A = I(x, y)`, `B = I(x+1, y)`, `C = I(x, y+1)`, `D = I(x+1, y+1)`:
/// `gx = (B + D - A - C) / 2`, `gy = (C + D - A - B) / 2`, angle
/// `atan2(gy, gx)`. The last row and column, and every pixel with magnitude
/// `<= threshold`, are undefined.
pub fn gradient_orientation(gray: &GrayImage, threshold: f64) -> OrientationMap {
    let (w, h) = (gray.width(), gray.height());
    let mut cells = vec![None; w * h];
    if w >= 2 && h >= 2 {
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                let a = f64::from(gray.get(x, y));
                let b = f64::from(gray.get(x + 1, y));
                let c = f64::from(gray.get(x, y + 1));
                let d = f64::from(gray.get(x + 1, y + 1));
                let gx = 0.5 * (b + d - a - c);
                let gy = 0.5 * (c + d - a - b);
                let mag = gx.hypot(gy);
                if mag > threshold {
                    cells[y * w + x] = Some((gy.atan2(gx), mag));
                }
            }
        }
    }
    OrientationMap::from_parts(w, h, cells).expect("dimensions come from a valid image")
}
