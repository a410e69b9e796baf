//! Outer-boundary tracing of the largest foreground blob.

use std::collections::VecDeque;

use super::{BinaryImage, Point};

// Clockwise in image coordinates (y grows downward), starting east.
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn majority_filter(img: &BinaryImage, radius: usize) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    if radius == 0 {
        return img.pixels().iter().map(|&p| p == 1).collect();
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut ones, mut total) = (0, 0);
            for yy in y.saturating_sub(radius)..=(y + radius).min(h - 1) {
                for xx in x.saturating_sub(radius)..=(x + radius).min(w - 1) {
                    ones += usize::from(img.get(xx, yy));
                    total += 1;
                }
            }
            out[y * w + x] = 2 * ones > total;
        }
    }
    out
}

fn largest_component(fg: &[bool], w: usize, h: usize) -> Option<Vec<bool>> {
    let mut label = vec![usize::MAX; w * h];
    let mut best: Option<(usize, usize)> = None;
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !fg[start] || label[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        label[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if fg[j] && label[j] == usize::MAX {
                    label[j] = next;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
        next += 1;
    }
    let (id, _) = best?;
    Some(label.iter().map(|&l| l == id).collect())
}

/// Traces the outer boundary of the largest 4-connected foreground component
/// (after a `(2r+1)^2` majority filter) and returns at most `max_vertices`
/// evenly spaced boundary pixels, in boundary order.
pub fn trace_contour(
    img: &BinaryImage,
    smoothing_radius: usize,
    max_vertices: usize,
) -> Option<Vec<Point>> {
    let (w, h) = (img.width(), img.height());
    let blob = largest_component(&majority_filter(img, smoothing_radius), w, h)?;
    let inside = |x: isize, y: isize| {
        x >= 0
            && y >= 0
            && (x as usize) < w
            && (y as usize) < h
            && blob[y as usize * w + x as usize]
    };
    let first = blob.iter().position(|&b| b)?;
    let start = ((first % w) as isize, (first / w) as isize);

    // Moore-neighbour tracing; `back` is the background pixel we arrived from.
    let mut boundary = vec![start];
    let mut cur = start;
    let mut back = (start.0 - 1, start.1);
    for _ in 0..4 * w * h {
        let from = DIRS
            .iter()
            .position(|&(dx, dy)| (cur.0 + dx, cur.1 + dy) == back)
            .expect("backtrack pixel is a neighbour");
        let mut found = None;
        for step in 1..=8 {
            let d = (from + step) % 8;
            let cand = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if inside(cand.0, cand.1) {
                found = Some(cand);
                break;
            }
            back = cand;
        }
        let Some(next) = found else {
            break; // isolated pixel
        };
        if next == start {
            break;
        }
        boundary.push(next);
        cur = next;
    }

    let step = boundary.len().div_ceil(max_vertices.max(3));
    Some(
        boundary
            .iter()
            .step_by(step.max(1))
            .map(|&(x, y)| Point::new(x as f64, y as f64))
            .collect(),
    )
}
