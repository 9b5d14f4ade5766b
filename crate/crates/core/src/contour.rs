//! Marching squares on a row-major scalar field.
//!
//! A sample is *inside* when it is at or below the level. Crossing points are
//! placed on cell edges by linear interpolation. The two saddle cases are
//! resolved with a caller-supplied sample at the cell center.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

/// A chain of crossing points in fractional `(row, col)` index coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexPolyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeId {
    /// Between `(i, j)` and `(i, j + 1)`.
    Horizontal(usize, usize),
    /// Between `(i, j)` and `(i + 1, j)`.
    Vertical(usize, usize),
}

/// Trace the level set of `values` (`rows × cols`, row-major) at `level`.
///
/// `center(i, j)` is asked for the value at the middle of cell `(i, j)` only
/// when that cell is a saddle.
///
/// # Panics
/// If `values.len() != rows * cols`.
pub fn marching_squares<F>(
    values: &[f64],
    rows: usize,
    cols: usize,
    level: f64,
    mut center: F,
) -> Vec<IndexPolyline>
where
    F: FnMut(usize, usize) -> f64,
{
    assert_eq!(values.len(), rows * cols, "field shape mismatch");
    if rows < 2 || cols < 2 {
        return Vec::new();
    }
    let at = |i: usize, j: usize| values[i * cols + j];
    let inside = |v: f64| v <= level;

    let crossing = |edge: EdgeId| -> [f64; 2] {
        let (a, b, pa, pb) = match edge {
            EdgeId::Horizontal(i, j) => (
                at(i, j),
                at(i, j + 1),
                [i as f64, j as f64],
                [i as f64, (j + 1) as f64],
            ),
            EdgeId::Vertical(i, j) => (
                at(i, j),
                at(i + 1, j),
                [i as f64, j as f64],
                [(i + 1) as f64, j as f64],
            ),
        };
        let t = if a == b {
            0.5
        } else {
            ((level - a) / (b - a)).clamp(0.0, 1.0)
        };
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    };

    let mut segments: Vec<[EdgeId; 2]> = Vec::new();
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let corners = [at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)];
            let case = corners
                .iter()
                .enumerate()
                .fold(0u8, |acc, (bit, &v)| acc | (u8::from(inside(v)) << bit));
            if case == 0 || case == 15 {
                continue;
            }
            let top = EdgeId::Horizontal(i, j);
            let right = EdgeId::Vertical(i, j + 1);
            let bottom = EdgeId::Horizontal(i + 1, j);
            let left = EdgeId::Vertical(i, j);
            match case {
                // Corner bits: 0 top-left, 1 top-right, 2 bottom-right, 3 bottom-left.
                1 | 14 => segments.push([left, top]),
                2 | 13 => segments.push([top, right]),
                4 | 11 => segments.push([right, bottom]),
                8 | 7 => segments.push([bottom, left]),
                3 | 12 => segments.push([left, right]),
                6 | 9 => segments.push([top, bottom]),
                5 => {
                    if inside(center(i, j)) {
                        segments.push([top, right]);
                        segments.push([bottom, left]);
                    } else {
                        segments.push([left, top]);
                        segments.push([right, bottom]);
                    }
                }
                10 => {
                    if inside(center(i, j)) {
                        segments.push([left, top]);
                        segments.push([right, bottom]);
                    } else {
                        segments.push([top, right]);
                        segments.push([bottom, left]);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    join(&segments)
        .into_iter()
        .map(|(edges, closed)| IndexPolyline {
            points: edges.into_iter().map(crossing).collect(),
            closed,
        })
        .collect()
}

/// Chain segments sharing an edge crossing. Each crossing has at most two segments.
fn join(segments: &[[EdgeId; 2]]) -> Vec<(Vec<EdgeId>, bool)> {
    let mut touching: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            touching.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start: usize, from: EdgeId, used: &mut [bool]| -> (Vec<EdgeId>, bool) {
        let mut chain = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            used[seg] = true;
            let [a, b] = segments[seg];
            let next = if a == at { b } else { a };
            chain.push(next);
            at = next;
            match touching[&at].iter().copied().find(|&s| !used[s]) {
                Some(s) => seg = s,
                None => break,
            }
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        (chain, closed)
    };

    // Open chains start at a crossing touched by one segment.
    for (&edge, segs) in &touching {
        if segs.len() == 1 && !used[segs[0]] {
            out.push(walk(segs[0], edge, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            out.push(walk(s, segments[s][0], &mut used));
        }
    }
    out
}
