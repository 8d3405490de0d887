//! Word lengths in lamplighter groups `ℤ ≀ H`: every lamp value costs its
//! absolute value, plus the shortest walk in the Cayley graph of `H` that
//! starts at the identity, passes every lit position and ends at the cursor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::groups::{FreeElement, LineLamplighter, NestedLamplighter, TreeLamplighter};

/// Largest lamp support handled by [`geodesic_length_wreath_nested`]; the
/// tour search is exponential in the support size.
pub const DEFAULT_NESTED_SUPPORT_CAP: usize = 14;

fn lamp_cost<K>(lamps: &BTreeMap<K, i64>) -> u64 {
    lamps.values().map(|v| v.unsigned_abs()).sum()
}

/// Shortest walk on ℤ from `start` to `end` covering `[lo, hi]`.
fn line_tour(start: i64, end: i64, lo: i64, hi: i64) -> u64 {
    let lo = lo.min(start).min(end);
    let hi = hi.max(start).max(end);
    let right_first = (hi - start) + (hi - lo) + (end - lo);
    let left_first = (start - lo) + (hi - lo) + (hi - end);
    right_first.min(left_first) as u64
}

pub fn geodesic_length_wreath_line(x: &LineLamplighter) -> u64 {
    let c = *x.cursor();
    let lo = x.lamps().keys().next().copied().unwrap_or(0);
    let hi = x.lamps().keys().next_back().copied().unwrap_or(0);
    lamp_cost(x.lamps()) + line_tour(0, c, lo, hi)
}

pub fn geodesic_length_wreath_tree(x: &TreeLamplighter) -> u64 {
    // Edges of the spanning subtree are the distinct nonempty prefixes of the
    // reduced words reaching the marked vertices.
    let mut words: Vec<Vec<u8>> = x
        .lamps()
        .keys()
        .chain(std::iter::once(x.cursor()))
        .map(|v: &FreeElement| v.word().iter().map(|s| s.index() as u8).collect())
        .collect();
    words.sort_unstable();
    let mut edges = 0usize;
    let mut prev: &[u8] = &[];
    for w in &words {
        let common = w.iter().zip(prev).take_while(|(a, b)| a == b).count();
        edges += w.len() - common;
        prev = w;
    }
    lamp_cost(x.lamps()) + 2 * edges as u64 - x.cursor().len() as u64
}

/// Distance in ℤ ≀ ℤ between `x` and `y`, i.e. the length of `x⁻¹y`.
fn line_distance(x: &LineLamplighter, y: &LineLamplighter) -> u64 {
    let mut diff: BTreeMap<i64, i64> = y.lamps().clone();
    for (&p, &v) in x.lamps() {
        let e = diff.entry(p).or_insert(0);
        *e -= v;
        if *e == 0 {
            diff.remove(&p);
        }
    }
    let (start, end) = (*x.cursor(), *y.cursor());
    let lo = diff.keys().next().copied().unwrap_or(start);
    let hi = diff.keys().next_back().copied().unwrap_or(start);
    lamp_cost(&diff) + line_tour(start, end, lo, hi)
}

/// Word length in ℤ ≀ (ℤ ≀ ℤ). The walk through the lit positions is found
/// exactly by dynamic programming over subsets, so elements whose lamp
/// support exceeds [`DEFAULT_NESTED_SUPPORT_CAP`] are rejected.
pub fn geodesic_length_wreath_nested(x: &NestedLamplighter) -> Result<u64> {
    geodesic_length_wreath_nested_capped(x, DEFAULT_NESTED_SUPPORT_CAP)
}

pub fn geodesic_length_wreath_nested_capped(x: &NestedLamplighter, cap: usize) -> Result<u64> {
    let points: Vec<&LineLamplighter> = x.lamps().keys().collect();
    let m = points.len();
    if m > cap {
        return Err(Error::MetricUnavailable(format!(
            "lamp support of size {m} exceeds the tour search cap {cap}"
        )));
    }
    let origin = LineLamplighter::identity();
    let cursor = x.cursor();
    let cost = lamp_cost(x.lamps());
    if m == 0 {
        return Ok(cost + line_distance(&origin, cursor));
    }
    let mut pair = vec![0u64; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = line_distance(points[i], points[j]);
            pair[i * m + j] = d;
            pair[j * m + i] = d;
        }
    }
    let full = (1usize << m) - 1;
    let mut best = vec![u64::MAX; (full + 1) * m];
    for (i, p) in points.iter().enumerate() {
        best[(1 << i) * m + i] = line_distance(&origin, p);
    }
    for mask in 1..=full {
        for i in 0..m {
            let here = best[mask * m + i];
            if here == u64::MAX || mask & (1 << i) == 0 {
                continue;
            }
            for j in 0..m {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let slot = &mut best[(mask | 1 << j) * m + j];
                *slot = (*slot).min(here + pair[i * m + j]);
            }
        }
    }
    let tour = (0..m)
        .map(|i| best[full * m + i] + line_distance(points[i], cursor))
        .min()
        .expect("nonempty support");
    Ok(cost + tour)
}
