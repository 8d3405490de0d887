//! Word length in Thompson's group F with respect to `{a, b}` (the usual
//! `x₀, x₁`), by classifying the carets of a reduced tree-pair diagram and
//! summing a weight for each pair of carets with the same infix number.

use crate::groups::{Tree, TreePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CaretType {
    /// Leftmost caret (caret 0).
    LeftFirst,
    /// Other carets on the left edge, the root included.
    Left,
    /// Interior caret whose right child is a leaf.
    InteriorBare,
    /// Interior caret with a right child caret.
    InteriorRight,
    /// Last caret on the right edge (below the root).
    RightLast,
    /// Right edge caret whose infix successor is also on the right edge.
    RightNotInterior,
    /// Right edge caret whose infix successor is interior.
    RightInterior,
}

use CaretType::*;

/// Caret types listed in infix order.
pub(crate) fn caret_types(tree: &Tree) -> Vec<CaretType> {
    let n = tree.children.len();
    let mut on_left = vec![false; n];
    let mut on_right = vec![false; n];
    let mut v = 0usize;
    while let Some((l, _)) = tree.children[v] {
        on_left[v] = true;
        v = l;
    }
    if let Some((_, mut v)) = tree.children[0] {
        while let Some((_, r)) = tree.children[v] {
            on_right[v] = true;
            v = r;
        }
    }
    let is_caret = |v: usize| tree.children[v].is_some();
    let mut out = Vec::with_capacity(tree.carets());
    // iterative in-order traversal
    let mut stack = Vec::new();
    let mut cur = Some(0usize);
    loop {
        while let Some(v) = cur {
            match tree.children[v] {
                Some((l, _)) => {
                    stack.push(v);
                    cur = Some(l);
                }
                None => cur = None,
            }
        }
        let Some(v) = stack.pop() else { break };
        let (l, r) = tree.children[v].expect("stack holds carets");
        let ty = if on_left[v] {
            if is_caret(l) { Left } else { LeftFirst }
        } else if on_right[v] {
            match tree.children[r] {
                None => RightLast,
                Some((rl, _)) if is_caret(rl) => RightInterior,
                Some(_) => RightNotInterior,
            }
        } else if is_caret(r) {
            InteriorRight
        } else {
            InteriorBare
        };
        out.push(ty);
        cur = Some(r);
    }
    out
}

fn weight(a: CaretType, b: CaretType) -> u64 {
    let idx = |t: CaretType| match t {
        LeftFirst => 0,
        Left => 1,
        InteriorBare => 2,
        InteriorRight => 3,
        RightLast => 4,
        RightNotInterior => 5,
        RightInterior => 6,
    };
    // Caret 0 is LeftFirst in both trees and the last caret is RightLast
    // or Left, so the zero entries off those pairings never contribute.
    const TABLE: [[u64; 7]; 7] = [
        [0, 0, 0, 0, 0, 0, 0],
        [0, 2, 2, 2, 1, 1, 1],
        [0, 2, 2, 4, 0, 1, 3],
        [0, 2, 4, 4, 0, 3, 3],
        [0, 1, 0, 0, 0, 0, 0],
        [0, 1, 1, 3, 0, 2, 2],
        [0, 1, 3, 3, 0, 2, 2],
    ];
    TABLE[idx(a)][idx(b)]
}

pub fn geodesic_length_f(x: &TreePair) -> u64 {
    let (domain, range) = x.trees();
    let d = caret_types(&domain);
    let r = caret_types(&range);
    debug_assert_eq!(d.len(), r.len());
    d.iter().zip(&r).map(|(&a, &b)| weight(a, b)).sum()
}
