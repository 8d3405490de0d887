//! Thompson's group `F` as reduced tree-pair diagrams.
//!
//! Both trees live in one arena. Leaves carry a link to the leaf with the
//! same index in the other tree, so subdividing a leaf pair and cancelling
//! an exposed caret pair are constant-time. Right multiplication by a
//! generator rewrites the top of the domain tree:
//!
//! * `x₀ = a`: `((A, B), C) → (A, (B, C))` at the root,
//! * `x₁ = b`: the same rotation at the right child of the root,
//! * inverses: the opposite rotation,
//!
//! subdividing leaves first when the pattern is not present. Only carets
//! touched by the rewrite can become reducible, so reduction is local too.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::words::Symbol;

use super::key::KeyWriter;

const NIL: u32 = u32::MAX;
const FREED: u32 = u32::MAX - 1;

const DOMAIN: usize = 0;
const RANGE: usize = 1;

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    left: u32,
    right: u32,
    /// Matching leaf in the other tree; `NIL` for carets, `FREED` for
    /// recycled slots.
    partner: u32,
}

impl Node {
    const LEAF: Node = Node {
        parent: NIL,
        left: NIL,
        right: NIL,
        partner: NIL,
    };
}

#[derive(Clone)]
pub struct TreePair {
    nodes: Vec<Node>,
    free: Vec<u32>,
    roots: [u32; 2],
}

/// Plain binary tree used for inspection: node 0 is the root, `children[i]`
/// is `None` for a leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub children: Vec<Option<(usize, usize)>>,
}

impl Tree {
    /// Parses a preorder code (`true` = caret, `false` = leaf).
    pub fn from_preorder(bits: &[bool]) -> Result<Tree> {
        let mut children: Vec<Option<(usize, usize)>> = Vec::new();
        // stack of (node, slot) waiting for a child: slot 0 = left, 1 = right
        let mut pending: Vec<(usize, u8)> = Vec::new();
        let mut left_child = Vec::new();
        for (i, &caret) in bits.iter().enumerate() {
            let id = children.len();
            children.push(None);
            left_child.push(usize::MAX);
            if let Some(&(parent, slot)) = pending.last() {
                if slot == 0 {
                    left_child[parent] = id;
                    pending.last_mut().expect("non-empty").1 = 1;
                } else {
                    pending.pop();
                    children[parent] = Some((left_child[parent], id));
                }
            } else if i != 0 {
                return Err(Error::Parse("trailing bits after a complete tree".into()));
            }
            if caret {
                pending.push((id, 0));
            }
        }
        if !pending.is_empty() || bits.is_empty() {
            return Err(Error::Parse("incomplete preorder tree code".into()));
        }
        Ok(Tree { children })
    }

    pub fn leaves(&self) -> usize {
        self.children.iter().filter(|c| c.is_none()).count()
    }

    pub fn carets(&self) -> usize {
        self.children.len() - self.leaves()
    }
}

impl TreePair {
    pub fn identity() -> Self {
        let mut nodes = vec![Node::LEAF; 2];
        nodes[0].partner = 1;
        nodes[1].partner = 0;
        TreePair {
            nodes,
            free: Vec::new(),
            roots: [0, 1],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.is_leaf(self.roots[DOMAIN])
    }

    /// Builds a pair from preorder codes and reduces it.
    pub fn from_shapes(domain: &[bool], range: &[bool]) -> Result<Self> {
        let d = Tree::from_preorder(domain)?;
        let r = Tree::from_preorder(range)?;
        if d.leaves() != r.leaves() {
            return Err(Error::Parse(format!(
                "tree pair leaf counts differ: {} vs {}",
                d.leaves(),
                r.leaves()
            )));
        }
        let mut tp = TreePair {
            nodes: Vec::new(),
            free: Vec::new(),
            roots: [NIL, NIL],
        };
        let mut leaves = [Vec::new(), Vec::new()];
        for (t, tree) in [&d, &r].into_iter().enumerate() {
            let base = tp.nodes.len() as u32;
            for _ in 0..tree.children.len() {
                tp.nodes.push(Node::LEAF);
            }
            for (i, c) in tree.children.iter().enumerate() {
                if let Some((l, r)) = *c {
                    let (i, l, r) = (base + i as u32, base + l as u32, base + r as u32);
                    tp.nodes[i as usize].left = l;
                    tp.nodes[i as usize].right = r;
                    tp.nodes[l as usize].parent = i;
                    tp.nodes[r as usize].parent = i;
                }
            }
            tp.roots[t] = base;
            tp.collect_leaves(base, &mut leaves[t]);
        }
        for (&x, &y) in leaves[0].iter().zip(&leaves[1]) {
            tp.nodes[x as usize].partner = y;
            tp.nodes[y as usize].partner = x;
        }
        let candidates: Vec<u32> = (0..tp.nodes.len() as u32)
            .filter(|&i| !tp.is_leaf(i))
            .collect();
        tp.reduce(candidates);
        Ok(tp)
    }

    fn collect_leaves(&self, root: u32, out: &mut Vec<u32>) {
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let n = self.nodes[v as usize];
            if n.left == NIL {
                out.push(v);
            } else {
                stack.push(n.right);
                stack.push(n.left);
            }
        }
    }

    #[inline]
    fn is_leaf(&self, v: u32) -> bool {
        self.nodes[v as usize].left == NIL
    }

    fn alloc(&mut self, node: Node) -> u32 {
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn release(&mut self, v: u32) {
        self.nodes[v as usize] = Node {
            partner: FREED,
            ..Node::LEAF
        };
        self.free.push(v);
    }

    /// Subdivides leaf `v` and its partner; returns the partner, which is now
    /// a caret in the other tree.
    fn split(&mut self, v: u32) -> u32 {
        let w = self.nodes[v as usize].partner;
        let children = [
            self.alloc(Node { parent: v, ..Node::LEAF }),
            self.alloc(Node { parent: v, ..Node::LEAF }),
        ];
        let partners = [
            self.alloc(Node { parent: w, ..Node::LEAF }),
            self.alloc(Node { parent: w, ..Node::LEAF }),
        ];
        for i in 0..2 {
            self.nodes[children[i] as usize].partner = partners[i];
            self.nodes[partners[i] as usize].partner = children[i];
        }
        let nv = &mut self.nodes[v as usize];
        nv.left = children[0];
        nv.right = children[1];
        nv.partner = NIL;
        let nw = &mut self.nodes[w as usize];
        nw.left = partners[0];
        nw.right = partners[1];
        nw.partner = NIL;
        w
    }

    fn ensure_caret(&mut self, v: u32, touched: &mut Vec<u32>) {
        if self.is_leaf(v) {
            let w = self.split(v);
            touched.push(v);
            touched.push(w);
        }
    }

    /// `p = (A, (B, C))` becomes `p = ((A, B), C)`; returns the inner caret.
    fn lift_left(&mut self, p: u32) -> u32 {
        let q = self.nodes[p as usize].right;
        let a = self.nodes[p as usize].left;
        let b = self.nodes[q as usize].left;
        let c = self.nodes[q as usize].right;
        self.nodes[q as usize].left = a;
        self.nodes[q as usize].right = b;
        self.nodes[a as usize].parent = q;
        self.nodes[p as usize].left = q;
        self.nodes[p as usize].right = c;
        self.nodes[c as usize].parent = p;
        q
    }

    /// `p = ((A, B), C)` becomes `p = (A, (B, C))`; returns the inner caret.
    fn lift_right(&mut self, p: u32) -> u32 {
        let q = self.nodes[p as usize].left;
        let a = self.nodes[q as usize].left;
        let b = self.nodes[q as usize].right;
        let c = self.nodes[p as usize].right;
        self.nodes[q as usize].left = b;
        self.nodes[q as usize].right = c;
        self.nodes[c as usize].parent = q;
        self.nodes[p as usize].left = a;
        self.nodes[p as usize].right = q;
        self.nodes[a as usize].parent = p;
        q
    }

    /// Right multiplication by `x₀^{±1}` (symbols 0, 1) or `x₁^{±1}`
    /// (symbols 2, 3).
    pub fn apply(&mut self, s: Symbol) {
        let mut touched = Vec::with_capacity(8);
        let root = self.roots[DOMAIN];
        self.ensure_caret(root, &mut touched);
        let pivot = match s.generator() {
            0 => root,
            1 => {
                let r = self.nodes[root as usize].right;
                self.ensure_caret(r, &mut touched);
                r
            }
            g => panic!("Thompson's group F has two generators, got generator {g}"),
        };
        let inner = if !s.is_inverse() {
            let l = self.nodes[pivot as usize].left;
            self.ensure_caret(l, &mut touched);
            self.lift_right(pivot)
        } else {
            let r = self.nodes[pivot as usize].right;
            self.ensure_caret(r, &mut touched);
            self.lift_left(pivot)
        };
        touched.push(pivot);
        touched.push(inner);
        self.reduce(touched);
    }

    /// Cancels exposed caret pairs reachable from the candidate carets.
    fn reduce(&mut self, mut stack: Vec<u32>) {
        while let Some(c) = stack.pop() {
            let node = self.nodes[c as usize];
            if node.partner == FREED || node.left == NIL {
                continue;
            }
            let (l, r) = (node.left, node.right);
            if !self.is_leaf(l) || !self.is_leaf(r) {
                continue;
            }
            let (pl, pr) = (
                self.nodes[l as usize].partner,
                self.nodes[r as usize].partner,
            );
            let m = self.nodes[pl as usize].parent;
            if m == NIL
                || self.nodes[pr as usize].parent != m
                || self.nodes[m as usize].left != pl
                || self.nodes[m as usize].right != pr
            {
                continue;
            }
            for v in [l, r, pl, pr] {
                self.release(v);
            }
            for (x, y) in [(c, m), (m, c)] {
                let n = &mut self.nodes[x as usize];
                n.left = NIL;
                n.right = NIL;
                n.partner = y;
            }
            for x in [c, m] {
                let parent = self.nodes[x as usize].parent;
                if parent != NIL {
                    stack.push(parent);
                }
            }
        }
    }

    fn preorder(&self, root: u32, out: &mut Vec<bool>) {
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let n = self.nodes[v as usize];
            if n.left == NIL {
                out.push(false);
            } else {
                out.push(true);
                stack.push(n.right);
                stack.push(n.left);
            }
        }
    }

    /// Preorder codes of the (domain, range) trees.
    pub fn shapes(&self) -> (Vec<bool>, Vec<bool>) {
        let mut d = Vec::new();
        let mut r = Vec::new();
        self.preorder(self.roots[DOMAIN], &mut d);
        self.preorder(self.roots[RANGE], &mut r);
        (d, r)
    }

    pub fn trees(&self) -> (Tree, Tree) {
        let (d, r) = self.shapes();
        (
            Tree::from_preorder(&d).expect("arena holds a valid tree"),
            Tree::from_preorder(&r).expect("arena holds a valid tree"),
        )
    }

    /// Number of carets in each tree of the reduced diagram.
    pub fn carets(&self) -> usize {
        let mut leaves = 0usize;
        let mut stack = vec![self.roots[DOMAIN]];
        while let Some(v) = stack.pop() {
            let n = self.nodes[v as usize];
            if n.left == NIL {
                leaves += 1;
            } else {
                stack.push(n.left);
                stack.push(n.right);
            }
        }
        leaves - 1
    }

    pub fn inverse(&self) -> TreePair {
        let mut t = self.clone();
        t.roots.swap(0, 1);
        t
    }

    pub(crate) fn encode(&self, w: &mut KeyWriter) {
        let (d, r) = self.shapes();
        for bits in [d, r] {
            w.uint(bits.len() as u64);
            for chunk in bits.chunks(8) {
                let mut b = 0u8;
                for (i, &x) in chunk.iter().enumerate() {
                    b |= u8::from(x) << i;
                }
                w.byte(b);
            }
        }
    }
}

impl PartialEq for TreePair {
    fn eq(&self, other: &Self) -> bool {
        self.shapes() == other.shapes()
    }
}

impl Eq for TreePair {}

impl Hash for TreePair {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.shapes().hash(state);
    }
}

impl fmt::Debug for TreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, r) = self.shapes();
        let show = |bits: &[bool]| -> String {
            bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
        };
        write!(f, "TreePair({} | {})", show(&d), show(&r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(word: &str) -> TreePair {
        let mut t = TreePair::identity();
        for c in word.chars() {
            let s = match c {
                'a' => 0,
                'A' => 1,
                'b' => 2,
                'B' => 3,
                _ => unreachable!(),
            };
            t.apply(Symbol::new(s));
        }
        t
    }

    #[test]
    fn generator_diagrams() {
        let a = eval("a");
        assert_eq!(a.carets(), 2);
        // x₀: domain (•,(•,•)), range ((•,•),•)
        let (d, r) = a.shapes();
        assert_eq!(d, vec![true, false, true, false, false]);
        assert_eq!(r, vec![true, true, false, false, false]);
        assert_eq!(eval("b").carets(), 3);
    }

    #[test]
    fn inverses_cancel() {
        for w in ["aA", "Aa", "bB", "Bb", "abBA", "BAab", "abABbaBA"] {
            assert!(eval(w).is_identity(), "{w}");
        }
        assert!(!eval("ab").is_identity());
        assert_eq!(eval("ab").inverse(), eval("BA"));
    }

    #[test]
    fn defining_relators() {
        // [ab⁻¹, a⁻¹ba] and [ab⁻¹, a⁻²ba²]
        let r1 = "aB".to_string() + "Aba" + "bA" + "ABa";
        let r2 = "aB".to_string() + "AAbaa" + "bA" + "AABaa";
        assert!(eval(&r1).is_identity(), "{:?}", eval(&r1));
        assert!(eval(&r2).is_identity(), "{:?}", eval(&r2));
    }

    #[test]
    fn from_shapes_reduces() {
        let t = TreePair::from_shapes(&[true, false, false], &[true, false, false]).unwrap();
        assert!(t.is_identity());
        assert!(TreePair::from_shapes(&[true, false, false], &[false]).is_err());
        assert!(Tree::from_preorder(&[true, false]).is_err());
        assert!(Tree::from_preorder(&[false, false]).is_err());
    }
}
