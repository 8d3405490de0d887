//! Wreath products `ℤ ≀ B` with the standard generating set: one lamp
//! generator (symbols 0, 1) followed by the generators of `B`.
//!
//! An element is a finitely supported lamp configuration `B → ℤ` and a
//! cursor in `B`. Right multiplication by the lamp generator changes the
//! lamp under the cursor; by a base generator it moves the cursor.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::words::Symbol;

use super::free::FreeElement;
use super::key::KeyWriter;

/// A base group for lamps: ordered, hashable, and acted on by its own
/// generator symbols on the right.
pub trait LampBase: Clone + Ord + Hash + Debug {
    /// Letters in the base group's alphabet.
    const ALPHABET_SIZE: usize;

    fn base_identity() -> Self;

    fn base_apply(&mut self, s: Symbol);

    fn encode_base(&self, w: &mut KeyWriter);
}

impl LampBase for i64 {
    const ALPHABET_SIZE: usize = 2;

    fn base_identity() -> Self {
        0
    }

    fn base_apply(&mut self, s: Symbol) {
        *self += s.sign();
    }

    fn encode_base(&self, w: &mut KeyWriter) {
        w.int(*self);
    }
}

impl LampBase for FreeElement {
    const ALPHABET_SIZE: usize = 4;

    fn base_identity() -> Self {
        FreeElement::identity(4)
    }

    fn base_apply(&mut self, s: Symbol) {
        self.apply(s);
    }

    fn encode_base(&self, w: &mut KeyWriter) {
        self.encode(w);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lamplighter<B: LampBase> {
    lamps: BTreeMap<B, i64>,
    cursor: B,
}

impl<B: LampBase> Lamplighter<B> {
    pub fn identity() -> Self {
        Lamplighter {
            lamps: BTreeMap::new(),
            cursor: B::base_identity(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.lamps.is_empty() && self.cursor == B::base_identity()
    }

    /// Nonzero lamps, sorted by base element.
    pub fn lamps(&self) -> &BTreeMap<B, i64> {
        &self.lamps
    }

    pub fn cursor(&self) -> &B {
        &self.cursor
    }

    pub fn from_parts(lamps: BTreeMap<B, i64>, cursor: B) -> Self {
        let lamps = lamps.into_iter().filter(|(_, v)| *v != 0).collect();
        Lamplighter { lamps, cursor }
    }

    pub fn apply(&mut self, s: Symbol) {
        if s.generator() == 0 {
            let entry = self.lamps.entry(self.cursor.clone()).or_insert(0);
            *entry += s.sign();
            if *entry == 0 {
                self.lamps.remove(&self.cursor);
            }
        } else {
            self.cursor.base_apply(Symbol::new(s.index() as u8 - 2));
        }
    }

    pub(crate) fn encode(&self, w: &mut KeyWriter) {
        w.uint(self.lamps.len() as u64);
        for (b, v) in &self.lamps {
            b.encode_base(w);
            w.int(*v);
        }
        self.cursor.encode_base(w);
    }
}

impl<B: LampBase> LampBase for Lamplighter<B> {
    const ALPHABET_SIZE: usize = 2 + B::ALPHABET_SIZE;

    fn base_identity() -> Self {
        Lamplighter::identity()
    }

    fn base_apply(&mut self, s: Symbol) {
        self.apply(s);
    }

    fn encode_base(&self, w: &mut KeyWriter) {
        self.encode(w);
    }
}
