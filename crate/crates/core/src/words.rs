//! Generator symbols, bit-packed words and free reduction.
//!
//! Symbols are indices into an alphabet of `2k` letters ordered
//! `a, a⁻¹, b, b⁻¹, …`: generator `i` is index `2i`, its inverse `2i + 1`.
//! This order is also the neighbour-expansion order of every breadth-first
//! search in the crate.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A letter of the alphabet, i.e. a generator or the inverse of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub const fn new(index: u8) -> Self {
        Symbol(index)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// The formal inverse. Flips the low bit, so it is an involution with no
    /// fixed points.
    pub const fn inverse(self) -> Self {
        Symbol(self.0 ^ 1)
    }

    /// Generator number (0 for `a`, 1 for `b`, …).
    pub const fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub const fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// `+1` for a generator, `-1` for an inverse.
    pub const fn sign(self) -> i64 {
        if self.0 & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from the lowercase generator letters; inverses are
    /// written in uppercase.
    pub fn new(generators: &[char]) -> Result<Self> {
        if generators.is_empty() || generators.len() > 127 {
            return Err(Error::InvalidArgument(format!(
                "alphabet needs between 1 and 127 generators, got {}",
                generators.len()
            )));
        }
        for (i, c) in generators.iter().enumerate() {
            if !c.is_ascii_lowercase() {
                return Err(Error::InvalidArgument(format!(
                    "generator name `{c}` must be a lowercase ASCII letter"
                )));
            }
            if generators[..i].contains(c) {
                return Err(Error::InvalidArgument(format!("duplicate generator `{c}`")));
            }
        }
        Ok(Alphabet {
            names: generators.to_vec(),
        })
    }

    /// The two-letter alphabet `a, A, b, B`.
    pub fn two() -> Self {
        Alphabet {
            names: vec!['a', 'b'],
        }
    }

    /// Number of generators `k`.
    pub fn rank(&self) -> usize {
        self.names.len()
    }

    /// Number of letters `2k`.
    pub fn size(&self) -> usize {
        2 * self.names.len()
    }

    /// Bits per packed symbol, `⌈log₂(2k)⌉`.
    pub fn bits_per_symbol(&self) -> u32 {
        bits_for(self.size())
    }

    pub fn symbol(&self, index: usize) -> Result<Symbol> {
        if index < self.size() {
            Ok(Symbol(index as u8))
        } else {
            Err(Error::SymbolOutOfRange {
                index,
                size: self.size(),
            })
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.size()).map(|i| Symbol(i as u8))
    }

    pub fn inverse_symbol(&self, index: usize) -> Result<usize> {
        self.symbol(index).map(|s| s.inverse().index())
    }

    pub fn name(&self, s: Symbol) -> char {
        let c = self.names[s.generator()];
        if s.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn parse_symbol(&self, c: char) -> Result<Symbol> {
        let lower = c.to_ascii_lowercase();
        let g = self
            .names
            .iter()
            .position(|&n| n == lower)
            .ok_or_else(|| Error::InvalidWord(format!("unknown letter `{c}`")))?;
        Ok(Symbol((2 * g + usize::from(c.is_ascii_uppercase())) as u8))
    }

    /// Parses the canonical ASCII form, e.g. `"abAB"`. The empty string is
    /// the empty word; whitespace is rejected.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut w = Word::with_alphabet_size(self.size());
        for c in text.chars() {
            w.push(self.parse_symbol(c)?);
        }
        Ok(w)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.iter().map(|s| self.name(s)).collect()
    }
}

fn bits_for(size: usize) -> u32 {
    debug_assert!(size >= 2);
    usize::BITS - (size - 1).leading_zeros()
}

/// A word over a `2k`-letter alphabet, packed at `⌈log₂(2k)⌉` bits per
/// symbol (2 bits for two generators).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    blocks: Vec<u64>,
    len: usize,
    bits: u32,
}

impl Word {
    pub fn with_alphabet_size(size: usize) -> Self {
        Word {
            blocks: Vec::new(),
            len: 0,
            bits: bits_for(size.max(2)),
        }
    }

    pub fn empty(alphabet: &Alphabet) -> Self {
        Self::with_alphabet_size(alphabet.size())
    }

    pub fn from_symbols(alphabet: &Alphabet, symbols: &[Symbol]) -> Result<Self> {
        let mut w = Self::empty(alphabet);
        for &s in symbols {
            alphabet.symbol(s.index())?;
            w.push(s);
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    fn per_block(&self) -> usize {
        (64 / self.bits) as usize
    }

    pub fn get(&self, i: usize) -> Option<Symbol> {
        if i >= self.len {
            return None;
        }
        let per = self.per_block();
        let shift = (i % per) as u32 * self.bits;
        let mask = (1u64 << self.bits) - 1;
        Some(Symbol(((self.blocks[i / per] >> shift) & mask) as u8))
    }

    pub fn last(&self) -> Option<Symbol> {
        self.len.checked_sub(1).and_then(|i| self.get(i))
    }

    pub fn push(&mut self, s: Symbol) {
        let per = self.per_block();
        let (block, slot) = (self.len / per, self.len % per);
        if block == self.blocks.len() {
            self.blocks.push(0);
        }
        self.blocks[block] |= (s.0 as u64) << (slot as u32 * self.bits);
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<Symbol> {
        let s = self.last()?;
        let per = self.per_block();
        self.len -= 1;
        let (block, slot) = (self.len / per, self.len % per);
        self.blocks[block] &= !(((1u64 << self.bits) - 1) << (slot as u32 * self.bits));
        if slot == 0 {
            self.blocks.pop();
        }
        Some(s)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Symbol> + ExactSizeIterator + '_ {
        (0..self.len).map(move |i| self.get(i).expect("index below len"))
    }

    pub fn to_symbols(&self) -> Vec<Symbol> {
        self.iter().collect()
    }

    /// Formal inverse: reversed, each letter inverted.
    pub fn inverse(&self) -> Word {
        let mut w = Word {
            blocks: Vec::with_capacity(self.blocks.len()),
            len: 0,
            bits: self.bits,
        };
        for s in self.iter().rev() {
            w.push(s.inverse());
        }
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in other.iter() {
            w.push(s);
        }
        w
    }

    /// Full free reduction with a single stack pass.
    pub fn free_reduce(&self) -> Word {
        let mut out = Word {
            blocks: Vec::with_capacity(self.blocks.len()),
            len: 0,
            bits: self.bits,
        };
        for s in self.iter() {
            if out.last() == Some(s.inverse()) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        out
    }

    /// No letter is immediately followed by its inverse.
    pub fn is_freely_reduced(&self) -> bool {
        let mut prev: Option<Symbol> = None;
        for s in self.iter() {
            if prev == Some(s.inverse()) {
                return false;
            }
            prev = Some(s);
        }
        true
    }

    /// Appends one letter drawn uniformly from the `alphabet_size` letters.
    /// No reduction is applied.
    pub fn grow_random<R: Rng + ?Sized>(&mut self, alphabet_size: usize, rng: &mut R) -> Symbol {
        let s = random_symbol(alphabet_size, rng);
        self.push(s);
        s
    }

    /// Little-endian packed bytes: symbol `i` occupies bits
    /// `[i·w, (i+1)·w)` of the byte stream, `w` the symbol width.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let total_bits = self.len * self.bits as usize;
        let mut out = vec![0u8; total_bits.div_ceil(8)];
        for (i, s) in self.iter().enumerate() {
            let mut bit = i * self.bits as usize;
            for b in 0..self.bits {
                if (s.0 >> b) & 1 == 1 {
                    out[bit / 8] |= 1 << (bit % 8);
                }
                bit += 1;
            }
        }
        out
    }

    /// Inverse of [`Word::to_packed_bytes`]. Rejects short input, symbols
    /// outside the alphabet and nonzero padding bits.
    pub fn from_packed_bytes(bytes: &[u8], len: usize, alphabet_size: usize) -> Result<Word> {
        if alphabet_size < 2 || alphabet_size > 254 || alphabet_size % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "bad alphabet size {alphabet_size}"
            )));
        }
        let mut w = Word::with_alphabet_size(alphabet_size);
        let bits = w.bits as usize;
        let needed = len
            .checked_mul(bits)
            .ok_or_else(|| Error::Parse("packed word length overflows".into()))?
            .div_ceil(8);
        if bytes.len() != needed {
            return Err(Error::Parse(format!(
                "packed word of {len} symbols needs {needed} bytes, got {}",
                bytes.len()
            )));
        }
        for i in 0..len {
            let mut v = 0u8;
            for b in 0..bits {
                let bit = i * bits + b;
                if (bytes[bit / 8] >> (bit % 8)) & 1 == 1 {
                    v |= 1 << b;
                }
            }
            if v as usize >= alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    index: v as usize,
                    size: alphabet_size,
                });
            }
            w.push(Symbol(v));
        }
        let used = len * bits;
        if used % 8 != 0 && bytes[used / 8] >> (used % 8) != 0 {
            return Err(Error::Parse("nonzero padding bits".into()));
        }
        Ok(w)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[")?;
        for s in self.iter() {
            write!(f, "{}", s.0)?;
        }
        write!(f, "]")
    }
}

pub fn random_symbol<R: Rng + ?Sized>(alphabet_size: usize, rng: &mut R) -> Symbol {
    Symbol(rng.gen_range(0..alphabet_size) as u8)
}

/// Deterministic per-worker random stream.
pub fn rng_stream(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
