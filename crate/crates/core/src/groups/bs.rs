//! Baumslag–Solitar groups `BS(p, q) = ⟨a, t | t aᵖ t⁻¹ = a^q⟩`.
//!
//! Elements are kept in Britton normal form
//! `a^{m₀} t^{ε₁} a^{m₁} ⋯ t^{ε_r} a^{m_r}` where every exponent before a
//! `t` lies in `[0, q)` and every exponent before a `t⁻¹` lies in `[0, p)`,
//! and no pinch `t a^{pk} t⁻¹` or `t⁻¹ a^{qk} t` occurs.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::words::Symbol;

use super::key::KeyWriter;

/// Integer exponent with an `i64` fast path. Values that fit in `i64` are
/// always stored as `Small`, so derived equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Exponent {
    Small(i64),
    Big(BigInt),
}

impl Exponent {
    pub const ZERO: Exponent = Exponent::Small(0);

    fn from_big(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) => Exponent::Small(v),
            None => Exponent::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Exponent::Small(v) => BigInt::from(*v),
            Exponent::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Exponent::Small(0))
    }

    pub fn add_small(&self, d: i64) -> Exponent {
        match self {
            Exponent::Small(v) => match v.checked_add(d) {
                Some(s) => Exponent::Small(s),
                None => Exponent::Big(BigInt::from(*v) + d),
            },
            Exponent::Big(b) => Exponent::from_big(b + d),
        }
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Small(x), Exponent::Small(y)) => match x.checked_add(*y) {
                Some(s) => Exponent::Small(s),
                None => Exponent::Big(BigInt::from(*x) + y),
            },
            _ => Exponent::from_big(self.to_big() + other.to_big()),
        }
    }

    pub fn mul_small(&self, m: i64) -> Exponent {
        match self {
            Exponent::Small(v) => match v.checked_mul(m) {
                Some(s) => Exponent::Small(s),
                None => Exponent::Big(BigInt::from(*v) * m),
            },
            Exponent::Big(b) => Exponent::from_big(b * m),
        }
    }

    /// Euclidean division by a positive divisor: `(quotient, remainder)`
    /// with `0 ≤ remainder < d`.
    pub fn div_rem_euclid(&self, d: i64) -> (Exponent, i64) {
        debug_assert!(d > 0);
        match self {
            Exponent::Small(v) => (Exponent::Small(v.div_euclid(d)), v.rem_euclid(d)),
            Exponent::Big(b) => {
                let (quo, rem) = b.div_mod_floor(&BigInt::from(d));
                (
                    Exponent::from_big(quo),
                    rem.to_i64().expect("remainder below divisor"),
                )
            }
        }
    }

    pub fn is_multiple_of(&self, d: i64) -> bool {
        match self {
            Exponent::Small(v) => v.rem_euclid(d) == 0,
            Exponent::Big(b) => (b % d).is_zero(),
        }
    }

    pub fn unsigned_abs_big(&self) -> BigInt {
        match self {
            Exponent::Small(v) => BigInt::from(v.unsigned_abs()),
            Exponent::Big(b) => b.magnitude().clone().into(),
        }
    }

    pub(crate) fn encode(&self, w: &mut KeyWriter) {
        match self {
            Exponent::Small(v) => {
                w.byte(0);
                w.int(*v);
            }
            Exponent::Big(b) => {
                w.byte(1);
                w.bytes(&b.to_signed_bytes_le());
            }
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Small(v) => write!(f, "{v}"),
            Exponent::Big(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BsElement {
    p: u32,
    q: u32,
    /// `(m_i, ε_{i+1})` pairs in order.
    prefix: Vec<(Exponent, i8)>,
    tail: Exponent,
}

impl BsElement {
    pub fn identity(p: u32, q: u32) -> Self {
        assert!(p >= 1 && q >= 1, "BS(p, q) needs p, q ≥ 1");
        BsElement {
            p,
            q,
            prefix: Vec::new(),
            tail: Exponent::ZERO,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.prefix.is_empty() && self.tail.is_zero()
    }

    /// Number of `t`-letters in the normal form.
    pub fn t_length(&self) -> usize {
        self.prefix.len()
    }

    pub fn syllables(&self) -> impl Iterator<Item = (&Exponent, i8)> {
        self.prefix.iter().map(|(m, e)| (m, *e))
    }

    pub fn tail(&self) -> &Exponent {
        &self.tail
    }

    /// Right multiplication by a generator: symbol 0/1 is `a^{±1}`,
    /// symbol 2/3 is `t^{±1}`.
    pub fn apply(&mut self, s: Symbol) {
        match s.generator() {
            0 => self.tail = self.tail.add_small(s.sign()),
            1 => self.mul_t(s.sign() as i8),
            g => panic!("BS(p, q) has two generators, got generator {g}"),
        }
    }

    fn mul_t(&mut self, eps: i8) {
        let (p, q) = (self.p as i64, self.q as i64);
        if let Some(&(_, last)) = self.prefix.last() {
            if last == -eps {
                // t a^{pk} t⁻¹ = a^{qk}  and  t⁻¹ a^{qk} t = a^{pk}
                let (divisor, image) = if last == 1 { (p, q) } else { (q, p) };
                if self.tail.is_multiple_of(divisor) {
                    let (k, _) = self.tail.div_rem_euclid(divisor);
                    let (m, _) = self.prefix.pop().expect("checked non-empty");
                    self.tail = m.add(&k.mul_small(image));
                    return;
                }
            }
        }
        // a^{qk} t = t a^{pk}  and  a^{pk} t⁻¹ = t⁻¹ a^{qk}
        let (divisor, image) = if eps == 1 { (q, p) } else { (p, q) };
        let (k, rem) = self.tail.div_rem_euclid(divisor);
        self.prefix.push((Exponent::Small(rem), eps));
        self.tail = k.mul_small(image);
    }

    pub(crate) fn encode(&self, w: &mut KeyWriter) {
        w.uint(self.prefix.len() as u64);
        for (m, e) in &self.prefix {
            w.byte(if *e == 1 { b'+' } else { b'-' });
            m.encode(w);
        }
        self.tail.encode(w);
    }
}

impl fmt::Debug for BsElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, e) in &self.prefix {
            if !m.is_zero() {
                write!(f, "a^{m:?} ")?;
            }
            write!(f, "{} ", if *e == 1 { "t" } else { "T" })?;
        }
        write!(f, "a^{:?}", self.tail)
    }
}
