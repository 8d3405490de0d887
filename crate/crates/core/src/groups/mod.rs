//! Canonical-form arithmetic for the groups in the roster.
//!
//! | CLI name   | group          | generators (in alphabet order)            |
//! |------------|----------------|-------------------------------------------|
//! | `f2`       | free group     | `a`, `b`                                  |
//! | `z2`       | `ℤ²`           | `a = (1,0)`, `b = (0,1)`                  |
//! | `bs:P:Q`   | `BS(P,Q)`      | `a`, `b = t` with `t aᴾ t⁻¹ = a^Q`        |
//! | `thompson` | Thompson's `F` | `a = x₀`, `b = x₁`                        |
//! | `zwrz`     | `ℤ ≀ ℤ`        | `a` lamp, `b` shift                       |
//! | `zwrf2`    | `ℤ ≀ F₂`       | `a` lamp, `s`, `t` free base              |
//! | `zwrzwrz`  | `ℤ ≀ (ℤ ≀ ℤ)`  | `a` lamp, `b` inner lamp, `c` inner shift |

mod bs;
mod free;
mod key;
mod thompson;
mod wreath;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Alphabet, Symbol, Word};

pub use bs::{BsElement, Exponent};
pub use free::FreeElement;
pub use key::CanonicalKey;
pub use key::KeyWriter;
pub use thompson::{Tree, TreePair};
pub use wreath::{LampBase, Lamplighter};

pub type LineLamplighter = Lamplighter<i64>;
pub type TreeLamplighter = Lamplighter<FreeElement>;
pub type NestedLamplighter = Lamplighter<Lamplighter<i64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupId {
    Free2,
    ZxZ,
    BaumslagSolitar { p: u32, q: u32 },
    ThompsonF,
    WreathZZ,
    WreathZF2,
    WreathZZZ,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Free2(FreeElement),
    ZxZ(i64, i64),
    BaumslagSolitar(BsElement),
    ThompsonF(TreePair),
    WreathZZ(LineLamplighter),
    WreathZF2(TreeLamplighter),
    WreathZZZ(NestedLamplighter),
}

impl GroupId {
    pub const ROSTER: [&'static str; 7] =
        ["f2", "z2", "bs:P:Q", "thompson", "zwrz", "zwrf2", "zwrzwrz"];

    pub fn alphabet(&self) -> Alphabet {
        match self {
            GroupId::WreathZF2 => Alphabet::new(&['a', 's', 't']).expect("valid names"),
            GroupId::WreathZZZ => Alphabet::new(&['a', 'b', 'c']).expect("valid names"),
            _ => Alphabet::two(),
        }
    }

    /// Number of generators `k`.
    pub fn rank(&self) -> usize {
        match self {
            GroupId::WreathZF2 | GroupId::WreathZZZ => 3,
            _ => 2,
        }
    }

    /// Alphabet size `2k`.
    pub fn alphabet_size(&self) -> usize {
        2 * self.rank()
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupId::Free2 => GroupElement::Free2(FreeElement::identity(4)),
            GroupId::ZxZ => GroupElement::ZxZ(0, 0),
            GroupId::BaumslagSolitar { p, q } => {
                GroupElement::BaumslagSolitar(BsElement::identity(p, q))
            }
            GroupId::ThompsonF => GroupElement::ThompsonF(TreePair::identity()),
            GroupId::WreathZZ => GroupElement::WreathZZ(Lamplighter::identity()),
            GroupId::WreathZF2 => GroupElement::WreathZF2(Lamplighter::identity()),
            GroupId::WreathZZZ => GroupElement::WreathZZZ(Lamplighter::identity()),
        }
    }

    /// `x · s` in canonical form.
    pub fn apply_gen(&self, x: &GroupElement, s: Symbol) -> GroupElement {
        debug_assert_eq!(x.group_tag(), self.tag());
        let mut y = x.clone();
        y.apply(s);
        y
    }

    /// Left-to-right product of the word's letters.
    pub fn evaluate(&self, w: &Word) -> GroupElement {
        let mut x = self.identity();
        for s in w.iter() {
            x.apply(s);
        }
        x
    }

    pub fn evaluate_str(&self, text: &str) -> Result<GroupElement> {
        Ok(self.evaluate(&self.alphabet().parse_word(text)?))
    }

    pub fn canonical_key(&self, x: &GroupElement) -> CanonicalKey {
        x.key()
    }

    fn tag(&self) -> u8 {
        match self {
            GroupId::Free2 => 0,
            GroupId::ZxZ => 1,
            GroupId::BaumslagSolitar { .. } => 2,
            GroupId::ThompsonF => 3,
            GroupId::WreathZZ => 4,
            GroupId::WreathZF2 => 5,
            GroupId::WreathZZZ => 6,
        }
    }

    /// Period of the adjacency matrices of truncated Cayley graphs: 1 when
    /// some relator has odd length, 2 when all have even length.
    pub fn classify_period(&self) -> u32 {
        match *self {
            GroupId::BaumslagSolitar { p, q } if (p + q) % 2 == 1 => 1,
            _ => 2,
        }
    }

    /// Defining relators as words, used by tests and diagnostics.
    pub fn relators(&self) -> Vec<String> {
        fn pow(c: char, n: u32) -> String {
            std::iter::repeat_n(c, n as usize).collect()
        }
        match *self {
            GroupId::Free2 => vec![],
            GroupId::ZxZ => vec!["abAB".into()],
            GroupId::BaumslagSolitar { p, q } => {
                vec![format!("b{}B{}", pow('a', p), pow('A', q))]
            }
            GroupId::ThompsonF => vec!["aBAbabAABa".into(), "aBAAbaabAAABaa".into()],
            GroupId::WreathZZ => vec!["abaBAbAB".into(), "abbaBBAbbABB".into()],
            GroupId::WreathZF2 => vec!["asaSAsAS".into(), "ataTAtAT".into(), "astaTSAstATS".into()],
            GroupId::WreathZZZ => vec![
                "bcbCBcBC".into(),
                "abaBAbAB".into(),
                "acaCAcAC".into(),
                "abcaCBAbcACB".into(),
            ],
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Free2 => write!(f, "f2"),
            GroupId::ZxZ => write!(f, "z2"),
            GroupId::BaumslagSolitar { p, q } => write!(f, "bs:{p}:{q}"),
            GroupId::ThompsonF => write!(f, "thompson"),
            GroupId::WreathZZ => write!(f, "zwrz"),
            GroupId::WreathZF2 => write!(f, "zwrf2"),
            GroupId::WreathZZZ => write!(f, "zwrzwrz"),
        }
    }
}

impl FromStr for GroupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let g = match s.trim().to_ascii_lowercase().as_str() {
            "f2" | "free2" => GroupId::Free2,
            "z2" | "zxz" => GroupId::ZxZ,
            "thompson" | "f" => GroupId::ThompsonF,
            "zwrz" => GroupId::WreathZZ,
            "zwrf2" => GroupId::WreathZF2,
            "zwrzwrz" => GroupId::WreathZZZ,
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                match parts.as_slice() {
                    ["bs", p, q] => {
                        let parse = |x: &str| -> Result<u32> {
                            x.parse::<u32>()
                                .ok()
                                .filter(|&v| (1..=1_000_000).contains(&v))
                                .ok_or_else(|| Error::UnknownGroup(s.to_string()))
                        };
                        GroupId::BaumslagSolitar {
                            p: parse(p)?,
                            q: parse(q)?,
                        }
                    }
                    _ => return Err(Error::UnknownGroup(s.to_string())),
                }
            }
        };
        Ok(g)
    }
}

impl TryFrom<String> for GroupId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupId> for String {
    fn from(g: GroupId) -> String {
        g.to_string()
    }
}

impl GroupElement {
    fn group_tag(&self) -> u8 {
        match self {
            GroupElement::Free2(_) => 0,
            GroupElement::ZxZ(..) => 1,
            GroupElement::BaumslagSolitar(_) => 2,
            GroupElement::ThompsonF(_) => 3,
            GroupElement::WreathZZ(_) => 4,
            GroupElement::WreathZF2(_) => 5,
            GroupElement::WreathZZZ(_) => 6,
        }
    }

    /// In-place right multiplication by a generator symbol.
    pub fn apply(&mut self, s: Symbol) {
        match self {
            GroupElement::Free2(x) => x.apply(s),
            GroupElement::ZxZ(x, y) => {
                if s.generator() == 0 {
                    *x += s.sign();
                } else {
                    *y += s.sign();
                }
            }
            GroupElement::BaumslagSolitar(x) => x.apply(s),
            GroupElement::ThompsonF(x) => x.apply(s),
            GroupElement::WreathZZ(x) => x.apply(s),
            GroupElement::WreathZF2(x) => x.apply(s),
            GroupElement::WreathZZZ(x) => x.apply(s),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Free2(x) => x.is_identity(),
            GroupElement::ZxZ(x, y) => *x == 0 && *y == 0,
            GroupElement::BaumslagSolitar(x) => x.is_identity(),
            GroupElement::ThompsonF(x) => x.is_identity(),
            GroupElement::WreathZZ(x) => x.is_identity(),
            GroupElement::WreathZF2(x) => x.is_identity(),
            GroupElement::WreathZZZ(x) => x.is_identity(),
        }
    }

    pub fn key(&self) -> CanonicalKey {
        let mut w = KeyWriter::new();
        w.byte(self.group_tag());
        match self {
            GroupElement::Free2(x) => x.encode(&mut w),
            GroupElement::ZxZ(x, y) => {
                w.int(*x);
                w.int(*y);
            }
            GroupElement::BaumslagSolitar(x) => x.encode(&mut w),
            GroupElement::ThompsonF(x) => x.encode(&mut w),
            GroupElement::WreathZZ(x) => x.encode(&mut w),
            GroupElement::WreathZF2(x) => x.encode(&mut w),
            GroupElement::WreathZZZ(x) => x.encode(&mut w),
        }
        w.finish()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Free2(x) => write!(f, "{}", Alphabet::two().format_word(x.word())),
            GroupElement::ZxZ(x, y) => write!(f, "({x}, {y})"),
            GroupElement::BaumslagSolitar(x) => write!(f, "{x:?}"),
            GroupElement::ThompsonF(x) => write!(f, "{x:?}"),
            GroupElement::WreathZZ(x) => write!(f, "{x:?}"),
            GroupElement::WreathZF2(x) => write!(f, "{x:?}"),
            GroupElement::WreathZZZ(x) => write!(f, "{x:?}"),
        }
    }
}
