//! Exact returns and cogrowth series, and the transforms between them.
//!
//! Counts are obtained by meeting in the middle: a word of length `n`
//! evaluating to the identity splits as `u·v` with `|u| = ⌈n/2⌉`, and the
//! number of such splittings is a sum over the sphere layer at radius
//! `⌈n/2⌉` of products of layer counts. Only layers up to `⌈L/2⌉` are ever
//! held in memory, two at a time.

mod fps;

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{CanonicalKey, GroupElement, GroupId};
use crate::words::Symbol;

pub use fps::Fps;

/// Default cap on the number of distinct elements in one layer.
pub const DEFAULT_LAYER_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    Returns,
    Cogrowth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    pub kind: SeriesKind,
    pub group: Option<GroupId>,
    /// Number of generators `k`; the transforms depend on it.
    pub rank: usize,
    pub coefficients: Vec<BigInt>,
}

impl Series {
    pub fn new(kind: SeriesKind, rank: usize, coefficients: Vec<BigInt>) -> Self {
        Series {
            kind,
            group: None,
            rank,
            coefficients,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, n: usize) -> Option<&BigInt> {
        self.coefficients.get(n)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coefficients.iter().all(|c| !c.is_negative())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,coefficient\n");
        for (n, c) in self.coefficients.iter().enumerate() {
            let _ = writeln!(out, "{n},{c}");
        }
        out
    }

    /// Parses `n,coefficient` rows (header and `#` comments allowed). Rows
    /// must be contiguous from `n = 0`.
    pub fn from_csv(text: &str, kind: SeriesKind, rank: usize) -> Result<Series> {
        let mut coefficients = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("n,") {
                continue;
            }
            let (n, c) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected `n,coefficient`, got `{line}`")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index `{n}`")))?;
            if n != coefficients.len() {
                return Err(Error::Parse(format!(
                    "series rows must be contiguous; expected n = {}, got {n}",
                    coefficients.len()
                )));
            }
            let c: BigInt = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{c}`")))?;
            coefficients.push(c);
        }
        Ok(Series::new(kind, rank, coefficients))
    }
}

/// Layer of the walk-count dynamic program: distinct elements with a count
/// per last letter (`counts[2k]` is used for "no letter yet").
struct Layer {
    index: HashMap<CanonicalKey, usize>,
    elements: Vec<GroupElement>,
    counts: Vec<Vec<u128>>,
}

impl Layer {
    fn origin(g: GroupId) -> Layer {
        let id = g.identity();
        let mut counts = vec![0u128; g.alphabet_size() + 1];
        counts[g.alphabet_size()] = 1;
        Layer {
            index: HashMap::from([(id.key(), 0)]),
            elements: vec![id],
            counts: vec![counts],
        }
    }

    fn total(&self, i: usize) -> u128 {
        self.counts[i].iter().sum()
    }
}

fn step_layer(g: GroupId, prev: &Layer, reduced: bool, budget: usize) -> Result<Layer> {
    let size = g.alphabet_size();
    let mut next = Layer {
        index: HashMap::new(),
        elements: Vec::new(),
        counts: Vec::new(),
    };
    for (i, x) in prev.elements.iter().enumerate() {
        let counts = &prev.counts[i];
        let total: u128 = counts.iter().sum();
        for t in 0..size {
            let sym = Symbol::new(t as u8);
            let weight = if reduced {
                total - counts[sym.inverse().index()]
            } else {
                total
            };
            if weight == 0 {
                continue;
            }
            let y = g.apply_gen(x, sym);
            let key = y.key();
            let slot = match next.index.get(&key) {
                Some(&j) => j,
                None => {
                    if next.elements.len() >= budget {
                        return Err(Error::BudgetExceeded(format!(
                            "layer holds more than {budget} elements"
                        )));
                    }
                    next.index.insert(key, next.elements.len());
                    next.elements.push(y);
                    next.counts.push(vec![0u128; size + 1]);
                    next.elements.len() - 1
                }
            };
            let c = &mut next.counts[slot][t];
            *c = c
                .checked_add(weight)
                .ok_or_else(|| Error::BudgetExceeded("walk count overflows u128".into()))?;
        }
    }
    Ok(next)
}

/// Number of ways to write the identity as (word of `long`) · (word of
/// `short`), where `short` is one layer below or equal to `long`.
fn meet(long: &Layer, short: &Layer, reduced: bool) -> BigInt {
    let mut acc = BigInt::zero();
    for (key, &i) in &long.index {
        let Some(&j) = short.index.get(key) else {
            continue;
        };
        let (a, b) = (&long.counts[i], &short.counts[j]);
        let mut term = BigInt::from(long.total(i)) * BigInt::from(short.total(j));
        if reduced {
            // the joint u·v⁻¹ must not cancel: last letters of u and of v⁻¹... differ
            for s in 0..a.len() - 1 {
                term -= BigInt::from(a[s]) * BigInt::from(b[s]);
            }
        }
        acc += term;
    }
    acc
}

fn count(g: GroupId, max_len: usize, reduced: bool, budget: usize) -> Result<Vec<BigInt>> {
    let mut out = vec![BigInt::zero(); max_len + 1];
    out[0] = BigInt::one();
    let mut prev = Layer::origin(g);
    let half = max_len.div_ceil(2);
    for j in 1..=half {
        let cur = step_layer(g, &prev, reduced, budget)?;
        if 2 * j - 1 <= max_len {
            out[2 * j - 1] = if j == 1 {
                // |v| = 0: words of length one equal to the identity
                cur.index
                    .get(&g.identity().key())
                    .map(|&i| BigInt::from(cur.total(i)))
                    .unwrap_or_default()
            } else {
                meet(&cur, &prev, reduced)
            };
        }
        if 2 * j <= max_len {
            out[2 * j] = meet(&cur, &cur, reduced);
        }
        prev = cur;
    }
    Ok(out)
}

/// Exact `r_n` for `n ≤ max_len`: words of length `n` equal to the identity.
pub fn count_returns(g: GroupId, max_len: usize) -> Result<Series> {
    count_returns_with_budget(g, max_len, DEFAULT_LAYER_BUDGET)
}

pub fn count_returns_with_budget(g: GroupId, max_len: usize, budget: usize) -> Result<Series> {
    Ok(Series {
        kind: SeriesKind::Returns,
        group: Some(g),
        rank: g.rank(),
        coefficients: count(g, max_len, false, budget)?,
    })
}

/// Exact `p_n` for `n ≤ max_len`: freely reduced words of length `n` equal
/// to the identity.
pub fn count_cogrowth(g: GroupId, max_len: usize) -> Result<Series> {
    count_cogrowth_with_budget(g, max_len, DEFAULT_LAYER_BUDGET)
}

pub fn count_cogrowth_with_budget(g: GroupId, max_len: usize, budget: usize) -> Result<Series> {
    Ok(Series {
        kind: SeriesKind::Cogrowth,
        group: Some(g),
        rank: g.rank(),
        coefficients: count(g, max_len, true, budget)?,
    })
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn integral(f: &Fps) -> Result<Vec<BigInt>> {
    f.to_integers().map_err(Error::NonIntegral)
}

/// `C(z) = (1 − z²)/(1 + (2k−1)z²) · R(z/(1 + (2k−1)z²))`.
pub fn cogrowth_from_returns(r: &Series) -> Result<Series> {
    if r.kind != SeriesKind::Returns {
        return Err(Error::InvalidArgument("expected a returns series".into()));
    }
    let len = r.len();
    if len == 0 {
        return Ok(Series::new(SeriesKind::Cogrowth, r.rank, vec![]));
    }
    let q = 2 * r.rank as i64 - 1;
    let denom = Fps::poly(&[(0, 1), (2, q)], len).inverse();
    let u = Fps::poly(&[(1, 1)], len).mul(&denom);
    let pre = Fps::poly(&[(0, 1), (2, -1)], len).mul(&denom);
    let returns = Fps::from_ints(r.coefficients.iter().cloned(), len);
    let c = pre.mul(&returns.compose(&u));
    Ok(Series {
        kind: SeriesKind::Cogrowth,
        group: r.group,
        rank: r.rank,
        coefficients: integral(&c)?,
    })
}

/// Inverse of [`cogrowth_from_returns`]: substitutes
/// `z ↦ (1 − √(1 − 4(2k−1)z²)) / (2(2k−1)z)` into `C` and multiplies by
/// `z'/(z(1 − z'²))` for that substitution `z'`; for two generators this
/// prefactor is `(2√(1 − 12z²) − 1)/(1 − 16z²)`.
pub fn returns_from_cogrowth(c: &Series) -> Result<Series> {
    if c.kind != SeriesKind::Cogrowth {
        return Err(Error::InvalidArgument("expected a cogrowth series".into()));
    }
    let len = c.len();
    if len == 0 {
        return Ok(Series::new(SeriesKind::Returns, c.rank, vec![]));
    }
    let q = 2 * c.rank as i64 - 1;
    // two extra terms survive the divisions by z
    let s = Fps::poly(&[(0, 1), (2, -4 * q)], len + 2).sqrt();
    let mut one_minus_s = Fps::zero(len + 2);
    for i in 0..len + 2 {
        let one = if i == 0 { BigRational::one() } else { BigRational::zero() };
        one_minus_s.coeffs[i] = one - &s.coeffs[i];
    }
    let sub = one_minus_s.shift_down().scale(&rational(2 * q).recip());
    let sub_over_z = sub.shift_down();
    let sub = sub.truncate(len);
    let one_minus_sub_sq = {
        let sq = sub.mul(&sub);
        let mut f = Fps::poly(&[(0, 1)], len);
        for i in 0..len {
            f.coeffs[i] -= &sq.coeffs[i];
        }
        f
    };
    let factor = sub_over_z.truncate(len).mul(&one_minus_sub_sq.inverse());
    let cogrowth = Fps::from_ints(c.coefficients.iter().cloned(), len);
    let r = factor.mul(&cogrowth.compose(&sub));
    Ok(Series {
        kind: SeriesKind::Returns,
        group: c.group,
        rank: c.rank,
        coefficients: integral(&r)?,
    })
}

/// Lower bound on the returns growth rate from a lower bound on the
/// cogrowth, for `k` generators: `(α² + 2k − 1)/α` when `α ≥ √(2k−1)`,
/// otherwise the branch-point value `2√(2k−1)`.
pub fn transfer_rho_k(alpha: f64, rank: usize) -> Result<f64> {
    let q = (2 * rank - 1) as f64;
    if !(alpha > 0.0 && alpha <= q) {
        return Err(Error::InvalidArgument(format!(
            "cogrowth {alpha} outside (0, {q}]"
        )));
    }
    if alpha >= q.sqrt() {
        Ok((alpha * alpha + q) / alpha)
    } else {
        Ok(2.0 * q.sqrt())
    }
}

/// [`transfer_rho_k`] for two generators: `(α² + 3)/α`, floored at `2√3`.
pub fn transfer_rho(alpha: f64) -> Result<f64> {
    transfer_rho_k(alpha, 2)
}
