//! Truncated formal power series over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fps {
    pub coeffs: Vec<BigRational>,
}

impl Fps {
    pub fn zero(len: usize) -> Self {
        Fps {
            coeffs: vec![BigRational::zero(); len],
        }
    }

    pub fn from_ints<I: IntoIterator<Item = BigInt>>(it: I, len: usize) -> Self {
        let mut f = Fps::zero(len);
        for (i, c) in it.into_iter().take(len).enumerate() {
            f.coeffs[i] = BigRational::from_integer(c);
        }
        f
    }

    /// Sparse constructor from `(power, integer coefficient)` terms.
    pub fn poly(terms: &[(usize, i64)], len: usize) -> Self {
        let mut f = Fps::zero(len);
        for &(i, c) in terms {
            if i < len {
                f.coeffs[i] += BigRational::from_integer(c.into());
            }
        }
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mul(&self, other: &Fps) -> Fps {
        let len = self.len().min(other.len());
        let mut out = Fps::zero(len);
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Fps {
        Fps {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Fps {
        let len = self.len();
        let c0 = &self.coeffs[0];
        assert!(!c0.is_zero(), "series inverse needs a nonzero constant term");
        let inv0 = c0.recip();
        let mut out = Fps::zero(len);
        out.coeffs[0] = inv0.clone();
        for n in 1..len {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out.coeffs[n - k];
                }
            }
            out.coeffs[n] = -acc * &inv0;
        }
        out
    }

    /// Square root of a series with constant term 1.
    pub fn sqrt(&self) -> Fps {
        let len = self.len();
        assert!(self.coeffs[0].is_one(), "series square root needs constant term 1");
        let mut out = Fps::zero(len);
        out.coeffs[0] = BigRational::one();
        let two = BigRational::from_integer(2.into());
        for n in 1..len {
            // 2·s₀·sₙ + Σ_{0<k<n} s_k s_{n−k} = fₙ
            let mut acc = self.coeffs[n].clone();
            for k in 1..n {
                acc -= &out.coeffs[k] * &out.coeffs[n - k];
            }
            out.coeffs[n] = acc / &two;
        }
        out
    }

    /// `self(inner(z))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Fps) -> Fps {
        let len = self.len().min(inner.len());
        assert!(inner.coeffs[0].is_zero(), "composition needs inner(0) = 0");
        let mut out = Fps::zero(len);
        let mut power = Fps::poly(&[(0, 1)], len);
        for k in 0..len {
            if !self.coeffs[k].is_zero() {
                for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    if !p.is_zero() {
                        *o += &self.coeffs[k] * p;
                    }
                }
            }
            power = power.mul(inner);
        }
        out
    }

    /// `self / z`, dropping the (zero) constant term and shortening by one.
    pub fn shift_down(&self) -> Fps {
        assert!(self.coeffs[0].is_zero(), "shift_down needs a zero constant term");
        Fps {
            coeffs: self.coeffs[1..].to_vec(),
        }
    }

    pub fn truncate(mut self, len: usize) -> Fps {
        self.coeffs.truncate(len);
        self
    }

    /// Integer coefficients, or the index of the first non-integral one.
    pub fn to_integers(&self) -> Result<Vec<BigInt>, usize> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if c.is_integer() { Ok(c.to_integer()) } else { Err(i) })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(f: &Fps) -> Vec<i64> {
        f.to_integers()
            .unwrap()
            .iter()
            .map(|c| i64::try_from(c).unwrap())
            .collect()
    }

    #[test]
    fn geometric_inverse() {
        let f = Fps::poly(&[(0, 1), (1, -1)], 6);
        assert_eq!(ints(&f.inverse()), vec![1; 6]);
    }

    #[test]
    fn catalan_from_sqrt() {
        // (1 − √(1 − 4z)) / 2 = Σ C_{n−1} zⁿ
        let s = Fps::poly(&[(0, 1), (1, -4)], 8).sqrt();
        let one_minus = Fps::poly(&[(0, 1)], 8);
        let mut c = Fps::zero(8);
        for i in 0..8 {
            c.coeffs[i] = (&one_minus.coeffs[i] - &s.coeffs[i]) / BigRational::from_integer(2.into());
        }
        assert_eq!(ints(&c), vec![0, 1, 1, 2, 5, 14, 42, 132]);
    }

    #[test]
    fn compose_with_geometric() {
        // 1/(1 − u) with u = z/(1 − z) gives (1 − z)/(1 − 2z) = 1, 1, 2, 4, 8, …
        let outer = Fps::poly(&[(0, 1), (1, -1)], 7).inverse();
        let inner = Fps::poly(&[(1, 1)], 7).mul(&Fps::poly(&[(0, 1), (1, -1)], 7).inverse());
        assert_eq!(ints(&outer.compose(&inner)), vec![1, 1, 2, 4, 8, 16, 32]);
    }
}
