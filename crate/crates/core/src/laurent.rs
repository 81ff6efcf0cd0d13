//! Finite Laurent polynomials in `z = e^{ix}`.

use num_complex::Complex64;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `sum_j coeffs[j] z^(min_power + j)`, trimmed of exact zeros at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    min_power: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn new(min_power: i64, coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { min_power, coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self {
            min_power: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn monomial(power: i64, c: Complex64) -> Self {
        Self::new(power, vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_power += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.min_power = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_power(&self) -> i64 {
        self.min_power
    }

    /// Highest power present; `min_power - 1` for the zero polynomial.
    pub fn max_power(&self) -> i64 {
        self.min_power + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, power: i64) -> Complex64 {
        let idx = power - self.min_power;
        if idx < 0 {
            return ZERO;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
    }

    /// `(power, coefficient)` pairs from lowest to highest power.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, c)| (self.min_power + j as i64, *c))
    }

    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        let horner = self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c);
        horner * z.powi(self.min_power as i32)
    }

    /// Value at `z = e^{ix}`.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.eval_z(Complex64::from_polar(1.0, x))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.min_power, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            min_power: self.min_power + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `-i d/dx`, i.e. `z d/dz`.
    pub fn momentum(&self) -> Self {
        Self::new(
            self.min_power,
            self.terms().map(|(p, c)| c * p as f64).collect(),
        )
    }

    /// Keeps only powers `<= max_power`.
    pub fn truncate_above(&self, max_power: i64) -> Self {
        if self.is_zero() || max_power >= self.max_power() {
            return self.clone();
        }
        if max_power < self.min_power {
            return Self::zero();
        }
        let keep = (max_power - self.min_power + 1) as usize;
        Self::new(self.min_power, self.coeffs[..keep].to_vec())
    }

    /// Keeps only powers in `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Self {
        if hi < lo {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(|p| self.coeff(p)).collect())
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Constant term of `self * other`, the mean of the product over a period.
    pub fn pairing(&self, other: &Self) -> Complex64 {
        self.terms().map(|(p, c)| c * other.coeff(-p)).sum()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.min_power.min(rhs.min_power);
        let hi = self.max_power().max(rhs.max_power());
        LaurentPoly::new(lo, (lo..=hi).map(|p| self.coeff(p) + rhs.coeff(p)).collect())
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.min_power + rhs.min_power, out)
    }
}

// On disk a polynomial is `[min_power, [re, im], [re, im], ...]`.
impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len() + 1))?;
        seq.serialize_element(&self.min_power)?;
        for c in &self.coeffs {
            seq.serialize_element(&[c.re, c.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LaurentPoly;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[min_power, [re, im], ...]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LaurentPoly, A::Error> {
                let min_power: i64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let mut coeffs = Vec::new();
                while let Some([re, im]) = seq.next_element::<[f64; 2]>()? {
                    coeffs.push(Complex64::new(re, im));
                }
                Ok(LaurentPoly::new(min_power, coeffs))
            }
        }
        d.deserialize_seq(V)
    }
}
