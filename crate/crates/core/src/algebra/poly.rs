use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::word::Word;

/// Coefficients below this magnitude are dropped.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// A finite linear combination of words with complex coefficients.
///
/// Terms are kept in the canonical word order and zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Word, Complex64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(Word::unit(), c)
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn monomial(word: Word, coeff: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(word, coeff);
        p
    }

    pub fn word(word: Word) -> Self {
        Self::monomial(word, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Complex64)>) -> Self {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    /// Adds `coeff · word`, pruning the term if it cancels.
    pub fn add_term(&mut self, word: Word, coeff: Complex64) {
        match self.terms.entry(word) {
            btree_map::Entry::Vacant(slot) => {
                if coeff.norm() >= ZERO_TOLERANCE {
                    slot.insert(coeff);
                }
            }
            btree_map::Entry::Occupied(mut slot) => {
                let sum = *slot.get() + coeff;
                if sum.norm() < ZERO_TOLERANCE {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn coefficient(&self, word: &Word) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::degree).max().unwrap_or(0)
    }

    /// Leading (largest) word in the canonical order.
    pub fn leading_word(&self) -> Option<&Word> {
        self.terms.keys().next_back()
    }

    /// If the polynomial is `1·w` for a single word, returns that word.
    pub fn as_word(&self) -> Option<&Word> {
        match self.terms.iter().next() {
            Some((w, c)) if self.terms.len() == 1 && (*c - 1.0).norm() < ZERO_TOLERANCE => Some(w),
            _ => None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, v)| (w.clone(), v * c)))
    }

    /// Involution: conjugate coefficients and take word adjoints.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.adjoint(), c.conj())))
    }

    /// Concatenation product, extended bilinearly. No rewriting is applied.
    pub fn mul(&self, other: &Polynomial) -> Self {
        let mut out = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// True when every coefficient has zero imaginary part.
    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() < ZERO_TOLERANCE)
    }

    /// Max-norm distance between coefficient vectors.
    pub fn distance(&self, other: &Polynomial) -> f64 {
        let diff = self - other;
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Polynomial, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> PolynomialDisplay<'a> {
        PolynomialDisplay { poly: self, names }
    }
}

impl From<Word> for Polynomial {
    fn from(word: Word) -> Self {
        Self::word(word)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -*c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

pub struct PolynomialDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

/// Prints in the problem-file grammar, so the output parses back to the
/// same polynomial. Real coefficients use the shortest round-trip form.
impl fmt::Display for PolynomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (word, c)) in self.poly.terms().enumerate() {
            let (negative, coeff) = if c.im == 0.0 && c.re < 0.0 {
                (true, -*c)
            } else {
                (false, *c)
            };
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let unit_coeff = coeff.im == 0.0 && coeff.re == 1.0;
            if !unit_coeff || word.is_unit() {
                if coeff.im == 0.0 {
                    write!(f, "{:?}", coeff.re)?;
                } else if coeff.re == 0.0 {
                    write!(f, "{:?}i", coeff.im)?;
                } else if coeff.im < 0.0 {
                    write!(f, "({:?} - {:?}i)", coeff.re, -coeff.im)?;
                } else {
                    write!(f, "({:?} + {:?}i)", coeff.re, coeff.im)?;
                }
                if !word.is_unit() {
                    f.write_str("*")?;
                }
            }
            if !word.is_unit() {
                write!(f, "{}", word.display(self.names))?;
            }
        }
        Ok(())
    }
}
