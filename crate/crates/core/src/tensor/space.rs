use crate::prelude::*;

/// Ordered list of subsystem dimensions; factor 0 is the leftmost slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertFactorization {
    factors: Vec<usize>,
    total: usize,
}

impl HilbertFactorization {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidArgument("subsystem dimensions must be positive".into()));
        }
        let total = factors.iter().product();
        Ok(Self { factors, total })
    }

    /// A single unfactorized space of dimension `dim`.
    pub fn flat(dim: usize) -> Self {
        Self { factors: vec![dim.max(1)], total: dim.max(1) }
    }

    /// `count` copies of a `dim`-dimensional carrier.
    pub fn uniform(dim: usize, count: usize) -> Self {
        let factors = vec![dim.max(1); count];
        let total = factors.iter().product();
        Self { factors, total }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Tensor product of two factorizations, `self` on the left.
    pub fn join(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { factors, total: self.total * other.total }
    }

    /// Factorization restricted to `keep` (in the given order).
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        let mut factors = Vec::with_capacity(keep.len());
        for &k in keep {
            factors.push(*self.factors.get(k).ok_or(Error::InvalidSubsystem { index: k, count: self.factors.len() })?);
        }
        Self::new(factors)
    }

    /// Row-major strides: the stride of the last factor is 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1];
        }
        strides
    }

    /// Per-factor digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            digits[i] = index % self.factors[i];
            index /= self.factors[i];
        }
        digits
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factors).fold(0, |acc, (&d, &f)| acc * f + d)
    }
}
