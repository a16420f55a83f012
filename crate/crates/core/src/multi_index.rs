//! Multi-indices α ∈ ℕ^d: monomial exponents, degrees, factorials and the
//! canonical graded-lexicographic enumeration used everywhere in this crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of d nonnegative integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |α| = Σ αᵢ.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// α! = Π αᵢ! as an f64 (exact for the small degrees used here).
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).map(|k| k as f64).product::<f64>())
            .product()
    }

    /// Monomial x^α.
    pub fn monomial<S: crate::Scalar>(&self, x: &[S]) -> Result<S> {
        self.check_dim(x.len())?;
        let mut acc = S::one();
        for (&a, &xi) in self.0.iter().zip(x) {
            acc = acc * xi.powi(a as i32);
        }
        Ok(acc)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of total degree exactly `degree` in dimension `dim`,
/// in lexicographic order (first entry decreasing).
pub fn indices_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fill(dim, degree, 0, &mut current, &mut out);
    out
}

fn fill(dim: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(dim, remaining - a, pos + 1, current, out);
    }
}

/// All multi-indices with |α| ≤ max_degree in graded lexicographic order:
/// ascending by degree, lexicographic within each degree.
///
/// The count is C(max_degree + dim, dim).
pub fn indices_up_to(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree)
        .flat_map(|k| indices_of_degree(dim, k))
        .collect()
}

/// Binomial coefficient C(n, k) as usize.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
