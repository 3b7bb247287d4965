use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Default cap on the total complex dimension `sum_j n_j^2`.
pub const DEFAULT_DIM_CAP: usize = 64;

/// One summand `M_{n}(C)` of a direct sum, with its trace weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub dim: usize,
    pub weight: Rational,
}

/// A finite direct sum of full matrix algebras `M_{n_1} ⊕ ... ⊕ M_{n_J}` with the
/// faithful tracial state `τ = Σ_j β_j tr_{n_j}` (normalized block traces).
///
/// Weights are exact rationals summing to one.
#[derive(Clone, Debug)]
pub struct TracialAlgebra {
    blocks: Vec<Block>,
    weights: Vec<f64>,
}

// The f64 weights are derived from the rationals, so equality is on blocks only.
impl PartialEq for TracialAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks
    }
}

impl Eq for TracialAlgebra {}

impl TracialAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Arc<Self>> {
        Self::with_cap(blocks, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(blocks: Vec<Block>, cap: usize) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("at least one block is required".into()));
        }
        let mut total = Rational::zero();
        for (j, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::InvalidAlgebra(format!("block {j} has dimension 0")));
            }
            if b.weight <= Rational::zero() {
                return Err(Error::InvalidAlgebra(format!(
                    "block {j} has non-positive weight {}",
                    b.weight
                )));
            }
            total += b.weight;
        }
        if total != Rational::from_integer(1) {
            return Err(Error::InvalidAlgebra(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let dim: usize = blocks.iter().map(|b| b.dim * b.dim).sum();
        if dim > cap {
            return Err(Error::TooLarge(format!(
                "total dimension {dim} exceeds the cap {cap}"
            )));
        }
        let weights = blocks
            .iter()
            .map(|b| b.weight.to_f64().unwrap_or(f64::NAN))
            .collect();
        Ok(Arc::new(Self { blocks, weights }))
    }

    /// The full matrix algebra `M_n(C)` with its normalized trace.
    pub fn matrix(n: usize) -> Result<Arc<Self>> {
        Self::new(vec![Block {
            dim: n,
            weight: Rational::from_integer(1),
        }])
    }

    /// Convenience constructor from `(dim, numer, denom)` triples.
    pub fn from_parts(parts: &[(usize, i64, i64)]) -> Result<Arc<Self>> {
        let mut blocks = Vec::with_capacity(parts.len());
        for &(dim, p, q) in parts {
            if q == 0 {
                return Err(Error::InvalidAlgebra("zero denominator".into()));
            }
            blocks.push(Block {
                dim,
                weight: Rational::new(p, q),
            });
        }
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self, j: usize) -> usize {
        self.blocks[j].dim
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// Complex dimension `Σ n_j²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Dimension of `M^n` as a real inner-product space.
    pub fn real_dim(&self, arity: usize) -> usize {
        2 * arity * self.dim()
    }

    pub fn is_factor(&self) -> bool {
        self.blocks.len() == 1
    }
}

impl fmt::Display for TracialAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, b) in self.blocks.iter().enumerate() {
            if j > 0 {
                write!(f, " ⊕ ")?;
            }
            write!(f, "{}·M{}", b.weight, b.dim)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(TracialAlgebra::from_parts(&[(1, 1, 2), (2, 1, 3)]).is_err());
        assert!(TracialAlgebra::from_parts(&[(1, 0, 1), (2, 1, 1)]).is_err());
        assert!(TracialAlgebra::from_parts(&[(0, 1, 1)]).is_err());
        assert!(TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).is_ok());
    }

    #[test]
    fn dimension_cap() {
        assert!(TracialAlgebra::matrix(8).is_ok());
        assert!(matches!(TracialAlgebra::matrix(9), Err(Error::TooLarge(_))));
        assert!(TracialAlgebra::with_cap(
            vec![Block { dim: 9, weight: Rational::from_integer(1) }],
            81
        )
        .is_ok());
    }

    #[test]
    fn dims() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).unwrap();
        assert_eq!(a.dim(), 5);
        assert_eq!(a.real_dim(2), 20);
        assert!(!a.is_factor());
        assert_eq!(a.to_string(), "1/3·M1 ⊕ 2/3·M2");
    }
}
