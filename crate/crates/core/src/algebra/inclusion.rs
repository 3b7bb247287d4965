use std::sync::Arc;

use num_traits::Zero;

use super::{Element, Subalgebra, TracialAlgebra};
use crate::error::{Error, Result};
use crate::{Mat, Rational};

/// A unital trace-preserving embedding `ι: A → M` of finite-dimensional
/// algebras, described by its multiplicity matrix `k(i, j)`: ambient block
/// `j` holds `k(i, j)` copies of sub block `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inclusion {
    sub: Arc<TracialAlgebra>,
    amb: Arc<TracialAlgebra>,
    mult: Vec<Vec<u32>>,
}

impl Inclusion {
    /// Validates the column fit `Σ_i k(i,j) m_i = n_j` and trace
    /// compatibility `Σ_j k(i,j) β_j / n_j = α_i / m_i` in exact arithmetic.
    pub fn new(
        sub: Arc<TracialAlgebra>,
        amb: Arc<TracialAlgebra>,
        mult: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let ni = sub.num_blocks();
        let nj = amb.num_blocks();
        if mult.len() != ni || mult.iter().any(|row| row.len() != nj) {
            return Err(Error::InvalidInclusion(format!(
                "multiplicity matrix must be {ni}x{nj}"
            )));
        }
        for j in 0..nj {
            let fill: usize = (0..ni).map(|i| mult[i][j] as usize * sub.block_dim(i)).sum();
            if fill != amb.block_dim(j) {
                return Err(Error::InvalidInclusion(format!(
                    "column {j}: Σ_i k(i,j) m_i = {fill} but n_j = {}",
                    amb.block_dim(j)
                )));
            }
        }
        let ratio = |alg: &TracialAlgebra, b: usize| {
            alg.blocks()[b].weight / Rational::from_integer(alg.block_dim(b) as i64)
        };
        for i in 0..ni {
            let lhs = (0..nj).fold(Rational::zero(), |acc, j| {
                acc + ratio(&amb, j) * Rational::from_integer(mult[i][j] as i64)
            });
            let rhs = ratio(&sub, i);
            if lhs != rhs {
                return Err(Error::InvalidInclusion(format!(
                    "row {i}: Σ_j k(i,j) β_j/n_j = {lhs} but α_i/m_i = {rhs}{}",
                    if swapped_variant_holds(&sub, &amb, &mult) {
                        " (the data satisfy only the index-swapped relation, which is not a valid trace condition)"
                    } else {
                        ""
                    }
                )));
            }
        }
        Ok(Self { sub, amb, mult })
    }

    pub fn sub(&self) -> &Arc<TracialAlgebra> {
        &self.sub
    }

    pub fn amb(&self) -> &Arc<TracialAlgebra> {
        &self.amb
    }

    pub fn mult(&self) -> &[Vec<u32>] {
        &self.mult
    }

    pub fn k(&self, i: usize, j: usize) -> u32 {
        self.mult[i][j]
    }

    /// Ambient block `j` is `diag(a_1 ⊗ 1_{k(1,j)}, ..., a_I ⊗ 1_{k(I,j)})`,
    /// with blocks laid out in order `i = 1..I`.
    pub fn embed(&self, a: &Element) -> Result<Element> {
        if **a.algebra() != *self.sub {
            return Err(Error::Shape("element does not belong to the subalgebra".into()));
        }
        let blocks = (0..self.amb.num_blocks())
            .map(|j| {
                let n = self.amb.block_dim(j);
                let mut m = Mat::zeros(n, n);
                let mut off = 0;
                for i in 0..self.sub.num_blocks() {
                    let mi = self.sub.block_dim(i);
                    for _ in 0..self.mult[i][j] {
                        m.view_mut((off, off), (mi, mi)).copy_from(a.block(i));
                        off += mi;
                    }
                }
                m
            })
            .collect();
        Element::from_blocks(&self.amb, blocks)
    }

    /// Images of the matrix units of the subalgebra.
    pub fn image_spanning_set(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.sub.dim());
        for (i, b) in self.sub.blocks().iter().enumerate() {
            for r in 0..b.dim {
                for c in 0..b.dim {
                    let e = Element::matrix_unit(&self.sub, i, r, c);
                    out.push(self.embed(&e).expect("same algebra"));
                }
            }
        }
        out
    }

    /// `ι(A)` as a subalgebra of the ambient algebra.
    pub fn image(&self) -> Subalgebra {
        Subalgebra::span_unchecked(&self.amb, &self.image_spanning_set())
    }
}

/// The relation `Σ_j k(i,j) α_j / n_j = β_i / m_i` with sub and ambient
/// weights exchanged. It is only reported in diagnostics, never accepted.
fn swapped_variant_holds(sub: &TracialAlgebra, amb: &TracialAlgebra, mult: &[Vec<u32>]) -> bool {
    let (ni, nj) = (sub.num_blocks(), amb.num_blocks());
    if ni != nj {
        return false;
    }
    (0..ni).all(|i| {
        let lhs = (0..nj).fold(Rational::zero(), |acc, j| {
            acc + sub.blocks()[j].weight / Rational::from_integer(amb.block_dim(j) as i64)
                * Rational::from_integer(mult[i][j] as i64)
        });
        lhs == amb.blocks()[i].weight / Rational::from_integer(sub.block_dim(i) as i64)
    })
}
