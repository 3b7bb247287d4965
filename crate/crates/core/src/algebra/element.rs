use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::TracialAlgebra;
use crate::error::{Error, Result};
use crate::linalg;
use crate::{Mat, C64};

/// A block-diagonal element of a [`TracialAlgebra`], stored as one dense
/// matrix per block.
///
/// Binary operators panic if the operands live in different algebras; use
/// [`Element::from_blocks`] to validate untrusted data.
#[derive(Clone, Debug)]
pub struct Element {
    alg: Arc<TracialAlgebra>,
    blocks: Vec<Mat>,
}

impl Element {
    pub fn from_blocks(alg: &Arc<TracialAlgebra>, blocks: Vec<Mat>) -> Result<Self> {
        if blocks.len() != alg.num_blocks() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                alg.num_blocks(),
                blocks.len()
            )));
        }
        for (j, b) in blocks.iter().enumerate() {
            let n = alg.block_dim(j);
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::Shape(format!(
                    "block {j} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            alg: alg.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(alg: &Arc<TracialAlgebra>, blocks: Vec<Mat>) -> Self {
        debug_assert_eq!(blocks.len(), alg.num_blocks());
        Self {
            alg: alg.clone(),
            blocks,
        }
    }

    pub fn from_fn(alg: &Arc<TracialAlgebra>, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let blocks = alg
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, b)| DMatrix::from_fn(b.dim, b.dim, |r, c| f(j, r, c)))
            .collect();
        Self::from_blocks_unchecked(alg, blocks)
    }

    pub fn zeros(alg: &Arc<TracialAlgebra>) -> Self {
        Self::from_fn(alg, |_, _, _| C64::new(0.0, 0.0))
    }

    pub fn identity(alg: &Arc<TracialAlgebra>) -> Self {
        Self::scalar(alg, C64::new(1.0, 0.0))
    }

    pub fn scalar(alg: &Arc<TracialAlgebra>, c: C64) -> Self {
        Self::from_fn(alg, |_, r, s| if r == s { c } else { C64::new(0.0, 0.0) })
    }

    /// Diagonal element of a single-block algebra.
    pub fn diag(alg: &Arc<TracialAlgebra>, entries: &[f64]) -> Result<Self> {
        if !alg.is_factor() || alg.block_dim(0) != entries.len() {
            return Err(Error::Shape(format!(
                "diag of length {} does not fit {alg}",
                entries.len()
            )));
        }
        Ok(Self::from_fn(alg, |_, r, c| {
            if r == c {
                C64::new(entries[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Matrix unit `e_{rc}` in block `j`.
    pub fn matrix_unit(alg: &Arc<TracialAlgebra>, j: usize, r: usize, c: usize) -> Self {
        Self::from_fn(alg, |jj, rr, cc| {
            if jj == j && rr == r && cc == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Central projection onto block `j`.
    pub fn block_unit(alg: &Arc<TracialAlgebra>, j: usize) -> Self {
        Self::from_fn(alg, |jj, r, c| {
            if jj == j && r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.alg
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &Mat {
        &self.blocks[j]
    }

    pub fn into_blocks(self) -> Vec<Mat> {
        self.blocks
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, &Mat) -> Mat) -> Self {
        let blocks = self.blocks.iter().enumerate().map(|(j, b)| f(j, b)).collect();
        Self::from_blocks_unchecked(&self.alg, blocks)
    }

    fn zip_blocks(&self, other: &Self, mut f: impl FnMut(&Mat, &Mat) -> Mat) -> Self {
        assert!(
            self.same_algebra(other),
            "elements belong to different algebras"
        );
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Self::from_blocks_unchecked(&self.alg, blocks)
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|_, b| b.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|_, b| b * c)
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.map_blocks(|_, b| b * C64::new(c, 0.0))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Self) -> Self {
        self.zip_blocks(other, |a, b| a + b * c)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.zip_blocks(other, |a, b| a * b - b * a)
    }

    /// `τ(x) = Σ_j β_j tr_{n_j}(x_j)` with normalized block traces.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.trace() * (self.alg.weight(j) / b.nrows() as f64))
            .sum()
    }

    /// `⟨x, y⟩ = τ(x* y)`, conjugate-linear in `self`.
    pub fn l2_inner(&self, other: &Self) -> C64 {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .map(|(j, (a, b))| a.dotc(b) * (self.alg.weight(j) / a.nrows() as f64))
            .sum()
    }

    /// `Re ⟨x, y⟩`, the real inner product used by the convex-analysis code.
    pub fn re_inner(&self, other: &Self) -> f64 {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .map(|(j, (a, b))| {
                let s: f64 = a
                    .iter()
                    .zip(b.iter())
                    .map(|(p, q)| p.re * q.re + p.im * q.im)
                    .sum();
                s * self.alg.weight(j) / a.nrows() as f64
            })
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.norm_squared() * self.alg.weight(j) / b.nrows() as f64)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry, a cheap closeness measure for tests.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs() <= tol
    }

    /// Number of complex coordinates, `Σ n_j²`.
    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    /// Coordinates in the real orthonormal basis `{E_ab, i E_ab} / sqrt(β_j / n_j)`.
    pub fn to_real_coords(&self, out: &mut Vec<f64>) {
        for (j, b) in self.blocks.iter().enumerate() {
            let s = (self.alg.weight(j) / b.nrows() as f64).sqrt();
            for z in b.iter() {
                out.push(z.re * s);
                out.push(z.im * s);
            }
        }
    }

    /// Inverse of [`Element::to_real_coords`]; consumes `2 Σ n_j²` values.
    pub fn from_real_coords(alg: &Arc<TracialAlgebra>, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), 2 * alg.dim(), "coordinate length mismatch");
        let mut it = coords.chunks_exact(2);
        let blocks = alg
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, blk)| {
                let s = (alg.weight(j) / blk.dim as f64).sqrt();
                let data: Vec<C64> = (0..blk.dim * blk.dim)
                    .map(|_| {
                        let p = it.next().expect("length checked");
                        C64::new(p[0] / s, p[1] / s)
                    })
                    .collect();
                DMatrix::from_vec(blk.dim, blk.dim, data)
            })
            .collect();
        Self::from_blocks_unchecked(alg, blocks)
    }
}

impl Element {
    /// Complex coordinates `x_ab · sqrt(β_j / n_j)`, column-major per block,
    /// so that `⟨x, y⟩ = coords(x)* coords(y)`.
    pub fn to_complex_coords(&self) -> DVector<C64> {
        let mut v = Vec::with_capacity(self.dim());
        for (j, b) in self.blocks.iter().enumerate() {
            let s = (self.alg.weight(j) / b.nrows() as f64).sqrt();
            v.extend(b.iter().map(|z| z * s));
        }
        DVector::from_vec(v)
    }

    pub fn from_complex_coords(alg: &Arc<TracialAlgebra>, coords: &[C64]) -> Self {
        assert_eq!(coords.len(), alg.dim(), "coordinate length mismatch");
        let mut off = 0;
        let blocks = alg
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, blk)| {
                let s = (alg.weight(j) / blk.dim as f64).sqrt();
                let n2 = blk.dim * blk.dim;
                let m = DMatrix::from_iterator(
                    blk.dim,
                    blk.dim,
                    coords[off..off + n2].iter().map(|z| z / s),
                );
                off += n2;
                m
            })
            .collect();
        Self::from_blocks_unchecked(alg, blocks)
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.blocks == other.blocks
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Element> for &Element {
            type Output = Element;
            fn $m(self, rhs: &Element) -> Element {
                self.zip_blocks(rhs, $f)
            }
        }
        impl $tr<Element> for Element {
            type Output = Element;
            fn $m(self, rhs: Element) -> Element {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Element> for Element {
            type Output = Element;
            fn $m(self, rhs: &Element) -> Element {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a + b);
binop!(Sub, sub, |a, b| a - b);
binop!(Mul, mul, |a, b| a * b);

impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        assert!(self.same_algebra(rhs), "elements belong to different algebras");
        for (a, b) in self.blocks.iter_mut().zip(&rhs.blocks) {
            *a += b;
        }
    }
}

impl SubAssign<&Element> for Element {
    fn sub_assign(&mut self, rhs: &Element) {
        assert!(self.same_algebra(rhs), "elements belong to different algebras");
        for (a, b) in self.blocks.iter_mut().zip(&rhs.blocks) {
            *a -= b;
        }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map_blocks(|_, b| -b)
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        -&self
    }
}
