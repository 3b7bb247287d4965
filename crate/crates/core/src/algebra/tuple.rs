use std::sync::Arc;

use super::{Element, TracialAlgebra};
use crate::error::{Error, Result};
use crate::C64;

/// An ordered `n`-tuple of elements of one algebra, viewed as a point of the
/// real Hilbert space `L²(M)^n` with inner product `Re Σ_k τ(x_k* y_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tuple {
    entries: Vec<Element>,
}

impl Tuple {
    pub fn new(entries: Vec<Element>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::Shape("a tuple needs at least one entry".into()));
        };
        if entries.iter().any(|e| !e.same_algebra(first)) {
            return Err(Error::Shape("tuple entries live in different algebras".into()));
        }
        Ok(Self { entries })
    }

    pub fn single(x: Element) -> Self {
        Self { entries: vec![x] }
    }

    pub fn zeros(alg: &Arc<TracialAlgebra>, arity: usize) -> Self {
        assert!(arity > 0, "arity must be positive");
        Self {
            entries: vec![Element::zeros(alg); arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        self.entries[0].algebra()
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    pub fn entry(&self, k: usize) -> &Element {
        &self.entries[k]
    }

    pub fn into_entries(self) -> Vec<Element> {
        self.entries
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.arity() == other.arity() && self.entries[0].same_algebra(&other.entries[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.arity() != other.arity() {
            return Err(Error::Shape(format!(
                "arity {} vs {}",
                self.arity(),
                other.arity()
            )));
        }
        if !self.entries[0].same_algebra(&other.entries[0]) {
            return Err(Error::Shape("tuples live in different algebras".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl FnMut(&Element) -> Element) -> Self {
        Self {
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(&Element, &Element) -> Element) -> Self {
        assert!(self.compatible(other), "incompatible tuples");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|a| a.scale_re(c))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a.axpy(C64::new(c, 0.0), b))
    }

    /// `(1 - λ) self + λ other`.
    pub fn lerp(&self, other: &Self, lambda: f64) -> Self {
        self.zip_map(other, |a, b| a.scale_re(1.0 - lambda).axpy(C64::new(lambda, 0.0), b))
    }

    pub fn adjoint(&self) -> Self {
        self.map(Element::adjoint)
    }

    /// Conjugate every entry by the unitary `u`: `x_k ↦ u x_k u*`.
    pub fn conjugate_by(&self, u: &Element) -> Self {
        let ua = u.adjoint();
        self.map(|x| &(u * x) * &ua)
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        if !self.entries[0].same_algebra(&other.entries[0]) {
            return Err(Error::Shape("tuples live in different algebras".into()));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Self { entries })
    }

    /// Complex inner product `Σ_k τ(x_k* y_k)`.
    pub fn l2_inner(&self, other: &Self) -> Result<C64> {
        self.check(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.l2_inner(b))
            .sum())
    }

    pub fn re_inner(&self, other: &Self) -> f64 {
        assert!(self.compatible(other), "incompatible tuples");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.re_inner(b))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(Element::l2_norm_sq).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    pub fn op_norms(&self) -> Vec<f64> {
        self.entries.iter().map(Element::op_norm).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Element::max_abs).fold(0.0, f64::max)
    }

    pub fn real_dim(&self) -> usize {
        self.algebra().real_dim(self.arity())
    }

    pub fn to_real_coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.real_dim());
        for e in &self.entries {
            e.to_real_coords(&mut out);
        }
        out
    }

    pub fn from_real_coords(alg: &Arc<TracialAlgebra>, arity: usize, coords: &[f64]) -> Self {
        let per = 2 * alg.dim();
        assert_eq!(coords.len(), per * arity, "coordinate length mismatch");
        Self {
            entries: coords
                .chunks_exact(per)
                .map(|c| Element::from_real_coords(alg, c))
                .collect(),
        }
    }

    /// The `i`-th vector of the real orthonormal basis used by
    /// [`Tuple::to_real_coords`].
    pub fn real_basis_vector(alg: &Arc<TracialAlgebra>, arity: usize, i: usize) -> Self {
        let mut c = vec![0.0; alg.real_dim(arity)];
        c[i] = 1.0;
        Self::from_real_coords(alg, arity, &c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random;

    #[test]
    fn faithful_and_adjoint_isometry() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).unwrap();
        let mut rng = random::seeded(3);
        let x = random::random_tuple(&a, 3, &mut rng);
        assert!(x.norm_sq() > 0.0);
        assert!((x.norm() - x.adjoint().norm()).abs() < 1e-12);
        assert_eq!(Tuple::zeros(&a, 3).norm_sq(), 0.0);
        let ip = x.l2_inner(&x).unwrap();
        assert!(ip.im.abs() < 1e-12 && (ip.re - x.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = TracialAlgebra::matrix(2).unwrap();
        let b = TracialAlgebra::matrix(3).unwrap();
        let x = Tuple::zeros(&a, 2);
        assert!(x.l2_inner(&Tuple::zeros(&a, 3)).is_err());
        assert!(x.l2_inner(&Tuple::zeros(&b, 2)).is_err());
        assert!(Tuple::new(vec![]).is_err());
        assert!(Tuple::new(vec![Element::zeros(&a), Element::zeros(&b)]).is_err());
    }

    #[test]
    fn basis_vectors_are_orthonormal() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 2), (2, 1, 2)]).unwrap();
        let d = a.real_dim(2);
        for i in 0..d {
            let ei = Tuple::real_basis_vector(&a, 2, i);
            for j in 0..d {
                let ej = Tuple::real_basis_vector(&a, 2, j);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ei.re_inner(&ej) - want).abs() < 1e-12);
            }
        }
    }
}
