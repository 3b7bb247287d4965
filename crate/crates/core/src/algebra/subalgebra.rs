use std::sync::Arc;

use super::{Element, TracialAlgebra, Tuple};
use crate::error::{Error, Result};
use crate::linalg;
use crate::Mat;

/// Residual tolerance for closure validation of a spanning set.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Relative singular-value cutoff used when extracting a basis from a
/// spanning set.
const RANK_TOL: f64 = 1e-10;

/// A *-subalgebra given by a basis orthonormal for `⟨x, y⟩ = τ(x* y)`.
///
/// The basis is stored both as elements and as the columns of a coordinate
/// matrix (see [`Element::to_complex_coords`]), so projections are a pair of
/// matrix-vector products.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    alg: Arc<TracialAlgebra>,
    basis: Vec<Element>,
    coords: Mat,
}

impl Subalgebra {
    /// Orthonormalizes `spanning` and validates that the span contains `1`
    /// and is closed under adjoint and product.
    pub fn from_spanning(alg: &Arc<TracialAlgebra>, spanning: &[Element]) -> Result<Self> {
        let s = Self::span_unchecked(alg, spanning);
        s.validate()?;
        Ok(s)
    }

    /// Orthonormal basis of the linear span, without closure checks.
    pub fn span_unchecked(alg: &Arc<TracialAlgebra>, spanning: &[Element]) -> Self {
        let coords = coords_matrix(alg, spanning);
        Self::from_coords(alg, linalg::column_span(&coords, RANK_TOL))
    }

    /// Wraps a coordinate matrix whose columns are already orthonormal.
    pub(crate) fn from_coords(alg: &Arc<TracialAlgebra>, coords: Mat) -> Self {
        let basis = coords
            .column_iter()
            .map(|c| Element::from_complex_coords(alg, c.as_slice()))
            .collect();
        Self {
            alg: alg.clone(),
            basis,
            coords,
        }
    }

    pub fn full(alg: &Arc<TracialAlgebra>) -> Self {
        let d = alg.dim();
        Self::from_coords(alg, Mat::identity(d, d))
    }

    pub fn scalars(alg: &Arc<TracialAlgebra>) -> Self {
        Self::span_unchecked(alg, &[Element::identity(alg)])
    }

    pub fn validate(&self) -> Result<()> {
        let one = Element::identity(&self.alg);
        if self.residual(&one) > CLOSURE_TOL {
            return Err(Error::NotSubalgebra("span does not contain the unit".into()));
        }
        for (i, a) in self.basis.iter().enumerate() {
            let r = self.residual(&a.adjoint());
            if r > CLOSURE_TOL {
                return Err(Error::NotSubalgebra(format!(
                    "adjoint of basis element {i} leaves the span (residual {r:.3e})"
                )));
            }
            for (j, b) in self.basis.iter().enumerate() {
                let p = a * b;
                let r = self.residual(&p) / p.l2_norm().max(1.0);
                if r > CLOSURE_TOL {
                    return Err(Error::NotSubalgebra(format!(
                        "product of basis elements {i},{j} leaves the span (residual {r:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    /// Columns are the basis in complex coordinates.
    pub fn coords(&self) -> &Mat {
        &self.coords
    }

    /// Orthogonal projection onto the span, i.e. the trace-preserving
    /// conditional expectation when the span is a unital *-subalgebra.
    pub fn project(&self, z: &Element) -> Element {
        let v = z.to_complex_coords();
        let p = &self.coords * (self.coords.adjoint() * v);
        Element::from_complex_coords(&self.alg, p.as_slice())
    }

    pub fn project_tuple(&self, z: &Tuple) -> Tuple {
        z.map(|e| self.project(e))
    }

    /// `‖z − E z‖₂`.
    pub fn residual(&self, z: &Element) -> f64 {
        let v = z.to_complex_coords();
        let p = &self.coords * (self.coords.adjoint() * &v);
        (v - p).norm()
    }

    /// Relative membership test `‖z − E z‖ ≤ tol · max(1, ‖z‖)`.
    pub fn contains(&self, z: &Element, tol: f64) -> bool {
        self.residual(z) <= tol * z.l2_norm().max(1.0)
    }

    /// Largest residual of `other`'s basis against this span.
    pub fn containment_residual(&self, other: &Subalgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    pub fn contains_subalgebra(&self, other: &Subalgebra, tol: f64) -> bool {
        self.containment_residual(other) <= tol
    }
}

fn coords_matrix(alg: &Arc<TracialAlgebra>, elems: &[Element]) -> Mat {
    let d = alg.dim();
    let mut m = Mat::zeros(d, elems.len());
    for (c, e) in elems.iter().enumerate() {
        assert!(**e.algebra() == **alg, "element from a different algebra");
        m.set_column(c, &e.to_complex_coords());
    }
    m
}

/// Orthonormal basis (for `τ(x* y)`) of the span of `elems`.
pub fn orthonormalize(elems: &[Element]) -> Vec<Element> {
    match elems.first() {
        None => Vec::new(),
        Some(e) => Subalgebra::span_unchecked(e.algebra(), elems).basis,
    }
}

/// `E_A(z)` for the subalgebra spanned by `basis`, after validating closure.
pub fn conditional_expectation(basis: &[Element], z: &Element) -> Result<Element> {
    let Some(first) = basis.first() else {
        return Err(Error::NotSubalgebra("empty basis".into()));
    };
    if !first.same_algebra(z) {
        return Err(Error::Shape("basis and argument live in different algebras".into()));
    }
    Ok(Subalgebra::from_spanning(first.algebra(), basis)?.project(z))
}

/// The unital *-algebra generated by the entries of `x`.
pub fn generated_algebra(x: &Tuple) -> Subalgebra {
    generated_algebra_tol(x, RANK_TOL)
}

/// [`generated_algebra`] with an explicit relative rank cutoff, for inputs
/// that carry optimizer noise.
///
/// In a factor this is the bicommutant `{x}''`, whose null-space gaps are
/// eigenvalue gaps of the generators. Otherwise `{1, x_k, x_k*}` is closed
/// under products until the span stabilizes; there the gaps shrink like
/// Vandermonde determinants, so clustered spectra need a smaller cutoff.
pub fn generated_algebra_tol(x: &Tuple, rank_tol: f64) -> Subalgebra {
    let alg = x.algebra().clone();
    let mut gens = Vec::new();
    for e in x.entries() {
        let n = e.l2_norm();
        if n > 0.0 {
            let u = e.scale_re(1.0 / n);
            gens.push(u.adjoint());
            gens.push(u);
        }
    }
    if alg.is_factor() {
        if gens.is_empty() {
            return Subalgebra::scalars(&alg);
        }
        let c = commutant_tol(&alg, &gens, rank_tol);
        return commutant_tol(&alg, c.basis(), rank_tol);
    }
    gens.push(Element::identity(&alg));
    let span_of = |elems: &[Element]| {
        let coords = coords_matrix(&alg, elems);
        Subalgebra::from_coords(&alg, linalg::column_span(&coords, rank_tol))
    };
    let mut cur = span_of(&gens);
    loop {
        let mut span = cur.basis.clone();
        for a in &cur.basis {
            for b in &cur.basis {
                span.push(a * b);
            }
        }
        let next = span_of(&span);
        if next.dim() == cur.dim() {
            return next;
        }
        cur = next;
    }
}

/// `{z : [z, g] = 0 for every g}`, keeping directions whose commutator map
/// singular value is at most `rel_tol` times `max(1, ‖map‖)`.
pub fn commutant_tol(alg: &Arc<TracialAlgebra>, gens: &[Element], rel_tol: f64) -> Subalgebra {
    let d = alg.dim();
    let mut m = Mat::zeros(d * gens.len(), d);
    let mut unit = vec![crate::C64::new(0.0, 0.0); d];
    for c in 0..d {
        unit[c] = crate::C64::new(1.0, 0.0);
        let e = Element::from_complex_coords(alg, &unit);
        unit[c] = crate::C64::new(0.0, 0.0);
        for (k, g) in gens.iter().enumerate() {
            m.view_mut((k * d, c), (d, 1)).copy_from(&e.commutator(g).to_complex_coords());
        }
    }
    // Generators have unit norm, so the floor keeps a map that is pure
    // rounding noise (the commutant of the scalars) from setting the scale.
    let scale = linalg::spectral_norm(&m).max(1.0);
    let coords = linalg::null_space(&m, rel_tol * scale);
    Subalgebra::from_coords(alg, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random;
    use crate::C64;
    use nalgebra::DVector;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_m2() -> (Arc<TracialAlgebra>, Vec<Element>) {
        let m2 = TracialAlgebra::matrix(2).unwrap();
        let basis = vec![
            Element::matrix_unit(&m2, 0, 0, 0),
            Element::matrix_unit(&m2, 0, 1, 1),
        ];
        (m2, basis)
    }

    #[test]
    fn scalar_expectation_is_trace() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).unwrap();
        let z = random::random_element(&a, &mut random::seeded(1));
        let e = conditional_expectation(&[Element::identity(&a)], &z).unwrap();
        let want = Element::scalar(&a, z.trace());
        assert!((e - want).max_abs() < 1e-12);
    }

    #[test]
    fn diagonal_expectation_vs_gram_oracle() {
        let (m2, basis) = diag_m2();
        let z = Element::from_blocks(
            &m2,
            vec![Mat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 0.0), c(-1.0, 1.0), c(4.0, -1.0)])],
        )
        .unwrap();
        let e = conditional_expectation(&basis, &z).unwrap();
        // Gram-matrix oracle: solve G c = (⟨b_i, z⟩) with the raw (non-orthonormal) basis.
        let g = Mat::from_fn(2, 2, |i, j| basis[i].l2_inner(&basis[j]));
        let rhs = DVector::from_fn(2, |i, _| basis[i].l2_inner(&z));
        let coef = g.lu().solve(&rhs).unwrap();
        let oracle = basis[0].scale(coef[0]) + basis[1].scale(coef[1]);
        assert!((e.clone() - oracle).max_abs() < 1e-12);
        assert!((e.block(0)[(0, 0)] - c(1.0, 2.0)).norm() < 1e-12);
        assert!((e.block(0)[(1, 1)] - c(4.0, -1.0)).norm() < 1e-12);
        assert!(e.block(0)[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn expectation_properties() {
        let a = TracialAlgebra::from_parts(&[(2, 1, 2), (2, 1, 2)]).unwrap();
        let mut rng = random::seeded(8);
        let x = random::random_selfadjoint(&a, &mut rng);
        let sub = generated_algebra(&Tuple::single(x));
        for _ in 0..50 {
            let z = random::random_element(&a, &mut rng);
            let ez = sub.project(&z);
            assert!((sub.project(&ez) - &ez).max_abs() < 1e-12);
            assert!((ez.trace() - z.trace()).norm() < 1e-12);
            assert!(ez.l2_norm() <= z.l2_norm() + 1e-12);
            assert!(ez.op_norm() <= z.op_norm() + 1e-10);
            let p = sub.project(&random::random_element(&a, &mut rng));
            let q = sub.project(&random::random_element(&a, &mut rng));
            let lhs = sub.project(&(&(&p * &z) * &q));
            let rhs = &(&p * &ez) * &q;
            assert!((lhs - rhs).max_abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_subalgebra() {
        let m2 = TracialAlgebra::matrix(2).unwrap();
        let e12 = Element::matrix_unit(&m2, 0, 0, 1);
        let r = conditional_expectation(&[Element::identity(&m2), e12.clone()], &e12);
        assert!(matches!(r, Err(Error::NotSubalgebra(_))));
        let r = conditional_expectation(&[Element::matrix_unit(&m2, 0, 0, 0)], &e12);
        assert!(matches!(r, Err(Error::NotSubalgebra(_))));
    }

    #[test]
    fn generated_examples() {
        let m2 = TracialAlgebra::matrix(2).unwrap();
        let one = Tuple::single(Element::identity(&m2));
        assert_eq!(generated_algebra(&one).dim(), 1);
        let d = Tuple::single(Element::diag(&m2, &[1.0, 2.0]).unwrap());
        assert_eq!(generated_algebra(&d).dim(), 2);
        let e12 = Tuple::single(Element::matrix_unit(&m2, 0, 0, 1));
        assert_eq!(generated_algebra(&e12).dim(), 4);
    }

    #[test]
    fn generated_matches_moment_rank_oracle() {
        // Oracle: rank of the moment matrix of 1, h, h², ..., h^{n-1}
        // equals the number of distinct eigenvalues of a Hermitian h.
        let m3 = TracialAlgebra::matrix(3).unwrap();
        let h = Element::diag(&m3, &[1.0, 1.0, -2.0]).unwrap();
        let pows: Vec<Element> = {
            let mut v = vec![Element::identity(&m3)];
            for k in 1..3 {
                let last = v[k - 1].clone();
                v.push(&last * &h);
            }
            v
        };
        let g = Mat::from_fn(3, 3, |i, j| pows[i].l2_inner(&pows[j]));
        let rank = g
            .svd(false, false)
            .singular_values
            .iter()
            .filter(|s| **s > 1e-10)
            .count();
        assert_eq!(rank, 2);
        assert_eq!(generated_algebra(&Tuple::single(h)).dim(), rank);
    }

    #[test]
    fn generated_is_monotone() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 4), (2, 3, 4)]).unwrap();
        let mut rng = random::seeded(12);
        for _ in 0..10 {
            let x = Tuple::single(Element::from_fn(&a, |_, r, c| {
                if r == c {
                    C64::new(rng.random_range(-1.0..1.0), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
            let y = random::random_tuple(&a, 1, &mut rng);
            let gx = generated_algebra(&x);
            let gxy = generated_algebra(&x.concat(&y).unwrap());
            assert!(gxy.dim() >= gx.dim());
            assert!(gxy.contains_subalgebra(&gx, 1e-9));
            assert!(gx.validate().is_ok());
            assert!(gxy.validate().is_ok());
        }
    }

    #[test]
    fn full_and_scalars() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).unwrap();
        let f = Subalgebra::full(&a);
        assert_eq!(f.dim(), 5);
        assert!(f.validate().is_ok());
        let s = Subalgebra::scalars(&a);
        assert_eq!(s.dim(), 1);
        assert!(s.validate().is_ok());
        assert!(f.contains_subalgebra(&s, 1e-12));
    }

    #[test]
    fn generic_pair_generates_everything() {
        let mut rng = random::seeded(12);
        for n in 2..=4 {
            let a = TracialAlgebra::matrix(n).unwrap();
            let x = random::random_tuple(&a, 2, &mut rng);
            assert_eq!(generated_algebra(&x).dim(), n * n);
            assert_eq!(generated_algebra_tol(&x, 1e-7).dim(), n * n);
        }
    }

    #[test]
    fn clustered_spectrum_keeps_full_diagonal() {
        // Gaps near 1e-3 make the power basis nearly singular.
        let a = TracialAlgebra::matrix(6).unwrap();
        let d = Element::diag(&a, &[0.07, 0.071, 0.0843, 0.0917, 0.3138, 0.9579]).unwrap();
        let u = random::random_unitary(&a, &mut random::seeded(3));
        let h = &(&u * &d) * &u.adjoint();
        assert_eq!(generated_algebra_tol(&Tuple::single(h), 1e-7).dim(), 6);
    }

    #[test]
    fn direct_sum_uses_products() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 2), (1, 1, 2)]).unwrap();
        assert_eq!(generated_algebra(&Tuple::single(Element::identity(&a))).dim(), 1);
        assert_eq!(generated_algebra(&Tuple::single(Element::block_unit(&a, 0))).dim(), 2);
    }
}
