//! Definable and algebraic closures of finite-dimensional inclusions.
//!
//! For `ι: A → M = ⊕_j M_{n_j}` the ambient blocks are grouped into classes
//! of blocks with equal size, equal weight and equal multiplicity column.
//! The definable closure of `ι(A)` is `span{p_C ι(a)}` over classes `C` with
//! central projections `p_C`. [`automorphism_fixed_oracle`] recomputes it
//! independently as the common fixed space of sampled automorphisms that
//! fix `ι(A)` pointwise.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::random::{self, substream};
use crate::algebra::{Element, Inclusion, Subalgebra, TracialAlgebra};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{Mat, Rational};

/// Singular-value cutoff for fixed spaces and commutants.
pub const FIXED_TOL: f64 = 1e-8;

/// Default number of sampled automorphisms.
pub const DEFAULT_SAMPLES: usize = 128;

#[derive(Clone, Debug)]
pub struct BlockClassPartition {
    /// Ambient block indices, each class sorted, classes ordered by their
    /// smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Central projection `p_C` of each class.
    pub projections: Vec<Element>,
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub algebra: Subalgebra,
    /// Dimension from the combinatorial formula; equals `algebra.dim()`.
    pub dim: usize,
    pub partition: BlockClassPartition,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub fixed: Subalgebra,
    /// Fixed-space dimension after each sample.
    pub dims: Vec<usize>,
}

/// `j ∼ j'` iff `n_j = n_j'`, `β_j = β_j'` exactly, and `k(·, j) = k(·, j')`.
pub fn block_classes(inc: &Inclusion) -> BlockClassPartition {
    let amb = inc.amb();
    let nj = amb.num_blocks();
    let key = |j: usize| {
        let col: Vec<u32> = (0..inc.sub().num_blocks()).map(|i| inc.k(i, j)).collect();
        (amb.block_dim(j), amb.blocks()[j].weight, col)
    };
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<(usize, Rational, Vec<u32>)> = Vec::new();
    for j in 0..nj {
        let kj = key(j);
        match keys.iter().position(|k| *k == kj) {
            Some(c) => classes[c].push(j),
            None => {
                keys.push(kj);
                classes.push(vec![j]);
            }
        }
    }
    let projections = classes
        .iter()
        .map(|c| {
            c.iter()
                .fold(Element::zeros(amb), |acc, &j| acc + Element::block_unit(amb, j))
        })
        .collect();
    BlockClassPartition {
        classes,
        projections,
    }
}

/// `dcl(ι(A)) = span{p_C ι(a) : a ∈ A, C a class}`.
pub fn dcl_finite(inc: &Inclusion) -> ClosureResult {
    let partition = block_classes(inc);
    let image = inc.image_spanning_set();
    let mut spanning = Vec::with_capacity(image.len() * partition.classes.len());
    for p in &partition.projections {
        for a in &image {
            spanning.push(p * a);
        }
    }
    let algebra = Subalgebra::span_unchecked(inc.amb(), &spanning);
    let dim = partition
        .classes
        .iter()
        .map(|c| {
            let j = c[0];
            (0..inc.sub().num_blocks())
                .filter(|&i| inc.k(i, j) > 0)
                .map(|i| inc.sub().block_dim(i).pow(2))
                .sum::<usize>()
        })
        .sum();
    ClosureResult {
        algebra,
        dim,
        partition,
    }
}

/// At finite dimension every domain is compact, so `acl` is all of `M`.
pub fn acl_finite(inc: &Inclusion) -> Subalgebra {
    Subalgebra::full(inc.amb())
}

/// `A' ∩ M` as the null space of `x ↦ ([x, a])_{a ∈ basis}`.
pub fn relative_commutant(a: &Subalgebra) -> Subalgebra {
    commutant_of(a.algebra(), a.basis())
}

/// Like [`relative_commutant`] but for a raw spanning set of a *-subalgebra.
pub fn relative_commutant_of(basis: &[Element]) -> Result<Subalgebra> {
    let Some(first) = basis.first() else {
        return Err(Error::NotSubalgebra("empty basis".into()));
    };
    let alg = first.algebra().clone();
    let sub = Subalgebra::from_spanning(&alg, basis)?;
    Ok(relative_commutant(&sub))
}

fn commutant_of(alg: &Arc<TracialAlgebra>, gens: &[Element]) -> Subalgebra {
    let d = alg.dim();
    let mut m = Mat::zeros(d * gens.len().max(1), d);
    let mut unit = vec![crate::C64::new(0.0, 0.0); d];
    for c in 0..d {
        unit[c] = crate::C64::new(1.0, 0.0);
        let e = Element::from_complex_coords(alg, &unit);
        unit[c] = crate::C64::new(0.0, 0.0);
        for (g, a) in gens.iter().enumerate() {
            let col = e.commutator(a).to_complex_coords();
            m.view_mut((g * d, c), (d, 1)).copy_from(&col);
        }
    }
    let scale = linalg::spectral_norm(&m).max(1.0);
    Subalgebra::from_coords(alg, linalg::null_space(&m, FIXED_TOL * scale))
}

/// `(ι(A)' ∩ M)' ∩ M`.
pub fn relative_bicommutant(inc: &Inclusion) -> Subalgebra {
    relative_commutant(&relative_commutant(&inc.image()))
}

/// One sampled automorphism fixing `ι(A)` pointwise: a random permutation
/// of blocks within each class followed by `Ad(exp(i h))` with `h` a random
/// Hermitian element of `ι(A)' ∩ M`.
struct Automorphism {
    perm: Vec<usize>,
    w: Element,
}

impl Automorphism {
    fn sample(
        partition: &BlockClassPartition,
        commutant: &Subalgebra,
        rng: &mut impl Rng,
    ) -> Self {
        let alg = commutant.algebra();
        let mut perm: Vec<usize> = (0..alg.num_blocks()).collect();
        for c in &partition.classes {
            let mut shuffled = c.clone();
            shuffled.shuffle(rng);
            for (&from, &to) in c.iter().zip(&shuffled) {
                perm[from] = to;
            }
        }
        let z = commutant.project(&random::random_element(alg, rng));
        let h = (&z + &z.adjoint()).scale_re(0.5);
        let w = h.map_blocks(|_, b| linalg::exp_i_hermitian(b, 1.0));
        Self { perm, w }
    }

    fn apply(&self, x: &Element) -> Element {
        let alg = x.algebra();
        let permuted = Element::from_blocks(
            alg,
            self.perm.iter().map(|&j| x.block(j).clone()).collect(),
        )
        .expect("permutation stays within equal-size blocks");
        &(&self.w * &permuted) * &self.w.adjoint()
    }
}

/// Common fixed space of `samples` sampled automorphisms fixing `ι(A)`.
///
/// Sample `s` draws from its own stream of `seed`, so increasing `samples`
/// only intersects further and the dimension sequence is non-increasing.
pub fn automorphism_fixed_oracle(inc: &Inclusion, samples: usize, seed: u64) -> OracleResult {
    let amb = inc.amb().clone();
    let partition = block_classes(inc);
    let commutant = relative_commutant(&inc.image());
    let d = amb.dim();
    let mut q = Mat::identity(d, d);
    let mut dims = Vec::with_capacity(samples);
    for s in 0..samples {
        if q.ncols() == 0 {
            dims.push(0);
            continue;
        }
        let mut rng = substream(seed, s as u64);
        let theta = Automorphism::sample(&partition, &commutant, &mut rng);
        let mut m = Mat::zeros(d, q.ncols());
        for (c, col) in q.column_iter().enumerate() {
            let x = Element::from_complex_coords(&amb, col.as_slice());
            let diff = theta.apply(&x).to_complex_coords() - col;
            m.set_column(c, &diff);
        }
        let ns = linalg::null_space(&m, FIXED_TOL);
        q = &q * ns;
        // Re-orthonormalize to keep rounding from accumulating.
        q = linalg::column_span(&q, 1e-12);
        dims.push(q.ncols());
    }
    OracleResult {
        fixed: Subalgebra::from_coords(&amb, q),
        dims,
    }
}

/// Random inclusion with `Σ n_j² ≤ cap`. Columns are duplicated with
/// moderate probability, sometimes with equal weights, so that nontrivial
/// block classes occur.
pub fn random_inclusion(rng: &mut impl Rng, cap: usize) -> Inclusion {
    loop {
        let ni = rng.random_range(1..=3);
        let m: Vec<usize> = (0..ni).map(|_| rng.random_range(1..=3)).collect();
        let nj = rng.random_range(1..=4);
        let mut cols: Vec<Vec<u32>> = Vec::new();
        let mut w: Vec<i64> = Vec::new();
        for j in 0..nj {
            if j > 0 && rng.random_bool(0.5) {
                let src = rng.random_range(0..j);
                cols.push(cols[src].clone());
                w.push(if rng.random_bool(0.6) { w[src] } else { rng.random_range(1..=4) });
            } else {
                let col: Vec<u32> = (0..ni).map(|_| rng.random_range(0..=2)).collect();
                cols.push(col);
                w.push(rng.random_range(1..=4));
            }
        }
        if cols.iter().any(|c| c.iter().all(|&k| k == 0)) {
            continue;
        }
        if (0..ni).any(|i| cols.iter().all(|c| c[i] == 0)) {
            continue;
        }
        let n: Vec<usize> = cols
            .iter()
            .map(|c| c.iter().zip(&m).map(|(&k, &mi)| k as usize * mi).sum())
            .collect();
        if n.iter().map(|x| x * x).sum::<usize>() > cap {
            continue;
        }
        let total: i64 = w.iter().sum();
        let beta: Vec<Rational> = w.iter().map(|&x| Rational::new(x, total)).collect();
        let alpha: Vec<Rational> = (0..ni)
            .map(|i| {
                let s = (0..nj).fold(Rational::from_integer(0), |acc, j| {
                    acc + beta[j] * Rational::from_integer(cols[j][i] as i64)
                        / Rational::from_integer(n[j] as i64)
                });
                s * Rational::from_integer(m[i] as i64)
            })
            .collect();
        let sub = TracialAlgebra::new(
            m.iter()
                .zip(&alpha)
                .map(|(&dim, &weight)| crate::algebra::Block { dim, weight })
                .collect(),
        )
        .expect("weights sum to one by construction");
        let amb = TracialAlgebra::new(
            n.iter()
                .zip(&beta)
                .map(|(&dim, &weight)| crate::algebra::Block { dim, weight })
                .collect(),
        )
        .expect("weights sum to one by construction");
        let mult = (0..ni).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        return Inclusion::new(sub, amb, mult).expect("consistent by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random::seeded;

    fn inc(sub: &[(usize, i64, i64)], amb: &[(usize, i64, i64)], k: Vec<Vec<u32>>) -> Inclusion {
        Inclusion::new(
            TracialAlgebra::from_parts(sub).unwrap(),
            TracialAlgebra::from_parts(amb).unwrap(),
            k,
        )
        .unwrap()
    }

    #[test]
    fn masa_in_m2_is_closed() {
        let i = inc(&[(1, 1, 2), (1, 1, 2)], &[(2, 1, 1)], vec![vec![1], vec![1]]);
        let r = dcl_finite(&i);
        assert_eq!(r.dim, 2);
        assert_eq!(r.algebra.dim(), 2);
        assert!(r.algebra.contains_subalgebra(&i.image(), 1e-9));
    }

    #[test]
    fn scalars_in_two_equal_blocks() {
        let i = inc(&[(1, 1, 1)], &[(2, 1, 2), (2, 1, 2)], vec![vec![2, 2]]);
        let r = dcl_finite(&i);
        assert_eq!(r.partition.classes, vec![vec![0, 1]]);
        assert_eq!(r.dim, 1);
        let o = automorphism_fixed_oracle(&i, 64, 1);
        assert_eq!(o.fixed.dim(), 1);
        assert!(o.fixed.contains(&Element::identity(i.amb()), 1e-9));
    }

    #[test]
    fn scalars_in_unequal_blocks() {
        let i = inc(&[(1, 1, 1)], &[(1, 1, 3), (2, 2, 3)], vec![vec![1, 2]]);
        let r = dcl_finite(&i);
        assert_eq!(r.partition.classes, vec![vec![0], vec![1]]);
        assert_eq!(r.dim, 2);
        assert_eq!(acl_finite(&i).dim(), 5);
        let o = automorphism_fixed_oracle(&i, 64, 2);
        assert_eq!(o.fixed.dim(), 2);
        assert!(o.fixed.contains_subalgebra(&r.algebra, 1e-8));
        assert!(r.algebra.contains_subalgebra(&o.fixed, 1e-8));
    }

    #[test]
    fn equal_size_different_weight_splits_classes() {
        let i = inc(&[(1, 1, 1)], &[(1, 1, 3), (1, 2, 3)], vec![vec![1, 1]]);
        assert_eq!(block_classes(&i).classes.len(), 2);
        assert_eq!(dcl_finite(&i).dim, 2);
    }

    #[test]
    fn swap_plus_commutant_enumeration() {
        // Explicit oracle for C ⊂ M2 ⊕ M2 (β = 1/2, 1/2): the swap and Ad(u ⊕ v)
        // for arbitrary unitaries generate everything fixing only scalars.
        let i = inc(&[(1, 1, 1)], &[(2, 1, 2), (2, 1, 2)], vec![vec![2, 2]]);
        let amb = i.amb();
        let mut rng = seeded(4);
        let u = random::random_unitary(amb, &mut rng);
        let swap = |x: &Element| {
            Element::from_blocks(amb, vec![x.block(1).clone(), x.block(0).clone()]).unwrap()
        };
        let x = random::random_element(amb, &mut rng);
        // Fixed by both maps implies scalar: check a scalar is and x is not.
        let conj = |y: &Element| &(&u * y) * &u.adjoint();
        let one = Element::identity(amb);
        assert!((conj(&swap(&one)) - &one).max_abs() < 1e-12);
        assert!((conj(&swap(&x)) - &x).max_abs() > 1e-3);
        assert_eq!(automorphism_fixed_oracle(&i, 128, 9).fixed.dim(), 1);
    }

    #[test]
    fn identity_inclusion_fixes_everything() {
        let i = inc(&[(2, 1, 1)], &[(2, 1, 1)], vec![vec![1]]);
        let o = automorphism_fixed_oracle(&i, 16, 3);
        assert_eq!(o.fixed.dim(), 4);
        assert_eq!(dcl_finite(&i).dim, 4);
    }

    #[test]
    fn commutant_examples() {
        let m2 = TracialAlgebra::matrix(2).unwrap();
        assert_eq!(relative_commutant(&Subalgebra::full(&m2)).dim(), 1);
        assert_eq!(relative_commutant(&Subalgebra::scalars(&m2)).dim(), 4);
        let diag = relative_commutant_of(&[
            Element::matrix_unit(&m2, 0, 0, 0),
            Element::matrix_unit(&m2, 0, 1, 1),
        ])
        .unwrap();
        assert_eq!(diag.dim(), 2);
        assert!(diag.contains(&Element::diag(&m2, &[1.0, -3.0]).unwrap(), 1e-12));
        assert!(diag.validate().is_ok());
    }

    #[test]
    fn oracle_dims_monotone_and_dcl_properties() {
        let mut rng = seeded(77);
        for _ in 0..8 {
            let i = random_inclusion(&mut rng, 36);
            let r = dcl_finite(&i);
            assert_eq!(r.dim, r.algebra.dim());
            assert!(r.algebra.validate().is_ok());
            assert!(r.algebra.contains_subalgebra(&i.image(), 1e-9));
            let sum = r
                .partition
                .projections
                .iter()
                .fold(Element::zeros(i.amb()), |acc, p| acc + p);
            assert!((sum - Element::identity(i.amb())).max_abs() < 1e-15);
            for p in &r.partition.projections {
                assert!(r.algebra.contains(p, 1e-9));
                assert!((&(p * p) - p).max_abs() < 1e-15);
            }
            assert!(relative_bicommutant(&i).contains_subalgebra(&r.algebra, 1e-9));
            let o = automorphism_fixed_oracle(&i, 32, 5);
            assert!(o.dims.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(o.fixed.dim(), r.dim);
        }
    }
}
