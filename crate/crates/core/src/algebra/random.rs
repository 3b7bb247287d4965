//! Seeded random elements, unitaries and tuples.
//!
//! Everything draws from a caller-supplied RNG; [`seeded`] gives the
//! ChaCha8 stream used throughout the crate so that a seed fully determines
//! the output on every platform.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{BallSpec, Element, TracialAlgebra, Tuple};
use crate::{Mat, C64};

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sub-task `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

fn gaussian_c(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n × n` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(n: usize, rng: &mut impl Rng) -> Mat {
    DMatrix::from_fn(n, n, |_, _| gaussian_c(rng))
}

/// Haar unitary via QR of a Ginibre matrix, with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> Mat {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= ph;
        }
    }
    q
}

/// Gaussian element normalized so that `E τ(x* x) = 1`.
pub fn random_element(alg: &Arc<TracialAlgebra>, rng: &mut impl Rng) -> Element {
    let blocks = alg
        .blocks()
        .iter()
        .map(|b| ginibre(b.dim, rng) * C64::new(1.0 / (b.dim as f64).sqrt(), 0.0))
        .collect();
    Element::from_blocks(alg, blocks).expect("shapes match")
}

pub fn random_selfadjoint(alg: &Arc<TracialAlgebra>, rng: &mut impl Rng) -> Element {
    let x = random_element(alg, rng);
    (&x + &x.adjoint()).scale_re(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn random_unitary(alg: &Arc<TracialAlgebra>, rng: &mut impl Rng) -> Element {
    let blocks = alg.blocks().iter().map(|b| haar_unitary(b.dim, rng)).collect();
    Element::from_blocks(alg, blocks).expect("shapes match")
}

pub fn random_tuple(alg: &Arc<TracialAlgebra>, arity: usize, rng: &mut impl Rng) -> Tuple {
    Tuple::new((0..arity).map(|_| random_element(alg, rng)).collect()).expect("arity > 0")
}

pub fn random_selfadjoint_tuple(alg: &Arc<TracialAlgebra>, arity: usize, rng: &mut impl Rng) -> Tuple {
    Tuple::new((0..arity).map(|_| random_selfadjoint(alg, rng)).collect()).expect("arity > 0")
}

/// Random point of `D_r`: a Gaussian tuple rescaled per entry to operator
/// norm `U r_k` with `U` uniform on `[0, 1]`.
pub fn random_in_ball(alg: &Arc<TracialAlgebra>, ball: &BallSpec, rng: &mut impl Rng) -> Tuple {
    let entries = ball
        .radii()
        .iter()
        .map(|&r| {
            let x = random_element(alg, rng);
            let s: f64 = rng.random_range(0.0..=1.0);
            let n = x.op_norm();
            if n > 0.0 {
                x.scale_re(s * r / n)
            } else {
                x
            }
        })
        .collect();
    Tuple::new(entries).expect("arity > 0")
}
