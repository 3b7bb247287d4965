//! Optimal couplings between unitary orbits of matrix tuples.
//!
//! For tuples `X`, `Y` in a single factor `M_n` the cost
//! `C(X, Y) = sup_u Re⟨X, u Y u*⟩` is maximized by Riemannian gradient
//! ascent on `U(n)` with a Cayley retraction and Armijo backtracking, from
//! the identity and from Haar-random starts. The Wasserstein distance
//! follows from `d² = ‖X‖² + ‖Y‖² − 2C`.

use itertools::Itertools;
use serde::Serialize;

use crate::algebra::random::{haar_unitary, substream};
use crate::algebra::{BallSpec, Element, Tuple};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{Mat, C64};

#[derive(Clone, Debug, Serialize)]
pub struct TransportOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            tol: 1e-9,
            max_iter: 5000,
            seed: 0,
        }
    }
}

/// A tuple up to unitary conjugation, with a ball it lives in.
#[derive(Clone, Debug)]
pub struct OrbitType {
    rep: Tuple,
    ball: BallSpec,
}

impl OrbitType {
    /// Uses the smallest ball containing the representative.
    pub fn new(rep: Tuple) -> Result<Self> {
        let radii = rep.op_norms().iter().map(|r| r.max(f64::MIN_POSITIVE)).collect();
        Self::with_ball(rep, BallSpec::new(radii)?)
    }

    pub fn with_ball(rep: Tuple, ball: BallSpec) -> Result<Self> {
        if !rep.algebra().is_factor() {
            return Err(Error::Precondition(
                "orbit types are only supported in single-block algebras".into(),
            ));
        }
        if !ball.contains(&rep) {
            return Err(Error::Precondition("representative lies outside its ball".into()));
        }
        Ok(Self { rep, ball })
    }

    pub fn rep(&self) -> &Tuple {
        &self.rep
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }
}

/// A pair realized in one algebra with the aligning unitary `u`, so that
/// `(x, u y u*)` is the coupling.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub x: Tuple,
    pub y: Tuple,
    pub aligner: Element,
    pub y_aligned: Tuple,
}

#[derive(Clone, Debug)]
pub struct CostResult {
    pub value: f64,
    pub aligner: Element,
    /// The winning restart met the gradient tolerance.
    pub converged: bool,
    pub grad_norm: f64,
    pub best_restart: usize,
    pub restarts_converged: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct WassersteinResult {
    pub d: f64,
    /// `‖X‖² + ‖Y‖² − 2C` before clamping at zero.
    pub raw_d2: f64,
    pub cost: CostResult,
    pub coupling: Coupling,
}

struct Ascent {
    value: f64,
    u: Mat,
    converged: bool,
    grad_norm: f64,
    iterations: usize,
}

fn check_pair(x: &Tuple, y: &Tuple) -> Result<()> {
    if !x.algebra().is_factor() {
        return Err(Error::Precondition(
            "transport runs on single-block algebras only".into(),
        ));
    }
    if !x.compatible(y) {
        return Err(Error::Shape("tuples differ in algebra or arity".into()));
    }
    Ok(())
}

/// Objective `Re Σ_k τ(X_k* u Y_k u*)` and skew-Hermitian Riemannian
/// gradient `G = (M* − M)/2`, `M = Σ_k (W_k X_k* − X_k* W_k)`, `W = u Y u*`.
fn value_and_grad(xs: &[Mat], ys: &[Mat], u: &Mat, n: f64) -> (f64, Mat) {
    let dim = u.nrows();
    let ua = u.adjoint();
    let mut val = 0.0;
    let mut m = Mat::zeros(dim, dim);
    for (x, y) in xs.iter().zip(ys) {
        let w = u * y * &ua;
        val += x.dotc(&w).re / n;
        let xa = x.adjoint();
        m += &w * &xa - &xa * &w;
    }
    let g = (m.adjoint() - m) * C64::new(0.5, 0.0);
    (val, g)
}

fn value(xs: &[Mat], ys: &[Mat], u: &Mat, n: f64) -> f64 {
    let ua = u.adjoint();
    xs.iter().zip(ys).map(|(x, y)| x.dotc(&(u * y * &ua)).re / n).sum()
}

/// `(I − A/2)^{-1} (I + A/2)`, unitary for skew-Hermitian `A`.
fn cayley(a: &Mat) -> Mat {
    let n = a.nrows();
    let half = a * C64::new(0.5, 0.0);
    let id = Mat::identity(n, n);
    (&id - &half)
        .lu()
        .solve(&(&id + &half))
        .expect("I - A/2 is invertible for skew-Hermitian A")
}

/// Polar factor `U V*` of `m = U Σ V*`.
fn nearest_unitary(m: &Mat) -> Mat {
    let svd = m.clone().svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

fn ascend(xs: &[Mat], ys: &[Mat], mut u: Mat, tol: f64, max_iter: usize) -> Ascent {
    let n = u.nrows() as f64;
    let scale: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| linalg::spectral_norm(x) * linalg::spectral_norm(y))
        .sum();
    let tol_abs = tol * scale.max(1.0);
    let mut step = 1.0 / scale.max(1e-300);
    let (mut f, mut g) = value_and_grad(xs, ys, &u, n);
    let mut gnorm = (g.norm_squared() / n).sqrt();
    let mut iterations = 0;
    let mut converged = gnorm <= tol_abs;
    while !converged && iterations < max_iter {
        iterations += 1;
        // Below this predicted increase, value comparisons are rounding
        // noise and the step is judged by the gradient norm instead.
        let noise = 1e-13 * (1.0 + f.abs());
        let mut accepted = false;
        let mut step_used = 0.0;
        for _ in 0..60 {
            let cand = cayley(&(&g * C64::new(step, 0.0))) * &u;
            if step * gnorm * gnorm > noise {
                let fc = value(xs, ys, &cand, n);
                if fc >= f + 0.3 * step * gnorm * gnorm {
                    u = cand;
                    accepted = true;
                    step_used = step;
                    step *= 2.0;
                    break;
                }
            } else {
                let (_, gc) = value_and_grad(xs, ys, &cand, n);
                if gc.norm_squared() < g.norm_squared() {
                    u = cand;
                    accepted = true;
                    step_used = step;
                    step *= 2.0;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if iterations % 16 == 0 {
            u = nearest_unitary(&u);
        }
        let taken = &g * C64::new(step_used, 0.0);
        let g_prev = g;
        (f, g) = value_and_grad(xs, ys, &u, n);
        // Barzilai-Borwein trial step for the next iteration.
        let dg = &g_prev - &g;
        let sy = taken.dot(&dg).re;
        if sy > 0.0 {
            step = (taken.norm_squared() / sy).clamp(1e-6 / scale.max(1e-300), 1e6 / scale.max(1e-300));
        }
        gnorm = (g.norm_squared() / n).sqrt();
        converged = gnorm <= tol_abs;
    }
    let u = nearest_unitary(&u);
    let f = value(xs, ys, &u, n);
    Ascent {
        value: f,
        u,
        converged,
        grad_norm: gnorm,
        iterations,
    }
}

/// `C(X, Y) = sup_u Re⟨X, u Y u*⟩` with the maximizing `u`.
///
/// Restart 0 starts at the identity; restart `r > 0` at a Haar unitary from
/// stream `r` of `opts.seed`. The best value wins, ties going to the lower
/// restart index, so more restarts never lower the result. An unconverged
/// winner is polished by a second ascent from its endpoint.
pub fn cost_orbit(x: &Tuple, y: &Tuple, opts: &TransportOptions) -> Result<CostResult> {
    check_pair(x, y)?;
    let alg = x.algebra();
    let n = alg.block_dim(0);
    let xs: Vec<Mat> = x.entries().iter().map(|e| e.block(0).clone()).collect();
    let ys: Vec<Mat> = y.entries().iter().map(|e| e.block(0).clone()).collect();
    let mut best: Option<(usize, Ascent)> = None;
    let mut restarts_converged = 0;
    let mut iterations = 0;
    for r in 0..opts.restarts.max(1) {
        let u0 = if r == 0 {
            Mat::identity(n, n)
        } else {
            haar_unitary(n, &mut substream(opts.seed, r as u64))
        };
        let a = ascend(&xs, &ys, u0, opts.tol, opts.max_iter);
        iterations += a.iterations;
        restarts_converged += a.converged as usize;
        if best.as_ref().is_none_or(|(_, b)| a.value > b.value) {
            best = Some((r, a));
        }
    }
    let (best_restart, mut a) = best.expect("at least one restart");
    if !a.converged {
        // Near-degenerate spectra make the final approach slow; give the
        // winner one more budget.
        let p = ascend(&xs, &ys, a.u.clone(), opts.tol, opts.max_iter);
        iterations += p.iterations;
        if p.converged || p.value > a.value {
            restarts_converged += p.converged as usize;
            a = p;
        }
    }
    Ok(CostResult {
        value: a.value,
        aligner: Element::from_blocks(alg, vec![a.u])?,
        converged: a.converged,
        grad_norm: a.grad_norm,
        best_restart,
        restarts_converged,
        iterations,
    })
}

pub fn cost_orbit_types(x: &OrbitType, y: &OrbitType, opts: &TransportOptions) -> Result<CostResult> {
    cost_orbit(x.rep(), y.rep(), opts)
}

/// `d_W(X, Y)` from the optimal cost, clamped at zero.
pub fn wasserstein(x: &Tuple, y: &Tuple, opts: &TransportOptions) -> Result<WassersteinResult> {
    let cost = cost_orbit(x, y, opts)?;
    let raw_d2 = x.norm_sq() + y.norm_sq() - 2.0 * cost.value;
    let y_aligned = y.conjugate_by(&cost.aligner);
    Ok(WassersteinResult {
        d: raw_d2.max(0.0).sqrt(),
        raw_d2,
        coupling: Coupling {
            x: x.clone(),
            y: y.clone(),
            aligner: cost.aligner.clone(),
            y_aligned,
        },
        cost,
    })
}

pub fn wasserstein_types(x: &OrbitType, y: &OrbitType, opts: &TransportOptions) -> Result<WassersteinResult> {
    wasserstein(x.rep(), y.rep(), opts)
}

/// Largest size accepted by the brute-force oracles.
pub const ORACLE_MAX_N: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentResult {
    /// `Σ_i λ_i↓(X) λ_i↓(Y) / n`.
    pub sorted: f64,
    /// Maximum over all `n!` permutations of the same pairing.
    pub brute_force: f64,
}

/// Exact optimum of `sup_u Re τ(X u Y u*)` for one Hermitian pair.
pub fn assignment_oracle(x: &Element, y: &Element) -> Result<AssignmentResult> {
    let (ex, ey) = hermitian_pair_spectra(x, y)?;
    let n = ex.len();
    let sorted = ex.iter().zip(&ey).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let brute_force = (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| ex[i] * ey[j]).sum::<f64>() / n as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AssignmentResult { sorted, brute_force })
}

/// Sorted-eigenvalue pairing only; valid for any `n`.
pub fn rearrangement_cost(x: &Mat, y: &Mat) -> f64 {
    let ex = linalg::hermitian_eigenvalues(x);
    let ey = linalg::hermitian_eigenvalues(y);
    ex.iter().zip(&ey).map(|(a, b)| a * b).sum::<f64>() / ex.len() as f64
}

fn hermitian_pair_spectra(x: &Element, y: &Element) -> Result<(Vec<f64>, Vec<f64>)> {
    if !x.algebra().is_factor() || !x.same_algebra(y) {
        return Err(Error::Precondition("oracle needs two elements of one factor".into()));
    }
    let n = x.algebra().block_dim(0);
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!("oracle supports n ≤ {ORACLE_MAX_N}, got {n}")));
    }
    let scale = x.max_abs().max(y.max_abs()).max(1.0);
    if !x.is_self_adjoint(1e-12 * scale) || !y.is_self_adjoint(1e-12 * scale) {
        return Err(Error::Precondition("oracle needs Hermitian inputs".into()));
    }
    Ok((
        linalg::hermitian_eigenvalues(x.block(0)),
        linalg::hermitian_eigenvalues(y.block(0)),
    ))
}

/// Permutation brute force for tuples of diagonal matrices:
/// `max_σ Σ_k Re (1/n) Σ_i conj(x_k,ii) y_k,σ(i)σ(i)`.
///
/// Permutation matrices are unitary, so this is a lower bound on the cost;
/// it equals the cost when the optimum is attained at a permutation.
pub fn permutation_brute_force(x: &Tuple, y: &Tuple) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.algebra().block_dim(0);
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!("oracle supports n ≤ {ORACLE_MAX_N}, got {n}")));
    }
    let diag = |t: &Tuple| -> Vec<Vec<C64>> {
        t.entries()
            .iter()
            .map(|e| (0..n).map(|i| e.block(0)[(i, i)]).collect())
            .collect()
    };
    let (dx, dy) = (diag(x), diag(y));
    Ok((0..n)
        .permutations(n)
        .map(|p| {
            dx.iter()
                .zip(&dy)
                .map(|(a, b)| {
                    p.iter()
                        .enumerate()
                        .map(|(i, &j)| (a[i].conj() * b[j]).re)
                        .sum::<f64>()
                })
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random, TracialAlgebra};

    fn diag(vals: &[f64]) -> Tuple {
        let a = TracialAlgebra::matrix(vals.len()).unwrap();
        Tuple::single(Element::diag(&a, vals).unwrap())
    }

    fn opts() -> TransportOptions {
        TransportOptions {
            restarts: 5,
            ..Default::default()
        }
    }

    #[test]
    fn cost_examples() {
        let c = cost_orbit(&diag(&[0.0, 2.0]), &diag(&[1.0, 3.0]), &opts()).unwrap();
        assert!((c.value - 3.0).abs() < 1e-9, "{}", c.value);
        assert!(c.converged);
        let c = cost_orbit(&diag(&[0.0, 1.0]), &diag(&[1.0, 0.0]), &opts()).unwrap();
        assert!((c.value - 0.5).abs() < 1e-9, "{}", c.value);
    }

    #[test]
    fn self_coupling() {
        let a = TracialAlgebra::matrix(3).unwrap();
        let x = random::random_tuple(&a, 2, &mut random::seeded(1));
        let c = cost_orbit(&x, &x, &opts()).unwrap();
        assert!((c.value - x.norm_sq()).abs() < 1e-9);
        // The identity start is already optimal.
        let c0 = cost_orbit(&x, &x, &TransportOptions { restarts: 1, ..opts() }).unwrap();
        assert!((c0.value - x.norm_sq()).abs() < 1e-12);
        assert_eq!(c0.iterations, 0);
    }

    #[test]
    fn wasserstein_examples() {
        let w = wasserstein(&diag(&[0.0, 2.0]), &diag(&[1.0, 3.0]), &opts()).unwrap();
        assert!((w.d - 1.0).abs() < 1e-8);
        let a = TracialAlgebra::matrix(3).unwrap();
        let mut rng = random::seeded(2);
        let x = random::random_tuple(&a, 2, &mut rng);
        let u = random::random_unitary(&a, &mut rng);
        let w = wasserstein(&x, &x.conjugate_by(&u), &opts()).unwrap();
        assert!(w.d <= 1e-7, "{}", w.d);
        let w = wasserstein(&x, &x, &opts()).unwrap();
        assert!(w.d <= 1e-7);
    }

    #[test]
    fn oracle_examples() {
        let m2 = TracialAlgebra::matrix(2).unwrap();
        let d = |v: &[f64]| Element::diag(&m2, v).unwrap();
        let r = assignment_oracle(&d(&[1.0, 2.0]), &d(&[1.0, 2.0])).unwrap();
        assert!((r.sorted - 2.5).abs() < 1e-12 && (r.brute_force - 2.5).abs() < 1e-12);
        let r = assignment_oracle(&d(&[0.0, 2.0]), &d(&[1.0, 3.0])).unwrap();
        assert!((r.sorted - 3.0).abs() < 1e-12 && (r.brute_force - 3.0).abs() < 1e-12);
        let r = assignment_oracle(&d(&[1.0, -1.0]), &d(&[-1.0, 1.0])).unwrap();
        assert!((r.sorted - 1.0).abs() < 1e-12 && (r.brute_force - 1.0).abs() < 1e-12);
        let m9 = TracialAlgebra::with_cap(
            vec![crate::algebra::Block { dim: 9, weight: crate::Rational::from_integer(1) }],
            81,
        )
        .unwrap();
        let big = Element::identity(&m9);
        assert!(matches!(assignment_oracle(&big, &big), Err(Error::TooLarge(_))));
        let nh = Element::matrix_unit(&m2, 0, 0, 1);
        assert!(assignment_oracle(&nh, &nh).is_err());
    }

    #[test]
    fn matches_oracle_and_is_symmetric() {
        let mut rng = random::seeded(3);
        for n in 2..=4 {
            let a = TracialAlgebra::matrix(n).unwrap();
            for _ in 0..3 {
                let x = random::random_selfadjoint(&a, &mut rng);
                let y = random::random_selfadjoint(&a, &mut rng);
                let o = assignment_oracle(&x, &y).unwrap();
                assert!((o.sorted - o.brute_force).abs() < 1e-12);
                let (tx, ty) = (Tuple::single(x), Tuple::single(y));
                let c = cost_orbit(&tx, &ty, &opts()).unwrap();
                assert!((c.value - o.sorted).abs() < 1e-6, "{} vs {}", c.value, o.sorted);
                let c2 = cost_orbit(&ty, &tx, &opts()).unwrap();
                assert!((c.value - c2.value).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn more_restarts_never_hurt() {
        let a = TracialAlgebra::matrix(3).unwrap();
        let mut rng = random::seeded(6);
        let x = random::random_tuple(&a, 2, &mut rng);
        let y = random::random_tuple(&a, 2, &mut rng);
        let mut last = f64::NEG_INFINITY;
        for r in [1, 2, 4, 8] {
            let c = cost_orbit(&x, &y, &TransportOptions { restarts: r, ..opts() }).unwrap();
            assert!(c.value >= last);
            last = c.value;
        }
    }

    #[test]
    fn rejects_direct_sums() {
        let a = TracialAlgebra::from_parts(&[(1, 1, 2), (1, 1, 2)]).unwrap();
        let x = Tuple::zeros(&a, 1);
        assert!(cost_orbit(&x, &x, &opts()).is_err());
        assert!(OrbitType::new(x).is_err());
    }
}
