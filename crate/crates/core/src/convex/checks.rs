//! Sampled checks of the quantitative inequalities of semiconvex calculus.
//! Each returns a [`CheckReport`] with the worst observed violation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::algebra::{random, BallSpec, Element, TracialAlgebra, Tuple};
use crate::error::{Error, Result};
use crate::linalg;

use super::envelope::{envelope_gradient, SupConvolution};
use super::Predicate;

/// A map between tuples, typically a gradient.
pub type GradientMap<'a> = dyn Fn(&Tuple) -> Tuple + 'a;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Evaluations whose inner optimization did not certify convergence.
    pub unconverged: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            samples: 0,
            max_violation: f64::NEG_INFINITY,
            tolerance,
            passed: false,
            unconverged: 0,
            extra: BTreeMap::new(),
        }
    }

    fn record(&mut self, violation: f64) {
        self.samples += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        self.max_violation = self.max_violation.max(v);
    }

    fn value(&mut self, p: &dyn Predicate, x: &Tuple) -> f64 {
        let e = p.eval(x);
        if !e.converged {
            self.unconverged += 1;
        }
        e.value
    }

    fn note_max(&mut self, key: &str, v: f64) {
        let e = self.extra.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    }

    fn finish(mut self) -> Self {
        self.passed = self.samples > 0 && self.max_violation <= self.tolerance;
        self
    }
}

const LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];

fn pair(p: &dyn Predicate, ball: &BallSpec, rng: &mut impl Rng, alg: &Arc<TracialAlgebra>) -> (Tuple, Tuple) {
    debug_assert_eq!(p.arity(), ball.arity());
    (random::random_in_ball(alg, ball, rng), random::random_in_ball(alg, ball, rng))
}

/// `φ((1−λ)x₀ + λx₁) ≤ (1−λ)φ(x₀) + λφ(x₁) + (c/2)λ(1−λ)‖x₁ − x₀‖²` for
/// `λ ∈ {1/4, 1/2, 3/4}` on sampled pairs of the ball.
pub fn semiconvexity_check(
    phi: &dyn Predicate,
    c: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    midpoint_check("semiconvexity", phi, c, 1.0, alg, ball, samples, tol, rng)
}

/// Mirror of [`semiconvexity_check`].
pub fn semiconcavity_check(
    phi: &dyn Predicate,
    c: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    midpoint_check("semiconcavity", phi, c, -1.0, alg, ball, samples, tol, rng)
}

#[allow(clippy::too_many_arguments)]
fn midpoint_check(
    name: &str,
    phi: &dyn Predicate,
    c: f64,
    sign: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new(name, tol);
    for _ in 0..samples {
        let (x0, x1) = pair(phi, ball, rng, alg);
        let (f0, f1) = (rep.value(phi, &x0), rep.value(phi, &x1));
        let d2 = x0.dist(&x1).powi(2);
        for lam in LAMBDAS {
            let fm = rep.value(phi, &x0.lerp(&x1, lam));
            let chord = (1.0 - lam) * f0 + lam * f1;
            rep.record(sign * (fm - chord) - c / 2.0 * lam * (1.0 - lam) * d2);
        }
    }
    rep.finish()
}

/// `|φ(x+y+z) − φ(x+y) − φ(x+z) + φ(x)| ≤ c‖y‖‖z‖` with `x` in half the
/// ball and `y, z` in a quarter of it, so all four points lie in the ball.
pub fn second_difference_check(
    phi: &dyn Predicate,
    c: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("second_difference", tol);
    let half = ball.scaled(0.5).expect("positive");
    let quarter = ball.scaled(0.25).expect("positive");
    for _ in 0..samples {
        let x = random::random_in_ball(alg, &half, rng);
        let y = random::random_in_ball(alg, &quarter, rng);
        let z = random::random_in_ball(alg, &quarter, rng);
        let xy = x.add(&y);
        let d = rep.value(phi, &xy.add(&z)) - rep.value(phi, &xy) - rep.value(phi, &x.add(&z)) + rep.value(phi, &x);
        rep.record(d.abs() - c * y.norm() * z.norm());
    }
    rep.finish()
}

/// Central differences on the real orthonormal basis with step
/// `h = 1e-5 (1 + ‖x‖)`.
pub fn finite_difference_gradient(p: &dyn Predicate, x: &Tuple) -> Tuple {
    let alg = x.algebra();
    let h = 1e-5 * (1.0 + x.norm());
    let coords: Vec<f64> = (0..x.real_dim())
        .map(|i| {
            let e = Tuple::real_basis_vector(alg, x.arity(), i);
            (p.value(&x.axpy(h, &e)) - p.value(&x.axpy(-h, &e))) / (2.0 * h)
        })
        .collect();
    Tuple::from_real_coords(alg, x.arity(), &coords)
}

/// `‖x' − x‖ ≤ (1/c)‖∇φ(x') − ∇φ(x)‖` for a `c`-strongly convex `φ`, with
/// gradients from the predicate or, failing that, finite differences.
pub fn strong_convexity_expansion_check(
    phi: &dyn Predicate,
    c: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("strong_convexity_expansion", tol);
    let grad = |x: &Tuple| match phi.eval_grad(x) {
        Some(g) => g.grad,
        None => finite_difference_gradient(phi, x),
    };
    for _ in 0..samples {
        let (x0, x1) = pair(phi, ball, rng, alg);
        let gap = grad(&x1).dist(&grad(&x0));
        rep.record(x1.dist(&x0) - gap / c);
    }
    rep.finish()
}

/// Sampled Lipschitz ratios `‖∇ψ(x') − ∇ψ(x)‖ / ‖x' − x‖`; each ratio
/// exceeding `L` counts as a violation of that size.
#[allow(clippy::too_many_arguments)]
pub fn gradient_lipschitz_check(
    grad: &GradientMap,
    l: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("gradient_lipschitz", tol);
    for _ in 0..samples {
        let x0 = random::random_in_ball(alg, ball, rng);
        let x1 = random::random_in_ball(alg, ball, rng);
        let d = x1.dist(&x0);
        if d > 0.0 {
            let ratio = grad(&x1).dist(&grad(&x0)) / d;
            rep.record(ratio - l);
            rep.note_max("sampled_lipschitz", ratio);
        }
    }
    rep.finish()
}

/// `|ψ(x') − ψ(x) − Re⟨x' − x, ∇ψ(x)⟩| ≤ (c/2)‖x' − x‖²`.
#[allow(clippy::too_many_arguments)]
pub fn quadratic_expansion_check(
    psi: &dyn Predicate,
    grad: &GradientMap,
    c: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("quadratic_expansion", tol);
    for _ in 0..samples {
        let (x, x1) = pair(psi, ball, rng, alg);
        let g = grad(&x);
        let d = x1.sub(&x);
        let r = rep.value(psi, &x1) - rep.value(psi, &x) - d.re_inner(&g);
        rep.record(r.abs() - c / 2.0 * d.norm_sq());
    }
    rep.finish()
}

/// Compares `grad` with central differences of `psi` at each point. The
/// error is `‖g_fd − g‖ / max(‖g‖, 1)`: relative for gradients above unit
/// size and absolute below.
pub fn gradient_fd_check(psi: &dyn Predicate, grad: &GradientMap, points: &[Tuple], tol: f64) -> CheckReport {
    let mut rep = CheckReport::new("gradient_vs_finite_differences", tol);
    for x in points {
        let g = grad(x);
        let fd = finite_difference_gradient(psi, x);
        rep.record(fd.dist(&g) / g.norm().max(1.0));
    }
    rep.finish()
}

/// `lo ≤ ψ − φ ≤ hi` on sampled points of the ball.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    psi: &dyn Predicate,
    phi: &dyn Predicate,
    lo: f64,
    hi: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("error_sandwich", tol);
    rep.extra.insert("lower".into(), lo);
    rep.extra.insert("upper".into(), hi);
    for _ in 0..samples {
        let x = random::random_in_ball(alg, ball, rng);
        let d = rep.value(psi, &x) - rep.value(phi, &x);
        rep.record((lo - d).max(d - hi));
        rep.note_max("max_abs_error", d.abs());
    }
    rep.finish()
}

/// `‖∇ψ(x)_k‖_op ≤ (r_k + R_k)/t` on `D_r` for the double envelope `ψ`
/// whose inner radii are `inner`.
pub fn gradient_range_check(
    psi: &SupConvolution,
    inner: &BallSpec,
    alg: &Arc<TracialAlgebra>,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> CheckReport {
    let mut rep = CheckReport::new("gradient_range", tol);
    let (outer, t) = (psi.ball(), psi.t());
    for _ in 0..samples {
        let x = random::random_in_ball(alg, outer, rng);
        let g = envelope_gradient(psi, &x);
        if !g.converged {
            rep.unconverged += 1;
        }
        let excess = g
            .grad
            .entries()
            .iter()
            .zip(outer.radii().iter().zip(inner.radii()))
            .map(|(e, (r, big))| e.op_norm() - (r + big) / t)
            .fold(f64::NEG_INFINITY, f64::max);
        rep.record(excess);
    }
    rep.finish()
}

fn spectral_diameter(x: &Element) -> f64 {
    let ev = linalg::hermitian_eigenvalues(x.block(0));
    ev.last().expect("n ≥ 1") - ev.first().expect("n ≥ 1")
}

fn require_factor(alg: &TracialAlgebra) -> Result<()> {
    if !alg.is_factor() {
        return Err(Error::Precondition("spectral checks need a single-block algebra".into()));
    }
    Ok(())
}

/// For `F` mapping self-adjoint tuples to self-adjoint tuples, checks
/// `diam Spec F_i(x) ≤ L (Σ_j diam Spec(x_j)²)^{1/2}` for every output `i`.
/// Self-adjointness of outputs and unitary equivariance
/// `F(uxu*) = uF(x)u*` (to `1e-8`) are part of the pass condition.
#[allow(clippy::too_many_arguments)]
pub fn spectral_diameter_check(
    f: &GradientMap,
    l: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    require_factor(alg)?;
    let mut rep = CheckReport::new("spectral_diameter", tol);
    rep.extra.insert("equivariance_error".into(), 0.0);
    rep.extra.insert("self_adjoint_error".into(), 0.0);
    for _ in 0..samples {
        let x = random::random_in_ball(alg, ball, rng).map(|e| (e + &e.adjoint()).scale_re(0.5));
        let fx = f(&x);
        let u = random::random_unitary(alg, rng);
        let equiv = f(&x.conjugate_by(&u)).dist(&fx.conjugate_by(&u));
        rep.note_max("equivariance_error", equiv);
        let sa = fx.dist(&fx.adjoint());
        rep.note_max("self_adjoint_error", sa);
        let k = x.entries().iter().map(|e| spectral_diameter(e).powi(2)).sum::<f64>().sqrt();
        for out in fx.entries() {
            let d = spectral_diameter(&(out + &out.adjoint()).scale_re(0.5));
            rep.record(d - l * k);
            if k > 0.0 {
                rep.note_max("max_ratio", d / k);
            }
        }
    }
    let mut rep = rep.finish();
    rep.passed &= rep.extra["equivariance_error"] <= 1e-8 && rep.extra["self_adjoint_error"] <= 1e-8;
    Ok(rep)
}

/// `‖F_i(x)‖ ≤ t + 9L|r|` on `D_r` with `t = max_i |τ(F_i(0))|`.
#[allow(clippy::too_many_arguments)]
pub fn range_bound_check(
    f: &GradientMap,
    l: f64,
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    require_factor(alg)?;
    let mut rep = CheckReport::new("range_bound", tol);
    let f0 = f(&Tuple::zeros(alg, ball.arity()));
    let t = f0.entries().iter().map(|e| e.trace().norm()).fold(0.0, f64::max);
    let bound = t + 9.0 * l * ball.norm();
    rep.extra.insert("bound".into(), bound);
    for _ in 0..samples {
        let x = random::random_in_ball(alg, ball, rng);
        for out in f(&x).entries() {
            let n = out.op_norm();
            rep.record(n - bound);
            rep.note_max("max_op_norm", n);
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Expr;

    #[test]
    fn trivial_convexity_examples() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let ball = BallSpec::uniform(2, 1.0).unwrap();
        let mut rng = random::seeded(1);
        let q = Expr::half_norm_sq(2, 1.0);
        assert!(semiconvexity_check(&q, 0.0, &alg, &ball, 50, 1e-10, &mut rng).passed);
        let nq = Expr::half_norm_sq(2, -1.0);
        assert!(semiconvexity_check(&nq, 1.0, &alg, &ball, 50, 1e-10, &mut rng).passed);
        let rep = semiconvexity_check(&nq, 0.5, &alg, &ball, 50, 1e-10, &mut rng);
        assert!(!rep.passed && rep.max_violation > 0.0);
        assert!(semiconcavity_check(&q, 1.0, &alg, &ball, 50, 1e-10, &mut rng).passed);
    }

    #[test]
    fn second_difference_is_tight_for_quadratics() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let ball = BallSpec::uniform(1, 2.0).unwrap();
        let mut rng = random::seeded(2);
        // For (c/2)‖x‖² the second difference is exactly c Re⟨y, z⟩.
        let q = Expr::half_norm_sq(1, 3.0);
        let rep = second_difference_check(&q, 3.0, &alg, &ball, 100, 1e-12, &mut rng);
        assert!(rep.passed);
        assert!(rep.max_violation > -0.5, "Cauchy-Schwarz should be nearly tight somewhere");
        let lin = Expr::linear(&random::random_tuple(&alg, 1, &mut rng), 1.0);
        let rep = second_difference_check(&lin, 0.0, &alg, &ball, 50, 1e-12, &mut rng);
        assert!(rep.passed);
    }

    #[test]
    fn expansion_equality_for_round_quadratic() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let ball = BallSpec::uniform(2, 1.0).unwrap();
        let mut rng = random::seeded(3);
        let q = Expr::half_norm_sq(2, 2.0);
        let rep = strong_convexity_expansion_check(&q, 2.0, &alg, &ball, 50, 1e-12, &mut rng);
        assert!(rep.passed);
        assert!(rep.max_violation.abs() < 1e-12);
    }

    #[test]
    fn spectral_checks_on_simple_maps() {
        let alg = TracialAlgebra::matrix(3).unwrap();
        let ball = BallSpec::uniform(1, 1.0).unwrap();
        let mut rng = random::seeded(4);
        let id = |x: &Tuple| x.clone();
        let rep = spectral_diameter_check(&id, 1.0, &alg, &ball, 30, 1e-9, &mut rng).unwrap();
        assert!(rep.passed);
        assert!(rep.max_violation.abs() < 1e-9, "identity attains equality");
        let tr = |x: &Tuple| x.map(|e| Element::scalar(e.algebra(), e.trace()));
        assert!(spectral_diameter_check(&tr, 1.0, &alg, &ball, 30, 1e-9, &mut rng).unwrap().passed);
        let rep = range_bound_check(&id, 1.0, &alg, &ball, 30, 0.0, &mut rng).unwrap();
        assert!(rep.passed);
        let c = |x: &Tuple| x.map(|e| Element::scalar(e.algebra(), crate::C64::new(-2.5, 0.0)));
        let rep = range_bound_check(&c, 0.0, &alg, &ball, 10, 1e-12, &mut rng).unwrap();
        assert!(rep.passed && rep.max_violation.abs() < 1e-12);
        let sum = TracialAlgebra::from_parts(&[(1, 1, 2), (1, 1, 2)]).unwrap();
        assert!(spectral_diameter_check(&id, 1.0, &sum, &ball, 1, 0.0, &mut rng).is_err());
    }

    #[test]
    fn non_equivariant_map_is_rejected() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let ball = BallSpec::uniform(1, 1.0).unwrap();
        let mut rng = random::seeded(5);
        let p = Element::diag(&alg, &[1.0, 0.0]).unwrap();
        let f = |x: &Tuple| x.map(|e| (&p * e) * &p);
        let rep = spectral_diameter_check(&f, 10.0, &alg, &ball, 10, 1e-9, &mut rng).unwrap();
        assert!(!rep.passed);
    }
}
