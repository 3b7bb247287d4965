//! Monge-Kantorovich dual pairs for unitary orbit types, their extension to
//! globally admissible convex pairs, and the experiments built on them.
//!
//! For an orbit type `X` inside the ball `D_r`:
//!
//! * `ψ₀(y) = sup_u Re⟨uXu*, y⟩` is the support function of the orbit;
//! * `φ₀ = ψ₀^*` is its Legendre transform over `D_r`;
//! * `ψ₁ = φ₀^*` is the Legendre transform of `φ₀` over `D_r`, which agrees
//!   with `ψ₀` on `D_r`;
//! * `φ₂ = φ₀ + ½δ² + 2|r|δ` and `ψ₂ = ψ₁ + ½δ²`, with `δ` the distance to
//!   `D_r`, satisfy `φ₂(x) + ψ₂(y) ≥ Re⟨x, y⟩` everywhere.
//!
//! When `X` is a single Hermitian matrix all three potentials have closed
//! forms on Hermitian arguments. Writing `λ↓` for decreasing eigenvalues and
//! `τ = tr/n`:
//!
//! * `ψ₀(y) = (1/n) Σ λ↓(X)_i λ↓(Re y)_i` for every `y`;
//! * `φ₀(x) = (r/n) max_{0≤m≤n} (2 S_m − S_n)` with `S_m` the partial sums
//!   of `λ↓(x) − λ↓(X)`;
//! * `ψ₁(y) = ψ₀(P y) + r‖y − P y‖₁`, where `P` clips the spectrum to
//!   `[−r, r]` and `‖·‖₁ = τ|·|`.
//!
//! Other arguments go through the numeric Legendre solver and the orbit
//! optimizer, and report convergence accordingly.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::algebra::{
    dist_to_ball, generated_algebra_tol, project_ball, random, BallSpec, Element, Subalgebra, TracialAlgebra, Tuple,
};
use crate::convex::{
    envelope_gradient, lasry_lions, Eval, Expr, GradEval, Legendre, Node, Predicate, RegularizationParams,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::transport::{cost_orbit, wasserstein, OrbitType, TransportOptions};
use crate::{Mat, C64};

/// Relative rank cutoff for generated algebras of optimizer output.
pub const INTERPOLATION_RANK_TOL: f64 = 1e-7;

/// Recovery tolerance of the realization experiment.
pub const REALIZATION_TOL: f64 = 1e-5;

fn hermitian_block(x: &Element) -> Option<&Mat> {
    let scale = x.max_abs().max(1.0);
    x.is_self_adjoint(1e-12 * scale).then(|| x.block(0))
}

/// `V diag(d) V*`, as an element of the factor `alg`.
fn from_eigen(alg: &Arc<TracialAlgebra>, v: &Mat, d: &[f64]) -> Element {
    let diag = Mat::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&s| C64::new(s, 0.0))));
    Element::from_blocks(alg, vec![v * diag * v.adjoint()]).expect("square block of the factor")
}

fn single_radius(ball: &BallSpec) -> f64 {
    ball.radii()[0]
}

/// `ψ₀(y) = sup_u Re⟨uXu*, y⟩`, the support function of the orbit of `X`.
#[derive(Clone, Debug)]
pub struct OrbitSupport {
    rep: Tuple,
    /// Increasing spectrum of `X` when `X` is a single Hermitian matrix.
    spectrum: Option<Vec<f64>>,
    opts: TransportOptions,
}

impl OrbitSupport {
    pub fn new(x: &OrbitType, opts: TransportOptions) -> Self {
        let rep = x.rep().clone();
        let spectrum = (rep.arity() == 1)
            .then(|| hermitian_block(rep.entry(0)).map(linalg::hermitian_eigenvalues))
            .flatten();
        Self { rep, spectrum, opts }
    }

    /// Disables the closed forms, forcing the orbit optimizer.
    pub fn numeric_only(mut self) -> Self {
        self.spectrum = None;
        self
    }

    pub fn rep(&self) -> &Tuple {
        &self.rep
    }

    fn n(&self) -> f64 {
        self.rep.algebra().block_dim(0) as f64
    }
}

impl Predicate for OrbitSupport {
    fn arity(&self) -> usize {
        self.rep.arity()
    }

    fn eval(&self, y: &Tuple) -> Eval {
        let g = self.eval_grad(y).expect("always available");
        Eval {
            value: g.value,
            converged: g.converged,
        }
    }

    /// The maximizing conjugate `uXu*`.
    fn eval_grad(&self, y: &Tuple) -> Option<GradEval> {
        let alg = self.rep.algebra();
        if let Some(lam) = &self.spectrum {
            let (mu, v) = linalg::hermitian_eigen(y.entry(0).block(0));
            let value = lam.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>() / self.n();
            return Some(GradEval {
                value,
                grad: Tuple::single(from_eigen(alg, &v, lam)),
                converged: true,
            });
        }
        // cost_orbit maximizes Re⟨X, u y u*⟩ = Re⟨u* X u, y⟩.
        let c = cost_orbit(&self.rep, y, &self.opts).expect("compatible tuples in a factor");
        Some(GradEval {
            value: c.value,
            grad: self.rep.conjugate_by(&c.aligner.adjoint()),
            converged: c.converged,
        })
    }

    fn lipschitz_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(self.rep.norm())
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        Some(self.rep.norm() * ball.norm())
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(0.0)
    }
}

/// `φ₀(x) = sup_{y ∈ D_r} [Re⟨x, y⟩ − ψ₀(y)]`.
#[derive(Clone, Debug)]
pub struct OrbitConjugate {
    support: Arc<OrbitSupport>,
    ball: BallSpec,
    numeric: Legendre,
}

impl OrbitConjugate {
    pub fn new(support: Arc<OrbitSupport>, ball: BallSpec, opts: SolverOptions) -> Result<Self> {
        let numeric = Legendre::new(support.clone(), ball.clone(), opts)?;
        Ok(Self { support, ball, numeric })
    }

    pub fn support(&self) -> &Arc<OrbitSupport> {
        &self.support
    }

    fn closed_form(&self, x: &Tuple) -> Option<GradEval> {
        let lam = self.support.spectrum.as_ref()?;
        let (nu, v) = linalg::hermitian_eigen(hermitian_block(x.entry(0))?);
        let n = lam.len();
        let r = single_radius(&self.ball);
        // Partial sums over the top m eigenvalues, largest first.
        let mut best = (0.0, 0);
        let mut s = 0.0;
        for m in 1..=n {
            s += nu[n - m] - lam[n - m];
            if s > best.0 {
                best = (s, m);
            }
        }
        let (s_max, m) = best;
        let value = r / n as f64 * (2.0 * s_max - s);
        let d: Vec<f64> = (0..n).map(|i| if i >= n - m { r } else { -r }).collect();
        Some(GradEval {
            value,
            grad: Tuple::single(from_eigen(x.algebra(), &v, &d)),
            converged: true,
        })
    }
}

impl Predicate for OrbitConjugate {
    fn arity(&self) -> usize {
        self.support.arity()
    }

    fn eval(&self, x: &Tuple) -> Eval {
        match self.closed_form(x) {
            Some(g) => Eval::exact(g.value),
            None => self.numeric.eval(x),
        }
    }

    /// The maximizing `y*`.
    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        self.closed_form(x).or_else(|| self.numeric.eval_grad(x))
    }

    fn lipschitz_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(self.ball.norm())
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        self.numeric.bound_on(ball)
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(0.0)
    }
}

/// `ψ₁(y) = sup_{x ∈ D_r} [Re⟨x, y⟩ − φ₀(x)]`, defined on all of `L²`.
#[derive(Clone, Debug)]
pub struct OrbitBiconjugate {
    conjugate: Arc<OrbitConjugate>,
    numeric: Legendre,
}

impl OrbitBiconjugate {
    pub fn new(conjugate: Arc<OrbitConjugate>, opts: SolverOptions) -> Result<Self> {
        let numeric = Legendre::new(conjugate.clone(), conjugate.ball.clone(), opts)?;
        Ok(Self { conjugate, numeric })
    }

    fn closed_form(&self, y: &Tuple) -> Option<GradEval> {
        let lam = self.conjugate.support.spectrum.as_ref()?;
        let (mu, v) = linalg::hermitian_eigen(hermitian_block(y.entry(0))?);
        let r = single_radius(&self.conjugate.ball);
        let n = lam.len() as f64;
        let mut value = 0.0;
        let mut d = Vec::with_capacity(lam.len());
        for (&l, &m) in lam.iter().zip(&mu) {
            value += l * m.clamp(-r, r) + r * (m.abs() - r).max(0.0);
            d.push(if m.abs() <= r { l } else { r * m.signum() });
        }
        Some(GradEval {
            value: value / n,
            grad: Tuple::single(from_eigen(y.algebra(), &v, &d)),
            converged: true,
        })
    }
}

impl Predicate for OrbitBiconjugate {
    fn arity(&self) -> usize {
        self.conjugate.arity()
    }

    fn eval(&self, y: &Tuple) -> Eval {
        match self.closed_form(y) {
            Some(g) => Eval::exact(g.value),
            None => self.numeric.eval(y),
        }
    }

    fn eval_grad(&self, y: &Tuple) -> Option<GradEval> {
        self.closed_form(y).or_else(|| self.numeric.eval_grad(y))
    }

    fn lipschitz_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(self.conjugate.ball.norm())
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        Some(ball.norm() * self.conjugate.ball.norm() + self.conjugate.bound_on(&self.conjugate.ball)?)
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(0.0)
    }
}

/// `x ↦ base(x) + ½δ(x)² + slope·δ(x)` with `δ` the distance to a ball.
#[derive(Clone, Debug)]
pub struct BallExtension {
    base: Arc<dyn Predicate>,
    ball: BallSpec,
    slope: f64,
}

impl BallExtension {
    pub fn new(base: Arc<dyn Predicate>, ball: BallSpec, slope: f64) -> Result<Self> {
        if base.arity() != ball.arity() {
            return Err(Error::Predicate("ball arity does not match predicate".into()));
        }
        if !(slope >= 0.0) {
            return Err(Error::Predicate("extension slope must be nonnegative".into()));
        }
        Ok(Self { base, ball, slope })
    }

    pub fn base(&self) -> &Arc<dyn Predicate> {
        &self.base
    }

    fn penalty(&self, delta: f64) -> f64 {
        0.5 * delta * delta + self.slope * delta
    }
}

impl Predicate for BallExtension {
    fn arity(&self) -> usize {
        self.base.arity()
    }

    fn eval(&self, x: &Tuple) -> Eval {
        let e = self.base.eval(x);
        Eval {
            value: e.value + self.penalty(dist_to_ball(x, &self.ball)),
            converged: e.converged,
        }
    }

    /// Adds `(1 + slope/δ)(x − Px)` outside the ball.
    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        let g = self.base.eval_grad(x)?;
        let out = x.sub(&project_ball(x, &self.ball));
        let delta = out.norm();
        let grad = if delta > 0.0 {
            g.grad.axpy(1.0 + self.slope / delta, &out)
        } else {
            g.grad
        };
        Some(GradEval {
            value: g.value + self.penalty(delta),
            grad,
            converged: g.converged,
        })
    }

    fn semiconvexity_on(&self, ball: &BallSpec) -> Option<f64> {
        // δ and δ² are convex, so convexity of the base carries over.
        (self.base.semiconvexity_on(ball)? == 0.0).then_some(0.0)
    }
}

/// The three potentials of an orbit type together with their ball.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub ball: BallSpec,
    pub psi0: Arc<OrbitSupport>,
    pub phi0: Arc<OrbitConjugate>,
    pub psi1: Arc<OrbitBiconjugate>,
}

impl DualPair {
    /// True when every potential has a closed form on self-adjoint inputs.
    pub fn closed_form(&self) -> bool {
        self.psi0.spectrum.is_some()
    }
}

/// `ψ₀`, `φ₀ = ψ₀^*` and `ψ₁ = φ₀^*` for the orbit of `X` over `D_r`.
pub fn build_dual_pair(
    x: &OrbitType,
    ball: &BallSpec,
    transport: TransportOptions,
    solver: SolverOptions,
) -> Result<DualPair> {
    if ball.arity() != x.rep().arity() {
        return Err(Error::Shape("ball arity does not match the orbit type".into()));
    }
    if !ball.contains(x.rep()) {
        return Err(Error::Precondition("the representative lies outside the ball".into()));
    }
    let psi0 = Arc::new(OrbitSupport::new(x, transport));
    let phi0 = Arc::new(OrbitConjugate::new(psi0.clone(), ball.clone(), solver)?);
    let psi1 = Arc::new(OrbitBiconjugate::new(phi0.clone(), solver)?);
    Ok(DualPair {
        ball: ball.clone(),
        psi0,
        phi0,
        psi1,
    })
}

/// `(φ₂, ψ₂) = (φ₀ + ½δ² + 2|r|δ, ψ₁ + ½δ²)`.
///
/// With `x̂` the projection of `x` onto `D_r`, `Re⟨x̂, y⟩ ≤ φ₀(x̂) + ψ₁(y)`
/// for every `y`, `φ₀(x̂) ≤ φ₀(x) + |r|δ(x)`, and
/// `δ(x)‖y‖ ≤ |r|δ(x) + ½δ(x)² + ½δ(y)²`; together these give global
/// admissibility.
pub fn extend_global(
    phi0: Arc<dyn Predicate>,
    psi1: Arc<dyn Predicate>,
    ball: &BallSpec,
) -> Result<(BallExtension, BallExtension)> {
    Ok((
        BallExtension::new(phi0, ball.clone(), 2.0 * ball.norm())?,
        BallExtension::new(psi1, ball.clone(), 0.0)?,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub phi_x: f64,
    pub psi_y: f64,
    pub cost: f64,
    /// `φ(X) + ψ(Y_aligned) − C`.
    pub gap: f64,
    pub cost_converged: bool,
    pub potentials_converged: bool,
}

/// Duality gap of `(φ, ψ)` at the coupling `(X, uYu*)` found by the orbit
/// optimizer.
pub fn duality_gap(
    x: &OrbitType,
    y: &OrbitType,
    phi: &dyn Predicate,
    psi: &dyn Predicate,
    opts: &TransportOptions,
) -> Result<GapReport> {
    let w = wasserstein(x.rep(), y.rep(), opts)?;
    Ok(gap_at(x.rep(), &w.coupling.y_aligned, w.cost.value, w.cost.converged, phi, psi))
}

/// Duality gap at a given coupling with a known cost.
pub fn gap_at(x: &Tuple, y_aligned: &Tuple, cost: f64, cost_converged: bool, phi: &dyn Predicate, psi: &dyn Predicate) -> GapReport {
    let (ex, ey) = (phi.eval(x), psi.eval(y_aligned));
    GapReport {
        phi_x: ex.value,
        psi_y: ey.value,
        cost,
        gap: ex.value + ey.value - cost,
        cost_converged,
        potentials_converged: ex.converged && ey.converged,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub pairs: usize,
    /// Pairs with at least one point outside the ball.
    pub outside_pairs: usize,
    /// `min φ(x) + ψ(y) − Re⟨x, y⟩` over all pairs.
    pub min_margin: f64,
    pub tolerance: f64,
    pub unconverged: usize,
    pub passed: bool,
}

/// `φ(x) + ψ(y) ≥ Re⟨x, y⟩ − tol` over the grid `xs × ys`.
pub fn admissibility_check(
    phi: &dyn Predicate,
    psi: &dyn Predicate,
    xs: &[Tuple],
    ys: &[Tuple],
    ball: &BallSpec,
    tol: f64,
) -> AdmissibilityReport {
    let eval_all = |p: &dyn Predicate, pts: &[Tuple]| -> Vec<Eval> { pts.iter().map(|x| p.eval(x)).collect() };
    let (fx, fy) = (eval_all(phi, xs), eval_all(psi, ys));
    let outside = |pts: &[Tuple]| -> Vec<bool> { pts.iter().map(|p| !ball.contains(p)).collect() };
    let (ox, oy) = (outside(xs), outside(ys));
    let mut min_margin = f64::INFINITY;
    let mut outside_pairs = 0;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            let m = fx[i].value + fy[j].value - x.re_inner(y);
            min_margin = min_margin.min(if m.is_nan() { f64::NEG_INFINITY } else { m });
            outside_pairs += (ox[i] || oy[j]) as usize;
        }
    }
    let unconverged = fx.iter().chain(&fy).filter(|e| !e.converged).count();
    AdmissibilityReport {
        pairs: xs.len() * ys.len(),
        outside_pairs,
        min_margin,
        tolerance: tol,
        unconverged,
        passed: min_margin >= -tol,
    }
}

/// Self-adjoint tuples whose entries have operator norm uniform in
/// `[0, spread · r_k]`, so that with `spread > 1` a fraction land outside.
pub fn sample_selfadjoint_points(
    alg: &Arc<TracialAlgebra>,
    ball: &BallSpec,
    spread: f64,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<Tuple> {
    (0..count)
        .map(|_| {
            let entries = ball
                .radii()
                .iter()
                .map(|&r| {
                    let h = random::random_selfadjoint(alg, rng);
                    let s = rng.random::<f64>() * spread * r / h.op_norm().max(f64::MIN_POSITIVE);
                    h.scale_re(s)
                })
                .collect();
            Tuple::new(entries).expect("non-empty")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    pub t: f64,
    pub dim_midpoint: usize,
    pub dim_pair: usize,
    pub equal: bool,
    /// `W*((1−t)x + ty) ⊆ W*(x, y)` to the rank tolerance.
    pub contained: bool,
}

/// Compares `dim W*((1−t)x + t y)` with `dim W*(x, y)` for the aligned pair.
pub fn displacement_interpolation_check(x: &Tuple, y_aligned: &Tuple, t: f64) -> Result<InterpolationReport> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Precondition(format!("interpolation time {t} must lie in (0, 1)")));
    }
    if !x.compatible(y_aligned) {
        return Err(Error::Shape("tuples differ in algebra or arity".into()));
    }
    let mid = generated_algebra_tol(&x.lerp(y_aligned, t), INTERPOLATION_RANK_TOL);
    let pair = generated_algebra_tol(&x.concat(y_aligned)?, INTERPOLATION_RANK_TOL);
    Ok(InterpolationReport {
        t,
        dim_midpoint: mid.dim(),
        dim_pair: pair.dim(),
        equal: mid.dim() == pair.dim(),
        contained: pair.contains_subalgebra(&mid, 1e-6),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationReport {
    pub t: f64,
    pub r: f64,
    /// `max_k t‖z_k‖ / r`, required below `1/2`.
    pub gate: f64,
    pub error: f64,
    pub interior: bool,
    pub converged: bool,
    pub passed: bool,
}

/// Recovers `z ∈ W*(a)` as the gradient at `0` of the double envelope, with
/// parameters `(t, r, 2r)`, of `x ↦ Re⟨x, z⟩`.
pub fn definable_realization_demo(a: &Tuple, z: &Tuple, t: f64, r: f64, opts: SolverOptions) -> Result<RealizationReport> {
    if !a.algebra().eq(z.algebra()) {
        return Err(Error::Shape("a and z live in different algebras".into()));
    }
    if !(r > 0.0 && t > 0.0) {
        return Err(Error::Precondition("t and r must be positive".into()));
    }
    let gate = z.op_norms().iter().fold(0.0_f64, |m, n| m.max(t * n / r));
    if !(gate < 0.5) {
        return Err(Error::Precondition(format!("t‖z‖ = {} is not below r/2 = {}", gate * r, r / 2.0)));
    }
    let w = generated_algebra_tol(a, INTERPOLATION_RANK_TOL);
    for e in z.entries() {
        if w.residual(e) > 1e-7 * e.l2_norm().max(1.0) {
            return Err(Error::Precondition("z does not lie in the algebra generated by a".into()));
        }
    }
    let phi = Arc::new(Expr::linear(z, 0.0));
    let outer = BallSpec::uniform(z.arity(), r)?;
    let params = RegularizationParams::new(t, outer, BallSpec::uniform(z.arity(), 2.0 * r)?)?;
    let psi = lasry_lions(phi, &params, opts)?;
    let g = envelope_gradient(&psi, &Tuple::zeros(z.algebra(), z.arity()));
    let error = g.grad.dist(z);
    Ok(RealizationReport {
        t,
        r,
        gate,
        error,
        interior: g.interior,
        converged: g.converged,
        passed: error <= REALIZATION_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationReport {
    pub samples: usize,
    pub functionals: usize,
    /// `max φ_A(E_A z) − φ_A(z)`.
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `φ_A(E_A z) ≤ φ_A(z)` for `φ_A = max_i (Re⟨x, a_i⟩ − c_i)` with every
/// `a_i` in the subalgebra.
pub fn expectation_inequality_check(
    sub: &Subalgebra,
    functionals: &[(Tuple, f64)],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<ExpectationReport> {
    let Some((first, _)) = functionals.first() else {
        return Err(Error::Precondition("at least one affine functional is required".into()));
    };
    let arity = first.arity();
    let mut nodes = Vec::with_capacity(functionals.len());
    for (a, c) in functionals {
        if a.arity() != arity || !a.algebra().eq(sub.algebra()) {
            return Err(Error::Shape("functionals differ in arity or algebra".into()));
        }
        if a.entries().iter().any(|e| sub.residual(e) > 1e-9 * e.l2_norm().max(1.0)) {
            return Err(Error::Precondition("a coefficient lies outside the subalgebra".into()));
        }
        nodes.push(Expr::linear(a, -c).root().clone());
    }
    let phi = Expr::new(arity, Node::Max(nodes))?;
    let tol = 1e-9;
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..samples {
        let z = random::random_tuple(sub.algebra(), arity, rng);
        let v = phi.value(&sub.project_tuple(&z)) - phi.value(&z);
        max_violation = max_violation.max(v);
    }
    Ok(ExpectationReport {
        samples,
        functionals: functionals.len(),
        max_violation,
        tolerance: tol,
        passed: samples > 0 && max_violation <= tol,
    })
}
