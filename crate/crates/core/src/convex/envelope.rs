use std::cell::Cell;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{project_ball, BallSpec, Tuple};
use crate::error::{Error, Result};

use super::solver::{self, Solution, SolverOptions};
use super::{Eval, GradEval, Predicate};

fn grad_of(p: &dyn Predicate, x: &Tuple, flag: &Cell<bool>) -> (f64, Tuple) {
    let g = p
        .eval_grad(x)
        .unwrap_or_else(|| panic!("predicate {p:?} provides no gradient"));
    if !g.converged {
        flag.set(false);
    }
    (g.value, g.grad)
}

fn check_arity(p: &dyn Predicate, ball: &BallSpec) -> Result<()> {
    if p.arity() != ball.arity() {
        return Err(Error::Predicate(format!(
            "predicate arity {} does not match ball arity {}",
            p.arity(),
            ball.arity()
        )));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Predicate(format!("envelope parameter t = {t} must be positive")));
    }
    Ok(())
}

/// `φ₀(x) = sup_{y ∈ D_r} [Re⟨x, y⟩ − ψ(y)]`.
///
/// Convex and `|r|`-Lipschitz whatever `ψ` is. The sup is computed by
/// projected ascent; the value is a lower bound, exact when `converged`.
#[derive(Clone, Debug)]
pub struct Legendre {
    psi: Arc<dyn Predicate>,
    ball: BallSpec,
    opts: SolverOptions,
}

impl Legendre {
    pub fn new(psi: Arc<dyn Predicate>, ball: BallSpec, opts: SolverOptions) -> Result<Self> {
        check_arity(psi.as_ref(), &ball)?;
        Ok(Self { psi, ball, opts })
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    pub fn inner(&self) -> &Arc<dyn Predicate> {
        &self.psi
    }

    /// The maximizing `y` and the maximum.
    pub fn solve(&self, x: &Tuple) -> (Solution, bool) {
        let ok = Cell::new(true);
        let f = |y: &Tuple| {
            let (v, g) = grad_of(self.psi.as_ref(), y, &ok);
            (x.re_inner(y) - v, x.sub(&g))
        };
        // y = 0 and the maximizer of the linear part, r times the polar of x.
        let mut starts = vec![Tuple::zeros(x.algebra(), x.arity()), project_ball(&x.scale(1e12), &self.ball)];
        if self.psi.semiconvexity_on(&self.ball) != Some(0.0) {
            starts.extend(solver::random_starts(x, &self.ball, self.opts.starts.saturating_sub(2), self.opts.seed));
        }
        let step0 = 1.0 / (1.0 + self.psi.semiconcavity_on(&self.ball).unwrap_or(1.0));
        let sol = solver::maximize(&f, &self.ball, &starts, step0, &self.opts);
        (sol, ok.get())
    }
}

impl Predicate for Legendre {
    fn arity(&self) -> usize {
        self.psi.arity()
    }

    fn eval(&self, x: &Tuple) -> Eval {
        let (sol, ok) = self.solve(x);
        Eval {
            value: sol.value,
            converged: sol.converged && ok,
        }
    }

    /// The maximizer `y*` is a subgradient.
    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        let (sol, ok) = self.solve(x);
        Some(GradEval {
            value: sol.value,
            grad: sol.point,
            converged: sol.converged && ok,
        })
    }

    fn lipschitz_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(self.ball.norm())
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        Some(ball.norm() * self.ball.norm() + self.psi.bound_on(&self.ball)?)
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(0.0)
    }
}

/// Moreau lower envelope `x ↦ inf_{z ∈ D_R} [φ(z) + ‖x − z‖²/(2t)]`.
#[derive(Clone, Debug)]
pub struct InfConvolution {
    phi: Arc<dyn Predicate>,
    t: f64,
    ball: BallSpec,
    opts: SolverOptions,
}

impl InfConvolution {
    pub fn new(phi: Arc<dyn Predicate>, t: f64, ball: BallSpec, opts: SolverOptions) -> Result<Self> {
        check_t(t)?;
        check_arity(phi.as_ref(), &ball)?;
        Ok(Self { phi, t, ball, opts })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    /// True when the inner problem is strongly convex, so one start suffices.
    pub fn certified(&self) -> bool {
        self.phi
            .semiconvexity_on(&self.ball)
            .is_some_and(|c| c * self.t < 1.0)
    }

    /// The minimizing `z` and the minimum.
    pub fn solve(&self, x: &Tuple) -> (Solution, bool) {
        let ok = Cell::new(true);
        let t = self.t;
        let f = |z: &Tuple| {
            let (v, g) = grad_of(self.phi.as_ref(), z, &ok);
            let d = z.sub(x);
            (v + d.norm_sq() / (2.0 * t), g.axpy(1.0 / t, &d))
        };
        let heuristic = match self.phi.eval_grad(x) {
            Some(g) => project_ball(&x.axpy(-t, &g.grad), &self.ball),
            None => project_ball(x, &self.ball),
        };
        let mut starts = vec![heuristic];
        if !self.certified() {
            starts.push(project_ball(x, &self.ball));
            starts.extend(solver::random_starts(x, &self.ball, self.opts.starts.saturating_sub(2), self.opts.seed));
        }
        let upper = self.phi.semiconcavity_on(&self.ball).unwrap_or(1.0 / t);
        let step0 = t / (1.0 + t * upper);
        let sol = solver::minimize(&f, &self.ball, &starts, step0, &self.opts);
        (sol, ok.get())
    }
}

impl Predicate for InfConvolution {
    fn arity(&self) -> usize {
        self.phi.arity()
    }

    fn eval(&self, x: &Tuple) -> Eval {
        let (sol, ok) = self.solve(x);
        Eval {
            value: sol.value,
            converged: sol.converged && ok,
        }
    }

    /// `(x − z*)/t`.
    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        let (sol, ok) = self.solve(x);
        Some(GradEval {
            value: sol.value,
            grad: x.sub(&sol.point).scale(1.0 / self.t),
            converged: sol.converged && ok,
        })
    }

    fn lipschitz_on(&self, ball: &BallSpec) -> Option<f64> {
        Some((ball.norm() + self.ball.norm()) / self.t)
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        Some(self.phi.bound_on(&self.ball)? + (ball.norm() + self.ball.norm()).powi(2) / (2.0 * self.t))
    }

    /// `1/(u − t)` when `φ` is `1/u`-semiconvex with `t < u`.
    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        let c = self.phi.semiconvexity_on(&self.ball)?;
        (c * self.t < 1.0).then(|| c / (1.0 - c * self.t))
    }

    fn semiconcavity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(1.0 / self.t)
    }
}

/// Upper envelope `x ↦ sup_{w ∈ D_r} [φ(w) − ‖x − w‖²/(2t)]`, the mirror of
/// [`InfConvolution`].
#[derive(Clone, Debug)]
pub struct SupConvolution {
    phi: Arc<dyn Predicate>,
    t: f64,
    ball: BallSpec,
    opts: SolverOptions,
}

impl SupConvolution {
    pub fn new(phi: Arc<dyn Predicate>, t: f64, ball: BallSpec, opts: SolverOptions) -> Result<Self> {
        check_t(t)?;
        check_arity(phi.as_ref(), &ball)?;
        Ok(Self { phi, t, ball, opts })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    pub fn certified(&self) -> bool {
        self.phi
            .semiconcavity_on(&self.ball)
            .is_some_and(|c| c * self.t < 1.0)
    }

    /// The maximizing `w` and the maximum.
    pub fn solve(&self, x: &Tuple) -> (Solution, bool) {
        let ok = Cell::new(true);
        let t = self.t;
        let f = |w: &Tuple| {
            let (v, g) = grad_of(self.phi.as_ref(), w, &ok);
            let d = w.sub(x);
            (v - d.norm_sq() / (2.0 * t), g.axpy(-1.0 / t, &d))
        };
        let heuristic = match self.phi.eval_grad(x) {
            Some(g) => {
                if !g.converged {
                    ok.set(false);
                }
                project_ball(&x.axpy(t, &g.grad), &self.ball)
            }
            None => project_ball(x, &self.ball),
        };
        let mut starts = vec![heuristic];
        if !self.certified() {
            starts.push(project_ball(x, &self.ball));
            starts.extend(solver::random_starts(x, &self.ball, self.opts.starts.saturating_sub(2), self.opts.seed));
        }
        let upper = self.phi.semiconvexity_on(&self.ball).unwrap_or(1.0 / t);
        let step0 = t / (1.0 + t * upper);
        let sol = solver::maximize(&f, &self.ball, &starts, step0, &self.opts);
        (sol, ok.get())
    }
}

impl Predicate for SupConvolution {
    fn arity(&self) -> usize {
        self.phi.arity()
    }

    fn eval(&self, x: &Tuple) -> Eval {
        let (sol, ok) = self.solve(x);
        Eval {
            value: sol.value,
            converged: sol.converged && ok,
        }
    }

    /// `(w* − x)/t`.
    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        let (sol, ok) = self.solve(x);
        Some(GradEval {
            value: sol.value,
            grad: sol.point.sub(x).scale(1.0 / self.t),
            converged: sol.converged && ok,
        })
    }

    fn lipschitz_on(&self, ball: &BallSpec) -> Option<f64> {
        Some((ball.norm() + self.ball.norm()) / self.t)
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        Some(self.phi.bound_on(&self.ball)? + (ball.norm() + self.ball.norm()).powi(2) / (2.0 * self.t))
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        Some(1.0 / self.t)
    }

    fn semiconcavity_on(&self, _ball: &BallSpec) -> Option<f64> {
        let c = self.phi.semiconcavity_on(&self.ball)?;
        (c * self.t < 1.0).then(|| c / (1.0 - c * self.t))
    }
}

/// Parameters of the double envelope: `t`, an optional semiconvexity budget
/// `u`, the inner ball `R` and the outer ball `r ≤ R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationParams {
    pub t: f64,
    #[serde(default)]
    pub u: Option<f64>,
    pub inner: BallSpec,
    pub outer: BallSpec,
}

impl RegularizationParams {
    pub fn new(t: f64, outer: BallSpec, inner: BallSpec) -> Result<Self> {
        let p = Self {
            t,
            u: None,
            inner,
            outer,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_t(self.t)?;
        if !self.outer.within(&self.inner) {
            return Err(Error::Predicate("outer radii must not exceed inner radii entrywise".into()));
        }
        if let Some(u) = self.u {
            if !(u > self.t) {
                return Err(Error::Predicate(format!("semiconvexity budget u = {u} must exceed t")));
            }
        }
        Ok(())
    }

    /// Bounds `(lo, hi)` with `lo ≤ ψ − φ ≤ hi` on `D_r` for the double
    /// envelope `ψ` of `φ`:
    /// `lo = −ω_R(√(4t ω_R(2|R|)))` and `hi = ω_r(√(2t ω_r(2|r|)))`.
    pub fn sandwich(&self, phi: &dyn Predicate) -> Option<(f64, f64)> {
        let (r, big) = (&self.outer, &self.inner);
        let w_big = |d: f64| phi.modulus(big, d);
        let w_r = |d: f64| phi.modulus(r, d);
        let lo = -w_big((4.0 * self.t * w_big(2.0 * big.norm())?).sqrt())?;
        let hi = w_r((2.0 * self.t * w_r(2.0 * r.norm())?).sqrt())?;
        Some((lo, hi))
    }

    /// Largest `t` (to within a factor 1.01) whose sandwich is narrower
    /// than `eps` on both sides, found by bisection in `log t`.
    pub fn t_for_accuracy(phi: &dyn Predicate, outer: &BallSpec, inner: &BallSpec, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::Predicate("accuracy must be positive".into()));
        }
        let width = |t: f64| -> Result<f64> {
            let p = Self::new(t, outer.clone(), inner.clone())?;
            let (lo, hi) = p
                .sandwich(phi)
                .ok_or_else(|| Error::Predicate("predicate declares no modulus of continuity".into()))?;
            Ok((-lo).max(hi))
        };
        let (mut good, mut bad) = (1e-300_f64, 1e6_f64);
        if width(bad)? < eps {
            return Ok(bad);
        }
        while bad / good > 1.01 {
            let mid = ((good.ln() + bad.ln()) * 0.5).exp();
            if width(mid)? < eps {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    }
}

/// `ψ(x) = sup_{w ∈ D_r} inf_{z ∈ D_R} [φ(z) + ‖w − z‖²/(4t) − ‖x − w‖²/(2t)]`.
///
/// Built as the sup-convolution with parameter `t` of the inf-convolution
/// with parameter `2t`; the composed bounds make `ψ` both `1/t`-semiconvex
/// and `1/t`-semiconcave.
pub fn lasry_lions(phi: Arc<dyn Predicate>, params: &RegularizationParams, opts: SolverOptions) -> Result<SupConvolution> {
    params.validate()?;
    // Inner gradients feed the outer stopping test, so they aim lower.
    let inner_opts = SolverOptions { aim: 1e-2, ..opts };
    let inner = InfConvolution::new(phi, 2.0 * params.t, params.inner.clone(), inner_opts)?;
    SupConvolution::new(Arc::new(inner), params.t, params.outer.clone(), opts)
}

/// Gradient of an upper envelope together with the outer maximizer.
#[derive(Clone, Debug)]
pub struct EnvelopeGradient {
    pub value: f64,
    pub grad: Tuple,
    pub argmax: Tuple,
    /// The maximizer lies strictly inside the outer ball.
    pub interior: bool,
    pub converged: bool,
}

/// `∇ψ(x) = (w* − x)/t` for `ψ` an upper envelope.
pub fn envelope_gradient(psi: &SupConvolution, x: &Tuple) -> EnvelopeGradient {
    let (sol, ok) = psi.solve(x);
    let interior = sol
        .point
        .op_norms()
        .iter()
        .zip(psi.ball().radii())
        .all(|(n, r)| *n < r * (1.0 - 1e-9));
    EnvelopeGradient {
        value: sol.value,
        grad: sol.point.sub(x).scale(1.0 / psi.t()),
        argmax: sol.point,
        interior,
        converged: sol.converged && ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random, Element, TracialAlgebra};
    use crate::convex::Expr;
    use crate::C64;

    fn scalar(alg: &Arc<TracialAlgebra>, re: f64, im: f64) -> Tuple {
        Tuple::single(Element::scalar(alg, C64::new(re, im)))
    }

    /// Grid oracle for `sup_{|y| ≤ r} Re(conj(x) y) − ψ(y)` on the complex disk.
    fn disk_grid_sup(x: C64, r: f64, psi: impl Fn(C64) -> f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let (nr, na) = (400, 1440);
        for i in 0..=nr {
            let rad = r * i as f64 / nr as f64;
            for k in 0..na {
                let th = std::f64::consts::TAU * k as f64 / na as f64;
                let y = C64::from_polar(rad, th);
                best = best.max((x.conj() * y).re - psi(y));
            }
        }
        best
    }

    #[test]
    fn legendre_scalar_examples() {
        let alg = TracialAlgebra::matrix(1).unwrap();
        let ball = BallSpec::uniform(1, 1.0).unwrap();
        let zero: Arc<dyn Predicate> = Arc::new(Expr::constant(1, 0.0).unwrap());
        let l0 = Legendre::new(zero, ball.clone(), SolverOptions::default()).unwrap();
        let z = C64::new(0.4, -0.7);
        let lin: Arc<dyn Predicate> = Arc::new(Expr::linear(&scalar(&alg, z.re, z.im), 0.0));
        let l1 = Legendre::new(lin, ball, SolverOptions::default()).unwrap();
        for &(a, b) in &[(0.3, 0.2), (-1.5, 0.7), (0.0, -2.0), (0.4, -0.7)] {
            let x = C64::new(a, b);
            let e = l0.eval(&scalar(&alg, a, b));
            assert!(e.converged);
            assert!((e.value - x.norm()).abs() < 1e-9);
            assert!((e.value - disk_grid_sup(x, 1.0, |_| 0.0)).abs() < 1e-4);
            let e = l1.eval(&scalar(&alg, a, b));
            assert!((e.value - (x - z).norm()).abs() < 1e-9, "{x}");
            assert!((e.value - disk_grid_sup(x, 1.0, |y| (z.conj() * y).re)).abs() < 1e-4);
        }
    }

    #[test]
    fn legendre_of_half_square_completes_the_square() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let ball = BallSpec::uniform(2, 50.0).unwrap();
        let l = Legendre::new(Arc::new(Expr::half_norm_sq(2, 1.0)), ball, SolverOptions::default()).unwrap();
        let mut rng = random::seeded(1);
        for _ in 0..5 {
            let x = random::random_tuple(&alg, 2, &mut rng);
            let e = l.eval(&x);
            assert!(e.converged);
            assert!((e.value - 0.5 * x.norm_sq()).abs() < 1e-10);
        }
    }

    #[test]
    fn inf_and_sup_convolution_closed_forms() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let big = BallSpec::uniform(1, 100.0).unwrap();
        let t = 0.3;
        let opts = SolverOptions::default();
        let mut rng = random::seeded(2);
        let w = random::random_tuple(&alg, 1, &mut rng);
        let quad: Arc<dyn Predicate> = Arc::new(Expr::half_norm_sq(1, 1.0));
        let lin: Arc<dyn Predicate> = Arc::new(Expr::linear(&w, 0.0));
        let cst: Arc<dyn Predicate> = Arc::new(Expr::constant(1, 1.7).unwrap());
        let small = BallSpec::uniform(1, 2.0).unwrap();
        for _ in 0..5 {
            let x = random::random_in_ball(&alg, &small, &mut rng);
            let n2 = x.norm_sq();
            let ic = |p: &Arc<dyn Predicate>, ball: &BallSpec| InfConvolution::new(p.clone(), t, ball.clone(), opts).unwrap();
            let sc = |p: &Arc<dyn Predicate>, ball: &BallSpec| SupConvolution::new(p.clone(), t, ball.clone(), opts).unwrap();
            assert!((ic(&cst, &small).value(&x) - 1.7).abs() < 1e-12);
            assert!((sc(&cst, &small).value(&x) - 1.7).abs() < 1e-12);
            assert!((ic(&quad, &big).value(&x) - n2 / (2.0 * (1.0 + t))).abs() < 1e-10);
            let expect = x.re_inner(&w) - t / 2.0 * w.norm_sq();
            assert!((ic(&lin, &big).value(&x) - expect).abs() < 1e-10);
            let expect = x.re_inner(&w) + t / 2.0 * w.norm_sq();
            assert!((sc(&lin, &big).value(&x) - expect).abs() < 1e-10);
            // sup_w ½‖w‖² − ‖x − w‖²/(2t) = ‖x‖²/(2(1 − t)) for t < 1.
            assert!((sc(&quad, &big).value(&x) - n2 / (2.0 * (1.0 - t))).abs() < 1e-9);
            let g = ic(&lin, &big).eval_grad(&x).unwrap().grad;
            assert!(g.dist(&w) < 1e-9);
        }
    }

    #[test]
    fn lasry_lions_closed_forms() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = random::seeded(3);
        let t = 0.2;
        let opts = SolverOptions::default();
        // Linear φ: ψ(x) = Re⟨x, z⟩ − (t/2)‖z‖² on D_{r/2} when t‖z‖ < r/2.
        let r = 1.0;
        let z = random::random_element(&alg, &mut rng);
        let z = Tuple::single(z.scale_re(0.4 * r / (t * z.op_norm())));
        let params = RegularizationParams::new(t, BallSpec::uniform(1, r).unwrap(), BallSpec::uniform(1, 2.0 * r).unwrap()).unwrap();
        let psi = lasry_lions(Arc::new(Expr::linear(&z, 0.0)), &params, opts).unwrap();
        let half = BallSpec::uniform(1, r / 2.0).unwrap();
        for _ in 0..5 {
            let x = random::random_in_ball(&alg, &half, &mut rng);
            let e = psi.eval(&x);
            assert!(e.converged);
            assert!((e.value - (x.re_inner(&z) - t / 2.0 * z.norm_sq())).abs() < 1e-10);
        }
        let g = envelope_gradient(&psi, &Tuple::zeros(&alg, 1));
        assert!(g.interior && g.converged);
        assert!(g.grad.dist(&z) < 1e-8);
        // Quadratic φ = ½‖x‖² with large balls: the inner envelope with 2t
        // gives ‖w‖²/(2(1 + 2t)); the outer one with t turns a·‖w‖²/2 into
        // a‖x‖²/(2(1 − a t)).
        let big = BallSpec::uniform(1, 100.0).unwrap();
        let params = RegularizationParams::new(t, big.clone(), big).unwrap();
        let psi = lasry_lions(Arc::new(Expr::half_norm_sq(1, 1.0)), &params, opts).unwrap();
        let a = 1.0 / (1.0 + 2.0 * t);
        let k = a / (1.0 - a * t);
        for _ in 0..5 {
            let x = random::random_tuple(&alg, 1, &mut rng);
            assert!((psi.value(&x) - k / 2.0 * x.norm_sq()).abs() < 1e-9);
            let g = envelope_gradient(&psi, &x);
            assert!(g.grad.dist(&x.scale(k)) < 1e-8);
        }
        // Constant φ.
        let params = RegularizationParams::new(t, BallSpec::uniform(1, 1.0).unwrap(), BallSpec::uniform(1, 1.0).unwrap()).unwrap();
        let psi = lasry_lions(Arc::new(Expr::constant(1, -0.3).unwrap()), &params, opts).unwrap();
        let x = random::random_in_ball(&alg, &BallSpec::uniform(1, 1.0).unwrap(), &mut rng);
        assert!((psi.value(&x) + 0.3).abs() < 1e-12);
        assert!(envelope_gradient(&psi, &x).grad.norm() < 1e-9);
    }

    #[test]
    fn composed_bounds_for_double_envelope() {
        let ball = BallSpec::uniform(2, 1.0).unwrap();
        let params = RegularizationParams::new(0.25, ball.clone(), ball.scaled(2.0).unwrap()).unwrap();
        let psi = lasry_lions(Arc::new(Expr::half_norm_sq(2, 1.0)), &params, SolverOptions::default()).unwrap();
        assert_eq!(psi.semiconvexity_on(&ball), Some(4.0));
        assert!((psi.semiconcavity_on(&ball).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let r = BallSpec::uniform(1, 2.0).unwrap();
        let big = BallSpec::uniform(1, 1.0).unwrap();
        assert!(RegularizationParams::new(0.1, r.clone(), big).is_err());
        assert!(RegularizationParams::new(0.0, r.clone(), r.clone()).is_err());
        let mut p = RegularizationParams::new(0.1, r.clone(), r).unwrap();
        p.u = Some(0.05);
        assert!(p.validate().is_err());
    }

    #[test]
    fn accuracy_driven_t() {
        let alg = TracialAlgebra::matrix(1).unwrap();
        let phi = Expr::linear(&scalar(&alg, 1.0, 0.0), 0.0);
        let r = BallSpec::uniform(1, 1.0).unwrap();
        let big = BallSpec::uniform(1, 2.0).unwrap();
        let t = RegularizationParams::t_for_accuracy(&phi, &r, &big, 1e-3).unwrap();
        let (lo, hi) = RegularizationParams::new(t, r.clone(), big.clone()).unwrap().sandwich(&phi).unwrap();
        assert!(-lo < 1e-3 && hi < 1e-3);
        let (lo, hi) = RegularizationParams::new(t * 1.05, r, big).unwrap().sandwich(&phi).unwrap();
        assert!((-lo).max(hi) >= 1e-3);
    }
}
