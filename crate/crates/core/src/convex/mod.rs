//! Convex analysis on the real Hilbert space `L²(M)^n` with inner product
//! `Re⟨x, y⟩`.
//!
//! Every real-valued field on tuples implements [`Predicate`]. Alongside its
//! value, a predicate may report a gradient and regularity bounds on
//! operator-norm balls. Bounds are conservative: `None` means nothing is
//! claimed. The envelope constructions in [`envelope`] compose these bounds
//! the same way they compose values.

mod checks;
mod envelope;
mod expr;
mod json;
mod solver;

use std::fmt;

use crate::algebra::{BallSpec, Tuple};

pub use checks::{
    finite_difference_gradient, gradient_fd_check, gradient_range_check, gradient_lipschitz_check, quadratic_expansion_check,
    range_bound_check, sandwich_check, second_difference_check, semiconcavity_check, semiconvexity_check,
    spectral_diameter_check, strong_convexity_expansion_check, CheckReport, GradientMap,
};
pub use envelope::{
    envelope_gradient, lasry_lions, EnvelopeGradient, InfConvolution, Legendre, RegularizationParams,
    SupConvolution,
};
pub use expr::{Expr, Letter, Node, Term, TracePoly};
pub use json::{ExprJson, TermJson};
pub use solver::{maximize, minimize, Solution, SolverOptions, StopReason};

/// A value with the convergence status of whatever optimization produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eval {
    pub value: f64,
    pub converged: bool,
}

impl Eval {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            converged: true,
        }
    }
}

/// A value with a gradient. At kinks of nonsmooth predicates the gradient is
/// one element of the sub- or superdifferential.
#[derive(Clone, Debug)]
pub struct GradEval {
    pub value: f64,
    pub grad: Tuple,
    pub converged: bool,
}

/// A real-valued function of `n`-tuples with optional regularity metadata.
///
/// Semiconvexity `c` on a ball means `x ↦ φ(x) + (c/2)‖x‖²` is convex along
/// segments inside the ball; semiconcavity is the mirror statement.
pub trait Predicate: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;

    fn eval(&self, x: &Tuple) -> Eval;

    fn value(&self, x: &Tuple) -> f64 {
        self.eval(x).value
    }

    fn eval_grad(&self, _x: &Tuple) -> Option<GradEval> {
        None
    }

    /// Lipschitz constant in the L² tuple norm on the ball.
    fn lipschitz_on(&self, _ball: &BallSpec) -> Option<f64> {
        None
    }

    /// Bound on `|φ|` over the ball.
    fn bound_on(&self, _ball: &BallSpec) -> Option<f64> {
        None
    }

    fn semiconvexity_on(&self, _ball: &BallSpec) -> Option<f64> {
        None
    }

    fn semiconcavity_on(&self, _ball: &BallSpec) -> Option<f64> {
        None
    }

    /// Modulus of continuity on the ball: `|φ(x) − φ(x')| ≤ ω(δ)` whenever
    /// `‖x − x'‖ ≤ δ`. Defaults to the Lipschitz bound.
    fn modulus(&self, ball: &BallSpec, delta: f64) -> Option<f64> {
        self.lipschitz_on(ball).map(|l| l * delta)
    }
}
