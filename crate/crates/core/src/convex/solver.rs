use serde::{Deserialize, Serialize};

use crate::algebra::{project_ball, random, BallSpec, Tuple};

/// Budgets for the projected-gradient inner solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Number of starting points when the problem is not certified concave.
    pub starts: usize,
    /// Tolerance on the norm of the projected gradient mapping.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the random starting points.
    pub seed: u64,
    /// Iteration continues until the residual reaches `aim * tol`; only
    /// `tol` decides convergence.
    #[serde(default = "one")]
    pub aim: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            tol: 1e-9,
            max_iter: 2000,
            seed: 0,
            aim: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The projected gradient mapping fell below tolerance.
    GradientTol,
    /// Backtracking could no longer find an acceptable step.
    StepStall,
    /// The iteration budget ran out.
    Budget,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub point: Tuple,
    pub value: f64,
    /// True only when the gradient-mapping tolerance was met.
    pub converged: bool,
    pub stop: StopReason,
    pub iterations: usize,
    /// Final projected gradient mapping norm at the reference step.
    pub residual: f64,
    /// Index of the winning start.
    pub start: usize,
}

/// Projected gradient ascent on `D_r` from one start.
///
/// `f` returns the value and gradient. The step is accepted under the
/// quadratic upper-model test `f(x') ≥ f(x) + ⟨g, d⟩ − ‖d‖²/(2s)` and the next
/// trial step comes from a Barzilai-Borwein estimate. Stationarity is
/// measured with the fixed reference step `step0` so that a large trial
/// step cannot hide a nonzero gradient mapping.
///
/// BB steps can cycle near the boundary of the ball. If `max_iter` BB
/// iterations do not converge, a second phase of up to `max_iter` plain
/// steps of size at most `step0` follows. The loop stops once the residual
/// is below `aim`; the result counts as converged when it is below `tol`.
pub fn ascend(
    f: &dyn Fn(&Tuple) -> (f64, Tuple),
    ball: &BallSpec,
    x0: &Tuple,
    step0: f64,
    (tol, aim): (f64, f64),
    max_iter: usize,
) -> Solution {
    let aim = aim.min(tol);
    let s_min = step0 * 1e-12;
    let s_max = step0 * 1e6;
    let mut x = project_ball(x0, ball);
    let (mut fx, mut g) = f(&x);
    let mut s = step0;
    let mut iterations = 0;
    let mut plain = false;
    loop {
        let reference = project_ball(&x.axpy(step0, &g), ball);
        let residual = reference.dist(&x) / step0;
        let stop = if residual <= aim {
            Some(StopReason::GradientTol)
        } else if iterations >= max_iter && !plain {
            plain = true;
            s = step0;
            None
        } else if iterations >= 2 * max_iter {
            Some(if residual <= tol {
                StopReason::GradientTol
            } else {
                StopReason::Budget
            })
        } else {
            None
        };
        if let Some(stop) = stop {
            return Solution {
                point: x,
                value: fx,
                converged: stop == StopReason::GradientTol,
                stop,
                iterations,
                residual,
                start: 0,
            };
        }
        iterations += 1;
        let slack = 1e-13 * (1.0 + fx.abs());
        loop {
            let cand = project_ball(&x.axpy(s, &g), ball);
            let d = cand.sub(&x);
            let (fc, gc) = f(&cand);
            if fc >= fx + g.re_inner(&d) - d.norm_sq() / (2.0 * s) - slack {
                let dg = g.sub(&gc);
                let sy = d.re_inner(&dg);
                if !plain {
                    s = if sy > 0.0 { d.norm_sq() / sy } else { 2.0 * s }.clamp(s_min, s_max);
                }
                x = cand;
                fx = fc;
                g = gc;
                break;
            }
            s *= 0.5;
            if s < s_min {
                let reference = project_ball(&x.axpy(step0, &g), ball);
                let residual = reference.dist(&x) / step0;
                return Solution {
                    point: x,
                    value: fx,
                    converged: residual <= tol,
                    stop: if residual <= tol {
                        StopReason::GradientTol
                    } else {
                        StopReason::StepStall
                    },
                    iterations,
                    residual,
                    start: 0,
                };
            }
        }
    }
}

/// Best of several ascents. Ties go to the lower start index.
pub fn maximize(
    f: &dyn Fn(&Tuple) -> (f64, Tuple),
    ball: &BallSpec,
    starts: &[Tuple],
    step0: f64,
    opts: &SolverOptions,
) -> Solution {
    assert!(!starts.is_empty(), "at least one start is required");
    let mut best: Option<Solution> = None;
    for (i, x0) in starts.iter().enumerate() {
        let mut sol = ascend(f, ball, x0, step0, (opts.tol, opts.aim * opts.tol), opts.max_iter);
        sol.start = i;
        if best.as_ref().is_none_or(|b| sol.value > b.value) {
            best = Some(sol);
        }
    }
    best.expect("non-empty")
}

/// Minimization through [`maximize`] of `−f`; the returned value is `min f`.
pub fn minimize(
    f: &dyn Fn(&Tuple) -> (f64, Tuple),
    ball: &BallSpec,
    starts: &[Tuple],
    step0: f64,
    opts: &SolverOptions,
) -> Solution {
    let neg = |x: &Tuple| {
        let (v, g) = f(x);
        (-v, g.scale(-1.0))
    };
    let mut sol = maximize(&neg, ball, starts, step0, opts);
    sol.value = -sol.value;
    sol
}

/// `count` seeded random points of the ball, stream `i` for point `i`.
pub(crate) fn random_starts(template: &Tuple, ball: &BallSpec, count: usize, seed: u64) -> Vec<Tuple> {
    (0..count)
        .map(|i| {
            let mut rng = random::substream(seed, i as u64);
            random::random_in_ball(template.algebra(), ball, &mut rng)
        })
        .collect()
}
