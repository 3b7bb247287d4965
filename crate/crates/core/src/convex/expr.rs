use crate::algebra::{BallSpec, Element, Tuple};
use crate::error::{Error, Result};
use crate::C64;

use super::solver::{self, SolverOptions};
use super::{Eval, GradEval, Predicate};

/// One factor of a trace monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    /// Free variable `x_k`.
    Var(usize),
    /// Adjoint `x_k*`.
    Adj(usize),
    /// Fixed element `c_i` of the polynomial's constant table.
    Const(usize),
}

/// `coef · τ(l_1 l_2 ⋯ l_L)`; the empty word stands for `τ(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: C64,
    pub word: Vec<Letter>,
}

/// `x ↦ Re Σ_terms coef · τ(word(x))`.
#[derive(Clone, Debug)]
pub struct TracePoly {
    arity: usize,
    terms: Vec<Term>,
    consts: Vec<Element>,
    const_norms: Vec<f64>,
}

impl TracePoly {
    pub fn new(arity: usize, terms: Vec<Term>, consts: Vec<Element>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Predicate("arity must be positive".into()));
        }
        if let Some(c) = consts.first() {
            if consts.iter().any(|d| !d.same_algebra(c)) {
                return Err(Error::Predicate("constants live in different algebras".into()));
            }
        }
        for t in &terms {
            if !(t.coef.re.is_finite() && t.coef.im.is_finite()) {
                return Err(Error::Predicate("non-finite coefficient".into()));
            }
            for l in &t.word {
                match *l {
                    Letter::Var(k) | Letter::Adj(k) if k >= arity => {
                        return Err(Error::Predicate(format!("variable x{k} out of range for arity {arity}")))
                    }
                    Letter::Const(i) if i >= consts.len() => {
                        return Err(Error::Predicate(format!("constant c{i} is not defined")))
                    }
                    _ => {}
                }
            }
        }
        let const_norms = consts.iter().map(Element::op_norm).collect();
        Ok(Self {
            arity,
            terms,
            consts,
            const_norms,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn consts(&self) -> &[Element] {
        &self.consts
    }

    fn check_algebra(&self, x: &Tuple) {
        assert_eq!(x.arity(), self.arity, "predicate arity mismatch");
        if let Some(c) = self.consts.first() {
            assert!(c.same_algebra(x.entry(0)), "constants and argument live in different algebras");
        }
    }

    fn letter<'a>(&'a self, l: Letter, x: &'a Tuple, adj: &'a [Element]) -> &'a Element {
        match l {
            Letter::Var(k) => x.entry(k),
            Letter::Adj(k) => &adj[k],
            Letter::Const(i) => &self.consts[i],
        }
    }

    pub fn value(&self, x: &Tuple) -> f64 {
        self.check_algebra(x);
        let adj: Vec<Element> = x.entries().iter().map(Element::adjoint).collect();
        self.terms
            .iter()
            .map(|t| {
                let tr = match t.word.split_first() {
                    None => C64::new(1.0, 0.0),
                    Some((first, rest)) => rest
                        .iter()
                        .fold(self.letter(*first, x, &adj).clone(), |acc, l| {
                            &acc * self.letter(*l, x, &adj)
                        })
                        .trace(),
                };
                (t.coef * tr).re
            })
            .sum()
    }

    /// Value and gradient. For a variable at position `p` of a word
    /// `P x_k S` the gradient picks up `conj(c) (S P)*`; for `P x_k* S` it
    /// picks up `c S P`.
    pub fn value_grad(&self, x: &Tuple) -> (f64, Tuple) {
        self.check_algebra(x);
        let alg = x.algebra();
        let adj: Vec<Element> = x.entries().iter().map(Element::adjoint).collect();
        let mut grad = vec![Element::zeros(alg); self.arity];
        let mut value = 0.0;
        let one = Element::identity(alg);
        for t in &self.terms {
            let letters: Vec<&Element> = t.word.iter().map(|l| self.letter(*l, x, &adj)).collect();
            let len = letters.len();
            // prefix[p] = l_1 ⋯ l_p, suffix[p] = l_{p+1} ⋯ l_L.
            let mut prefix = Vec::with_capacity(len + 1);
            prefix.push(one.clone());
            for l in &letters {
                let next = prefix.last().expect("non-empty") * *l;
                prefix.push(next);
            }
            let mut suffix = vec![one.clone(); len + 1];
            for p in (0..len).rev() {
                suffix[p] = letters[p] * &suffix[p + 1];
            }
            value += (t.coef * prefix[len].trace()).re;
            for (p, l) in t.word.iter().enumerate() {
                match *l {
                    Letter::Var(k) => {
                        let sp = &suffix[p + 1] * &prefix[p];
                        grad[k] = grad[k].axpy(t.coef.conj(), &sp.adjoint());
                    }
                    Letter::Adj(k) => {
                        let sp = &suffix[p + 1] * &prefix[p];
                        grad[k] = grad[k].axpy(t.coef, &sp);
                    }
                    Letter::Const(_) => {}
                }
            }
        }
        (value, Tuple::new(grad).expect("arity > 0"))
    }

    fn letter_radius(&self, l: Letter, ball: &BallSpec) -> f64 {
        match l {
            Letter::Var(k) | Letter::Adj(k) => ball.radii()[k],
            Letter::Const(i) => self.const_norms[i],
        }
    }

    /// `Σ |c| Π_p ρ_p` with `ρ` the operator-norm radius of each letter.
    pub fn bound(&self, ball: &BallSpec) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef.norm() * t.word.iter().map(|l| self.letter_radius(*l, ball)).product::<f64>())
            .sum()
    }

    /// Euclidean norm of the per-variable bounds
    /// `a_k = Σ |c| Σ_{positions p of x_k} Π_{q≠p} ρ_q`, from
    /// `|τ(a h b)| ≤ ‖a‖ ‖b‖ ‖h‖₂` and `|Df[h]| ≤ Σ_k a_k ‖h_k‖`.
    pub fn lipschitz(&self, ball: &BallSpec) -> f64 {
        let mut a = vec![0.0; self.arity];
        for t in &self.terms {
            let rho: Vec<f64> = t.word.iter().map(|l| self.letter_radius(*l, ball)).collect();
            for p in var_positions(&t.word) {
                a[var_index(t.word[p])] += t.coef.norm() * product_except(&rho, &[p]);
            }
        }
        a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Two-sided bound on the second derivative. Each pair of variable
    /// positions `p < q` adds `|c| Π_{others} ρ` to the entries `(v_p, v_q)`
    /// and `(v_q, v_p)` of a nonnegative symmetric matrix `H` with
    /// `|D²f[h, h]| ≤ ĥᵀ H ĥ`, `ĥ_k = ‖h_k‖`; the bound is the largest row sum.
    pub fn curvature(&self, ball: &BallSpec) -> f64 {
        let n = self.arity;
        let mut h = vec![0.0; n * n];
        for t in &self.terms {
            let rho: Vec<f64> = t.word.iter().map(|l| self.letter_radius(*l, ball)).collect();
            let vars: Vec<usize> = var_positions(&t.word).collect();
            for (i, &p) in vars.iter().enumerate() {
                for &q in &vars[i + 1..] {
                    let w = t.coef.norm() * product_except(&rho, &[p, q]);
                    let (j, k) = (var_index(t.word[p]), var_index(t.word[q]));
                    h[j * n + k] += w;
                    h[k * n + j] += w;
                }
            }
        }
        h.chunks(n.max(1)).map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max)
    }
}

fn var_index(l: Letter) -> usize {
    match l {
        Letter::Var(k) | Letter::Adj(k) => k,
        Letter::Const(_) => unreachable!("constants are not variables"),
    }
}

fn var_positions(word: &[Letter]) -> impl Iterator<Item = usize> + '_ {
    word.iter()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Letter::Const(_)))
        .map(|(p, _)| p)
}

fn product_except(rho: &[f64], skip: &[usize]) -> f64 {
    rho.iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, r)| r)
        .product()
}

/// Expression tree of a predicate.
#[derive(Clone, Debug)]
pub enum Node {
    Const(f64),
    Poly(TracePoly),
    Add(Vec<Node>),
    Scale(f64, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Max(Vec<Node>),
    Min(Vec<Node>),
    Abs(Box<Node>),
    /// `sup_{y ∈ ball} body(x, y)`; the bound variables follow the free ones.
    Sup(Box<Quantifier>),
    Inf(Box<Quantifier>),
}

#[derive(Clone, Debug)]
pub struct Quantifier {
    pub ball: BallSpec,
    pub body: Node,
    pub opts: SolverOptions,
}

/// Regularity bounds of a node on a ball.
#[derive(Clone, Copy, Debug, Default)]
struct Meta {
    bound: Option<f64>,
    lip: Option<f64>,
    sconv: Option<f64>,
    sconc: Option<f64>,
}

fn sum_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.sum()
}

fn max_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.collect::<Option<Vec<f64>>>().map(|v| v.into_iter().fold(0.0, f64::max))
}

impl Meta {
    fn two_sided(&self) -> Option<f64> {
        Some(self.sconv?.max(self.sconc?))
    }
}

struct Out {
    value: f64,
    grad: Option<Tuple>,
    converged: bool,
}

impl Node {
    fn check(&self, arity: usize) -> Result<()> {
        match self {
            Node::Const(c) if !c.is_finite() => Err(Error::Predicate("non-finite constant".into())),
            Node::Const(_) => Ok(()),
            Node::Poly(p) if p.arity() != arity => Err(Error::Predicate(format!(
                "polynomial of arity {} used where arity {arity} is expected",
                p.arity()
            ))),
            Node::Poly(_) => Ok(()),
            Node::Add(v) | Node::Max(v) | Node::Min(v) => {
                if v.is_empty() {
                    return Err(Error::Predicate("connective needs at least one argument".into()));
                }
                v.iter().try_for_each(|n| n.check(arity))
            }
            Node::Scale(a, n) => {
                if !a.is_finite() {
                    return Err(Error::Predicate("non-finite scale factor".into()));
                }
                n.check(arity)
            }
            Node::Mul(a, b) => {
                a.check(arity)?;
                b.check(arity)
            }
            Node::Abs(n) => n.check(arity),
            Node::Sup(q) | Node::Inf(q) => q.body.check(arity + q.ball.arity()),
        }
    }

    fn meta(&self, ball: &BallSpec) -> Meta {
        match self {
            Node::Const(c) => Meta {
                bound: Some(c.abs()),
                lip: Some(0.0),
                sconv: Some(0.0),
                sconc: Some(0.0),
            },
            Node::Poly(p) => {
                let c = p.curvature(ball);
                Meta {
                    bound: Some(p.bound(ball)),
                    lip: Some(p.lipschitz(ball)),
                    sconv: Some(c),
                    sconc: Some(c),
                }
            }
            Node::Add(v) => {
                let m: Vec<Meta> = v.iter().map(|n| n.meta(ball)).collect();
                Meta {
                    bound: sum_opt(m.iter().map(|m| m.bound)),
                    lip: sum_opt(m.iter().map(|m| m.lip)),
                    sconv: sum_opt(m.iter().map(|m| m.sconv)),
                    sconc: sum_opt(m.iter().map(|m| m.sconc)),
                }
            }
            Node::Scale(a, n) => {
                let m = n.meta(ball);
                let s = a.abs();
                let (cv, cc) = if *a >= 0.0 { (m.sconv, m.sconc) } else { (m.sconc, m.sconv) };
                Meta {
                    bound: m.bound.map(|b| s * b),
                    lip: m.lip.map(|l| s * l),
                    sconv: cv.map(|c| s * c),
                    sconc: cc.map(|c| s * c),
                }
            }
            Node::Mul(f, g) => {
                let (mf, mg) = (f.meta(ball), g.meta(ball));
                let curv = (|| {
                    Some(
                        mf.bound? * mg.two_sided()?
                            + mg.bound? * mf.two_sided()?
                            + 2.0 * mf.lip? * mg.lip?,
                    )
                })();
                Meta {
                    bound: mf.bound.zip(mg.bound).map(|(a, b)| a * b),
                    lip: (|| Some(mf.bound? * mg.lip? + mg.bound? * mf.lip?))(),
                    sconv: curv,
                    sconc: curv,
                }
            }
            Node::Max(v) | Node::Min(v) if v.len() == 1 => v[0].meta(ball),
            Node::Max(v) => {
                let m: Vec<Meta> = v.iter().map(|n| n.meta(ball)).collect();
                Meta {
                    bound: max_opt(m.iter().map(|m| m.bound)),
                    lip: max_opt(m.iter().map(|m| m.lip)),
                    sconv: max_opt(m.iter().map(|m| m.sconv)),
                    sconc: None,
                }
            }
            Node::Min(v) => {
                let m: Vec<Meta> = v.iter().map(|n| n.meta(ball)).collect();
                Meta {
                    bound: max_opt(m.iter().map(|m| m.bound)),
                    lip: max_opt(m.iter().map(|m| m.lip)),
                    sconv: None,
                    sconc: max_opt(m.iter().map(|m| m.sconc)),
                }
            }
            Node::Abs(n) => {
                let m = n.meta(ball);
                // |f| = max(f, −f), and −f is semiconvex with f's semiconcavity.
                Meta {
                    bound: m.bound,
                    lip: m.lip,
                    sconv: m.two_sided(),
                    sconc: None,
                }
            }
            Node::Sup(q) | Node::Inf(q) => {
                let joint = BallSpec::new([ball.radii(), q.ball.radii()].concat()).expect("positive radii");
                let m = q.body.meta(&joint);
                let sup = matches!(self, Node::Sup(_));
                Meta {
                    bound: m.bound,
                    lip: m.lip,
                    sconv: if sup { m.sconv } else { None },
                    sconc: if sup { None } else { m.sconc },
                }
            }
        }
    }

    fn run(&self, x: &Tuple, want_grad: bool) -> Out {
        let zero_grad = || want_grad.then(|| Tuple::zeros(x.algebra(), x.arity()));
        match self {
            Node::Const(c) => Out {
                value: *c,
                grad: zero_grad(),
                converged: true,
            },
            Node::Poly(p) => {
                if want_grad {
                    let (value, g) = p.value_grad(x);
                    Out {
                        value,
                        grad: Some(g),
                        converged: true,
                    }
                } else {
                    Out {
                        value: p.value(x),
                        grad: None,
                        converged: true,
                    }
                }
            }
            Node::Add(v) => {
                let mut acc = Out {
                    value: 0.0,
                    grad: zero_grad(),
                    converged: true,
                };
                for n in v {
                    let o = n.run(x, want_grad);
                    acc.value += o.value;
                    acc.converged &= o.converged;
                    if let (Some(a), Some(g)) = (acc.grad.as_mut(), o.grad) {
                        *a = a.add(&g);
                    }
                }
                acc
            }
            Node::Scale(a, n) => {
                let o = n.run(x, want_grad);
                Out {
                    value: a * o.value,
                    grad: o.grad.map(|g| g.scale(*a)),
                    converged: o.converged,
                }
            }
            Node::Mul(f, g) => {
                let (of, og) = (f.run(x, want_grad), g.run(x, want_grad));
                Out {
                    value: of.value * og.value,
                    grad: of
                        .grad
                        .zip(og.grad)
                        .map(|(gf, gg)| gg.scale(of.value).axpy(og.value, &gf)),
                    converged: of.converged && og.converged,
                }
            }
            Node::Max(v) | Node::Min(v) => {
                let is_max = matches!(self, Node::Max(_));
                let mut best: Option<Out> = None;
                let mut converged = true;
                for n in v {
                    let o = n.run(x, want_grad);
                    converged &= o.converged;
                    let better = best
                        .as_ref()
                        .is_none_or(|b| if is_max { o.value > b.value } else { o.value < b.value });
                    if better {
                        best = Some(o);
                    }
                }
                let mut b = best.expect("non-empty");
                b.converged = converged;
                b
            }
            Node::Abs(n) => {
                let o = n.run(x, want_grad);
                let s = if o.value >= 0.0 { 1.0 } else { -1.0 };
                Out {
                    value: o.value.abs(),
                    grad: o.grad.map(|g| g.scale(s)),
                    converged: o.converged,
                }
            }
            Node::Sup(q) | Node::Inf(q) => q.solve(x, matches!(self, Node::Sup(_)), want_grad),
        }
    }
}

impl Quantifier {
    fn solve(&self, x: &Tuple, sup: bool, want_grad: bool) -> Out {
        let n = x.arity();
        let m = self.ball.arity();
        let joint = |y: &Tuple| x.concat(y).expect("same algebra");
        let obj = |y: &Tuple| {
            let o = self.body.run(&joint(y), true);
            let g = o.grad.expect("requested");
            let gy = Tuple::new(g.entries()[n..].to_vec()).expect("m > 0");
            (o.value, gy)
        };
        let joint_ball = BallSpec::new(vec![1.0; n].into_iter().chain(self.ball.radii().iter().copied()).collect())
            .expect("positive radii");
        let meta = self.body.meta(&joint_ball);
        let zero = Tuple::zeros(x.algebra(), m);
        // A body that is concave (sup) or convex (inf) needs one start.
        let certified = if sup { meta.sconc == Some(0.0) } else { meta.sconv == Some(0.0) };
        let mut starts = vec![zero.clone()];
        if !certified {
            starts.extend(solver::random_starts(&zero, &self.ball, self.opts.starts.saturating_sub(1), self.opts.seed));
        }
        let curv = if sup { meta.sconc } else { meta.sconv };
        let step0 = 1.0 / (1.0 + curv.unwrap_or(1.0));
        let sol = if sup {
            solver::maximize(&obj, &self.ball, &starts, step0, &self.opts)
        } else {
            solver::minimize(&obj, &self.ball, &starts, step0, &self.opts)
        };
        let grad = want_grad.then(|| {
            let o = self.body.run(&joint(&sol.point), true);
            let g = o.grad.expect("requested");
            Tuple::new(g.entries()[..n].to_vec()).expect("n > 0")
        });
        Out {
            value: sol.value,
            grad,
            converged: sol.converged,
        }
    }
}

/// A predicate given by an expression tree in `arity` free variables.
#[derive(Clone, Debug)]
pub struct Expr {
    arity: usize,
    root: Node,
}

impl Expr {
    pub fn new(arity: usize, root: Node) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Predicate("arity must be positive".into()));
        }
        root.check(arity)?;
        Ok(Self { arity, root })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn constant(arity: usize, c: f64) -> Result<Self> {
        Self::new(arity, Node::Const(c))
    }

    pub fn poly(p: TracePoly) -> Self {
        Self {
            arity: p.arity(),
            root: Node::Poly(p),
        }
    }

    /// `x ↦ Re⟨x, a⟩ + offset`.
    pub fn linear(a: &Tuple, offset: f64) -> Self {
        let n = a.arity();
        let mut terms: Vec<Term> = (0..n)
            .map(|k| Term {
                coef: C64::new(1.0, 0.0),
                word: vec![Letter::Adj(k), Letter::Const(k)],
            })
            .collect();
        if offset != 0.0 {
            terms.push(Term {
                coef: C64::new(offset, 0.0),
                word: vec![],
            });
        }
        Self::poly(TracePoly::new(n, terms, a.entries().to_vec()).expect("well-formed"))
    }

    /// `x ↦ (c/2) ‖x‖²`.
    pub fn half_norm_sq(arity: usize, c: f64) -> Self {
        let terms = (0..arity)
            .map(|k| Term {
                coef: C64::new(c / 2.0, 0.0),
                word: vec![Letter::Adj(k), Letter::Var(k)],
            })
            .collect();
        Self::poly(TracePoly::new(arity, terms, vec![]).expect("well-formed"))
    }
}

impl Predicate for Expr {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: &Tuple) -> Eval {
        assert_eq!(x.arity(), self.arity, "predicate arity mismatch");
        let o = self.root.run(x, false);
        Eval {
            value: o.value,
            converged: o.converged,
        }
    }

    fn eval_grad(&self, x: &Tuple) -> Option<GradEval> {
        assert_eq!(x.arity(), self.arity, "predicate arity mismatch");
        let o = self.root.run(x, true);
        Some(GradEval {
            value: o.value,
            grad: o.grad.expect("requested"),
            converged: o.converged,
        })
    }

    fn lipschitz_on(&self, ball: &BallSpec) -> Option<f64> {
        self.root.meta(ball).lip
    }

    fn bound_on(&self, ball: &BallSpec) -> Option<f64> {
        self.root.meta(ball).bound
    }

    fn semiconvexity_on(&self, ball: &BallSpec) -> Option<f64> {
        self.root.meta(ball).sconv
    }

    fn semiconcavity_on(&self, ball: &BallSpec) -> Option<f64> {
        self.root.meta(ball).sconc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random, TracialAlgebra};

    /// `Re τ(x0^3) + 0.5 Im τ(x0* x1 c0)` with a random constant.
    fn sample_poly(alg: &std::sync::Arc<crate::algebra::TracialAlgebra>, seed: u64) -> TracePoly {
        let mut rng = random::seeded(seed);
        let c0 = random::random_element(alg, &mut rng);
        TracePoly::new(
            2,
            vec![
                Term {
                    coef: C64::new(1.0, 0.0),
                    word: vec![Letter::Var(0), Letter::Var(0), Letter::Var(0)],
                },
                Term {
                    coef: C64::new(0.0, -0.5),
                    word: vec![Letter::Adj(0), Letter::Var(1), Letter::Const(0)],
                },
            ],
            vec![c0],
        )
        .unwrap()
    }

    /// Entrywise oracle: expand the normalized trace of each block as an
    /// explicit index sum.
    fn naive_value(p: &TracePoly, x: &Tuple) -> f64 {
        let alg = x.algebra();
        let mut total = 0.0;
        for t in p.terms() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..alg.num_blocks() {
                let n = alg.block_dim(j);
                let mats: Vec<crate::Mat> = t
                    .word
                    .iter()
                    .map(|l| match *l {
                        Letter::Var(k) => x.entry(k).block(j).clone(),
                        Letter::Adj(k) => x.entry(k).block(j).adjoint(),
                        Letter::Const(i) => p.consts()[i].block(j).clone(),
                    })
                    .collect();
                let mut tr = C64::new(0.0, 0.0);
                if mats.is_empty() {
                    tr = C64::new(n as f64, 0.0);
                } else {
                    // Sum over index chains i_0 → i_1 → ... → i_0.
                    let len = mats.len();
                    let mut idx = vec![0usize; len];
                    loop {
                        let mut prod = C64::new(1.0, 0.0);
                        for p in 0..len {
                            prod *= mats[p][(idx[p], idx[(p + 1) % len])];
                        }
                        tr += prod;
                        let mut k = 0;
                        while k < len {
                            idx[k] += 1;
                            if idx[k] < n {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                        if k == len {
                            break;
                        }
                    }
                }
                acc += tr * alg.weight(j) / n as f64;
            }
            total += (t.coef * acc).re;
        }
        total
    }

    #[test]
    fn value_matches_index_sum_oracle() {
        let alg = TracialAlgebra::from_parts(&[(1, 1, 3), (2, 2, 3)]).unwrap();
        let p = sample_poly(&alg, 1);
        let mut rng = random::seeded(2);
        for _ in 0..10 {
            let x = random::random_tuple(&alg, 2, &mut rng);
            assert!((p.value(&x) - naive_value(&p, &x)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let alg = TracialAlgebra::matrix(3).unwrap();
        let p = sample_poly(&alg, 3);
        let mut rng = random::seeded(4);
        let x = random::random_tuple(&alg, 2, &mut rng);
        let (_, g) = p.value_grad(&x);
        let h = 1e-6;
        for i in 0..x.real_dim() {
            let e = Tuple::real_basis_vector(&alg, 2, i);
            let fd = (p.value(&x.axpy(h, &e)) - p.value(&x.axpy(-h, &e))) / (2.0 * h);
            assert!((fd - g.re_inner(&e)).abs() < 1e-7, "coordinate {i}");
        }
    }

    #[test]
    fn symbolic_bounds_hold_on_samples() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let p = sample_poly(&alg, 5);
        let ball = BallSpec::new(vec![0.8, 1.3]).unwrap();
        let (b, l, c) = (p.bound(&ball), p.lipschitz(&ball), p.curvature(&ball));
        let mut rng = random::seeded(6);
        for _ in 0..200 {
            let x = random::random_in_ball(&alg, &ball, &mut rng);
            let y = random::random_in_ball(&alg, &ball, &mut rng);
            assert!(p.value(&x).abs() <= b + 1e-12);
            assert!((p.value(&x) - p.value(&y)).abs() <= l * x.dist(&y) + 1e-12);
            let mid = x.lerp(&y, 0.5);
            let second = p.value(&x) + p.value(&y) - 2.0 * p.value(&mid);
            assert!(second.abs() <= c / 4.0 * x.dist(&y).powi(2) + 1e-12);
        }
    }

    #[test]
    fn helpers() {
        let alg = TracialAlgebra::matrix(2).unwrap();
        let mut rng = random::seeded(7);
        let a = random::random_tuple(&alg, 2, &mut rng);
        let x = random::random_tuple(&alg, 2, &mut rng);
        let lin = Expr::linear(&a, 0.25);
        assert!((lin.value(&x) - x.re_inner(&a) - 0.25).abs() < 1e-12);
        let g = lin.eval_grad(&x).unwrap().grad;
        assert!(g.dist(&a) < 1e-12);
        let q = Expr::half_norm_sq(2, 3.0);
        assert!((q.value(&x) - 1.5 * x.norm_sq()).abs() < 1e-12);
        assert!(q.eval_grad(&x).unwrap().grad.dist(&x.scale(3.0)) < 1e-12);
        let ball = BallSpec::uniform(2, 1.0).unwrap();
        assert_eq!(q.semiconvexity_on(&ball), Some(3.0));
        assert_eq!(lin.semiconvexity_on(&ball), Some(0.0));
    }

    #[test]
    fn connectives_and_quantifiers() {
        let alg = TracialAlgebra::matrix(1).unwrap();
        let x = Tuple::single(Element::scalar(&alg, C64::new(0.3, -0.4)));
        // sup_{|y| ≤ 2} Re(conj(x) y) = 2|x| = 1.
        let body = TracePoly::new(
            2,
            vec![Term {
                coef: C64::new(1.0, 0.0),
                word: vec![Letter::Adj(0), Letter::Var(1)],
            }],
            vec![],
        )
        .unwrap();
        let q = Quantifier {
            ball: BallSpec::uniform(1, 2.0).unwrap(),
            body: Node::Poly(body),
            opts: SolverOptions::default(),
        };
        let sup = Expr::new(1, Node::Sup(Box::new(q.clone()))).unwrap();
        let e = sup.eval(&x);
        assert!(e.converged);
        assert!((e.value - 1.0).abs() < 1e-9);
        let inf = Expr::new(1, Node::Inf(Box::new(q))).unwrap();
        assert!((inf.value(&x) + 1.0).abs() < 1e-9);
        let m = Expr::new(
            1,
            Node::Max(vec![Node::Const(0.7), Node::Abs(Box::new(Node::Scale(-1.0, Box::new(sup.root().clone()))))]),
        )
        .unwrap();
        assert!((m.value(&x) - 1.0).abs() < 1e-9);
        assert!(Expr::new(1, Node::Add(vec![])).is_err());
    }
}
