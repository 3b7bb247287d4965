//! JSON grammar for predicates.
//!
//! ```json
//! {"op": "max", "args": [
//!   {"op": "poly", "terms": [{"coef": [1, 0], "word": ["x0*", "x0"]}]},
//!   {"op": "sup", "radii": [1.0], "arg":
//!     {"op": "poly", "terms": [{"word": ["x0*", "x1"], "part": "re"}]}}
//! ]}
//! ```
//!
//! Letters are `xK` (variable), `xK*` (adjoint) and `cI` (constant `I` of the
//! enclosing polynomial). A quantifier binds new variables after the free
//! ones, so inside `sup` over one radius a unary predicate sees `x0, x1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::json::{element_from_json, ElementJson};
use crate::algebra::{BallSpec, TracialAlgebra};
use crate::error::{Error, Result};
use crate::C64;

use super::expr::{Letter, Node, Quantifier, Term, TracePoly};
use super::solver::SolverOptions;
use super::Expr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    #[default]
    Re,
    Im,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    #[serde(default = "one")]
    pub coef: [f64; 2],
    pub word: Vec<String>,
    #[serde(default)]
    pub part: Part,
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExprJson {
    Const {
        value: f64,
    },
    Poly {
        terms: Vec<TermJson>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        consts: Vec<ElementJson>,
    },
    Add {
        args: Vec<ExprJson>,
    },
    Scale {
        factor: f64,
        arg: Box<ExprJson>,
    },
    Neg {
        arg: Box<ExprJson>,
    },
    Mul {
        args: Vec<ExprJson>,
    },
    Max {
        args: Vec<ExprJson>,
    },
    Min {
        args: Vec<ExprJson>,
    },
    Abs {
        arg: Box<ExprJson>,
    },
    Sup {
        radii: Vec<f64>,
        arg: Box<ExprJson>,
    },
    Inf {
        radii: Vec<f64>,
        arg: Box<ExprJson>,
    },
}

fn parse_letter(s: &str) -> Result<Letter> {
    let bad = || Error::Predicate(format!("bad letter {s:?}; expected xK, xK* or cI"));
    if let Some(rest) = s.strip_prefix('x') {
        let (num, adj) = match rest.strip_suffix('*') {
            Some(n) => (n, true),
            None => (rest, false),
        };
        let k: usize = num.parse().map_err(|_| bad())?;
        Ok(if adj { Letter::Adj(k) } else { Letter::Var(k) })
    } else if let Some(num) = s.strip_prefix('c') {
        Ok(Letter::Const(num.parse().map_err(|_| bad())?))
    } else {
        Err(bad())
    }
}

fn letter_name(l: Letter) -> String {
    match l {
        Letter::Var(k) => format!("x{k}"),
        Letter::Adj(k) => format!("x{k}*"),
        Letter::Const(i) => format!("c{i}"),
    }
}

impl ExprJson {
    /// Builds a predicate in `arity` free variables; constants are read in
    /// `alg`, and quantifiers use `opts` for their inner solves.
    pub fn build(&self, arity: usize, alg: &Arc<TracialAlgebra>, opts: SolverOptions) -> Result<Expr> {
        Expr::new(arity, self.node(arity, alg, opts)?)
    }

    fn node(&self, arity: usize, alg: &Arc<TracialAlgebra>, opts: SolverOptions) -> Result<Node> {
        let many = |args: &[ExprJson]| -> Result<Vec<Node>> { args.iter().map(|a| a.node(arity, alg, opts)).collect() };
        Ok(match self {
            ExprJson::Const { value } => Node::Const(*value),
            ExprJson::Poly { terms, consts } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        let c = C64::new(t.coef[0], t.coef[1]);
                        // Im(c τ) = Re(−i c τ).
                        let coef = match t.part {
                            Part::Re => c,
                            Part::Im => c * C64::new(0.0, -1.0),
                        };
                        let word = t.word.iter().map(|s| parse_letter(s)).collect::<Result<_>>()?;
                        Ok(Term { coef, word })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let consts = consts
                    .iter()
                    .map(|c| element_from_json(alg, c))
                    .collect::<Result<Vec<_>>>()?;
                Node::Poly(TracePoly::new(arity, terms, consts)?)
            }
            ExprJson::Add { args } => Node::Add(many(args)?),
            ExprJson::Scale { factor, arg } => Node::Scale(*factor, Box::new(arg.node(arity, alg, opts)?)),
            ExprJson::Neg { arg } => Node::Scale(-1.0, Box::new(arg.node(arity, alg, opts)?)),
            ExprJson::Mul { args } => {
                let mut nodes = many(args)?;
                if nodes.len() < 2 {
                    return Err(Error::Predicate("mul needs at least two arguments".into()));
                }
                let first = nodes.remove(0);
                nodes
                    .into_iter()
                    .fold(first, |acc, n| Node::Mul(Box::new(acc), Box::new(n)))
            }
            ExprJson::Max { args } => Node::Max(many(args)?),
            ExprJson::Min { args } => Node::Min(many(args)?),
            ExprJson::Abs { arg } => Node::Abs(Box::new(arg.node(arity, alg, opts)?)),
            ExprJson::Sup { radii, arg } | ExprJson::Inf { radii, arg } => {
                let ball = BallSpec::new(radii.clone()).map_err(|e| Error::Predicate(e.to_string()))?;
                let body = arg.node(arity + ball.arity(), alg, opts)?;
                let q = Box::new(Quantifier { ball, body, opts });
                if matches!(self, ExprJson::Sup { .. }) {
                    Node::Sup(q)
                } else {
                    Node::Inf(q)
                }
            }
        })
    }

    /// Serializes a polynomial word back to its letters.
    pub fn word(letters: &[Letter]) -> Vec<String> {
        letters.iter().map(|l| letter_name(*l)).collect()
    }
}
