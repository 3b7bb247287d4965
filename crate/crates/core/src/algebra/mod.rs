//! Tracial algebra arithmetic: traces, L² geometry, operator-norm balls,
//! conditional expectations, inclusions and generated subalgebras.

mod ball;
mod element;
mod inclusion;
pub mod json;
pub mod random;
mod structure;
mod subalgebra;
mod tuple;

pub use ball::{dist_to_ball, project_ball, BallSpec};
pub use element::Element;
pub use inclusion::Inclusion;
pub use structure::{Block, TracialAlgebra, DEFAULT_DIM_CAP};
pub use subalgebra::{
    conditional_expectation, generated_algebra, generated_algebra_tol, orthonormalize, Subalgebra, CLOSURE_TOL,
};
pub use tuple::Tuple;
