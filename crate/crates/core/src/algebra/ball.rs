use serde::{Deserialize, Serialize};

use super::Tuple;
use crate::error::{Error, Result};
use crate::linalg;

/// Slack allowed by [`BallSpec::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Product of operator-norm balls `D_{r_1} × ... × D_{r_n}`. Serialized as
/// the list of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BallSpec {
    radii: Vec<f64>,
}

impl TryFrom<Vec<f64>> for BallSpec {
    type Error = Error;

    fn try_from(radii: Vec<f64>) -> Result<Self> {
        Self::new(radii)
    }
}

impl From<BallSpec> for Vec<f64> {
    fn from(b: BallSpec) -> Self {
        b.radii
    }
}

impl BallSpec {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Precondition("ball needs at least one radius".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Precondition(format!("radius {r} is not positive")));
        }
        Ok(Self { radii })
    }

    pub fn uniform(arity: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; arity])
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn arity(&self) -> usize {
        self.radii.len()
    }

    /// `|r| = (Σ r_k²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, f: f64) -> Result<Self> {
        Self::new(self.radii.iter().map(|r| r * f).collect())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.arity() != other.arity() {
            return Err(Error::Shape("ball arities differ".into()));
        }
        Self::new(self.radii.iter().zip(&other.radii).map(|(a, b)| a + b).collect())
    }

    /// Entrywise `self ≤ other`.
    pub fn within(&self, other: &Self) -> bool {
        self.arity() == other.arity() && self.radii.iter().zip(&other.radii).all(|(a, b)| a <= b)
    }

    pub fn contains(&self, x: &Tuple) -> bool {
        x.arity() == self.arity()
            && x
                .op_norms()
                .iter()
                .zip(&self.radii)
                .all(|(n, r)| *n <= r + MEMBERSHIP_TOL)
    }
}

/// L²-nearest point of the ball: singular values clipped at `r_k` per entry
/// and per block, singular vectors retained.
pub fn project_ball(x: &Tuple, ball: &BallSpec) -> Tuple {
    assert_eq!(x.arity(), ball.arity(), "ball arity mismatch");
    let mut k = 0;
    x.map(|e| {
        let r = ball.radii[k];
        k += 1;
        e.map_blocks(|_, b| linalg::clip_singular_values(b, r))
    })
}

/// `δ(x) = d(x, D_r)`.
pub fn dist_to_ball(x: &Tuple, ball: &BallSpec) -> f64 {
    x.dist(&project_ball(x, ball))
}
