//! Mode families: parametrized direct sums of scalar modes modelling
//! truncations of diagonal operators on ℓ².
//!
//! Each mode is a named closed-form map `t ↦ a_n(t)`. A pole of a mode is
//! the desk-scale picture of an eigenvalue escaping to infinity: the graph
//! of the mode converges to the vertical line, so evaluation at a pole
//! yields a closed relation rather than an operator. Distances between
//! mode families are computed exactly as suprema of scalar closed forms —
//! the direct-sum metric identity.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::cmatrix::zeros;
use crate::error::{Error, Result};
use crate::operator::{ClosedRelation, MatrixOperator};

/// Bounded transform of a real scalar, `f(λ) = λ/√(1+λ²)`, overflow-safe.
pub fn scalar_transform(lambda: f64) -> f64 {
    lambda / 1.0f64.hypot(lambda)
}

/// Closed-form scalar distances `(d_G, d_R)` between two finite scalars:
/// `d_G = |λ−μ|/√((1+λ²)(1+μ²))` and `d_R = |f(λ) − f(μ)|`.
pub fn scalar_distances(lambda: f64, mu: f64) -> (f64, f64) {
    (
        scalar_graph_distance(lambda, mu),
        scalar_riesz_distance(lambda, mu),
    )
}

pub fn scalar_graph_distance(lambda: f64, mu: f64) -> f64 {
    ((lambda - mu) / (1.0f64.hypot(lambda) * 1.0f64.hypot(mu))).abs()
}

pub fn scalar_riesz_distance(lambda: f64, mu: f64) -> f64 {
    (scalar_transform(lambda) - scalar_transform(mu)).abs()
}

/// Graph distance where either side may be the vertical line (`None`),
/// the graph limit of a scalar at a pole.
pub fn scalar_graph_distance_ext(lambda: Option<f64>, mu: Option<f64>) -> f64 {
    match (lambda, mu) {
        (Some(l), Some(m)) => scalar_graph_distance(l, m),
        (Some(l), None) | (None, Some(l)) => 1.0 / 1.0f64.hypot(l),
        (None, None) => 0.0,
    }
}

/// Largest ratio `d_R/d_G` over a dense scalar grid in `[c, hi]²` — the
/// semibounded comparison constant `K(c)`.
///
/// Nodes are clustered cubically toward `c`, where the ratio peaks.
/// Coincident pairs (`d_G = 0`) are skipped.
pub fn semibounded_ratio_scan(c: f64, hi: f64, points: usize) -> f64 {
    let n = points.max(2);
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            c + (hi - c) * s * s * s
        })
        .collect();
    let mut k: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dg = scalar_graph_distance(nodes[i], nodes[j]);
            if dg > 0.0 {
                k = k.max(scalar_riesz_distance(nodes[i], nodes[j]) / dg);
            }
        }
    }
    k
}

/// A named closed-form scalar mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeGenerator {
    /// `a(t) = slope·t + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `a(t) = 1/(t − center)`, pole at `center`
    Pole { center: f64 },
}

impl ModeGenerator {
    pub fn constant(c: f64) -> Self {
        ModeGenerator::Linear {
            slope: 0.0,
            intercept: c,
        }
    }

    /// Value at `t`, `None` at a pole.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let v = match *self {
            ModeGenerator::Linear { slope, intercept } => slope * t + intercept,
            ModeGenerator::Pole { center } => 1.0 / (t - center),
        };
        v.is_finite().then_some(v)
    }
}

/// Ordered list of scalar modes; evaluation assembles the diagonal matrix
/// `diag(a_1(t), …, a_N(t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFamily {
    modes: Vec<ModeGenerator>,
}

/// Value of a family at a node: an operator, or a closed relation when a
/// pole puts a vertical line into the picture.
#[derive(Debug, Clone)]
pub enum Evaluated {
    Operator(MatrixOperator),
    Relation(ClosedRelation),
}

impl Evaluated {
    pub fn as_operator(&self) -> Option<&MatrixOperator> {
        match self {
            Evaluated::Operator(a) => Some(a),
            Evaluated::Relation(_) => None,
        }
    }

    pub fn graph(&self) -> ClosedRelation {
        match self {
            Evaluated::Operator(a) => a.graph(),
            Evaluated::Relation(r) => r.clone(),
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(self, Evaluated::Operator(_))
    }
}

impl ModeFamily {
    pub fn new(modes: Vec<ModeGenerator>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParams("mode family needs N ≥ 1 modes".into()));
        }
        Ok(ModeFamily { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeGenerator] {
        &self.modes
    }

    /// Scalar values at `t`, `None` marking pole modes.
    pub fn scalars_at(&self, t: f64) -> Vec<Option<f64>> {
        self.modes.iter().map(|m| m.eval(t)).collect()
    }

    /// Assembles the block-diagonal value at `t`. Poles yield the relation
    /// with vertical lines in the affected mode blocks.
    pub fn value_at(&self, t: f64) -> Evaluated {
        let scalars = self.scalars_at(t);
        if scalars.iter().all(Option::is_some) {
            let diag: Vec<f64> = scalars.into_iter().map(Option::unwrap).collect();
            Evaluated::Operator(MatrixOperator::diag(&diag))
        } else {
            Evaluated::Relation(self.relation_at(&scalars))
        }
    }

    /// Projection onto `⊕_n Γ_n ⊂ H ⊕ H'` where mode `n` occupies
    /// coordinates `(n, N+n)` and `Γ_n` is the graph of `a_n` (the
    /// vertical line at a pole).
    fn relation_at(&self, scalars: &[Option<f64>]) -> ClosedRelation {
        let n = self.modes.len();
        let mut p = zeros(2 * n, 2 * n);
        for (k, s) in scalars.iter().enumerate() {
            match s {
                Some(a) => {
                    let inv_h = 1.0 / 1.0f64.hypot(*a);
                    let fa = a * inv_h;
                    p[(k, k)] = Complex::new(inv_h * inv_h, 0.0);
                    p[(k, n + k)] = Complex::new(fa * inv_h, 0.0);
                    p[(n + k, k)] = Complex::new(fa * inv_h, 0.0);
                    p[(n + k, n + k)] = Complex::new(fa * fa, 0.0);
                }
                None => {
                    p[(n + k, n + k)] = Complex::new(1.0, 0.0);
                }
            }
        }
        ClosedRelation::from_parts(p, n, n, n)
    }

    /// Exact graph distance between family values at `s` and `t`: the sup
    /// over modes of the scalar closed form, poles included.
    pub fn graph_distance(&self, s: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| scalar_graph_distance_ext(m.eval(s), m.eval(t)))
            .fold(0.0, f64::max)
    }

    /// Exact Riesz distance between family values; errors if either node
    /// has a pole mode (no operator, no transform).
    pub fn riesz_distance(&self, s: f64, t: f64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for m in &self.modes {
            let (vs, vt) = match (m.eval(s), m.eval(t)) {
                (Some(a), Some(b)) => (a, b),
                (None, _) => return Err(Error::RieszAtRelation { x: s }),
                (_, None) => return Err(Error::RieszAtRelation { x: t }),
            };
            sup = sup.max(scalar_riesz_distance(vs, vt));
        }
        Ok(sup)
    }

    /// Sign pattern of modes at `t` from a tail index onward, used by the
    /// essential-positivity classifier.
    pub fn tail_signs(&self, t: f64, tail_index: usize) -> Vec<Option<f64>> {
        self.modes[tail_index.min(self.modes.len())..]
            .iter()
            .map(|m| m.eval(t))
            .collect()
    }
}
