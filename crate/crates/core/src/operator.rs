//! Operators, closed relations, the bounded transform, graph projections,
//! and the two operator-norm metrics built on them.
//!
//! A `MatrixOperator` is a rectangular complex matrix read as a map from a
//! model space `H` of dimension `n` to `H'` of dimension `m`. Its graph is
//! a closed subspace of `H ⊕ H'`, stored as the orthogonal projection onto
//! it (`ClosedRelation`). Relations that are not graphs — vertical
//! subspaces absorbing "eigenvalue at infinity" limits — live in the same
//! type.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{
    self, block2x2, hermitize, identity, is_finite, opnorm, singular_values, zeros, CMatrix,
    MatrixJson,
};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// A rectangular complex matrix viewed as a regular operator between
/// finite-dimensional model spaces (dimension `n` to dimension `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    entries: CMatrix,
}

impl MatrixOperator {
    /// Wraps a matrix, rejecting non-finite entries.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !is_finite(&entries) {
            return Err(Error::NonFinite("MatrixOperator entries"));
        }
        Ok(MatrixOperator { entries })
    }

    /// 1×1 operator from a real scalar.
    pub fn scalar(value: f64) -> Self {
        MatrixOperator {
            entries: cmatrix::diag_real(&[value]),
        }
    }

    /// Square diagonal operator with real entries.
    pub fn diag(entries: &[f64]) -> Self {
        MatrixOperator {
            entries: cmatrix::diag_real(entries),
        }
    }

    pub fn from_real(m: &nalgebra::DMatrix<f64>) -> Self {
        MatrixOperator {
            entries: cmatrix::from_real(m),
        }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        MatrixOperator {
            entries: zeros(m, n),
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `(m, n)`: maps a space of dimension `n` into one of dimension `m`.
    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    /// Dimension of the domain model space `H`.
    pub fn dim_domain(&self) -> usize {
        self.entries.ncols()
    }

    /// Dimension of the codomain model space `H'`.
    pub fn dim_codomain(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> MatrixOperator {
        MatrixOperator {
            entries: self.entries.adjoint(),
        }
    }

    pub fn norm(&self) -> f64 {
        opnorm(&self.entries)
    }

    /// `‖A − A*‖`, defined for square operators only.
    pub fn selfadjoint_defect(&self) -> f64 {
        opnorm(&(&self.entries - self.entries.adjoint()))
    }

    /// Orthogonal projection onto the graph of the operator.
    pub fn graph(&self) -> ClosedRelation {
        graph_projection(self)
    }
}

impl Serialize for MatrixOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson(self.entries.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = MatrixJson::deserialize(d)?;
        MatrixOperator::new(m.0).map_err(serde::de::Error::custom)
    }
}

/// A closed subspace of `H ⊕ H'`, stored as the orthogonal projection onto
/// it, together with the dimensions of the two factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedRelation {
    projection: MatrixJson,
    n: usize,
    m: usize,
    rank: usize,
}

impl ClosedRelation {
    /// Validates self-adjointness, idempotency and an unambiguous rank,
    /// then records the rank (eigenvalue count near 1).
    pub fn new(projection: CMatrix, n: usize, m: usize, tol: &Tolerances) -> Result<Self> {
        if projection.nrows() != n + m || projection.ncols() != n + m {
            return Err(Error::ShapeMismatch(format!(
                "relation projection is {}×{}, expected {}×{}",
                projection.nrows(),
                projection.ncols(),
                n + m,
                n + m
            )));
        }
        let sa_defect = opnorm(&(&projection - projection.adjoint()));
        let idem_defect = opnorm(&(&projection * &projection - &projection));
        let scale = 1.0f64.max(opnorm(&projection));
        if sa_defect > tol.algebraic * scale || idem_defect > tol.algebraic * scale {
            return Err(Error::ShapeMismatch(format!(
                "not a projection: ‖P−P*‖ = {sa_defect:.3e}, ‖P²−P‖ = {idem_defect:.3e}"
            )));
        }
        let rank = projection_rank(&projection, tol)?;
        Ok(ClosedRelation {
            projection: MatrixJson(projection),
            n,
            m,
            rank,
        })
    }

    /// The graph of an operator, or a vertical/horizontal axis; trusted
    /// constructor for internally computed projections.
    pub(crate) fn from_parts(projection: CMatrix, n: usize, m: usize, rank: usize) -> Self {
        ClosedRelation {
            projection: MatrixJson(projection),
            n,
            m,
            rank,
        }
    }

    /// The vertical subspace `0 ⊕ H'` (every operator-graph limit at a pole).
    pub fn vertical(n: usize, m: usize) -> Self {
        let mut p = zeros(n + m, n + m);
        for i in n..n + m {
            p[(i, i)] = Complex::new(1.0, 0.0);
        }
        ClosedRelation::from_parts(p, n, m, m)
    }

    /// The horizontal subspace `H ⊕ 0` (the graph of the zero operator).
    pub fn horizontal(n: usize, m: usize) -> Self {
        let mut p = zeros(n + m, n + m);
        for i in 0..n {
            p[(i, i)] = Complex::new(1.0, 0.0);
        }
        ClosedRelation::from_parts(p, n, m, n)
    }

    pub fn projection(&self) -> &CMatrix {
        &self.projection.0
    }

    /// Dimensions `(n, m)` of the two factors.
    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.m
    }
}

/// Rank of a projection by counting eigenvalues near 1; eigenvalues inside
/// the hard gap window are a diagnostic error, never a guess.
fn projection_rank(p: &CMatrix, tol: &Tolerances) -> Result<usize> {
    let (vals, _) = cmatrix::hermitian_eigen(p)?;
    let (lo, hi) = tol.rank_window();
    let mut rank = 0;
    for &v in &vals {
        if v > lo && v < hi {
            return Err(Error::RankAmbiguous { value: v, lo, hi });
        }
        if v >= hi {
            rank += 1;
        }
    }
    Ok(rank)
}

/// The bounded transform `a = A(1+A*A)^{−1/2}` together with
/// `q = (1−a*a)^{1/2}` and `b = a·q`.
#[derive(Debug, Clone)]
pub struct BoundedTransformData {
    pub a: CMatrix,
    pub q: CMatrix,
    pub b: CMatrix,
}

/// Computes the bounded transform of an operator.
///
/// `q = (1+A*A)^{−1/2}` is obtained from a Hermitian eigendecomposition of
/// `1 + A*A`; the transform is `a = A·q` and `b = a·q`.
pub fn bounded_transform(a_op: &MatrixOperator) -> Result<BoundedTransformData> {
    let a_mat = a_op.entries();
    let n = a_op.dim_domain();
    let gram = identity(n) + a_mat.adjoint() * a_mat;
    let q = cmatrix::inv_sqrt_pd(&hermitize(&gram), 0.5)?;
    let a = a_mat * &q;
    let b = &a * &q;
    Ok(BoundedTransformData { a, q, b })
}

/// Recovers `A = a(1−a*a)^{−1/2}` from a strict contraction.
///
/// Fails with a "not in the open image" error when `1 − a*a` is not
/// positive definite with margin at least `tol.algebraic`.
pub fn inverse_bounded_transform(a: &CMatrix, tol: &Tolerances) -> Result<MatrixOperator> {
    if !is_finite(a) {
        return Err(Error::NonFinite("contraction entries"));
    }
    let n = a.ncols();
    let gap = hermitize(&(identity(n) - a.adjoint() * a));
    let inv_root = cmatrix::inv_sqrt_pd(&gap, tol.algebraic).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::NotInOpenImage { norm: opnorm(a) },
        other => other,
    })?;
    MatrixOperator::new(a * inv_root)
}

/// Orthogonal projection onto the graph of `A`, assembled from the
/// bounded-transform blocks `[[q², q a*], [a q, a a*]]`.
pub fn graph_projection(a_op: &MatrixOperator) -> ClosedRelation {
    let (m, n) = a_op.shape();
    let t = bounded_transform(a_op).expect("1 + A*A is positive definite for finite A");
    let q2 = &t.q * &t.q;
    let upper_right = t.b.adjoint();
    let lower_right = &t.a * t.a.adjoint();
    let p = block2x2(&q2, &upper_right, &t.b, &lower_right);
    ClosedRelation::from_parts(hermitize(&p), n, m, n)
}

/// The adjoint of a closed relation: `p_{A*} = J (1 − p_A) J*` with
/// `J(x ⊕ y) = (−y) ⊕ x`. Graphs of operators map to graphs of adjoints;
/// vertical subspaces map to horizontal axes.
pub fn adjoint_relation(r: &ClosedRelation) -> ClosedRelation {
    let (n, m) = r.dims();
    let j = relation_flip(n, m);
    let complement = identity(n + m) - r.projection();
    let p = &j * complement * j.adjoint();
    ClosedRelation::from_parts(hermitize(&p), m, n, n + m - r.rank())
}

/// `J: H ⊕ H' → H' ⊕ H`, `(x, y) ↦ (−y, x)`.
fn relation_flip(n: usize, m: usize) -> CMatrix {
    let mut j = zeros(m + n, n + m);
    for i in 0..m {
        j[(i, n + i)] = Complex::new(-1.0, 0.0);
    }
    for i in 0..n {
        j[(m + i, i)] = Complex::new(1.0, 0.0);
    }
    j
}

/// Riesz distance `‖f(A) − f(B)‖` (operator norm of the difference of
/// bounded transforms).
pub fn riesz_distance(a: &MatrixOperator, b: &MatrixOperator) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "riesz_distance: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let ta = bounded_transform(a)?;
    let tb = bounded_transform(b)?;
    Ok(opnorm(&(ta.a - tb.a)))
}

/// Graph distance `‖p_X − p_Y‖` between closed relations.
pub fn graph_distance(x: &ClosedRelation, y: &ClosedRelation) -> Result<f64> {
    if x.dims() != y.dims() {
        return Err(Error::ShapeMismatch(format!(
            "graph_distance: {:?} vs {:?}",
            x.dims(),
            y.dims()
        )));
    }
    Ok(opnorm(&(x.projection() - y.projection())))
}

/// Graph distance between two operators via their graph projections.
pub fn graph_distance_ops(a: &MatrixOperator, b: &MatrixOperator) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "graph_distance: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    graph_distance(&a.graph(), &b.graph())
}

/// Outcome of the graph test on a closed relation.
#[derive(Debug, Clone)]
pub enum GraphDecision {
    /// The relation is the graph of this operator.
    Graph(MatrixOperator),
    /// The relation meets `0 ⊕ H'` in a subspace of this dimension.
    VerticalDefect { defect: usize },
}

/// Decides whether a relation is an operator graph, extracting the
/// operator when it is.
///
/// Finite-dimensional criterion: `rank(P) = n` and the range of `P` meets
/// the vertical axis `0 ⊕ H'` trivially. The range basis is split into
/// `H`- and `H'`-blocks `X`, `Y`; the relation is a graph iff `X` is
/// invertible, and then `A = Y X^{−1}`.
pub fn is_operator_graph(r: &ClosedRelation, tol: &Tolerances) -> Result<GraphDecision> {
    let (n, m) = r.dims();
    let (vals, vecs) = cmatrix::hermitian_eigen(r.projection())?;
    let (lo, hi) = tol.rank_window();
    let mut range_cols: Vec<usize> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if v > lo && v < hi {
            return Err(Error::RankAmbiguous { value: v, lo, hi });
        }
        if v >= hi {
            range_cols.push(i);
        }
    }
    let rank = range_cols.len();
    let mut basis = CMatrix::zeros(n + m, rank);
    for (col, &i) in range_cols.iter().enumerate() {
        basis.set_column(col, &vecs.column(i));
    }
    let x = basis.view((0, 0), (n, rank)).into_owned();
    let y = basis.view((n, 0), (m, rank)).into_owned();

    // dim(range ∩ vertical axis) = rank(P) − rank(X); a graph additionally
    // needs rank(P) = n (full domain). Anything else lands in the
    // vertical-defect branch.
    let sv = singular_values(&x);
    let x_rank = sv.iter().filter(|&&s| s >= tol.algebraic).count();
    let defect = rank - x_rank;
    if rank != n || defect > 0 {
        return Ok(GraphDecision::VerticalDefect { defect });
    }
    let x_inv = x
        .try_inverse()
        .ok_or(Error::VerticalDefect { defect: 1 })?;
    let a = MatrixOperator::new(y * x_inv)?;
    Ok(GraphDecision::Graph(a))
}

/// Kernel and cokernel dimensions by singular-value counting.
///
/// Singular values at or below `tol.algebraic · ‖A‖` count as zero; values
/// inside the ambiguity window around the threshold are a diagnostic
/// error.
pub fn kernel_cokernel_dims(a: &MatrixOperator, tol: &Tolerances) -> Result<(usize, usize)> {
    let (m, n) = a.shape();
    let sv = singular_values(a.entries());
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = tol.algebraic * smax;
    if smax > 0.0 {
        for &s in &sv {
            if s > threshold / 10.0 && s < threshold * 10.0 {
                return Err(Error::SingularValueAmbiguous {
                    value: s,
                    threshold,
                });
            }
        }
    }
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok((n - rank, m - rank))
}
