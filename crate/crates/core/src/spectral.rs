//! Spectral projections, chart covers, tail models and polarization
//! compatibility for self-adjoint families.
//!
//! Compactness has no finite-dimensional meaning; the declared proxy is a
//! tail model — a mode index beyond which entries count as "tail" — and
//! compatibility of polarizations means a small tail sup-norm of the
//! projection difference.

use serde::Serialize;

use crate::cmatrix::{self, opnorm, CMatrix};
use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::modes::{scalar_transform, Evaluated, ModeFamily};
use crate::operator::MatrixOperator;
use crate::tolerances::Tolerances;

/// Eigenvalues of a self-adjoint operator, ascending. Rejects inputs with
/// a self-adjointness defect above tolerance.
pub fn selfadjoint_eigenvalues(a_op: &MatrixOperator, tol: &Tolerances) -> Result<Vec<f64>> {
    let defect = a_op.selfadjoint_defect();
    if defect > tol.algebraic * a_op.norm().max(1.0) {
        return Err(Error::ShapeMismatch(format!(
            "operator is not self-adjoint: ‖A − A*‖ = {defect:.3e}"
        )));
    }
    Ok(cmatrix::hermitian_eigen(a_op.entries())?.0)
}

/// Spectral projection `1_{[λ,∞)}(A)` of a self-adjoint operator.
///
/// Requires a spectral gap of at least `tol.gap_min` around `λ`; a level
/// inside an eigenvalue cluster is an error, not a coin flip.
pub fn spectral_projection(a_op: &MatrixOperator, lambda: f64, tol: &Tolerances) -> Result<CMatrix> {
    let defect = a_op.selfadjoint_defect();
    if defect > tol.algebraic * a_op.norm().max(1.0) {
        return Err(Error::ShapeMismatch(format!(
            "operator is not self-adjoint: ‖A − A*‖ = {defect:.3e}"
        )));
    }
    let (vals, vecs) = cmatrix::hermitian_eigen(a_op.entries())?;
    let gap = vals
        .iter()
        .map(|v| (v - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    if gap < tol.gap_min {
        return Err(Error::NoSpectralGap {
            lambda,
            gap,
            gap_min: tol.gap_min,
        });
    }
    let n = vals.len();
    let mut p = cmatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v >= lambda {
            let col = vecs.column(i);
            p += col * col.adjoint();
        }
    }
    Ok(cmatrix::hermitize(&p))
}

/// A spectral level together with the grid nodes where it sits in a
/// resolvent gap of size at least `g_min`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralChart {
    pub lambda: f64,
    pub nodes: Vec<usize>,
    pub gaps: Vec<f64>,
}

impl SpectralChart {
    pub fn covers(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn gap_at(&self, node: usize) -> Option<f64> {
        self.nodes
            .binary_search(&node)
            .ok()
            .map(|k| self.gaps[k])
    }
}

/// Builds the chart cover of a self-adjoint family from candidate levels.
///
/// Every grid node must land in at least one chart; the uncovered nodes
/// are reported otherwise. Charts that cover nothing are dropped.
pub fn chart_cover(
    family: &OperatorFamily,
    candidates: &[f64],
    tol: &Tolerances,
) -> Result<Vec<SpectralChart>> {
    let spectra = family_spectra(family, tol)?;
    let mut charts = Vec::new();
    for &lambda in candidates {
        let mut nodes = Vec::new();
        let mut gaps = Vec::new();
        for (i, vals) in spectra.iter().enumerate() {
            let gap = vals
                .iter()
                .map(|v| (v - lambda).abs())
                .fold(f64::INFINITY, f64::min);
            if gap >= tol.gap_min {
                nodes.push(i);
                gaps.push(gap);
            }
        }
        if !nodes.is_empty() {
            charts.push(SpectralChart {
                lambda,
                nodes,
                gaps,
            });
        }
    }
    let uncovered: Vec<usize> = (0..spectra.len())
        .filter(|&i| !charts.iter().any(|c| c.covers(i)))
        .collect();
    if !uncovered.is_empty() {
        return Err(Error::UncoveredNodes { nodes: uncovered });
    }
    Ok(charts)
}

/// Midpoints of the largest gaps in the union spectrum over the grid —
/// the default chart candidates.
pub fn default_candidates(
    family: &OperatorFamily,
    max_count: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let spectra = family_spectra(family, tol)?;
    let mut all: Vec<f64> = spectra.into_iter().flatten().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| (*a - *b).abs() <= tol.gap_min);
    let mut gaps: Vec<(f64, f64)> = all
        .windows(2)
        .filter(|w| w[1] - w[0] > 2.0 * tol.gap_min)
        .map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1])))
        .collect();
    gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    Ok(gaps.into_iter().take(max_count).map(|(_, mid)| mid).collect())
}

fn family_spectra(family: &OperatorFamily, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let mut spectra = Vec::with_capacity(family.grid().points);
    for (i, v) in family.values()?.into_iter().enumerate() {
        match v {
            Evaluated::Operator(a) => spectra.push(selfadjoint_eigenvalues(&a, tol)?),
            Evaluated::Relation(_) => {
                return Err(Error::RelationNode {
                    x: family.grid().node(i),
                })
            }
        }
    }
    Ok(spectra)
}

/// Compact part of a self-adjoint operator at a level, in the
/// bounded-transform picture: `C = f(A) − (2 p_λ − 1)`.
pub fn compact_part(a_op: &MatrixOperator, lambda: f64, tol: &Tolerances) -> Result<CMatrix> {
    let p = spectral_projection(a_op, lambda, tol)?;
    let n = p.nrows();
    let symmetry = &p * nalgebra::Complex::new(2.0, 0.0) - cmatrix::identity(n);
    let f = crate::operator::bounded_transform(a_op)?.a;
    Ok(cmatrix::hermitize(&(f - symmetry)))
}

/// Tail declaration for mode-structured spaces: block sizes per mode and
/// the index from which blocks count as tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailModel {
    pub mode_dims: Vec<usize>,
    pub tail_index: usize,
}

impl TailModel {
    /// Uniform tail model for `n` scalar modes.
    pub fn scalar_modes(n: usize, tail_index: usize) -> Result<Self> {
        if tail_index > n {
            return Err(Error::InvalidParams(format!(
                "tail index {tail_index} exceeds mode count {n}"
            )));
        }
        Ok(TailModel {
            mode_dims: vec![1; n],
            tail_index,
        })
    }

    /// Coordinate offset where the tail starts.
    pub fn tail_offset(&self) -> usize {
        self.mode_dims[..self.tail_index].iter().sum()
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().sum()
    }

    /// Sup-norm of the tail block of a matrix.
    pub fn tail_norm(&self, m: &CMatrix) -> f64 {
        let off = self.tail_offset();
        let d = self.total_dim() - off;
        if d == 0 {
            return 0.0;
        }
        opnorm(&m.view((off, off), (d, d)).into_owned())
    }
}

/// Tail sup-norm of the compact part of a diagonal mode family at `t`,
/// computed from the scalar closed form `|f(a_n) ∓ 1|`.
pub fn compact_part_tail(
    modes: &ModeFamily,
    t: f64,
    lambda: f64,
    tail: &TailModel,
    tol: &Tolerances,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for mode in modes.modes().iter().skip(tail.tail_index) {
        let a = mode.eval(t).ok_or(Error::RelationNode { x: t })?;
        let gap = (a - lambda).abs();
        if gap < tol.gap_min {
            return Err(Error::NoSpectralGap {
                lambda,
                gap,
                gap_min: tol.gap_min,
            });
        }
        let sign = if a >= lambda { 1.0 } else { -1.0 };
        sup = sup.max((scalar_transform(a) - sign).abs());
    }
    Ok(sup)
}

/// The three Riesz components of self-adjoint families at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssentialSign {
    EssentiallyPositive,
    EssentiallyNegative,
    Neither,
}

/// Classifies a mode-backed self-adjoint family by the signs of its tail
/// modes across the whole grid.
///
/// An empty tail, or a tail mode vanishing at a node, makes the
/// classification inconclusive.
pub fn essential_sign(
    modes: &ModeFamily,
    params: &[f64],
    tail_index: usize,
) -> Result<EssentialSign> {
    if tail_index >= modes.len() {
        return Err(Error::TailInconclusive);
    }
    let mut positive = true;
    let mut negative = true;
    for &t in params {
        for s in modes.tail_signs(t, tail_index) {
            match s {
                Some(v) if v > 0.0 => negative = false,
                Some(v) if v < 0.0 => positive = false,
                _ => return Err(Error::TailInconclusive),
            }
        }
    }
    Ok(match (positive, negative) {
        (true, false) => EssentialSign::EssentiallyPositive,
        (false, true) => EssentialSign::EssentiallyNegative,
        _ => EssentialSign::Neither,
    })
}

/// A grid-indexed family of projections (a polarization along a family),
/// with an optional tail model for compatibility scoring.
#[derive(Debug, Clone)]
pub struct PolarizationFamily {
    params: Vec<f64>,
    projections: Vec<CMatrix>,
    origin: String,
    tail: Option<TailModel>,
}

impl PolarizationFamily {
    pub fn new(
        params: Vec<f64>,
        projections: Vec<CMatrix>,
        origin: &str,
        tol: &Tolerances,
    ) -> Result<Self> {
        if params.len() != projections.len() || projections.is_empty() {
            return Err(Error::ShapeMismatch(
                "polarization needs one projection per parameter".into(),
            ));
        }
        for p in &projections {
            let sa = opnorm(&(p - p.adjoint()));
            let idem = opnorm(&(p * p - p));
            if sa > tol.algebraic || idem > tol.algebraic {
                return Err(Error::ShapeMismatch(format!(
                    "not a projection family: ‖p−p*‖ = {sa:.3e}, ‖p²−p‖ = {idem:.3e}"
                )));
            }
        }
        Ok(PolarizationFamily {
            params,
            projections,
            origin: origin.to_string(),
            tail: None,
        })
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Spectral polarization `x ↦ 1_{[λ,∞)}(A_x)` of a self-adjoint family.
    pub fn spectral(family: &OperatorFamily, lambda: f64, tol: &Tolerances) -> Result<Self> {
        let mut projections = Vec::with_capacity(family.grid().points);
        for (i, v) in family.values()?.into_iter().enumerate() {
            let a = match v {
                Evaluated::Operator(a) => a,
                Evaluated::Relation(_) => {
                    return Err(Error::RelationNode {
                        x: family.grid().node(i),
                    })
                }
            };
            projections.push(spectral_projection(&a, lambda, tol)?);
        }
        PolarizationFamily::new(
            family.grid().nodes(),
            projections,
            &format!("lambda={lambda}"),
            tol,
        )
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }
}

/// Compatibility verdict for two polarization families.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    /// Largest tail sup-norm of `p − q` over the grid.
    pub score: f64,
    pub threshold: f64,
    pub compatible: bool,
}

/// Default tail-norm threshold below which polarizations count as
/// compatible.
pub const COMPATIBILITY_THRESHOLD: f64 = 0.1;

/// Scores `p − q` by its tail sup-norm at every node; compatible iff the
/// score stays at or below the threshold.
pub fn compatibility(
    p: &PolarizationFamily,
    q: &PolarizationFamily,
    threshold: f64,
) -> Result<CompatibilityReport> {
    if p.params != q.params {
        return Err(Error::ShapeMismatch(
            "polarizations live on different grids".into(),
        ));
    }
    let tail = p
        .tail()
        .or(q.tail())
        .ok_or(Error::TailInconclusive)?;
    let mut score: f64 = 0.0;
    for (a, b) in p.projections.iter().zip(&q.projections) {
        if a.shape() != b.shape() {
            return Err(Error::ShapeMismatch(
                "polarization dimensions differ".into(),
            ));
        }
        score = score.max(tail.tail_norm(&(a - b)));
    }
    Ok(CompatibilityReport {
        score,
        threshold,
        compatible: score <= threshold,
    })
}
