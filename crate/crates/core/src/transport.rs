//! Transport of projections along paths and sections of the projection
//! bundle realized as chained local transports.
//!
//! The single-step formula is the standard local cross-section
//! `u = (q p + (1−q)(1−p)) · (1 − (p−q)²)^{−1/2}`: a closed form, smooth
//! in `(p, q)`, equal to the identity at `p = q`, and unitary whenever
//! `‖p − q‖ < 1`. Steps are capped strictly below 1 by
//! `Tolerances::transport_cap`.

use serde::{Deserialize, Serialize};

use crate::cmatrix::{hermitize, identity, inv_sqrt_pd, opnorm, CMatrix, MatrixJson};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Unitary `u` with `u p u* = q`, defined when `‖p − q‖` is below the
/// transport cap.
pub fn projection_transport(p: &CMatrix, q: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    transport_step(p, q, tol, 0)
}

pub(crate) fn transport_step(
    p: &CMatrix,
    q: &CMatrix,
    tol: &Tolerances,
    index: usize,
) -> Result<CMatrix> {
    let dist = opnorm(&(p - q));
    if dist > tol.transport_cap {
        return Err(Error::RefinePath {
            index,
            step: dist,
            cap: tol.transport_cap,
        });
    }
    let n = p.nrows();
    let one = identity(n);
    let t = q * p + (&one - q) * (&one - p);
    let diff = p - q;
    let correction = inv_sqrt_pd(&hermitize(&(&one - &diff * &diff)), 0.01)?;
    Ok(t * correction)
}

/// A grid-indexed assignment of unitaries trivializing a projection
/// family: `g_i p_0 g_i* = P_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frame {
    schema: u32,
    base: MatrixJson,
    params: Vec<f64>,
    unitaries: Vec<MatrixJson>,
}

impl Frame {
    pub fn new(base: CMatrix, params: Vec<f64>, unitaries: Vec<CMatrix>) -> Self {
        assert_eq!(params.len(), unitaries.len());
        Frame {
            schema: 1,
            base: MatrixJson(base),
            params,
            unitaries: unitaries.into_iter().map(MatrixJson).collect(),
        }
    }

    pub fn base(&self) -> &CMatrix {
        &self.base.0
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitary(&self, i: usize) -> &CMatrix {
        &self.unitaries[i].0
    }

    pub fn unitaries(&self) -> impl Iterator<Item = &CMatrix> {
        self.unitaries.iter().map(|m| &m.0)
    }

    /// Largest conjugation defect `‖g_i p_0 g_i* − P_i‖` against the given
    /// projections.
    pub fn defect(&self, projections: &[CMatrix]) -> f64 {
        self.unitaries
            .iter()
            .zip(projections)
            .map(|(g, p)| opnorm(&(&g.0 * self.base() * g.0.adjoint() - p)))
            .fold(0.0, f64::max)
    }

    /// Largest unitarity defect over the frame.
    pub fn unitarity_defect(&self) -> f64 {
        self.unitaries
            .iter()
            .map(|g| crate::cmatrix::unitarity_defect(&g.0))
            .fold(0.0, f64::max)
    }
}

/// Chains local transports from the left endpoint into a global section
/// along the path: `g_0 = transport(p_0 → P_0)` and
/// `g_{i+1} = transport(P_i → P_{i+1}) · g_i`.
///
/// Any step beyond the cap fails with the offending index; the caller
/// decides whether to refine.
pub fn section_along_family(
    params: &[f64],
    projections: &[CMatrix],
    base: &CMatrix,
    tol: &Tolerances,
) -> Result<Frame> {
    if params.len() != projections.len() || projections.is_empty() {
        return Err(Error::ShapeMismatch(
            "section needs one projection per parameter".into(),
        ));
    }
    let mut unitaries = Vec::with_capacity(projections.len());
    let mut g = transport_step(base, &projections[0], tol, 0)?;
    unitaries.push(g.clone());
    for i in 1..projections.len() {
        let step = transport_step(&projections[i - 1], &projections[i], tol, i)?;
        g = step * g;
        unitaries.push(g.clone());
    }
    Ok(Frame::new(base.clone(), params.to_vec(), unitaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::{diag_real, from_real, unitarity_defect, zeros};
    use nalgebra::{Complex, DMatrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Projection onto the line at angle `theta` in the real plane.
    fn line_projection(theta: f64) -> CMatrix {
        let (c, s) = (theta.cos(), theta.sin());
        from_real(&DMatrix::from_row_slice(
            2,
            2,
            &[c * c, c * s, c * s, s * s],
        ))
    }

    #[test]
    fn identity_at_equal_projections() {
        let p = line_projection(0.4);
        let u = projection_transport(&p, &p, &tol()).unwrap();
        assert!(opnorm(&(u - identity(2))) < 1e-13);
    }

    #[test]
    fn transports_rotated_lines() {
        let p = line_projection(0.0);
        let q = line_projection(0.3);
        let u = projection_transport(&p, &q, &tol()).unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(opnorm(&(&u * &p * u.adjoint() - &q)) < 1e-12);
        // u agrees with the rotation by θ up to a phase commuting with p:
        // here both are real rotations, so they coincide
        let rot = from_real(&DMatrix::from_row_slice(
            2,
            2,
            &[0.3f64.cos(), -(0.3f64.sin()), 0.3f64.sin(), 0.3f64.cos()],
        ));
        assert!(opnorm(&(&u - &rot)) < 1e-12);
    }

    #[test]
    fn rejects_rank_jumps() {
        // rank-1 vs rank-2 projections are at distance 1 ≥ cap
        let p = diag_real(&[1.0, 0.0]);
        let q = diag_real(&[1.0, 1.0]);
        match projection_transport(&p, &q, &tol()) {
            Err(Error::RefinePath { step, .. }) => assert!((step - 1.0).abs() < 1e-12),
            other => panic!("expected RefinePath, got {other:?}"),
        }
    }

    #[test]
    fn section_along_rotating_line() {
        let n = 64;
        let params: Vec<f64> = (0..=n)
            .map(|i| std::f64::consts::PI * i as f64 / n as f64)
            .collect();
        let projections: Vec<CMatrix> = params.iter().map(|&t| line_projection(t)).collect();
        let base = line_projection(0.0);
        let frame = section_along_family(&params, &projections, &base, &tol()).unwrap();
        assert!(frame.defect(&projections) < 1e-8);
        assert!(frame.unitarity_defect() < 1e-10);
        // frame continuity: consecutive unitaries move no faster than 4×
        // the projection steps
        for i in 1..frame.len() {
            let g_step = opnorm(&(frame.unitary(i) - frame.unitary(i - 1)));
            let p_step = opnorm(&(&projections[i] - &projections[i - 1]));
            assert!(g_step <= 4.0 * p_step + 1e-12);
        }
    }

    #[test]
    fn section_reports_offending_index() {
        let params = vec![0.0, 1.0, 2.0];
        let projections = vec![
            line_projection(0.0),
            line_projection(0.1),
            // distance sin(1.4) ≈ 0.985 > cap
            line_projection(1.5),
        ];
        let mut base = zeros(2, 2);
        base[(0, 0)] = Complex::new(1.0, 0.0);
        match section_along_family(&params, &projections, &base, &tol()) {
            Err(Error::RefinePath { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected RefinePath at index 2, got {other:?}"),
        }
    }
}
