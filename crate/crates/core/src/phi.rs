//! The twist construction: transport-built isometries onto operator
//! graphs, the canonical graph isometry, and the map `Φ(A) = A·V(A)`
//! whose bounded transform moves only as fast as the graph projections.
//!
//! For a frame entry `g` with `g p_0 g* = p_A` (base `p_0` projecting onto
//! `H ⊕ 0`), the column isometry `u_A = g·ι` has range `Γ_A`. The
//! canonical isometry `w_A = (1+A*A)^{−1/2} ⊕ A(1+A*A)^{−1/2}` has the
//! same range, so `V_A = w_A* u_A` is unitary on `H`, and
//!
//! ```text
//!   f(A·V_A) = f(A)·V_A = p'·w_A·V_A = p'·u_A
//! ```
//!
//! — the bounded transform of the twisted operator is read off the frame,
//! which moves continuously in the graph metric.

use crate::cmatrix::{opnorm, sqrt_psd, unitarity_defect, zeros, CMatrix};
use crate::error::{Error, Result};
use crate::family::{LevelData, OperatorFamily};
use crate::modes::Evaluated;
use crate::operator::{bounded_transform, ClosedRelation, MatrixOperator};
use crate::tolerances::Tolerances;
use crate::transport::{transport_step, Frame};

/// Gate for frame/input consistency checks, one order looser than the
/// 1e-8 defect contract on accepted frames.
const FRAME_GATE: f64 = 1e-7;

/// Depth limit for local interval bisection when a transport step exceeds
/// the cap.
const BISECT_DEPTH: u32 = 20;

/// A column-isometric matrix with its declared range.
#[derive(Debug, Clone)]
pub struct Isometry {
    entries: CMatrix,
    range: ClosedRelation,
}

impl Isometry {
    /// Validates column-isometry and the declared range projection.
    pub fn new(entries: CMatrix, range: ClosedRelation, tol: &Tolerances) -> Result<Self> {
        let defect = unitarity_defect(&entries);
        if defect > 100.0 * tol.algebraic {
            return Err(Error::FrameMismatch {
                defect,
                tol: 100.0 * tol.algebraic,
            });
        }
        let range_defect = opnorm(&(&entries * entries.adjoint() - range.projection()));
        if range_defect > FRAME_GATE {
            return Err(Error::FrameMismatch {
                defect: range_defect,
                tol: FRAME_GATE,
            });
        }
        Ok(Isometry { entries, range })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn range(&self) -> &ClosedRelation {
        &self.range
    }
}

/// `ι: H → H ⊕ H'`, inclusion of the first summand.
fn inclusion(n: usize, m: usize) -> CMatrix {
    let mut incl = zeros(n + m, n);
    for i in 0..n {
        incl[(i, i)] = nalgebra::Complex::new(1.0, 0.0);
    }
    incl
}

/// Base projection: onto `H ⊕ 0` inside `H ⊕ H'`.
pub fn base_projection(n: usize, m: usize) -> CMatrix {
    ClosedRelation::horizontal(n, m).projection().clone()
}

/// `p': H ⊕ H' → H'`, projection onto the second summand.
fn second_factor(n: usize, m: usize) -> CMatrix {
    let mut p = zeros(m, n + m);
    for i in 0..m {
        p[(i, n + i)] = nalgebra::Complex::new(1.0, 0.0);
    }
    p
}

/// Transport-built isometry onto the graph (or relation) of the input:
/// `u = g·ι`, where the frame entry must conjugate the base projection to
/// the input's projection.
pub fn isometry_u(value: &Evaluated, g: &CMatrix, tol: &Tolerances) -> Result<Isometry> {
    let target = value.graph();
    let (n, m) = target.dims();
    let p0 = base_projection(n, m);
    let defect = opnorm(&(g * &p0 * g.adjoint() - target.projection()));
    if defect > FRAME_GATE {
        return Err(Error::FrameMismatch {
            defect,
            tol: FRAME_GATE,
        });
    }
    Isometry::new(g * inclusion(n, m), target, tol)
}

/// Canonical isometry `w_A: H → H ⊕ H'` with range `Γ_A`:
/// `w_A = (1+A*A)^{−1/2} ⊕ A(1+A*A)^{−1/2}` (blocks `q` and `a`).
pub fn w_isometry(a_op: &MatrixOperator, tol: &Tolerances) -> Result<Isometry> {
    let (m, n) = a_op.shape();
    let t = bounded_transform(a_op)?;
    let mut w = zeros(n + m, n);
    w.view_mut((0, 0), (n, n)).copy_from(&t.q);
    w.view_mut((n, 0), (m, n)).copy_from(&t.a);
    Isometry::new(w, a_op.graph(), tol)
}

/// The coisometry `w_A* = (√(1−a*a), a*)`.
pub fn coisometry_wstar(a_op: &MatrixOperator, tol: &Tolerances) -> Result<CMatrix> {
    Ok(w_isometry(a_op, tol)?.entries().adjoint())
}

/// The twist unitary `V_A = w_A*·u_A` on `H`.
pub fn twist_unitary(a_op: &MatrixOperator, g: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let u = isometry_u(&Evaluated::Operator(a_op.clone()), g, tol)?;
    let w = w_isometry(a_op, tol)?;
    Ok(w.entries().adjoint() * u.entries())
}

/// Output of the twist at a single operator.
#[derive(Debug, Clone)]
pub struct PhiResult {
    /// `Φ_A = A·V_A`.
    pub phi: MatrixOperator,
    /// The twist unitary `V_A`.
    pub twist: CMatrix,
    /// `‖f(Φ_A) − p'·u_A‖`, the central identity residual.
    pub identity_defect: f64,
}

/// Applies the twist to one operator with the given frame entry.
pub fn phi(a_op: &MatrixOperator, g: &CMatrix, tol: &Tolerances) -> Result<PhiResult> {
    let u = isometry_u(&Evaluated::Operator(a_op.clone()), g, tol)?;
    let w = w_isometry(a_op, tol)?;
    let twist = w.entries().adjoint() * u.entries();
    let phi_op = MatrixOperator::new(a_op.entries() * &twist)?;
    let (m, n) = a_op.shape();
    let f_phi = bounded_transform(&phi_op)?.a;
    let contraction = second_factor(n, m) * u.entries();
    let identity_defect = opnorm(&(f_phi - contraction));
    Ok(PhiResult {
        phi: phi_op,
        twist,
        identity_defect,
    })
}

/// Frame entry for a single operator: chained transports along the linear
/// path `s ↦ s·A` from the base projection, bisecting where a step would
/// exceed the cap.
pub fn operator_frame(a_op: &MatrixOperator, tol: &Tolerances) -> Result<CMatrix> {
    let (m, n) = a_op.shape();
    let p0 = base_projection(n, m);
    let scale =
        |s: f64| -> Result<CMatrix> { Ok(MatrixOperator::new(a_op.entries() * nalgebra::Complex::new(s, 0.0))?.graph().projection().clone()) };
    chain_adaptive(&p0, 0.0, 1.0, &scale, tol)
}

/// Accumulated transport from the projection at `s0` to the one at `s1`,
/// bisecting locally down to `2^-BISECT_DEPTH` of the interval.
fn chain_adaptive(
    start: &CMatrix,
    s0: f64,
    s1: f64,
    proj_at: &impl Fn(f64) -> Result<CMatrix>,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let min_span = (s1 - s0) / f64::from(1u32 << BISECT_DEPTH);
    let mut g = crate::cmatrix::identity(start.nrows());
    let mut cur_s = s0;
    let mut cur_p = start.clone();
    let mut pending = vec![s1];
    while let Some(&next_s) = pending.last() {
        let next_p = proj_at(next_s)?;
        let dist = opnorm(&(&cur_p - &next_p));
        if dist <= tol.transport_cap {
            let step = transport_step(&cur_p, &next_p, tol, 0)?;
            g = step * g;
            cur_s = next_s;
            cur_p = next_p;
            pending.pop();
        } else {
            if next_s - cur_s <= min_span {
                return Err(Error::RefinementExhausted {
                    depth: BISECT_DEPTH as usize,
                });
            }
            pending.push(0.5 * (cur_s + next_s));
        }
    }
    Ok(g)
}

/// Chained frame over a family's grid, bisecting intervals locally when a
/// graph step exceeds the cap (refinable sources only).
pub fn family_frame(family: &OperatorFamily, tol: &Tolerances) -> Result<Frame> {
    let nodes = family.grid().nodes();
    let values = family.values()?;
    let first = values
        .first()
        .and_then(Evaluated::as_operator)
        .ok_or(Error::RelationNode { x: nodes[0] })?;
    let (m, n) = first.shape();
    let p0 = base_projection(n, m);

    let proj_at = |x: f64| -> Result<CMatrix> {
        Ok(family.value_at_param(x)?.graph().projection().clone())
    };

    let mut unitaries = Vec::with_capacity(nodes.len());
    let mut g = operator_frame(first, tol)?;
    let mut cur_p = values[0].graph().projection().clone();
    unitaries.push(g.clone());
    for i in 1..nodes.len() {
        let next_p = values[i].graph().projection().clone();
        let dist = opnorm(&(&cur_p - &next_p));
        let step = if dist <= tol.transport_cap {
            transport_step(&cur_p, &next_p, tol, i)?
        } else if family.is_refinable() {
            chain_adaptive(&cur_p, nodes[i - 1], nodes[i], &proj_at, tol)?
        } else {
            return Err(Error::RefinePath {
                index: i,
                step: dist,
                cap: tol.transport_cap,
            });
        };
        g = step * g;
        cur_p = next_p;
        unitaries.push(g.clone());
    }
    Ok(Frame::new(p0, nodes, unitaries))
}

/// Paired analysis of a family and its twist on one grid.
#[derive(Debug)]
pub struct PhiFamilyReport {
    /// Moduli and rows of the input family.
    pub raw: LevelData,
    /// Moduli and rows of the twisted family `Φ(F)`.
    pub twisted: LevelData,
    /// Largest `‖f(Φ_A) − p'·u_A‖` over the grid.
    pub identity_defect: f64,
    /// The frame used (built from the family itself, so `Φ` is
    /// family-dependent).
    pub frame: Frame,
    /// The twisted family as an explicit family on the same grid.
    pub family: OperatorFamily,
}

/// Twists a whole family: builds the chained frame from the family's own
/// graph projections and applies `Φ` node by node.
pub fn phi_family(family: &OperatorFamily, tol: &Tolerances) -> Result<PhiFamilyReport> {
    let nodes = family.grid().nodes();
    let values = family.values()?;
    for (i, v) in values.iter().enumerate() {
        if !v.is_graph() {
            return Err(Error::RelationNode { x: nodes[i] });
        }
    }
    let frame = family_frame(family, tol)?;
    let mut twisted = Vec::with_capacity(values.len());
    let mut identity_defect: f64 = 0.0;
    for (i, v) in values.iter().enumerate() {
        let a_op = v.as_operator().expect("checked above");
        let result = phi(a_op, frame.unitary(i), tol)?;
        identity_defect = identity_defect.max(result.identity_defect);
        twisted.push(result.phi);
    }
    let provenance = format!("phi({})", family.provenance());
    let twisted_family = OperatorFamily::from_operators(twisted, *family.grid(), &provenance)?;
    Ok(PhiFamilyReport {
        raw: family.level(tol)?,
        twisted: twisted_family.level(tol)?,
        identity_defect,
        frame,
        family: twisted_family,
    })
}

/// One refinement level of the paired scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhiScanLevel {
    pub depth: usize,
    pub points: usize,
    pub step: f64,
    pub raw_graph_modulus: f64,
    pub raw_riesz_modulus: Option<f64>,
    pub twisted_riesz_modulus: Option<f64>,
    pub identity_defect: f64,
}

/// Runs the twist across grid doublings, reporting both families' moduli
/// per level.
pub fn phi_family_scan(
    family: &OperatorFamily,
    levels: usize,
    tol: &Tolerances,
) -> Result<Vec<PhiScanLevel>> {
    let mut out = Vec::with_capacity(levels + 1);
    let mut grid = *family.grid();
    for depth in 0..=levels {
        let fam_k = if depth == 0 {
            family.with_grid(grid)?
        } else {
            grid = grid.refined();
            family.with_grid(grid)?
        };
        let report = phi_family(&fam_k, tol)?;
        out.push(PhiScanLevel {
            depth,
            points: grid.points,
            step: grid.step(),
            raw_graph_modulus: report.raw.graph_modulus,
            raw_riesz_modulus: report.raw.riesz_modulus,
            twisted_riesz_modulus: report.twisted.riesz_modulus,
            identity_defect: report.identity_defect,
        });
    }
    Ok(out)
}

/// Polar decomposition of an invertible operator: `A = |A|·u` with `|A|`
/// positive and `u` unitary, computed from the singular value
/// decomposition. Returns `(|A|, u)` so that `A·u* = |A|`.
pub fn polar_twist(a_op: &MatrixOperator, tol: &Tolerances) -> Result<(MatrixOperator, CMatrix)> {
    let (m, n) = a_op.shape();
    if m != n {
        return Err(Error::ShapeMismatch(
            "polar decomposition needs a square operator".into(),
        ));
    }
    let sv = crate::cmatrix::singular_values(a_op.entries());
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin < tol.algebraic {
        return Err(Error::NearSingular {
            value: smin,
            tol: tol.algebraic,
        });
    }
    // |A| = √(A A*) so that A = |A|·u with u = |A|^{-1} A unitary
    let abs = sqrt_psd(&(a_op.entries() * a_op.entries().adjoint()))?;
    let (u, _, v) = crate::jacobi::svd_jacobi(a_op.entries());
    let unitary = u * v.adjoint();
    Ok((MatrixOperator::new(abs)?, unitary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::{diag_real, identity};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn w_isometry_closed_forms() {
        let zero = MatrixOperator::zero(1, 1);
        let w = w_isometry(&zero, &tol()).unwrap();
        assert!(opnorm(&(w.entries() - inclusion(1, 1))) < 1e-14);

        let one = MatrixOperator::scalar(1.0);
        let w = w_isometry(&one, &tol()).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        let expect = CMatrix::from_row_slice(
            2,
            1,
            &[nalgebra::Complex::new(s, 0.0), nalgebra::Complex::new(s, 0.0)],
        );
        assert!(opnorm(&(w.entries() - expect)) < 1e-13);

        // w* w = I and w w* = p_A
        let a = MatrixOperator::diag(&[3.0, -0.5]);
        let w = w_isometry(&a, &tol()).unwrap();
        assert!(unitarity_defect(w.entries()) < 1e-12);
        assert!(opnorm(&(w.entries() * w.entries().adjoint() - a.graph().projection())) < 1e-12);
    }

    #[test]
    fn coisometry_matches_transform_blocks() {
        let a = MatrixOperator::diag(&[2.0, -1.0]);
        let wstar = coisometry_wstar(&a, &tol()).unwrap();
        let t = bounded_transform(&a).unwrap();
        // (√(1−a*a), a*) row blocks
        assert!(opnorm(&(wstar.view((0, 0), (2, 2)).into_owned() - t.q)) < 1e-12);
        assert!(opnorm(&(wstar.view((0, 2), (2, 2)).into_owned() - t.a.adjoint())) < 1e-12);
    }

    #[test]
    fn identity_frame_gives_identity_twist_at_zero() {
        let zero = MatrixOperator::zero(1, 1);
        let g = identity(2);
        let u = isometry_u(&Evaluated::Operator(zero.clone()), &g, &tol()).unwrap();
        assert!(opnorm(&(u.entries() - inclusion(1, 1))) < 1e-14);
        let v = twist_unitary(&zero, &g, &tol()).unwrap();
        assert!(opnorm(&(v - identity(1))) < 1e-14);
        let result = phi(&zero, &g, &tol()).unwrap();
        assert!(result.phi.norm() < 1e-14);
        assert!(result.identity_defect < 1e-14);
    }

    #[test]
    fn vertical_relation_admits_an_isometry() {
        let vert = ClosedRelation::vertical(1, 1);
        // rotate the base line by π/2
        let g = CMatrix::from_row_slice(
            2,
            2,
            &[
                nalgebra::Complex::new(0.0, 0.0),
                nalgebra::Complex::new(-1.0, 0.0),
                nalgebra::Complex::new(1.0, 0.0),
                nalgebra::Complex::new(0.0, 0.0),
            ],
        );
        let u = isometry_u(&Evaluated::Relation(vert), &g, &tol()).unwrap();
        // u spans 0 ⊕ H'
        assert!((u.entries()[(0, 0)].norm()) < 1e-14);
        assert!((u.entries()[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let a = MatrixOperator::scalar(3.0);
        match isometry_u(&Evaluated::Operator(a), &identity(2), &tol()) {
            Err(Error::FrameMismatch { .. }) => {}
            other => panic!("expected FrameMismatch, got {other:?}"),
        }
    }

    #[test]
    fn single_operator_twist_satisfies_the_identity() {
        let a = MatrixOperator::scalar(1.0);
        let g = operator_frame(&a, &tol()).unwrap();
        let v = twist_unitary(&a, &g, &tol()).unwrap();
        assert!((v[(0, 0)].norm() - 1.0).abs() < 1e-12, "twist is a unit phase");
        let result = phi(&a, &g, &tol()).unwrap();
        assert!(result.identity_defect < 1e-10);
    }

    #[test]
    fn operator_frame_handles_large_norms() {
        // ‖f(A)‖ ≈ 0.995 > cap, forcing the path to bisect
        let a = MatrixOperator::diag(&[10.0, -3.0]);
        let g = operator_frame(&a, &tol()).unwrap();
        let p0 = base_projection(2, 2);
        let defect = opnorm(&(&g * &p0 * g.adjoint() - a.graph().projection()));
        assert!(defect < 1e-10, "frame defect {defect}");
        assert!(unitarity_defect(&g) < 1e-11);
    }

    #[test]
    fn phi_preserves_kernel_dimensions() {
        let a = MatrixOperator::diag(&[2.0, 0.0, -1.0]);
        let g = operator_frame(&a, &tol()).unwrap();
        let result = phi(&a, &g, &tol()).unwrap();
        let t = tol();
        let before = crate::operator::kernel_cokernel_dims(&a, &t).unwrap();
        let after = crate::operator::kernel_cokernel_dims(&result.phi, &t).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn polar_twist_closed_forms() {
        let t = tol();
        let (abs, u) = polar_twist(&MatrixOperator::diag(&[1.0, 1.0]), &t).unwrap();
        assert!(opnorm(&(abs.entries() - identity(2))) < 1e-13);
        assert!(opnorm(&(u - identity(2))) < 1e-13);

        let (abs, u) = polar_twist(&MatrixOperator::scalar(-2.0), &t).unwrap();
        assert!((abs.entries()[(0, 0)].re - 2.0).abs() < 1e-13);
        assert!((u[(0, 0)].re + 1.0).abs() < 1e-13);

        assert!(matches!(
            polar_twist(&MatrixOperator::diag(&[1.0, 0.0]), &t),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn polar_twist_reconstructs() {
        let entries = diag_real(&[2.0, 0.5])
            + CMatrix::from_row_slice(
                2,
                2,
                &[
                    nalgebra::Complex::new(0.0, 0.3),
                    nalgebra::Complex::new(0.4, 0.0),
                    nalgebra::Complex::new(-0.1, 0.2),
                    nalgebra::Complex::new(0.0, 0.0),
                ],
            );
        let a = MatrixOperator::new(entries).unwrap();
        let (abs, u) = polar_twist(&a, &tol()).unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(abs.selfadjoint_defect() < 1e-12);
        let residual = opnorm(&(a.entries() * u.adjoint() - abs.entries()));
        assert!(residual <= 1e-9 * a.norm().max(1.0));
    }
}
