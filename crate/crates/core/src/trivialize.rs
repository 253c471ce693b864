//! Constructive trivializations: conjugating unitaries that carry a
//! polarization family back to its base point, and the self-adjoint
//! pipeline that conjugates a graph-continuous family into Riesz-tame
//! shape.
//!
//! Self-adjoint families may only be modified by conjugation `u A u*`
//! (one-sided multiplication would destroy self-adjointness), which is
//! the source of all the extra structure here: chart covers, the
//! essential-sign case split, and compatibility checks on overlaps.

use serde::Serialize;

use crate::cmatrix::{self, identity, opnorm, CMatrix};
use crate::error::{Error, Result};
use crate::family::{LevelData, OperatorFamily};
use crate::modes::Evaluated;
use crate::operator::MatrixOperator;
use crate::spectral::{essential_sign, EssentialSign, PolarizationFamily, SpectralChart};
use crate::tolerances::Tolerances;
use crate::transport::{transport_step, Frame};

/// Default tail index for the essential-sign bypass: the upper half of
/// the modes counts as tail.
fn default_tail_index(n: usize) -> usize {
    n / 2
}

/// Chained conjugation trivializer along a path of projections:
/// unitaries `u(x)` with `u(x) p(x) u(x)* = p(x₀)` and `u(x₀) = I`.
pub fn conjugation_trivializer(pol: &PolarizationFamily, tol: &Tolerances) -> Result<Frame> {
    let projections = pol.projections();
    let base = projections[0].clone();
    let mut unitaries = Vec::with_capacity(projections.len());
    let mut u = identity(base.nrows());
    unitaries.push(u.clone());
    for i in 1..projections.len() {
        let step = transport_step(&projections[i], &projections[i - 1], tol, i)?;
        u = &u * step;
        unitaries.push(u.clone());
    }
    Ok(Frame::new(base, pol.params().to_vec(), unitaries))
}

/// Snake traversal of a `rows × cols` grid, starting at `(0, 0)`.
pub fn snake_path(rows: usize, cols: usize, column_major: bool) -> Vec<(usize, usize)> {
    let mut path = Vec::with_capacity(rows * cols);
    if column_major {
        for c in 0..cols {
            if c % 2 == 0 {
                path.extend((0..rows).map(|r| (r, c)));
            } else {
                path.extend((0..rows).rev().map(|r| (r, c)));
            }
        }
    } else {
        for r in 0..rows {
            if r % 2 == 0 {
                path.extend((0..cols).map(|c| (r, c)));
            } else {
                path.extend((0..cols).rev().map(|c| (r, c)));
            }
        }
    }
    path
}

/// Trivializer over a small 2-D product grid, traversed in snake order.
/// Returns the frame along the path and the path itself.
pub fn conjugation_trivializer_snake(
    projections: &[Vec<CMatrix>],
    column_major: bool,
    tol: &Tolerances,
) -> Result<(Frame, Vec<(usize, usize)>)> {
    let rows = projections.len();
    let cols = projections.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || projections.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch("ragged 2-D projection grid".into()));
    }
    let path = snake_path(rows, cols, column_major);
    let ordered: Vec<CMatrix> = path
        .iter()
        .map(|&(r, c)| projections[r][c].clone())
        .collect();
    let params: Vec<f64> = (0..ordered.len()).map(|i| i as f64).collect();
    let pol = PolarizationFamily::new(params, ordered, "snake-grid", tol)?;
    Ok((conjugation_trivializer(&pol, tol)?, path))
}

/// `‖[w, p]‖` for `w = u₁ u₂*` — the commutation residual between two
/// trivializers of the same family. Exact trivializers differ by a
/// unitary commuting with the base projection.
pub fn commutation_residual(u1: &CMatrix, u2: &CMatrix, base: &CMatrix) -> f64 {
    let w = u1 * u2.adjoint();
    opnorm(&(&w * base - base * w))
}

/// Outcome of the self-adjoint trivialization pipeline.
#[derive(Debug)]
pub struct SaTrivialization {
    /// Moduli of the input family on its grid.
    pub raw: LevelData,
    /// Moduli of the conjugated family.
    pub conjugated: LevelData,
    /// The conjugated family (the input itself on bypass).
    pub family: OperatorFamily,
    /// Conjugators per node, `u(x₀) = I`.
    pub conjugators: Vec<CMatrix>,
    /// Charts used, empty on bypass.
    pub charts: Vec<SpectralChart>,
    /// Spectral level chosen for each consecutive step.
    pub step_levels: Vec<f64>,
    /// Largest node-wise eigenvalue drift under conjugation.
    pub spectrum_deviation: f64,
    /// Set when the essential-sign case split skipped trivialization:
    /// essentially positive/negative families are already norm continuous
    /// in every trivialization.
    pub bypass: Option<EssentialSign>,
}

/// Conjugates a graph-continuous self-adjoint family into one whose
/// bounded transforms move at the speed of its spectral projections.
///
/// Pipeline: essential-sign case split → chart cover → per-step spectral
/// projections → chained transports → conjugation and verification.
/// Chart candidates default to midpoints of the largest spectral gaps.
pub fn make_riesz_continuous_sa(
    family: &OperatorFamily,
    candidates: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<SaTrivialization> {
    let nodes = family.grid().nodes();
    let operators = selfadjoint_operators(family)?;

    // essentially positive/negative mode families skip trivialization
    if let Some(modes) = family.mode_family() {
        match essential_sign(modes, &nodes, default_tail_index(modes.len())) {
            Ok(sign @ (EssentialSign::EssentiallyPositive | EssentialSign::EssentiallyNegative)) => {
                let raw = family.level(tol)?;
                let dim = operators[0].dim_domain();
                return Ok(SaTrivialization {
                    conjugated: raw.clone(),
                    raw,
                    family: family.with_grid(*family.grid())?,
                    conjugators: vec![identity(dim); nodes.len()],
                    charts: Vec::new(),
                    step_levels: Vec::new(),
                    spectrum_deviation: 0.0,
                    bypass: Some(sign),
                });
            }
            Ok(EssentialSign::Neither) | Err(Error::TailInconclusive) => {}
            Err(e) => return Err(e),
        }
    }

    // one eigendecomposition per node feeds charts and projections alike
    let eigs: Vec<(Vec<f64>, CMatrix)> = operators
        .iter()
        .map(|a| cmatrix::hermitian_eigen(a.entries()))
        .collect::<Result<_>>()?;
    let spectra: Vec<&[f64]> = eigs.iter().map(|(v, _)| v.as_slice()).collect();

    let owned_candidates;
    let candidates = match candidates {
        Some(c) => c,
        None => {
            owned_candidates = crate::spectral::default_candidates(family, 8, tol)?;
            &owned_candidates
        }
    };
    let charts = charts_from_spectra(&spectra, candidates, tol)?;
    check_overlap_compatibility(family, &charts, &nodes)?;

    let projection_at = |chart: &SpectralChart, node: usize| -> CMatrix {
        let (vals, vecs) = &eigs[node];
        let dim = vals.len();
        let mut p = cmatrix::zeros(dim, dim);
        for (i, &v) in vals.iter().enumerate() {
            if v >= chart.lambda {
                let col = vecs.column(i);
                p += col * col.adjoint();
            }
        }
        cmatrix::hermitize(&p)
    };

    let mut conjugators = Vec::with_capacity(nodes.len());
    let mut step_levels = Vec::with_capacity(nodes.len().saturating_sub(1));
    let mut u = identity(operators[0].dim_domain());
    conjugators.push(u.clone());
    for i in 1..nodes.len() {
        let chart = best_common_chart(&charts, i - 1, i)
            .ok_or(Error::UncoveredNodes {
                nodes: vec![i - 1, i],
            })?;
        step_levels.push(chart.lambda);
        let p_prev = projection_at(chart, i - 1);
        let p_next = projection_at(chart, i);
        let step = transport_step(&p_next, &p_prev, tol, i)?;
        u = &u * step;
        conjugators.push(u.clone());
    }

    let mut conjugated_ops = Vec::with_capacity(operators.len());
    let mut spectrum_deviation: f64 = 0.0;
    for (i, a) in operators.iter().enumerate() {
        let b = MatrixOperator::new(&conjugators[i] * a.entries() * conjugators[i].adjoint())?;
        let before = &eigs[i].0;
        let after = cmatrix::hermitian_eigen(b.entries())?.0;
        for (x, y) in before.iter().zip(&after) {
            spectrum_deviation = spectrum_deviation.max((x - y).abs());
        }
        conjugated_ops.push(b);
    }
    let provenance = format!("conjugated({})", family.provenance());
    let conjugated_family =
        OperatorFamily::from_operators(conjugated_ops, *family.grid(), &provenance)?;

    Ok(SaTrivialization {
        raw: family.level(tol)?,
        conjugated: conjugated_family.level(tol)?,
        family: conjugated_family,
        conjugators,
        charts,
        step_levels,
        spectrum_deviation,
        bypass: None,
    })
}

/// Multi-level scan of the self-adjoint pipeline across grid doublings.
#[derive(Debug, Clone, Serialize)]
pub struct SaScanLevel {
    pub depth: usize,
    pub points: usize,
    pub step: f64,
    pub raw_riesz_modulus: Option<f64>,
    pub conjugated_riesz_modulus: Option<f64>,
    pub spectrum_deviation: f64,
}

pub fn sa_scan(
    family: &OperatorFamily,
    candidates: Option<&[f64]>,
    levels: usize,
    tol: &Tolerances,
) -> Result<Vec<SaScanLevel>> {
    let mut out = Vec::with_capacity(levels + 1);
    let mut grid = *family.grid();
    for depth in 0..=levels {
        if depth > 0 {
            grid = grid.refined();
        }
        let fam_k = family.with_grid(grid)?;
        let triv = make_riesz_continuous_sa(&fam_k, candidates, tol)?;
        out.push(SaScanLevel {
            depth,
            points: grid.points,
            step: grid.step(),
            raw_riesz_modulus: triv.raw.riesz_modulus,
            conjugated_riesz_modulus: triv.conjugated.riesz_modulus,
            spectrum_deviation: triv.spectrum_deviation,
        });
    }
    Ok(out)
}

fn selfadjoint_operators(family: &OperatorFamily) -> Result<Vec<MatrixOperator>> {
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(family.grid().points);
    for (i, v) in family.values()?.into_iter().enumerate() {
        match v {
            Evaluated::Operator(a) => {
                let defect = a.selfadjoint_defect();
                if defect > tol.algebraic * a.norm().max(1.0) {
                    return Err(Error::ShapeMismatch(format!(
                        "family is not self-adjoint at node {i}: ‖A − A*‖ = {defect:.3e}"
                    )));
                }
                out.push(a);
            }
            Evaluated::Relation(_) => {
                return Err(Error::RelationNode {
                    x: family.grid().node(i),
                })
            }
        }
    }
    Ok(out)
}

fn charts_from_spectra(
    spectra: &[&[f64]],
    candidates: &[f64],
    tol: &Tolerances,
) -> Result<Vec<SpectralChart>> {
    let mut charts = Vec::new();
    for &lambda in candidates {
        let mut chart_nodes = Vec::new();
        let mut gaps = Vec::new();
        for (i, vals) in spectra.iter().enumerate() {
            let gap = vals
                .iter()
                .map(|v| (v - lambda).abs())
                .fold(f64::INFINITY, f64::min);
            if gap >= tol.gap_min {
                chart_nodes.push(i);
                gaps.push(gap);
            }
        }
        if !chart_nodes.is_empty() {
            charts.push(SpectralChart {
                lambda,
                nodes: chart_nodes,
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

fn best_common_chart<'a>(
    charts: &'a [SpectralChart],
    i: usize,
    j: usize,
) -> Option<&'a SpectralChart> {
    charts
        .iter()
        .filter_map(|c| match (c.gap_at(i), c.gap_at(j)) {
            (Some(a), Some(b)) => Some((c, a.min(b))),
            _ => None,
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(c, _)| c)
}

/// On chart overlaps of a mode-backed family, tail modes falling between
/// the two levels make the spectral polarizations incompatible (their
/// difference has unit tail norm).
fn check_overlap_compatibility(
    family: &OperatorFamily,
    charts: &[SpectralChart],
    nodes: &[f64],
) -> Result<()> {
    let modes = match family.mode_family() {
        Some(m) => m,
        None => return Ok(()),
    };
    let tail_index = default_tail_index(modes.len());
    let threshold = crate::spectral::COMPATIBILITY_THRESHOLD;
    for (a, ca) in charts.iter().enumerate() {
        for cb in charts.iter().skip(a + 1) {
            let (lo, hi) = if ca.lambda <= cb.lambda {
                (ca.lambda, cb.lambda)
            } else {
                (cb.lambda, ca.lambda)
            };
            for &node in ca.nodes.iter().filter(|n| cb.covers(**n)) {
                let in_between = modes
                    .tail_signs(nodes[node], tail_index)
                    .into_iter()
                    .flatten()
                    .any(|v| v >= lo && v < hi);
                if in_between {
                    return Err(Error::Incompatible {
                        score: 1.0,
                        threshold,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Semibounded comparison: along a family with node-wise spectra bounded
/// below by `c`, Riesz steps are controlled by graph steps times the
/// scanned constant `k`.
#[derive(Debug, Clone, Serialize)]
pub struct SemiboundedReport {
    pub bound: f64,
    pub k: f64,
    pub max_graph_step: f64,
    pub max_riesz_step: f64,
    /// Largest violation `d_R − k·d_G` over the steps (≤ slack when ok).
    pub max_excess: f64,
    pub ok: bool,
}

/// Numerical slack for the semibounded step comparison.
const SEMIBOUNDED_SLACK: f64 = 1e-12;

pub fn semibounded_check(
    family: &OperatorFamily,
    c: f64,
    k: f64,
    tol: &Tolerances,
) -> Result<SemiboundedReport> {
    let nodes = family.grid().nodes();
    // verify the spectral bound node-wise
    if let Some(modes) = family.mode_family() {
        for (i, &x) in nodes.iter().enumerate() {
            for v in modes.scalars_at(x) {
                let v = v.ok_or(Error::RelationNode { x })?;
                if v < c {
                    return Err(Error::SpectralBoundViolated {
                        index: i,
                        value: v,
                        bound: c,
                    });
                }
            }
        }
    } else {
        for (i, a) in selfadjoint_operators(family)?.iter().enumerate() {
            let vals = cmatrix::hermitian_eigen(a.entries())?.0;
            if let Some(&min) = vals.first() {
                if min < c {
                    return Err(Error::SpectralBoundViolated {
                        index: i,
                        value: min,
                        bound: c,
                    });
                }
            }
        }
    }

    let level = family.level(tol)?;
    let mut max_graph: f64 = 0.0;
    let mut max_riesz: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    for row in &level.rows {
        if let (Some(dg), Some(dr)) = (row.d_graph_step, row.d_riesz_step) {
            max_graph = max_graph.max(dg);
            max_riesz = max_riesz.max(dr);
            max_excess = max_excess.max(dr - k * dg);
        }
    }
    if max_excess == f64::NEG_INFINITY {
        max_excess = 0.0;
    }
    Ok(SemiboundedReport {
        bound: c,
        k,
        max_graph_step: max_graph,
        max_riesz_step: max_riesz,
        max_excess,
        ok: max_excess <= SEMIBOUNDED_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::from_real;
    use crate::grid::ParamGrid;
    use crate::modes::{semibounded_ratio_scan, ModeFamily, ModeGenerator};
    use nalgebra::DMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn line_projection(theta: f64) -> CMatrix {
        let (c, s) = (theta.cos(), theta.sin());
        from_real(&DMatrix::from_row_slice(
            2,
            2,
            &[c * c, c * s, c * s, s * s],
        ))
    }

    #[test]
    fn constant_polarization_gives_identity_frame() {
        let t = tol();
        let p = line_projection(0.7);
        let pol =
            PolarizationFamily::new(vec![0.0, 1.0, 2.0], vec![p.clone(), p.clone(), p], "const", &t)
                .unwrap();
        let frame = conjugation_trivializer(&pol, &t).unwrap();
        for g in frame.unitaries() {
            assert!(opnorm(&(g - identity(2))) < 1e-12);
        }
    }

    #[test]
    fn rotating_line_trivializes() {
        let t = tol();
        let n = 64;
        let params: Vec<f64> = (0..=n)
            .map(|i| std::f64::consts::PI * i as f64 / n as f64)
            .collect();
        let projections: Vec<CMatrix> = params.iter().map(|&x| line_projection(x)).collect();
        let pol = PolarizationFamily::new(params, projections.clone(), "rotating", &t).unwrap();
        let frame = conjugation_trivializer(&pol, &t).unwrap();
        // u(x₀) = I exactly
        assert_eq!(opnorm(&(frame.unitary(0) - identity(2))), 0.0);
        // defect ‖u p u* − p₀‖ at every node
        let mut worst: f64 = 0.0;
        for (i, p) in projections.iter().enumerate() {
            let u = frame.unitary(i);
            worst = worst.max(opnorm(&(u * p * u.adjoint() - frame.base())));
        }
        assert!(worst < 1e-8, "trivializer defect {worst}");
        assert!(frame.unitarity_defect() < 1e-10);
    }

    #[test]
    fn snake_paths_cover_the_grid() {
        let p = snake_path(3, 4, false);
        assert_eq!(p.len(), 12);
        assert_eq!(p[0], (0, 0));
        assert_eq!(p[3], (0, 3));
        assert_eq!(p[4], (1, 3));
        let q = snake_path(3, 4, true);
        assert_eq!(q[0], (0, 0));
        assert_eq!(q[2], (2, 0));
        assert_eq!(q[3], (2, 1));
    }

    #[test]
    fn snake_trivializers_agree_up_to_base_commutant() {
        let t = tol();
        let rows = 6;
        let cols = 6;
        let grid: Vec<Vec<CMatrix>> = (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| line_projection(0.07 * r as f64 + 0.09 * c as f64))
                    .collect()
            })
            .collect();
        let (f_row, path_row) = conjugation_trivializer_snake(&grid, false, &t).unwrap();
        let (f_col, path_col) = conjugation_trivializer_snake(&grid, true, &t).unwrap();
        let base = grid[0][0].clone();
        for (r, c) in [(0usize, 0usize), (2, 3), (5, 5), (3, 0)] {
            let i_row = path_row.iter().position(|&rc| rc == (r, c)).unwrap();
            let i_col = path_col.iter().position(|&rc| rc == (r, c)).unwrap();
            let res = commutation_residual(f_row.unitary(i_row), f_col.unitary(i_col), &base);
            assert!(res < 1e-8, "commutation residual {res} at ({r},{c})");
        }
    }

    #[test]
    fn essentially_positive_family_bypasses() {
        let t = tol();
        let grid = ParamGrid::new(0.0, 1.0, 9).unwrap();
        let modes = ModeFamily::new(
            (1..=8)
                .map(|k| ModeGenerator::Linear {
                    slope: 1.0,
                    intercept: k as f64,
                })
                .collect(),
        )
        .unwrap();
        let fam = OperatorFamily::from_modes(modes, grid, "semibounded_drift");
        let triv = make_riesz_continuous_sa(&fam, None, &t).unwrap();
        assert_eq!(triv.bypass, Some(EssentialSign::EssentiallyPositive));
        assert!(triv.charts.is_empty());
        for u in &triv.conjugators {
            assert_eq!(opnorm(&(u - identity(8))), 0.0);
        }
    }

    #[test]
    fn rotating_spectrum_pipeline_preserves_spectra() {
        let t = tol();
        let grid = ParamGrid::new(0.0, std::f64::consts::PI, 65).unwrap();
        let fam = rotating_two_level(grid);
        let triv = make_riesz_continuous_sa(&fam, Some(&[0.0]), &t).unwrap();
        assert!(triv.bypass.is_none());
        assert!(triv.spectrum_deviation < 1e-9);
        // conjugated family is flat: A(x) = ±1 on rotating lines becomes
        // constant after trivialization
        assert!(triv.conjugated.riesz_modulus.unwrap() < 1e-8);
        assert!(triv.raw.riesz_modulus.unwrap() > triv.conjugated.riesz_modulus.unwrap());
    }

    fn rotating_two_level(grid: ParamGrid) -> OperatorFamily {
        OperatorFamily::from_map(
            move |x| {
                let p = line_projection(x);
                let sym = &p * nalgebra::Complex::new(2.0, 0.0) - identity(2);
                Ok(Evaluated::Operator(MatrixOperator::new(sym)?))
            },
            grid,
            "rotating ±1",
        )
    }

    #[test]
    fn semibounded_comparison_holds_with_scanned_constant() {
        let t = tol();
        let k = semibounded_ratio_scan(0.0, 1e4, 400);
        assert!((k - 1.0).abs() < 1e-9, "scanned constant {k}");
        let grid = ParamGrid::new(0.0, 1.0, 33).unwrap();
        let modes = ModeFamily::new(
            (1..=10)
                .map(|j| ModeGenerator::Linear {
                    slope: 1.0,
                    intercept: j as f64,
                })
                .collect(),
        )
        .unwrap();
        let fam = OperatorFamily::from_modes(modes, grid, "drift");
        let report = semibounded_check(&fam, 0.0, k, &t).unwrap();
        assert!(report.ok, "excess {}", report.max_excess);

        // constant family: 0 ≤ 0
        let constant = OperatorFamily::from_modes(
            ModeFamily::new(vec![ModeGenerator::constant(2.0)]).unwrap(),
            grid,
            "const",
        );
        let report = semibounded_check(&constant, 0.0, k, &t).unwrap();
        assert_eq!(report.max_riesz_step, 0.0);
        assert!(report.ok);
    }

    #[test]
    fn semibounded_check_rejects_bound_violations() {
        let t = tol();
        let grid = ParamGrid::new(0.0, 1.0, 5).unwrap();
        let modes = ModeFamily::new(vec![ModeGenerator::constant(-1.0)]).unwrap();
        let fam = OperatorFamily::from_modes(modes, grid, "negative");
        match semibounded_check(&fam, 0.0, 1.0, &t) {
            Err(Error::SpectralBoundViolated { value, .. }) => assert_eq!(value, -1.0),
            other => panic!("expected SpectralBoundViolated, got {other:?}"),
        }
    }
}
