//! Parametrized operator/relation families over grids and their
//! continuity analysis in the graph and Riesz metrics.
//!
//! Families are re-evaluable generators rather than frozen arrays, so the
//! analyzer can double the grid density on demand; explicit arrays are
//! wrapped as depth-0 generators that refuse refinement. Poles are handled
//! by returning relations, never by clamping values.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::modes::{Evaluated, ModeFamily};
use crate::operator::{graph_distance, riesz_distance, MatrixOperator};
use crate::tolerances::Tolerances;

/// Which metric drives the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Graph,
    Riesz,
    Both,
}

/// Continuity verdict of a refinement run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GraphContinuousEvidence,
    RieszDiscontinuityWitness,
    Inconclusive,
}

/// How a family produces values.
enum FamilySource {
    Modes(ModeFamily),
    Explicit(Vec<Evaluated>),
    Map(Arc<dyn Fn(f64) -> Result<Evaluated> + Send + Sync>),
}

impl std::fmt::Debug for FamilySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilySource::Modes(m) => write!(f, "Modes(N={})", m.len()),
            FamilySource::Explicit(v) => write!(f, "Explicit(len={})", v.len()),
            FamilySource::Map(_) => write!(f, "Map(..)"),
        }
    }
}

/// A map from a parameter grid to operators/relations, with provenance.
#[derive(Debug)]
pub struct OperatorFamily {
    grid: ParamGrid,
    source: FamilySource,
    provenance: String,
}

impl OperatorFamily {
    /// Family backed by scalar modes (block-diagonal values; distances are
    /// computed exactly as suprema of scalar closed forms).
    pub fn from_modes(modes: ModeFamily, grid: ParamGrid, provenance: &str) -> Self {
        OperatorFamily {
            grid,
            source: FamilySource::Modes(modes),
            provenance: provenance.to_string(),
        }
    }

    /// Depth-0 generator: frozen values at the grid nodes, not refinable.
    pub fn from_values(values: Vec<Evaluated>, grid: ParamGrid, provenance: &str) -> Result<Self> {
        if values.len() != grid.points {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.points
            )));
        }
        Ok(OperatorFamily {
            grid,
            source: FamilySource::Explicit(values),
            provenance: provenance.to_string(),
        })
    }

    pub fn from_operators(
        values: Vec<MatrixOperator>,
        grid: ParamGrid,
        provenance: &str,
    ) -> Result<Self> {
        Self::from_values(
            values.into_iter().map(Evaluated::Operator).collect(),
            grid,
            provenance,
        )
    }

    /// Family given by a stateless closed-form generator.
    pub fn from_map(
        f: impl Fn(f64) -> Result<Evaluated> + Send + Sync + 'static,
        grid: ParamGrid,
        provenance: &str,
    ) -> Self {
        OperatorFamily {
            grid,
            source: FamilySource::Map(Arc::new(f)),
            provenance: provenance.to_string(),
        }
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// The backing mode family, when there is one.
    pub fn mode_family(&self) -> Option<&ModeFamily> {
        match &self.source {
            FamilySource::Modes(m) => Some(m),
            _ => None,
        }
    }

    /// Whether the family can be re-evaluated on finer grids.
    pub fn is_refinable(&self) -> bool {
        !matches!(self.source, FamilySource::Explicit(_))
    }

    /// Same source on a different grid; explicit families refuse.
    pub fn with_grid(&self, grid: ParamGrid) -> Result<OperatorFamily> {
        let source = match &self.source {
            FamilySource::Modes(m) => FamilySource::Modes(m.clone()),
            FamilySource::Map(f) => FamilySource::Map(Arc::clone(f)),
            FamilySource::Explicit(_) => {
                return Err(Error::InvalidGrid(
                    "explicit family cannot be re-evaluated on a new grid".into(),
                ))
            }
        };
        Ok(OperatorFamily {
            grid,
            source,
            provenance: self.provenance.clone(),
        })
    }

    /// Value at grid node `i`.
    pub fn value_at_node(&self, i: usize) -> Result<Evaluated> {
        let x = self.grid.node(i);
        match &self.source {
            FamilySource::Modes(m) => Ok(m.value_at(x)),
            FamilySource::Explicit(v) => Ok(v[i].clone()),
            FamilySource::Map(f) => f(x),
        }
    }

    /// Value at an arbitrary parameter (generator sources only).
    pub fn value_at_param(&self, x: f64) -> Result<Evaluated> {
        match &self.source {
            FamilySource::Modes(m) => Ok(m.value_at(x)),
            FamilySource::Map(f) => f(x),
            FamilySource::Explicit(v) => {
                let (i, dist) = self.grid.locate(x);
                if dist <= 1e-12 * self.grid.step().abs().max(1.0) {
                    Ok(v[i].clone())
                } else {
                    Err(Error::InvalidGrid(format!(
                        "parameter {x} is off-grid for an explicit family"
                    )))
                }
            }
        }
    }

    /// Value at a parameter that must lie on the grid.
    pub fn evaluate(&self, x: f64) -> Result<Evaluated> {
        let (i, dist) = self.grid.locate(x);
        if dist > 1e-9 * self.grid.step().abs().max(1.0) {
            return Err(Error::InvalidGrid(format!("parameter {x} is not a grid node")));
        }
        self.value_at_node(i)
    }

    /// All values on the grid.
    pub fn values(&self) -> Result<Vec<Evaluated>> {
        (0..self.grid.points).map(|i| self.value_at_node(i)).collect()
    }

    /// Largest self-adjointness defect over operator nodes.
    pub fn selfadjoint_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for v in self.values()? {
            if let Evaluated::Operator(a) = v {
                worst = worst.max(a.selfadjoint_defect());
            }
        }
        Ok(worst)
    }

    /// Per-step distances and node diagnostics at the family's own grid.
    pub fn level(&self, tol: &Tolerances) -> Result<LevelData> {
        let nodes = self.grid.nodes();
        match &self.source {
            FamilySource::Modes(m) => {
                let mut rows = Vec::with_capacity(nodes.len());
                let mut graph_modulus: f64 = 0.0;
                let mut riesz_modulus: Option<f64> = Some(0.0);
                for (i, &x) in nodes.iter().enumerate() {
                    let scalars = m.scalars_at(x);
                    let is_graph = scalars.iter().all(Option::is_some);
                    let ker_dim = is_graph.then(|| {
                        scalars
                            .iter()
                            .flatten()
                            .filter(|&&v| v.abs() <= tol.algebraic)
                            .count()
                    });
                    let (dg, dr) = if i + 1 < nodes.len() {
                        let dg = m.graph_distance(x, nodes[i + 1]);
                        let dr = m.riesz_distance(x, nodes[i + 1]).ok();
                        (Some(dg), dr)
                    } else {
                        (None, None)
                    };
                    if let Some(d) = dg {
                        graph_modulus = graph_modulus.max(d);
                    }
                    if i + 1 < nodes.len() {
                        riesz_modulus = match (riesz_modulus, dr) {
                            (Some(acc), Some(d)) => Some(acc.max(d)),
                            _ => None,
                        };
                    }
                    rows.push(NodeRow {
                        x,
                        d_graph_step: dg,
                        d_riesz_step: dr,
                        is_graph,
                        ker_dim,
                    });
                }
                Ok(LevelData {
                    rows,
                    graph_modulus,
                    riesz_modulus,
                    step: self.grid.step(),
                    points: self.grid.points,
                })
            }
            _ => {
                let values = self.values()?;
                level_from_values(&nodes, &values, tol, self.grid.step())
            }
        }
    }
}

/// Per-node diagnostics; step columns refer to the interval starting at
/// this node (absent on the last row).
#[derive(Debug, Clone, Serialize)]
pub struct NodeRow {
    pub x: f64,
    pub d_graph_step: Option<f64>,
    pub d_riesz_step: Option<f64>,
    pub is_graph: bool,
    pub ker_dim: Option<usize>,
}

/// One level of analysis: rows plus the two moduli.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub rows: Vec<NodeRow>,
    pub graph_modulus: f64,
    pub riesz_modulus: Option<f64>,
    pub step: f64,
    pub points: usize,
}

fn level_from_values(
    nodes: &[f64],
    values: &[Evaluated],
    tol: &Tolerances,
    step: f64,
) -> Result<LevelData> {
    let mut rows = Vec::with_capacity(nodes.len());
    let mut graph_modulus: f64 = 0.0;
    let mut riesz_modulus: Option<f64> = Some(0.0);
    let graphs: Vec<_> = values.iter().map(Evaluated::graph).collect();
    for (i, &x) in nodes.iter().enumerate() {
        let is_graph = values[i].is_graph();
        let ker_dim = values[i].as_operator().map(|a| lenient_kernel_dim(a, tol));
        let (dg, dr) = if i + 1 < nodes.len() {
            let dg = graph_distance(&graphs[i], &graphs[i + 1])?;
            let dr = match (values[i].as_operator(), values[i + 1].as_operator()) {
                (Some(a), Some(b)) => Some(riesz_distance(a, b)?),
                _ => None,
            };
            (Some(dg), dr)
        } else {
            (None, None)
        };
        if let Some(d) = dg {
            graph_modulus = graph_modulus.max(d);
        }
        if i + 1 < nodes.len() {
            riesz_modulus = match (riesz_modulus, dr) {
                (Some(acc), Some(d)) => Some(acc.max(d)),
                _ => None,
            };
        }
        rows.push(NodeRow {
            x,
            d_graph_step: dg,
            d_riesz_step: dr,
            is_graph,
            ker_dim,
        });
    }
    Ok(LevelData {
        rows,
        graph_modulus,
        riesz_modulus,
        step,
        points: nodes.len(),
    })
}

/// Kernel count without the hard ambiguity window, for report rows only.
fn lenient_kernel_dim(a: &MatrixOperator, tol: &Tolerances) -> usize {
    let sv = crate::cmatrix::singular_values(a.entries());
    let smax = sv.first().copied().unwrap_or(0.0);
    let n = a.dim_domain();
    let rank = sv.iter().filter(|&&s| s > tol.algebraic * smax).count();
    n - rank
}

/// Modulus summary of one refinement level.
#[derive(Debug, Clone, Serialize)]
pub struct RefineLevel {
    pub depth: usize,
    pub points: usize,
    pub step: f64,
    pub graph_modulus: f64,
    pub riesz_modulus: Option<f64>,
}

/// Full analysis output: per-node rows at the finest level, the modulus
/// history across refinement levels, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<NodeRow>,
    pub history: Vec<RefineLevel>,
    pub verdict: Verdict,
}

impl ContinuityReport {
    pub fn final_level(&self) -> &RefineLevel {
        self.history.last().expect("history is never empty")
    }

    pub fn graph_modulus(&self) -> f64 {
        self.final_level().graph_modulus
    }

    pub fn riesz_modulus(&self) -> Option<f64> {
        self.final_level().riesz_modulus
    }

    /// CSV with columns `x,d_graph_step,d_riesz_step,is_graph,ker_dim`.
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

/// CSV encoding of per-node rows, columns
/// `x,d_graph_step,d_riesz_step,is_graph,ker_dim`; step and kernel
/// columns are empty where undefined (last row, relation nodes).
pub fn rows_to_csv(rows: &[NodeRow]) -> String {
    let mut out = String::from("x,d_graph_step,d_riesz_step,is_graph,ker_dim\n");
    for r in rows {
        let dg = r.d_graph_step.map(|v| v.to_string()).unwrap_or_default();
        let dr = r.d_riesz_step.map(|v| v.to_string()).unwrap_or_default();
        let ker = r.ker_dim.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.x,
            dg,
            dr,
            u8::from(r.is_graph),
            ker
        ));
    }
    out
}

/// Knobs of the numerical continuity classifier.
#[derive(Debug, Clone, Copy)]
pub struct RefinePolicy {
    /// Modulus below which the family counts as continuous evidence.
    pub target: f64,
    /// Maximum number of grid doublings.
    pub max_depth: usize,
    /// Riesz floor a discontinuity witness must stay above.
    pub riesz_floor: f64,
    /// Required per-doubling decay of the graph modulus for a witness.
    pub decay_factor: f64,
    /// Relative stabilization window for the Riesz modulus.
    pub stability_rel: f64,
}

impl Default for RefinePolicy {
    fn default() -> Self {
        RefinePolicy {
            target: 0.05,
            max_depth: 8,
            riesz_floor: 1.0,
            decay_factor: 1.8,
            stability_rel: 0.1,
        }
    }
}

/// Single-level modulus computation (the spec's `modulus` operation).
pub fn modulus(family: &OperatorFamily, metric: Metric, tol: &Tolerances) -> Result<LevelData> {
    let level = family.level(tol)?;
    if matches!(metric, Metric::Riesz | Metric::Both) && level.riesz_modulus.is_none() {
        let bad = level
            .rows
            .iter()
            .find(|r| !r.is_graph)
            .map(|r| r.x)
            .unwrap_or(f64::NAN);
        return Err(Error::RieszAtRelation { x: bad });
    }
    Ok(level)
}

/// Repeatedly doubles the grid density and classifies the family.
///
/// Evidence of continuity: the focus modulus (per `metric`) falls below
/// `policy.target`. A Riesz-discontinuity witness requires both a stable
/// Riesz floor and a graph modulus decaying by at least
/// `policy.decay_factor` per doubling — this separates "family is rough"
/// from "the topologies genuinely disagree". Running out of depth yields
/// an inconclusive verdict, not an error.
pub fn refine_until(
    family: &OperatorFamily,
    metric: Metric,
    policy: &RefinePolicy,
    tol: &Tolerances,
) -> Result<ContinuityReport> {
    let mut grid = *family.grid();
    let mut history: Vec<RefineLevel> = Vec::new();
    let mut current = family.level(tol)?;

    for depth in 0..=policy.max_depth {
        if matches!(metric, Metric::Riesz | Metric::Both) && current.riesz_modulus.is_none() {
            let bad = current
                .rows
                .iter()
                .find(|r| !r.is_graph)
                .map(|r| r.x)
                .unwrap_or(f64::NAN);
            return Err(Error::RieszAtRelation { x: bad });
        }
        history.push(RefineLevel {
            depth,
            points: current.points,
            step: current.step,
            graph_modulus: current.graph_modulus,
            riesz_modulus: current.riesz_modulus,
        });

        let focus = match metric {
            Metric::Graph => Some(current.graph_modulus),
            Metric::Riesz => current.riesz_modulus,
            Metric::Both => match current.riesz_modulus {
                Some(r) => Some(r.max(current.graph_modulus)),
                None => None,
            },
        };
        if let Some(f) = focus {
            if f <= policy.target {
                return Ok(ContinuityReport {
                    rows: current.rows,
                    history,
                    verdict: Verdict::GraphContinuousEvidence,
                });
            }
        }
        if witness_fires(&history, policy) {
            return Ok(ContinuityReport {
                rows: current.rows,
                history,
                verdict: Verdict::RieszDiscontinuityWitness,
            });
        }
        if depth == policy.max_depth {
            break;
        }
        if !family.is_refinable() {
            break;
        }
        grid = grid.refined();
        current = family.with_grid(grid)?.level(tol)?;
    }

    Ok(ContinuityReport {
        rows: current.rows,
        history,
        verdict: Verdict::Inconclusive,
    })
}

/// Spec-facing wrapper with target and depth as bare arguments.
pub fn refine_until_target(
    family: &OperatorFamily,
    metric: Metric,
    target: f64,
    max_depth: usize,
    tol: &Tolerances,
) -> Result<ContinuityReport> {
    let policy = RefinePolicy {
        target,
        max_depth,
        ..RefinePolicy::default()
    };
    refine_until(family, metric, &policy, tol)
}

fn witness_fires(history: &[RefineLevel], policy: &RefinePolicy) -> bool {
    if history.len() < 3 {
        return false;
    }
    let k = history.len() - 1;
    let decayed = (k - 1..=k).all(|i| {
        let prev = history[i - 1].graph_modulus;
        let cur = history[i].graph_modulus;
        cur > 0.0 && prev / cur >= policy.decay_factor
    });
    let (r_prev, r_cur) = match (history[k - 1].riesz_modulus, history[k].riesz_modulus) {
        (Some(a), Some(b)) => (a, b),
        _ => return false,
    };
    let stable = (r_cur - r_prev).abs() <= policy.stability_rel * r_cur.max(r_prev);
    decayed && stable && r_cur >= policy.riesz_floor
}

/// Grid block of the family-spec JSON; a missing offset lets the builder
/// pick a generator-appropriate default.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl GridSpec {
    pub fn resolve(&self, default_offset: f64) -> Result<ParamGrid> {
        ParamGrid::with_offset(
            self.start,
            self.end,
            self.points,
            self.offset.unwrap_or(default_offset),
        )
    }
}

/// On-disk family description: a named generator with parameters, or an
/// explicit matrix list, over a grid. `"schema": 1` throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<MatrixOperator>>,
    pub grid: GridSpec,
}

fn schema_version() -> u32 {
    1
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match (&self.generator, &self.explicit) {
            (Some(_), Some(_)) => Err(Error::InvalidParams(
                "family spec has both a generator and explicit values".into(),
            )),
            (None, None) => Err(Error::InvalidParams(
                "family spec needs a generator or explicit values".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Builds an explicit family; generator specs are resolved by the
    /// gallery, which owns the generator names.
    pub fn build_explicit(&self) -> Result<OperatorFamily> {
        self.validate()?;
        let values = self
            .explicit
            .clone()
            .ok_or_else(|| Error::InvalidParams("not an explicit family spec".into()))?;
        let grid = self.grid.resolve(0.0)?;
        OperatorFamily::from_operators(values, grid, "explicit")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeGenerator;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn constant_family() -> OperatorFamily {
        let grid = ParamGrid::new(0.0, 1.0, 9).unwrap();
        let modes = ModeFamily::new(vec![ModeGenerator::constant(2.0)]).unwrap();
        OperatorFamily::from_modes(modes, grid, "constant")
    }

    fn pole_family(points: usize) -> OperatorFamily {
        let grid = ParamGrid::with_default_offset(0.0, 1.0, points).unwrap();
        let modes = ModeFamily::new(vec![ModeGenerator::Pole { center: 0.5 }]).unwrap();
        OperatorFamily::from_modes(modes, grid, "pole_crossing")
    }

    #[test]
    fn constant_family_has_zero_moduli() {
        let level = modulus(&constant_family(), Metric::Both, &tol()).unwrap();
        assert_eq!(level.graph_modulus, 0.0);
        assert_eq!(level.riesz_modulus, Some(0.0));
    }

    #[test]
    fn constant_family_is_evidence_at_depth_zero() {
        let report = refine_until_target(&constant_family(), Metric::Both, 0.05, 6, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::GraphContinuousEvidence);
        assert_eq!(report.history.len(), 1);
    }

    #[test]
    fn pole_family_moduli_split() {
        let fam = pole_family(257);
        let level = modulus(&fam, Metric::Both, &tol()).unwrap();
        let step = fam.grid().step();
        assert!(
            level.graph_modulus <= 1.2 * step,
            "graph modulus {} > 1.2·step {}",
            level.graph_modulus,
            1.2 * step
        );
        assert!(level.riesz_modulus.unwrap() >= 1.9);
    }

    #[test]
    fn pole_family_is_a_riesz_witness() {
        let fam = pole_family(17);
        let policy = RefinePolicy {
            target: 1e-4,
            max_depth: 8,
            ..RefinePolicy::default()
        };
        let report = refine_until(&fam, Metric::Graph, &policy, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::RieszDiscontinuityWitness);
    }

    #[test]
    fn linear_diag_family_is_evidence() {
        let grid = ParamGrid::new(0.0, 1.0, 5).unwrap();
        let modes = ModeFamily::new(vec![
            ModeGenerator::Linear {
                slope: 1.0,
                intercept: 0.0,
            },
            ModeGenerator::Linear {
                slope: -1.0,
                intercept: 0.0,
            },
        ])
        .unwrap();
        let fam = OperatorFamily::from_modes(modes, grid, "diag(t,-t)");
        let report = refine_until_target(&fam, Metric::Both, 0.01, 10, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::GraphContinuousEvidence);
        // Riesz modulus ≤ step at the final level
        let last = report.final_level();
        assert!(last.riesz_modulus.unwrap() <= last.step);
    }

    #[test]
    fn riesz_metric_rejects_relation_nodes() {
        // grid with a node exactly on the pole
        let grid = ParamGrid::new(0.0, 1.0, 3).unwrap();
        let modes = ModeFamily::new(vec![ModeGenerator::Pole { center: 0.5 }]).unwrap();
        let fam = OperatorFamily::from_modes(modes, grid, "pole-on-grid");
        match modulus(&fam, Metric::Riesz, &tol()) {
            Err(Error::RieszAtRelation { .. }) => {}
            other => panic!("expected RieszAtRelation, got {other:?}"),
        }
        // graph metric still works
        assert!(modulus(&fam, Metric::Graph, &tol()).is_ok());
    }

    #[test]
    fn explicit_families_refuse_refinement() {
        let grid = ParamGrid::new(0.0, 1.0, 3).unwrap();
        let fam = OperatorFamily::from_operators(
            vec![
                MatrixOperator::scalar(0.0),
                MatrixOperator::scalar(0.0),
                MatrixOperator::scalar(5.0),
            ],
            grid,
            "explicit",
        )
        .unwrap();
        assert!(!fam.is_refinable());
        assert!(fam.with_grid(grid.refined()).is_err());
        // single-level analysis still works, verdict inconclusive at depth 0
        let report =
            refine_until_target(&fam, Metric::Both, 1e-6, 4, &tol()).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn family_spec_round_trip() {
        let json = r#"{
            "generator": "pole_crossing",
            "params": {"modes": 1, "poles": 1},
            "grid": {"start": 0.0, "end": 1.0, "points": 17}
        }"#;
        let spec: FamilySpec = serde_json::from_str(json).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.schema, 1);
        assert_eq!(spec.generator.as_deref(), Some("pole_crossing"));
        assert!(spec.grid.offset.is_none());
        let back = serde_json::to_string(&spec).unwrap();
        let again: FamilySpec = serde_json::from_str(&back).unwrap();
        assert_eq!(again.grid.points, 17);
    }

    #[test]
    fn explicit_spec_builds() {
        let json = r#"{
            "explicit": [[[[0.0,0.0]]], [[[1.0,0.0]]]],
            "grid": {"start": 0.0, "end": 1.0, "points": 2}
        }"#;
        let spec: FamilySpec = serde_json::from_str(json).unwrap();
        let fam = spec.build_explicit().unwrap();
        let level = fam.level(&tol()).unwrap();
        assert!((level.graph_modulus - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }
}
