//! Canonical example generators and their closed forms.
//!
//! * `pole_crossing` — the graph-close/Riesz-far witness: modes
//!   `a_n(t) = 1/(t − 1/n)` whose transforms jump between ±1 across
//!   off-grid poles while their graphs rotate slowly;
//! * `semibounded_drift` — modes `a_n(t) = n + t`, spectra bounded below;
//! * `rotating_spectrum` — fixed eigenvalues, eigenvectors rotated by a
//!   chain of planar rotations;
//! * `dixmier_douady` — block family `A(x) = A·r(x)` with `A = ⊕ c_i·I₂`
//!   and `r(x) = ⊕ (2p_i(x) − 1)` over a product of circles of unit
//!   vectors in C², parametrized along an angle-linear path;
//! * `invertible_polar` — seeded invertible family with singular values
//!   at least 0.1 by construction.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{self, identity, opnorm, CMatrix};
use crate::error::{Error, Result};
use crate::family::{FamilySpec, GridSpec, OperatorFamily};
use crate::grid::ParamGrid;
use crate::modes::{Evaluated, ModeFamily, ModeGenerator};
use crate::operator::{riesz_distance, MatrixOperator};
use crate::tolerances::Tolerances;

/// The gallery generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    PoleCrossing,
    SemiboundedDrift,
    RotatingSpectrum,
    DixmierDouady,
    InvertiblePolar,
}

impl GeneratorName {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParams(format!("unknown generator {s:?}")))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorName::PoleCrossing => "pole_crossing",
            GeneratorName::SemiboundedDrift => "semibounded_drift",
            GeneratorName::RotatingSpectrum => "rotating_spectrum",
            GeneratorName::DixmierDouady => "dixmier_douady",
            GeneratorName::InvertiblePolar => "invertible_polar",
        }
    }

    pub const ALL: [GeneratorName; 5] = [
        GeneratorName::PoleCrossing,
        GeneratorName::SemiboundedDrift,
        GeneratorName::RotatingSpectrum,
        GeneratorName::DixmierDouady,
        GeneratorName::InvertiblePolar,
    ];
}

/// Validated generator description: name, parameters, seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: GeneratorName,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(name: GeneratorName) -> Self {
        GeneratorSpec {
            name,
            params: serde_json::Map::new(),
            seed: 0,
        }
    }

    fn usize_param(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| Error::InvalidParams(format!("{key} must be a nonnegative integer"))),
        }
    }

    fn f64_param(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidParams(format!("{key} must be a finite number"))),
        }
    }

    fn f64_list_param(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::InvalidParams(format!("{key} must be an array")))?;
                arr.iter()
                    .map(|x| {
                        x.as_f64()
                            .filter(|y| y.is_finite())
                            .ok_or_else(|| Error::InvalidParams(format!("{key} entries must be finite")))
                    })
                    .collect()
            }
        }
    }
}

/// Builds the family described by a generator spec over a grid.
///
/// Generators with designated singular parameters (`pole_crossing`) get
/// the generic-position offset `1e-3·step` when the grid does not name
/// one.
pub fn generate(spec: &GeneratorSpec, grid_spec: &GridSpec) -> Result<OperatorFamily> {
    let default_offset = match spec.name {
        GeneratorName::PoleCrossing => {
            let step = (grid_spec.end - grid_spec.start) / (grid_spec.points.max(2) as f64 - 1.0);
            1e-3 * step
        }
        _ => 0.0,
    };
    let grid = grid_spec.resolve(default_offset)?;
    match spec.name {
        GeneratorName::PoleCrossing => pole_crossing(spec, grid),
        GeneratorName::SemiboundedDrift => semibounded_drift(spec, grid),
        GeneratorName::RotatingSpectrum => rotating_spectrum(spec, grid),
        GeneratorName::DixmierDouady => dixmier_douady(spec, grid),
        GeneratorName::InvertiblePolar => invertible_polar(spec, grid),
    }
}

/// Resolves a family-spec JSON into a family: explicit values as given,
/// generator names through the gallery.
pub fn family_from_spec(spec: &FamilySpec) -> Result<OperatorFamily> {
    spec.validate()?;
    if spec.explicit.is_some() {
        return spec.build_explicit();
    }
    let name = GeneratorName::parse(spec.generator.as_deref().unwrap_or_default())?;
    let gen_spec = GeneratorSpec {
        name,
        params: spec.params.clone(),
        seed: spec.seed.unwrap_or(0),
    };
    generate(&gen_spec, &spec.grid)
}

/// The canonical spec block for a generator with default parameters.
pub fn canonical_spec(name: GeneratorName, seed: u64) -> FamilySpec {
    let mut params = serde_json::Map::new();
    let grid = match name {
        GeneratorName::PoleCrossing => {
            params.insert("modes".into(), 1u64.into());
            params.insert("poles".into(), 1u64.into());
            GridSpec {
                start: 0.0,
                end: 1.0,
                points: 257,
                offset: None,
            }
        }
        GeneratorName::SemiboundedDrift => {
            params.insert("modes".into(), 20u64.into());
            GridSpec {
                start: 0.0,
                end: 1.0,
                points: 65,
                offset: None,
            }
        }
        GeneratorName::RotatingSpectrum => {
            params.insert(
                "eigenvalues".into(),
                serde_json::json!([-2.0, -1.0, 1.0, 2.0]),
            );
            params.insert("speed".into(), 1.0.into());
            GridSpec {
                start: 0.0,
                end: std::f64::consts::PI,
                points: 65,
                offset: None,
            }
        }
        GeneratorName::DixmierDouady => {
            params.insert("factors".into(), 3u64.into());
            params.insert("couplings".into(), serde_json::json!([1.0, 2.0, 3.0]));
            GridSpec {
                start: 0.0,
                end: std::f64::consts::FRAC_PI_2,
                points: 65,
                offset: None,
            }
        }
        GeneratorName::InvertiblePolar => {
            params.insert("dim".into(), 4u64.into());
            GridSpec {
                start: 0.0,
                end: 1.0,
                points: 33,
                offset: None,
            }
        }
    };
    FamilySpec {
        schema: 1,
        generator: Some(name.as_str().to_string()),
        params,
        seed: Some(seed),
        explicit: None,
        grid,
    }
}

fn pole_crossing(spec: &GeneratorSpec, grid: ParamGrid) -> Result<OperatorFamily> {
    let n = spec.usize_param("modes", 1)?;
    let k = spec.usize_param("poles", 1)?;
    if n == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "pole_crossing needs 1 ≤ poles ≤ modes, got modes={n}, poles={k}"
        )));
    }
    let modes: Vec<ModeGenerator> = (1..=n)
        .map(|j| {
            if j <= k {
                ModeGenerator::Pole {
                    center: 1.0 / j as f64,
                }
            } else {
                ModeGenerator::constant(j as f64)
            }
        })
        .collect();
    Ok(OperatorFamily::from_modes(
        ModeFamily::new(modes)?,
        grid,
        &format!("pole_crossing(modes={n}, poles={k})"),
    ))
}

fn semibounded_drift(spec: &GeneratorSpec, grid: ParamGrid) -> Result<OperatorFamily> {
    let n = spec.usize_param("modes", 20)?;
    if n == 0 {
        return Err(Error::InvalidParams("semibounded_drift needs modes ≥ 1".into()));
    }
    let modes: Vec<ModeGenerator> = (1..=n)
        .map(|j| ModeGenerator::Linear {
            slope: 1.0,
            intercept: j as f64,
        })
        .collect();
    Ok(OperatorFamily::from_modes(
        ModeFamily::new(modes)?,
        grid,
        &format!("semibounded_drift(modes={n})"),
    ))
}

/// Chain of planar rotations mixing all coordinates, with plane `j`
/// rotating at speed `speed·(1 + j/d)`.
fn rotation_chain(dim: usize, speed: f64, t: f64) -> CMatrix {
    let mut u = identity(dim);
    for j in 0..dim.saturating_sub(1) {
        let angle = speed * t * (1.0 + j as f64 / dim as f64);
        let (c, s) = (angle.cos(), angle.sin());
        let mut r = identity(dim);
        r[(j, j)] = Complex::new(c, 0.0);
        r[(j, j + 1)] = Complex::new(-s, 0.0);
        r[(j + 1, j)] = Complex::new(s, 0.0);
        r[(j + 1, j + 1)] = Complex::new(c, 0.0);
        u = r * u;
    }
    u
}

fn rotating_spectrum(spec: &GeneratorSpec, grid: ParamGrid) -> Result<OperatorFamily> {
    let eigenvalues = spec.f64_list_param("eigenvalues", vec![-2.0, -1.0, 1.0, 2.0])?;
    let speed = spec.f64_param("speed", 1.0)?;
    if eigenvalues.is_empty() {
        return Err(Error::InvalidParams(
            "rotating_spectrum needs at least one eigenvalue".into(),
        ));
    }
    let dim = eigenvalues.len();
    let diag = cmatrix::diag_real(&eigenvalues);
    let provenance = format!("rotating_spectrum(dim={dim}, speed={speed})");
    Ok(OperatorFamily::from_map(
        move |t| {
            let u = rotation_chain(dim, speed, t);
            Ok(Evaluated::Operator(MatrixOperator::new(
                &u * &diag * u.adjoint(),
            )?))
        },
        grid,
        &provenance,
    ))
}

/// Symmetry of the line at angle `theta` in C²: `2p − 1`.
fn line_symmetry(theta: f64) -> CMatrix {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let mut r = cmatrix::zeros(2, 2);
    r[(0, 0)] = Complex::new(c, 0.0);
    r[(0, 1)] = Complex::new(s, 0.0);
    r[(1, 0)] = Complex::new(s, 0.0);
    r[(1, 1)] = Complex::new(-c, 0.0);
    r
}

fn dd_params(spec: &GeneratorSpec) -> Result<(usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = spec.usize_param("factors", 2)?;
    if m == 0 {
        return Err(Error::InvalidParams("dixmier_douady needs factors ≥ 1".into()));
    }
    let couplings =
        spec.f64_list_param("couplings", (1..=m).map(|i| i as f64).collect())?;
    let direction = spec.f64_list_param("direction", {
        let mut d = vec![0.0; m];
        d[0] = 1.0;
        d
    })?;
    let phases = spec.f64_list_param("phases", vec![0.0; m])?;
    if couplings.len() != m || direction.len() != m || phases.len() != m {
        return Err(Error::InvalidParams(format!(
            "dixmier_douady parameter arrays must have length factors = {m}"
        )));
    }
    if couplings.iter().any(|&c| c <= 0.0) {
        return Err(Error::InvalidParams(
            "dixmier_douady couplings must be positive".into(),
        ));
    }
    Ok((m, couplings, direction, phases))
}

/// `A(x) = A·r(x)` with `A = ⊕ c_i·I₂` and `r(x) = ⊕ (2p_i(x) − 1)`,
/// the lines rotating angle-linearly along the path.
fn dixmier_douady(spec: &GeneratorSpec, grid: ParamGrid) -> Result<OperatorFamily> {
    let (m, couplings, direction, phases) = dd_params(spec)?;
    let provenance = format!("dixmier_douady(factors={m}, couplings={couplings:?})");
    Ok(OperatorFamily::from_map(
        move |t| Ok(Evaluated::Operator(dd_value(&couplings, &direction, &phases, t)?)),
        grid,
        &provenance,
    ))
}

fn dd_value(
    couplings: &[f64],
    direction: &[f64],
    phases: &[f64],
    t: f64,
) -> Result<MatrixOperator> {
    let blocks: Vec<CMatrix> = couplings
        .iter()
        .zip(direction)
        .zip(phases)
        .map(|((&c, &v), &phi)| line_symmetry(v * t + phi) * Complex::new(c, 0.0))
        .collect();
    let mut out = blocks[0].clone();
    for b in &blocks[1..] {
        out = cmatrix::direct_sum(&out, b);
    }
    MatrixOperator::new(out)
}

/// The symmetry family `r(x) = ⊕ (2p_i(x) − 1)` itself.
fn dd_symmetry(direction: &[f64], phases: &[f64], t: f64) -> CMatrix {
    let blocks: Vec<CMatrix> = direction
        .iter()
        .zip(phases)
        .map(|(&v, &phi)| line_symmetry(v * t + phi))
        .collect();
    let mut out = blocks[0].clone();
    for b in &blocks[1..] {
        out = cmatrix::direct_sum(&out, b);
    }
    out
}

fn invertible_polar(spec: &GeneratorSpec, grid: ParamGrid) -> Result<OperatorFamily> {
    let dim = spec.usize_param("dim", 4)?;
    if dim == 0 {
        return Err(Error::InvalidParams("invertible_polar needs dim ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma_base: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..2.0)).collect();
    let left_speed: f64 = rng.gen_range(0.5..1.5);
    let right_speed: f64 = rng.gen_range(0.5..1.5);
    let wobble: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..0.2)).collect();
    let provenance = format!("invertible_polar(dim={dim}, seed={})", spec.seed);
    Ok(OperatorFamily::from_map(
        move |t| {
            // singular values stay within [0.3, 2.2]: ≥ 0.1 by construction
            let sigmas: Vec<f64> = sigma_base
                .iter()
                .zip(&wobble)
                .enumerate()
                .map(|(i, (&s, &w))| s + w * (t + i as f64).sin())
                .collect();
            let u = rotation_chain(dim, left_speed, t);
            let w = rotation_chain(dim, right_speed, t + 0.7);
            let d = cmatrix::diag_real(&sigmas);
            Ok(Evaluated::Operator(MatrixOperator::new(u * d * w.adjoint())?))
        },
        grid,
        &provenance,
    ))
}

/// Constancy check for the block family: right multiplication by `r(x)`
/// freezes it, conjugation does not.
#[derive(Debug, Clone, Serialize)]
pub struct DdReport {
    /// `max_x ‖A(x)·r(x) − A‖` — zero up to roundoff since `r² = 1`.
    pub max_deviation: f64,
    /// End-to-end Riesz distance of the raw family over the path.
    pub raw_riesz_span: f64,
    /// End-to-end Riesz distance of the conjugated family `r A(x) r*`.
    pub conjugated_riesz_span: f64,
}

/// Runs the constancy check for `A(x) = A·r(x)` over a line in the base:
/// the right-multiplied family `A(x)·r(x)` is constant while conjugation
/// by the same unitaries retains the raw Riesz span.
pub fn dd_constancy_check(
    spec: &GeneratorSpec,
    grid: &ParamGrid,
    _tol: &Tolerances,
) -> Result<DdReport> {
    let (_, couplings, direction, phases) = dd_params(spec)?;
    let constant = {
        let diag: Vec<f64> = couplings.iter().flat_map(|&c| [c, c]).collect();
        cmatrix::diag_real(&diag)
    };
    let nodes = grid.nodes();
    let mut max_deviation: f64 = 0.0;
    let mut endpoints: Vec<MatrixOperator> = Vec::new();
    let mut conjugated_endpoints: Vec<MatrixOperator> = Vec::new();
    for (i, &t) in nodes.iter().enumerate() {
        let a = dd_value(&couplings, &direction, &phases, t)?;
        let r = dd_symmetry(&direction, &phases, t);
        max_deviation = max_deviation.max(opnorm(&(a.entries() * &r - &constant)));
        if i == 0 || i == nodes.len() - 1 {
            conjugated_endpoints.push(MatrixOperator::new(&r * a.entries() * r.adjoint())?);
            endpoints.push(a);
        }
    }
    Ok(DdReport {
        max_deviation,
        raw_riesz_span: riesz_distance(&endpoints[0], &endpoints[1])?,
        conjugated_riesz_span: riesz_distance(&conjugated_endpoints[0], &conjugated_endpoints[1])?,
    })
}
