//! Property suite for the module invariants: projection identities,
//! transform round-trips, metric comparisons and equivariance, the
//! direct-sum metric identity, and the calibrated Lipschitz transfers.

use nalgebra::Complex;
use proptest::prelude::*;

use rgl_core::cmatrix::{opnorm, CMatrix};
use rgl_core::family::{GridSpec, OperatorFamily};
use rgl_core::gallery::{self, GeneratorName, GeneratorSpec};
use rgl_core::grid::ParamGrid;
use rgl_core::modes::{scalar_distances, Evaluated, ModeFamily, ModeGenerator};
use rgl_core::operator::{
    adjoint_relation, bounded_transform, graph_distance, graph_distance_ops,
    inverse_bounded_transform, riesz_distance, MatrixOperator,
};
use rgl_core::phi::{phi_family, polar_twist};
use rgl_core::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Strategy: a complex matrix of shape (m, n) with operator norm scaled
/// to `target`.
fn operator_strategy(
    max_dim: usize,
    max_norm: f64,
) -> impl Strategy<Value = MatrixOperator> {
    (1..=max_dim, 1..=max_dim)
        .prop_flat_map(move |(m, n)| {
            (
                Just(m),
                Just(n),
                proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m * n),
                1e-3..max_norm,
            )
        })
        .prop_map(|(m, n, entries, norm)| {
            let raw = CMatrix::from_fn(m, n, |i, j| {
                let (re, im) = entries[i * n + j];
                Complex::new(re, im)
            });
            let scale = norm / opnorm(&raw).max(1e-12);
            MatrixOperator::new(raw * Complex::new(scale, 0.0)).unwrap()
        })
}

fn unitary_from(entries: &[(f64, f64)], n: usize) -> CMatrix {
    let raw = CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex::new(re + if i == j { 2.0 } else { 0.0 }, im)
    });
    raw.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_projections_are_projections(a in operator_strategy(16, 100.0)) {
        let p = a.graph();
        let m = p.projection();
        prop_assert!(opnorm(&(m * m - m)) <= 1e-10);
        prop_assert!(opnorm(&(m - m.adjoint())) <= 1e-10);
        prop_assert_eq!(p.rank(), a.dim_domain());
    }

    #[test]
    fn bounded_transform_round_trips(a in operator_strategy(8, 10.0)) {
        let t = bounded_transform(&a).unwrap();
        let back = inverse_bounded_transform(&t.a, &tol()).unwrap();
        let rel = opnorm(&(back.entries() - a.entries())) / a.norm().max(1e-12);
        prop_assert!(rel <= 1e-8, "relative error {rel}");
    }

    #[test]
    fn scalar_matrix_routes_agree(l in -100.0..100.0f64, m in -100.0..100.0f64) {
        let (dg, dr) = scalar_distances(l, m);
        let a = MatrixOperator::scalar(l);
        let b = MatrixOperator::scalar(m);
        prop_assert!((graph_distance_ops(&a, &b).unwrap() - dg).abs() <= 1e-9);
        prop_assert!((riesz_distance(&a, &b).unwrap() - dr).abs() <= 1e-9);
    }

    #[test]
    fn adjoint_relation_matches_adjoint_operator(a in operator_strategy(8, 50.0)) {
        let via_flip = adjoint_relation(&a.graph());
        let direct = a.adjoint().graph();
        prop_assert!(graph_distance(&via_flip, &direct).unwrap() <= 1e-10);
    }

    #[test]
    fn riesz_dominates_graph_on_bounded_sets(
        a in operator_strategy(6, 10.0),
        delta in operator_strategy(6, 10.0),
    ) {
        // C from the scalar oracle scan over [−10, 10]²
        let c = scalar_domination_constant();
        prop_assume!(a.shape() == delta.shape());
        let b = delta;
        let dg = graph_distance_ops(&a, &b).unwrap();
        let dr = riesz_distance(&a, &b).unwrap();
        prop_assert!(dg <= c * dr + 1e-12, "dg {dg} > C·dr = {}", c * dr);
    }

    #[test]
    fn metrics_are_unitarily_equivariant(
        a in operator_strategy(6, 10.0),
        b in operator_strategy(6, 10.0),
        u_seed in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36),
        v_seed in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36),
    ) {
        prop_assume!(a.shape() == b.shape());
        let (m, n) = a.shape();
        let u = unitary_from(&u_seed[..m * m], m);
        let v = unitary_from(&v_seed[..n * n], n);
        let conj = |x: &MatrixOperator| {
            MatrixOperator::new(&u * x.entries() * v.adjoint()).unwrap()
        };
        let (ca, cb) = (conj(&a), conj(&b));
        let dr = riesz_distance(&a, &b).unwrap();
        let dg = graph_distance_ops(&a, &b).unwrap();
        prop_assert!((riesz_distance(&ca, &cb).unwrap() - dr).abs() <= 1e-10);
        prop_assert!((graph_distance_ops(&ca, &cb).unwrap() - dg).abs() <= 1e-10);
    }

    #[test]
    fn mode_families_satisfy_the_direct_sum_identity(
        slopes in proptest::collection::vec(-5.0..5.0f64, 1..12),
        intercepts in proptest::collection::vec(-5.0..5.0f64, 1..12),
        s in 0.0..1.0f64,
        t in 0.0..1.0f64,
    ) {
        let n = slopes.len().min(intercepts.len());
        let modes = ModeFamily::new(
            (0..n)
                .map(|i| ModeGenerator::Linear { slope: slopes[i], intercept: intercepts[i] })
                .collect(),
        )
        .unwrap();
        let dg = modes.graph_distance(s, t);
        let dr = modes.riesz_distance(s, t).unwrap();
        let at = |x: f64| modes.value_at(x);
        let (va, vb) = (at(s), at(t));
        let dg_mat = graph_distance(&va.graph(), &vb.graph()).unwrap();
        let dr_mat = riesz_distance(va.as_operator().unwrap(), vb.as_operator().unwrap()).unwrap();
        prop_assert!((dg - dg_mat).abs() <= 1e-10);
        prop_assert!((dr - dr_mat).abs() <= 1e-10);
    }
}

/// Largest `d_G/d_R` over a dense scalar grid in [−10, 10]².
fn scalar_domination_constant() -> f64 {
    let n = 401;
    let mut c: f64 = 0.0;
    for i in 0..n {
        let l = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
        for j in (i + 1)..n {
            let m = -10.0 + 20.0 * j as f64 / (n - 1) as f64;
            let (dg, dr) = scalar_distances(l, m);
            if dr > 1e-13 {
                c = c.max(dg / dr);
            }
        }
    }
    c
}

/// Direct-sum identity at the scale named by the invariant: N = 50 modes
/// against the dense matrix route.
#[test]
fn direct_sum_identity_at_fifty_modes() {
    let modes = ModeFamily::new(
        (1..=50)
            .map(|k| ModeGenerator::Linear {
                slope: (k as f64) * if k % 2 == 0 { -1.0 } else { 1.0 },
                intercept: 0.3 * k as f64,
            })
            .collect(),
    )
    .unwrap();
    let (s, t) = (0.1, 0.35);
    let dg = modes.graph_distance(s, t);
    let dr = modes.riesz_distance(s, t).unwrap();
    let (va, vb) = (modes.value_at(s), modes.value_at(t));
    let dg_mat = graph_distance(&va.graph(), &vb.graph()).unwrap();
    let dr_mat = riesz_distance(va.as_operator().unwrap(), vb.as_operator().unwrap()).unwrap();
    assert!((dg - dg_mat).abs() <= 1e-10, "graph: {dg} vs {dg_mat}");
    assert!((dr - dr_mat).abs() <= 1e-10, "riesz: {dr} vs {dr_mat}");
}

/// Riesz–Lipschitz transfer: the twisted family's Riesz steps are bounded
/// by 4× the input's graph steps (the global constant calibrated for the
/// transport formula at the step cap).
#[test]
fn twist_riesz_steps_track_graph_steps() {
    let t = tol();
    for (name, gs) in [
        (
            GeneratorName::PoleCrossing,
            GridSpec {
                start: 0.0,
                end: 1.0,
                points: 129,
                offset: None,
            },
        ),
        (
            GeneratorName::RotatingSpectrum,
            GridSpec {
                start: 0.0,
                end: 2.0,
                points: 65,
                offset: None,
            },
        ),
    ] {
        let spec = GeneratorSpec::new(name);
        let fam = gallery::generate(&spec, &gs).unwrap();
        let report = phi_family(&fam, &t).unwrap();
        for (raw, twisted) in report.raw.rows.iter().zip(&report.twisted.rows) {
            if let (Some(dg), Some(dr)) = (raw.d_graph_step, twisted.d_riesz_step) {
                assert!(
                    dr <= 4.0 * dg + 1e-8,
                    "{name:?}: twisted Riesz step {dr} > 4·graph step {dg}"
                );
            }
        }
    }
}

/// The positive parts of an invertible family move no faster in the
/// Riesz metric than the family itself in operator norm.
#[test]
fn polar_positive_parts_are_riesz_tame() {
    let t = tol();
    for seed in 0..4u64 {
        let mut spec = GeneratorSpec::new(GeneratorName::InvertiblePolar);
        spec.seed = seed;
        let gs = GridSpec {
            start: 0.0,
            end: 1.0,
            points: 33,
            offset: Some(0.0),
        };
        let fam = gallery::generate(&spec, &gs).unwrap();
        let values = fam.values().unwrap();
        let mut prev: Option<(MatrixOperator, MatrixOperator)> = None;
        for v in values {
            let a = v.as_operator().unwrap().clone();
            let (abs, unitary) = polar_twist(&a, &t).unwrap();
            let residual = opnorm(&(a.entries() * unitary.adjoint() - abs.entries()));
            assert!(residual <= 1e-9 * a.norm());
            if let Some((pa, pabs)) = &prev {
                let matrix_step = opnorm(&(a.entries() - pa.entries()));
                let riesz_step = riesz_distance(&abs, pabs).unwrap();
                assert!(
                    riesz_step <= matrix_step + 1e-12,
                    "seed {seed}: |A| Riesz step {riesz_step} > matrix step {matrix_step}"
                );
            }
            prev = Some((a, abs));
        }
    }
}

/// Pole nodes turn into vertical relations rather than clamped values,
/// and the graph metric keeps working through them.
#[test]
fn analysis_walks_through_relation_nodes() {
    let t = tol();
    // node exactly on the pole
    let grid = ParamGrid::new(0.0, 1.0, 5).unwrap();
    let modes = ModeFamily::new(vec![ModeGenerator::Pole { center: 0.5 }]).unwrap();
    let fam = OperatorFamily::from_modes(modes, grid, "pole-on-grid");
    let values = fam.values().unwrap();
    assert!(matches!(values[2], Evaluated::Relation(_)));
    let level = rgl_core::family::modulus(&fam, rgl_core::Metric::Graph, &t).unwrap();
    assert!(level.graph_modulus < 1.0);
    assert!(level.riesz_modulus.is_none());
}
