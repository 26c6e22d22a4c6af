//! Graph decompositions and the numerical flow pipeline.

use dmtrace::smirnov::{
    decomposition_field, decomposition_file, decomposition_mass, divfree_preset, flow_trace, graph_decompose,
    lifted_decomposition, mollify, recomposition_error, snap_to_graph, GridField, GridSpec, PieceKind,
};
use dmtrace::{CurveField, Point, Point2, PolyCurve};
use proptest::prelude::*;

fn p(x: f64, y: f64) -> Point2 {
    Point([x, y])
}

/// Polylines on a coarse lattice, so curves share nodes and overlap.
fn lattice_field() -> impl Strategy<Value = CurveField<2>> {
    let curve = (prop::collection::vec((0..4i32, 0..4i32), 2..6), prop_oneof![Just(-1.0), Just(0.5), Just(2.0)])
        .prop_filter_map("repeated vertex", |(vs, w)| {
            PolyCurve::new(vs.into_iter().map(|(i, j)| p(i as f64 * 0.5, j as f64 * 0.5)).collect(), w).ok()
        });
    prop::collection::vec(curve, 1..7).prop_map(CurveField::new)
}

fn generic_field() -> impl Strategy<Value = CurveField<2>> {
    let curve = (prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..5), prop_oneof![-2.0..-0.1f64, 0.1..2.0f64])
        .prop_filter_map("repeated vertex", |(vs, w)| {
            PolyCurve::new(vs.into_iter().map(|(x, y)| p(x, y)).collect(), w).ok()
        });
    prop::collection::vec(curve, 1..5).prop_map(CurveField::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn decomposition_recomposes(f in lattice_field()) {
        let g = snap_to_graph(&f, 1e-12);
        let pieces = graph_decompose(&g);
        prop_assert!(recomposition_error(&g, &pieces).unwrap() <= 1e-12 * (1.0 + g.mass()));
        prop_assert!(decomposition_field(&pieces).divergence().approx_eq(&g.divergence(), 1e-9));
        // Pieces never cancel each other, so their mass is the graph mass.
        prop_assert!((decomposition_mass(&pieces) - g.mass()).abs() <= 1e-9 * (1.0 + g.mass()));
        prop_assert!(g.mass() <= f.mass() + 1e-12);
        prop_assert!(g.balance().abs() <= 1e-12 * (1.0 + g.mass()));
    }

    #[test]
    fn paths_run_from_sources_to_sinks(f in lattice_field()) {
        let g = snap_to_graph(&f, 1e-12);
        let div = g.divergence();
        for piece in graph_decompose(&g) {
            let c = &piece.curve;
            match piece.kind {
                PieceKind::Cycle => prop_assert!(c.is_closed()),
                PieceKind::Path => {
                    prop_assert!(c.weight() > 0.0);
                    prop_assert!(div.coefficient_at(&c.start()) > 0.0);
                    prop_assert!(div.coefficient_at(&c.end()) < 0.0);
                }
            }
        }
    }

    #[test]
    fn lifted_decomposition_keeps_pairings(f in generic_field(), a in 0.5..4.0f64, b in 0.5..4.0f64) {
        let d = CurveField::new(lifted_decomposition(&f, 1e-12).unwrap());
        prop_assert!(d.divergence().approx_eq(&f.divergence(), 1e-9));
        let phi = |x: &Point2| Ok(p((a * x.y()).sin(), (b * x.x()).cos() + x.y()));
        let err = (d.pair_vector(&phi, 16).unwrap() - f.pair_vector(&phi, 16).unwrap()).abs();
        prop_assert!(err <= 1e-9 * (1.0 + f.mass()));
    }
}

#[test]
fn cancellation_makes_the_decomposition_lighter() {
    let f = CurveField::new(vec![
        PolyCurve::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0).unwrap(),
        PolyCurve::segment(p(1.0, 0.0), p(0.0, 0.0), 1.0).unwrap(),
    ]);
    let pieces = graph_decompose(&snap_to_graph(&f, 1e-12));
    assert!(pieces.is_empty());
    assert_eq!(decomposition_mass(&pieces), 0.0);
    assert_eq!(f.mass(), 2.0);
}

#[test]
fn decomposition_file_roundtrip() {
    let f = CurveField::new(vec![
        PolyCurve::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)], 1.0).unwrap(),
        PolyCurve::new(vec![p(1.0, 1.0), p(0.0, 1.0), p(0.0, 0.0), p(1.0, 0.0)], 1.0).unwrap(),
    ]);
    let pieces = graph_decompose(&snap_to_graph(&f, 1e-12));
    let json = serde_json::to_string(&decomposition_file(&pieces)).unwrap();
    assert!(json.contains("\"path\"") || json.contains("\"cycle\""));
    let back: dmtrace::curve::FieldFile<2> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, decomposition_file(&pieces));
}

#[test]
fn flow_lines_stay_near_the_circle() {
    let f = divfree_preset("circle").unwrap();
    let gf = mollify(&f, 0.1, GridSpec::covering(&f, 0.1, 0.02).unwrap()).unwrap();
    let c = flow_trace(&gf, p(0.5, 0.0), 1.0, 1e-3).unwrap();
    assert!(c.vertices().iter().all(|v| (v.norm() - 0.5).abs() < 0.05));
    // Counterclockwise circulation moves the start upward.
    assert!(c.vertices()[10].y() > 0.0);
    let json = serde_json::to_string(&gf).unwrap();
    let back: GridField = serde_json::from_str(&json).unwrap();
    assert_eq!(back.sigma(p(0.5, 0.0)), gf.sigma(p(0.5, 0.0)));
}
