//! Gauss-Green and trace duality on random fields, plus worked examples.

use dmtrace::{
    divergence_in, normal_trace, pairing_over_set, setwise_probe, weakstar_sequence, CurveField, LipFunc, Point,
    Point2, PolyCurve, PolyRegion, SequenceKind,
};
use proptest::prelude::*;

fn p(x: f64, y: f64) -> Point2 {
    Point([x, y])
}

fn polyline() -> impl Strategy<Value = PolyCurve<2>> {
    (prop::collection::vec((-1.0..2.0f64, -1.0..2.0f64), 2..6), prop_oneof![-2.0..-0.1f64, 0.1..2.0f64])
        .prop_filter_map("repeated vertex", |(vs, w)| {
            PolyCurve::new(vs.into_iter().map(|(x, y)| p(x, y)).collect(), w).ok()
        })
}

fn field() -> impl Strategy<Value = CurveField<2>> {
    prop::collection::vec(polyline(), 1..6).prop_map(CurveField::new)
}

fn test_function() -> impl Strategy<Value = LipFunc> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.5..6.0f64, 0.0..1.5f64, 0.0..1.5f64).prop_map(|(a, b, k, cx, cy)| {
        LipFunc::linear(vec![a, b])
            .add(LipFunc::wave(0.5, k, vec![0.6, 0.8]))
            .min(LipFunc::dist_to(vec![cx, cy]).scale(2.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauss_green_for_gradients(f in field(), a in 0.5..3.0f64, b in -1.0..1.0f64) {
        // φ = sin(a x) e^{b y}
        let grad = |x: &Point2| Ok(p(a * (a * x.x()).cos() * (b * x.y()).exp(), b * (a * x.x()).sin() * (b * x.y()).exp()));
        let lhs = f.pair_vector(&grad, 16).unwrap();
        let rhs = f.divergence().integrate(|x| (a * x.x()).sin() * (b * x.y()).exp());
        prop_assert!((lhs + rhs).abs() <= 1e-9 * (1.0 + f.mass()));
    }

    #[test]
    fn trace_duality_on_rectangles(f in field(), phi in test_function(), lo in 0.0..0.4f64, hi in 0.6..1.0f64) {
        let e = PolyRegion::rectangle(p(lo, lo - 0.1), p(hi, hi + 0.2)).unwrap();
        let trace = normal_trace(&f, &e).unwrap();
        let lhs = trace.integrate(|x| phi.eval(x.coords()).unwrap());
        let rhs = -pairing_over_set(&f, &phi, &e).unwrap()
            - divergence_in(&f, &e).integrate(|x| phi.eval(x.coords()).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + f.mass()) * phi.lip_b_norm().max(1.0));
    }

    #[test]
    fn trace_of_closed_curves_is_balanced(c in polyline(), x0 in 0.0..0.5f64) {
        let mut vs = c.vertices().to_vec();
        vs.push(vs[0]);
        prop_assume!(vs.len() >= 4);
        let f = CurveField::new(vec![PolyCurve::new(vs, c.weight()).unwrap()]);
        let e = PolyRegion::rectangle(p(x0, 0.0), p(x0 + 0.7, 1.0)).unwrap();
        prop_assert!(normal_trace(&f, &e).unwrap().total().abs() <= 1e-12);
    }
}

#[test]
fn unit_segment_wave_sequence() {
    let f = CurveField::new(vec![PolyCurve::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0).unwrap()]);
    let everywhere = PolyRegion::rectangle(p(-5.0, -5.0), p(5.0, 5.0)).unwrap();
    let zero = LipFunc::constant(0.0);
    let r = setwise_probe(
        &f,
        |k| weakstar_sequence(SequenceKind::WavePerturbation, k, &zero, 2),
        &zero,
        &everywhere,
        50,
    )
    .unwrap();
    for (k, v) in (1..=50).zip(&r.values) {
        let expected = (k as f64).sin() / k as f64;
        assert!((v - expected).abs() < 1e-15, "k={k}: {v} vs {expected}");
    }
    assert_eq!(r.limit, 0.0);
    assert!(r.converged);
}

#[test]
fn chord_through_square() {
    let f = CurveField::new(vec![PolyCurve::segment(p(-1.0, 0.5), p(2.0, 0.5), 3.0).unwrap()]);
    let e = PolyRegion::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
    let t = normal_trace(&f, &e).unwrap();
    assert_eq!(t.coefficient_at(&p(0.0, 0.5)), 3.0);
    assert_eq!(t.coefficient_at(&p(1.0, 0.5)), -3.0);
    // (∇φ · F)(E) for φ = x: the weight times the length inside.
    assert_eq!(pairing_over_set(&f, &LipFunc::linear(vec![1.0, 0.0]), &e).unwrap(), 3.0);
}
