//! Curve decompositions of divergence-measure fields.
//!
//! Exact: snap a curve field to a flow graph and split it into source-to-sink
//! paths and cycles. Lifting to a divergence-free field in space first and
//! projecting afterwards gives a decomposition carried by closed curves.
//!
//! Numerical: mollify, follow the flow of the normalized direction field and
//! check by Monte Carlo that flow lines reproduce the field.

mod graph;
mod grid;
mod lift;

pub use graph::{
    decomposition_field, decomposition_file, decomposition_mass, graph_decompose, recomposition_error, snap_to_graph,
    FlowEdge, FlowGraph, FlowPiece, PieceKind,
};
pub use grid::{
    flow_trace, mollify, reconstruct_check, transport_invariant, GridField, GridSpec, ReconstructReport, KERNEL_RADIUS,
};
pub use lift::{lift_solenoidal, project_curves};

use crate::curve::{CurveField, PolyCurve};
use crate::error::{Error, Result};
use crate::point::{Point, Point2};

fn polygon_loop(centre: Point2, r: f64, n: usize, weight: f64) -> PolyCurve<2> {
    let mut vs: Vec<Point2> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            centre + Point([r * t.cos(), r * t.sin()])
        })
        .collect();
    vs.push(vs[0]);
    PolyCurve::new(vs, weight).unwrap()
}

/// Divergence-free preset fields: `circle`, `square-loop`, `double-loop`.
pub fn divfree_preset(name: &str) -> Result<CurveField<2>> {
    let o = Point([0.0, 0.0]);
    match name {
        "circle" => Ok(CurveField::new(vec![polygon_loop(o, 0.5, 64, 1.0)])),
        "square-loop" => Ok(CurveField::new(vec![PolyCurve::new(
            vec![Point([-0.5, -0.5]), Point([0.5, -0.5]), Point([0.5, 0.5]), Point([-0.5, 0.5]), Point([-0.5, -0.5])],
            1.0,
        )?])),
        "double-loop" => Ok(CurveField::new(vec![
            polygon_loop(Point([-0.4, 0.0]), 0.3, 48, 1.0),
            polygon_loop(Point([0.4, 0.0]), 0.3, 48, -0.5),
        ])),
        _ => Err(Error::UnknownKind(name.to_string())),
    }
}

pub const DIVFREE_PRESETS: [&str; 3] = ["circle", "square-loop", "double-loop"];

/// Decomposition through the solenoidal lift: lift, snap, decompose, project.
pub fn lifted_decomposition(f: &CurveField<2>, tol: f64) -> Result<Vec<PolyCurve<2>>> {
    let g = snap_to_graph(&lift_solenoidal(f), tol);
    let pieces = graph_decompose(&g);
    let curves: Vec<PolyCurve<3>> = pieces.into_iter().map(|p| p.curve).collect();
    project_curves(&curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_divergence_free() {
        for name in DIVFREE_PRESETS {
            assert!(divfree_preset(name).unwrap().divergence().normalized(1e-12).is_empty(), "{name}");
        }
        assert!(divfree_preset("torus").is_err());
    }

    #[test]
    fn lifted_decomposition_of_a_path() {
        let f = CurveField::new(vec![PolyCurve::new(vec![Point([0.0, 0.0]), Point([1.0, 0.0]), Point([1.0, 1.0])], 2.0).unwrap()]);
        let d = lifted_decomposition(&f, 1e-12).unwrap();
        assert_eq!(d, f.curves);
    }

    #[test]
    fn divfree_graph_has_cycles_only() {
        let g = snap_to_graph(&divfree_preset("double-loop").unwrap(), 1e-12);
        let d = graph_decompose(&g);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|p| p.kind == PieceKind::Cycle));
    }
}
