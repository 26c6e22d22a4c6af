//! Divergence-measure fields represented as weighted polygonal curves.
//!
//! Fields are finite sums of weighted curve currents. On top of that
//! representation the crate computes normal traces and pairings on polygonal
//! sets, Arens-Eells norms of boundary functionals by min-cost transport,
//! trace lifts and field extensions on planar domains, and curve
//! decompositions (exact on graphs and numerical through mollified flows).

pub mod acceptance;
pub mod aespace;
pub mod curve;
pub mod dipole;
pub mod domain;
pub mod error;
pub mod lipfun;
pub mod mcf;
pub mod measure;
pub mod pairing;
pub mod planar;
pub mod point;
pub mod quadrature;
pub mod region;
pub mod smirnov;
pub mod tracext;

pub use curve::{curve_length, field_divergence, field_mass, pair_vector, CurveField, PolyCurve};
pub use error::{Error, Result};
pub use lipfun::{weakstar_sequence, LipFunc, SequenceKind};
pub use measure::{Atom, AtomicMeasure};
pub use point::{Point, Point2, Point3};
pub use quadrature::GaussLegendre;
pub use region::{Location, PolyRegion, RegionPart};
pub use pairing::{
    clip_field, clip_field_outside, crossings, divergence_in, normal_trace, pairing_over_set, product_rule_residual,
    setwise_probe, Crossing, Direction, OverlapPolicy,
};
pub use aespace::{ae_norm, ae_norm_oracle, ae_pair, dual_check, rho, AEElement, AeNorm, DipoleRep, DipoleTerm, DualEntry, Node};
pub use domain::{complement_region, presets, PolygonalDomain, RoutingGraph};
pub use tracext::{
    bound_constant, extend_divfree, extend_field, lift_surject, two_sided_lift, DivFreeExtension, Extension, Lift,
    LiftConfig,
};
