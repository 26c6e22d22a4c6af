//! Lifting a planar field to a divergence-free field in space, and projecting
//! decomposed space curves back down.
//!
//! The lift puts `+w` copies at height 0 and `-w` copies at height 1, and
//! closes every divergence atom with a vertical unit segment. Decomposing the
//! lift gives closed curves whose height-0 stretches project to a
//! decomposition of the original field.

use crate::curve::{CurveField, PolyCurve};
use crate::error::{Error, Result};
use crate::point::{Point, Point2, Point3};

const Z_TOL: f64 = 1e-12;

fn up(p: Point2, z: f64) -> Point3 {
    Point([p.x(), p.y(), z])
}

fn down(p: Point3) -> Point2 {
    Point([p[0], p[1]])
}

pub fn lift_solenoidal(f: &CurveField<2>) -> CurveField<3> {
    let mut out = CurveField::empty();
    for c in &f.curves {
        let lo: Vec<Point3> = c.vertices().iter().map(|&v| up(v, 0.0)).collect();
        let hi: Vec<Point3> = c.vertices().iter().map(|&v| up(v, 1.0)).collect();
        out.push(PolyCurve::new(lo, c.weight()).unwrap());
        out.push(PolyCurve::new(hi, -c.weight()).unwrap());
    }
    for atom in f.divergence().atoms() {
        out.push(PolyCurve::segment(up(atom.location, 0.0), up(atom.location, 1.0), -atom.coefficient).unwrap());
    }
    debug_assert!(out.divergence().normalized(1e-9 * (1.0 + f.mass())).is_empty());
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Seg {
    Ground,
    Flat,
    Vertical,
}

fn classify(a: Point3, b: Point3) -> Result<Seg> {
    let flat = (a[2] - b[2]).abs() <= Z_TOL;
    if flat {
        return Ok(if a[2].abs() <= Z_TOL { Seg::Ground } else { Seg::Flat });
    }
    if down(a).dist(&down(b)) <= Z_TOL {
        return Ok(Seg::Vertical);
    }
    Err(Error::MalformedLift(format!("slanted segment {a:?} -> {b:?}")))
}

/// Keeps the unique maximal height-0 stretch of each curve, projected to the
/// plane. Curves that never run along height 0 are dropped.
pub fn project_curves(curves: &[PolyCurve<3>]) -> Result<Vec<PolyCurve<2>>> {
    let mut out = Vec::new();
    for c in curves {
        let kinds = c.segments().map(|(a, b)| classify(a, b)).collect::<Result<Vec<_>>>()?;
        let n = kinds.len();
        if kinds.iter().all(|&k| k == Seg::Ground) {
            out.push(PolyCurve::new(c.vertices().iter().map(|&v| down(v)).collect(), c.weight())?);
            continue;
        }
        // Rotate closed curves so the scan starts off the ground.
        let shift = if c.is_closed() { kinds.iter().position(|&k| k != Seg::Ground).unwrap() } else { 0 };
        let at = |i: usize| kinds[(i + shift) % n];
        let vertex = |i: usize| {
            let vs = c.vertices();
            if c.is_closed() {
                vs[(i + shift) % n]
            } else {
                vs[i]
            }
        };
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < n {
            if at(i) == Seg::Ground {
                let s = i;
                while i < n && at(i) == Seg::Ground {
                    i += 1;
                }
                runs.push((s, i));
            } else {
                i += 1;
            }
        }
        match runs.as_slice() {
            [] => continue,
            [(s, e)] => {
                let before_ok = *s == 0 && !c.is_closed() || at((s + n - 1) % n) == Seg::Vertical;
                let after_ok = *e == n && !c.is_closed() || at(*e % n) == Seg::Vertical;
                if !(before_ok && after_ok) {
                    return Err(Error::MalformedLift("height-0 stretch is not bounded by vertical segments".into()));
                }
                let vs: Vec<Point2> = (*s..=*e).map(|k| down(vertex(k))).collect();
                out.push(PolyCurve::new(vs, c.weight())?);
            }
            _ => {
                return Err(Error::MalformedLift(format!("curve meets height 0 in {} separate stretches", runs.len())));
            }
        }
    }
    Ok(out)
}
