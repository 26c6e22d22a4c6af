//! The point-dipole field `F_{a,b}(x) = (x-b)/|x-b|² - (x-a)/|x-a|²` and its
//! local mass `∫_{B_R(a)} |F_{a,b}|`.
//!
//! With `|F_{a,b}(x)| = |b-a| / (|x-a| |x-b|)` and the scaling `x = a + |b-a| y`
//! the mass is `|b-a| g(R/|b-a|)`. In polar coordinates the angular integral
//! is a complete elliptic integral, and Landen's transformation leaves
//! `g(ρ) = 4 ∫_0^1 K + 4 ∫_{1/ρ}^1 K(s)/s ds` for `ρ > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point2;
use crate::quadrature::GaussLegendre;

pub fn dipole_field(a: Point2, b: Point2, x: Point2) -> Point2 {
    let u = x - b;
    let v = x - a;
    u * (1.0 / u.dot(&u)) - v * (1.0 / v.dot(&v))
}

/// Complete elliptic integral of the first kind `K(k)`, modulus convention.
pub fn elliptic_k(k: f64) -> f64 {
    elliptic_k_comp((1.0 - k * k).sqrt())
}

/// `K` from the complementary modulus `k' = sqrt(1 - k²)`, accurate as `k → 1`.
fn elliptic_k_comp(kp: f64) -> f64 {
    let (mut a, mut g) = (1.0f64, kp);
    for _ in 0..64 {
        if (a - g).abs() <= 1e-16 * a {
            break;
        }
        (a, g) = (0.5 * (a + g), (a * g).sqrt());
    }
    std::f64::consts::PI / (2.0 * a)
}

/// `K(1 - d)` for `0 < d ≤ 1`.
fn k_below_one(d: f64) -> f64 {
    elliptic_k_comp((d * (2.0 - d)).sqrt())
}

/// `∫_0^span f(d) dd` on a geometric mesh refining toward `d = 0`, where
/// `f` may have a logarithmic singularity.
fn graded(span: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(16);
    (1..=60).map(|j| rule.integrate(span * 0.5f64.powi(j), span * 0.5f64.powi(j - 1), &f)).sum()
}

/// `∫_{B_ρ(0)} dy / (|y| |y - e_1|)`.
fn unit_mass(rho: f64) -> f64 {
    if rho <= 1.0 {
        // 4 ∫_0^ρ K(r) dr with d = ρ - r, so 1 - r = (1 - ρ) + d.
        return 4.0 * graded(rho, |d| k_below_one((1.0 - rho) + d));
    }
    // ∫_{1/ρ}^1 K(s)/s ds: log-variable panels below 1/2, graded above.
    let s0 = 1.0 / rho;
    let split = s0.max(0.5);
    let rule = GaussLegendre::new(16);
    let (u0, u1) = (s0.ln(), split.ln());
    let panels = ((u1 - u0) / 0.25).ceil().max(1.0) as usize;
    let low: f64 = (0..panels)
        .map(|k| {
            let a = u0 + (u1 - u0) * k as f64 / panels as f64;
            let b = u0 + (u1 - u0) * (k + 1) as f64 / panels as f64;
            rule.integrate(a, b, |u| elliptic_k(u.exp()))
        })
        .sum();
    let high = graded(1.0 - split, |d| k_below_one(d) / (1.0 - d));
    4.0 * graded(1.0, k_below_one) + 4.0 * (low + high)
}

/// `∫_{B_R(a)} |F_{a,b}| dx`.
pub fn dipole_mass(separation: f64, radius: f64) -> Result<f64> {
    if !(separation > 0.0 && radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need positive separation and radius, got {separation} and {radius}"
        )));
    }
    Ok(separation * unit_mass(radius / separation))
}

/// `∫_{B_R(a)} |F_{a,b}| dx` by direct polar quadrature around `a`, on meshes
/// graded toward the pole at `b`. Independent of the elliptic reduction.
pub fn dipole_mass_polar(separation: f64, radius: f64) -> Result<f64> {
    if !(separation > 0.0 && radius > separation) {
        return Err(Error::InvalidInput(format!("need 0 < separation < radius, got {separation} and {radius}")));
    }
    let beta = separation;
    let rule = GaussLegendre::new(12);
    // ∫_a^b f, graded toward b (or toward a when `at_end` is false).
    let graded_on = |a: f64, b: f64, at_end: bool, f: &dyn Fn(f64) -> f64| -> f64 {
        (1..=50)
            .map(|j| {
                let (lo, hi) = (1.0 - 0.5f64.powi(j - 1), 1.0 - 0.5f64.powi(j));
                rule.integrate(lo, hi, |t| {
                    let u = if at_end { t } else { 1.0 - t };
                    f(a + (b - a) * u) * (b - a)
                })
            })
            .sum()
    };
    let ring = |r: f64| -> f64 {
        // |x - b|² = (r - β)² + 4 r β sin²(θ/2), free of cancellation near the pole.
        let f = |th: f64| beta / ((r - beta).powi(2) + 4.0 * r * beta * (0.5 * th).sin().powi(2)).sqrt();
        2.0 * graded_on(0.0, std::f64::consts::PI, false, &f)
    };
    Ok(graded_on(0.0, beta, true, &ring) + graded_on(beta, radius, false, &ring))
}

/// `2^{-k} log(1 + 2^k R)`.
pub fn log_model(k: u32, radius: f64) -> f64 {
    let s = 0.5f64.powi(k as i32);
    s * (1.0 + radius / s).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBoundFit {
    /// Least-squares constant for `value ≈ C · model`.
    pub c_fit: f64,
    /// Smallest constant with `value ≤ C · model` on every sample.
    pub c_bound: f64,
    /// `‖value - c_fit · model‖₂ / ‖value‖₂`.
    pub residual: f64,
    pub samples: Vec<(u32, f64, f64)>,
}

/// Masses of `F_{0, 2^{-k} e_1}` on `B_R(0)` against `2^{-k} log(1 + 2^k R)`.
pub fn fit_log_bound(ks: &[u32], radii: &[f64]) -> Result<LogBoundFit> {
    let mut samples = Vec::new();
    for &r in radii {
        for &k in ks {
            samples.push((k, r, dipole_mass(0.5f64.powi(k as i32), r)?));
        }
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let (mut vm, mut mm, mut vv) = (0.0, 0.0, 0.0);
    let mut c_bound: f64 = 0.0;
    for &(k, r, v) in &samples {
        let m = log_model(k, r);
        vm += v * m;
        mm += m * m;
        vv += v * v;
        c_bound = c_bound.max(v / m);
    }
    let c_fit = vm / mm;
    let res2: f64 = samples.iter().map(|&(k, r, v)| (v - c_fit * log_model(k, r)).powi(2)).sum();
    Ok(LogBoundFit { c_fit, c_bound, residual: (res2 / vv).sqrt(), samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    #[test]
    fn field_has_unit_dipole_shape() {
        let f = dipole_field(Point([0.0, 0.0]), Point([1.0, 0.0]), Point([0.5, 0.5]));
        // |F| = |b - a| / (|x - a| |x - b|) = 1 / (1/√2)² = 2.
        assert!((f.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn elliptic_k_values() {
        assert!((elliptic_k(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // K(1/√2) = Γ(1/4)² / (4 √π).
        assert!((elliptic_k(0.5f64.sqrt()) - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn integral_of_k_is_twice_catalan() {
        let v = graded(1.0, k_below_one);
        assert!((v - 2.0 * 0.915_965_594_177_219).abs() < 1e-12, "{v}");
    }

    #[test]
    fn scaling() {
        let a = dipole_mass(0.5, 2.0).unwrap();
        let b = dipole_mass(1.0, 4.0).unwrap();
        assert!((2.0 * a - b).abs() < 1e-12 * b);
    }
}
