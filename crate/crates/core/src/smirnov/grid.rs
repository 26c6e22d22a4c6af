//! Mollified direction fields on a grid and their flow lines.
//!
//! `f_eps = F * eta_eps` and `tau_eps = |F| * eta_eps + eps * beta` are sampled
//! at cell centres. Flow lines of `sigma = f_eps / tau_eps` transport the
//! measure `tau_eps dx` when `F` is divergence-free, so averaging line
//! integrals over `tau`-distributed seeds reproduces `<Phi, f_eps>`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveField, PolyCurve};
use crate::error::{Error, Result};
use crate::point::{Point, Point2};

/// Kernel truncation radius in units of `eps`.
pub const KERNEL_RADIUS: f64 = 4.0;

/// Lower-left corner, cell size and cell counts of a rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point2,
    pub h: f64,
    pub dims: [usize; 2],
}

impl GridSpec {
    /// Smallest grid of spacing `h` covering the field's vertices with a
    /// margin of `4 eps + 2h`.
    pub fn covering(f: &CurveField<2>, eps: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && eps > 0.0) {
            return Err(Error::InvalidInput(format!("need h > 0 and eps > 0, got h = {h}, eps = {eps}")));
        }
        let mut lo = Point([f64::INFINITY; 2]);
        let mut hi = Point([f64::NEG_INFINITY; 2]);
        for v in f.curves.iter().flat_map(|c| c.vertices()) {
            for k in 0..2 {
                lo.0[k] = lo.0[k].min(v[k]);
                hi.0[k] = hi.0[k].max(v[k]);
            }
        }
        if f.is_empty() {
            lo = Point([0.0, 0.0]);
            hi = lo;
        }
        let m = KERNEL_RADIUS * eps + 2.0 * h;
        let origin = lo - Point([m, m]);
        let nx = (((hi.x() - lo.x()) + 2.0 * m) / h).ceil() as usize + 1;
        let ny = (((hi.y() - lo.y()) + 2.0 * m) / h).ceil() as usize + 1;
        Ok(GridSpec { origin, h, dims: [nx, ny] })
    }

    pub fn centre(&self, i: usize, j: usize) -> Point2 {
        Point([self.origin.x() + (i as f64 + 0.5) * self.h, self.origin.y() + (j as f64 + 0.5) * self.h])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn upper(&self) -> Point2 {
        self.origin + Point([self.dims[0] as f64 * self.h, self.dims[1] as f64 * self.h])
    }
}

/// Sampled `f_eps` and `tau_eps`, row-major (row `j` holds cells `(0..nx, j)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFile")]
pub struct GridField {
    pub origin: Point2,
    pub h: f64,
    pub dims: [usize; 2],
    pub eps: f64,
    pub f_eps: Vec<[f64; 2]>,
    pub tau_eps: Vec<f64>,
    #[serde(skip)]
    sigma: Vec<[f64; 2]>,
    #[serde(skip)]
    div_sigma: Vec<f64>,
}

#[derive(Deserialize)]
struct GridFile {
    origin: Point2,
    h: f64,
    dims: [usize; 2],
    eps: f64,
    f_eps: Vec<[f64; 2]>,
    tau_eps: Vec<f64>,
}

impl TryFrom<GridFile> for GridField {
    type Error = Error;
    fn try_from(g: GridFile) -> Result<Self> {
        GridField::from_arrays(GridSpec { origin: g.origin, h: g.h, dims: g.dims }, g.eps, g.f_eps, g.tau_eps)
    }
}

impl GridField {
    pub fn from_arrays(spec: GridSpec, eps: f64, f_eps: Vec<[f64; 2]>, tau_eps: Vec<f64>) -> Result<Self> {
        let [nx, ny] = spec.dims;
        if nx < 2 || ny < 2 || !(spec.h > 0.0) {
            return Err(Error::InvalidInput(format!("grid needs at least 2x2 cells and h > 0, got {nx}x{ny}, h = {}", spec.h)));
        }
        if f_eps.len() != nx * ny || tau_eps.len() != nx * ny {
            return Err(Error::InvalidInput(format!(
                "expected {} cells, got {} field and {} density values",
                nx * ny,
                f_eps.len(),
                tau_eps.len()
            )));
        }
        if let Some(k) = tau_eps.iter().position(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput(format!("tau must be positive, got {} at cell {k}", tau_eps[k])));
        }
        let sigma: Vec<[f64; 2]> = f_eps.iter().zip(&tau_eps).map(|(f, t)| [f[0] / t, f[1] / t]).collect();
        let mut g = GridField { origin: spec.origin, h: spec.h, dims: spec.dims, eps, f_eps, tau_eps, sigma, div_sigma: vec![] };
        g.div_sigma = g.central_divergence();
        Ok(g)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { origin: self.origin, h: self.h, dims: self.dims }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.dims[0] + i
    }

    /// `Σ tau h²`.
    pub fn total_tau(&self) -> f64 {
        self.tau_eps.iter().sum::<f64>() * self.h * self.h
    }

    fn central_divergence(&self) -> Vec<f64> {
        let [nx, ny] = self.dims;
        let mut div = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (il, ir) = (i.saturating_sub(1), (i + 1).min(nx - 1));
                let (jl, jr) = (j.saturating_sub(1), (j + 1).min(ny - 1));
                let dx = (self.sigma[self.idx(ir, j)][0] - self.sigma[self.idx(il, j)][0]) / ((ir - il) as f64 * self.h);
                let dy = (self.sigma[self.idx(i, jr)][1] - self.sigma[self.idx(i, jl)][1]) / ((jr - jl) as f64 * self.h);
                div[self.idx(i, j)] = dx + dy;
            }
        }
        div
    }

    /// Bilinear stencil at `p`, or `None` outside the hull of cell centres.
    fn stencil(&self, p: Point2) -> Option<([usize; 4], [f64; 4])> {
        let [nx, ny] = self.dims;
        let fx = (p.x() - self.origin.x()) / self.h - 0.5;
        let fy = (p.y() - self.origin.y()) / self.h - 0.5;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (nx - 1) as f64 && fy <= (ny - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(nx - 2);
        let j = (fy.floor() as usize).min(ny - 2);
        let (s, t) = (fx - i as f64, fy - j as f64);
        Some((
            [self.idx(i, j), self.idx(i + 1, j), self.idx(i, j + 1), self.idx(i + 1, j + 1)],
            [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t],
        ))
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.stencil(p).is_some()
    }

    /// Bilinear `sigma_eps = f_eps / tau_eps`.
    pub fn sigma(&self, p: Point2) -> Option<Point2> {
        let (k, w) = self.stencil(p)?;
        let mut v = [0.0; 2];
        for n in 0..4 {
            v[0] += w[n] * self.sigma[k[n]][0];
            v[1] += w[n] * self.sigma[k[n]][1];
        }
        Some(Point(v))
    }

    pub fn tau(&self, p: Point2) -> Option<f64> {
        let (k, w) = self.stencil(p)?;
        Some((0..4).map(|n| w[n] * self.tau_eps[k[n]]).sum())
    }

    /// Bilinear interpolant of the central-difference divergence of `sigma`.
    pub fn div_sigma(&self, p: Point2) -> Option<f64> {
        let (k, w) = self.stencil(p)?;
        Some((0..4).map(|n| w[n] * self.div_sigma[k[n]]).sum())
    }
}

/// Mollifies `f` with a Gaussian of standard deviation `eps` truncated at
/// `4 eps`, normalized on the grid per sample point, and adds `eps * beta`
/// with `beta` a unit Gaussian at the support centroid, normalized on the grid.
pub fn mollify(f: &CurveField<2>, eps: f64, spec: GridSpec) -> Result<GridField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let [nx, ny] = spec.dims;
    let (lo, hi) = (spec.origin, spec.upper());
    let r = KERNEL_RADIUS * eps;
    for v in f.curves.iter().flat_map(|c| c.vertices()) {
        let margin = (v.x() - lo.x()).min(hi.x() - v.x()).min(v.y() - lo.y()).min(hi.y() - v.y());
        if margin < r {
            return Err(Error::InvalidInput(format!("vertex {v:?} is within {r} of the grid edge")));
        }
    }
    let h = spec.h;
    // Midpoint samples of the vector measure, spacing at most h/2.
    let mut samples: Vec<(Point2, Point2, f64)> = Vec::new();
    for c in &f.curves {
        for (a, b) in c.segments() {
            let n = ((a.dist(&b) / (0.5 * h)).ceil() as usize).max(1);
            let d = (b - a) * (1.0 / n as f64);
            for k in 0..n {
                let y = a.lerp(&b, (k as f64 + 0.5) / n as f64);
                samples.push((y, d * c.weight(), c.weight().abs() * d.norm()));
            }
        }
    }
    let mut fe = vec![[0.0; 2]; nx * ny];
    let mut tau = vec![0.0; nx * ny];
    let reach = (r / h).ceil() as i64 + 1;
    let mut weights: Vec<(usize, f64)> = Vec::new();
    for &(y, vec, mass) in &samples {
        let ci = ((y.x() - lo.x()) / h - 0.5).round() as i64;
        let cj = ((y.y() - lo.y()) / h - 0.5).round() as i64;
        weights.clear();
        let mut total = 0.0;
        for j in (cj - reach).max(0)..=(cj + reach).min(ny as i64 - 1) {
            for i in (ci - reach).max(0)..=(ci + reach).min(nx as i64 - 1) {
                let x = spec.centre(i as usize, j as usize);
                let d2 = (x - y).dot(&(x - y));
                if d2 <= r * r {
                    let g = (-0.5 * d2 / (eps * eps)).exp();
                    total += g;
                    weights.push((j as usize * nx + i as usize, g));
                }
            }
        }
        let norm = 1.0 / (total * h * h);
        for &(k, g) in &weights {
            let g = g * norm;
            fe[k][0] += g * vec.x();
            fe[k][1] += g * vec.y();
            tau[k] += g * mass;
        }
    }
    let total_mass: f64 = samples.iter().map(|s| s.2).sum();
    let centroid = if total_mass > 0.0 {
        samples.iter().fold(Point([0.0, 0.0]), |acc, s| acc + s.0 * s.2) * (1.0 / total_mass)
    } else {
        lo.lerp(&hi, 0.5)
    };
    let beta: Vec<f64> = (0..nx * ny)
        .map(|k| {
            let x = spec.centre(k % nx, k / nx);
            (-0.5 * (x - centroid).dot(&(x - centroid))).exp()
        })
        .collect();
    let bsum: f64 = beta.iter().sum::<f64>() * h * h;
    for (t, b) in tau.iter_mut().zip(&beta) {
        *t += eps * b / bsum;
    }
    GridField::from_arrays(spec, eps, fe, tau)
}

fn rk4(gf: &GridField, x: Point2, dt: f64) -> std::result::Result<Point2, Point2> {
    let s = |p: Point2| gf.sigma(p).ok_or(p);
    let k1 = s(x)?;
    let k2 = s(x + k1 * (0.5 * dt))?;
    let k3 = s(x + k2 * (0.5 * dt))?;
    let k4 = s(x + k3 * dt)?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

fn steps(t: f64, dt: f64) -> Result<usize> {
    if !(t >= 0.0 && dt > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("need T >= 0 and dt > 0, got T = {t}, dt = {dt}")));
    }
    Ok(((t / dt).round() as usize).max(1))
}

/// Trajectory vertices up to `T`, and the exit point if it left the grid.
fn trace_vertices(gf: &GridField, seed: Point2, n: usize, dt: f64) -> (Vec<Point2>, Option<Point2>) {
    let mut vs = Vec::with_capacity(n + 1);
    vs.push(seed);
    let mut x = seed;
    for _ in 0..n {
        match rk4(gf, x, dt) {
            Ok(y) => {
                x = y;
                vs.push(x);
            }
            Err(p) => return (vs, Some(p)),
        }
    }
    (vs, None)
}

/// Classical fourth-order integration of `x' = sigma_eps(x)` for time `T`.
pub fn flow_trace(gf: &GridField, seed: Point2, t: f64, dt: f64) -> Result<PolyCurve<2>> {
    if !gf.contains(seed) {
        return Err(Error::LeftGrid(seed.0));
    }
    let (vs, left) = trace_vertices(gf, seed, steps(t, dt)?, dt);
    if let Some(p) = left {
        return Err(Error::LeftGrid(p.0));
    }
    PolyCurve::new(vs, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub lhs: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Trajectories truncated where they left the grid.
    pub left_grid: usize,
}

impl ReconstructReport {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.lhs - self.estimate).abs() <= sigmas * self.stderr
    }
}

/// Monte-Carlo check of `<Phi, f_eps> = ∫ <[[gamma_x]], Phi> tau_eps(x) dx`.
///
/// Seeds are drawn sequentially from a ChaCha8 stream, traced in parallel and
/// reduced in seed order, so the report depends only on the arguments.
pub fn reconstruct_check<P>(gf: &GridField, phi: &P, n: usize, t: f64, dt: f64, seed: u64) -> Result<ReconstructReport>
where
    P: Fn(Point2) -> Point2 + Sync + ?Sized,
{
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
    }
    let nsteps = steps(t, dt)?;
    let h2 = gf.h * gf.h;
    let [nx, ny] = gf.dims;
    let lhs: f64 = (0..nx * ny)
        .map(|k| {
            let x = gf.spec().centre(k % nx, k / nx);
            let p = phi(x);
            p.x() * gf.f_eps[k][0] + p.y() * gf.f_eps[k][1]
        })
        .sum::<f64>()
        * h2;

    let mut cdf = Vec::with_capacity(nx * ny);
    let mut acc = 0.0;
    for &t in &gf.tau_eps {
        acc += t;
        cdf.push(acc);
    }
    let lo = gf.spec().centre(0, 0);
    let hi = gf.spec().centre(nx - 1, ny - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Point2> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(nx * ny - 1);
            let c = gf.spec().centre(k % nx, k / nx);
            let off = Point([rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]) * gf.h;
            let x = c + off;
            Point([x.x().clamp(lo.x(), hi.x()), x.y().clamp(lo.y(), hi.y())])
        })
        .collect();

    // Two-point Gauss rule per step.
    let g = 0.5 / 3f64.sqrt();
    let traced: Vec<(f64, bool)> = seeds
        .par_iter()
        .map(|&x| {
            let (vs, left) = trace_vertices(gf, x, nsteps, dt);
            let mut s = 0.0;
            for w in vs.windows(2) {
                let d = w[1] - w[0];
                let a = phi(w[0].lerp(&w[1], 0.5 - g));
                let b = phi(w[0].lerp(&w[1], 0.5 + g));
                s += 0.5 * (a + b).dot(&d);
            }
            (s, left.is_some())
        })
        .collect();
    let mean = traced.iter().map(|v| v.0).sum::<f64>() / n as f64;
    let var = traced.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let total = gf.total_tau();
    Ok(ReconstructReport {
        lhs,
        estimate: total * mean,
        stderr: total * (var / n as f64).sqrt(),
        samples: n,
        left_grid: traced.iter().filter(|v| v.1).count(),
    })
}

/// `max_t |log tau(gamma(t)) - log tau(gamma(0)) + ∫_0^t div sigma(gamma)|`,
/// with the integral carried as an extra RK4 state component.
pub fn transport_invariant(gf: &GridField, seed: Point2, t: f64, dt: f64) -> Result<f64> {
    let n = steps(t, dt)?;
    let rhs = |p: Point2| -> std::result::Result<(Point2, f64), Point2> {
        Ok((gf.sigma(p).ok_or(p)?, gf.div_sigma(p).ok_or(p)?))
    };
    let tau0 = gf.tau(seed).ok_or(Error::LeftGrid(seed.0))?.ln();
    let (mut x, mut int) = (seed, 0.0);
    let mut drift: f64 = 0.0;
    for _ in 0..n {
        let step = (|| {
            let (k1, d1) = rhs(x)?;
            let (k2, d2) = rhs(x + k1 * (0.5 * dt))?;
            let (k3, d3) = rhs(x + k2 * (0.5 * dt))?;
            let (k4, d4) = rhs(x + k3 * dt)?;
            Ok::<_, Point2>((x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), int + (d1 + 2.0 * d2 + 2.0 * d3 + d4) * dt / 6.0))
        })();
        (x, int) = step.map_err(|p| Error::LeftGrid(p.0))?;
        let tau = gf.tau(x).ok_or(Error::LeftGrid(x.0))?;
        drift = drift.max((tau.ln() - tau0 + int).abs());
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    fn uniform(f: [f64; 2], n: usize, h: f64) -> GridField {
        let spec = GridSpec { origin: p(0.0, 0.0), h, dims: [n, n] };
        GridField::from_arrays(spec, 0.1, vec![f; n * n], vec![1.0; n * n]).unwrap()
    }

    /// Rigid rotation with the radial density `exp(-|x|^2 / 2)` centred at 0.
    fn rotation(h: f64) -> GridField {
        let n = (4.0 / h).round() as usize;
        let spec = GridSpec { origin: p(-2.0, -2.0), h, dims: [n, n] };
        let mut fe = Vec::with_capacity(n * n);
        let mut tau = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = spec.centre(i, j);
                let t = (-0.5 * x.dot(&x)).exp();
                fe.push([-x.y() * t, x.x() * t]);
                tau.push(t);
            }
        }
        GridField::from_arrays(spec, 0.1, fe, tau).unwrap()
    }

    #[test]
    fn constant_field_traces_straight_line() {
        let gf = uniform([1.0, 0.0], 100, 0.02);
        let c = flow_trace(&gf, p(0.3, 0.7), 1.0, 1e-3).unwrap();
        let dev = c.vertices().iter().map(|v| (v.y() - 0.7).abs()).fold(0.0, f64::max);
        assert!(dev <= 1e-12);
        assert!((c.end().x() - 1.3).abs() <= 1e-12);
    }

    #[test]
    fn rotation_keeps_radius() {
        let gf = rotation(0.02);
        let c = flow_trace(&gf, p(1.0, 0.0), 1.0, 1e-2).unwrap();
        let drift = c.vertices().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        // Bilinear interpolation reproduces the linear field exactly.
        assert!(drift < 1e-9, "{drift}");
        assert!((c.end().y() - 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn stationary_seed() {
        let gf = uniform([0.0, 0.0], 20, 0.05);
        let c = flow_trace(&gf, p(0.5, 0.5), 1.0, 1e-2).unwrap();
        assert!(c.length() < 1e-15);
    }

    #[test]
    fn leaving_the_grid_is_reported() {
        let gf = uniform([1.0, 0.0], 20, 0.05);
        assert!(matches!(flow_trace(&gf, p(0.5, 0.5), 1.0, 1e-2), Err(Error::LeftGrid(_))));
        assert!(matches!(flow_trace(&gf, p(5.0, 0.5), 1.0, 1e-2), Err(Error::LeftGrid(_))));
    }

    #[test]
    fn unit_segment_mass() {
        let f = CurveField::new(vec![PolyCurve::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0).unwrap()]);
        let spec = GridSpec::covering(&f, 0.1, 0.02).unwrap();
        let gf = mollify(&f, 0.1, spec).unwrap();
        assert!((gf.total_tau() - 1.1).abs() <= 0.011);
        assert!(gf.tau_eps.iter().all(|&t| t > 0.0));
        let fx: f64 = gf.f_eps.iter().map(|v| v[0]).sum::<f64>() * 0.02 * 0.02;
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_field_is_floor_only() {
        let spec = GridSpec { origin: p(-1.0, -1.0), h: 0.05, dims: [40, 40] };
        let gf = mollify(&CurveField::empty(), 0.1, spec).unwrap();
        assert!(gf.f_eps.iter().all(|v| *v == [0.0, 0.0]));
        assert!((gf.total_tau() - 0.1).abs() < 1e-12);
        let c = spec.centre(20, 20);
        let expect = 0.1 * (-0.5 * c.dot(&c)).exp();
        let ratio = gf.tau(c).unwrap() / expect;
        let far = spec.centre(0, 0);
        assert!((gf.tau(far).unwrap() / (0.1 * (-0.5 * far.dot(&far)).exp()) - ratio).abs() < 1e-9);
    }

    #[test]
    fn margin_is_enforced() {
        let f = CurveField::new(vec![PolyCurve::segment(p(0.0, 0.0), p(1.0, 0.0), 1.0).unwrap()]);
        let spec = GridSpec { origin: p(-0.2, -0.5), h: 0.02, dims: [100, 50] };
        assert!(matches!(mollify(&f, 0.1, spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn grid_file_roundtrip() {
        let f = CurveField::new(vec![PolyCurve::segment(p(0.0, 0.0), p(0.2, 0.1), 1.0).unwrap()]);
        let gf = mollify(&f, 0.05, GridSpec::covering(&f, 0.05, 0.05).unwrap()).unwrap();
        let s = serde_json::to_string(&gf).unwrap();
        assert!(s.starts_with("{\"origin\""));
        let back: GridField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, gf);
    }

    fn bump(x: f64) -> f64 {
        // Smooth, supported in (1.5, 2.5).
        let u = 2.0 * (x - 2.0);
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn constant_patch_reconstructs() {
        let gf = uniform([1.0, 0.0], 150, 0.02);
        let phi = |x: Point2| p(bump(x.x()), 0.0);
        let r = reconstruct_check(&gf, &phi, 4000, 1.0, 1e-2, 7).unwrap();
        assert!(r.within(3.0), "{r:?}");
        assert!(r.left_grid > 0);
        let again = reconstruct_check(&gf, &phi, 4000, 1.0, 1e-2, 7).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn orthogonal_test_field() {
        let gf = uniform([1.0, 0.0], 150, 0.02);
        let phi = |x: Point2| p(0.0, x.x().sin());
        let r = reconstruct_check(&gf, &phi, 2000, 1.0, 1e-2, 3).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.estimate.abs() <= 3.0 * r.stderr + 1e-12);
    }

    #[test]
    fn stderr_scales_like_root_n() {
        let gf = uniform([1.0, 0.0], 150, 0.02);
        let phi = |x: Point2| p(bump(x.x()), 0.0);
        let a = reconstruct_check(&gf, &phi, 2000, 1.0, 1e-2, 11).unwrap();
        let b = reconstruct_check(&gf, &phi, 4000, 1.0, 1e-2, 11).unwrap();
        let r = b.stderr / a.stderr;
        assert!((r - 0.5f64.sqrt()).abs() <= 0.2 * 0.5f64.sqrt(), "{r}");
    }

    #[test]
    fn constant_sigma_has_no_drift() {
        let gf = uniform([0.5, 0.25], 100, 0.02);
        assert!(transport_invariant(&gf, p(0.5, 0.5), 1.0, 1e-2).unwrap() <= 1e-10);
    }

    #[test]
    fn rotation_drift_converges() {
        let d1 = transport_invariant(&rotation(0.04), p(0.8, 0.1), 1.0, 2e-2).unwrap();
        let d2 = transport_invariant(&rotation(0.02), p(0.8, 0.1), 1.0, 1e-2).unwrap();
        assert!(d1 < 5e-3, "{d1}");
        let r = d2 / d1;
        assert!(r < 0.4, "{d1} {d2}");
    }
}
