//! Polar quadrature on the unit disk.
//!
//! Radially we integrate in `t = |z|^2` (so that `dA = dt dθ / 2π`) with
//! composite Gauss–Legendre panels graded geometrically in `s = 1 - t`
//! toward the circle; angularly we use the trapezoid rule, which is
//! spectrally accurate for smooth periodic integrands. Truncation at `rho`
//! is always explicit.

use std::ops::{Add, Mul};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::geometry::{ComplexPoint, EuclideanDisk};
use crate::par::par_map;

/// Values that can be accumulated by the quadrature rules.
pub trait Quantity: Copy + Send + Sync + Zero + Add<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl Quantity for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quantity for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Radial weight attached to `dA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// Plain normalized area `dA`.
    Area,
    /// `dA_α = (α + 1)(1 - |z|^2)^α dA`, requires `α > -1`.
    Alpha(f64),
    /// Möbius invariant `dλ = dA / (1 - |z|^2)^2`.
    Invariant,
    /// Unnormalized `(1 - |z|^2)^α dA`, any real `α`.
    Power(f64),
}

impl Weight {
    #[inline]
    pub fn at(&self, s: f64) -> f64 {
        match *self {
            Weight::Area => 1.0,
            Weight::Alpha(a) => (a + 1.0) * s.powf(a),
            Weight::Invariant => 1.0 / (s * s),
            Weight::Power(a) => s.powf(a),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Weight::Alpha(a) => require(a > -1.0, "alpha", a, "weighted area needs alpha > -1"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    /// Gauss–Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Minimum trapezoid nodes per ring.
    pub angular_nodes: usize,
    pub max_angular_nodes: usize,
    /// Rings at modulus `m` use at least `boundary_resolution / (1 - m)` angular nodes.
    pub boundary_resolution: f64,
    /// Ratio between consecutive radial panel lengths in `1 - |z|^2`.
    pub panel_ratio: f64,
    /// Truncation radius.
    pub rho: f64,
    pub tol: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            radial_nodes: 12,
            angular_nodes: 128,
            max_angular_nodes: 8192,
            boundary_resolution: 8.0,
            panel_ratio: 4.0,
            rho: 1.0 - 1e-8,
            tol: 1e-8,
        }
    }
}

impl QuadratureScheme {
    /// Cheaper rule used inside pseudo-disks, where integrands are smooth.
    pub fn local() -> Self {
        QuadratureScheme {
            radial_nodes: 12,
            angular_nodes: 48,
            max_angular_nodes: 48,
            tol: 1e-4,
            ..Self::default()
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require(self.radial_nodes >= 2, "radial_nodes", self.radial_nodes as f64, "need at least 2")?;
        require(self.angular_nodes >= 4, "angular_nodes", self.angular_nodes as f64, "need at least 4")?;
        require(self.rho > 0.0 && self.rho < 1.0, "rho", self.rho, "must lie in (0, 1)")?;
        require(self.panel_ratio > 1.0, "panel_ratio", self.panel_ratio, "must exceed 1")?;
        require(self.tol > 0.0, "tol", self.tol, "must be positive")
    }

    /// Number of trapezoid nodes on the ring of the given modulus.
    pub fn angular_count(&self, modulus: f64, at_least: usize) -> usize {
        let cap = self.max_angular_nodes.max(self.angular_nodes);
        let want = (self.boundary_resolution / (1.0 - modulus).max(1e-300)).min(cap as f64) as usize;
        want.max(self.angular_nodes)
            .max(at_least)
            .next_power_of_two()
            .min(cap.max(at_least.next_power_of_two()))
    }

    fn coarsened(&self) -> Self {
        QuadratureScheme {
            radial_nodes: (self.radial_nodes * 2 / 3).max(2),
            angular_nodes: (self.angular_nodes / 2).max(4),
            max_angular_nodes: (self.max_angular_nodes / 2).max(4),
            boundary_resolution: self.boundary_resolution / 2.0,
            ..*self
        }
    }
}

/// A radial quadrature node: `s = 1 - |z|^2` and its weight in `dt`.
#[derive(Debug, Clone, Copy)]
pub struct RadialNode {
    pub s: f64,
    pub weight: f64,
}

impl RadialNode {
    pub fn modulus(&self) -> f64 {
        (1.0 - self.s).max(0.0).sqrt()
    }
}

pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(n.max(2))
        .expect("degree at least 2")
        .into_node_weight_pairs()
}

/// Panel boundaries in `s` covering `[s_lo, s_hi]`, graded toward `s_lo`,
/// with any interior `breaks` inserted.
pub(crate) fn panel_edges(s_lo: f64, s_hi: f64, ratio: f64, breaks: &[f64]) -> Vec<f64> {
    let mut edges = vec![s_lo];
    let mut e = s_lo;
    loop {
        e *= ratio;
        if e >= s_hi {
            break;
        }
        edges.push(e);
    }
    edges.push(s_hi);
    edges.extend(breaks.iter().copied().filter(|&b| b > s_lo && b < s_hi));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1e-300));
    edges
}

/// Radial nodes for the annulus `inner <= |z| <= outer`.
///
/// `breaks` are extra panel edges given as moduli.
pub fn radial_rule(inner: f64, outer: f64, scheme: &QuadratureScheme, breaks: &[f64]) -> Vec<RadialNode> {
    let s_hi = (1.0 - inner) * (1.0 + inner);
    let s_lo = (1.0 - outer) * (1.0 + outer);
    if s_hi <= s_lo {
        return Vec::new();
    }
    let mut s_breaks: Vec<f64> = breaks.iter().map(|&m| (1.0 - m) * (1.0 + m)).collect();
    if inner == 0.0 {
        s_breaks.push(0.75);
    }
    let edges = panel_edges(s_lo, s_hi, scheme.panel_ratio, &s_breaks);
    let gl = gauss_legendre(scheme.radial_nodes);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * gl.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if inner == 0.0 && b == s_hi {
            // Panel touching the origin: t = v^2 absorbs half-integer powers of t.
            let vmax = (1.0 - a).sqrt();
            for &(x, w) in &gl {
                let v = 0.5 * vmax * (x + 1.0);
                nodes.push(RadialNode {
                    s: 1.0 - v * v,
                    weight: 0.5 * vmax * w * 2.0 * v,
                });
            }
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for &(x, w) in &gl {
            nodes.push(RadialNode {
                s: mid + half * x,
                weight: half * w,
            });
        }
    }
    nodes
}

/// Trapezoid mean of `f` over the circle `|z| = modulus` with `count` nodes.
pub fn ring_mean<T: Quantity, F: Fn(ComplexPoint) -> T>(f: &F, modulus: f64, count: usize) -> T {
    let step = std::f64::consts::TAU / count as f64;
    let mut acc = T::zero();
    for j in 0..count {
        acc = acc + f(ComplexPoint::from_polar(modulus, step * j as f64));
    }
    acc * (1.0 / count as f64)
}

/// Integral of `f` over `inner <= |z| <= outer` against the weighted area,
/// without an error estimate. `at_least` raises the angular resolution.
pub fn integrate_annulus<T, F>(
    f: &F,
    weight: Weight,
    inner: f64,
    outer: f64,
    scheme: &QuadratureScheme,
    at_least: usize,
) -> T
where
    T: Quantity,
    F: Fn(ComplexPoint) -> T + Sync,
{
    let nodes = radial_rule(inner, outer, scheme, &[]);
    let parts = par_map(&nodes, |node| {
        let m = node.modulus();
        let count = scheme.angular_count(m, at_least);
        ring_mean(f, m, count) * (node.weight * weight.at(node.s))
    });
    parts.into_iter().fold(T::zero(), |a, b| a + b)
}

/// Integral of `f` over `|z| <= scheme.rho` against the weighted area.
///
/// The result is compared with a coarser rule and rejected when the two
/// disagree by more than `tol * (1 + |value|)`.
pub fn integrate_disk<T, F>(f: F, weight: Weight, scheme: &QuadratureScheme) -> Result<T>
where
    T: Quantity,
    F: Fn(ComplexPoint) -> T + Sync,
{
    integrate_disk_resolved(f, weight, scheme, 0)
}

/// Like [`integrate_disk`] with a floor on the angular resolution of every ring.
pub fn integrate_disk_resolved<T, F>(f: F, weight: Weight, scheme: &QuadratureScheme, at_least: usize) -> Result<T>
where
    T: Quantity,
    F: Fn(ComplexPoint) -> T + Sync,
{
    scheme.validate()?;
    weight.validate()?;
    let fine = integrate_annulus(&f, weight, 0.0, scheme.rho, scheme, at_least);
    let coarse = integrate_annulus(&f, weight, 0.0, scheme.rho, &scheme.coarsened(), at_least / 2);
    check_tolerance(fine, coarse, scheme.tol)
}

fn check_tolerance<T: Quantity>(fine: T, coarse: T, tol: f64) -> Result<T> {
    let err = (fine + coarse * -1.0).magnitude();
    let scale = 1.0 + fine.magnitude();
    if err.is_finite() && err <= tol * scale {
        Ok(fine)
    } else {
        Err(Error::Quadrature {
            estimate: fine.magnitude(),
            error: err,
        })
    }
}

fn pseudo_disk_rule<T, F>(f: &F, disk: &EuclideanDisk, radial: usize, angular: usize) -> T
where
    T: Quantity,
    F: Fn(ComplexPoint) -> T,
{
    // w = c + R sqrt(u) e^{iθ}, dA = R^2 du dθ / 2π.
    let mut acc = T::zero();
    for (x, wt) in gauss_legendre(radial) {
        let u = 0.5 * (x + 1.0);
        let rad = disk.radius * u.sqrt();
        let ring = ring_mean(&|e: ComplexPoint| f(disk.center + e), rad, angular);
        acc = acc + ring * (0.5 * wt);
    }
    acc * disk.area()
}

/// Integral of `f` over a Euclidean disk against normalized area.
pub fn integrate_pseudo_disk<T, F>(f: F, disk: &EuclideanDisk, scheme: &QuadratureScheme) -> Result<T>
where
    T: Quantity,
    F: Fn(ComplexPoint) -> T,
{
    require(disk.radius > 0.0, "radius", disk.radius, "must be positive")?;
    let fine = pseudo_disk_rule(&f, disk, scheme.radial_nodes, scheme.angular_nodes);
    let coarse = pseudo_disk_rule(&f, disk, (scheme.radial_nodes * 2 / 3).max(2), (scheme.angular_nodes / 2).max(4));
    let err = (fine + coarse * -1.0).magnitude();
    if err.is_finite() && err <= scheme.tol * fine.magnitude().max(disk.area() * 1e-12) {
        Ok(fine)
    } else {
        Err(Error::Quadrature {
            estimate: fine.magnitude(),
            error: err,
        })
    }
}

/// `∫ |w|^{2k} (1 - |w|^2)^N dA = k! N! / (k + N + 1)!` in normalized area.
pub fn moment(k: u32, n: u32) -> Result<f64> {
    let total = k as u64 + n as u64;
    if total > 1000 {
        return Err(Error::MomentOverflow(total));
    }
    // 1 / ((k + N + 1) * binom(k + N, k))
    let (small, large) = if k < n { (k, n) } else { (n, k) };
    let mut binom = 1.0f64;
    for i in 1..=small {
        binom = binom * (large + i) as f64 / i as f64;
    }
    Ok(1.0 / ((total + 1) as f64 * binom))
}

/// `∫_0^1 t^x (1 - t)^y dt = B(x + 1, y + 1)` for real `x, y > -1`.
pub fn radial_moment(x: f64, y: f64) -> Result<f64> {
    require(x > -1.0, "x", x, "radial moment diverges at the origin")?;
    require(y > -1.0, "y", y, "radial moment diverges at the circle")?;
    Ok(statrs::function::beta::ln_beta(x + 1.0, y + 1.0).exp())
}
