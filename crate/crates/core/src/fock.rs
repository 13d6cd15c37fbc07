//! Fock spaces on the plane.
//!
//! `dλ_α(w) = (α/π) e^{-α|w|^2} dv(w)` is the normalized Gaussian measure.
//! Plane measures carry atoms and Gaussian-monomial densities
//! `c w^m (β/π) e^{-β|w|^2} dv`; the synthesis kernel is
//! `e^{α z w̄ - α|w|^2/2}` and functions are handled through `log |f|` so that
//! Gaussian growth never overflows.

use std::f64::consts::{E, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::geometry::ComplexPoint;
use crate::measure::{complex_param, Atom, AtomArcs};
use crate::membership::adaptive_ring_mean;
use crate::par::par_map;
use crate::quadrature::gauss_legendre;
use crate::report::{ScheduleKind, SeminormReport, TrendRule};

pub const DEFAULT_TRUNCATION: f64 = 8.0;

/// Density families on the plane, against Lebesgue measure `dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum PlaneDensity {
    /// `c w^m (β/π) e^{-β|w|^2}`.
    GaussianMonomial {
        m: u32,
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
        beta: f64,
    },
}

impl PlaneDensity {
    /// `c w^m e^{α|w|^2/2} dλ_α`, the density whose synthesis is `c z^m`.
    pub fn fock_monomial(m: u32, c: Complex64, alpha: f64) -> PlaneDensity {
        PlaneDensity::GaussianMonomial {
            m,
            c: 2.0 * c,
            beta: 0.5 * alpha,
        }
    }

    pub fn value(&self, w: ComplexPoint) -> Complex64 {
        match *self {
            PlaneDensity::GaussianMonomial { m, c, beta } => {
                c * w.powi(m as i32) * (beta / PI * (-beta * w.norm_sqr()).exp())
            }
        }
    }

    /// `|density|` at modulus `ρ`; the modulus is radial.
    fn abs_radial(&self, rho: f64) -> f64 {
        match *self {
            PlaneDensity::GaussianMonomial { m, c, beta } => c.norm() * rho.powi(m as i32) * beta / PI * (-beta * rho * rho).exp(),
        }
    }

    pub fn total_variation(&self) -> f64 {
        match *self {
            PlaneDensity::GaussianMonomial { m, c, beta } => {
                c.norm() * statrs::function::gamma::gamma(0.5 * m as f64 + 1.0) / beta.powf(0.5 * m as f64)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PlaneDensity::GaussianMonomial { beta, c, .. } => {
                require(beta > 0.0 && beta.is_finite(), "beta", beta, "must be positive and finite")?;
                require(c.re.is_finite() && c.im.is_finite(), "c", c.norm(), "must be finite")
            }
        }
    }
}

/// Atoms plus Gaussian densities on the plane, evaluated on `|w| ≤ R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub density: Vec<PlaneDensity>,
    #[serde(rename = "R", default = "default_truncation")]
    pub truncation: f64,
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

impl Default for PlaneMeasure {
    fn default() -> Self {
        PlaneMeasure {
            atoms: Vec::new(),
            density: Vec::new(),
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

impl PlaneMeasure {
    pub fn zero() -> PlaneMeasure {
        PlaneMeasure::default()
    }

    pub fn atom(z: ComplexPoint, w: Complex64) -> PlaneMeasure {
        PlaneMeasure {
            atoms: vec![Atom { z, w }],
            ..PlaneMeasure::default()
        }
    }

    pub fn from_density(d: PlaneDensity) -> PlaneMeasure {
        PlaneMeasure {
            density: vec![d],
            ..PlaneMeasure::default()
        }
    }

    pub fn with_truncation(mut self, r: f64) -> PlaneMeasure {
        self.truncation = r;
        self
    }

    /// Parses the measure JSON format; `"space"` must be `"plane"`.
    pub fn from_json(text: &str) -> Result<PlaneMeasure> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("space").and_then(|s| s.as_str()) {
            Some("plane") => {}
            other => {
                return Err(Error::Constraint(format!(
                    "expected a plane measure, found space `{}`",
                    other.unwrap_or("disk")
                )))
            }
        }
        let mu: PlaneMeasure = serde_json::from_value(v)?;
        mu.validate()?;
        Ok(mu)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("space".into(), "plane".into());
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.truncation > 0.0 && self.truncation.is_finite(), "R", self.truncation, "must be positive")?;
        for a in &self.atoms {
            require(a.z.re.is_finite() && a.z.im.is_finite(), "atom", a.z.norm(), "location must be finite")?;
            require(a.w.re.is_finite() && a.w.im.is_finite(), "atom", a.w.norm(), "weight must be finite")?;
        }
        self.density.iter().try_for_each(PlaneDensity::validate)
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.norm()).sum::<f64>() + self.density.iter().map(PlaneDensity::total_variation).sum::<f64>()
    }
}

/// Square grid `d ℤ^2` restricted to `|z| ≤ R + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneLattice {
    pub spacing: f64,
    pub extent: f64,
    pub centers: Vec<ComplexPoint>,
}

impl PlaneLattice {
    pub fn new(spacing: f64, extent: f64) -> Result<PlaneLattice> {
        require(spacing > 0.0 && spacing.is_finite(), "spacing", spacing, "must be positive")?;
        require(extent > 0.0 && extent.is_finite(), "R", extent, "must be positive")?;
        let reach = extent + spacing;
        let n = (reach / spacing).floor() as i64;
        let mut centers = Vec::new();
        for i in -n..=n {
            for j in -n..=n {
                let z = ComplexPoint::new(i as f64 * spacing, j as f64 * spacing);
                if z.norm() <= reach {
                    centers.push(z);
                }
            }
        }
        centers.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap().then(a.arg().partial_cmp(&b.arg()).unwrap()));
        Ok(PlaneLattice { spacing, extent, centers })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `Σ c_k δ_{z_k}`, with the coefficients in center order.
    pub fn atomic_measure(&self, coeffs: &[Complex64]) -> Result<PlaneMeasure> {
        if coeffs.len() != self.len() {
            return Err(Error::CoefficientCount(coeffs.len(), self.len()));
        }
        Ok(PlaneMeasure {
            atoms: self.centers.iter().zip(coeffs).map(|(&z, &w)| Atom { z, w }).collect(),
            density: Vec::new(),
            truncation: self.extent + self.spacing,
        })
    }
}

/// An entire function known through `log |f|`.
pub trait Entire: Sync {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64>;
}

impl<T: Entire + ?Sized> Entire for &T {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64> {
        (**self).log_abs(z)
    }
}

/// Wraps a closure returning `f(z)`.
pub struct EntireFn<F>(pub F);

impl<F: Fn(ComplexPoint) -> Complex64 + Sync> Entire for EntireFn<F> {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64> {
        Ok((self.0)(z).norm().ln())
    }
}

/// `Σ a_j z^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn monomial(m: usize) -> Polynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
        coeffs[m] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0)
    }

    pub fn eval(&self, z: ComplexPoint) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

impl Entire for Polynomial {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64> {
        Ok(self.eval(z).norm().ln())
    }
}

/// `e^{a z^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpQuadratic {
    #[serde(with = "complex_param")]
    pub a: Complex64,
}

impl Entire for ExpQuadratic {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64> {
        Ok((self.a * z * z).re)
    }
}

/// `f(z) = ∫ e^{α z w̄ - α|w|^2/2} dμ(w)` for a plane measure `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockFunction {
    alpha: f64,
    measure: PlaneMeasure,
}

/// Tail of a synthesis integral relative to the absolute integral.
const TAIL_TOL: f64 = 1e-12;

/// Gauss–Legendre panels on `[a, b]` with at most `width` per panel.
fn panels(a: f64, b: f64, width: f64, nodes: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(nodes);
    let count = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    let mut out = Vec::with_capacity(count * gl.len());
    for i in 0..count {
        let mid = a + h * (i as f64 + 0.5);
        for &(x, w) in &gl {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn angular_count(bandwidth: f64) -> usize {
    ((E * bandwidth + 40.0).ceil() as usize).next_power_of_two().min(1 << 14)
}

impl FockFunction {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn measure(&self) -> &PlaneMeasure {
        &self.measure
    }

    /// `(log-term, value)` pairs; atoms are kept as exponents.
    fn atom_exponents(&self, z: ComplexPoint) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let a = self.alpha;
        self.measure
            .atoms
            .iter()
            .map(move |at| (a * z * at.z.conj() - 0.5 * a * at.z.norm_sqr(), at.w))
    }

    /// Density contribution by polar quadrature in `u = γ|w|^2`, with
    /// `γ = β + α/2`.
    fn density_part(&self, d: &PlaneDensity, z: ComplexPoint) -> Result<Complex64> {
        let PlaneDensity::GaussianMonomial { m, c, beta } = *d;
        let a = self.alpha;
        let gamma = beta + 0.5 * a;
        let r_max = self.measure.truncation;
        let zn = z.norm();
        let n = angular_count(a * zn * r_max + m as f64);
        let ring = |rho: f64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let e = Complex64::from_polar(1.0, TAU * j as f64 / n as f64);
                let w = e * rho;
                acc += (a * z * w.conj()).exp() * e.powi(m as i32);
            }
            acc / n as f64 * rho.powi(m as i32)
        };
        // ∫ g dv = (π/γ) ∫_0^{γR^2} e^{-u} ring(√(u/γ)) du.
        let mut total = Complex64::new(0.0, 0.0);
        let mut abs_total = 0.0;
        for (u, w) in panels(0.0, gamma * r_max * r_max, 2.0, 16) {
            let rho = (u / gamma).sqrt();
            total += w * (-u).exp() * ring(rho);
            abs_total += w * (-u + a * zn * rho).exp() * rho.powi(m as i32);
        }
        let scale = c * (beta / PI) * (PI / gamma);
        // Tail beyond R bounded by the radial majorant e^{α|z|ρ - γρ^2} ρ^m.
        let reach = r_max + 12.0 / gamma.sqrt() + a * zn / gamma;
        let mut tail = 0.0;
        for (rho, w) in panels(r_max, reach, 0.5, 16) {
            tail += w * 2.0 * gamma * rho * (a * zn * rho - gamma * rho * rho).exp() * rho.powi(m as i32);
        }
        if tail > TAIL_TOL * abs_total {
            return Err(Error::Truncation {
                radius: r_max,
                tail: tail * scale.norm() * PI / gamma,
            });
        }
        Ok(scale * total)
    }

    pub fn eval(&self, z: ComplexPoint) -> Result<Complex64> {
        let mut acc: Complex64 = self.atom_exponents(z).map(|(e, w)| w * e.exp()).sum();
        for d in &self.measure.density {
            acc += self.density_part(d, z)?;
        }
        Ok(acc)
    }
}

impl Entire for FockFunction {
    fn log_abs(&self, z: ComplexPoint) -> Result<f64> {
        let terms: Vec<(Complex64, Complex64)> = self.atom_exponents(z).filter(|t| t.1.norm() > 0.0).collect();
        let shift = terms.iter().map(|t| t.0.re).fold(0.0f64, f64::max);
        let mut acc: Complex64 = terms.iter().map(|&(e, w)| w * (e - shift).exp()).sum();
        for d in &self.measure.density {
            acc += self.density_part(d, z)? * (-shift).exp();
        }
        Ok(acc.norm().ln() + shift)
    }
}

/// The synthesis `f(z) = ∫ e^{α z w̄ - α|w|^2/2} dμ(w)`.
pub fn synth_fock(mu: &PlaneMeasure, alpha: f64) -> Result<FockFunction> {
    require(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "must be positive")?;
    mu.validate()?;
    Ok(FockFunction {
        alpha,
        measure: mu.clone(),
    })
}

/// Radii `R = k / √α` for `k = 1..=12`.
pub fn default_plane_schedule(alpha: f64) -> Vec<f64> {
    (1..=12).map(|k| k as f64 / alpha.sqrt()).collect()
}

fn check_plane_schedule(schedule: &[f64]) -> Result<()> {
    require(!schedule.is_empty(), "schedule", 0.0, "needs at least one radius")?;
    for w in schedule.windows(2) {
        require(w[1] > w[0], "schedule", w[1], "must be increasing")?;
    }
    require(schedule[0] > 0.0, "R", schedule[0], "must be positive")
}

/// Truncated `(pα/2π) ∫_{|z|≤R} |f(z) e^{-α|z|^2/2}|^p dv(z)`, or the running
/// supremum of `|f(z)| e^{-α|z|^2/2}` when `p = ∞`.
pub fn fock_norm<F: Entire + ?Sized>(f: &F, p: f64, alpha: f64, schedule: &[f64]) -> Result<SeminormReport> {
    require(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "must be positive")?;
    require(p > 0.0, "p", p, "must be positive")?;
    check_plane_schedule(schedule)?;
    let scaled = |z: ComplexPoint| -> Result<f64> { Ok(f.log_abs(z)? - 0.5 * alpha * z.norm_sqr()) };
    let rule = TrendRule::default();
    if p.is_infinite() {
        let mut values = Vec::with_capacity(schedule.len());
        let mut running = f64::NEG_INFINITY;
        let mut inner = 0.0;
        for &r in schedule {
            let steps = ((r - inner) / 0.05).ceil().max(1.0) as usize;
            let radii: Vec<f64> = (0..=steps).map(|i| inner + (r - inner) * i as f64 / steps as f64).collect();
            let sups = par_map(&radii, |&rho| -> Result<f64> {
                let n = ((64.0 * rho).ceil() as usize).max(256);
                let mut best = f64::NEG_INFINITY;
                for j in 0..n {
                    best = best.max(scaled(ComplexPoint::from_polar(rho, TAU * j as f64 / n as f64))?);
                }
                Ok(best)
            });
            for s in sups {
                running = running.max(s?);
            }
            values.push(running.exp().min(f64::MAX));
            inner = r;
        }
        return Ok(SeminormReport::supremum(ScheduleKind::Plane, schedule.to_vec(), values, &rule));
    }
    let norm = p * alpha / TAU;
    let mut values = Vec::with_capacity(schedule.len());
    let mut running = 0.0;
    let mut inner = 0.0;
    for &r in schedule {
        let nodes = panels(inner, r, 0.5 / alpha.sqrt(), 16);
        let parts = par_map(&nodes, |&(rho, w)| -> Result<f64> {
            let probe = (0..16)
                .map(|j| scaled(ComplexPoint::from_polar(rho, TAU * j as f64 / 16.0)))
                .collect::<Result<Vec<f64>>>()?;
            let shift = p * probe.into_iter().fold(f64::NEG_INFINITY, f64::max);
            let shift = if shift.is_finite() { shift } else { 0.0 };
            let mean = adaptive_ring_mean(|th| Ok((p * scaled(ComplexPoint::from_polar(rho, th))? - shift).exp()), 1e-9, 200_000)?;
            Ok(w * TAU * rho * mean * shift.exp())
        });
        for part in parts {
            running += part?;
        }
        values.push((norm * running).min(f64::MAX));
        inner = r;
    }
    Ok(SeminormReport::integral(ScheduleKind::Plane, schedule.to_vec(), values, &rule))
}

/// Probe points for reproducing checks: five radii up to `2/√α`, six angles.
pub fn fock_probes(alpha: f64) -> Vec<ComplexPoint> {
    let mut out = Vec::new();
    for &m in &[0.0, 0.5, 1.0, 1.5, 2.0] {
        for j in 0..6 {
            out.push(ComplexPoint::from_polar(m / alpha.sqrt(), 0.3 + TAU * j as f64 / 6.0));
        }
    }
    out
}

/// `max |f(z) - ∫_{|w|≤R} e^{α z w̄} f(w) dλ_α(w)|` over [`fock_probes`].
pub fn fock_reproduce_check(f: &Polynomial, alpha: f64, r: f64) -> Result<f64> {
    require(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "must be positive")?;
    require(r > 0.0 && r.is_finite(), "R", r, "must be positive")?;
    require(f.degree() <= 8, "degree", f.degree() as f64, "at most 8")?;
    let probes = fock_probes(alpha);
    let nodes = panels(0.0, alpha * r * r, 2.0, 16);
    let residuals = par_map(&probes, |&z| {
        let n = angular_count(alpha * z.norm() * r + f.degree() as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(u, w) in &nodes {
            let rho = (u / alpha).sqrt();
            let mut ring = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let pt = ComplexPoint::from_polar(rho, TAU * j as f64 / n as f64);
                ring += (alpha * z * pt.conj()).exp() * f.eval(pt);
            }
            acc += w * (-u).exp() * ring / n as f64;
        }
        (f.eval(z) - acc).norm()
    });
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Sine-substituted Gauss–Legendre panels on `[a, b]` in the modulus, ending
/// at the given breaks, each at most `width` wide.
fn plane_rule(a: f64, b: f64, breaks: &[f64], width: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![a, b];
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let gl = gauss_legendre(12);
    let mut out = Vec::new();
    for pair in edges.windows(2) {
        let count = ((pair[1] - pair[0]) / width).ceil().max(1.0) as usize;
        let h = (pair[1] - pair[0]) / count as f64;
        for i in 0..count {
            let mid = pair[0] + h * (i as f64 + 0.5);
            for &(x, w) in &gl {
                let angle = 0.5 * PI * x;
                out.push((mid + 0.5 * h * angle.sin(), 0.5 * h * w * 0.5 * PI * angle.cos()));
            }
        }
    }
    out
}

/// `|ν|(D_E(z, r))` for a radial density `ν`, at `|z| = m`.
fn density_disk_mass(density: &[PlaneDensity], r: f64, m: f64) -> f64 {
    if density.is_empty() {
        return 0.0;
    }
    let gl = gauss_legendre(16);
    let n = 64;
    let mut acc = 0.0;
    for &(x, w) in &gl {
        let rho = 0.5 * r * (x + 1.0);
        let mut ring = 0.0;
        for j in 0..n {
            let q = ComplexPoint::new(m, 0.0) + ComplexPoint::from_polar(rho, TAU * j as f64 / n as f64);
            ring += density.iter().map(|d| d.abs_radial(q.norm())).sum::<f64>();
        }
        acc += 0.5 * r * w * rho * TAU * ring / n as f64;
    }
    acc
}

/// Truncated `∫_{|z|≤R} |μ|(D_E(z, r))^p dv(z)` over the schedule, or the
/// running supremum of `|μ|(D_E(z, r))` when `p = ∞`.
pub fn fock_localized_lp(mu: &PlaneMeasure, r: f64, p: f64, schedule: &[f64]) -> Result<SeminormReport> {
    require(r > 0.0 && r.is_finite(), "r", r, "must be positive")?;
    require(p > 0.0, "p", p, "must be positive")?;
    mu.validate()?;
    check_plane_schedule(schedule)?;
    let pts: Vec<(ComplexPoint, f64)> = mu.atoms.iter().map(|a| (a.z, a.w.norm())).collect();
    let arcs = AtomArcs::euclidean(&pts, r);
    let upper = *schedule.last().unwrap();
    let breaks = arcs.breaks(1 << 16, upper);
    let mut values = Vec::with_capacity(schedule.len());
    let mut running = 0.0f64;
    let mut inner = 0.0;
    for &outer in schedule {
        let nodes = plane_rule(inner, outer, &breaks, 0.5);
        let parts = par_map(&nodes, |&(m, w)| {
            let base = density_disk_mass(&mu.density, r, m);
            let (mean, max) = arcs.ring_stats(m, base, p);
            if p.is_infinite() {
                max
            } else {
                w * TAU * m * mean
            }
        });
        for v in parts {
            if p.is_infinite() {
                running = running.max(v);
            } else {
                running += v;
            }
        }
        values.push(running);
        inner = outer;
    }
    let rule = TrendRule::default();
    Ok(if p.is_infinite() {
        SeminormReport::supremum(ScheduleKind::Plane, schedule.to_vec(), values, &rule)
    } else {
        SeminormReport::integral(ScheduleKind::Plane, schedule.to_vec(), values, &rule)
    })
}
