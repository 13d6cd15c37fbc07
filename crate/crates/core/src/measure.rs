//! Complex Borel measures on the disk: atoms plus named density families.
//!
//! Localized values `μ(D(z,r))` integrate densities over the pseudo-disk by
//! pulling it back to `D(0, r)` through `φ_z`, so the cost and accuracy do
//! not degrade as `z` approaches the circle. Integrals of the localized
//! function over the disk treat atoms exactly: on each circle `|z| = m` the
//! atom contribution is piecewise constant in the angle, with jumps where the
//! circle crosses an atom's pseudo-disk.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{require, Error, Result};
use crate::geometry::{boundary_weight, check_in_disk, check_radius, pseudo_disk_unchecked, pseudo_distance_unchecked, ComplexPoint};
use crate::lattice::Lattice;
use crate::par::par_map;
use crate::quadrature::{gauss_legendre, integrate_disk, panel_edges, radial_rule, QuadratureScheme, RadialNode, Weight};
use crate::report::{ScheduleKind, SeminormReport, TrendRule, Verdict};

pub(crate) mod complex_param {
    //! A complex parameter written either as a number or as `[re, im]`.
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => Complex64::new(x, 0.0),
            Repr::Pair([re, im]) => Complex64::new(re, im),
        })
    }

    pub fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

/// Named density families, integrated against normalized area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Density {
    /// `c`.
    Constant {
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
    /// `c (1 - |w|^2)^a`.
    Power {
        a: f64,
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
    /// `c w^m (1 - |w|^2)^N`.
    MonomialPower {
        m: u32,
        #[serde(rename = "N")]
        n: f64,
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
    /// `c (|w| / w) (1 - |w|^2)^N`.
    PhasePower {
        #[serde(rename = "N")]
        n: f64,
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
    /// `c (1 - |w|^2) |f'(w)|^2` with `f = log(1 / (1 - w))`.
    BlochLog {
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
    /// `c (1 - |w|^2)^a log(1 / (1 - |w|^2))`.
    LogWeight {
        a: f64,
        #[serde(with = "complex_param", default = "complex_param::one")]
        c: Complex64,
    },
}

impl Density {
    /// Normalized area measure.
    pub fn area() -> Density {
        Density::Constant {
            c: Complex64::new(1.0, 0.0),
        }
    }

    pub fn coefficient(&self) -> Complex64 {
        match *self {
            Density::Constant { c }
            | Density::Power { c, .. }
            | Density::MonomialPower { c, .. }
            | Density::PhasePower { c, .. }
            | Density::BlochLog { c }
            | Density::LogWeight { c, .. } => c,
        }
    }

    pub fn scaled(&self, k: Complex64) -> Density {
        let mut d = *self;
        match &mut d {
            Density::Constant { c }
            | Density::Power { c, .. }
            | Density::MonomialPower { c, .. }
            | Density::PhasePower { c, .. }
            | Density::BlochLog { c }
            | Density::LogWeight { c, .. } => *c *= k,
        }
        d
    }

    /// Angular frequency `q` when the density has the form `g(|w|^2) e^{iqθ}`.
    pub fn phase_order(&self) -> Option<i64> {
        match *self {
            Density::Constant { .. } | Density::Power { .. } | Density::LogWeight { .. } => Some(0),
            Density::MonomialPower { m, .. } => Some(m as i64),
            Density::PhasePower { .. } => Some(-1),
            Density::BlochLog { .. } => None,
        }
    }

    /// The radial factor `g(t)`, `t = |w|^2`, for densities with a phase order.
    pub fn radial(&self, t: f64) -> Complex64 {
        let s = 1.0 - t;
        match *self {
            Density::Constant { c } => c,
            Density::Power { a, c } => c * s.powf(a),
            Density::MonomialPower { m, n, c } => c * t.powf(0.5 * m as f64) * s.powf(n),
            Density::PhasePower { n, c } => c * s.powf(n),
            Density::LogWeight { a, c } => c * s.powf(a) * (-s.ln()),
            Density::BlochLog { c } => c * f64::NAN,
        }
    }

    pub fn value(&self, w: ComplexPoint) -> Complex64 {
        let s = boundary_weight(w);
        match *self {
            Density::Constant { c } => c,
            Density::Power { a, c } => c * s.powf(a),
            Density::MonomialPower { m, n, c } => c * w.powu(m) * s.powf(n),
            Density::PhasePower { n, c } => {
                let m = w.norm();
                if m == 0.0 {
                    c * s.powf(n)
                } else {
                    c * (w.conj() / m) * s.powf(n)
                }
            }
            Density::BlochLog { c } => c * (s / (1.0 - w).norm_sqr()),
            Density::LogWeight { a, c } => c * s.powf(a) * (-s.ln()),
        }
    }

    /// Mean of `|density|` over the circle `|w| = m`, when known in closed form.
    fn ring_mean_abs(&self, m: f64) -> Option<f64> {
        match *self {
            // The circle mean of 1/|1 - w|^2 is 1/(1 - m^2).
            Density::BlochLog { c } => Some(c.norm()),
            _ => Some(self.radial(m * m).norm()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: ComplexPoint,
    #[serde(with = "complex_param")]
    pub w: Complex64,
}

/// `Σ w_n δ_{z_n}` plus a sum of density families times `dA`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Measure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(
        default,
        serialize_with = "densities_out",
        deserialize_with = "densities_in",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub density: Vec<Density>,
}

fn densities_out<S: Serializer>(d: &[Density], s: S) -> std::result::Result<S::Ok, S::Error> {
    if d.len() == 1 {
        d[0].serialize(s)
    } else {
        d.serialize(s)
    }
}

fn densities_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Density>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Density),
        Many(Vec<Density>),
        Null(()),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
        OneOrMany::Null(()) => Vec::new(),
    })
}

impl Measure {
    pub fn zero() -> Measure {
        Measure::default()
    }

    pub fn atom(z: ComplexPoint, w: Complex64) -> Measure {
        Measure {
            atoms: vec![Atom { z, w }],
            density: Vec::new(),
        }
    }

    pub fn from_density(d: Density) -> Measure {
        Measure {
            atoms: Vec::new(),
            density: vec![d],
        }
    }

    pub fn area() -> Measure {
        Self::from_density(Density::area())
    }

    /// Parses the measure JSON format, rejecting plane measures.
    pub fn from_json(text: &str) -> Result<Measure> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if let Some(space) = v.get("space").and_then(|s| s.as_str()) {
            if space != "disk" {
                return Err(Error::Constraint(format!("expected a disk measure, found space `{space}`")));
            }
        }
        let mu: Measure = serde_json::from_value(v)?;
        mu.validate()?;
        Ok(mu)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            check_in_disk(a.z)?;
            require(a.w.re.is_finite() && a.w.im.is_finite(), "weight", a.w.norm(), "must be finite")?;
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.w == Complex64::new(0.0, 0.0))
            && self.density.iter().all(|d| d.coefficient() == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, k: Complex64) -> Measure {
        Measure {
            atoms: self.atoms.iter().map(|a| Atom { z: a.z, w: a.w * k }).collect(),
            density: self.density.iter().map(|d| d.scaled(k)).collect(),
        }
    }

    pub fn plus(&self, other: &Measure) -> Measure {
        let mut out = self.clone();
        out.atoms.extend_from_slice(&other.atoms);
        out.density.extend_from_slice(&other.density);
        out
    }

    /// `(1 - |w|^2)^2 dμ`, restricted to atoms.
    pub fn atoms_weighted_by_boundary(&self, power: f64) -> Measure {
        Measure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    z: a.z,
                    w: a.w * boundary_weight(a.z).powf(power),
                })
                .collect(),
            density: Vec::new(),
        }
    }

    pub fn density_value(&self, w: ComplexPoint) -> Complex64 {
        self.density.iter().map(|d| d.value(w)).sum()
    }

    /// `|Σ densities|` depends on `|w|` only.
    fn density_modulus_is_radial(&self) -> bool {
        match self.density.first() {
            None => true,
            Some(first) => {
                let q = first.phase_order();
                q.is_some() && self.density.iter().all(|d| d.phase_order() == q)
            }
        }
    }
}

/// Resolution of the pulled-back rule on `D(0, r)`.
fn pullback_resolution(r: f64) -> (usize, usize) {
    let angular = ((36.0 / -r.ln()).ceil() as usize).clamp(32, 2048).next_power_of_two();
    let radial = ((10.0 / (1.0 - r)).ceil() as usize).clamp(16, 128);
    (radial, angular)
}

/// `∫_{D(z,r)} F dA = ∫_{|u|<r} F(φ_z(u)) |φ_z'(u)|^2 dA(u)`.
fn pullback_integral<T, F>(f: F, z: ComplexPoint, r: f64) -> T
where
    T: crate::quadrature::Quantity,
    F: Fn(ComplexPoint) -> T,
{
    let (nr, na) = pullback_resolution(r);
    let sz = boundary_weight(z);
    let zc = z.conj();
    let step = TAU / na as f64;
    let mut acc = T::zero();
    for (x, wt) in gauss_legendre(nr) {
        let tau = 0.5 * r * r * (x + 1.0);
        let rad = tau.sqrt();
        let mut ring = T::zero();
        for j in 0..na {
            let u = ComplexPoint::from_polar(rad, step * (j as f64 + 0.5));
            let den = 1.0 - zc * u;
            let w = (z - u) / den;
            let jac = sz * sz / den.norm_sqr().powi(2);
            ring = ring + f(w) * jac;
        }
        acc = acc + ring * (0.5 * r * r * wt / na as f64);
    }
    acc
}

fn density_localized(mu: &Measure, r: f64, z: ComplexPoint, variation: bool) -> Complex64 {
    if mu.density.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    if variation {
        Complex64::new(pullback_integral(|w| mu.density_value(w).norm(), z, r), 0.0)
    } else {
        pullback_integral(|w| mu.density_value(w), z, r)
    }
}

/// `μ(D(z, r))`, or `|μ|(D(z, r))` when `variation` is set.
pub fn localized(mu: &Measure, r: f64, z: ComplexPoint, variation: bool) -> Result<Complex64> {
    check_in_disk(z)?;
    check_radius(r)?;
    let mut total = density_localized(mu, r, z, variation);
    for a in &mu.atoms {
        if pseudo_distance_unchecked(z, a.z) < r {
            total += if variation { Complex64::new(a.w.norm(), 0.0) } else { a.w };
        }
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Quadrature {
            estimate: total.norm(),
            error: f64::INFINITY,
        });
    }
    Ok(total)
}

/// `|μ|(D(z, r))`.
pub fn localized_variation(mu: &Measure, r: f64, z: ComplexPoint) -> Result<f64> {
    Ok(localized(mu, r, z, true)?.re)
}

/// `|μ|(D(z, r)) / (1 - |z|^2)^2`.
pub fn averaged(mu: &Measure, r: f64, z: ComplexPoint) -> Result<f64> {
    Ok(localized_variation(mu, r, z)? / boundary_weight(z).powi(2))
}

/// Berezin transform of `|μ|` (or of `μ` itself when `variation` is false).
pub fn berezin(mu: &Measure, z: ComplexPoint, variation: bool) -> Result<Complex64> {
    check_in_disk(z)?;
    let mass = total_mass(mu, &crate::report::default_rho_schedule(), &QuadratureScheme::default())?;
    if mass.verdict != Verdict::Converged {
        return Err(Error::InfiniteMass {
            verdict: mass.verdict.to_string(),
        });
    }
    let sz = boundary_weight(z);
    let mut total = Complex64::new(0.0, 0.0);
    for a in &mu.atoms {
        let k = sz * sz / (1.0 - z * a.z.conj()).norm_sqr().powi(2);
        total += if variation { Complex64::new(a.w.norm() * k, 0.0) } else { a.w * k };
    }
    if !mu.density.is_empty() {
        // The transform of a density is its mean over the disk after composing with φ_z.
        let phi = |u: ComplexPoint| (z - u) / (1.0 - z.conj() * u);
        let scheme = QuadratureScheme {
            tol: 1e-6,
            ..QuadratureScheme::default()
        };
        total += if variation {
            Complex64::new(integrate_disk(|u| mu.density_value(phi(u)).norm(), Weight::Area, &scheme)?, 0.0)
        } else {
            integrate_disk(|u| mu.density_value(phi(u)), Weight::Area, &scheme)?
        };
    }
    Ok(total)
}

/// A functional `z ↦ |μ|(D(z,r)) (1 - |z|^2)^{scale_power}` measured in
/// `L^p(dλ)`, or by its supremum when `p` is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedFunctional {
    pub r: f64,
    pub p: f64,
    pub scale_power: f64,
}

impl LocalizedFunctional {
    pub fn localized(r: f64, p: f64) -> Self {
        LocalizedFunctional { r, p, scale_power: 0.0 }
    }

    pub fn averaged(r: f64, p: f64) -> Self {
        LocalizedFunctional { r, p, scale_power: -2.0 }
    }

    /// The `t`-Carleson quotient `|μ|(D(z,r)) / (1 - |z|^2)^t`, taken as a supremum.
    pub fn carleson(r: f64, t: f64) -> Self {
        LocalizedFunctional {
            r,
            p: f64::INFINITY,
            scale_power: -t,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ArcAtom {
    modulus: f64,
    lo: f64,
    hi: f64,
    center_norm: f64,
    center_arg: f64,
    radius: f64,
    weight: f64,
}

/// Atoms seen through their pseudo-disks, sorted by modulus so that the
/// atoms whose disk meets a given circle form a contiguous range.
pub(crate) struct AtomArcs {
    items: Vec<ArcAtom>,
}

impl AtomArcs {
    /// Atoms `(location, |weight|)` seen through Euclidean disks of radius `r`.
    pub(crate) fn euclidean(points: &[(ComplexPoint, f64)], r: f64) -> AtomArcs {
        let mut items: Vec<ArcAtom> = points
            .iter()
            .filter(|a| a.1 > 0.0)
            .map(|&(z, weight)| {
                let d = z.norm();
                ArcAtom {
                    modulus: d,
                    lo: d - r,
                    hi: d + r,
                    center_norm: d,
                    center_arg: z.arg(),
                    radius: r,
                    weight,
                }
            })
            .collect();
        items.sort_by(|a, b| a.modulus.partial_cmp(&b.modulus).unwrap());
        AtomArcs { items }
    }

    fn new(mu: &Measure, r: f64) -> AtomArcs {
        let mut items: Vec<ArcAtom> = mu
            .atoms
            .iter()
            .filter(|a| a.w.norm() > 0.0)
            .map(|a| {
                let disk = pseudo_disk_unchecked(a.z, r);
                let d = disk.center.norm();
                ArcAtom {
                    modulus: a.z.norm(),
                    lo: d - disk.radius,
                    hi: d + disk.radius,
                    center_norm: d,
                    center_arg: disk.center.arg(),
                    radius: disk.radius,
                    weight: a.w.norm(),
                }
            })
            .collect();
        items.sort_by(|a, b| a.modulus.partial_cmp(&b.modulus).unwrap());
        AtomArcs { items }
    }

    fn meeting(&self, m: f64) -> &[ArcAtom] {
        let start = self.items.partition_point(|a| a.hi <= m);
        let end = self.items.partition_point(|a| a.lo < m);
        if start >= end {
            &[]
        } else {
            &self.items[start..end]
        }
    }

    /// Tangency radii inside `(0, upper)`, deduplicated.
    pub(crate) fn breaks(&self, limit: usize, upper: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .items
            .iter()
            .flat_map(|a| [a.lo.abs(), a.hi])
            .filter(|&x| x > 0.0 && x < upper)
            .collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        if b.len() > limit {
            Vec::new()
        } else {
            b
        }
    }

    /// Mean of `(base + A(θ))^p` over the circle `|z| = m`, and the maximum of
    /// `base + A(θ)`, where `A` is the atom contribution.
    pub(crate) fn ring_stats(&self, m: f64, base: f64, p: f64) -> (f64, f64) {
        let mut full = 0.0;
        let mut events: Vec<(f64, f64, i32)> = Vec::new();
        for a in self.meeting(m) {
            if m + a.center_norm <= a.radius {
                full += a.weight;
                continue;
            }
            let cos = (m * m + a.center_norm * a.center_norm - a.radius * a.radius) / (2.0 * m * a.center_norm);
            let half = cos.clamp(-1.0, 1.0).acos();
            if half <= 0.0 {
                continue;
            }
            if half >= PI {
                full += a.weight;
                continue;
            }
            let start = (a.center_arg - half).rem_euclid(TAU);
            let end = start + 2.0 * half;
            events.push((start, a.weight, 1));
            if end <= TAU {
                events.push((end, -a.weight, -1));
            } else {
                events.push((TAU, -a.weight, -1));
                events.push((0.0, a.weight, 1));
                events.push((end - TAU, -a.weight, -1));
            }
        }
        let floor = base + full;
        let power = |v: f64| if p.is_infinite() || v <= 0.0 { 0.0 } else { v.powf(p) };
        if events.is_empty() {
            return (power(floor), floor);
        }
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.2.cmp(&y.2)));
        let mut acc = 0.0;
        let mut level = 0.0;
        let mut active = 0i32;
        let mut prev = 0.0;
        let mut max = floor;
        for (angle, dw, dn) in events {
            let len = angle - prev;
            if len > 0.0 {
                let v = if active == 0 { floor } else { floor + level };
                acc += len * power(v);
                max = max.max(v);
            }
            prev = angle;
            level += dw;
            active += dn;
            if active == 0 {
                level = 0.0;
            }
        }
        acc += (TAU - prev) * power(floor);
        (acc / TAU, max)
    }
}

/// Radial nodes whose panels end at the tangency radii, with a sine
/// substitution on each panel so that square-root behaviour at the panel
/// ends does not spoil the Gauss–Legendre rate.
fn tangent_rule(inner: f64, outer: f64, scheme: &QuadratureScheme, breaks: &[f64]) -> Vec<RadialNode> {
    if breaks.is_empty() {
        return radial_rule(inner, outer, scheme, breaks);
    }
    let s_hi = (1.0 - inner) * (1.0 + inner);
    let s_lo = (1.0 - outer) * (1.0 + outer);
    if s_hi <= s_lo {
        return Vec::new();
    }
    let s_breaks: Vec<f64> = breaks.iter().map(|&m| (1.0 - m) * (1.0 + m)).collect();
    let edges = panel_edges(s_lo, s_hi, scheme.panel_ratio, &s_breaks);
    let gl = gauss_legendre(scheme.radial_nodes);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * gl.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for &(x, w) in &gl {
            let angle = 0.5 * PI * x;
            nodes.push(RadialNode {
                s: mid + half * angle.sin(),
                weight: half * w * 0.5 * PI * angle.cos(),
            });
        }
    }
    nodes
}

/// Truncated values of a localized functional over the schedule.
pub fn localized_functional(
    mu: &Measure,
    f: LocalizedFunctional,
    schedule: &[f64],
    scheme: &QuadratureScheme,
) -> Result<SeminormReport> {
    check_radius(f.r)?;
    require(f.p > 0.0, "p", f.p, "must be positive")?;
    mu.validate()?;
    require(!schedule.is_empty(), "schedule", 0.0, "needs at least one radius")?;
    for w in schedule.windows(2) {
        require(w[1] > w[0], "schedule", w[1], "must be increasing")?;
    }
    let arcs = AtomArcs::new(mu, f.r);
    let breaks = arcs.breaks(4096, 1.0);
    let radial_density = mu.density_modulus_is_radial();
    let ring = |m: f64| -> (f64, f64) {
        if mu.density.is_empty() || radial_density {
            let base = if mu.density.is_empty() {
                0.0
            } else {
                density_localized(mu, f.r, ComplexPoint::new(m, 0.0), true).re
            };
            arcs.ring_stats(m, base, f.p)
        } else {
            let count = scheme.angular_count(m, 0).min(512);
            let mut mean = 0.0;
            let mut max = 0.0f64;
            for j in 0..count {
                let z = ComplexPoint::from_polar(m, TAU * j as f64 / count as f64);
                let mut v = density_localized(mu, f.r, z, true).re;
                for a in arcs.meeting(m) {
                    let c = ComplexPoint::from_polar(a.center_norm, a.center_arg);
                    if (z - c).norm() < a.radius {
                        v += a.weight;
                    }
                }
                if f.p.is_finite() && v > 0.0 {
                    mean += v.powf(f.p);
                }
                max = max.max(v);
            }
            (mean / count as f64, max)
        }
    };
    let mut values = Vec::with_capacity(schedule.len());
    let mut running = 0.0f64;
    let mut inner = 0.0;
    for &rho in schedule {
        let nodes = tangent_rule(inner, rho, scheme, &breaks);
        let parts = par_map(&nodes, |node| {
            let m = node.modulus();
            let (mean, max) = ring(m);
            let s = node.s;
            if f.p.is_infinite() {
                max * s.powf(f.scale_power)
            } else {
                node.weight * mean * s.powf(f.p * f.scale_power - 2.0)
            }
        });
        if f.p.is_infinite() {
            running = parts.into_iter().fold(running, f64::max);
        } else {
            running += parts.into_iter().sum::<f64>();
        }
        values.push(running);
        inner = rho;
    }
    let rule = TrendRule::default();
    Ok(if f.p.is_infinite() {
        SeminormReport::supremum(ScheduleKind::Disk, schedule.to_vec(), values, &rule)
    } else {
        SeminormReport::integral(ScheduleKind::Disk, schedule.to_vec(), values, &rule)
    })
}

/// Truncated `∫_{|z|≤ρ} |μ|(D(z,r))^p dλ(z)` (running sup when `p` is infinite).
pub fn localized_lp_norm(
    mu: &Measure,
    r: f64,
    p: f64,
    schedule: &[f64],
    scheme: &QuadratureScheme,
) -> Result<SeminormReport> {
    localized_functional(mu, LocalizedFunctional::localized(r, p), schedule, scheme)
}

/// Values and norm of `{|μ|_r(z_n)}` or `{μ̂_r(z_n)}` over lattice centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceNorm {
    pub p: f64,
    pub averaged: bool,
    pub norm: f64,
    pub values: Vec<f64>,
}

fn center_values(mu: &Measure, lat: &Lattice, r: f64, averaged: bool) -> Result<Vec<f64>> {
    check_radius(r)?;
    mu.validate()?;
    let mut atoms: Vec<(f64, ComplexPoint, f64)> =
        mu.atoms.iter().map(|a| (a.z.norm().atanh(), a.z, a.w.norm())).collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let reach = r.atanh();
    let values = par_map(lat.centers(), |&c| {
        let beta = c.norm().atanh();
        let lo = atoms.partition_point(|a| a.0 < beta - reach - 1e-12);
        let hi = atoms.partition_point(|a| a.0 <= beta + reach + 1e-12);
        let mut v: f64 = atoms[lo..hi]
            .iter()
            .filter(|a| pseudo_distance_unchecked(c, a.1) < r)
            .map(|a| a.2)
            .sum();
        v += density_localized(mu, r, c, true).re;
        if averaged {
            v /= boundary_weight(c).powi(2);
        }
        v
    });
    Ok(values)
}

/// `ℓ^p` norm of the localized or averaged function sampled at lattice centers.
pub fn sequence_lp(mu: &Measure, lat: &Lattice, r: f64, p: f64, averaged: bool) -> Result<SequenceNorm> {
    require(p > 0.0, "p", p, "must be positive")?;
    let values = center_values(mu, lat, r, averaged)?;
    let norm = if p.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    Ok(SequenceNorm {
        p,
        averaged,
        norm,
        values,
    })
}

/// Partial sums `Σ_{|z_n| ≤ ρ} v_n^p` (running sup when `p` is infinite) over the schedule.
pub fn sequence_lp_report(
    mu: &Measure,
    lat: &Lattice,
    r: f64,
    p: f64,
    averaged: bool,
    schedule: &[f64],
) -> Result<SeminormReport> {
    require(p > 0.0, "p", p, "must be positive")?;
    let values = center_values(mu, lat, r, averaged)?;
    let centers = lat.centers();
    let mut out = Vec::with_capacity(schedule.len());
    let mut running = 0.0f64;
    let mut next = 0;
    for &rho in schedule {
        while next < centers.len() && centers[next].norm() <= rho {
            let v = values[next];
            running = if p.is_infinite() { running.max(v) } else { running + v.powf(p) };
            next += 1;
        }
        out.push(running);
    }
    let rule = TrendRule::default();
    Ok(if p.is_infinite() {
        SeminormReport::supremum(ScheduleKind::Disk, schedule.to_vec(), out, &rule)
    } else {
        SeminormReport::integral(ScheduleKind::Disk, schedule.to_vec(), out, &rule)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Localized,
    Averaged,
    Berezin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub kind: ProfileKind,
    pub probes: Vec<ComplexPoint>,
    pub values: Vec<f64>,
}

/// Total-variation profile of `μ` at the given probes.
pub fn profile(mu: &Measure, kind: ProfileKind, r: f64, probes: &[ComplexPoint]) -> Result<MeasureProfile> {
    let values = par_map(probes, |&z| match kind {
        ProfileKind::Localized => localized_variation(mu, r, z),
        ProfileKind::Averaged => averaged(mu, r, z),
        ProfileKind::Berezin => berezin(mu, z, true).map(|v| v.re),
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(MeasureProfile {
        kind,
        probes: probes.to_vec(),
        values,
    })
}

/// Probe grid: `angles` rays at moduli `0` and `1 - 10^{-k/4}` up to `rho_max`.
pub fn carleson_probes(angles: usize, rho_max: f64) -> Vec<ComplexPoint> {
    let mut out = vec![ComplexPoint::new(0.0, 0.0)];
    let mut k = 1;
    loop {
        let m = 1.0 - 10f64.powf(-(k as f64) / 4.0);
        if m > rho_max {
            break;
        }
        for j in 0..angles.max(1) {
            out.push(ComplexPoint::from_polar(m, TAU * j as f64 / angles.max(1) as f64));
        }
        k += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonProfile {
    pub t: f64,
    pub r: f64,
    pub probes: Vec<ComplexPoint>,
    pub values: Vec<f64>,
    pub constant: f64,
}

impl CarlesonProfile {
    /// Running maximum of the quotient over probes with `|z| ≤ ρ`.
    pub fn shell_sup(&self, schedule: &[f64]) -> Vec<f64> {
        schedule
            .iter()
            .map(|&rho| {
                self.probes
                    .iter()
                    .zip(&self.values)
                    .filter(|(z, _)| z.norm() <= rho)
                    .map(|(_, &v)| v)
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// `max |μ|(D(z,r)) / (1 - |z|^2)^t` over the probes, with the profile kept.
pub fn carleson_constant(mu: &Measure, t: f64, r: f64, probes: &[ComplexPoint]) -> Result<CarlesonProfile> {
    require(t > 0.0, "t", t, "must be positive")?;
    let loc = profile(mu, ProfileKind::Localized, r, probes)?;
    let values: Vec<f64> = probes
        .iter()
        .zip(&loc.values)
        .map(|(z, v)| v / boundary_weight(*z).powf(t))
        .collect();
    let constant = values.iter().copied().fold(0.0, f64::max);
    Ok(CarlesonProfile {
        t,
        r,
        probes: probes.to_vec(),
        values,
        constant,
    })
}

/// Truncated `∫_{|w|≤ρ} g(1 - |w|^2) d|μ|(w)` over the schedule.
pub fn weighted_mass<G: Fn(f64) -> f64 + Sync>(
    mu: &Measure,
    g: G,
    schedule: &[f64],
    scheme: &QuadratureScheme,
) -> Result<SeminormReport> {
    mu.validate()?;
    let radial = mu.density_modulus_is_radial();
    let ring_abs = |m: f64| -> f64 {
        match mu.density.as_slice() {
            [] => 0.0,
            [single] => single.ring_mean_abs(m).unwrap_or(0.0),
            _ if radial => mu.density.iter().map(|d| d.radial(m * m)).sum::<Complex64>().norm(),
            _ => crate::quadrature::ring_mean(&|z| mu.density_value(z).norm(), m, scheme.angular_count(m, 0)),
        }
    };
    let mut atoms: Vec<(f64, f64)> = mu.atoms.iter().map(|a| (a.z.norm(), a.w.norm() * g(boundary_weight(a.z)))).collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut values = Vec::with_capacity(schedule.len());
    let mut running = 0.0f64;
    let mut inner = 0.0;
    let mut next = 0;
    for &rho in schedule {
        while next < atoms.len() && atoms[next].0 <= rho {
            running += atoms[next].1;
            next += 1;
        }
        if !mu.density.is_empty() {
            let nodes = radial_rule(inner, rho, scheme, &[]);
            running += par_map(&nodes, |n| n.weight * g(n.s) * ring_abs(n.modulus()))
                .into_iter()
                .sum::<f64>();
        }
        values.push(running);
        inner = rho;
    }
    Ok(SeminormReport::integral(ScheduleKind::Disk, schedule.to_vec(), values, &TrendRule::default()))
}

/// Truncated `|μ|({|z| ≤ ρ})` over the schedule.
pub fn total_mass(mu: &Measure, schedule: &[f64], scheme: &QuadratureScheme) -> Result<SeminormReport> {
    weighted_mass(mu, |_| 1.0, schedule, scheme)
}

/// Truncated `∫ log(1 / (1 - |w|^2)) d|μ|(w)`.
pub fn log_moment(mu: &Measure, schedule: &[f64], scheme: &QuadratureScheme) -> Result<SeminormReport> {
    weighted_mass(mu, |s| -s.ln(), schedule, scheme)
}

/// The constant `r^2 / (1 - r^2)` with `∫ μ_r dλ = C_r μ(D)` for positive `μ`.
pub fn cr_constant(r: f64) -> f64 {
    r * r / (1.0 - r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::default_rho_schedule;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn atom_membership_is_strict() {
        let mu = Measure::atom(c(0.0, 0.0), one());
        assert_eq!(localized(&mu, 0.5, c(0.0, 0.0), false).unwrap(), one());
        assert_eq!(localized(&mu, 0.5, c(0.9, 0.0), false).unwrap().norm(), 0.0);
        assert_eq!(localized(&mu, 0.5, c(0.5, 0.0), false).unwrap().norm(), 0.0);
    }

    #[test]
    fn area_density_localized_and_averaged() {
        let mu = Measure::area();
        let v = localized_variation(&mu, 0.5, c(0.5, 0.0)).unwrap();
        assert!((v - 0.16).abs() < 1e-12, "{v}");
        assert!((averaged(&mu, 0.5, c(0.0, 0.0)).unwrap() - 0.25).abs() < 1e-12);
        assert!((averaged(&mu, 0.5, c(0.5, 0.0)).unwrap() - 0.16 / 0.5625).abs() < 1e-12);
        for &m in &[0.9, 0.999, 0.999_999] {
            let z = ComplexPoint::from_polar(m, 1.0);
            let exact = crate::geometry::pseudo_disk_area(z, 0.7).unwrap();
            let v = localized_variation(&mu, 0.7, z).unwrap();
            assert!((v / exact - 1.0).abs() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn pullback_matches_direct_pseudo_disk_quadrature() {
        let mu = Measure {
            atoms: vec![],
            density: vec![
                Density::MonomialPower {
                    m: 3,
                    n: 1.5,
                    c: Complex64::new(0.5, -2.0),
                },
                Density::BlochLog { c: one() },
            ],
        };
        let z = c(0.6, 0.5);
        let disk = pseudo_disk_unchecked(z, 0.4);
        let direct: Complex64 = crate::quadrature::integrate_pseudo_disk(
            |w| mu.density_value(w),
            &disk,
            &QuadratureScheme {
                radial_nodes: 40,
                angular_nodes: 256,
                tol: 1e-8,
                ..QuadratureScheme::default()
            },
        )
        .unwrap();
        let v = localized(&mu, 0.4, z, false).unwrap();
        assert!((v - direct).norm() < 1e-9 * direct.norm(), "{v} {direct}");
    }

    #[test]
    fn berezin_values() {
        let atom = Measure::atom(c(0.0, 0.0), one());
        let z = c(0.3, -0.4);
        let v = berezin(&atom, z, true).unwrap().re;
        assert!((v - boundary_weight(z).powi(2)).abs() < 1e-15);
        let area = Measure::area();
        assert!((berezin(&area, c(0.0, 0.0), true).unwrap().re - 1.0).abs() < 1e-6);
        // The area measure is fixed by the Berezin transform.
        assert!((berezin(&area, c(0.9, 0.0), true).unwrap().re - 1.0).abs() < 1e-6);
        let heavy = Measure::from_density(Density::Power { a: -1.5, c: one() });
        assert!(matches!(berezin(&heavy, c(0.1, 0.0), true), Err(Error::InfiniteMass { .. })));
    }

    #[test]
    fn single_atom_cr_identity() {
        let sched = default_rho_schedule();
        let scheme = QuadratureScheme::default();
        for &r in &[0.3, 0.5] {
            let mu = Measure::atom(c(0.0, 0.0), one());
            let rep = localized_lp_norm(&mu, r, 1.0, &sched, &scheme).unwrap();
            assert_eq!(rep.verdict, Verdict::Converged);
            assert!((rep.last() / cr_constant(r) - 1.0).abs() < 1e-8, "{}", rep.last());
            // The second pseudo-disk contains the origin when r = 0.5.
            for z in [c(0.7, 0.5), c(0.3, 0.2)] {
                let rep = localized_lp_norm(&Measure::atom(z, one()), r, 1.0, &sched, &scheme).unwrap();
                assert!((rep.last() / cr_constant(r) - 1.0).abs() < 1e-6, "{z}: {}", rep.last());
            }
        }
        // Oracle: ∫_0^{r^2} (1 - t)^{-2} dt.
        let oracle = 0.25_f64 / (1.0 - 0.25);
        assert!((cr_constant(0.5) - oracle).abs() < 1e-15);
    }

    #[test]
    fn area_density_cr_identity() {
        let rep = localized_lp_norm(&Measure::area(), 0.5, 1.0, &default_rho_schedule(), &QuadratureScheme::default())
            .unwrap();
        assert!((rep.last() - cr_constant(0.5)).abs() < 1e-6);
    }

    #[test]
    fn zero_measure_and_sup() {
        let sched = default_rho_schedule();
        let scheme = QuadratureScheme::default();
        let rep = localized_lp_norm(&Measure::zero(), 0.5, 1.0, &sched, &scheme).unwrap();
        assert!(rep.values.iter().all(|&v| v == 0.0));
        let rep = localized_lp_norm(&Measure::area(), 0.5, f64::INFINITY, &sched, &scheme).unwrap();
        assert!((rep.last() - 0.25).abs() < 1e-3, "{}", rep.last());
        assert_eq!(rep.verdict, Verdict::Converged);
    }

    #[test]
    fn sequence_counts_covering_centers() {
        let lat = Lattice::build(0.5, 0.99).unwrap();
        let mu = Measure::atom(c(0.0, 0.0), one());
        let s = sequence_lp(&mu, &lat, 0.5, 1.0, false).unwrap();
        let direct = lat.centers().iter().filter(|&&z| z.norm() < 0.5).count() as f64;
        assert_eq!(s.norm, direct);
        assert!(s.norm >= 1.0);
        assert_eq!(sequence_lp(&Measure::zero(), &lat, 0.5, 2.0, false).unwrap().norm, 0.0);
    }

    #[test]
    fn area_sequence_sup_comparable_to_profile_sup() {
        let lat = Lattice::build(0.3, 0.99).unwrap();
        let sched = default_rho_schedule();
        for &r in &[0.3, 0.5] {
            let seq = sequence_lp(&Measure::area(), &lat, r, f64::INFINITY, true).unwrap().norm;
            let prof = localized_lp_norm(&Measure::area(), r, f64::INFINITY, &sched, &QuadratureScheme::default())
                .unwrap()
                .last();
            let ratio = seq / prof;
            assert!(ratio > 0.2 && ratio < 5.0, "{ratio}");
        }
    }

    #[test]
    fn carleson_examples() {
        let probes = carleson_probes(8, 1.0 - 1e-6);
        // The quotient is r^2 / (1 - r^2 |z|^2)^2, increasing to r^2 / (1 - r^2)^2.
        let area = carleson_constant(&Measure::area(), 2.0, 0.5, &probes).unwrap();
        assert!((area.values[0] - 0.25).abs() < 1e-12);
        assert!(area.constant <= 0.25 / 0.5625 + 1e-12 && area.constant > 0.44);
        let atom = carleson_constant(&Measure::atom(c(0.0, 0.0), one()), 1.0, 0.5, &probes).unwrap();
        assert!(atom.constant.is_finite() && atom.constant <= 1.0 / (1.0 - 0.25));
        let bloch = carleson_constant(&Measure::from_density(Density::BlochLog { c: one() }), 1.0, 0.5, &probes).unwrap();
        let shells = bloch.shell_sup(&default_rho_schedule());
        let n = shells.len();
        assert!(shells[n - 1] <= shells[n - 4] * 1.05, "{shells:?}");
    }

    #[test]
    fn total_mass_examples() {
        let sched = default_rho_schedule();
        let scheme = QuadratureScheme::default();
        let atoms = Measure {
            atoms: vec![
                Atom { z: c(0.1, 0.0), w: Complex64::new(0.0, -2.0) },
                Atom { z: c(-0.5, 0.5), w: one() },
            ],
            density: vec![],
        };
        let rep = total_mass(&atoms, &sched, &scheme).unwrap();
        assert!(rep.values.iter().all(|&v| (v - 3.0).abs() < 1e-15));
        let light = total_mass(&Measure::from_density(Density::Power { a: -0.5, c: one() }), &sched, &scheme).unwrap();
        assert_eq!(light.verdict, Verdict::Converged);
        let rho = *sched.last().unwrap();
        let oracle = 2.0 - 2.0 * (1.0 - rho * rho).sqrt();
        assert!((light.last() - oracle).abs() < 1e-9);
        let heavy = total_mass(&Measure::from_density(Density::Power { a: -1.5, c: one() }), &sched, &scheme).unwrap();
        assert_eq!(heavy.verdict, Verdict::Divergent);
        let bloch = total_mass(&Measure::from_density(Density::BlochLog { c: one() }), &sched, &scheme).unwrap();
        assert!((bloch.last() - rho * rho).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_shapes() {
        let text = r#"{"atoms":[{"z":[0.1,0.2],"w":[1,0]}],"density":{"family":"monomial_power","params":{"m":2,"N":1,"c":[15,0]}}}"#;
        let mu = Measure::from_json(text).unwrap();
        assert_eq!(mu.density.len(), 1);
        let back = Measure::from_json(&mu.to_json().unwrap()).unwrap();
        assert_eq!(back, mu);
        let list = r#"{"density":[{"family":"constant","params":{"c":2}},{"family":"bloch_log","params":{}}]}"#;
        assert_eq!(Measure::from_json(list).unwrap().density.len(), 2);
        assert!(Measure::from_json(r#"{"space":"plane"}"#).is_err());
        assert!(Measure::from_json(r#"{"atoms":[{"z":[1.0,0.0],"w":1}]}"#).is_err());
    }

    fn small_measure() -> impl Strategy<Value = Measure> {
        let atom = (0.0f64..0.95, 0.0f64..TAU, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(m, t, a, b)| Atom {
            z: ComplexPoint::from_polar(m, t),
            w: Complex64::new(a, b),
        });
        (proptest::collection::vec(atom, 0..6), -0.5f64..1.0, -1.0f64..1.0).prop_map(|(atoms, a, cr)| Measure {
            atoms,
            density: vec![Density::Power {
                a,
                c: Complex64::new(cr, 0.5),
            }],
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn localized_is_linear(mu in small_measure(), nu in small_measure(), ar in -2.0f64..2.0, ai in -2.0f64..2.0,
                               m in 0.0f64..0.99, t in 0.0f64..TAU, r in 0.1f64..0.8) {
            let alpha = Complex64::new(ar, ai);
            let z = ComplexPoint::from_polar(m, t);
            let lhs = localized(&mu.scaled(alpha).plus(&nu), r, z, false).unwrap();
            let rhs = localized(&mu, r, z, false).unwrap() * alpha + localized(&nu, r, z, false).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }

        #[test]
        fn localized_variation_is_monotone_in_r(mu in small_measure(), m in 0.0f64..0.99, t in 0.0f64..TAU,
                                               r1 in 0.05f64..0.9, dr in 0.0f64..0.09) {
            let z = ComplexPoint::from_polar(m, t);
            let small = localized_variation(&mu, r1, z).unwrap();
            let large = localized_variation(&mu, r1 + dr, z).unwrap();
            prop_assert!(small <= large * (1.0 + 1e-10) + 1e-14);
        }
    }
}
