//! Truncated seminorms and membership verdicts for Besov, Lipschitz, Bloch
//! and weighted Bergman spaces, and the Forelli–Rudin integrals behind the
//! growth estimates.
//!
//! Rings are integrated adaptively in the angle, since the test functions
//! concentrate near boundary points at a scale of `1 - |z|`.

use std::collections::BinaryHeap;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::geometry::{check_in_disk, ComplexPoint};
use crate::quadrature::{gauss_legendre, panel_edges, radial_rule, QuadratureScheme};
use crate::report::{ScheduleKind, SeminormReport, TrendRule};
use crate::synthesis::{pochhammer, KernelFunction};

/// A holomorphic function on the disk with derivatives of every order.
pub trait Holomorphic: Sync {
    fn value(&self, z: ComplexPoint) -> Result<Complex64>;
    fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64>;
}

impl Holomorphic for KernelFunction {
    fn value(&self, z: ComplexPoint) -> Result<Complex64> {
        self.eval(z)
    }

    fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64> {
        KernelFunction::derivative(self, k, z)
    }
}

impl<T: Holomorphic + ?Sized> Holomorphic for &T {
    fn value(&self, z: ComplexPoint) -> Result<Complex64> {
        (**self).value(z)
    }

    fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64> {
        (**self).derivative(k, z)
    }
}

/// Closed-form functions used as probes of the seminorm machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `c z^m`.
    Monomial { m: u32, c: f64 },
    /// `log(1 / (1 - z))`.
    LogInverse,
    /// `(1 - z)^{-a}`.
    InversePower { a: f64 },
}

impl Holomorphic for TestFunction {
    fn value(&self, z: ComplexPoint) -> Result<Complex64> {
        self.derivative(0, z)
    }

    fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64> {
        check_in_disk(z)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(match *self {
            TestFunction::Monomial { m, c } => {
                if k > m {
                    Complex64::new(0.0, 0.0)
                } else {
                    let falling = ((m - k + 1)..=m).fold(1.0, |acc, i| acc * i as f64);
                    c * falling * z.powi((m - k) as i32)
                }
            }
            TestFunction::LogInverse => {
                if k == 0 {
                    -(one - z).ln()
                } else {
                    let fact = (1..k).fold(1.0, |acc, i| acc * i as f64);
                    fact / (one - z).powi(k as i32)
                }
            }
            TestFunction::InversePower { a } => pochhammer(a, k) * (one - z).powf(-a - k as f64),
        })
    }
}

/// A function known only through its values; derivatives come from a
/// Cauchy integral on the circle of radius `3 (1 - |z|) / 4` around `z`.
pub struct BlackBox<F> {
    f: F,
}

impl<F: Fn(ComplexPoint) -> Complex64 + Sync> BlackBox<F> {
    pub fn new(f: F) -> Self {
        BlackBox { f }
    }
}

const CAUCHY_NODES: usize = 128;

/// `f^{(k)}(z)` by the trapezoid rule on `|ζ - z| = 3 (1 - |z|) / 4`.
pub fn cauchy_derivative<F: Fn(ComplexPoint) -> Complex64>(f: &F, k: u32, z: ComplexPoint) -> Result<Complex64> {
    check_in_disk(z)?;
    if k == 0 {
        return Ok(f(z));
    }
    let radius = 0.75 * (1.0 - z.norm());
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..CAUCHY_NODES {
        let e = Complex64::from_polar(1.0, TAU * j as f64 / CAUCHY_NODES as f64);
        acc += f(z + e * radius) * e.powi(-(k as i32));
    }
    let fact = (1..=k).fold(1.0, |a, i| a * i as f64);
    let v = acc * (fact / (CAUCHY_NODES as f64 * radius.powi(k as i32)));
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Derivative { re: z.re, im: z.im })
    }
}

/// `f^{(k)}(z)` by central differences with step `h`, extrapolated twice.
pub fn richardson_derivative<F: Fn(ComplexPoint) -> Complex64>(f: &F, k: u32, z: ComplexPoint, h: f64) -> Complex64 {
    let central = |h: f64| -> Complex64 {
        // k-th central difference with nodes z + (k/2 - j) h.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += f(z + (0.5 * k as f64 - j as f64) * h) * (sign * binom);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        acc / h.powi(k as i32)
    };
    let d1 = central(h);
    let d2 = central(0.5 * h);
    let d3 = central(0.25 * h);
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d3 * 4.0 - d2) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

impl<F: Fn(ComplexPoint) -> Complex64 + Sync> Holomorphic for BlackBox<F> {
    fn value(&self, z: ComplexPoint) -> Result<Complex64> {
        check_in_disk(z)?;
        Ok((self.f)(z))
    }

    fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64> {
        cauchy_derivative(&self.f, k, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum SpaceFamily {
    Besov { p: f64 },
    Lipschitz { t: f64 },
    Bergman { p: f64, alpha: f64 },
    Bloch,
}

/// A space together with the derivative order used to test membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub family: SpaceFamily,
    pub k: u32,
}

impl SpaceSpec {
    /// The space with its minimal admissible derivative order.
    pub fn new(family: SpaceFamily) -> Result<SpaceSpec> {
        let k = match family {
            SpaceFamily::Besov { p } => {
                require(p > 0.0 && p.is_finite(), "p", p, "must be positive and finite")?;
                (1.0 / p).floor() as u32 + 1
            }
            SpaceFamily::Lipschitz { t } => {
                require(t.is_finite(), "t", t, "must be finite")?;
                if t < 0.0 {
                    0
                } else {
                    t.floor() as u32 + 1
                }
            }
            SpaceFamily::Bergman { p, alpha } => {
                require(p > 0.0 && p.is_finite(), "p", p, "must be positive and finite")?;
                let mut k = 0u32;
                while p * k as f64 + alpha <= -1.0 {
                    k += 1;
                }
                k
            }
            SpaceFamily::Bloch => 1,
        };
        Ok(SpaceSpec { family, k })
    }

    /// Raises the derivative order; lowering below the minimum is rejected.
    pub fn with_order(self, k: u32) -> Result<SpaceSpec> {
        let min = SpaceSpec::new(self.family)?.k;
        require(k >= min, "k", k as f64, "below the minimal admissible order")?;
        Ok(SpaceSpec { k, ..self })
    }
}

/// Resolution settings for seminorm integrals and supremum scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipScheme {
    pub radial_nodes: usize,
    pub panel_ratio: f64,
    /// Relative tolerance of each adaptive ring integral.
    pub ring_tol: f64,
    /// Evaluation budget per ring.
    pub max_ring_evals: usize,
    /// Cap on uniform samples per circle in supremum scans.
    pub sup_samples: usize,
    /// Circles per schedule step in supremum scans.
    pub sup_circles: usize,
}

impl Default for MembershipScheme {
    fn default() -> Self {
        MembershipScheme {
            radial_nodes: 12,
            panel_ratio: 4.0,
            ring_tol: 1e-6,
            max_ring_evals: 200_000,
            sup_samples: 4096,
            sup_circles: 6,
        }
    }
}

fn gl_pair() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(8), gauss_legendre(16)))
}

fn panel_estimate<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let (g8, g16) = gl_pair();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut lo = 0.0;
    for &(x, w) in g8 {
        lo += w * f(mid + half * x)?;
    }
    let mut hi = 0.0;
    for &(x, w) in g16 {
        hi += w * f(mid + half * x)?;
    }
    Ok((hi * half, ((hi - lo) * half).abs()))
}

/// Mean of `f(θ)` over `[0, 2π)`: the panel with the largest Gauss–Legendre
/// 8/16 discrepancy is bisected until the summed discrepancy is below `tol`
/// relative to the estimate.
pub fn adaptive_ring_mean<F: FnMut(f64) -> Result<f64>>(mut f: F, tol: f64, max_evals: usize) -> Result<f64> {
    const START: usize = 16;
    let mut heap = BinaryHeap::with_capacity(64);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for j in 0..START {
        let a = TAU * j as f64 / START as f64;
        let b = TAU * (j + 1) as f64 / START as f64;
        let (v, e) = panel_estimate(&mut f, a, b)?;
        total += v;
        total_err += e;
        heap.push(Panel { a, b, v, e });
    }
    let mut evals = START * 24;
    while total_err > tol * total.abs() && evals < max_evals {
        let Some(p) = heap.pop() else { break };
        if p.b - p.a < 1e-15 {
            heap.push(p);
            break;
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = panel_estimate(&mut f, p.a, m)?;
        let (v2, e2) = panel_estimate(&mut f, m, p.b)?;
        evals += 48;
        total += v1 + v2 - p.v;
        total_err += e1 + e2 - p.e;
        heap.push(Panel { a: p.a, b: m, v: v1, e: e1 });
        heap.push(Panel { a: m, b: p.b, v: v2, e: e2 });
    }
    // Re-sum to shed the drift of the incremental updates.
    Ok(heap.iter().map(|p| p.v).sum::<f64>() / TAU)
}

struct Panel {
    a: f64,
    b: f64,
    v: f64,
    e: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.e.total_cmp(&other.e).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.e.total_cmp(&other.e)
    }
}

fn radial_scheme(opts: &MembershipScheme) -> QuadratureScheme {
    QuadratureScheme {
        radial_nodes: opts.radial_nodes,
        panel_ratio: opts.panel_ratio,
        ..QuadratureScheme::default()
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    require(!schedule.is_empty(), "schedule", 0.0, "needs at least one radius")?;
    for &rho in schedule {
        require(rho > 0.0 && rho < 1.0, "rho", rho, "must lie in (0, 1)")?;
    }
    for w in schedule.windows(2) {
        require(w[1] > w[0], "schedule", w[1], "must be increasing")?;
    }
    Ok(())
}

/// Truncated `∫_{|z|≤ρ} g(z) w(1 - |z|^2) dA(z)` over the schedule.
fn truncated_integrals<G, W>(g: G, weight: W, schedule: &[f64], opts: &MembershipScheme) -> Result<Vec<f64>>
where
    G: Fn(ComplexPoint, f64) -> Result<f64> + Sync,
    W: Fn(f64) -> f64 + Sync,
{
    check_schedule(schedule)?;
    let scheme = radial_scheme(opts);
    let mut out = Vec::with_capacity(schedule.len());
    let mut running = 0.0;
    let mut inner = 0.0;
    for &rho in schedule {
        let nodes = radial_rule(inner, rho, &scheme, &[]);
        let parts = crate::par::par_map(&nodes, |node| -> Result<f64> {
            let m = node.modulus();
            let ring = adaptive_ring_mean(|th| g(ComplexPoint::from_polar(m, th), node.s), opts.ring_tol, opts.max_ring_evals)?;
            Ok(node.weight * weight(node.s) * ring)
        });
        for part in parts {
            running += part?;
        }
        out.push(running);
        inner = rho;
    }
    Ok(out)
}

fn golden_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..40 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(f1.max(f2))
}

/// Maximum of `f(θ)` on a circle: uniform samples from `θ = 0`, then golden
/// section refinement around the three best samples.
fn circle_max<F: Fn(f64) -> Result<f64>>(f: F, samples: usize) -> Result<f64> {
    let step = TAU / samples as f64;
    let mut vals = Vec::with_capacity(samples);
    for j in 0..samples {
        vals.push((f(step * j as f64)?, j));
    }
    let mut best = vals.iter().map(|v| v.0).fold(0.0, f64::max);
    vals.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    for &(_, j) in vals.iter().take(3) {
        let c = step * j as f64;
        best = best.max(golden_max(&f, c - step, c + step)?);
    }
    Ok(best)
}

/// Running supremum of `g(z)` over `|z| ≤ ρ` for each schedule radius.
fn truncated_sups<G>(g: G, schedule: &[f64], opts: &MembershipScheme) -> Result<Vec<f64>>
where
    G: Fn(ComplexPoint, f64) -> Result<f64> + Sync,
{
    check_schedule(schedule)?;
    let mut moduli = vec![0.0];
    let mut inner = 0.0f64;
    for &rho in schedule {
        let s_in = (1.0 - inner) * (1.0 + inner);
        let s_out = (1.0 - rho) * (1.0 + rho);
        for i in 1..=opts.sup_circles {
            let s = s_in * (s_out / s_in).powf(i as f64 / opts.sup_circles as f64);
            moduli.push((1.0 - s).max(0.0).sqrt().min(rho));
        }
        inner = rho;
    }
    let sups = crate::par::par_map(&moduli, |&m| -> Result<f64> {
        let s = (1.0 - m) * (1.0 + m);
        let samples = ((8.0 / (1.0 - m)) as usize).clamp(64, opts.sup_samples.max(64));
        circle_max(|th| g(ComplexPoint::from_polar(m, th), s), samples)
    });
    let mut pairs = Vec::with_capacity(moduli.len());
    for (m, v) in moduli.iter().zip(sups) {
        pairs.push((*m, v?));
    }
    Ok(schedule
        .iter()
        .map(|&rho| pairs.iter().filter(|p| p.0 <= rho).map(|p| p.1).fold(0.0, f64::max))
        .collect())
}

fn integral_report(schedule: &[f64], values: Vec<f64>) -> SeminormReport {
    SeminormReport::integral(ScheduleKind::Disk, schedule.to_vec(), values, &TrendRule::default())
}

fn sup_report(schedule: &[f64], values: Vec<f64>) -> SeminormReport {
    SeminormReport::supremum(ScheduleKind::Disk, schedule.to_vec(), values, &TrendRule::default())
}

/// Truncated `∫_{|z|≤ρ} |(1 - |z|^2)^k f^{(k)}(z)|^p dλ(z)` with the minimal `k`
/// unless `k` is given.
pub fn besov_seminorm<H: Holomorphic + ?Sized>(
    f: &H,
    p: f64,
    k: Option<u32>,
    schedule: &[f64],
    opts: &MembershipScheme,
) -> Result<SeminormReport> {
    let mut spec = SpaceSpec::new(SpaceFamily::Besov { p })?;
    if let Some(k) = k {
        spec = spec.with_order(k)?;
    }
    let k = spec.k;
    let values = truncated_integrals(
        |z, s| Ok((s.powi(k as i32) * f.derivative(k, z)?.norm()).powf(p)),
        |s| 1.0 / (s * s),
        schedule,
        opts,
    )?;
    Ok(integral_report(schedule, values))
}

/// Running supremum of `(1 - |z|^2)^{k - t} |f^{(k)}(z)|`.
pub fn lipschitz_seminorm<H: Holomorphic + ?Sized>(
    f: &H,
    t: f64,
    k: Option<u32>,
    schedule: &[f64],
    opts: &MembershipScheme,
) -> Result<SeminormReport> {
    let mut spec = SpaceSpec::new(SpaceFamily::Lipschitz { t })?;
    if let Some(k) = k {
        spec = spec.with_order(k)?;
    }
    let k = spec.k;
    let values = truncated_sups(|z, s| Ok(s.powf(k as f64 - t) * f.derivative(k, z)?.norm()), schedule, opts)?;
    Ok(sup_report(schedule, values))
}

/// Running supremum of `(1 - |z|^2) |R f(z)|` with `R f = z f'`.
pub fn bloch_seminorm<H: Holomorphic + ?Sized>(f: &H, schedule: &[f64], opts: &MembershipScheme) -> Result<SeminormReport> {
    let values = truncated_sups(|z, s| Ok(s * (z * f.derivative(1, z)?).norm()), schedule, opts)?;
    Ok(sup_report(schedule, values))
}

/// Running supremum of `|f|`.
pub fn sup_modulus<H: Holomorphic + ?Sized>(f: &H, schedule: &[f64], opts: &MembershipScheme) -> Result<SeminormReport> {
    let values = truncated_sups(|z, _| Ok(f.value(z)?.norm()), schedule, opts)?;
    Ok(sup_report(schedule, values))
}

/// Stirling numbers of the second kind `S(k, j)`, `0 ≤ j ≤ k`.
fn stirling2(k: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for n in 1..=k as usize {
        let mut next = vec![0.0; n + 1];
        for j in 1..=n {
            let keep = if j < row.len() { j as f64 * row[j] } else { 0.0 };
            next[j] = keep + row[j - 1];
        }
        row = next;
    }
    row
}

/// `R^k f(z)` where `R f = z f'`.
pub fn radial_derivative<H: Holomorphic + ?Sized>(f: &H, k: u32, z: ComplexPoint) -> Result<Complex64> {
    if k == 0 {
        return f.value(z);
    }
    let coeffs = stirling2(k);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &c) in coeffs.iter().enumerate().skip(1) {
        if c != 0.0 {
            acc += c * z.powi(j as i32) * f.derivative(j as u32, z)?;
        }
    }
    Ok(acc)
}

/// Truncated `∫ |(1 - |z|^2)^k R^k f|^p dA_α` (normalized by `α + 1` when `α > -1`).
pub fn bergman_norm<H: Holomorphic + ?Sized>(
    f: &H,
    p: f64,
    alpha: f64,
    k: Option<u32>,
    schedule: &[f64],
    opts: &MembershipScheme,
) -> Result<SeminormReport> {
    let mut spec = SpaceSpec::new(SpaceFamily::Bergman { p, alpha })?;
    if let Some(k) = k {
        spec = spec.with_order(k)?;
    }
    let k = spec.k;
    let norm = if alpha > -1.0 { alpha + 1.0 } else { 1.0 };
    let values = truncated_integrals(
        |z, s| Ok((s.powi(k as i32) * radial_derivative(f, k, z)?.norm()).powf(p)),
        |s| norm * s.powf(alpha),
        schedule,
        opts,
    )?;
    Ok(integral_report(schedule, values))
}

/// Dispatches on the space family.
pub fn membership<H: Holomorphic + ?Sized>(
    f: &H,
    spec: SpaceSpec,
    schedule: &[f64],
    opts: &MembershipScheme,
) -> Result<SeminormReport> {
    match spec.family {
        SpaceFamily::Besov { p } => besov_seminorm(f, p, Some(spec.k), schedule, opts),
        SpaceFamily::Lipschitz { t } => lipschitz_seminorm(f, t, Some(spec.k), schedule, opts),
        SpaceFamily::Bergman { p, alpha } => bergman_norm(f, p, alpha, Some(spec.k), schedule, opts),
        SpaceFamily::Bloch => bloch_seminorm(f, schedule, opts),
    }
}

/// Growth of `∫ (1 - |z|^2)^a / |1 - z w̄|^b dA(z)` as `|w| → 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "growth", rename_all = "snake_case")]
pub enum FrGrowth {
    Bounded,
    /// Comparable to `log(1 / (1 - |w|^2))`.
    Logarithmic,
    /// Comparable to `(1 - |w|^2)^{exponent}`, `exponent < 0`.
    Power { exponent: f64 },
}

pub fn forelli_rudin_growth(a: f64, b: f64) -> FrGrowth {
    let c = 2.0 + a - b;
    if c.abs() < 1e-12 {
        FrGrowth::Logarithmic
    } else if c > 0.0 {
        FrGrowth::Bounded
    } else {
        FrGrowth::Power { exponent: c }
    }
}

/// `∫_D (1 - |z|^2)^a / |1 - z w̄|^b dA(z)` by polar quadrature.
pub fn forelli_rudin(a: f64, b: f64, w: ComplexPoint) -> Result<f64> {
    require(a > -1.0, "a", a, "must exceed -1")?;
    check_in_disk(w)?;
    let x = w.norm();
    // Rotation invariance puts w on the positive axis; the angular integrand
    // is then even in θ.
    let count = ((32.0 / (1.0 - x)).ceil() as usize).clamp(64, 1 << 22);
    let ring = |m: f64| -> f64 {
        let mx = m * x;
        let step = std::f64::consts::PI / count as f64;
        let mut acc = 0.5 * ((1.0 - mx).abs().powf(-b) + (1.0 + mx).powf(-b));
        for j in 1..count {
            let den = 1.0 - 2.0 * mx * (step * j as f64).cos() + mx * mx;
            acc += den.powf(-0.5 * b);
        }
        acc / count as f64
    };
    let s_min = 1e-14;
    let edges = panel_edges(s_min, 1.0, 4.0, &[]);
    let gl = gauss_legendre(12);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for &(xg, wg) in &gl {
            let s = mid + half * xg;
            total += half * wg * s.powf(a) * ring((1.0 - s).sqrt());
        }
    }
    // Remaining sliver s < s_min, with the ring mean frozen at its edge value.
    total += s_min.powf(a + 1.0) / (a + 1.0) * ring((1.0 - s_min).sqrt());
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Quadrature {
            estimate: total,
            error: f64::INFINITY,
        })
    }
}
