//! Holomorphic functions synthesized from measures through integral kernels.
//!
//! A [`KernelFunction`] pairs a kernel `K(z, w)` with a measure and evaluates
//! `f(z) = ∫ K(z, w) dμ(w)` together with its derivatives. Atoms are summed
//! directly. Densities of the form `c e^{iqθ} t^σ (1 - t)^N`, `t = |w|^2`,
//! reduce to a single monomial by orthogonality of `e^{iqθ}` and are
//! evaluated in closed form on the [`DensityRoute::Exact`] route; the
//! [`DensityRoute::Quadrature`] route integrates every density numerically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::geometry::{boundary_weight, check_in_disk, ComplexPoint};
use crate::lattice::Lattice;
use crate::measure::{total_mass, Atom, Density, Measure};
use crate::quadrature::{integrate_disk_resolved, moment, radial_moment, QuadratureScheme, Weight};
use crate::report::{default_rho_schedule, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `(z - w) / (1 - z w̄)`.
    Mobius,
    /// `(1 - |w|^2)^e / (1 - z w̄)^b`, principal branch.
    Power { b: f64, e: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityRoute {
    Exact,
    Quadrature,
}

/// `(x)_k = x (x + 1) ... (x + k - 1)`.
pub fn pochhammer(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + i as f64))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `base^ex`, using repeated multiplication for small integer exponents.
#[inline]
pub(crate) fn cpow(base: Complex64, ex: f64) -> Complex64 {
    if ex.fract() == 0.0 && ex.abs() <= 64.0 {
        base.powi(ex as i32)
    } else {
        base.powf(ex)
    }
}

impl Kernel {
    /// `∂_z^k K(z, w)`.
    pub fn derivative(&self, k: u32, z: ComplexPoint, w: ComplexPoint) -> Complex64 {
        let wc = w.conj();
        let den = 1.0 - z * wc;
        match *self {
            Kernel::Mobius => {
                if k == 0 {
                    (z - w) / den
                } else {
                    factorial(k) * boundary_weight(w) * wc.powi(k as i32 - 1) / den.powi(k as i32 + 1)
                }
            }
            Kernel::Power { b, e } => {
                let scale = if e == 0.0 { 1.0 } else { boundary_weight(w).powf(e) };
                pochhammer(b, k) * scale * wc.powi(k as i32) * cpow(den, -b - k as f64)
            }
        }
    }

    /// Monomial `(power, coefficient)` produced by a phase-form density
    /// `c e^{iqθ} t^σ (1 - t)^N`, or `None` when the integral diverges.
    fn density_monomial(&self, q: i64, sigma: f64, n: f64, c: Complex64) -> Result<Option<(u32, Complex64)>> {
        match *self {
            Kernel::Mobius => {
                if q < -1 {
                    return Ok(None);
                }
                let half = 0.5 * q as f64 + sigma;
                let first = if q >= 0 { radial_moment(half, n)? } else { 0.0 };
                let second = radial_moment(half + 1.0, n)?;
                Ok(Some(((q + 1) as u32, c * (first - second))))
            }
            Kernel::Power { b, e } => {
                if q < 0 {
                    return Ok(None);
                }
                let qq = q as u32;
                let coeff = pochhammer(b, qq) / factorial(qq) * radial_moment(0.5 * q as f64 + sigma, n + e)?;
                Ok(Some((qq, c * coeff)))
            }
        }
    }
}

/// `(q, σ, N)` with density `c e^{iqθ} t^σ (1 - t)^N`, when it has that form.
fn phase_form(d: &Density) -> Option<(i64, f64, f64)> {
    match *d {
        Density::Constant { .. } => Some((0, 0.0, 0.0)),
        Density::Power { a, .. } => Some((0, 0.0, a)),
        Density::MonomialPower { m, n, .. } => Some((m as i64, 0.5 * m as f64, n)),
        Density::PhasePower { n, .. } => Some((-1, 0.0, n)),
        Density::BlochLog { .. } | Density::LogWeight { .. } => None,
    }
}

/// Which kernel family a function was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    Mobius,
    Bergman { b: f64, p: f64, alpha: f64 },
    Lipschitz { b: f64, t: f64 },
    CarlesonForm { alpha: f64, t: f64 },
    Derivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFunction {
    family: KernelFamily,
    kernel: Kernel,
    measure: Measure,
    route: DensityRoute,
    scheme: QuadratureScheme,
    polynomial: Vec<(u32, Complex64)>,
    numeric: Vec<Density>,
}

/// Scheme for synthesis integrals: the kernel sets the angular resolution,
/// so rings are not refined toward the circle.
pub fn synthesis_scheme() -> QuadratureScheme {
    QuadratureScheme {
        boundary_resolution: 0.0,
        rho: 1.0 - 1e-12,
        ..QuadratureScheme::default()
    }
}

impl KernelFunction {
    pub fn new(family: KernelFamily, kernel: Kernel, measure: Measure, route: DensityRoute) -> Result<Self> {
        measure.validate()?;
        let mut polynomial = Vec::new();
        let mut numeric = Vec::new();
        for d in &measure.density {
            let exact = match (route, phase_form(d)) {
                (DensityRoute::Exact, Some((q, sigma, n))) => kernel.density_monomial(q, sigma, n, d.coefficient())?,
                _ => None,
            };
            match (exact, route, phase_form(d)) {
                (Some(term), _, _) => polynomial.push(term),
                // Orthogonality kills the whole density.
                (None, DensityRoute::Exact, Some(_)) => {}
                _ => numeric.push(*d),
            }
        }
        let mut scheme = synthesis_scheme();
        if numeric.iter().any(|d| phase_form(d).is_none()) {
            scheme.boundary_resolution = QuadratureScheme::default().boundary_resolution;
        }
        Ok(KernelFunction {
            family,
            kernel,
            measure,
            route,
            scheme,
            polynomial,
            numeric,
        })
    }

    pub fn with_scheme(mut self, scheme: QuadratureScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn route(&self) -> DensityRoute {
        self.route
    }

    /// `f(z)`.
    pub fn eval(&self, z: ComplexPoint) -> Result<Complex64> {
        self.derivative(0, z)
    }

    /// `f^{(k)}(z)`, differentiating under the integral sign.
    pub fn derivative(&self, k: u32, z: ComplexPoint) -> Result<Complex64> {
        check_in_disk(z)?;
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.measure.atoms {
            total += a.w * self.kernel.derivative(k, z, a.z);
        }
        for &(power, coeff) in &self.polynomial {
            if power >= k {
                let falling = ((power - k + 1)..=power).fold(1.0, |acc, i| acc * i as f64);
                total += coeff * falling * z.powi((power - k) as i32);
            }
        }
        if !self.numeric.is_empty() {
            let at_least = ((40.0 * (k as f64 + 1.0)) / (1.0 - z.norm())).min(1e6) as usize;
            let kernel = self.kernel;
            let dens = &self.numeric;
            total += integrate_disk_resolved(
                |w| kernel.derivative(k, z, w) * dens.iter().map(|d| d.value(w)).sum::<Complex64>(),
                Weight::Area,
                &self.scheme,
                at_least,
            )?;
        }
        Ok(total)
    }
}

fn require_finite_mass(mu: &Measure) -> Result<()> {
    let report = total_mass(mu, &default_rho_schedule(), &QuadratureScheme::default())?;
    if report.verdict == Verdict::Converged {
        Ok(())
    } else {
        Err(Error::InfiniteMass {
            verdict: report.verdict.to_string(),
        })
    }
}

/// `f(z) = ∫ (z - w) / (1 - z w̄) dμ(w)` for a finite measure.
pub fn synth_mobius(mu: &Measure) -> Result<KernelFunction> {
    synth_mobius_route(mu, DensityRoute::Exact)
}

pub fn synth_mobius_route(mu: &Measure, route: DensityRoute) -> Result<KernelFunction> {
    require_finite_mass(mu)?;
    KernelFunction::new(KernelFamily::Mobius, Kernel::Mobius, mu.clone(), route)
}

/// `k`-th derivative of the Möbius representation at `z`.
pub fn synth_mobius_derivative(mu: &Measure, k: u32, z: ComplexPoint) -> Result<Complex64> {
    require(k >= 1, "k", k as f64, "derivative order must be at least 1")?;
    synth_mobius(mu)?.derivative(k, z)
}

/// Kernel `(1 - |w|^2)^{(pb - 2 - α)/p} / (1 - z w̄)^b`.
pub fn synth_bergman(mu: &Measure, b: f64, p: f64, alpha: f64) -> Result<KernelFunction> {
    require(p > 0.0, "p", p, "must be positive")?;
    require(alpha > -1.0, "alpha", alpha, "must exceed -1")?;
    let bound = 1f64.max(1.0 / p) + (alpha + 1.0) / p;
    if !(b > bound) {
        return Err(Error::Constraint(format!("b = {b} must exceed max(1, 1/p) + (alpha + 1)/p = {bound}")));
    }
    let e = (p * b - 2.0 - alpha) / p;
    KernelFunction::new(
        KernelFamily::Bergman { b, p, alpha },
        Kernel::Power { b, e },
        mu.clone(),
        DensityRoute::Exact,
    )
}

fn check_lipschitz_b(b: f64) -> Result<()> {
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(Error::Constraint(format!("b = {b} must not be 0 or a negative integer")));
    }
    Ok(())
}

/// Kernel `(1 - |w|^2)^{b + t} / (1 - z w̄)^b`.
pub fn synth_lipschitz(mu: &Measure, b: f64, t: f64) -> Result<KernelFunction> {
    if !(b + t > 1.0) {
        return Err(Error::Constraint(format!("b + t = {} must exceed 1", b + t)));
    }
    check_lipschitz_b(b)?;
    KernelFunction::new(
        KernelFamily::Lipschitz { b, t },
        Kernel::Power { b, e: b + t },
        mu.clone(),
        DensityRoute::Exact,
    )
}

/// Kernel `1 / (1 - z w̄)^{2 + α - t}`, for measures that are `(2 + α)`-Carleson.
pub fn synth_carleson_form(mu: &Measure, alpha: f64, t: f64) -> Result<KernelFunction> {
    require(alpha > -1.0, "alpha", alpha, "must exceed -1")?;
    let b = 2.0 + alpha - t;
    check_lipschitz_b(b)?;
    KernelFunction::new(
        KernelFamily::CarlesonForm { alpha, t },
        Kernel::Power { b, e: 0.0 },
        mu.clone(),
        DensityRoute::Exact,
    )
}

/// `f'(z) = ∫ (1 - |w|^2) / (1 - z w̄)^2 dμ(w)`.
pub fn synth_derivative_kernel(mu: &Measure) -> Result<KernelFunction> {
    KernelFunction::new(
        KernelFamily::Derivative,
        Kernel::Power { b: 2.0, e: 1.0 },
        mu.clone(),
        DensityRoute::Exact,
    )
}

/// Default `N` for [`polynomial_measure`] given the target exponent `p`.
pub fn default_polynomial_order(p: f64) -> u32 {
    (2.0 / p).ceil() as u32 + 2
}

/// Measure whose Möbius synthesis is exactly `z^m`.
pub fn polynomial_measure(m: u32, n: u32) -> Result<Measure> {
    require(n <= 500 && m <= 500, "m", m as f64, "degree and order limited to 500")?;
    let d = if m >= 1 {
        let c = 1.0 / (moment(m - 1, n)? - moment(m, n)?);
        Density::MonomialPower {
            m: m - 1,
            n: n as f64,
            c: Complex64::new(c, 0.0),
        }
    } else {
        let c = -1.0 / radial_moment(0.5, n as f64)?;
        Density::PhasePower {
            n: n as f64,
            c: Complex64::new(c, 0.0),
        }
    };
    Ok(Measure::from_density(d))
}

/// Measure whose Möbius synthesis is the polynomial `Σ a_m z^m`.
pub fn polynomial_representation(coeffs: &[Complex64], n: u32) -> Result<Measure> {
    let mut out = Measure::zero();
    for (m, &a) in coeffs.iter().enumerate() {
        if a != Complex64::new(0.0, 0.0) {
            out = out.plus(&polynomial_measure(m as u32, n)?.scaled(a));
        }
    }
    Ok(out)
}

/// `Σ c_n' δ_{z_n}` with `c_n' = c_n / (k! z̄_n^{k-1})`.
pub fn lattice_atomic_measure(lat: &Lattice, coeffs: &[Complex64], k: u32) -> Result<Measure> {
    require(k >= 1, "k", k as f64, "must be at least 1")?;
    if coeffs.len() != lat.len() {
        return Err(Error::CoefficientCount(coeffs.len(), lat.len()));
    }
    let kf = factorial(k);
    let mut atoms = Vec::with_capacity(coeffs.len());
    for (i, (&z, &c)) in lat.centers().iter().zip(coeffs).enumerate() {
        if z.norm() == 0.0 {
            return Err(Error::ZeroCenter(i));
        }
        atoms.push(Atom {
            z,
            w: c / (kf * z.conj().powi(k as i32 - 1)),
        });
    }
    Ok(Measure {
        atoms,
        density: Vec::new(),
    })
}

/// Antiderivative of a derivative-kernel function in Möbius form, with the
/// integration constant fixed so that `f(0) = value_at_zero`.
pub fn theorem_b_integrate(fprime: &KernelFunction, value_at_zero: Complex64) -> Result<KernelFunction> {
    if fprime.kernel() != (Kernel::Power { b: 2.0, e: 1.0 }) {
        return Err(Error::Constraint(
            "antiderivative needs the kernel (1 - |w|^2) / (1 - z w̄)^2".into(),
        ));
    }
    let mu = fprime.measure().clone();
    let base = synth_mobius(&mu)?;
    let shift = value_at_zero - base.eval(ComplexPoint::new(0.0, 0.0))?;
    let fixed = if shift.norm() == 0.0 {
        mu
    } else {
        mu.plus(&constant_fix(shift, 2)?)
    };
    synth_mobius(&fixed)
}

/// Measure whose Möbius synthesis is the constant `c`.
pub fn constant_fix(c: Complex64, n: u32) -> Result<Measure> {
    Ok(polynomial_measure(0, n)?.scaled(c))
}

/// Empirical constant in `|f^{(k)}(z)| ≤ C Σ |c_n| (1 - |z_n|^2) / |1 - z z̄_n|^{k+1}`
/// for `f` synthesized from a lattice-atomic measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub k: u32,
    pub probes: usize,
    pub constant: f64,
    pub ratios: Vec<f64>,
}

pub fn domination_constant(
    lat: &Lattice,
    coeffs: &[Complex64],
    k: u32,
    probes: &[ComplexPoint],
) -> Result<DominationReport> {
    let mu = lattice_atomic_measure(lat, coeffs, k)?;
    let f = KernelFunction::new(KernelFamily::Mobius, Kernel::Mobius, mu, DensityRoute::Exact)?;
    let mut ratios = Vec::with_capacity(probes.len());
    for &z in probes {
        let lhs = f.derivative(k, z)?.norm();
        let rhs: f64 = lat
            .centers()
            .iter()
            .zip(coeffs)
            .map(|(&zn, c)| c.norm() * boundary_weight(zn) / (1.0 - z * zn.conj()).norm().powi(k as i32 + 1))
            .sum();
        ratios.push(if rhs > 0.0 { lhs / rhs } else { 0.0 });
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DominationReport {
        k,
        probes: probes.len(),
        constant,
        ratios,
    })
}

/// Least-squares fit of `f ≈ Σ c_n (1 - |z_n|^2)^e / (1 - z z̄_n)^b` over a
/// truncated lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicFit {
    pub b: f64,
    pub e: f64,
    pub coefficients: Vec<Complex64>,
    /// Root-mean-square residual on the fitting probes.
    pub residual_rms: f64,
    /// Largest residual on the validation probes.
    pub validation_max: f64,
}

pub fn fit_atomic_coefficients<F: Fn(ComplexPoint) -> Complex64>(
    f: F,
    lat: &Lattice,
    b: f64,
    e: f64,
    fit_probes: &[ComplexPoint],
    validation_probes: &[ComplexPoint],
) -> Result<AtomicFit> {
    use nalgebra::{DMatrix, DVector};
    require(
        fit_probes.len() >= lat.len(),
        "probes",
        fit_probes.len() as f64,
        "need at least one probe per lattice center",
    )?;
    let kernel = Kernel::Power { b, e };
    let centers = lat.centers();
    let a = DMatrix::from_fn(fit_probes.len(), centers.len(), |i, j| kernel.derivative(0, fit_probes[i], centers[j]));
    let y = DVector::from_iterator(fit_probes.len(), fit_probes.iter().map(|&z| f(z)));
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::Constraint(format!("least-squares solve failed: {e}")))?;
    let resid = &a * &c - &y;
    let residual_rms = (resid.iter().map(|r| r.norm_sqr()).sum::<f64>() / fit_probes.len() as f64).sqrt();
    let coefficients: Vec<Complex64> = c.iter().copied().collect();
    let validation_max = validation_probes
        .iter()
        .map(|&z| {
            let approx: Complex64 = centers
                .iter()
                .zip(&coefficients)
                .map(|(&zn, &cn)| cn * kernel.derivative(0, z, zn))
                .sum();
            (approx - f(z)).norm()
        })
        .fold(0.0, f64::max);
    Ok(AtomicFit {
        b,
        e,
        coefficients,
        residual_rms,
        validation_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn probes(n: usize, max: f64, seed: u64) -> Vec<ComplexPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| ComplexPoint::from_polar(max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect()
    }

    #[test]
    fn single_atom_and_zero_measure() {
        let a = c(0.3, -0.4);
        let f = synth_mobius(&Measure::atom(a, one())).unwrap();
        for z in probes(20, 0.95, 1) {
            let expect = (z - a) / (1.0 - a.conj() * z);
            assert!((f.eval(z).unwrap() - expect).norm() < 1e-15);
            let d1 = boundary_weight(a) / (1.0 - a.conj() * z).powi(2);
            assert!((f.derivative(1, z).unwrap() - d1).norm() < 1e-13);
        }
        let zero = synth_mobius(&Measure::zero()).unwrap();
        assert_eq!(zero.eval(c(0.5, 0.1)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn polynomial_constants() {
        let Density::MonomialPower { c: c1, .. } = polynomial_measure(1, 0).unwrap().density[0] else {
            panic!()
        };
        assert!((c1.re - 2.0).abs() < 1e-14);
        let Density::MonomialPower { c: c2, .. } = polynomial_measure(2, 1).unwrap().density[0] else {
            panic!()
        };
        // 1 / (1/6 - 1/12); the oracle is ∫ t(1 - t) dt - ∫ t^2 (1 - t) dt.
        assert!((c2.re - 12.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_measures_reproduce_monomials_by_quadrature() {
        for m in 0..=3u32 {
            let n = if m == 0 { 2 } else { m.saturating_sub(1) };
            let mu = polynomial_measure(m, n).unwrap();
            let f = synth_mobius_route(&mu, DensityRoute::Quadrature).unwrap();
            for z in probes(5, 0.9, 2 + m as u64) {
                let v = f.eval(z).unwrap();
                assert!((v - z.powi(m as i32)).norm() < 1e-8, "m={m} z={z} v={v}");
            }
        }
        let f0 = synth_mobius(&polynomial_measure(0, 2).unwrap()).unwrap();
        assert!((f0.eval(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn exact_route_matches_quadrature_for_densities() {
        let mu = Measure {
            atoms: vec![],
            density: vec![
                Density::MonomialPower {
                    m: 2,
                    n: 0.5,
                    c: Complex64::new(0.3, 1.0),
                },
                Density::PhasePower { n: 1.0, c: one() },
                Density::Power { a: -0.5, c: one() },
            ],
        };
        let exact = synth_mobius(&mu).unwrap();
        let quad = synth_mobius_route(&mu, DensityRoute::Quadrature).unwrap();
        for z in probes(5, 0.8, 9) {
            for k in 0..=2 {
                let a = exact.derivative(k, z).unwrap();
                let b = quad.derivative(k, z).unwrap();
                assert!((a - b).norm() < 1e-7 * (1.0 + a.norm()), "k={k} {a} {b}");
            }
        }
        let bergman_exact = synth_bergman(&mu, 3.0, 1.0, 0.0).unwrap();
        let bergman_quad = KernelFunction::new(
            bergman_exact.family(),
            bergman_exact.kernel(),
            mu.clone(),
            DensityRoute::Quadrature,
        )
        .unwrap();
        let z = c(0.4, 0.3);
        assert!((bergman_exact.eval(z).unwrap() - bergman_quad.eval(z).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn area_density_first_derivative_at_origin() {
        let v = synth_mobius_derivative(&Measure::area(), 1, c(0.0, 0.0)).unwrap();
        assert!((v - 0.5).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mu = Measure {
            atoms: vec![
                Atom { z: c(0.5, 0.2), w: Complex64::new(0.3, -1.0) },
                Atom { z: c(-0.7, 0.1), w: one() },
            ],
            density: vec![Density::MonomialPower { m: 1, n: 1.0, c: one() }],
        };
        let f = synth_mobius(&mu).unwrap();
        let z = c(0.3, 0.2);
        let h = 1e-3;
        // Five-point central differences.
        let fd = |g: &dyn Fn(ComplexPoint) -> Complex64| {
            (g(z - 2.0 * h) - g(z + 2.0 * h) + 8.0 * (g(z + h) - g(z - h))) / (12.0 * h)
        };
        let mut prev: Box<dyn Fn(ComplexPoint) -> Complex64> = Box::new(|w| f.eval(w).unwrap());
        for k in 1..=3u32 {
            let num = fd(&*prev);
            let exact = f.derivative(k, z).unwrap();
            assert!((num - exact).norm() < 1e-6 * exact.norm(), "k={k}");
            let fk = f.clone();
            prev = Box::new(move |w| fk.derivative(k, w).unwrap());
        }
    }

    #[test]
    fn bergman_atom_exponent_and_constraints() {
        let a = c(0.4, 0.4);
        let f = synth_bergman(&Measure::atom(a, one()), 3.0, 1.0, 0.0).unwrap();
        let z = c(-0.2, 0.5);
        let expect = boundary_weight(a) / (1.0 - z * a.conj()).powi(3);
        assert!((f.eval(z).unwrap() - expect).norm() < 1e-14);
        let unit = synth_bergman(&Measure::atom(c(0.0, 0.0), one()), 3.5, 2.0, 0.5).unwrap();
        assert!((unit.eval(z).unwrap() - 1.0).norm() < 1e-15);
        assert!(synth_bergman(&Measure::zero(), 2.0, 1.0, 0.0).is_err());
        assert!(synth_lipschitz(&Measure::zero(), -1.0, 3.0).is_err());
        assert!(synth_lipschitz(&Measure::zero(), 0.5, 0.4).is_err());
        let lip = synth_lipschitz(&Measure::atom(c(0.0, 0.0), one()), 2.0, 1.5).unwrap();
        assert!((lip.eval(z).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn principal_branch_is_continuous_along_loops() {
        let a = c(0.9, 0.0);
        let f = synth_bergman(&Measure::atom(a, one()), 2.7, 1.0, 0.0).unwrap();
        let n = 4000;
        let mut prev = f.eval(ComplexPoint::from_polar(0.95, 0.0)).unwrap();
        for j in 1..=n {
            let z = ComplexPoint::from_polar(0.95, std::f64::consts::TAU * j as f64 / n as f64);
            let v = f.eval(z).unwrap();
            assert!((v - prev).norm() < 0.05 * (1.0 + prev.norm()));
            prev = v;
        }
    }

    #[test]
    fn lattice_atomic_weights() {
        let lat = Lattice::build(0.5, 0.8).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); lat.len()];
        coeffs[0] = one();
        let mu = lattice_atomic_measure(&lat, &coeffs, 2).unwrap();
        let z1 = lat.centers()[0];
        assert!((mu.atoms[0].w - 1.0 / (2.0 * z1.conj())).norm() < 1e-15);
        let flat = vec![Complex64::new(0.5, 0.5); lat.len()];
        let mu1 = lattice_atomic_measure(&lat, &flat, 1).unwrap();
        assert!(mu1.atoms.iter().all(|a| a.w == Complex64::new(0.5, 0.5)));
        assert!(matches!(lattice_atomic_measure(&lat, &flat[1..], 1), Err(Error::CoefficientCount(..))));
    }

    #[test]
    fn theorem_b_antiderivative() {
        let a = c(0.2, 0.6);
        let mu = Measure::atom(a, one());
        let fp = synth_derivative_kernel(&mu).unwrap();
        let f = theorem_b_integrate(&fp, Complex64::new(0.25, -1.0)).unwrap();
        assert!((f.eval(c(0.0, 0.0)).unwrap() - Complex64::new(0.25, -1.0)).norm() < 1e-12);
        for z in probes(10, 0.9, 4) {
            assert!((f.derivative(1, z).unwrap() - fp.eval(z).unwrap()).norm() < 1e-12);
        }
        let zero = theorem_b_integrate(&synth_derivative_kernel(&Measure::zero()).unwrap(), Complex64::new(0.0, 0.0))
            .unwrap();
        assert_eq!(zero.eval(c(0.3, 0.3)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn infinite_mass_is_rejected() {
        let heavy = Measure::from_density(Density::Power { a: -1.5, c: one() });
        assert!(matches!(synth_mobius(&heavy), Err(Error::InfiniteMass { .. })));
    }

    #[test]
    fn domination_constant_is_at_most_one() {
        let lat = Lattice::build(0.5, 0.9).unwrap();
        let coeffs: Vec<Complex64> = (0..lat.len()).map(|n| Complex64::from_polar(1.0 / (n as f64 + 1.0).powi(2), n as f64)).collect();
        let rep = domination_constant(&lat, &coeffs, 2, &probes(50, 0.95, 5)).unwrap();
        assert!(rep.constant <= 1.0 + 1e-12 && rep.constant > 0.0);
    }

    #[test]
    fn least_squares_recovers_a_lattice_combination() {
        let lat = Lattice::build(0.6, 0.6).unwrap();
        let truth: Vec<Complex64> = (0..lat.len()).map(|n| Complex64::new(1.0 / (n as f64 + 1.0), 0.1 * n as f64)).collect();
        let kernel = Kernel::Power { b: 3.0, e: 1.0 };
        let f = |z: ComplexPoint| -> Complex64 {
            lat.centers().iter().zip(&truth).map(|(&zn, &c)| c * kernel.derivative(0, z, zn)).sum()
        };
        let fit = fit_atomic_coefficients(f, &lat, 3.0, 1.0, &probes(4 * lat.len(), 0.9, 6), &probes(40, 0.9, 7)).unwrap();
        assert!(fit.residual_rms < 1e-8 && fit.validation_max < 1e-6, "{fit:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mobius_synthesis_is_bounded_by_mass(ms in proptest::collection::vec((0.0f64..0.99, 0.0f64..6.3, -1.0f64..1.0, -1.0f64..1.0), 1..8),
                                               zm in 0.0f64..0.999, zt in 0.0f64..6.3) {
            let mu = Measure {
                atoms: ms.iter().map(|&(m, t, a, b)| Atom { z: ComplexPoint::from_polar(m, t), w: Complex64::new(a, b) }).collect(),
                density: vec![],
            };
            let mass: f64 = mu.atoms.iter().map(|a| a.w.norm()).sum();
            let f = synth_mobius(&mu).unwrap();
            prop_assert!(f.eval(ComplexPoint::from_polar(zm, zt)).unwrap().norm() <= mass * (1.0 + 1e-12));
        }

        #[test]
        fn synthesis_is_linear(a1 in 0.0f64..0.9, a2 in -1.0f64..1.0, k in 0u32..3, zr in -0.6f64..0.6, zi in -0.6f64..0.6) {
            let mu = Measure::atom(c(a1, 0.2), one()).plus(&polynomial_measure(2, 1).unwrap());
            let nu = Measure::atom(c(-0.3, a1 * 0.5), Complex64::new(0.0, 2.0));
            let alpha = Complex64::new(a2, 0.7);
            let z = c(zr, zi);
            for family in [Kernel::Mobius, Kernel::Power { b: 2.5, e: 1.5 }] {
                let f = |m: &Measure| KernelFunction::new(KernelFamily::Mobius, family, m.clone(), DensityRoute::Exact).unwrap().derivative(k, z).unwrap();
                let lhs = f(&mu.scaled(alpha).plus(&nu));
                let rhs = f(&mu) * alpha + f(&nu);
                prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
            }
        }
    }
}
