//! Möbius maps, the pseudo-hyperbolic metric and pseudo-hyperbolic disks.
//!
//! Areas are measured with the normalized area measure `dA`, under which the
//! unit disk has total mass one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};

pub type ComplexPoint = Complex64;

/// Points closer than this to the unit circle are rejected.
pub const BOUNDARY_EPS: f64 = 1e-14;

/// Fails unless `z` is finite and lies strictly inside `|z| < 1 - BOUNDARY_EPS`.
pub fn check_in_disk(z: ComplexPoint) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 - BOUNDARY_EPS {
        Ok(())
    } else {
        Err(Error::OutsideDisk { re: z.re, im: z.im })
    }
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    require(r > 0.0 && r < 1.0, "r", r, "must lie in (0, 1)")
}

/// `1 - |z|^2`, computed as `(1 - |z|)(1 + |z|)` to keep precision near the circle.
#[inline]
pub fn boundary_weight(z: ComplexPoint) -> f64 {
    let m = z.norm();
    (1.0 - m) * (1.0 + m)
}

/// The involutive disk automorphism `φ_a(z) = (a - z) / (1 - ā z)`.
pub fn mobius_map(a: ComplexPoint, z: ComplexPoint) -> Result<ComplexPoint> {
    check_in_disk(a)?;
    check_in_disk(z)?;
    Ok((a - z) / (1.0 - a.conj() * z))
}

/// `d(z, w) = |z - w| / |1 - z̄ w|`.
pub fn pseudo_distance(z: ComplexPoint, w: ComplexPoint) -> Result<f64> {
    check_in_disk(z)?;
    check_in_disk(w)?;
    Ok(pseudo_distance_unchecked(z, w))
}

#[inline]
pub(crate) fn pseudo_distance_unchecked(z: ComplexPoint, w: ComplexPoint) -> f64 {
    (z - w).norm() / (1.0 - z.conj() * w).norm()
}

/// A Euclidean disk `{w : |w - center| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanDisk {
    pub center: ComplexPoint,
    pub radius: f64,
}

impl EuclideanDisk {
    pub fn contains(&self, w: ComplexPoint) -> bool {
        (w - self.center).norm() < self.radius
    }

    /// Normalized area, `radius^2`.
    pub fn area(&self) -> f64 {
        self.radius * self.radius
    }
}

/// Euclidean realization of the pseudo-hyperbolic disk `D(z, r)`.
pub fn pseudo_disk(z: ComplexPoint, r: f64) -> Result<EuclideanDisk> {
    check_in_disk(z)?;
    check_radius(r)?;
    Ok(pseudo_disk_unchecked(z, r))
}

#[inline]
pub(crate) fn pseudo_disk_unchecked(z: ComplexPoint, r: f64) -> EuclideanDisk {
    let r2 = r * r;
    let denom = 1.0 - r2 * z.norm_sqr();
    EuclideanDisk {
        center: z * ((1.0 - r2) / denom),
        radius: r * boundary_weight(z) / denom,
    }
}

/// Normalized area of `D(z, r)`: `r^2 ((1 - |z|^2) / (1 - r^2 |z|^2))^2`.
pub fn pseudo_disk_area(z: ComplexPoint, r: f64) -> Result<f64> {
    check_in_disk(z)?;
    check_radius(r)?;
    let q = boundary_weight(z) / (1.0 - r * r * z.norm_sqr());
    Ok(r * r * q * q)
}

/// Hyperbolic radius `artanh(d)` associated with a pseudo-hyperbolic distance.
pub fn hyperbolic_from_pseudo(d: f64) -> f64 {
    d.atanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng) -> ComplexPoint {
        let r = rng.gen_range(0.0f64..0.999).sqrt();
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        ComplexPoint::from_polar(r, t)
    }

    #[test]
    fn mobius_fixed_values() {
        assert_eq!(mobius_map(c(0.5, 0.0), c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(mobius_map(c(0.5, 0.0), c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn mobius_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = random_point(&mut rng);
            let z = random_point(&mut rng);
            let back = mobius_map(a, mobius_map(a, z).unwrap()).unwrap();
            assert!((back - z).norm() < 1e-12);
        }
    }

    #[test]
    fn distance_values() {
        assert_eq!(pseudo_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap(), 0.5);
        assert_eq!(pseudo_distance(c(0.3, 0.2), c(0.3, 0.2)).unwrap(), 0.0);
        let d = pseudo_distance(c(0.5, 0.0), c(-0.5, 0.0)).unwrap();
        assert!((d - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(mobius_map(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(pseudo_distance(c(0.0, 1.0 - 1e-15), c(0.0, 0.0)).is_err());
        assert!(pseudo_distance(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
        assert!(pseudo_disk(c(0.2, 0.0), 1.0).is_err());
        assert!(pseudo_disk(c(0.2, 0.0), 0.0).is_err());
    }

    #[test]
    fn pseudo_disk_values() {
        let d = pseudo_disk(c(0.0, 0.0), 0.5).unwrap();
        assert_eq!(d.center, c(0.0, 0.0));
        assert_eq!(d.radius, 0.5);
        let d = pseudo_disk(c(0.5, 0.0), 0.5).unwrap();
        assert!((d.center - c(0.4, 0.0)).norm() < 1e-15);
        assert!((d.radius - 0.4).abs() < 1e-15);
        assert!((pseudo_disk_area(c(0.5, 0.0), 0.5).unwrap() - 0.16).abs() < 1e-15);
        assert!((pseudo_disk_area(c(0.0, 0.0), 0.3).unwrap() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn pseudo_disk_boundary_matches_circle_fit() {
        // Solve |φ_z(w)| = r along rays from z by bisection and fit a circle
        // through the samples via the extreme real-axis crossings.
        let z = c(0.5, 0.0);
        let r = 0.5;
        let mut pts = Vec::new();
        for j in 0..360 {
            let dir = ComplexPoint::from_polar(1.0, j as f64 * std::f64::consts::TAU / 360.0);
            let (mut lo, mut hi) = (0.0, 1.5);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let w = z + dir * mid;
                if w.norm() < 1.0 && pseudo_distance_unchecked(z, w) < r {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            pts.push(z + dir * lo);
        }
        let xmin = pts.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
        let xmax = pts.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        let center = 0.5 * (xmin + xmax);
        let radius = 0.5 * (xmax - xmin);
        assert!((center - 0.4).abs() < 1e-9);
        assert!((radius - 0.4).abs() < 1e-9);
        for p in pts {
            assert!(((p - c(center, 0.0)).norm() - radius).abs() < 1e-9);
        }
    }

    #[test]
    fn membership_agrees_with_euclidean_realization() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = c(0.6, -0.3);
        let disk = pseudo_disk(z, 0.4).unwrap();
        for _ in 0..10_000 {
            let w = random_point(&mut rng);
            let d = pseudo_distance(z, w).unwrap();
            // Skip the measure-zero shell where rounding decides.
            if (d - 0.4).abs() < 1e-12 {
                continue;
            }
            assert_eq!(d < 0.4, disk.contains(w));
        }
    }

    #[test]
    fn monte_carlo_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let disk = pseudo_disk(c(0.7, 0.0), 0.3).unwrap();
        let n = 2_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if x * x + y * y < 1.0 && disk.contains(c(x, y)) {
                hits += 1;
            }
        }
        // Fraction of the square, times 4/π, is the normalized area.
        let mc = hits as f64 / n as f64 * 4.0 / std::f64::consts::PI;
        let exact = pseudo_disk_area(c(0.7, 0.0), 0.3).unwrap();
        assert!((mc / exact - 1.0).abs() < 0.01, "mc {mc} exact {exact}");
    }

    #[test]
    fn area_comparable_to_boundary_weight() {
        for &r in &[0.3, 0.5, 0.8] {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for j in 0..=999 {
                let m = j as f64 * 0.999 / 999.0;
                let z = c(m, 0.0);
                let ratio = pseudo_disk_area(z, r).unwrap() / boundary_weight(z).powi(2);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            assert!(lo >= r * r * 0.999 && hi <= r * r / (1.0 - r * r).powi(2) * 1.001);
        }
    }
}
