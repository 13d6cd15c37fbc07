//! Pseudo-hyperbolic `r`-lattices with disjoint cells.
//!
//! Centers sit on concentric rings whose hyperbolic radii are spaced so that
//! radially adjacent rings are exactly `r/2` apart in the pseudo-hyperbolic
//! metric; each ring carries the largest number of equispaced centers whose
//! neighbours are still at least `r/2` apart. Cells are nearest-center
//! (Voronoi) regions in the pseudo-hyperbolic metric with ties going to the
//! lower index. The cell table is fixed at construction: removing a center
//! leaves a hole rather than redistributing its cell.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};
use crate::geometry::{check_radius, pseudo_disk_unchecked, pseudo_distance_unchecked, ComplexPoint};

/// Default ring and neighbour spacing as a multiple of `r`.
pub const DEFAULT_SPACING: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub modulus: f64,
    pub count: usize,
    pub phase: f64,
    /// Slot index of the first center on this ring.
    pub first: usize,
}

impl Ring {
    fn slot_point(&self, j: usize) -> ComplexPoint {
        ComplexPoint::from_polar(self.modulus, self.phase + TAU * j as f64 / self.count as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    r: f64,
    rho_max: f64,
    centers: Vec<ComplexPoint>,
    rings: Vec<Ring>,
    step: f64,
    /// Cell table: slot -> center index, `None` once a center is removed.
    slots: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LatticeReport {
    pub samples: usize,
    pub coverage_violations: usize,
    pub disjointness_violations: usize,
    pub inner_containment_violations: usize,
    pub outer_containment_violations: usize,
}

impl LatticeReport {
    pub fn is_clean(&self) -> bool {
        self.coverage_violations == 0
            && self.disjointness_violations == 0
            && self.inner_containment_violations == 0
            && self.outer_containment_violations == 0
    }
}

#[derive(Serialize)]
struct LatticeExport<'a> {
    r: f64,
    rho_max: f64,
    centers: &'a [ComplexPoint],
}

/// Pseudo-distance between neighbouring points of `n` equispaced points on `|z| = m`.
fn neighbour_gap(m: f64, n: usize) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let a = ComplexPoint::new(m, 0.0);
    pseudo_distance_unchecked(a, ComplexPoint::from_polar(m, TAU / n as f64))
}

/// Largest count whose neighbour gap stays at least `gap`.
fn ring_count(m: f64, gap: f64) -> usize {
    if neighbour_gap(m, 2) < gap {
        return 1;
    }
    let mut hi = 2usize;
    while neighbour_gap(m, hi) >= gap {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if neighbour_gap(m, mid) >= gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl Lattice {
    /// Builds the ring lattice over `|z| <= rho_max` with the default spacing.
    pub fn build(r: f64, rho_max: f64) -> Result<Lattice> {
        Self::build_with_spacing(r, rho_max, DEFAULT_SPACING * r)
    }

    /// Builds the ring lattice with rings `spacing` apart and neighbouring
    /// centers on a ring at least `spacing` apart.
    pub fn build_with_spacing(r: f64, rho_max: f64, spacing: f64) -> Result<Lattice> {
        check_radius(r)?;
        require(rho_max > 0.0 && rho_max < 1.0, "rho_max", rho_max, "must lie in (0, 1)")?;
        require(spacing >= 0.5 * r && spacing < 1.0, "spacing", spacing, "must lie in [r/2, 1)")?;
        let step = spacing.atanh();
        let beta_max = rho_max.atanh();
        let mut rings = Vec::new();
        let mut first = 0;
        let mut k = 0usize;
        loop {
            let beta = (k as f64 + 0.5) * step;
            let modulus = if beta > beta_max {
                // An outer band wider than the minimal separation gets a
                // final ring on the truncation circle.
                let prev = (k as f64 - 0.5) * step;
                if k > 0 && beta_max - prev < (0.5 * r).atanh() {
                    break;
                }
                rho_max
            } else {
                beta.tanh()
            };
            let count = ring_count(modulus, spacing);
            let phase = if k % 2 == 1 { PI / count as f64 } else { 0.0 };
            rings.push(Ring {
                modulus,
                count,
                phase,
                first,
            });
            first += count;
            k += 1;
            if beta > beta_max {
                break;
            }
        }
        let centers: Vec<ComplexPoint> = rings
            .iter()
            .flat_map(|ring| (0..ring.count).map(move |j| ring.slot_point(j)))
            .collect();
        let slots = (0..centers.len()).map(Some).collect();
        let lat = Lattice {
            r,
            rho_max,
            centers,
            rings,
            step,
            slots,
        };
        lat.check_covering()?;
        Ok(lat)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn centers(&self) -> &[ComplexPoint] {
        &self.centers
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// Largest distance from a probe point to its center, over a fine probe grid.
    pub fn covering_radius(&self) -> f64 {
        let mut worst = 0.0f64;
        let beta_max = self.rho_max.atanh();
        for ring in &self.rings {
            let b = ring.modulus.atanh();
            for i in 0..=16 {
                let rb = (b + self.step * (i as f64 / 16.0 - 0.5)).clamp(0.0, beta_max);
                for j in 0..ring.count.max(2) * 8 {
                    let z = ComplexPoint::from_polar(rb.tanh(), ring.phase + PI * j as f64 / (4 * ring.count) as f64);
                    worst = worst.max(self.ring_candidates(z).1);
                }
            }
        }
        worst
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Copy with center `n` deleted and every other cell left as it was.
    pub fn without_center(&self, n: usize) -> Lattice {
        let mut out = self.clone();
        if n >= out.centers.len() {
            return out;
        }
        out.centers.remove(n);
        for slot in out.slots.iter_mut() {
            *slot = match *slot {
                Some(i) if i == n => None,
                Some(i) if i > n => Some(i - 1),
                other => other,
            };
        }
        out
    }

    /// Copy whose recorded radius is `r` while centers and cells are unchanged.
    pub fn with_recorded_radius(&self, r: f64) -> Lattice {
        Lattice { r, ..self.clone() }
    }

    fn ring_candidates(&self, z: ComplexPoint) -> (usize, f64) {
        // Returns the nearest slot and its distance, scanning nearby rings and
        // the three angularly closest slots on each.
        let beta = z.norm().atanh();
        let reach = self.r.atanh() + 2.0 * self.step;
        let theta = z.arg();
        let mut best = (usize::MAX, f64::INFINITY);
        for ring in &self.rings {
            if (ring.modulus.atanh() - beta).abs() > reach {
                continue;
            }
            let n = ring.count;
            let pos = (theta - ring.phase) / TAU * n as f64;
            let j0 = pos.round() as i64;
            let span: Vec<i64> = if n <= 3 { (0..n as i64).collect() } else { vec![j0 - 1, j0, j0 + 1] };
            for j in span {
                let j = j.rem_euclid(n as i64) as usize;
                let slot = ring.first + j;
                let d = pseudo_distance_unchecked(z, ring.slot_point(j));
                if d < best.1 || (d == best.1 && slot < best.0) {
                    best = (slot, d);
                }
            }
        }
        best
    }

    /// Index of the cell containing `z`.
    pub fn cell_of(&self, z: ComplexPoint) -> Result<usize> {
        let m = z.norm();
        if !(m <= self.rho_max) {
            return Err(Error::OutsideLattice {
                modulus: m,
                rho_max: self.rho_max,
            });
        }
        let (slot, _) = self.ring_candidates(z);
        self.slots[slot].ok_or(Error::Uncovered { index: slot })
    }

    fn check_covering(&self) -> Result<()> {
        let step = self.step;
        let beta_max = self.rho_max.atanh();
        for (k, ring) in self.rings.iter().enumerate() {
            let b = ring.modulus.atanh();
            let mut radii = vec![(b - 0.5 * step).max(0.0), b, (b + 0.5 * step).min(beta_max)];
            if k + 1 == self.rings.len() {
                radii.push(beta_max);
            }
            for rb in radii {
                let m = rb.tanh();
                for j in 0..ring.count.max(2) * 2 {
                    let theta = ring.phase + PI * j as f64 / ring.count as f64;
                    let z = ComplexPoint::from_polar(m, theta);
                    let (slot, d) = self.ring_candidates(z);
                    if d >= self.r {
                        return Err(Error::LatticeContainment {
                            index: slot,
                            reason: format!("point at |z| = {m:.6} lies {d:.4} from its center, not below r = {}", self.r),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest present center by an independent search over every center
    /// inside the Euclidean realization of `D(z, reach)`.
    fn nearest_by_search(&self, z: ComplexPoint, reach: f64) -> Option<(usize, f64)> {
        let disk = pseudo_disk_unchecked(z, reach);
        let lo = (disk.center.norm() - disk.radius).max(0.0);
        let hi = disk.center.norm() + disk.radius;
        let start = self.centers.partition_point(|c| c.norm() < lo - 1e-12);
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.centers.iter().enumerate().skip(start) {
            if c.norm() > hi + 1e-12 {
                break;
            }
            if !disk.contains(*c) {
                continue;
            }
            let d = pseudo_distance_unchecked(z, *c);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LatticeExport {
            r: self.r,
            rho_max: self.rho_max,
            centers: &self.centers,
        })?)
    }
}

fn sample_point(rng: &mut ChaCha8Rng, rho_max: f64, hyperbolic: bool) -> ComplexPoint {
    let theta = rng.gen_range(0.0..TAU);
    let m = if hyperbolic {
        (rng.gen::<f64>() * rho_max.atanh()).tanh()
    } else {
        rho_max * rng.gen::<f64>().sqrt()
    };
    ComplexPoint::from_polar(m.min(rho_max), theta)
}

/// Monte-Carlo check of the partition, containment and coverage properties.
///
/// Half of the samples are uniform in area and half uniform in hyperbolic
/// radius, so the rings near `rho_max` are exercised.
pub fn verify_lattice(lat: &Lattice, samples: usize, seed: u64) -> LatticeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LatticeReport {
        samples,
        ..Default::default()
    };
    for i in 0..samples {
        let z = sample_point(&mut rng, lat.rho_max, i % 2 == 1);
        match lat.cell_of(z) {
            Err(_) => rep.coverage_violations += 1,
            Ok(n) => {
                let d = pseudo_distance_unchecked(z, lat.centers[n]);
                if d >= lat.r {
                    rep.outer_containment_violations += 1;
                }
                match lat.nearest_by_search(z, d.max(1e-9) * (1.0 + 1e-9)) {
                    Some((m, dm)) if m != n && dm < d => rep.disjointness_violations += 1,
                    _ => {}
                }
            }
        }
    }
    if !lat.centers.is_empty() {
        let inner = samples.div_ceil(4);
        for i in 0..inner {
            let n = i % lat.centers.len();
            let center = lat.centers[n];
            let u = ComplexPoint::from_polar(0.25 * lat.r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let w = (center - u) / (1.0 - center.conj() * u);
            if w.norm() > lat.rho_max {
                continue;
            }
            if lat.cell_of(w).ok() != Some(n) {
                rep.inner_containment_violations += 1;
            }
        }
    }
    rep
}
