//! Truncated-seminorm reports and the finite/infinite trend classifier.
//!
//! A report carries the values of a truncated quantity over an increasing
//! schedule of truncation parameters. Trends are read against
//! `x = log(1 / (1 - ρ))` on the disk and against `x = R` in the plane.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converged,
    Divergent,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "CONVERGED",
            Verdict::Divergent => "DIVERGENT",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Truncation radii `ρ < 1` in the unit disk.
    Disk,
    /// Truncation radii `R > 0` in the plane.
    Plane,
}

impl ScheduleKind {
    fn abscissa(&self, p: f64) -> f64 {
        match self {
            ScheduleKind::Disk => -(1.0 - p).ln(),
            ScheduleKind::Plane => p,
        }
    }
}

/// Thresholds of the trend classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendRule {
    /// Increments below `rel_tol * |last value|` count as settled.
    pub rel_tol: f64,
    /// Slope ratios at or above this between consecutive steps mean the
    /// increments are not decaying.
    pub growth_ratio: f64,
    /// Sup-type profiles are bounded when they grow by less than this
    /// fraction over the last three shells.
    pub sup_rel_growth: f64,
}

impl Default for TrendRule {
    fn default() -> Self {
        TrendRule {
            rel_tol: 1e-3,
            growth_ratio: 0.85,
            sup_rel_growth: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub kind: ScheduleKind,
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: Verdict,
    /// Least-squares slope of `log(value)` against the trend abscissa over
    /// the second half of the schedule.
    pub growth_exponent: f64,
}

impl SeminormReport {
    /// Report for an integral-type quantity.
    pub fn integral(kind: ScheduleKind, schedule: Vec<f64>, values: Vec<f64>, rule: &TrendRule) -> Self {
        let xs: Vec<f64> = schedule.iter().map(|&p| kind.abscissa(p)).collect();
        let verdict = classify(&xs, &values, rule);
        Self::assemble(kind, schedule, values, verdict, &xs)
    }

    /// Report for a running-supremum quantity.
    pub fn supremum(kind: ScheduleKind, schedule: Vec<f64>, values: Vec<f64>, rule: &TrendRule) -> Self {
        let xs: Vec<f64> = schedule.iter().map(|&p| kind.abscissa(p)).collect();
        let verdict = classify_sup(&xs, &values, rule);
        Self::assemble(kind, schedule, values, verdict, &xs)
    }

    fn assemble(kind: ScheduleKind, schedule: Vec<f64>, values: Vec<f64>, verdict: Verdict, xs: &[f64]) -> Self {
        let growth_exponent = growth_exponent(xs, &values);
        SeminormReport {
            kind,
            schedule,
            values,
            verdict,
            growth_exponent,
        }
    }

    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Values still increasing at the end of the schedule.
    pub fn trending_up(&self) -> bool {
        let n = self.values.len();
        n >= 2 && self.values[n - 1] > self.values[n - 2] * (1.0 + 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,value\n");
        for (p, v) in self.schedule.iter().zip(&self.values) {
            let _ = writeln!(out, "{p:.17e},{v:.17e}");
        }
        let _ = writeln!(out, "# verdict,{}", self.verdict);
        let _ = writeln!(out, "# growth_exponent,{:.17e}", self.growth_exponent);
        out
    }
}

/// Classifies an increasing-truncation sequence as settled or growing.
///
/// CONVERGED when the last three increments are below tolerance, or when
/// their slopes decay geometrically and the extrapolated tail is below
/// tolerance. DIVERGENT when the last three slopes are not decaying (a log
/// law gives constant slopes, a power law growing ones). UNDECIDED
/// otherwise.
pub fn classify(xs: &[f64], values: &[f64], rule: &TrendRule) -> Verdict {
    let n = values.len();
    if values.iter().all(|&v| v == 0.0) && n > 0 {
        return Verdict::Converged;
    }
    if n < 4 || values.iter().any(|v| !v.is_finite()) {
        return if values.iter().any(|v| v.is_infinite()) {
            Verdict::Divergent
        } else {
            Verdict::Undecided
        };
    }
    let scale = values[n - 1].abs().max(f64::MIN_POSITIVE);
    let incs: Vec<f64> = (n - 3..n).map(|i| values[i] - values[i - 1]).collect();
    if incs.iter().all(|d| d.abs() <= rule.rel_tol * scale) {
        return Verdict::Converged;
    }
    let slopes: Vec<f64> = (n - 3..n)
        .zip(&incs)
        .map(|(i, d)| d / (xs[i] - xs[i - 1]))
        .collect();
    if slopes.iter().all(|&s| s > 0.0) {
        let q1 = slopes[1] / slopes[0];
        let q2 = slopes[2] / slopes[1];
        if q1 >= rule.growth_ratio && q2 >= rule.growth_ratio && slopes[2] * (xs[n - 1] - xs[n - 2]) > rule.rel_tol * scale {
            return Verdict::Divergent;
        }
        if q1 < 1.0 && q2 < 1.0 {
            let dx = 0.5 * (xs[n - 1] - xs[n - 3]);
            let rate = -q2.max(q1).ln() / dx;
            let tail = slopes[2] / rate;
            if tail <= rule.rel_tol * scale {
                return Verdict::Converged;
            }
        }
    }
    Verdict::Undecided
}

/// Verdict for a running supremum: bounded when the last three shells add
/// less than `sup_rel_growth`, divergent when [`classify`] says so.
pub fn classify_sup(xs: &[f64], values: &[f64], rule: &TrendRule) -> Verdict {
    let n = values.len();
    if n > 0 && values.iter().all(|&v| v == 0.0) {
        return Verdict::Converged;
    }
    if n < 4 {
        return Verdict::Undecided;
    }
    let last = values[n - 1];
    if last.is_finite() && last - values[n - 4] <= rule.sup_rel_growth * last.abs() {
        return Verdict::Converged;
    }
    match classify(xs, values, rule) {
        Verdict::Divergent => Verdict::Divergent,
        _ => Verdict::Undecided,
    }
}

fn growth_exponent(xs: &[f64], values: &[f64]) -> f64 {
    let n = values.len();
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&i| values[i] > 0.0 && values[i].is_finite())
        .map(|i| (xs[i], values[i].ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Truncation radii `1 - 10^{-k/2}` for `k = 2..=16`, i.e. 0.9 up to `1 - 1e-8`.
pub fn default_rho_schedule() -> Vec<f64> {
    (2..=16).map(|k| 1.0 - 10f64.powf(-(k as f64) / 2.0)).collect()
}

/// Schedule `1 - 10^{-k/2}` for `k = 2..=2 * decades`.
pub fn rho_schedule(decades: u32) -> Vec<f64> {
    (2..=2 * decades).map(|k| 1.0 - 10f64.powf(-(k as f64) / 2.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_report(f: impl Fn(f64) -> f64) -> SeminormReport {
        let sched = default_rho_schedule();
        let vals = sched.iter().map(|&r| f(r)).collect();
        SeminormReport::integral(ScheduleKind::Disk, sched, vals, &TrendRule::default())
    }

    #[test]
    fn constant_sequence_converges() {
        assert_eq!(disk_report(|_| 3.0).verdict, Verdict::Converged);
        assert_eq!(disk_report(|_| 0.0).verdict, Verdict::Converged);
    }

    #[test]
    fn square_root_tail_converges_by_extrapolation() {
        // ∫_0^{ρ^2} (1 - t)^{-1/2} dt = 2 - 2 sqrt(1 - ρ^2)
        let r = disk_report(|rho| 2.0 - 2.0 * ((1.0 - rho) * (1.0 + rho)).sqrt());
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn log_and_power_growth_diverge() {
        let r = disk_report(|rho| (1.0 / (1.0 - rho * rho)).ln());
        assert_eq!(r.verdict, Verdict::Divergent);
        let r = disk_report(|rho| (1.0 - rho * rho).powf(-0.5));
        assert_eq!(r.verdict, Verdict::Divergent);
        assert!((r.growth_exponent - 0.5).abs() < 0.01);
    }

    #[test]
    fn short_schedules_are_undecided() {
        let r = SeminormReport::integral(ScheduleKind::Disk, vec![0.9, 0.99], vec![1.0, 2.0], &TrendRule::default());
        assert_eq!(r.verdict, Verdict::Undecided);
    }

    #[test]
    fn supremum_rule() {
        let sched = default_rho_schedule();
        let bounded: Vec<f64> = sched.iter().map(|&r| 1.0 - (1.0 - r) * 0.1).collect();
        let r = SeminormReport::supremum(ScheduleKind::Disk, sched.clone(), bounded, &TrendRule::default());
        assert_eq!(r.verdict, Verdict::Converged);
        let growing: Vec<f64> = sched.iter().map(|&r| (1.0 - r).powf(-1.5)).collect();
        let r = SeminormReport::supremum(ScheduleKind::Disk, sched, growing, &TrendRule::default());
        assert_eq!(r.verdict, Verdict::Divergent);
    }

    #[test]
    fn csv_has_one_row_per_radius() {
        let r = disk_report(|_| 1.0);
        assert_eq!(r.to_csv().lines().filter(|l| !l.starts_with('#')).count(), 16);
    }
}
