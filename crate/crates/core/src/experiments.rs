//! Named, reproducible experiments. Each produces a report with declared
//! tolerances, pass/fail assertions, scalars and data series.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    default_plane_schedule, fock_localized_lp, fock_norm, fock_probes, fock_reproduce_check, synth_fock, ExpQuadratic,
    PlaneDensity, PlaneLattice, PlaneMeasure, Polynomial,
};
use crate::geometry::ComplexPoint;
use crate::lattice::{verify_lattice, Lattice, DEFAULT_SPACING};
use crate::measure::{
    carleson_constant, carleson_probes, cr_constant, localized_functional, localized_lp_norm, log_moment,
    sequence_lp_report, total_mass, Atom, Density, LocalizedFunctional, Measure,
};
use crate::membership::{besov_seminorm, forelli_rudin, lipschitz_seminorm, MembershipScheme, SpaceFamily, SpaceSpec, TestFunction};
use crate::quadrature::QuadratureScheme;
use crate::report::{classify_sup, default_rho_schedule, SeminormReport, TrendRule, Verdict};
use crate::synthesis::{
    lattice_atomic_measure, polynomial_measure, synth_derivative_kernel, synth_mobius, synth_mobius_route, theorem_b_integrate,
    DensityRoute,
};

pub const EXPERIMENTS: [&str; 8] = [
    "cr_constant",
    "lemma3_equiv",
    "cor4_counterexample",
    "bloch_carleson",
    "thmA_forward",
    "thmB_roundtrip",
    "lemma6_polynomials",
    "fock_roundtrip",
];

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Overrides shared by all experiments; `None` keeps the experiment default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub t: Option<f64>,
    pub alpha: Option<f64>,
    pub rho_list: Option<Vec<f64>>,
    pub k: Option<u32>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    pub spacing: Option<f64>,
    pub radial_nodes: Option<usize>,
    pub angular_nodes: Option<usize>,
    pub rho: Option<f64>,
    pub tol: Option<f64>,
}

impl Params {
    fn scheme(&self) -> QuadratureScheme {
        let mut s = QuadratureScheme::default();
        if let Some(n) = self.radial_nodes {
            s.radial_nodes = n;
        }
        if let Some(n) = self.angular_nodes {
            s.angular_nodes = n;
        }
        if let Some(rho) = self.rho {
            s.rho = rho;
        }
        if let Some(tol) = self.tol {
            s.tol = tol;
        }
        s
    }

    fn schedule(&self) -> Vec<f64> {
        self.rho_list.clone().unwrap_or_else(default_rho_schedule)
    }

    fn spacing(&self) -> f64 {
        self.spacing.unwrap_or(DEFAULT_SPACING)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: Params,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(name: &str) -> ExperimentSpec {
        ExperimentSpec {
            name: name.to_string(),
            params: Params::default(),
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Key into the report's tolerance table.
    pub tolerance: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub params: Params,
    pub tolerances: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub scalars: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub series: Vec<Series>,
    pub passed: bool,
}

impl ExperimentReport {
    fn new(spec: &ExperimentSpec) -> ExperimentReport {
        ExperimentReport {
            experiment: spec.name.clone(),
            seed: spec.seed,
            params: spec.params.clone(),
            tolerances: BTreeMap::new(),
            assertions: Vec::new(),
            scalars: BTreeMap::new(),
            labels: BTreeMap::new(),
            series: Vec::new(),
            passed: true,
        }
    }

    fn tol(&mut self, key: &str, value: f64) -> f64 {
        self.tolerances.insert(key.to_string(), value);
        value
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, tolerance: &str, detail: impl Into<String>) {
        debug_assert!(self.tolerances.contains_key(tolerance));
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            tolerance: tolerance.to_string(),
            detail: detail.into(),
        });
    }

    fn scalar(&mut self, name: impl Into<String>, v: f64) {
        self.scalars.insert(name.into(), v);
    }

    fn label(&mut self, name: impl Into<String>, v: impl Into<String>) {
        self.labels.insert(name.into(), v.into());
    }

    fn series(&mut self, name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) {
        self.series.push(Series { name: name.into(), x, y });
    }

    fn seminorm(&mut self, name: &str, rep: &SeminormReport) {
        self.series(name, rep.schedule.clone(), rep.values.clone());
        self.label(format!("{name}.verdict"), verdict_name(rep.verdict));
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One record per row: `record,name,index,x,y,note`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["record", "name", "index", "x", "y", "note"]).map_err(io)?;
        w.write_record(["experiment", &self.experiment, "", "", "", ""]).map_err(io)?;
        w.write_record(["seed", "", "", &self.seed.to_string(), "", ""]).map_err(io)?;
        w.write_record(["passed", "", "", if self.passed { "1" } else { "0" }, "", ""]).map_err(io)?;
        for (k, v) in &self.tolerances {
            w.write_record(["tolerance", k, "", &v.to_string(), "", ""]).map_err(io)?;
        }
        for a in &self.assertions {
            let flag = if a.passed { "PASS" } else { "FAIL" };
            w.write_record(["assertion", &a.name, "", flag, &a.tolerance, &a.detail]).map_err(io)?;
        }
        for (k, v) in &self.scalars {
            w.write_record(["scalar", k, "", &v.to_string(), "", ""]).map_err(io)?;
        }
        for (k, v) in &self.labels {
            w.write_record(["label", k, "", "", "", v]).map_err(io)?;
        }
        for s in &self.series {
            for (i, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
                w.write_record(["series", &s.name, &i.to_string(), &x.to_string(), &y.to_string(), ""]).map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<dir>/<experiment>.<ext>` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let (text, ext) = match format {
            Format::Json => (self.to_json()?, "json"),
            Format::Csv => (self.to_csv()?, "csv"),
        };
        let path = dir.join(format!("{}.{ext}", self.experiment));
        let tmp = dir.join(format!(".{}.{ext}.{}.tmp", self.experiment, std::process::id()));
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "CONVERGED",
        Verdict::Divergent => "DIVERGENT",
        Verdict::Undecided => "UNDECIDED",
    }
}

/// Runs one registered experiment; `"all"` is handled by [`run_all`].
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(spec);
    match spec.name.as_str() {
        "cr_constant" => cr_constant_exp(spec, &mut rep)?,
        "lemma3_equiv" => lemma3_equiv(spec, &mut rep)?,
        "cor4_counterexample" => cor4_counterexample(spec, &mut rep)?,
        "bloch_carleson" => bloch_carleson(spec, &mut rep)?,
        "thmA_forward" => thm_a_forward(spec, &mut rep)?,
        "thmB_roundtrip" => thm_b_roundtrip(spec, &mut rep)?,
        "lemma6_polynomials" => lemma6_polynomials(spec, &mut rep)?,
        "fock_roundtrip" => fock_roundtrip(spec, &mut rep)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    }
    Ok(rep)
}

/// Every registered experiment with the same parameters and seed.
pub fn run_all(params: &Params, seed: u64) -> Result<Vec<ExperimentReport>> {
    EXPERIMENTS
        .iter()
        .map(|name| {
            run(&ExperimentSpec {
                name: name.to_string(),
                params: params.clone(),
                seed,
            })
        })
        .collect()
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cr_constant_exp(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    let tol = rep.tol("cr_relative", 0.01);
    let radii = spec.params.r.map(|r| vec![r]).unwrap_or_else(|| vec![0.3, 0.5]);
    let scheme = spec.params.scheme();
    let schedule = spec.params.schedule();
    let panel = [
        ("atom", Measure::atom(ComplexPoint::new(0.3, 0.2), one())),
        (
            "two_atoms",
            Measure {
                atoms: vec![
                    Atom { z: ComplexPoint::new(0.5, 0.0), w: one() },
                    Atom { z: ComplexPoint::new(-0.2, 0.6), w: Complex64::new(0.0, 2.0) },
                ],
                density: Vec::new(),
            },
        ),
        ("area", Measure::area()),
    ];
    for &r in &radii {
        let cr = cr_constant(r);
        rep.scalar(format!("C_r[r={r}]"), cr);
        for (name, mu) in &panel {
            let mass = mu.atoms.iter().map(|a| a.w.norm()).sum::<f64>() + if mu.density.is_empty() { 0.0 } else { 1.0 };
            let norm = localized_lp_norm(mu, r, 1.0, &schedule, &scheme)?;
            let ratio = norm.last() / mass;
            rep.seminorm(&format!("{name}[r={r}]"), &norm);
            rep.scalar(format!("ratio.{name}[r={r}]"), ratio);
            let err = rel_err(ratio, cr);
            rep.check(
                format!("{name} r={r}"),
                err <= tol,
                "cr_relative",
                format!("ratio {ratio:.10} vs C_r {cr:.10}, relative error {err:.3e}"),
            );
        }
    }
    Ok(())
}

fn lemma3_equiv(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    rep.tol("verdict_agreement", 0.0);
    let p = spec.params.p.unwrap_or(1.0);
    let radii = spec.params.r.map(|r| vec![r]).unwrap_or_else(|| vec![0.3, 0.5]);
    let schedule = spec
        .params
        .rho_list
        .clone()
        .unwrap_or_else(|| (4..=12).map(|k| 1.0 - 10f64.powf(-(k as f64) / 4.0)).collect());
    let rho_max = *schedule.last().unwrap();
    let scheme = spec.params.scheme();
    let boundary_atoms = Measure {
        atoms: (1..=20)
            .map(|n| {
                let z = ComplexPoint::from_polar(1.0 - 0.5f64.powi(n), 0.7 * n as f64);
                Atom { z, w: one() }
            })
            .collect(),
        density: Vec::new(),
    }
    .atoms_weighted_by_boundary(3.0);
    let panel = [
        ("power_2.5", Measure::from_density(Density::Power { a: 2.5, c: one() })),
        ("power_1", Measure::from_density(Density::Power { a: 1.0, c: one() })),
        ("power_0.5", Measure::from_density(Density::Power { a: 0.5, c: one() })),
        ("area", Measure::area()),
        ("atom", Measure::atom(ComplexPoint::new(0.5, 0.0), one())),
        ("boundary_atoms", boundary_atoms),
    ];
    let lattices = radii
        .iter()
        .map(|&r| Lattice::build_with_spacing(r, rho_max, spec.params.spacing() * r))
        .collect::<Result<Vec<_>>>()?;
    for (name, mu) in &panel {
        for &s in &radii {
            let a = localized_functional(mu, LocalizedFunctional::averaged(s, p), &schedule, &scheme)?;
            rep.seminorm(&format!("{name}.function[s={s}]"), &a);
            for (lat, &r) in lattices.iter().zip(&radii) {
                let b = sequence_lp_report(mu, lat, r, p, true, &schedule)?;
                if s == radii[0] {
                    rep.seminorm(&format!("{name}.sequence[r={r}]"), &b);
                }
                rep.check(
                    format!("{name} s={s} r={r}"),
                    a.verdict == b.verdict,
                    "verdict_agreement",
                    format!("function {} / sequence {}", verdict_name(a.verdict), verdict_name(b.verdict)),
                );
            }
        }
    }
    Ok(())
}

fn cor4_counterexample(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    let mass_tol = rep.tol("mass_vs_pi2_over_6", 1e-4);
    let (lo, hi) = (rep.tol("log_ratio_low", 0.9), rep.tol("log_ratio_high", 1.1));
    let cross_tol = rep.tol("quadrature_cross_check", 1e-6);
    let n_max = spec.params.k.map(|k| 10usize.pow(k)).unwrap_or(10_000);
    // Atoms at 1 - |z_n|^2 = e^{-n} with weights 1/n^2; log(1/(1 - |z_n|^2)) = n exactly.
    let mut mass = 0.0;
    let mut log_sum = 0.0;
    let (mut xs, mut mass_series, mut log_series) = (Vec::new(), Vec::new(), Vec::new());
    for n in 1..=n_max {
        let w = 1.0 / (n as f64 * n as f64);
        mass += w;
        log_sum += n as f64 * w;
        if n.is_power_of_two() || n == n_max || n % 1000 == 0 {
            xs.push(n as f64);
            mass_series.push(mass);
            log_series.push(log_sum / (n as f64).ln().max(f64::MIN_POSITIVE));
        }
    }
    rep.series("total_mass", xs.clone(), mass_series);
    rep.series("log_moment_over_ln_N", xs, log_series);
    let target = PI * PI / 6.0;
    rep.scalar("total_mass", mass);
    rep.scalar("log_moment", log_sum);
    let gap = (target - mass).abs();
    rep.check("total mass converges to pi^2/6", gap <= mass_tol, "mass_vs_pi2_over_6", format!("gap {gap:.6e} at N={n_max}"));
    let ratio = log_sum / (n_max as f64).ln();
    rep.scalar("log_ratio", ratio);
    rep.check(
        "log moment tracks ln N",
        (lo..=hi).contains(&ratio),
        "log_ratio_low",
        format!("sum/ln N = {ratio:.6} at N={n_max}"),
    );
    // The first atoms through the measure machinery.
    let head = 16;
    let mu = Measure {
        atoms: (1..=head)
            .map(|n| Atom {
                z: ComplexPoint::from_polar((1.0 - (-(n as f64)).exp()).sqrt(), 0.37 * n as f64),
                w: Complex64::new(1.0 / (n * n) as f64, 0.0),
            })
            .collect(),
        density: Vec::new(),
    };
    let scheme = spec.params.scheme();
    let schedule = default_rho_schedule();
    let tm = total_mass(&mu, &schedule, &scheme)?;
    let lm = log_moment(&mu, &schedule, &scheme)?;
    let direct_mass: f64 = (1..=head).map(|n| 1.0 / (n * n) as f64).sum();
    let direct_log: f64 = (1..=head).map(|n| 1.0 / n as f64).sum();
    rep.seminorm("measure.total_mass", &tm);
    rep.seminorm("measure.log_moment", &lm);
    let e1 = rel_err(tm.last(), direct_mass);
    let e2 = rel_err(lm.last(), direct_log);
    rep.check(
        "measure total mass matches direct sum",
        e1 <= cross_tol,
        "quadrature_cross_check",
        format!("{:.12} vs {direct_mass:.12}", tm.last()),
    );
    rep.check(
        "measure log moment matches harmonic sum",
        e2 <= cross_tol,
        "quadrature_cross_check",
        format!("{:.12} vs {direct_log:.12}", lm.last()),
    );
    // The Berezin side pairs each atom with the logarithmically growing integral.
    let fr: Vec<f64> = (1..=6)
        .map(|n| forelli_rudin(2.0, 4.0, ComplexPoint::new((1.0 - (-(n as f64)).exp()).sqrt(), 0.0)))
        .collect::<Result<_>>()?;
    rep.series("forelli_rudin_2_4_at_atoms", (1..=6).map(|n| n as f64).collect(), fr);
    Ok(())
}

fn bloch_carleson(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    rep.tol("sup_growth_last_three", TrendRule::default().sup_rel_growth);
    let r = spec.params.r.unwrap_or(0.5);
    let schedule: Vec<f64> = spec
        .params
        .rho_list
        .clone()
        .unwrap_or_else(|| (4..=24).map(|k| 1.0 - 10f64.powf(-(k as f64) / 4.0)).collect());
    let probes = carleson_probes(16, *schedule.last().unwrap());
    let mu = Measure::from_density(Density::BlochLog { c: one() });
    let rule = TrendRule::default();
    for (t, expect) in [(1.0, Verdict::Converged), (1.5, Verdict::Divergent)] {
        let prof = carleson_constant(&mu, t, r, &probes)?;
        let sups = prof.shell_sup(&schedule);
        let xs: Vec<f64> = schedule.iter().map(|p| -(1.0 - p).ln()).collect();
        let verdict = classify_sup(&xs, &sups, &rule);
        rep.series(format!("carleson_quotient_shell_sup[t={t}]"), schedule.clone(), sups);
        rep.label(format!("t={t}.verdict"), verdict_name(verdict));
        rep.scalar(format!("constant[t={t}]"), prof.constant);
        let what = if t == 1.0 { "bloch-log density is 1-Carleson" } else { "control: not 1.5-Carleson" };
        rep.check(what, verdict == expect, "sup_growth_last_three", format!("verdict {}", verdict_name(verdict)));
    }
    Ok(())
}

/// Schedule `1 - 10^{-k/4}` stopping at `rho_max`.
fn lattice_schedule(rho_max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (2..)
        .map(|k| 1.0 - 10f64.powf(-(k as f64) / 4.0))
        .take_while(|&m| m < rho_max - 1e-12)
        .collect();
    out.push(rho_max);
    out
}

fn thm_a_forward(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    rep.tol("increment_rel", TrendRule::default().rel_tol);
    rep.tol("lattice_violations", 0.0);
    let r = spec.params.r.unwrap_or(0.5);
    let rho_max = spec.params.rho.unwrap_or(0.99);
    let lat = Lattice::build_with_spacing(r, rho_max, spec.params.spacing() * r)?;
    rep.scalar("lattice.len", lat.len() as f64);
    let check = verify_lattice(&lat, 20_000, spec.seed);
    rep.check("lattice valid", check.is_clean(), "lattice_violations", format!("{check:?}"));
    let scheme = QuadratureScheme::default();
    let opts = MembershipScheme::default();
    let mschedule = lattice_schedule(rho_max);
    let besov_schedule = spec.params.schedule();
    let ps = spec.params.p.map(|p| vec![p]).unwrap_or_else(|| vec![0.5, 1.0]);
    for &p in &ps {
        let k = SpaceSpec::new(SpaceFamily::Besov { p })?.k;
        // |c_n|^p decays like n^{-3}.
        let coeffs: Vec<Complex64> = (0..lat.len())
            .map(|n| Complex64::from_polar((n as f64 + 1.0).powf(-3.0 / p), 0.9 * n as f64))
            .collect();
        let mu = lattice_atomic_measure(&lat, &coeffs, k)?;
        let measure = localized_lp_norm(&mu, r, p, &mschedule, &scheme)?;
        rep.seminorm(&format!("measure_condition[p={p}]"), &measure);
        rep.check(
            format!("measure condition p={p}"),
            measure.verdict == Verdict::Converged,
            "increment_rel",
            format!("verdict {}", verdict_name(measure.verdict)),
        );
        let f = synth_mobius(&mu)?;
        let besov = besov_seminorm(&f, p, Some(k), &besov_schedule, &opts)?;
        rep.seminorm(&format!("besov[p={p}]"), &besov);
        rep.check(
            format!("besov seminorm p={p}"),
            besov.verdict == Verdict::Converged,
            "increment_rel",
            format!("verdict {}", verdict_name(besov.verdict)),
        );
    }
    let control: Vec<Complex64> = (0..lat.len()).map(|n| Complex64::new(1.0 / (n as f64 + 2.0).ln(), 0.0)).collect();
    let mu = lattice_atomic_measure(&lat, &control, 2)?;
    let measure = localized_lp_norm(&mu, r, 1.0, &mschedule, &scheme)?;
    rep.seminorm("control.measure_condition[p=1]", &measure);
    let ok = measure.verdict == Verdict::Divergent || (measure.verdict == Verdict::Undecided && measure.trending_up());
    rep.check(
        "control c_n = 1/log(n+2) fails the measure condition",
        ok,
        "increment_rel",
        format!("verdict {}", verdict_name(measure.verdict)),
    );
    Ok(())
}

fn thm_b_roundtrip(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    rep.tol("sup_growth_last_three", TrendRule::default().sup_rel_growth);
    let round_tol = rep.tol("roundtrip_abs", 1e-8);
    let t = spec.params.t.unwrap_or(1.5);
    let r = spec.params.r.unwrap_or(0.5);
    let lat = Lattice::build_with_spacing(r, 0.95, spec.params.spacing() * r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mu = Measure {
        atoms: lat
            .centers()
            .iter()
            .map(|&z| Atom {
                z,
                w: Complex64::from_polar((1.0 - z.norm_sqr()).powf(t), rng.gen_range(0.0..std::f64::consts::TAU)),
            })
            .collect(),
        density: vec![Density::MonomialPower { m: 1, n: t - 2.0, c: one() }],
    };
    mu.validate()?;
    let probes = carleson_probes(16, 0.999);
    let car = carleson_constant(&mu, t, r, &probes)?;
    rep.scalar("carleson_constant", car.constant);
    let f = synth_mobius(&mu)?;
    let opts = MembershipScheme::default();
    let schedule = spec.params.schedule();
    let lip = lipschitz_seminorm(&f, t, spec.params.k, &schedule, &opts)?;
    rep.seminorm("lipschitz", &lip);
    rep.check(
        format!("Lambda_{t} profile bounded"),
        lip.verdict == Verdict::Converged,
        "sup_growth_last_three",
        format!("verdict {}", verdict_name(lip.verdict)),
    );
    let control = lipschitz_seminorm(&TestFunction::LogInverse, t, spec.params.k, &schedule, &opts)?;
    rep.seminorm("control.lipschitz", &control);
    rep.check(
        "control log(1/(1-z)) diverges",
        control.verdict == Verdict::Divergent,
        "sup_growth_last_three",
        format!("verdict {}", verdict_name(control.verdict)),
    );
    let fprime = synth_derivative_kernel(&mu)?;
    let g = theorem_b_integrate(&fprime, f.eval(ComplexPoint::new(0.0, 0.0))?)?;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let z = ComplexPoint::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        worst = worst.max((g.eval(z)? - f.eval(z)?).norm());
    }
    rep.scalar("roundtrip_max_abs", worst);
    rep.check("rebuilt f matches at 50 probes", worst <= round_tol, "roundtrip_abs", format!("max abs error {worst:.3e}"));
    Ok(())
}

fn lemma6_polynomials(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    let tol = rep.tol("monomial_abs", 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let probes: Vec<ComplexPoint> = (0..100)
        .map(|_| ComplexPoint::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let orders: Vec<u32> = spec.params.k.map(|k| vec![k]).unwrap_or_else(|| vec![0, 1, 2]);
    for &n in &orders {
        for m in 0..=5u32 {
            let mu = polynomial_measure(m, n)?;
            let c = mu.density[0].coefficient().re;
            rep.scalar(format!("c[m={m},N={n}]"), c);
            for route in [DensityRoute::Exact, DensityRoute::Quadrature] {
                let f = synth_mobius_route(&mu, route)?;
                let mut worst = 0.0f64;
                for &z in &probes {
                    worst = worst.max((f.eval(z)? - z.powi(m as i32)).norm());
                }
                let tag = match route {
                    DensityRoute::Exact => "exact",
                    DensityRoute::Quadrature => "quadrature",
                };
                rep.scalar(format!("max_err.{tag}[m={m},N={n}]"), worst);
                rep.check(
                    format!("z^{m} N={n} {tag}"),
                    worst <= tol,
                    "monomial_abs",
                    format!("c = {c:.12}, max abs error {worst:.3e}"),
                );
            }
        }
    }
    Ok(())
}

fn fock_roundtrip(spec: &ExperimentSpec, rep: &mut ExperimentReport) -> Result<()> {
    let repro_tol = rep.tol("reproducing_abs", 1e-8);
    let synth_tol = rep.tol("density_synthesis_abs", 1e-8);
    let mass_tol = rep.tol("localized_l1_rel", 1e-8);
    rep.tol("increment_rel", TrendRule::default().rel_tol);
    let alpha = spec.params.alpha.unwrap_or(1.0);
    let big_r = spec.params.big_r.unwrap_or(8.0);
    let p = spec.params.p.unwrap_or(1.0);
    let scale = 1.0 / alpha.sqrt();
    for m in 0..=5 {
        let res = fock_reproduce_check(&Polynomial::monomial(m), alpha, big_r * scale)?;
        rep.scalar(format!("reproducing_residual[m={m}]"), res);
        rep.check(format!("reproducing z^{m}"), res <= repro_tol, "reproducing_abs", format!("residual {res:.3e}"));
    }
    let g = synth_fock(&PlaneMeasure::from_density(PlaneDensity::fock_monomial(1, one(), alpha)), alpha)?;
    let mut worst = 0.0f64;
    for z in fock_probes(alpha) {
        worst = worst.max((g.eval(z)? - z).norm());
    }
    rep.check("density w e^{a|w|^2/2} dlambda synthesizes z", worst <= synth_tol, "density_synthesis_abs", format!("max abs error {worst:.3e}"));
    let schedule = spec.params.rho_list.clone().unwrap_or_else(|| default_plane_schedule(alpha));
    let spacings = spec.params.spacing.map(|d| vec![d]).unwrap_or_else(|| vec![0.5, 1.0]);
    for &d in &spacings {
        let lat = PlaneLattice::new(d * scale, 4.0 * scale)?;
        let coeffs: Vec<Complex64> = lat
            .centers
            .iter()
            .enumerate()
            .map(|(i, z)| Complex64::from_polar((1.0 + z.norm()).powf(-3.0 / p), 0.5 * i as f64))
            .collect();
        let mu = lat.atomic_measure(&coeffs)?;
        let f = synth_fock(&mu, alpha)?;
        let norm = fock_norm(&f, p, alpha, &schedule)?;
        rep.seminorm(&format!("fock_norm[d={d}]"), &norm);
        rep.check(
            format!("lattice synthesis in F^{p} (d={d})"),
            norm.verdict == Verdict::Converged,
            "increment_rel",
            format!("verdict {}", verdict_name(norm.verdict)),
        );
        let r = d * scale;
        let reach: Vec<f64> = (1..=8).map(|j| lat.extent + lat.spacing + r + j as f64).collect();
        let loc = fock_localized_lp(&mu, r, 1.0, &reach)?;
        let want = PI * r * r * mu.total_variation();
        let err = rel_err(loc.last(), want);
        rep.check(
            format!("localized L^1 equals pi r^2 |mu|(C) (d={d})"),
            err <= mass_tol,
            "localized_l1_rel",
            format!("{:.10} vs {want:.10}", loc.last()),
        );
    }
    let control = fock_norm(&ExpQuadratic { a: one() }, p, alpha, &schedule)?;
    rep.seminorm("control.fock_norm", &control);
    rep.check(
        "control e^{z^2} is not in the Fock space",
        control.verdict == Verdict::Divergent,
        "increment_rel",
        format!("verdict {}", verdict_name(control.verdict)),
    );
    Ok(())
}
