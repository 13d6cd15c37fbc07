//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line to stdout (bypassing capture) before asserting.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diskrep::experiments::{self, ExperimentReport, ExperimentSpec};
use diskrep::fock::{fock_reproduce_check, Polynomial};
use diskrep::lattice::Lattice;
use diskrep::measure::{cr_constant, localized_lp_norm, Atom, Density, Measure};
use diskrep::membership::{forelli_rudin, richardson_derivative};
use diskrep::synthesis::{polynomial_measure, synth_mobius, synth_mobius_route, DensityRoute};
use diskrep::{
    default_rho_schedule, mobius_map, pseudo_disk, pseudo_disk_area, pseudo_distance, verify_lattice, ComplexPoint,
    QuadratureScheme,
};

fn line(id: u32, title: &str, passed: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let in_time = elapsed <= budget;
    let status = if passed && in_time { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{status} criterion {id:>2} {title}: {detail} [{:.2}s of {}s]",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = out.flush();
    drop(out);
    assert!(passed, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time budget");
}

fn disk_point(rng: &mut ChaCha8Rng, rho: f64) -> ComplexPoint {
    ComplexPoint::from_polar(rho * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn criterion_01_geometry_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut inv, mut sym, mut ind, mut area) = (0.0f64, 0.0f64, 0usize, 0.0f64);
    for _ in 0..10_000 {
        let a = disk_point(&mut rng, 0.99);
        let z = disk_point(&mut rng, 0.99);
        let r = rng.gen_range(0.05..0.95);
        let back = mobius_map(a, mobius_map(a, z).unwrap()).unwrap();
        inv = inv.max((back - z).norm());
        let d1 = pseudo_distance(z, a).unwrap();
        let d2 = pseudo_distance(a, z).unwrap();
        sym = sym.max((d1 - d2).abs());
        if (d1 - r).abs() > 1e-12 && pseudo_disk(z, r).unwrap().contains(a) != pseudo_disk(a, r).unwrap().contains(z) {
            ind += 1;
        }
        let disk = pseudo_disk(z, r).unwrap();
        area = area.max((pseudo_disk_area(z, r).unwrap() - disk.radius * disk.radius).abs());
    }
    let ok = inv <= 1e-12 && sym <= 1e-12 && ind == 0 && area <= 1e-12;
    let detail = format!("involution {inv:.1e}, symmetry {sym:.1e}, indicator mismatches {ind}, area {area:.1e}");
    line(1, "geometry exactness", ok, start.elapsed(), Duration::from_secs(1), &detail);
}

#[test]
fn criterion_02_lattice_validity() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for &r in &[0.3, 0.5] {
        for &rho in &[0.9, 0.99] {
            let lat = Lattice::build(r, rho).unwrap();
            let rep = verify_lattice(&lat, 100_000, 7);
            ok &= rep.is_clean();
            parts.push(format!("({r},{rho}) n={} clean={}", lat.len(), rep.is_clean()));
        }
    }
    let lat = Lattice::build(0.5, 0.9).unwrap();
    let deleted = verify_lattice(&lat.without_center(lat.len() / 2), 100_000, 7);
    let halved = verify_lattice(&lat.with_recorded_radius(0.25), 100_000, 7);
    let mutations = deleted.coverage_violations > 0 && halved.outer_containment_violations > 0;
    ok &= mutations;
    parts.push(format!(
        "deleted center -> {} coverage, halved r -> {} containment",
        deleted.coverage_violations, halved.outer_containment_violations
    ));
    line(2, "lattice validity", ok, start.elapsed(), Duration::from_secs(10), &parts.join("; "));
}

#[test]
fn criterion_03_cr_identity() {
    let start = Instant::now();
    let scheme = QuadratureScheme::default();
    let schedule = default_rho_schedule();
    let panel = [
        Measure::atom(ComplexPoint::new(0.3, 0.2), one()),
        Measure {
            atoms: vec![
                Atom { z: ComplexPoint::new(0.5, 0.0), w: one() },
                Atom { z: ComplexPoint::new(-0.2, 0.6), w: Complex64::new(0.0, 2.0) },
            ],
            density: Vec::new(),
        },
        Measure::area(),
    ];
    let masses = [1.0, 3.0, 1.0];
    let mut worst = 0.0f64;
    for &r in &[0.3, 0.5] {
        // Oracle: ∫_0^{r^2} (1 - t)^{-2} dt.
        let oracle = r * r / (1.0 - r * r);
        assert!((cr_constant(r) - oracle).abs() < 1e-15);
        for (mu, mass) in panel.iter().zip(masses) {
            let v = localized_lp_norm(mu, r, 1.0, &schedule, &scheme).unwrap().last() / mass;
            worst = worst.max((v / oracle - 1.0).abs());
        }
    }
    line(3, "C_r identity", worst <= 0.01, start.elapsed(), Duration::from_secs(30), &format!("max relative error {worst:.2e}"));
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[test]
fn criterion_04_polynomial_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let probes: Vec<ComplexPoint> = (0..100).map(|_| disk_point(&mut rng, 0.95)).collect();
    let mut worst = 0.0f64;
    let mut constants_ok = true;
    let mut shown = Vec::new();
    for n in 0..=1u32 {
        for m in 0..=5u32 {
            let mu = polynomial_measure(m, n).unwrap();
            if m >= 1 {
                // ∫ |w|^{2k} (1 - |w|^2)^N dA = k! N! / (k + N + 1)!.
                let mom = |k: u32| factorial(k) * factorial(n) / factorial(k + n + 1);
                let want = 1.0 / (mom(m - 1) - mom(m));
                let got = mu.density[0].coefficient().re;
                constants_ok &= (got - want).abs() <= 1e-12 * want;
                if (m, n) == (1, 0) || (m, n) == (2, 1) {
                    shown.push(format!("c(m={m},N={n})={got}"));
                }
            }
            let f = synth_mobius_route(&mu, DensityRoute::Quadrature).unwrap();
            for &z in &probes {
                worst = worst.max((f.eval(z).unwrap() - z.powi(m as i32)).norm());
            }
        }
    }
    let ok = constants_ok && worst <= 1e-8;
    let detail = format!("{}, max abs error {worst:.2e} over 100 probes", shown.join(", "));
    line(4, "polynomial exactness", ok, start.elapsed(), Duration::from_secs(30), &detail);
}

#[test]
fn criterion_05_derivative_kernel_fidelity() {
    let start = Instant::now();
    let mu = Measure {
        atoms: vec![
            Atom { z: ComplexPoint::new(0.6, 0.3), w: one() },
            Atom { z: ComplexPoint::new(-0.4, 0.7), w: Complex64::new(0.5, -1.0) },
            Atom { z: ComplexPoint::new(0.1, -0.8), w: Complex64::new(0.0, 0.3) },
        ],
        density: vec![
            Density::MonomialPower { m: 2, n: 1.0, c: Complex64::new(1.0, 0.5) },
            Density::Power { a: 0.5, c: one() },
        ],
    };
    let f = synth_mobius(&mu).unwrap();
    let g = |z: ComplexPoint| f.eval(z).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let z = disk_point(&mut rng, 0.9);
        for k in 1..=3 {
            let exact = f.derivative(k, z).unwrap();
            let fd = richardson_derivative(&g, k, z, 0.05 * (1.0 - z.norm()));
            worst = worst.max((fd - exact).norm() / exact.norm());
        }
    }
    line(5, "derivative kernel fidelity", worst < 1e-6, start.elapsed(), Duration::from_secs(10), &format!("max relative error {worst:.2e}"));
}

fn run_experiment(name: &str) -> ExperimentReport {
    experiments::run(&ExperimentSpec::new(name)).unwrap()
}

fn label(rep: &ExperimentReport, key: &str) -> String {
    rep.labels.get(key).cloned().unwrap_or_default()
}

#[test]
fn criterion_06_besov_forward() {
    let start = Instant::now();
    let rep = run_experiment("thmA_forward");
    let detail = format!(
        "measure p=0.5 {}, besov p=0.5 {}, measure p=1 {}, besov p=1 {}, control {}",
        label(&rep, "measure_condition[p=0.5].verdict"),
        label(&rep, "besov[p=0.5].verdict"),
        label(&rep, "measure_condition[p=1].verdict"),
        label(&rep, "besov[p=1].verdict"),
        label(&rep, "control.measure_condition[p=1].verdict"),
    );
    line(6, "Besov forward direction", rep.passed, start.elapsed(), Duration::from_secs(120), &detail);
}

#[test]
fn criterion_07_lipschitz_forward() {
    let start = Instant::now();
    let rep = run_experiment("thmB_roundtrip");
    let lip = rep.series.iter().find(|s| s.name == "lipschitz").unwrap();
    let n = lip.y.len();
    let growth = lip.y[n - 1] / lip.y[n - 4] - 1.0;
    let ok = rep.passed && growth < 0.05;
    let detail = format!(
        "sup growth over last three shells {:.2e}, control {}, roundtrip {:.1e}",
        growth,
        label(&rep, "control.lipschitz.verdict"),
        rep.scalars["roundtrip_max_abs"]
    );
    line(7, "Lipschitz forward direction", ok, start.elapsed(), Duration::from_secs(120), &detail);
}

#[test]
fn criterion_08_mass_without_log_moment() {
    let start = Instant::now();
    let rep = run_experiment("cor4_counterexample");
    let gap = (std::f64::consts::PI.powi(2) / 6.0 - rep.scalars["total_mass"]).abs();
    let ratio = rep.scalars["log_ratio"];
    let ok = gap <= 1e-4 && (0.9..=1.1).contains(&ratio);
    let detail = format!("mass gap {gap:.3e}, log-moment/ln N {ratio:.4} at N=10^4");
    line(8, "finite mass with divergent log moment", ok, start.elapsed(), Duration::from_secs(5), &detail);
}

#[test]
fn criterion_09_fock_reproducing() {
    let start = Instant::now();
    let worst = (0..=5)
        .map(|m| fock_reproduce_check(&Polynomial::monomial(m), 1.0, 8.0).unwrap())
        .fold(0.0, f64::max);
    line(9, "Fock reproducing identity", worst < 1e-8, start.elapsed(), Duration::from_secs(30), &format!("max residual {worst:.2e}"));
}

#[test]
fn criterion_10_forelli_rudin_classifier() {
    let start = Instant::now();
    let xs = [0.9, 0.99, 0.999];
    let ratios: Vec<f64> = xs
        .iter()
        .map(|&x: &f64| forelli_rudin(2.0, 4.0, ComplexPoint::new(x, 0.0)).unwrap() / (1.0 / (1.0 - x * x)).ln())
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let log_ok = hi / lo - 1.0 < 0.2;
    let mut band_ok = true;
    let mut bands = Vec::new();
    for &(a, b) in &[(0.0, 3.0), (0.5, 4.0), (1.0, 4.5), (2.0, 5.0)] {
        let vals: Vec<f64> = xs
            .iter()
            .map(|&x: &f64| forelli_rudin(a, b, ComplexPoint::new(x, 0.0)).unwrap() * (1.0 - x * x).powf(b - 2.0 - a))
            .collect();
        let (l, h) = vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        band_ok &= h / l < 2.0;
        bands.push(format!("({a},{b}) {:.3}", h / l));
    }
    let detail = format!(
        "log ratios {:.3}/{:.3}/{:.3} vary {:.1}%; power bands {}",
        ratios[0],
        ratios[1],
        ratios[2],
        100.0 * (hi / lo - 1.0),
        bands.join(", ")
    );
    line(10, "Forelli-Rudin classifier", log_ok && band_ok, start.elapsed(), Duration::from_secs(60), &detail);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_suite_reproducible() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_diskrep");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut codes = Vec::new();
    for d in &dirs {
        let status = std::process::Command::new(bin)
            .args(["all", "--seed", "20240601", "--out"])
            .arg(d.path())
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        codes.push(status.code());
    }
    let first = read_dir_sorted(dirs[0].path());
    let second = read_dir_sorted(dirs[1].path());
    let identical = first == second && first.len() == experiments::EXPERIMENTS.len();
    let ok = codes.iter().all(|&c| c == Some(0)) && identical;
    let detail = format!("exit codes {codes:?}, {} reports, byte-identical {identical}", first.len());
    line(11, "experiment suite", ok, start.elapsed(), Duration::from_secs(600), &detail);
}
