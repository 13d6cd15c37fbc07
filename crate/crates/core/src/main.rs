use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use diskrep::experiments::{self, ExperimentReport, ExperimentSpec, Format, Params, DEFAULT_SEED};
use diskrep::fock::{synth_fock, Entire, PlaneMeasure};
use diskrep::measure::{berezin, carleson_constant, carleson_probes, Measure};
use diskrep::membership::{membership, Holomorphic, MembershipScheme, SpaceFamily, SpaceSpec, TestFunction};
use diskrep::report::classify_sup;
use diskrep::synthesis::{synth_derivative_kernel, synth_mobius};
use diskrep::{default_rho_schedule, verify_lattice, ComplexPoint, Lattice, TrendRule};

#[derive(Parser)]
#[command(name = "diskrep", version, about = "Measure representations of holomorphic function spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ExpArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated truncation radii.
    #[arg(long, value_delimiter = ',')]
    rho_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    radial_nodes: Option<usize>,
    #[arg(long)]
    angular_nodes: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
}

impl ExpArgs {
    fn params(&self) -> Params {
        Params {
            r: self.r,
            p: self.p,
            t: self.t,
            alpha: self.alpha,
            rho_list: self.rho_list.clone(),
            k: self.k,
            big_r: self.big_r,
            spacing: self.spacing,
            radial_nodes: self.radial_nodes,
            angular_nodes: self.angular_nodes,
            rho: self.rho,
            tol: self.tol,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Mobius,
    Derivative,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Besov,
    Lipschitz,
    Bloch,
    Bergman,
}

#[derive(Subcommand)]
enum Command {
    /// Localized-mass identity against r^2/(1-r^2).
    #[command(name = "cr_constant")]
    CrConstant(ExpArgs),
    /// Function versus lattice-sequence L^p verdicts.
    #[command(name = "lemma3_equiv")]
    Lemma3Equiv(ExpArgs),
    /// Finite mass with a divergent log moment.
    #[command(name = "cor4_counterexample")]
    Cor4Counterexample(ExpArgs),
    /// Carleson profile of the Bloch-log density.
    #[command(name = "bloch_carleson")]
    BlochCarleson(ExpArgs),
    /// Lattice measures with l^p weights synthesize Besov functions.
    #[command(name = "thmA_forward")]
    ThmAForward(ExpArgs),
    /// Carleson measure to Lipschitz function and back.
    #[command(name = "thmB_roundtrip")]
    ThmBRoundtrip(ExpArgs),
    /// Measures that synthesize monomials exactly.
    #[command(name = "lemma6_polynomials")]
    Lemma6Polynomials(ExpArgs),
    /// Gaussian synthesis, Fock norms and reproducing residuals.
    #[command(name = "fock_roundtrip")]
    FockRoundtrip(ExpArgs),
    /// Every registered experiment.
    All(ExpArgs),
    /// Build and verify an r-lattice.
    Lattice {
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long = "rho", default_value_t = 0.99)]
        rho_max: f64,
        /// Ring spacing as a multiple of r.
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the lattice JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the synthesized function of a measure JSON file.
    Synth {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value_t = KernelArg::Mobius)]
        kernel: KernelArg,
        /// Kernel parameter for plane measures.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Evaluation point `x,y`; repeatable.
        #[arg(long = "at", value_parser = parse_point, required = true)]
        at: Vec<ComplexPoint>,
    },
    /// Seminorm report for a synthesized function or a named test function.
    Membership {
        #[arg(long, conflicts_with = "function")]
        measure: Option<PathBuf>,
        /// `log`, `pole:a` or `monomial:m`.
        #[arg(long)]
        function: Option<String>,
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        rho_list: Option<Vec<f64>>,
    },
    /// Carleson quotient profile of a measure JSON file.
    Carleson {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 16)]
        angles: usize,
        #[arg(long = "rho", default_value_t = 0.9999)]
        rho_max: f64,
    },
    /// Berezin transform of a measure JSON file.
    Berezin {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "at", value_parser = parse_point, required = true)]
        at: Vec<ComplexPoint>,
    },
}

fn parse_point(s: &str) -> Result<ComplexPoint, String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    let x = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(ComplexPoint::new(x, y))
}

fn parse_function(s: &str) -> diskrep::Result<TestFunction> {
    let bad = || diskrep::Error::Constraint(format!("unknown test function `{s}`"));
    match s.split_once(':') {
        None if s == "log" => Ok(TestFunction::LogInverse),
        Some(("pole", a)) => Ok(TestFunction::InversePower { a: a.parse().map_err(|_| bad())? }),
        Some(("monomial", m)) => Ok(TestFunction::Monomial { m: m.parse().map_err(|_| bad())?, c: 1.0 }),
        _ => Err(bad()),
    }
}

fn read(path: &PathBuf) -> diskrep::Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn is_plane(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("space").and_then(|s| s.as_str()).map(|s| s == "plane"))
        .unwrap_or(false)
}

fn pair(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run_experiments(names: &[&str], args: &ExpArgs) -> diskrep::Result<bool> {
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let mut ok = true;
    for name in names {
        let spec = ExperimentSpec {
            name: name.to_string(),
            params: args.params(),
            seed: args.seed,
        };
        let report: ExperimentReport = experiments::run(&spec)?;
        let path = report.write_atomic(&args.out, format)?;
        let passed = report.assertions.iter().filter(|a| a.passed).count();
        for a in report.assertions.iter().filter(|a| !a.passed) {
            eprintln!("  FAIL {}: {}", a.name, a.detail);
        }
        println!(
            "{name}: {} ({passed}/{} assertions) -> {}",
            if report.passed { "PASS" } else { "FAIL" },
            report.assertions.len(),
            path.display()
        );
        ok &= report.passed;
    }
    Ok(ok)
}

fn execute(cli: Cli) -> diskrep::Result<bool> {
    match cli.command {
        Command::CrConstant(a) => run_experiments(&["cr_constant"], &a),
        Command::Lemma3Equiv(a) => run_experiments(&["lemma3_equiv"], &a),
        Command::Cor4Counterexample(a) => run_experiments(&["cor4_counterexample"], &a),
        Command::BlochCarleson(a) => run_experiments(&["bloch_carleson"], &a),
        Command::ThmAForward(a) => run_experiments(&["thmA_forward"], &a),
        Command::ThmBRoundtrip(a) => run_experiments(&["thmB_roundtrip"], &a),
        Command::Lemma6Polynomials(a) => run_experiments(&["lemma6_polynomials"], &a),
        Command::FockRoundtrip(a) => run_experiments(&["fock_roundtrip"], &a),
        Command::All(a) => run_experiments(&experiments::EXPERIMENTS, &a),
        Command::Lattice {
            r,
            rho_max,
            spacing,
            samples,
            seed,
            out,
        } => {
            let lat = Lattice::build_with_spacing(r, rho_max, spacing.unwrap_or(diskrep::lattice::DEFAULT_SPACING) * r)?;
            let report = verify_lattice(&lat, samples, seed);
            if let Some(path) = out {
                std::fs::write(path, lat.to_json()?)?;
            }
            print_json(&json!({
                "r": r,
                "rho_max": rho_max,
                "centers": lat.len(),
                "rings": lat.rings().len(),
                "covering_radius": lat.covering_radius(),
                "report": report,
            }));
            Ok(report.is_clean())
        }
        Command::Synth { measure, kernel, alpha, at } => {
            let text = read(&measure)?;
            let mut rows = Vec::new();
            if is_plane(&text) {
                let f = synth_fock(&PlaneMeasure::from_json(&text)?, alpha)?;
                for z in at {
                    rows.push(json!({"z": pair(z), "value": pair(f.eval(z)?), "log_abs": f.log_abs(z)?}));
                }
            } else {
                let mu = Measure::from_json(&text)?;
                let f = match kernel {
                    KernelArg::Mobius => synth_mobius(&mu)?,
                    KernelArg::Derivative => synth_derivative_kernel(&mu)?,
                };
                for z in at {
                    rows.push(json!({"z": pair(z), "value": pair(f.eval(z)?)}));
                }
            }
            print_json(&json!(rows));
            Ok(true)
        }
        Command::Membership {
            measure,
            function,
            space,
            p,
            t,
            alpha,
            k,
            rho_list,
        } => {
            let family = match space {
                SpaceArg::Besov => SpaceFamily::Besov { p },
                SpaceArg::Lipschitz => SpaceFamily::Lipschitz { t },
                SpaceArg::Bloch => SpaceFamily::Bloch,
                SpaceArg::Bergman => SpaceFamily::Bergman { p, alpha },
            };
            let mut spec = SpaceSpec::new(family)?;
            if let Some(k) = k {
                spec = spec.with_order(k)?;
            }
            let schedule = rho_list.unwrap_or_else(default_rho_schedule);
            let opts = MembershipScheme::default();
            let f: Box<dyn Holomorphic> = match (measure, function) {
                (Some(path), _) => Box::new(synth_mobius(&Measure::from_json(&read(&path)?)?)?),
                (None, Some(name)) => Box::new(parse_function(&name)?),
                (None, None) => return Err(diskrep::Error::Constraint("give --measure or --function".into())),
            };
            let report = membership(f.as_ref(), spec, &schedule, &opts)?;
            print_json(&json!({"space": spec, "report": report}));
            Ok(true)
        }
        Command::Carleson {
            measure,
            t,
            r,
            angles,
            rho_max,
        } => {
            let mu = Measure::from_json(&read(&measure)?)?;
            let probes = carleson_probes(angles, rho_max);
            let prof = carleson_constant(&mu, t, r, &probes)?;
            let schedule: Vec<f64> = (4..).map(|k| 1.0 - 10f64.powf(-(k as f64) / 4.0)).take_while(|&m| m <= rho_max).collect();
            let sups = prof.shell_sup(&schedule);
            let xs: Vec<f64> = schedule.iter().map(|p| -(1.0 - p).ln()).collect();
            let verdict = classify_sup(&xs, &sups, &TrendRule::default());
            print_json(&json!({
                "t": t,
                "r": r,
                "constant": prof.constant,
                "schedule": schedule,
                "shell_sup": sups,
                "verdict": verdict,
            }));
            Ok(true)
        }
        Command::Berezin { measure, at } => {
            let mu = Measure::from_json(&read(&measure)?)?;
            let mut rows = Vec::new();
            for z in at {
                rows.push(json!({"z": pair(z), "value": pair(berezin(&mu, z, false)?)}));
            }
            print_json(&json!(rows));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
