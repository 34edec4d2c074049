use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use systole_core::catalog;
use systole_core::discrete::DiscreteOptions;
use systole_core::error::{Error, Result};
use systole_core::harness::{self, SeparatedConfig, Suite, SuiteOptions};
use systole_core::surface::{ConeSurface, SurfaceDescription};
use systole_core::systole::{exact_cover, marked_systole, Method, SystoleOptions};

#[derive(Parser)]
#[command(name = "systole", version, about = "Systoles of flat cone surfaces with marked points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a surface file and print its invariants.
    Validate { path: PathBuf },
    /// Compute the marked systole and print a certificate.
    Systole {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Net spacing for the discretized method.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Longest homotopy word explored by the discretized method.
        #[arg(long, default_value_t = 6)]
        words: usize,
        /// Largest relative gap accepted between the two methods.
        #[arg(long, default_value_t = 0.02)]
        agreement_tol: f64,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file; `.json` selects JSON, anything else CSV. Standard
        /// output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory with the separated-point configurations.
        #[arg(long, default_value = "data/configs")]
        configs: PathBuf,
        /// Random instances per metric class.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Record runtimes (reports are then no longer reproducible byte for byte).
        #[arg(long)]
        timings: bool,
    },
    /// Print the table of constants.
    Report {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write the canonical surface files and point configurations.
    Generate {
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MethodArg {
    Auto,
    CoverExact,
    Discretized,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Equality,
    Random,
    Packing,
    Separated,
    Asymptotic,
    Covers,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<ConeSurface> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    SurfaceDescription::from_json(&text)?.build()
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Validate { path } => validate(&path),
        Command::Systole { path, method, eps, words, agreement_tol } => {
            let s = load(&path)?;
            let method = match method {
                MethodArg::Auto if exact_cover(&s).is_ok() => Method::CoverExact,
                MethodArg::Auto => Method::Discretized,
                MethodArg::CoverExact => Method::CoverExact,
                MethodArg::Discretized => Method::Discretized,
                MethodArg::Both => Method::Both,
            };
            let discrete = DiscreteOptions { eps, word_cap: words, ..DiscreteOptions::default() };
            let report = marked_systole(&s, &SystoleOptions { method, discrete, agreement_tol })?;
            let text = if method == Method::Both {
                serde_json::to_string_pretty(&report)?
            } else {
                report.best().to_json()
            };
            println!("{text}");
            Ok(true)
        }
        Command::Verify { suite, seed, out, configs, count, eps, timings } => {
            let suite = match suite {
                SuiteArg::Equality => Suite::Equality,
                SuiteArg::Random => Suite::Random,
                SuiteArg::Packing => Suite::Packing,
                SuiteArg::Separated => Suite::Separated,
                SuiteArg::Asymptotic => Suite::Asymptotic,
                SuiteArg::Covers => Suite::Covers,
                SuiteArg::All => Suite::All,
            };
            let opts = SuiteOptions {
                seed,
                random_count: count,
                configs,
                discrete: DiscreteOptions { eps, ..DiscreteOptions::default() },
            };
            let mut report = harness::run_suite(suite, &opts)?;
            if !timings {
                report = report.without_timings();
            }
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            match out {
                Some(path) => {
                    let json = path.extension().is_some_and(|e| e == "json");
                    let text = if json { report.to_json() + "\n" } else { report.to_csv() };
                    fs::write(&path, text)?;
                }
                None => print!("{}", report.to_csv()),
            }
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: computed {} expected {} ({})", c.id, c.computed, c.expected, c.note);
            }
            eprintln!("{} checks, {failed} failed", report.checks.len());
            Ok(failed == 0)
        }
        Command::Report { format } => {
            let reg = harness::registry();
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&reg)?),
                Format::Csv => {
                    println!("surface,k,metric_class,expression,value");
                    for e in &reg.entries {
                        let k = e.k.map_or_else(|| "-".into(), |k| k.to_string());
                        let v = e.value.map_or_else(|| "-".into(), |v| format!("{v:.12}"));
                        println!("{},{k},{},{},{v}", e.surface, e.metric_class.as_str(), e.expression);
                    }
                }
            }
            Ok(true)
        }
        Command::Generate { out } => {
            let surfaces = out.join("surfaces");
            let configs = out.join("configs");
            fs::create_dir_all(&surfaces)?;
            fs::create_dir_all(&configs)?;
            for (name, desc) in catalog::canonical() {
                fs::write(surfaces.join(format!("{name}.surf")), desc.to_json() + "\n")?;
            }
            for id in harness::SEPARATED_CONFIGS {
                fs::write(configs.join(format!("{id}.json")), SeparatedConfig::generate(id)?.to_json() + "\n")?;
            }
            println!("wrote {} and {}", surfaces.display(), configs.display());
            Ok(true)
        }
    }
}

fn validate(path: &Path) -> Result<bool> {
    let s = load(path)?;
    println!("surface: {}", s.label());
    println!("metric class: {}", s.metric_class().as_str());
    println!("polygons: {}", s.polygons().len());
    println!("euler characteristic: {}", s.euler_characteristic());
    for (c, class) in s.vertex_classes().iter().enumerate() {
        let marked = if s.is_marked_class(c) { " marked" } else { "" };
        println!("vertex {c}: angle {:.9} ({:.6} pi){marked}", class.angle, class.angle / PI);
    }
    println!("marked points: {}", s.marked_points().len());
    println!("euclidean area: {:.12}", s.euclidean_area());
    println!("holmes-thompson area: {:.12}", s.surface_area());
    Ok(true)
}
