//! Command-line front end: catalog verification, bound sweeps, and
//! constructions, with JSON/CSV emission.
//!
//! Exit codes: 0 success/pass, 1 check failure, 2 usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use framelab::bounds::{
    estimate_bounds, holder_bound, riesz_thorin, sweep, BoundCertificate, TestFamily,
};
use framelab::constructions::{discretize, smooth, DiscretizationSpec, RepresentativeRule};
use framelab::error::FrameError;
use framelab::geometry::BoxNd;
use framelab::json::{measure_to_json, parse_measure, parse_spectrum, spectrum_to_json};
use framelab::measures::{convolve, Measure};
use framelab::sip::ExponentPair;
use framelab::spectra::{as_atomic_measure, perturb, SpectrumSet};

#[derive(Parser)]
#[command(
    name = "framelab",
    version,
    about = "Numerical laboratory for (p,q)-frame and Bessel measures",
    long_about = "Measure/spectrum ingestion, frame-bound sweeps, constructions, and \
                  catalog verification.\n\nDefaults: seed 0, budget 200, JSON output to \
                  stdout. FRAMELAB_THREADS caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Built-in worked examples
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Estimate frame bounds for a measure pair and print certificates
    Bounds {
        /// Measure JSON file for the base measure
        #[arg(long)]
        mu: PathBuf,
        /// Measure or spectrum JSON file for the frequency-side measure
        #[arg(long)]
        nu: PathBuf,
        /// Exponent p (q is its conjugate)
        #[arg(long)]
        p: f64,
        /// Number of sampled test functions
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// RNG seed; same seed, same output
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncation level when --nu is a spectrum
        #[arg(long, default_value_t = 32)]
        trunc: usize,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build new measures and certificates from existing ones
    Construct {
        #[command(subcommand)]
        action: ConstructCmd,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Print all catalog entry ids and descriptions
    List,
    /// Run one catalog entry and report pass/fail
    Verify {
        /// Catalog entry id
        id: String,
        /// Truncation level override
        #[arg(long)]
        level: Option<usize>,
        /// Write the report here as well as stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Collapse a measure onto cell representatives
    Discretize {
        /// Measure JSON file
        #[arg(long)]
        nu: PathBuf,
        /// Cell size
        #[arg(long)]
        r: f64,
        /// Representative rule
        #[arg(long, value_enum, default_value_t = Rule::Center)]
        rule: Rule,
        /// Cell window as JSON intervals, e.g. [[-20,20]]
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convolve two measures
    Convolve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mollify a measure on the line into a smooth-profile density
    Smooth {
        #[arg(long)]
        nu: PathBuf,
        /// Output grid cells per unit length
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interpolate Bessel bounds between two exponent pairs
    Interpolate {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        p1: f64,
        /// Functional bound at the first pair
        #[arg(long)]
        c0: f64,
        /// Functional bound at the second pair
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attach bounded random offsets to a spectrum
    Perturb {
        /// Spectrum JSON file, or the literal `lattice` for the integer
        /// lattice on the line
        #[arg(long)]
        lambda: String,
        /// Offset bound per coordinate
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reweight a measure by the transform magnitude of a convolution factor
    Deconvolve {
        #[arg(long)]
        nu: PathBuf,
        /// The convolution factor whose transform reweights nu
        #[arg(long = "mu-prime")]
        mu_prime: PathBuf,
        #[arg(long)]
        p: f64,
        /// Grid cells per unit length for density reweighting
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Center,
    Corner,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("FRAMELAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, FrameError> {
    match cli.cmd {
        Cmd::Catalog { action } => match action {
            CatalogCmd::List => {
                for entry in framelab::catalog::list_entries() {
                    println!("{:<24} {}", entry.id, entry.description);
                }
                Ok(ExitCode::SUCCESS)
            }
            CatalogCmd::Verify { id, level, out } => {
                let report = framelab::catalog::verify(&id, level)?;
                let text = serde_json::to_string_pretty(&report)?;
                println!("{text}");
                if let Some(path) = out {
                    fs::write(path, format!("{text}\n"))
                        .map_err(|e| FrameError::Evaluation(e.to_string()))?;
                }
                Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
            }
        },
        Cmd::Bounds { mu, nu, p, budget, seed, trunc, out, format } => {
            cmd_bounds(&mu, &nu, p, budget, seed, trunc, out.as_deref(), format)
        }
        Cmd::Construct { action } => cmd_construct(action),
    }
}

fn read(path: &std::path::Path) -> Result<String, FrameError> {
    fs::read_to_string(path)
        .map_err(|e| FrameError::Parse(format!("{}: {e}", path.display())))
}

/// `--nu` accepts either a measure or a spectrum file; spectra are
/// truncated at the given level with unit weights.
fn read_nu(path: &std::path::Path, trunc: usize) -> Result<Measure, FrameError> {
    let text = read(path)?;
    if let Ok(m) = parse_measure(&text) {
        return Ok(m);
    }
    match parse_spectrum(&text) {
        Ok(s) => as_atomic_measure(&s, trunc, None),
        Err(_) => Err(FrameError::Parse(format!(
            "{}: neither a measure nor a spectrum spec",
            path.display()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    mu_path: &std::path::Path,
    nu_path: &std::path::Path,
    p: f64,
    budget: usize,
    seed: u64,
    trunc: usize,
    out: Option<&std::path::Path>,
    format: Format,
) -> Result<ExitCode, FrameError> {
    let mu = parse_measure(&read(mu_path)?)?;
    let nu = read_nu(nu_path, trunc)?;
    let e = ExponentPair::new(p)?;

    let mut families = vec![TestFamily::default_trig(mu.dim())];
    if let Measure::Atomic(_) = &mu {
        families.push(TestFamily::AtomValues);
    }
    if let Some(bx) = mu.support_box() {
        if mu.dim() == 1 {
            families.push(TestFamily::ModulatedIndicator {
                bx,
                t_values: vec![1.0, 10.0, 100.0],
            });
        }
    }

    if format == Format::Csv {
        let rows = sweep(&mu, &nu, &e, &families, budget, seed, trunc)?;
        let mut csv = String::from(
            "family_id,sample_index,p,q,truncation,functional,norm_q_power,ratio\n",
        );
        for r in rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.family_id, r.sample_index, r.p, r.q, r.truncation, r.functional,
                r.norm_q_power, r.ratio
            ));
        }
        emit(&csv, out)?;
        return Ok(ExitCode::SUCCESS);
    }

    let estimate = estimate_bounds(&mu, &nu, &e, &families, budget, seed)?;
    let certificates: Vec<BoundCertificate> = vec![holder_bound(&mu, &nu, &e)?];
    let min_cert = certificates.iter().map(|c| c.upper).fold(f64::INFINITY, f64::min);
    let ordering_ok = estimate.upper_hat <= min_cert + 1e-9;
    let report = json!({
        "estimate": estimate,
        "certificates": certificates,
        "ordering_ok": ordering_ok,
    });
    emit(&format!("{}\n", serde_json::to_string_pretty(&report)?), out)?;
    Ok(if ordering_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_construct(action: ConstructCmd) -> Result<ExitCode, FrameError> {
    match action {
        ConstructCmd::Discretize { nu, r, rule, window, out } => {
            let m = parse_measure(&read(&nu)?)?;
            let window = match window {
                Some(text) => {
                    let ivs: Vec<[f64; 2]> = serde_json::from_str(&text)
                        .map_err(|e| FrameError::Parse(format!("window: {e}")))?;
                    Some(BoxNd::new(ivs)?)
                }
                None => None,
            };
            let spec = DiscretizationSpec {
                r,
                rule: match rule {
                    Rule::Center => RepresentativeRule::CellCenter,
                    Rule::Corner => RepresentativeRule::CellCorner,
                },
                window,
            };
            let result = discretize(&m, &spec)?;
            emit(&format!("{}\n", measure_to_json(&result)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        ConstructCmd::Convolve { a, b, out } => {
            let result = convolve(&parse_measure(&read(&a)?)?, &parse_measure(&read(&b)?)?)?;
            emit(&format!("{}\n", measure_to_json(&result)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        ConstructCmd::Smooth { nu, grid, out } => {
            let result = smooth(&parse_measure(&read(&nu)?)?, grid)?;
            emit(&format!("{}\n", measure_to_json(&result)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        ConstructCmd::Interpolate { p0, p1, c0, c1, theta, out } => {
            let e0 = ExponentPair::new(p0)?;
            let e1 = ExponentPair::new(p1)?;
            let (pair, cert) = riesz_thorin(&e0, c0, &e1, c1, theta)?;
            let report = json!({ "p": pair.p(), "q": pair.q(), "certificate": cert });
            emit(&format!("{}\n", serde_json::to_string_pretty(&report)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        ConstructCmd::Perturb { lambda, c, seed, out } => {
            let base: SpectrumSet = if lambda == "lattice" {
                SpectrumSet::integer_lattice(1)
            } else {
                parse_spectrum(&read(std::path::Path::new(&lambda))?)?
            };
            let result = perturb(&base, c, seed)?;
            emit(&format!("{}\n", spectrum_to_json(&result)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        ConstructCmd::Deconvolve { nu, mu_prime, p, grid, out } => {
            let nu = parse_measure(&read(&nu)?)?;
            let mp = parse_measure(&read(&mu_prime)?)?;
            let e = ExponentPair::new(p)?;
            let result = framelab::bounds::deconvolution_weight(&nu, &mp, &e, grid)?;
            emit(&format!("{}\n", measure_to_json(&result)?), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), FrameError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| FrameError::Evaluation(e.to_string()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
