//! `haarmoments` command-line driver: verification suites, density tables
//! and log-potential tables.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use haarmoments::besselint::{fn_rank1, fn_rank1_quadrature};
use haarmoments::betadet::{lemma1_suite, prop1_suite};
use haarmoments::densities::{fz_phi, mp_law, DensityModel, DensityQuery, SpectralLaw};
use haarmoments::suite::{self, SuiteConfig, SUITES};
use haarmoments::{VerificationReport, C64};

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser, Debug)]
#[command(name = "haarmoments", version, about = "Spectral determinant moments over Haar-random unitaries")]
struct Cli {
    /// TOML file presetting seed and sample counts; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every Monte Carlo stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per Haar-average check.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one family of checks and print its reports as JSON.
    Verify {
        #[command(subcommand)]
        check: Verify,
        /// Write the JSON report here instead of stdout.
        #[arg(long, global = true)]
        json: Option<PathBuf>,
    },
    /// Tabulate a mean eigenvalue density on a grid as CSV.
    Density(DensityArgs),
    /// Tabulate the log-potential of a spectral law on a grid as CSV.
    Phi(PhiArgs),
    /// Run named suites (or `all`) and print a JSON document.
    Suite {
        name: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Moments against Haar averages.
    Thm1 {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
    /// Schur-measure identities in exact arithmetic.
    Lemma1 {
        #[arg(long, default_value_t = 6)]
        max_weight: usize,
        #[arg(long, default_value_t = 3)]
        max_m: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
    /// Beta-determinant identity on integer grids.
    Prop1 {
        #[arg(long, default_value_t = 15)]
        max_value: usize,
        #[arg(long, default_value_t = 50)]
        draws: usize,
    },
    /// Regularised inverse determinants. Without flags runs the full battery.
    Thm2a {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated eps values.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10)]
        cases: usize,
    },
    /// Rank-one Bessel group integral.
    Lemma5 {
        /// Single point `re,im` for `z^2`; without it runs the full battery.
        #[arg(long, requires = "n", allow_hyphen_values = true)]
        z2: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Model {
    Ginibre,
    CueRank1,
    GueRank1,
}

#[derive(Args, Debug)]
struct DensityArgs {
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// `X,Y`, each either a value or `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhiArgs {
    /// `mp`, or a JSON or TOML file holding a spectral law.
    #[arg(long, default_value = "mp")]
    law: String,
    /// `X,Y`, each either a value or `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    z_grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn suite_config(cli: &Cli) -> CliResult<SuiteConfig> {
    let mut cfg = match &cli.config {
        Some(path) => toml::from_str(&fs::read_to_string(path)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = cli.samples {
        cfg.samples = samples;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<bool> {
    let cfg = suite_config(&cli)?;
    match cli.command {
        Command::Verify { check, json } => {
            let reports = verify(check, &cfg)?;
            let pass = summarize("verify", &reports);
            emit(json.as_deref(), &serde_json::to_string_pretty(&reports)?)?;
            Ok(pass)
        }
        Command::Density(args) => {
            emit(args.out.as_deref(), &density_table(&args, &cfg)?)?;
            Ok(true)
        }
        Command::Phi(args) => {
            emit(args.out.as_deref(), &phi_table(&args)?)?;
            Ok(true)
        }
        Command::Suite { name, json } => {
            let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name.as_str()] };
            let mut pass = true;
            let mut suites = Vec::new();
            for s in names {
                let reports = suite::run_suite(s, &cfg)?;
                pass &= summarize(s, &reports);
                let failed = reports.iter().filter(|r| !r.pass).count();
                suites.push(json!({"name": s, "checks": reports.len(), "failed": failed, "reports": reports}));
            }
            let doc = json!({"config": cfg, "pass": pass, "suites": suites});
            emit(json.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            Ok(pass)
        }
    }
}

fn verify(check: Verify, cfg: &SuiteConfig) -> CliResult<Vec<VerificationReport>> {
    Ok(match check {
        Verify::Thm1 { n, m, cases } => suite::thm1_cases(n, m, cases, cfg)?,
        Verify::Lemma1 { max_weight, max_m, max_n } => lemma1_suite(max_weight, max_m, max_n),
        Verify::Prop1 { max_value, draws } => prop1_suite(&[1, 2, 3, 4], max_value, draws, cfg.seed),
        Verify::Thm2a { n: None, grid: None, .. } => suite::thm2a_suite(cfg)?,
        Verify::Thm2a { n, grid, cases } => {
            let grid = grid.unwrap_or_else(|| vec![0.05, 0.2]);
            suite::thm2a_cases(n.unwrap_or(4), &grid, cases, cfg)?
        }
        Verify::Lemma5 { z2: None, .. } => suite::lemma5_suite(cfg)?,
        Verify::Lemma5 { z2: Some(z2), n } => {
            let n = n.expect("clap enforces --n");
            let z2 = parse_complex(&z2)?;
            let s = fn_rank1(z2, n)?;
            let q = fn_rank1_quadrature(z2, n)?;
            let params = haarmoments::params! {"n" => n, "z2_re" => z2.re, "z2_im" => z2.im};
            vec![VerificationReport::numeric("lemma5.series", params, q, s, 1e-10 * s.norm().max(1.0))]
        }
    })
}

/// Prints a pass/fail count to stderr and returns whether everything passed.
fn summarize(name: &str, reports: &[VerificationReport]) -> bool {
    let failed: Vec<&VerificationReport> = reports.iter().filter(|r| !r.pass).collect();
    eprintln!("{name}: {} checks, {} failed", reports.len(), failed.len());
    for r in &failed {
        eprintln!("  {}", r.summary());
    }
    failed.is_empty()
}

fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")),
        None => match writeln!(io::stdout().lock(), "{text}") {
            // A closed pipe (`| head`) is not an error.
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn parse_complex(s: &str) -> CliResult<C64> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected `re,im`, got {s:?}"))?;
    Ok(C64::new(re.trim().parse()?, im.trim().parse()?))
}

/// One axis: a single value or `lo:hi:count` inclusive of both ends.
fn parse_axis(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [v] => Ok(vec![v.parse()?]),
        [lo, hi, count] => {
            let (lo, hi, count): (f64, f64, usize) = (lo.parse()?, hi.parse()?, count.parse()?);
            if count == 0 {
                return Err("grid axis needs at least one point".into());
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            let step = (hi - lo) / (count - 1) as f64;
            Ok((0..count).map(|i| lo + step * i as f64).collect())
        }
        _ => Err(format!("bad grid axis {s:?}; use a value or lo:hi:count").into()),
    }
}

/// Grid points in row-major order, `x` varying fastest.
fn parse_grid(s: &str) -> CliResult<Vec<C64>> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `X,Y` grid, got {s:?}"))?;
    let (xs, ys) = (parse_axis(x)?, parse_axis(y)?);
    Ok(ys.iter().flat_map(|&y| xs.iter().map(move |&x| C64::new(x, y))).collect())
}

fn density_table(args: &DensityArgs, cfg: &SuiteConfig) -> CliResult<String> {
    let gamma = || args.gamma.ok_or("this model needs --gamma");
    let model = match args.model {
        Model::Ginibre => DensityModel::Ginibre,
        Model::CueRank1 => DensityModel::CueRank1 { gamma: gamma()? },
        Model::GueRank1 => DensityModel::GueRank1 { beta: args.beta, gamma: gamma()? },
    };
    let with_stderr = matches!(args.model, Model::GueRank1);
    let mut out = String::from(if with_stderr { "x,y,value,stderr\n" } else { "x,y,value\n" });
    for (i, z) in parse_grid(&args.grid)?.into_iter().enumerate() {
        let (value, stderr) = DensityQuery::new(args.n, model, z)?.density(cfg.mc(cfg.samples, i as u64))?;
        if with_stderr {
            out.push_str(&format!("{},{},{value},{stderr}\n", z.re, z.im));
        } else {
            out.push_str(&format!("{},{},{value}\n", z.re, z.im));
        }
    }
    Ok(out.trim_end().to_string())
}

fn load_law(spec: &str) -> CliResult<SpectralLaw> {
    if spec == "mp" {
        return Ok(mp_law());
    }
    let text = fs::read_to_string(spec)?;
    Ok(if spec.ends_with(".toml") { toml::from_str(&text)? } else { serde_json::from_str(&text)? })
}

fn phi_table(args: &PhiArgs) -> CliResult<String> {
    let law = load_law(&args.law)?;
    let mut out = String::from("x,y,value\n");
    for z in parse_grid(&args.z_grid)? {
        out.push_str(&format!("{},{},{}\n", z.re, z.im, fz_phi(&law, z)?));
    }
    Ok(out.trim_end().to_string())
}
