mod certjson;
mod parse;
mod selftest;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jcert::certificate::{certify, default_grid, rate_sweep, verify};
use jcert::jackson::JacksonSpectrum;
use jcert::kernelop::apply_inverse;
use jcert::{ChebPoly, MonoPoly};
use thiserror::Error;

use crate::certjson::CertificateJson;
use crate::parse::{parse_polynomial, ParseError};

const EXIT_NOT_CERTIFIABLE: u8 = 2;
const EXIT_RESIDUAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("polynomial: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Core(#[from] jcert::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use jcert::Error as E;
        match self {
            CliError::Usage(_) | CliError::Parse(_) => EXIT_USAGE,
            CliError::Core(E::NotCertifiable { .. } | E::NotNonnegative { .. }) => EXIT_NOT_CERTIFIABLE,
            CliError::Core(E::ResidualTooLarge { .. } | E::IllConditioned { .. }) => EXIT_RESIDUAL,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Json(_) | CliError::Failed(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "jcert", version, about = "Jackson-kernel positivity certificates on [-1,1]^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PolyArgs {
    /// Polynomial in x1..xn, e.g. "1 - x1^2 - x1^3 + x1^4".
    #[arg(long, conflicts_with = "poly_file", required_unless_present = "poly_file")]
    poly: Option<String>,
    #[arg(long)]
    poly_file: Option<PathBuf>,
    /// Number of variables (default: highest index used).
    #[arg(long)]
    nvars: Option<usize>,
}

impl PolyArgs {
    fn load(&self) -> Result<ChebPoly, CliError> {
        let text = match (&self.poly, &self.poly_file) {
            (Some(t), _) => t.clone(),
            (None, Some(path)) => fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
            (None, None) => return Err(CliError::Usage("need --poly or --poly-file".into())),
        };
        let mono: MonoPoly = parse_polynomial(text.trim(), self.nvars)?;
        Ok(ChebPoly::from_monomial(&mono))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Certify f + eta and write the certificate as JSON.
    Certify {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Re-expand a stored certificate against f + eta.
    Verify {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Kernel lower bounds as CSV.
    Bound {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, conflicts_with = "r_sweep", required_unless_present = "r_sweep")]
        r: Option<u32>,
        /// A:B:STEP
        #[arg(long)]
        r_sweep: Option<String>,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Example polynomial and its inverse kernel images at r = 5 and 7 as CSV.
    Figure1 {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Run the built-in verification suites.
    Selftest {
        #[arg(long, value_enum, default_value = "quick")]
        level: selftest::Level,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Jackson coefficients as CSV.
    InspectKernel {
        #[arg(long)]
        r: u32,
    },
}

fn parse_sweep(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("--r-sweep expects A:B:STEP, got '{s}'"));
    let parts: Vec<u32> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, step] if step > 0 && a <= b => Ok((a..=b).step_by(step as usize).collect()),
        _ => Err(bad()),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Certify { poly, eta, r, out, format: Format::Json } => {
            let f = poly.load()?;
            let cert = certify(&f, eta, r)?;
            let rep = verify(&cert, &f);
            eprintln!(
                "certified: {} squares, residual {:e}, max total degree {}",
                rep.num_squares(),
                cert.residual,
                rep.max_total_degree
            );
            let mut text = serde_json::to_string_pretty(&CertificateJson::from(&cert))?;
            text.push('\n');
            write_output(&out, &text)
        }
        Command::Verify { poly, cert } => {
            let f = poly.load()?;
            let stored: CertificateJson = serde_json::from_str(&fs::read_to_string(&cert)?)?;
            let c = stored.to_certificate().map_err(CliError::Usage)?;
            let rep = verify(&c, &f);
            println!(
                "{}",
                serde_json::json!({
                    "valid": rep.is_valid(),
                    "residual": rep.residual,
                    "stored_residual": c.residual,
                    "scales_positive": rep.scales_positive,
                    "degrees_ok": rep.degrees_ok,
                    "squares": rep.num_squares(),
                })
            );
            if rep.is_valid() {
                Ok(())
            } else {
                Err(CliError::Core(jcert::Error::ResidualTooLarge { residual: rep.residual }))
            }
        }
        Command::Bound { poly, r, r_sweep, grid } => {
            let f = poly.load()?;
            let rs = match (r, r_sweep) {
                (Some(r), _) => vec![r],
                (None, Some(s)) => parse_sweep(&s)?,
                (None, None) => return Err(CliError::Usage("need --r or --r-sweep".into())),
            };
            let grid = grid.unwrap_or_else(|| default_grid(f.num_vars()));
            let sweep = rate_sweep(&f, &rs, grid)?;
            let mut text = String::from("r,lambda_star,fmin_est,gap,C,threshold,bound,ok\n");
            for row in &sweep.rows {
                let ok = row.theorem_satisfied.map_or("na".to_string(), |b| b.to_string());
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    row.r, row.lambda_star, row.fmin_est, row.gap, row.c_used, row.threshold, row.bound, ok
                ));
            }
            write_output(&None, &text)
        }
        Command::Figure1 { samples } => {
            if samples < 2 {
                return Err(CliError::Usage("--samples must be at least 2".into()));
            }
            let f = ChebPoly::from_monomial(&MonoPoly::univariate(&[1.1, 0.0, -1.0, -1.0, 1.0]));
            let inv5 = apply_inverse(&f, 5)?;
            let inv7 = apply_inverse(&f, 7)?;
            let mut text = String::from("x,f_plus_eta,inv5,inv7\n");
            for j in 0..samples {
                let x = if 2 * j + 1 == samples { 0.0 } else { -1.0 + 2.0 * j as f64 / (samples - 1) as f64 };
                let p = [x];
                text.push_str(&format!("{},{},{},{}\n", x, f.eval(&p)?, inv5.eval(&p)?, inv7.eval(&p)?));
            }
            write_output(&None, &text)
        }
        Command::Selftest { level, seed } => {
            let summary = selftest::run(level, seed);
            for c in &summary.checks {
                eprintln!("{}: {} ({} cases, {:.2}s)", c.check, if c.passed { "ok" } else { "FAILED" }, c.cases, c.seconds);
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if summary.passed {
                Ok(())
            } else {
                Err(CliError::Failed("selftest failed".into()))
            }
        }
        Command::InspectKernel { r } => {
            let spec = JacksonSpectrum::new(r);
            let mut text = String::from("k,lambda\n");
            for (k, l) in spec.lambdas().iter().enumerate() {
                text.push_str(&format!("{k},{l}\n"));
            }
            write_output(&None, &text)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("JC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("JC_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
