//! Command-line front end: `verify`, `metrics`, `compress` and `sweep`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::compress_image;
use crate::corpus::{emit_csv, read_pgm, sweep, write_pgm};
use crate::error::Error;
use crate::fastalg::{build_plan, count_ops, count_ops_by_stage, OpCount};
use crate::kernels::{
    build_c_hat, build_dct, build_t, build_wht, read_kernel_file, IntKernel16, KernelFile,
};
use crate::metrics::{format_significant, full_report, write_report_csv, CovarianceModel};
use crate::{Transform, N};

/// Seed for the random vectors of `verify`.
pub const DEFAULT_SEED: u64 = 0xDC716;

/// Random vectors compared in `verify`.
pub const VERIFY_VECTORS: usize = 10_000;

pub const DEFAULT_R_GRID: [usize; 9] = [2, 4, 8, 16, 32, 50, 64, 96, 128];

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mldct",
    version,
    about = "Multiplierless 16-point DCT approximation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the factorization, fast/direct equivalence, orthonormality and operation count.
    Verify(VerifyArgs),
    /// Print DCT distortion, error energy, MSE, coding gain and efficiency.
    Metrics(MetricsArgs),
    /// Compress one PGM image with 16×16 blocks, keeping r coefficients each.
    Compress(CompressArgs),
    /// Average PSNR/SSIM over a directory of PGM images for a grid of r.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Transform to use: dct, wht, proposed, or the name of a loaded kernel. Repeatable.
    #[arg(long = "transform", value_name = "NAME")]
    pub transforms: Vec<String>,
    /// Integer kernel file to load (name line, then 16 rows of 16 integers). Repeatable.
    #[arg(long = "kernel-file", value_name = "PATH")]
    pub kernel_files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Verify against this kernel instead of the built-in one.
    #[arg(long = "kernel-file", value_name = "PATH")]
    pub kernel_file: Option<PathBuf>,
    /// Seed for the random test vectors (default 0xDC716).
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub transforms: TransformArgs,
    /// Markov-1 correlation coefficient.
    #[arg(long, default_value_t = 0.95, value_parser = parse_rho)]
    pub rho: f64,
    /// Also write the table as CSV.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub transforms: TransformArgs,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Coefficients kept per block, in zigzag order.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..=256))]
    pub r: u16,
    /// Reconstructed PGM.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub transforms: TransformArgs,
    /// Directory of P5 PGM images.
    #[arg(long, value_name = "DIR")]
    pub corpus: PathBuf,
    /// Comma-separated retained-coefficient counts.
    #[arg(long = "r-grid", value_delimiter = ',', value_parser = clap::value_parser!(u16).range(1..=256))]
    pub r_grid: Vec<u16>,
    /// CSV destination.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn parse_rho(s: &str) -> Result<f64, String> {
    let rho: f64 = s.parse().map_err(|e| format!("invalid ρ `{s}`: {e}"))?;
    if rho > 0.0 && rho < 1.0 {
        Ok(rho)
    } else {
        Err(format!("ρ must lie in (0, 1), got {rho}"))
    }
}

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK_FAILED,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Check(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Check(other.to_string()),
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

type CliResult = Result<(), CliError>;

/// Parses `args` (including the program name) and runs the subcommand,
/// writing human-readable output to `out`. Returns the exit status.
pub fn run<I, W>(args: I, out: &mut W, err: &mut W) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(
                if code == EXIT_OK {
                    &mut *out
                } else {
                    &mut *err
                },
                "{}",
                e.render()
            );
            return code;
        }
    };
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Metrics(a) => cmd_metrics(&a, out),
        Command::Compress(a) => cmd_compress(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

/// Built-in transforms plus loaded kernels, filtered by `--transform`.
pub fn resolve_transforms(args: &TransformArgs) -> Result<Vec<Transform>, CliError> {
    let mut available: Vec<Transform> = vec![build_dct(N)?, build_wht(), build_c_hat()];
    for path in &args.kernel_files {
        let kernel = read_kernel_file(path)?.into_kernel()?;
        available.push(Transform::from_kernel(&kernel)?);
    }
    if args.transforms.is_empty() {
        return Ok(available);
    }
    args.transforms
        .iter()
        .map(|name| {
            available
                .iter()
                .find(|t| t.name() == name)
                .cloned()
                .ok_or_else(|| {
                    let known: Vec<&str> = available.iter().map(|t| t.name()).collect();
                    CliError::Usage(format!(
                        "unknown transform `{name}` (known: {})",
                        known.join(", ")
                    ))
                })
        })
        .collect()
}

/// Outcome of one `verify` check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs the `verify` checks of the built-in factorization against `target`.
pub fn verification_checks(target: &KernelFile, seed: u64) -> Vec<Check> {
    let plan = build_plan();
    let mut checks = Vec::new();

    let composed = plan.compose();
    let mismatches = (0..N)
        .flat_map(|i| (0..N).map(move |j| (i, j)))
        .filter(|&(i, j)| composed[(i, j)] != target.entries[i][j] as i64)
        .count();
    checks.push(Check {
        name: "factorization identity",
        passed: mismatches == 0,
        detail: format!(
            "P2·M4·M3·M2·P1·M1 vs `{}`: {mismatches} of 256 entries differ",
            target.name
        ),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for _ in 0..VERIFY_VECTORS {
        let x: [i32; N] = std::array::from_fn(|_| rng.random_range(-255..=255));
        let direct: [i32; N] =
            std::array::from_fn(|i| target.entries[i].iter().zip(&x).map(|(k, v)| k * v).sum());
        if plan.forward(x) != direct {
            failures += 1;
        }
    }
    checks.push(Check {
        name: "fast/direct equivalence",
        passed: failures == 0,
        detail: format!("{failures} of {VERIFY_VECTORS} random vectors differ (seed {seed:#x})"),
    });

    let ortho = IntKernel16::new(target.name.clone(), target.entries)
        .and_then(|k| Transform::from_kernel(&k))
        .map(|c| {
            c.matrix()
                .mul_transposed(c.matrix())
                .max_deviation_from_identity()
        });
    checks.push(match ortho {
        Ok(dev) => Check {
            name: "orthonormality",
            passed: dev < 1e-12,
            detail: format!("max |S·K·(S·K)ᵀ − I| = {dev:.3e}"),
        },
        Err(e) => Check {
            name: "orthonormality",
            passed: false,
            detail: e.to_string(),
        },
    });

    let ops = count_ops(&plan);
    checks.push(Check {
        name: "operation count",
        passed: ops
            == OpCount {
                multiplications: 0,
                additions: 60,
                bit_shifts: 0,
            },
        detail: ops.to_string(),
    });

    let stages = count_ops_by_stage(&plan);
    let per_stage: Vec<String> = stages
        .iter()
        .map(|(l, c)| format!("{l} {}", c.additions))
        .collect();
    let additions: Vec<u64> = stages.iter().map(|(_, c)| c.additions).collect();
    checks.push(Check {
        name: "stage additions",
        passed: additions == [16, 0, 16, 24, 4, 0],
        detail: per_stage.join(", "),
    });
    checks
}

pub fn cmd_verify<W: Write>(args: &VerifyArgs, out: &mut W) -> CliResult {
    let target = match &args.kernel_file {
        Some(path) => read_kernel_file(path)?,
        None => {
            let t = build_t();
            KernelFile {
                name: t.name().to_owned(),
                entries: *t.entries(),
            }
        }
    };
    let checks = verification_checks(&target, args.seed);
    writeln!(out, "{:<26} {:<6} detail", "check", "result").map_err(io_err)?;
    for c in &checks {
        writeln!(
            out,
            "{:<26} {:<6} {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        )
        .map_err(io_err)?;
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

pub fn cmd_metrics<W: Write>(args: &MetricsArgs, out: &mut W) -> CliResult {
    let transforms = resolve_transforms(&args.transforms)?;
    let model = CovarianceModel::new(N, args.rho).map_err(|e| CliError::Usage(e.to_string()))?;
    let reports = full_report(&transforms, &model)?;
    writeln!(
        out,
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}   (ρ = {})",
        "transform", "d2", "epsilon", "mse", "cg [dB]", "eta [%]", args.rho
    )
    .map_err(io_err)?;
    for r in &reports {
        writeln!(
            out,
            "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.name, r.d2, r.epsilon, r.mse, r.cg, r.eta
        )
        .map_err(io_err)?;
    }
    if let Some(path) = &args.output {
        let file = std::fs::File::create(path).map_err(|e| CliError::from(Error::io(path, e)))?;
        write_report_csv(&reports, std::io::BufWriter::new(file))
            .map_err(|e| CliError::from(Error::io(path, e)))?;
    }
    Ok(())
}

pub fn cmd_compress<W: Write>(args: &CompressArgs, out: &mut W) -> CliResult {
    let mut transforms = resolve_transforms(&args.transforms)?;
    if args.transforms.transforms.is_empty() {
        transforms.retain(|t| t.name() == "proposed");
    }
    if transforms.len() != 1 {
        return Err(CliError::Usage(
            "compress takes exactly one --transform".into(),
        ));
    }
    let image = read_pgm(&args.input)?;
    let result = compress_image(&image, &transforms[0], args.r as usize)?;
    write_pgm(&result.reconstructed, &args.output)?;
    writeln!(out, "transform: {}", transforms[0].name()).map_err(io_err)?;
    writeln!(out, "r: {}", result.r).map_err(io_err)?;
    writeln!(out, "PSNR: {} dB", result.psnr).map_err(io_err)?;
    writeln!(out, "SSIM: {:.6}", result.ssim).map_err(io_err)?;
    Ok(())
}

pub fn cmd_sweep<W: Write>(args: &SweepArgs, out: &mut W) -> CliResult {
    let transforms = resolve_transforms(&args.transforms)?;
    let grid: Vec<usize> = if args.r_grid.is_empty() {
        DEFAULT_R_GRID.to_vec()
    } else {
        args.r_grid.iter().map(|&r| r as usize).collect()
    };
    let outcome = sweep(&args.corpus, &transforms, &grid)?;
    emit_csv(&outcome.results, &args.output)?;
    writeln!(
        out,
        "{} image(s) averaged, {} skipped",
        outcome.images.len(),
        outcome.skipped.len()
    )
    .map_err(io_err)?;
    for (path, why) in &outcome.skipped {
        writeln!(out, "  skipped {}: {why}", path.display()).map_err(io_err)?;
    }
    writeln!(
        out,
        "{:<12} {:>4} {:>10} {:>10} {:>10} {:>10}",
        "transform", "r", "psnr", "ssim", "ape_psnr", "ape_ssim"
    )
    .map_err(io_err)?;
    for s in &outcome.results {
        writeln!(
            out,
            "{:<12} {:>4} {:>10} {:>10} {:>10} {:>10}",
            s.transform,
            s.r,
            format_significant(s.mean_psnr, 6),
            format_significant(s.mean_ssim, 6),
            format_significant(s.ape_psnr, 4),
            format_significant(s.ape_ssim, 4)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seed("0xDC716"), Ok(DEFAULT_SEED));
        assert_eq!(parse_seed("42"), Ok(42));
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn rho_parsing() {
        assert_eq!(parse_rho("0.5"), Ok(0.5));
        assert!(parse_rho("1").is_err());
        assert!(parse_rho("0").is_err());
        assert!(parse_rho("abc").is_err());
    }

    #[test]
    fn builtin_checks_pass() {
        let t = build_t();
        let target = KernelFile {
            name: "proposed".into(),
            entries: *t.entries(),
        };
        for c in verification_checks(&target, DEFAULT_SEED) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn unknown_transform_is_usage_error() {
        let args = TransformArgs {
            transforms: vec!["bogus".into()],
            kernel_files: vec![],
        };
        let err = resolve_transforms(&args).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn default_selection() {
        let args = TransformArgs {
            transforms: vec![],
            kernel_files: vec![],
        };
        let names: Vec<String> = resolve_transforms(&args)
            .unwrap()
            .iter()
            .map(|t| t.name().to_owned())
            .collect();
        assert_eq!(names, ["dct", "wht", "proposed"]);
    }
}
