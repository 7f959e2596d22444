//! `vlab`: verification suites, convergence sweeps and matrix export.
//!
//! The binary is a thin wrapper over [`run`], which takes the full argument
//! list and returns the process exit code.

mod catalog;
mod checks;
mod config;
mod error;
mod export;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use catalog::Catalog;
use config::{CommonArgs, Format, SuiteConfig};
use error::CliError;
use export::OperatorId;
use report::{SuiteReport, REPORT_CSV_HEADER};

#[derive(Parser)]
#[command(name = "vlab", version, about = "Truncated SU(1,1) time-operator verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Axis {
    Dim,
    Omega,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write its report.
    Verify(CommonArgs),
    /// Run one suite along a dimension or frequency axis; prints the trend table.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write one operator matrix as `i,j,re,im` lines.
    Export {
        #[arg(long, value_enum)]
        operator: OperatorId,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(r: &SuiteReport) {
    let (pass, fail, report) = r.counts();
    eprintln!("suite {}: {pass} pass, {fail} fail, {report} report", r.params.suite.name());
    for c in r.checks.iter().filter(|c| c.is_failure()) {
        match &c.error {
            Some(e) => eprintln!("  {}: error: {e}", c.id),
            None => eprintln!(
                "  {}: residual {:e} misses tolerance {:e}",
                c.id,
                c.residual,
                c.tolerance.unwrap_or(f64::NAN)
            ),
        }
    }
}

fn verify(args: &CommonArgs, catalog: &Catalog) -> Result<u8, CliError> {
    let cfg = SuiteConfig::from_args(args, catalog, true)?;
    let r = report::run_suite(&cfg, catalog)?;
    let text = match cfg.format {
        Format::Json => report::report_json(&r)?,
        Format::Csv => report::report_csv(&r),
    };
    write_out(cfg.report.as_deref(), &text)?;
    summarize(&r);
    Ok(r.exit_code())
}

fn sweep(axis: Axis, values: &[f64], args: &CommonArgs, catalog: &Catalog) -> Result<u8, CliError> {
    if values.len() < 2 {
        return Err(CliError::Config("sweep needs at least two values".into()));
    }
    let up = values.windows(2).all(|p| p[1] > p[0]);
    let down = values.windows(2).all(|p| p[1] < p[0]);
    if !(up || down) {
        return Err(CliError::Config("sweep values must be strictly monotone".into()));
    }
    let mut args = args.clone();
    if axis == Axis::Dim {
        if values.iter().any(|v| !(v.fract() == 0.0 && *v >= 1.0)) {
            return Err(CliError::Config("dimension values must be positive integers".into()));
        }
        args.dim = Some(values[0] as usize);
    }
    let base = SuiteConfig::from_args(&args, catalog, true)?;
    let configs = values
        .iter()
        .map(|&v| match axis {
            Axis::Dim => base.with_dim(v as usize),
            Axis::Omega => base.with_omega(v),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let r = report::run_suite(cfg, catalog)?;
        summarize(&r);
        reports.push(r);
    }
    if let Some(path) = base.report.as_deref() {
        let text = match base.format {
            Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
            Format::Csv => {
                let mut s = format!("value,{REPORT_CSV_HEADER}\n");
                for (v, r) in values.iter().zip(&reports) {
                    s.push_str(&report::report_csv_rows(r, Some(*v)));
                }
                s
            }
        };
        write_out(Some(path), &text)?;
    }
    print!("{}", report::trend_csv(values, &reports));
    Ok(reports.iter().map(SuiteReport::exit_code).max().unwrap_or(0))
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let catalog = Catalog::load()?;
    match cli.command {
        Command::Verify(args) => verify(&args, &catalog),
        Command::Sweep { axis, values, common } => sweep(axis, &values, &common, &catalog),
        Command::Export { operator, out, common } => {
            let cfg = SuiteConfig::from_args(&common, &catalog, false)?;
            export::export(operator, &cfg, &out)?;
            Ok(0)
        }
    }
}

/// Parse `args` (program name first), execute, and return the exit code:
/// 0 all checks pass, 1 a check failed, 2 usage or configuration error.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    // single-threaded kernels keep floating-point reductions in a fixed order
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
