//! Command-line front end. Data goes to standard output (or `--output`),
//! diagnostics to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use log::warn;
use serde::Serialize;

use crate::attractor::attractor_cloud;
use crate::bounds::{
    regularity_report, BoundKind, FourierOptions, RegularityReport, ReportOptions,
};
use crate::equation::{parse_equation, validate, RefinementEquation};
use crate::error::{Error, Result};
use crate::fourier::{decay_estimate, default_radii, DecayEstimate, DecaySample};
use crate::iterate::{isolation_search, iterated_mask, EvidenceTable};
use crate::scalar::to_f64_vec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Regularity report: crude, eigen and refined bounds plus a decay estimate.
    Analyze,
    /// Iterated mask at level --m.
    Dm,
    /// Best isolation evidence for each level up to --m-max.
    Gaps,
    /// Attractor point cloud after --depth iterations.
    Attractor,
    /// Fourier decay samples and fitted exponent.
    Fourier,
}

#[derive(Debug, Parser)]
#[command(
    name = "refinable",
    version,
    about = "Regularity analysis of refinement equations"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandWithInput,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Subcommand)]
enum CommandWithInput {
    /// Regularity report: crude, eigen and refined bounds plus a decay estimate.
    Analyze { input: PathBuf },
    /// Iterated mask at level --m.
    Dm { input: PathBuf },
    /// Best isolation evidence for each level up to --m-max.
    Gaps { input: PathBuf },
    /// Attractor point cloud after --depth iterations.
    Attractor { input: PathBuf },
    /// Fourier decay samples and fitted exponent.
    Fourier { input: PathBuf },
}

#[derive(Debug, Clone, clap::Args)]
struct Options {
    /// Level for `dm`.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=64))]
    m: u32,
    /// Largest level for `analyze` and `gaps`.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=4096))]
    m_max: u32,
    /// Number of sampled directions (also the ray count for `fourier`).
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
    dirs: u32,
    /// Iterations for `attractor`.
    #[arg(long, global = true, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..=1000))]
    depth: u32,
    /// Word budget for `dm`, point budget for `attractor`.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Factors in the truncated Fourier product.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..=10_000))]
    terms: u32,
    /// Isolation threshold for the refined bound.
    #[arg(long, global = true, default_value_t = 0.0, value_parser = nonnegative)]
    r0: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance on the spectral radius and eigenvalues.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    tol: f64,
    /// Defaults to json for `analyze` and csv otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

fn nonnegative(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a finite nonnegative number, got {s:?}")),
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a finite positive number, got {s:?}")),
    }
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub m: usize,
    pub m_max: usize,
    pub dir_count: usize,
    pub depth: usize,
    pub budget: u64,
    pub terms: usize,
    pub r0: f64,
    pub seed: u64,
    pub tol: f64,
}

impl RunConfig {
    /// Defaults for `command` on `input`.
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        let cli = Cli::parse_from(["refinable", "analyze", "-"]);
        Self::from_parts(command, input.into(), cli.options)
    }

    fn from_parts(command: Command, input: PathBuf, o: Options) -> Self {
        let format = o.format.unwrap_or(match command {
            Command::Analyze => Format::Json,
            _ => Format::Csv,
        });
        RunConfig {
            command,
            input,
            format,
            output: o.output,
            m: o.m as usize,
            m_max: o.m_max as usize,
            dir_count: o.dirs as usize,
            depth: o.depth as usize,
            budget: o.budget,
            terms: o.terms as usize,
            r0: o.r0,
            seed: o.seed,
            tol: o.tol,
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            m_max: self.m_max,
            dir_count: self.dir_count,
            r0: self.r0,
            seed: self.seed,
            tol: self.tol,
            fourier: Some(FourierOptions {
                rays: self.dir_count,
                radii: default_radii(),
                terms: self.terms,
            }),
        }
    }
}

/// Parses command-line arguments; `Err` carries the exit code after the
/// message has been printed.
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunConfig, i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let (command, input) = match cli.command {
                CommandWithInput::Analyze { input } => (Command::Analyze, input),
                CommandWithInput::Dm { input } => (Command::Dm, input),
                CommandWithInput::Gaps { input } => (Command::Gaps, input),
                CommandWithInput::Attractor { input } => (Command::Attractor, input),
                CommandWithInput::Fourier { input } => (Command::Fourier, input),
            };
            Ok(RunConfig::from_parts(command, input, cli.options))
        }
        Err(e) => {
            let _ = e.print();
            Err(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK })
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. }
        | Error::NonConvergence(_)
        | Error::DegenerateDirection(_)
        | Error::IllPosedFit(_)
        | Error::NoRunnerUp => EXIT_LIMIT,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    match parse_args(args) {
        Ok(config) => dispatch(&config, &mut io::stdout().lock(), &mut io::stderr().lock()),
        Err(code) => code,
    }
}

/// Runs one subcommand. Output goes to `config.output` when set, else `out`.
pub fn dispatch(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match fs::read_to_string(&config.input) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", config.input.display());
            return EXIT_NO_INPUT;
        }
    };
    let result = parse_equation(&text).and_then(|eq| render(config, &eq, err));
    let bytes = match result {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &config.output {
        Some(path) => fs::write(path, &bytes),
        None => out.write_all(&bytes).and_then(|_| out.flush()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_IO
        }
    }
}

fn render(config: &RunConfig, eq: &RefinementEquation, err: &mut dyn Write) -> Result<Vec<u8>> {
    let diags = validate(eq);
    if diags.has_errors() {
        return Err(Error::Inadmissible(diags));
    }
    for d in &diags.entries {
        writeln!(err, "warning[{}]: {}", d.code, d.message)?;
    }
    match config.command {
        Command::Analyze => {
            let report = regularity_report(eq, &config.report_options())?;
            serialize_report(&report, config.format)
        }
        Command::Dm => {
            let mask = iterated_mask(eq, config.m, config.budget)?;
            if mask.collision_count > 0 {
                writeln!(err, "{} words merged by collisions", mask.collision_count)?;
            }
            let rows: Vec<(Vec<f64>, f64)> = mask
                .entries
                .iter()
                .map(|e| (to_f64_vec(&e.point), e.coefficient))
                .collect();
            match config.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Row<'a> {
                        point: &'a [f64],
                        coefficient: f64,
                    }
                    let doc: Vec<Row> = rows
                        .iter()
                        .map(|(p, c)| Row {
                            point: p,
                            coefficient: *c,
                        })
                        .collect();
                    json_bytes(&doc)
                }
                _ => {
                    let mut header: Vec<String> = (0..eq.dim()).map(|k| format!("x{k}")).collect();
                    header.push("coefficient".into());
                    csv_bytes(
                        &header,
                        rows.iter().map(|(p, c)| {
                            let mut r: Vec<String> = p.iter().map(f64::to_string).collect();
                            r.push(c.to_string());
                            r
                        }),
                    )
                }
            }
        }
        Command::Gaps => {
            let table = isolation_search(eq, config.m_max, config.dir_count, config.seed)?;
            for row in table.rows.iter().filter(|r| r.degenerate_directions > 0) {
                writeln!(
                    err,
                    "level {}: {} degenerate directions skipped",
                    row.m, row.degenerate_directions
                )?;
            }
            match config.format {
                Format::Json => json_bytes(&table),
                _ => gaps_csv(&table),
            }
        }
        Command::Attractor => {
            let budget = usize::try_from(config.budget).unwrap_or(usize::MAX);
            let cloud = attractor_cloud(eq, config.depth, budget, config.seed)?;
            for n in &cloud.notes {
                writeln!(err, "note: {n}")?;
            }
            match config.format {
                Format::Json => json_bytes(&cloud),
                _ => {
                    let header: Vec<String> = (0..eq.dim()).map(|k| format!("x{k}")).collect();
                    csv_bytes(
                        &header,
                        cloud
                            .points
                            .iter()
                            .map(|p| p.iter().map(f64::to_string).collect()),
                    )
                }
            }
        }
        Command::Fourier => {
            let (estimate, samples) = decay_estimate(
                eq,
                config.dir_count,
                &default_radii(),
                config.terms,
                config.seed,
            )?;
            fourier_bytes(&estimate, &samples, config.format, err)
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes<I>(header: &[String], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn gaps_csv(table: &EvidenceTable) -> Result<Vec<u8>> {
    let header: Vec<String> = [
        "m",
        "u",
        "gap",
        "p_m",
        "v_m",
        "coeff_product",
        "bound_contribution",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    csv_bytes(
        &header,
        table.rows.iter().map(|row| match &row.best {
            Some(b) => vec![
                row.m.to_string(),
                join(&b.u),
                b.gap.to_string(),
                b.p_m.to_string(),
                join(&b.v_m),
                b.coeff_product.to_string(),
                b.bound_contribution.to_string(),
            ],
            None => {
                let mut r = vec![row.m.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r
            }
        }),
    )
}

fn fourier_bytes(
    estimate: &DecayEstimate,
    samples: &[DecaySample],
    format: Format,
    err: &mut dyn Write,
) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                estimate: &'a DecayEstimate,
                samples: &'a [DecaySample],
            }
            json_bytes(&Doc { estimate, samples })
        }
        Format::Csv => {
            writeln!(
                err,
                "decay exponent {} (fit residual {}, smoothness proxy {})",
                estimate.exponent, estimate.fit_residual, estimate.smoothness_proxy
            )?;
            csv_bytes(
                &["radius".to_string(), "max_magnitude".to_string()],
                samples
                    .iter()
                    .map(|s| vec![s.radius.to_string(), s.max_magnitude.to_string()]),
            )
        }
        Format::Text => {
            let mut s = format!(
                "exponent {:.6}\nfit_residual {:.6}\nsmoothness_proxy {:.6}\nrays {}\nterms {}\n",
                estimate.exponent,
                estimate.fit_residual,
                estimate.smoothness_proxy,
                estimate.rays,
                estimate.terms
            );
            for sample in samples {
                s.push_str(&format!(
                    "{:>14.6} {:>14.6e}\n",
                    sample.radius, sample.max_magnitude
                ));
            }
            Ok(s.into_bytes())
        }
    }
}

pub fn serialize_report(report: &RegularityReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(report),
        Format::Text => Ok(report.to_string().into_bytes()),
        Format::Csv => {
            let header: Vec<String> = ["kind", "value", "interpretation"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let kind = |k: BoundKind| match k {
                BoundKind::Crude => "crude",
                BoundKind::Eigen => "eigen",
                BoundKind::Refined => "refined",
            };
            let mut rows: Vec<Vec<String>> = report
                .bounds()
                .map(|b| {
                    vec![
                        kind(b.kind).to_string(),
                        b.value.map_or(String::new(), |v| v.to_string()),
                        b.interpretation.clone(),
                    ]
                })
                .collect();
            rows.push(vec![
                "final".into(),
                report.final_bound.to_string(),
                String::new(),
            ]);
            csv_bytes(&header, rows)
        }
    }
}

pub fn parse_report(text: &str) -> Result<RegularityReport> {
    serde_json::from_str(text).map_err(|e| {
        warn!("report does not parse: {e}");
        Error::Json(e)
    })
}
