//! Front end for the `vlb` binary. Each command writes to the given sink and
//! returns the process exit code: 0 verified, 1 verification failure,
//! 2 malformed input or bad parameters.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;
use vlb_core::constructions::{
    apply_metric, build_chain, default_epsilon, gen_grid2, gen_grid3_perturbed, gen_hypergrid, gen_quad4,
    gen_quint5, plan, plan_blocks, plan_kflat, BlockKind, ChainSpec, Construction, MetricOptions, Mode, Template,
};
use vlb_core::exactnum::{format_rational, parse_number, Rational};
use vlb_core::flats::Metric;
use vlb_core::format::{from_json, render_report, report_to_json, to_json};
use vlb_core::verify::{
    bound_exponent, oracle_compare, oracle_discover, required_count, verify_construction_with, OracleOptions,
    VerifyOptions,
};
use vlb_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Domain(_)) => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "vlb", version, about = "Voronoi lower-bound constructions and certificate checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a construction and write its certificate file.
    Generate(GenerateArgs),
    /// Check every certificate of a file.
    Verify(VerifyArgs),
    /// Rediscover tuples by sampling and compare with the certificates.
    Oracle(OracleArgs),
    /// Show the block decomposition for a dimension.
    Plan(PlanArgs),
    /// Tabulate certified counts against n^⌈2d/3⌉.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Grid2,
    Grid3p,
    Quad4,
    Quint5,
    Hypergrid,
    Kflat,
    Plan,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EpsilonRule {
    /// 1/(8n+1), one step inside the bound.
    Default,
    /// 1/(16n).
    Half,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: Kind,
    #[arg(long, default_value_t = 2)]
    pub n: u64,
    /// Perturbation size, `p/q` or decimal.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long, value_enum, default_value_t = EpsilonRule::Default)]
    pub epsilon_rule: EpsilonRule,
    /// euclidean, l1 or lp:P.
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    /// Dimension k of the flats (hypergrid, kflat).
    #[arg(long, default_value_t = 2)]
    pub flat_dim: usize,
    /// Copies for kflat, or a comma-separated block list for chain.
    #[arg(long)]
    pub blocks: Option<String>,
    /// Target dimension (plan).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Leave kflat copies unperturbed (their flats intersect).
    #[arg(long)]
    pub unperturbed: bool,
    /// Separator value σ; defaults to 1, or d·n + 1 under l1.
    #[arg(long)]
    pub separator: Option<String>,
    /// Target width of interval witnesses.
    #[arg(long, env = "VLB_PRECISION")]
    pub precision: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub input: PathBuf,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the machine-readable report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Dimensions: `2-7`, `2,3,5` or a mix. Empty gives an empty table.
    #[arg(long, default_value = "")]
    pub dim: String,
    /// Values of n, same syntax.
    #[arg(long, default_value = "2")]
    pub n: String,
    #[arg(long, value_enum, default_value_t = EpsilonRule::Default)]
    pub epsilon_rule: EpsilonRule,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add a wall-time column (the table is then no longer reproducible).
    #[arg(long)]
    pub timing: bool,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn epsilon_for(rule: EpsilonRule, metric: &Metric, n: u64) -> Rational {
    match rule {
        EpsilonRule::Default => default_epsilon(metric, n),
        EpsilonRule::Half => {
            let base = default_epsilon(metric, n);
            let half = Rational::new(1.into(), (16 * n.max(1)).into());
            base.min(half)
        }
    }
}

/// Parses `2-7,9` into `[2, 3, 4, 5, 6, 7, 9]`.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::Usage(format!("bad list entry `{part}`"));
        match part.split_once(['-', '.']) {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim_start_matches('.').trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<output>".into(), source })
}

/// Builds the construction requested by `args`.
pub fn build(args: &GenerateArgs) -> Result<Construction> {
    let metric: Metric = args.metric.parse()?;
    let n = args.n;
    let eps = match &args.epsilon {
        Some(e) => parse_number(e)?,
        None => epsilon_for(args.epsilon_rule, &metric, n),
    };
    let exact_default = matches!(metric, Metric::Euclidean | Metric::L1);
    let mode = args.mode.unwrap_or(if exact_default { Mode::Exact } else { Mode::Interval });
    let mut opts = MetricOptions { mode, ..Default::default() };
    if let Some(p) = &args.precision {
        opts.width = parse_number(p)?;
        if opts.width <= Rational::from_integer(0.into()) {
            return Err(CliError::Usage("precision must be positive".into()));
        }
    }
    if let Some(s) = &args.separator {
        opts.separator = Some(parse_number(s)?);
    }
    let copies = || -> Result<usize> {
        match &args.blocks {
            None => Ok(2),
            Some(b) => b.trim().parse().map_err(|_| CliError::Usage(format!("--blocks must be a copy count, got `{b}`"))),
        }
    };
    let plain = metric == Metric::Euclidean && mode == Mode::Exact && args.separator.is_none();
    let c = match args.kind {
        Kind::Grid2 if plain => gen_grid2(n)?,
        Kind::Grid3p if plain => gen_grid3_perturbed(n, &eps)?,
        Kind::Quad4 if plain => gen_quad4(n, &eps)?,
        Kind::Quint5 if plain => gen_quint5(n, &eps)?,
        Kind::Hypergrid if plain => gen_hypergrid(args.flat_dim, n)?,
        Kind::Kflat if plain => plan_kflat(args.flat_dim, copies()?, n, (!args.unperturbed).then_some(&eps))?,
        Kind::Plan if plain => {
            let d = args.dim.ok_or_else(|| CliError::Usage("plan needs --dim".into()))?;
            plan(d, n, &eps)?.1
        }
        Kind::Chain => {
            let list = args.blocks.as_deref().ok_or_else(|| CliError::Usage("chain needs --blocks".into()))?;
            let blocks = list.split(',').map(str::parse::<BlockKind>).collect::<vlb_core::Result<Vec<_>>>()?;
            let mut spec = ChainSpec::new(blocks, n);
            spec.epsilon = Some(eps);
            spec.metric = metric.clone();
            spec.perturb = !args.unperturbed;
            spec.target_dim = args.dim;
            spec.mode = mode;
            spec.width = opts.width.clone();
            let dim = spec.target_dim.unwrap_or_else(|| spec.consumed_dim());
            spec.separator = match (&opts.separator, &metric) {
                (Some(s), _) => s.clone(),
                (None, Metric::L1) => Rational::from_integer((dim as u64 * n + 1).into()),
                _ => Rational::from_integer(1.into()),
            };
            build_chain(&spec)?
        }
        kind => {
            let template = match kind {
                Kind::Grid2 => Template::Grid2,
                Kind::Grid3p => Template::Grid3p,
                Kind::Quad4 => Template::Quad4,
                Kind::Quint5 => Template::Quint5,
                Kind::Hypergrid => Template::Hypergrid(args.flat_dim),
                Kind::Kflat => Template::Kflat { k: args.flat_dim, c: copies()? },
                Kind::Plan => Template::Plan(args.dim.ok_or_else(|| CliError::Usage("plan needs --dim".into()))?),
                Kind::Chain => unreachable!("handled above"),
            };
            let perturbed = !(kind == Kind::Kflat && args.unperturbed);
            apply_metric(template, n, perturbed.then_some(&eps), &metric, &opts)?
        }
    };
    Ok(c)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let c = build(args)?;
    let text = to_json(&c);
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            let eps = c.params.epsilon.as_ref().map(|e| format!(", epsilon {}", format_rational(e))).unwrap_or_default();
            let msg = format!(
                "wrote {}: {} sites, {} certificates in R^{} ({}{eps})\n",
                path.display(),
                c.sites.len(),
                c.certificates.len(),
                c.dim,
                c.metric
            );
            emit(out, &msg)?;
        }
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let c = from_json(&read(&args.input)?)?;
    let report = verify_construction_with(&c, &VerifyOptions { jobs: args.jobs, mode: args.mode })?;
    let json = report_to_json(&report);
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    emit(out, &if args.json { json } else { render_report(&report) })?;
    Ok(if report.success() { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if !(args.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let c = from_json(&read(&args.input)?)?;
    let report = verify_construction_with(&c, &VerifyOptions { jobs: args.jobs, mode: None })?;
    let opts = OracleOptions { samples: args.samples, seed: args.seed, tol: args.tol, jobs: args.jobs };
    let o = oracle_discover(&c, &opts);
    let cmp = oracle_compare(&report, &o);
    let names = |t: &Vec<usize>| format!("{{{}}}", c.tuple_labels(t).join(", "));
    let mut s = String::new();
    let _ = writeln!(s, "samples     {} (seed {}, tol {:e})", o.samples, o.seed, o.tol);
    let _ = writeln!(s, "discovered  {} tuple(s), {} converged sample(s)", o.discovered.len(), o.converged);
    let _ = writeln!(s, "certified   {}", report.passing_tuples().len());
    let _ = writeln!(s, "missing     {}", cmp.missing.len());
    for t in &cmp.missing {
        let _ = writeln!(s, "  {}", names(t));
    }
    let _ = writeln!(s, "extra       {}", cmp.extra.len());
    for t in &cmp.extra {
        let d = o.discovered.iter().find(|d| &d.tuple == t).expect("extra tuples are discovered");
        let w: Vec<String> = d.witness.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(s, "  {} near ({}), hits {}", names(t), w.join(", "), d.hits);
    }
    let _ = writeln!(s, "result      {}", if cmp.consistent { "consistent" } else { "INCONSISTENT" });
    emit(out, &s)?;
    Ok(if cmp.consistent { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_plan(args: &PlanArgs, out: &mut dyn Write) -> Result<i32> {
    let p = plan_blocks(args.dim)?;
    let mut s = String::new();
    let blocks: Vec<String> = p.blocks.iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "dimension   {}", p.target_dim);
    let _ = writeln!(s, "blocks      {}", blocks.join(" + "));
    let _ = writeln!(s, "consumed    {} (slack {})", p.consumed_dim, p.target_dim - p.consumed_dim);
    let _ = writeln!(s, "exponent    {}", p.exponent);
    if let Some(n) = args.n {
        let _ = writeln!(s, "predicted   {n}^{} = {}", p.exponent, required_count(n, args.dim));
    }
    emit(out, &s)?;
    Ok(EXIT_OK)
}

/// One row of the complexity table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub d: usize,
    pub n: u64,
    pub certified: Option<usize>,
    pub required: String,
    pub status: String,
    pub millis: Option<u128>,
}

impl ReportRow {
    pub fn verified(&self) -> bool {
        self.status == "verified"
    }
}

/// Generates the planned construction for every `(d, n)` and verifies it.
/// Errors are recorded in the row.
pub fn report_rows(dims: &[u64], ns: &[u64], rule: EpsilonRule, jobs: Option<usize>) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for &d in dims {
        for &n in ns {
            let start = Instant::now();
            let d = d as usize;
            let required = if d >= 2 && n >= 1 { required_count(n, d).to_string() } else { "-".into() };
            let eps = epsilon_for(rule, &Metric::Euclidean, n.max(1));
            let outcome = plan(d, n, &eps)
                .and_then(|(_, c)| verify_construction_with(&c, &VerifyOptions { jobs, mode: None }));
            let (certified, status) = match outcome {
                Ok(r) => (Some(r.distinct_tuples), if r.success() { "verified".into() } else { "FAILED".into() }),
                Err(e) => (None, format!("error: {e}")),
            };
            rows.push(ReportRow { d, n, certified, required, status, millis: Some(start.elapsed().as_millis()) });
        }
    }
    rows
}

pub fn render_rows(rows: &[ReportRow], timing: bool) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>4} {:>4} {:>4} {:>12} {:>12}  {}", "d", "n", "exp", "certified", "required", "status");
    s.push_str(if timing { "  time\n" } else { "\n" });
    for r in rows {
        let exp = if r.d >= 2 { bound_exponent(r.d).to_string() } else { "-".into() };
        let cert = r.certified.map_or("-".to_string(), |c| c.to_string());
        let _ = write!(s, "{:>4} {:>4} {:>4} {:>12} {:>12}  {}", r.d, r.n, exp, cert, r.required, r.status);
        match (timing, r.millis) {
            (true, Some(ms)) => {
                let _ = writeln!(s, "  {ms} ms");
            }
            _ => s.push('\n'),
        }
    }
    s
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let dims = parse_list(&args.dim)?;
    let ns = parse_list(&args.n)?;
    let rows = report_rows(&dims, &ns, args.epsilon_rule, args.jobs);
    emit(out, &render_rows(&rows, args.timing))?;
    Ok(if rows.iter().all(ReportRow::verified) { EXIT_OK } else { EXIT_FAIL })
}

/// Runs a parsed command; errors are printed to `err` and mapped to exit codes.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Plan(a) => cmd_plan(a, out),
        Command::Report(a) => cmd_report(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses arguments and runs; usage errors exit with 2.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{}", e.render());
            EXIT_USAGE
        }
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            EXIT_OK
        }
    }
}
