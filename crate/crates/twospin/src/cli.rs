//! Command-line interface. Exit codes: 0 success, 1 unparsable input,
//! 2 parameters outside the regime a command supports, 3 internal failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twospin_core::experiments::{
    beyond_lambda_c_certificate, beyond_lambda_c_instance, five_seven_demo, mixing_discrepancy, random_cluster_check,
    threshold_landscape, BeyondReport, LayeredGenerator, MixingRun, FIVE_SEVEN_INTERVAL,
};
use twospin_core::fptas::{approx_marginal, approx_partition_with, regime_potential, Mode};
use twospin_core::spin::{exact_marginal, exact_partition, marginal_bound_sweep};
use twospin_core::thresholds::{composed_fixed_points, compute_thresholds, fixed_points, lambda_c};
use twospin_core::tree::{exact_tree_marginal, TreeSpec};
use twospin_core::{Error, SpinParams};

use crate::format::to_json;
use crate::io::{load_graph, load_tree};
use crate::parallel::{default_jobs, par_map};
use crate::report::*;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Regime(String),
    Internal(String),
    /// Help or version text requested; not an error.
    Display(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Display(_) => 0,
            CliError::Parse(_) => 1,
            CliError::Regime(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "error: {m}"),
            CliError::Regime(m) => write!(f, "regime violation: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
            CliError::Display(m) => f.write_str(m.trim_end()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse(_) | Error::InvalidInstance(_) | Error::UnknownVertex(_) | Error::EdgeNotFound(_) => {
                CliError::Parse(msg)
            }
            Error::ParametersOutOfRange(_)
            | Error::GammaEqualsOne
            | Error::InstanceTooLarge { .. }
            | Error::DegreeTooLarge { .. }
            | Error::LambdaNotSubcritical { .. }
            | Error::DegreeBelowCritical { .. }
            | Error::ConcavityFailed { .. }
            | Error::RegimeViolation(_)
            | Error::VertexPinned(_) => CliError::Regime(msg),
            Error::Truncated | Error::BudgetExceeded { .. } | Error::DomainViolation { .. } => CliError::Internal(msg),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Bounded,
    Universal,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => Mode::Auto,
            ModeArg::Bounded => Mode::Bounded,
            ModeArg::Universal => Mode::Universal,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twospin", version, about = "Partition functions, thresholds and correlation decay for ferromagnetic two-spin systems")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Seed for every random generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximum worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
}

impl ParamArgs {
    fn params(&self) -> CliResult<SpinParams> {
        Ok(SpinParams::new(self.beta, self.gamma)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical degree and fields.
    Thresholds(ParamArgs),
    /// Gibbs uniqueness on infinite regular trees of degree 2..=d-max (or a single d).
    Uniqueness {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, conflicts_with = "d_max")]
        d: Option<u32>,
        #[arg(long, default_value_t = 12)]
        d_max: u32,
    },
    /// Fixed points of f_d, or of a composition such as --degrees 5,7.
    FixedPoints {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<f64>,
    },
    /// Partition function.
    Z {
        #[command(subcommand)]
        method: ZCommand,
    },
    /// Probability that a vertex (or a tree root) takes spin 0.
    Marginal(MarginalArgs),
    /// Numerical experiments; see `experiment --help`.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
pub enum ZCommand {
    /// Brute-force enumeration (at most 25 free vertices).
    Exact {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Deterministic approximation within relative error eps.
    Approx {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
    },
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    /// Graph document; use with --vertex.
    #[arg(long, required_unless_present_any = ["tree", "tree_spec"])]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub vertex: Option<u32>,
    /// Bracket the marginal to this additive width instead of enumerating.
    #[arg(long, requires = "graph")]
    pub eps: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    /// Tree document; needs --beta and --gamma.
    #[arg(long, conflicts_with_all = ["graph", "tree_spec"])]
    pub tree: Option<PathBuf>,
    /// Generated tree, e.g. alt:5,7:depth=4 or regular:3:depth=6:extra=2.
    #[arg(long, conflicts_with = "graph", requires = "lambda")]
    pub tree_spec: Option<String>,
    /// Uniform field for --tree-spec.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Discrepancy between random trees sharing their first ell levels.
    Mixing {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "layered:types=64:dmax=8:height=34")]
        generator: String,
        #[arg(long, default_value_t = 1)]
        ell_min: u32,
        #[arg(long, default_value_t = 14)]
        ell_max: u32,
        #[arg(long, default_value_t = 32)]
        trials: usize,
    },
    /// Alternating 5/7 tree at beta=1, gamma=2.
    FiveSeven {
        #[arg(long, default_value_t = 10.98)]
        lambda: f64,
    },
    /// Large-field certificate at beta=0.6, gamma=2, lambda=1002762 and oracle comparisons.
    BeyondLambdaC {
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 6)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Uniqueness verdicts over a field grid and tree degrees.
    Landscape {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 9.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 13.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 41)]
        lambda_steps: usize,
        #[arg(long, default_value_t = 2)]
        d_min: u32,
        #[arg(long, default_value_t = 12)]
        d_max: u32,
    },
    /// Checks p_v <= lambda/(lambda+1) on random graphs (1 <= beta <= gamma).
    MarginalBoundSweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        size_bound: usize,
    },
    /// Checks Z(G) = Z(G-) + (gamma-1) Z(G+) on random graphs and edges.
    RandomClusterCheck {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 9)]
        max_n: usize,
    },
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn emit<R: Report>(report: &R, format: Format) -> CliResult<String> {
    match format {
        Format::Json => to_json(report).map_err(|e| CliError::Internal(e.to_string())),
        Format::Csv => report.table().to_csv().map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn require_regime(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Regime(msg()))
    }
}

/// Parses `args` (program name first), runs the command and writes the report
/// to `stdout` or to `--out`.
pub fn run<I, T, W>(args: I, stdout: &mut W) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Display(e.to_string()),
        _ => CliError::Parse(e.to_string().trim_end().trim_start_matches("error: ").to_string()),
    });
    let cli = match cli {
        Err(CliError::Display(text)) => {
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))?;
            return Ok(());
        }
        other => other?,
    };
    let text = execute(&cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<String> {
    let fmt = cli.format;
    let jobs = cli.jobs.unwrap_or_else(default_jobs).max(1);
    match &cli.command {
        Command::Thresholds(p) => {
            let r = compute_thresholds(&p.params()?)?;
            emit(&ThresholdsOut::new(p.beta, p.gamma, &r), fmt)
        }
        Command::Uniqueness { params, lambda, d, d_max } => {
            let ds: Vec<u32> = match d {
                Some(d) => vec![*d],
                None => (2..=*d_max).collect(),
            };
            landscape(params, &[*lambda], &ds, fmt)
        }
        Command::FixedPoints { params, lambda, degrees } => {
            let p = params.params()?;
            require_regime(*lambda > 0.0 && lambda.is_finite(), || format!("lambda {lambda} must be positive"))?;
            require_regime(degrees.iter().all(|&d| d >= 0.0 && d.is_finite()), || {
                "child counts must be finite and nonnegative".into()
            })?;
            let set = if degrees.len() == 1 {
                fixed_points(&p, *lambda, degrees[0])
            } else {
                composed_fixed_points(&p, *lambda, degrees)
            };
            emit(&FixedPointsOut::new(params.beta, params.gamma, *lambda, degrees.clone(), set), fmt)
        }
        Command::Z { method: ZCommand::Exact { graph } } => {
            let sys = load_graph(graph)?;
            let log_z = exact_partition(&sys)?;
            emit(&ZExactOut { log_z, n: sys.len(), free: sys.free_ids().len() }, fmt)
        }
        Command::Z { method: ZCommand::Approx { graph, eps, mode } } => {
            let sys = load_graph(graph)?;
            let (mode, pot) = regime_potential(&sys, (*mode).into())?;
            let r = approx_partition_with(&sys, *eps, &pot, mode)?;
            emit(&ZApproxOut::from(&r), fmt)
        }
        Command::Marginal(m) => marginal(m, fmt),
        Command::Experiment(e) => experiment(e, cli.seed, jobs, fmt),
    }
}

fn landscape(params: &ParamArgs, lambdas: &[f64], ds: &[u32], fmt: Format) -> CliResult<String> {
    let p = params.params()?;
    require_regime(lambdas.iter().all(|&l| l > 0.0 && l.is_finite()), || "fields must be positive".into())?;
    require_regime(ds.iter().all(|&d| d >= 2), || "tree degrees must be at least 2".into())?;
    let rows = threshold_landscape(&p, lambdas, ds)?;
    emit(
        &LandscapeOut { beta: params.beta, gamma: params.gamma, rows: rows.iter().map(LandscapeRowOut::from).collect() },
        fmt,
    )
}

fn marginal(m: &MarginalArgs, fmt: Format) -> CliResult<String> {
    if let Some(graph) = &m.graph {
        let sys = load_graph(graph)?;
        let v = m.vertex.ok_or_else(|| CliError::Parse("--vertex is required with --graph".into()))?;
        return match m.eps {
            None => emit(&MarginalOut::exact(v, exact_marginal(&sys, v)?), fmt),
            Some(eps) => {
                require_regime(eps > 0.0 && eps < 1.0, || format!("eps {eps} must lie in (0, 1)"))?;
                let (_, pot) = regime_potential(&sys, m.mode.into())?;
                emit(&MarginalOut::approx(v, &approx_marginal(&sys, v, eps, &pot)?), fmt)
            }
        };
    }
    let (beta, gamma) = match (m.beta, m.gamma) {
        (Some(b), Some(g)) => (b, g),
        _ => return Err(CliError::Parse("--beta and --gamma are required for tree input".into())),
    };
    let params = SpinParams::new(beta, gamma)?;
    let tree = match (&m.tree, &m.tree_spec) {
        (Some(path), _) => load_tree(path)?,
        (None, Some(spec)) => {
            let spec = TreeSpec::parse(spec)?;
            const LIMIT: u128 = 50_000_000;
            require_regime(spec.size() <= LIMIT, || format!("tree would have {} nodes (limit {LIMIT})", spec.size()))?;
            spec.build(m.lambda.unwrap_or(1.0))
        }
        (None, None) => return Err(CliError::Parse("one of --graph, --tree, --tree-spec is required".into())),
    };
    let r = exact_tree_marginal(&tree, &params)?;
    emit(&TreeMarginalOut { nodes: tree.len(), ratio: r.value(), p_zero: r.prob_zero() }, fmt)
}

fn experiment(e: &Experiment, seed: u64, jobs: usize, fmt: Format) -> CliResult<String> {
    match e {
        Experiment::Mixing { params, lambda, generator, ell_min, ell_max, trials } => {
            let p = params.params()?;
            p.require_beta_le_gamma()?;
            let gen = LayeredGenerator::parse(generator)?;
            require_regime(*lambda > 0.0 && *lambda < lambda_c(&p), || {
                format!("lambda {lambda} >= lambda_c {}: mixing run needs a subcritical field", lambda_c(&p))
            })?;
            require_regime(ell_min <= ell_max, || format!("empty range {ell_min}..={ell_max}"))?;
            let ells: Vec<u32> = (*ell_min..=*ell_max).collect();
            let disc = par_map(ells.clone(), jobs, |l| {
                mixing_discrepancy(&p, *lambda, &gen, l, *trials, &mut rng_for(seed, l as u64))
            });
            let run = MixingRun::from_points(p, *lambda, gen, *trials, ells, disc)?;
            emit(&MixingOut::from(&run), fmt)
        }
        Experiment::FiveSeven { lambda } => {
            let r = five_seven_demo(*lambda)?;
            if !r.in_interval {
                eprintln!(
                    "warning: lambda {lambda} lies outside [{}, {}]; three fixed points are not expected",
                    FIVE_SEVEN_INTERVAL.0, FIVE_SEVEN_INTERVAL.1
                );
            }
            emit(&FiveSevenOut::from(&r), fmt)
        }
        Experiment::BeyondLambdaC { instances, n_min, n_max, eps } => {
            require_regime(*n_min >= 1 && n_min <= n_max && *n_max <= 14, || {
                format!("vertex range {n_min}..={n_max} must lie within 1..=14")
            })?;
            require_regime(*eps > 0.0 && *eps < 1.0, || format!("eps {eps} must lie in (0, 1)"))?;
            let (params, cert) = beyond_lambda_c_certificate()?;
            let pot = cert.potential(&params);
            let runs = par_map((0..*instances as u64).collect(), jobs, |i| {
                beyond_lambda_c_instance(&pot, (*n_min, *n_max), *eps, &mut rng_for(seed, i))
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let report = BeyondReport { lambda_c: lambda_c(&params), certificate: cert, epsilon: *eps, runs };
            emit(&BeyondOut::new(params.beta(), params.gamma(), &report), fmt)
        }
        Experiment::Landscape { params, lambda_min, lambda_max, lambda_steps, d_min, d_max } => {
            require_regime(*lambda_steps >= 1 && lambda_min <= lambda_max, || "empty field grid".into())?;
            let lambdas: Vec<f64> = (0..*lambda_steps)
                .map(|k| {
                    if *lambda_steps == 1 {
                        *lambda_min
                    } else {
                        lambda_min + (lambda_max - lambda_min) * k as f64 / (*lambda_steps - 1) as f64
                    }
                })
                .collect();
            let ds: Vec<u32> = (*d_min..=*d_max).collect();
            landscape(params, &lambdas, &ds, fmt)
        }
        Experiment::MarginalBoundSweep { params, lambda, trials, size_bound } => {
            let p = params.params()?;
            let r = marginal_bound_sweep(p, *lambda, *trials, *size_bound, &mut rng_for(seed, 0))?;
            emit(
                &MarginalSweepOut {
                    beta: params.beta,
                    gamma: params.gamma,
                    lambda: *lambda,
                    trials: r.trials,
                    vertices_checked: r.vertices_checked,
                    bound: r.bound,
                    max_marginal: r.max_marginal,
                    violations: r.violations,
                },
                fmt,
            )
        }
        Experiment::RandomClusterCheck { pairs, max_n } => {
            require_regime(*max_n >= 2 && *max_n <= 20, || format!("max-n {max_n} must lie in 2..=20"))?;
            let r = random_cluster_check(*pairs, *max_n, &mut rng_for(seed, 0))?;
            emit(&RandomClusterOut { pairs: r.pairs, max_rel_error: r.max_rel_error }, fmt)
        }
    }
}
