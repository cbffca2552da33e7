//! Command-line front end. Parsing produces a [`RunConfig`], which is plain
//! data and round-trips through JSON; [`run`] executes it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::chain::{
    self, build_trap_graph, structure_report, ChainSpec, Family, SpeedTriple, DEFAULT_REVERSIBILITY_TOL,
    DEFAULT_TRANSITIVITY_BUDGET,
};
use crate::collision::{collision_exact_with_capacity, collision_from, meeting_cdf, TieRule, DEFAULT_CAPACITY};
use crate::error::Error;
use crate::exact::{hitting_cdf, hitting_moments, linear_grid, spectral_summary, DENSE_CAPACITY};
use crate::montecarlo::{
    default_t_max, estimate_collision_from, moving_target_check, occupation_check, RaceStart, TargetPath,
    DEFAULT_CENSOR_CAP, DEFAULT_T_MAX_MULT,
};
use crate::output::{curve_csv, estimates_csv, write_text, Artifact, Envelope};
use crate::verify::{self, Check, EstimateRow, Relation, VerificationReport};

/// Overrides the default product-state capacity of exact collision solves.
pub const CAPACITY_ENV: &str = "MEETWALK_CAPACITY";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "meetwalk", version, about = "Hitting, meeting and three-walker collision computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a chain from a family and write it to a chain file.
    Gen(GenArgs),
    /// Structure, spectrum, hitting times and distribution curves of a chain.
    Analyze(AnalyzeArgs),
    /// Probability that X meets Y before either meets Z.
    Collide(CollideArgs),
    /// Monte Carlo estimates.
    Mc(McArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenArgs {
    /// complete, cycle, directed-cycle, hypercube or trap.
    #[arg(long)]
    pub family: String,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Size and shape parameters of a family.
#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Number of states, the dimension for hypercubes, or the clique size
    /// `n` of a trap graph.
    #[arg(long, visible_alias = "d")]
    pub n: Option<usize>,
    /// Geometric rate parameter of a hypercube.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Constant C of a trap graph.
    #[arg(long)]
    pub c: Option<f64>,
}

/// Where a command reads its chain from: a chain file, or a family name
/// combined with [`FamilyParams`].
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceArgs {
    /// Chain file path or family name.
    pub source: String,
    #[command(flatten)]
    pub params: FamilyParams,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lx: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub ly: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputArgs {
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the JSON envelope here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write the CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Runs are cut off at this multiple of t*_hit.
    #[arg(long, default_value_t = DEFAULT_T_MAX_MULT, allow_negative_numbers = true)]
    pub t_max_mult: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub structure: bool,
    #[arg(long)]
    pub spectral: bool,
    #[arg(long)]
    pub hitting: bool,
    /// `x,z`: CDF of the hitting time of z from x.
    #[arg(long)]
    pub hitting_cdf: Option<String>,
    /// `a,b`: CDF of the meeting time of walkers started at a and b.
    #[arg(long)]
    pub meeting_cdf: Option<String>,
    /// Speeds of the two meeting walkers.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub la: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lb: f64,
    /// Right end of the CDF grid; defaults to 4 t*_hit.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Exact when the product chain fits the capacity, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    Mc,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollideArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub speeds: SpeedArgs,
    #[arg(long, default_value_t = TieRule::Strict)]
    pub tie_rule: TieRule,
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
    /// `x,y,z`; the product stationary start when absent.
    #[arg(long)]
    pub start: Option<String>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimate {
    #[default]
    Collision,
    Occupation,
    MovingTarget,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub speeds: SpeedArgs,
    #[arg(long, default_value_t = TieRule::Strict)]
    pub tie_rule: TieRule,
    #[arg(long, value_enum, default_value_t = Estimate::Collision)]
    pub estimate: Estimate,
    /// Walker start for the moving-target estimate.
    #[arg(long, default_value_t = 0)]
    pub from: usize,
    /// Target state; the target stays there unless `--path-seed` is set.
    #[arg(long)]
    pub target: Option<usize>,
    /// Follow a random target path fixed by this seed.
    #[arg(long)]
    pub path_seed: Option<u64>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// transitive, speeds, identity, structural, counterexample,
    /// sharpness, nonreversible, oracle, occupation or moving-target.
    pub suite: String,
    /// Family list such as `cycle:3..10,complete:2..8` (ranges inclusive).
    #[arg(long)]
    pub families: Option<String>,
    /// Sizes for the counterexample and nonreversible suites, e.g. `20,60,160`.
    #[arg(long)]
    pub n_list: Option<String>,
    /// Trap-graph constant for the counterexample suite.
    #[arg(long, default_value_t = 12.0)]
    pub c: f64,
    /// Hypercube dimension for the sharpness suite.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Comma-separated theta values for the small-time checks.
    #[arg(long)]
    pub thetas: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A validated command plus the environment it runs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub capacity: usize,
    /// `default` or the environment variable that set `capacity`.
    pub capacity_source: String,
}

#[derive(Debug)]
pub enum CliError {
    /// Rejected by the argument parser, including `--help` and `--version`.
    Clap(clap::Error),
    Usage(String),
    Runtime(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// What a run printed and how it should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout: String,
}

/// Parses arguments (including the program name) and validates them.
/// `capacity_env` is the value of [`CAPACITY_ENV`], if set.
pub fn parse_config<I, T>(args: I, capacity_env: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
    let (capacity, capacity_source) = match capacity_env {
        Some(v) => {
            let c: usize =
                v.trim().parse().map_err(|_| usage(format!("{CAPACITY_ENV} must be a positive integer, got `{v}`")))?;
            if c == 0 {
                return Err(usage(format!("{CAPACITY_ENV} must be a positive integer, got `{v}`")));
            }
            (c, CAPACITY_ENV.to_string())
        }
        None => (DEFAULT_CAPACITY, "default".to_string()),
    };
    let config = RunConfig { command: cli.command, capacity, capacity_source };
    validate(&config)?;
    Ok(config)
}

fn check_speeds(s: &SpeedArgs) -> Result<SpeedTriple, CliError> {
    for (flag, v) in [("--lx", s.lx), ("--ly", s.ly), ("--lz", s.lz)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(usage(format!("{flag} must be a finite speed >= 0, got {v}")));
        }
    }
    SpeedTriple::new(s.lx, s.ly, s.lz).map_err(|_| usage("at least one of --lx, --ly, --lz must be positive"))
}

fn check_samples(samples: usize) -> Result<(), CliError> {
    if samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    Ok(())
}

fn parse_states<const K: usize>(flag: &str, text: &str) -> Result<[usize; K], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || usage(format!("{flag} expects {K} comma-separated states, got `{text}`"));
    if parts.len() != K {
        return Err(bad());
    }
    let mut out = [0; K];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("{flag}: cannot parse `{s}`"))))
        .collect()
}

/// Canonical suite name, resolving the short aliases.
pub fn suite_name(s: &str) -> Option<&'static str> {
    Some(match s {
        "transitive" | "thm1" => "transitive",
        "speeds" | "thm2" => "speeds",
        "identity" => "identity",
        "structural" => "structural",
        "counterexample" => "counterexample",
        "sharpness" => "sharpness",
        "nonreversible" => "nonreversible",
        "oracle" => "oracle",
        "occupation" => "occupation",
        "moving-target" => "moving-target",
        _ => return None,
    })
}

pub fn default_families(suite: &str) -> &'static str {
    match suite {
        "transitive" => "cycle:3..10,complete:2..8,hypercube:2..4",
        "speeds" => "complete:8,complete:16,complete:32,cycle:3..8,hypercube:2..3",
        "identity" => "hypercube:3,cycle:7",
        "structural" => "cycle:3..16,complete:2..16,hypercube:2..5,trap:2@12",
        "oracle" => "cycle:3..6,complete:3..6,hypercube:2..3",
        "occupation" => "complete:5,hypercube:3",
        "moving-target" => "cycle:8,cycle:16,hypercube:3,hypercube:4",
        _ => "",
    }
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    match &config.command {
        Command::Gen(a) => {
            family_from(&a.family, &a.params)?;
        }
        Command::Analyze(a) => {
            if let Some(s) = &a.hitting_cdf {
                parse_states::<2>("--hitting-cdf", s)?;
            }
            if let Some(s) = &a.meeting_cdf {
                parse_states::<2>("--meeting-cdf", s)?;
            }
            for (flag, v) in [("--la", a.la), ("--lb", a.lb)] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(usage(format!("{flag} must be a finite speed >= 0, got {v}")));
                }
            }
            if let Some(t) = a.t_end {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(usage(format!("--t-end must be positive, got {t}")));
                }
            }
            if a.points < 2 {
                return Err(usage("--points must be at least 2"));
            }
        }
        Command::Collide(a) => {
            check_speeds(&a.speeds)?;
            check_sampling(&a.sampling)?;
            if let Some(s) = &a.start {
                parse_states::<3>("--start", s)?;
            }
        }
        Command::Mc(a) => {
            check_speeds(&a.speeds)?;
            check_sampling(&a.sampling)?;
            if a.estimate == Estimate::Occupation && a.sampling.samples < 2 {
                return Err(usage("--samples must be at least 2 for the occupation estimate"));
            }
        }
        Command::Verify(a) => {
            let suite = suite_name(&a.suite).ok_or_else(|| usage(format!("unknown suite `{}`", a.suite)))?;
            check_samples(a.samples)?;
            if let Some(f) = &a.families {
                Family::parse_list(f).map_err(|e| usage(format!("--families: {e}")))?;
            }
            if let Some(l) = &a.n_list {
                if parse_list::<usize>("--n-list", l)?.len() < 2 {
                    return Err(usage("--n-list needs at least two sizes"));
                }
            }
            if let Some(t) = &a.thetas {
                let v = parse_list::<f64>("--thetas", t)?;
                if v.iter().any(|x| !(*x > 0.0)) {
                    return Err(usage("--thetas must all be positive"));
                }
            }
            if suite == "sharpness" && !(a.eps > 0.0 && a.eps < 1.0) {
                return Err(usage(format!("--eps must be in (0, 1), got {}", a.eps)));
            }
            if !(a.c > 0.0) {
                return Err(usage(format!("--c must be positive, got {}", a.c)));
            }
        }
    }
    Ok(())
}

fn check_sampling(s: &SamplingArgs) -> Result<(), CliError> {
    check_samples(s.samples)?;
    if !(s.t_max_mult > 0.0) || !s.t_max_mult.is_finite() {
        return Err(usage(format!("--t-max-mult must be positive, got {}", s.t_max_mult)));
    }
    Ok(())
}

fn family_from(name: &str, p: &FamilyParams) -> Result<Family, CliError> {
    let n = || p.n.ok_or_else(|| usage(format!("family `{name}` needs --n")));
    Ok(match name {
        "complete" => Family::Complete { n: n()? },
        "cycle" => Family::Cycle { n: n()? },
        "directed-cycle" => Family::DirectedCycle { n: n()? },
        "hypercube" => Family::Hypercube { d: n()?, eps: p.eps },
        "trap" => Family::Trap { n: n()?, c: p.c.unwrap_or(12.0) },
        other => return Err(usage(format!("unknown family `{other}`"))),
    })
}

fn load_chain(src: &SourceArgs) -> Result<ChainSpec, CliError> {
    let path = Path::new(&src.source);
    if path.is_file() {
        return Ok(chain::io::read(path)?);
    }
    match family_from(&src.source, &src.params) {
        Ok(f) => Ok(f.build()?),
        Err(CliError::Usage(m)) if m.starts_with("unknown family") => {
            Err(usage(format!("`{}` is neither a chain file nor a family name", src.source)))
        }
        Err(e) => Err(e),
    }
}

/// Collects stdout text and the files to write for one command.
struct Emitter<'a> {
    out: &'a OutputArgs,
    envelope: Envelope,
    table: String,
    csv: Option<String>,
}

impl<'a> Emitter<'a> {
    fn new(out: &'a OutputArgs, config: &RunConfig) -> Result<Self, CliError> {
        Ok(Emitter { out, envelope: Envelope::new(config)?, table: String::new(), csv: None })
    }

    fn finish(mut self) -> Result<RunOutcome, CliError> {
        if let (Some(path), Some(text)) = (&self.out.csv, &self.csv) {
            write_text(path, text)?;
            self.envelope.artifacts.push(Artifact::file("table", "csv", path));
        }
        if let Some(path) = &self.out.json {
            self.envelope.write(path)?;
        }
        let failed = self.envelope.checks.iter().any(Check::is_failure);
        let stdout = match self.out.format {
            Format::Table => self.table,
            Format::Json => self.envelope.to_json()?,
            Format::Csv => self.csv.unwrap_or_default(),
        };
        Ok(RunOutcome { exit_code: if failed { EXIT_CHECK_FAILED } else { EXIT_OK }, stdout })
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    validate(config)?;
    match &config.command {
        Command::Gen(a) => run_gen(a),
        Command::Analyze(a) => run_analyze(config, a),
        Command::Collide(a) => run_collide(config, a),
        Command::Mc(a) => run_mc(config, a),
        Command::Verify(a) => run_verify(config, a),
    }
}

fn run_gen(a: &GenArgs) -> Result<RunOutcome, CliError> {
    let family = family_from(&a.family, &a.params)?;
    let chain = match family {
        Family::Trap { n, c } => build_trap_graph(n, c)?.0,
        ref f => f.build()?,
    };
    chain::io::write(&chain, &a.output)?;
    Ok(RunOutcome {
        exit_code: EXIT_OK,
        stdout: format!(
            "wrote {} ({} states, {} transitions) to {}\n",
            chain.family(),
            chain.n(),
            chain.nnz(),
            a.output.display()
        ),
    })
}

fn run_analyze(config: &RunConfig, a: &AnalyzeArgs) -> Result<RunOutcome, CliError> {
    let chain = load_chain(&a.source)?;
    let mut em = Emitter::new(&a.out, config)?;
    let any = a.structure || a.spectral || a.hitting || a.hitting_cdf.is_some() || a.meeting_cdf.is_some();
    let dense_ok = chain.n() <= DENSE_CAPACITY;
    let t = &mut em.table;
    let _ = writeln!(t, "chain: {} ({} states)", chain.family(), chain.n());

    let structure = structure_report(&chain, DEFAULT_REVERSIBILITY_TOL, DEFAULT_TRANSITIVITY_BUDGET)?;
    if a.structure || !any {
        let _ = writeln!(
            t,
            "reversible: {} (residual {:.3e}), transitivity: {}",
            structure.reversibility.reversible,
            structure.reversibility.max_residual,
            structure.transitivity.label()
        );
        em.envelope.artifacts.push(Artifact::inline("structure", "structure", &structure)?);
    }
    let reversible = structure.reversibility.reversible;
    if (a.spectral || (!any && dense_ok && reversible)) && reversible {
        let s = spectral_summary(&chain)?;
        let _ = writeln!(
            t,
            "lambda_2 {:.10}, lambda_* {:.10}, t_rel {:.6}, t_rel (continuous) {:.6}",
            s.lambda_2, s.lambda_star, s.t_rel_discrete, s.t_rel_cont
        );
        em.envelope.artifacts.push(Artifact::inline("spectral", "spectral-summary", &s)?);
    } else if a.spectral {
        return Err(Error::hypothesis("spectral summary needs a reversible chain").into());
    }
    let need_hit =
        a.hitting || (!any && dense_ok) || ((a.hitting_cdf.is_some() || a.meeting_cdf.is_some()) && a.t_end.is_none());
    let hit = if need_hit { Some(hitting_moments(&chain)?) } else { None };
    if let Some(h) = &hit {
        if a.hitting || !any {
            let _ = writeln!(t, "t_hit {:.8}, t*_hit {:.8}", h.t_hit, h.t_star_hit);
            em.envelope.artifacts.push(Artifact::inline("hitting", "hitting-summary", h)?);
        }
    }
    let t_end = a.t_end.unwrap_or_else(|| 4.0 * hit.as_ref().map_or(1.0, |h| h.t_star_hit));
    let grid = linear_grid(t_end, a.points);
    let mut curve = None;
    if let Some(s) = &a.hitting_cdf {
        let [x, z] = parse_states::<2>("--hitting-cdf", s)?;
        let c = hitting_cdf(&chain, x, z, 1.0, &grid)?;
        let _ = writeln!(t, "hitting CDF {x}->{z} on [0, {t_end}] ({} points, err <= {:.1e})", grid.len(), c.err_bound);
        em.envelope.artifacts.push(Artifact::inline("hitting-cdf", "curve", &c)?);
        curve = Some(c);
    }
    if let Some(s) = &a.meeting_cdf {
        let [x, y] = parse_states::<2>("--meeting-cdf", s)?;
        let c = meeting_cdf(&chain, a.la, a.lb, x, y, &grid)?;
        let _ = writeln!(
            t,
            "meeting CDF from ({x},{y}) on [0, {t_end}] ({} points, err <= {:.1e})",
            grid.len(),
            c.err_bound
        );
        em.envelope.artifacts.push(Artifact::inline("meeting-cdf", "curve", &c)?);
        curve = Some(c);
    }
    if let Some(c) = curve {
        em.csv = Some(curve_csv(&c)?);
    }
    em.finish()
}

fn est_row(label: String, value: f64, se: f64, n: usize, method: &str) -> EstimateRow {
    EstimateRow { label, value, std_err: se, n_samples: n, method: method.into() }
}

fn run_collide(config: &RunConfig, a: &CollideArgs) -> Result<RunOutcome, CliError> {
    let chain = load_chain(&a.source)?;
    let speeds = check_speeds(&a.speeds)?;
    let start = a.start.as_deref().map(|s| parse_states::<3>("--start", s)).transpose()?;
    let fits = chain.n().checked_pow(3).is_some_and(|s| s <= config.capacity);
    let exact = match a.method {
        MethodChoice::Exact => true,
        MethodChoice::Mc => false,
        MethodChoice::Auto => fits,
    };
    let mut em = Emitter::new(&a.out, config)?;
    let label = format!("{}/{}/{speeds}", a.tie_rule, chain.family());
    let _ = writeln!(
        em.table,
        "chain: {} ({} states), speeds {speeds}, tie rule {}",
        chain.family(),
        chain.n(),
        a.tie_rule
    );
    let _ = writeln!(em.table, "capacity: {} ({})", config.capacity, config.capacity_source);
    let row = if exact {
        match start {
            None => {
                let r = collision_exact_with_capacity(&chain, &speeds, a.tie_rule, config.capacity)?;
                let _ = writeln!(em.table, "probability {:.12} (exact, residual {:.1e})", r.probability, r.residual);
                em.envelope.artifacts.push(Artifact::inline("collision", "collision-report", &r)?);
                est_row(label, r.probability, 0.0, 0, "exact")
            }
            Some([x, y, z]) => {
                if !fits {
                    return Err(Error::CapacityExceeded {
                        needed: chain.n().saturating_pow(3),
                        capacity: config.capacity,
                    }
                    .into());
                }
                let p = collision_from(&chain, &speeds, (x, y, z), a.tie_rule)?;
                let _ = writeln!(em.table, "probability from ({x},{y},{z}) {p:.12} (exact)");
                em.envelope.artifacts.push(Artifact::inline("collision", "probability", p)?);
                est_row(format!("{label}/start=({x},{y},{z})"), p, 0.0, 0, "exact")
            }
        }
    } else {
        let s = &a.sampling;
        let t_max = default_t_max(&chain, s.t_max_mult)?;
        let start = start.map_or(RaceStart::Stationary, |[x, y, z]| RaceStart::At(x, y, z));
        let e = estimate_collision_from(
            &chain,
            &speeds,
            a.tie_rule,
            start,
            s.samples,
            s.seed,
            Some(t_max),
            DEFAULT_CENSOR_CAP,
        )?;
        let _ = writeln!(
            em.table,
            "probability {:.6} ± {:.6} (Monte Carlo, N = {}, censored {})",
            e.mean, e.std_err, e.n_used, e.censored
        );
        let _ = writeln!(em.table, "seed: {}", s.seed);
        em.envelope.artifacts.push(Artifact::inline("collision", "mc-estimate", &e)?);
        est_row(label, e.mean, e.std_err, e.n_used, "monte-carlo")
    };
    em.csv = Some(estimates_csv(&[row])?);
    em.finish()
}

fn run_mc(config: &RunConfig, a: &McArgs) -> Result<RunOutcome, CliError> {
    let chain = load_chain(&a.source)?;
    let speeds = check_speeds(&a.speeds)?;
    let s = &a.sampling;
    let mut em = Emitter::new(&a.out, config)?;
    let _ = writeln!(em.table, "chain: {} ({} states)", chain.family(), chain.n());
    let fam = chain.family().to_string();
    let rows = match a.estimate {
        Estimate::Collision => {
            let t_max = default_t_max(&chain, s.t_max_mult)?;
            let e = estimate_collision_from(
                &chain,
                &speeds,
                a.tie_rule,
                RaceStart::Stationary,
                s.samples,
                s.seed,
                Some(t_max),
                DEFAULT_CENSOR_CAP,
            )?;
            let _ = writeln!(
                em.table,
                "{} probability at {speeds}: {:.6} ± {:.6} (N = {}, censored {})",
                a.tie_rule, e.mean, e.std_err, e.n_used, e.censored
            );
            em.envelope.artifacts.push(Artifact::inline("collision", "mc-estimate", &e)?);
            vec![est_row(format!("{}/{fam}/{speeds}", a.tie_rule), e.mean, e.std_err, e.n_used, "monte-carlo")]
        }
        Estimate::Occupation => {
            let r = occupation_check(&chain, &speeds, s.samples, s.seed)?;
            let _ = writeln!(
                em.table,
                "E[tau] {:.6} ± {:.6}, worst diagonal discrepancy {:.2} SE",
                r.tau.mean, r.tau.std_err, r.max_z
            );
            let _ = writeln!(
                em.table,
                "T-integral {:.6} ± {:.6} vs 22 t*_hit / n = {:.6}",
                r.t_integral.mean, r.t_integral.std_err, r.t_bound
            );
            em.envelope.checks.push(Check::new(
                "occupation",
                verify::claims::OCCUPATION,
                r.max_z,
                Relation::Le,
                3.5,
                0.0,
                "monte-carlo, paired SE",
            ));
            em.envelope.checks.push(Check::new(
                "t-integral",
                verify::claims::T_INTEGRAL,
                r.t_integral.mean,
                Relation::Le,
                r.t_bound,
                0.0,
                "monte-carlo",
            ));
            let mut rows = vec![
                est_row(format!("tau/{fam}"), r.tau.mean, r.tau.std_err, r.tau.n_used, "monte-carlo"),
                est_row(
                    format!("t-integral/{fam}"),
                    r.t_integral.mean,
                    r.t_integral.std_err,
                    r.t_integral.n_used,
                    "monte-carlo",
                ),
            ];
            for d in &r.diagonal {
                rows.push(est_row(
                    format!("occupation/{fam}/x={}", d.state),
                    d.occupation,
                    d.std_err,
                    r.tau.n_used,
                    "monte-carlo",
                ));
            }
            em.envelope.artifacts.push(Artifact::inline("occupation", "occupation-report", &r)?);
            rows
        }
        Estimate::MovingTarget => {
            let z = a.target.unwrap_or(chain.n() / 2);
            let path = match a.path_seed {
                Some(seed) => TargetPath::Random { start: z, seed },
                None => TargetPath::Frozen { state: z },
            };
            let r = moving_target_check(&chain, a.from, path, s.samples, s.seed)?;
            let _ = writeln!(
                em.table,
                "E tau_h {:.6} ± {:.6} vs 11 t*_hit = {:.6}",
                r.estimate.mean, r.estimate.std_err, r.bound
            );
            em.envelope.checks.push(Check::new(
                "moving-target",
                verify::claims::MOVING_TARGET,
                r.estimate.mean,
                Relation::Le,
                r.bound,
                3.5 * r.estimate.std_err,
                "monte-carlo",
            ));
            em.envelope.artifacts.push(Artifact::inline("moving-target", "moving-target-report", &r)?);
            vec![est_row(
                format!("moving-target/{fam}"),
                r.estimate.mean,
                r.estimate.std_err,
                r.estimate.n_used,
                "monte-carlo",
            )]
        }
    };
    let _ = writeln!(em.table, "seed: {}", s.seed);
    em.csv = Some(estimates_csv(&rows)?);
    em.finish()
}

fn run_verify(config: &RunConfig, a: &VerifyArgs) -> Result<RunOutcome, CliError> {
    let suite = suite_name(&a.suite).expect("validated");
    let families = || Family::parse_list(a.families.as_deref().unwrap_or(default_families(suite)));
    let n_list = |default: &str| parse_list::<usize>("--n-list", a.n_list.as_deref().unwrap_or(default));
    let mut extra = None;
    let report: VerificationReport = match suite {
        "transitive" => verify::transitive_suite(&families()?, config.capacity)?,
        "speeds" => verify::speeds_suite(&families()?, &verify::default_speed_grid(), config.capacity)?,
        "identity" => verify::identity_suite(&families()?, &verify::default_identity_speeds())?,
        "structural" => {
            let mut opts = verify::StructuralOptions::default();
            if let Some(t) = &a.thetas {
                opts.thetas = parse_list("--thetas", t)?;
            }
            verify::structural_suite(&families()?, &opts)?
        }
        "counterexample" => verify::counterexample_suite(a.c, &n_list("20,60,160")?, a.samples, a.seed)?,
        "sharpness" => {
            let (check, report) = verify::sharpness_suite(a.d, a.eps, config.capacity, a.samples, a.seed)?;
            extra = Some(Artifact::inline("sharpness", "sharpness-check", &check)?);
            report
        }
        "nonreversible" => verify::nonreversible_suite(&n_list("10,30,90")?, a.samples, a.seed)?,
        "oracle" => verify::oracle_suite(&families()?, &verify::default_oracle_speeds(), a.samples, a.seed)?,
        "occupation" => {
            let s = SpeedTriple::new(1.0, 1.0, 1.0)?;
            verify::occupation_suite(&families()?, &s, a.samples, a.seed)?
        }
        "moving-target" => {
            let opts = verify::MovingTargetOptions { samples: a.samples, seed: a.seed, ..Default::default() };
            verify::moving_target_suite(&families()?, &opts)?
        }
        _ => unreachable!("suite names are validated"),
    };
    let mut em = Emitter::new(&a.out, config)?;
    em.table = report.table();
    if report.seed.is_some() {
        let _ = writeln!(em.table, "seed: {}", a.seed);
    }
    em.csv = Some(estimates_csv(&report.estimates)?);
    em.envelope.checks = report.checks.clone();
    em.envelope.artifacts.push(Artifact::inline("report", "verification-report", &report)?);
    if let Some(x) = extra {
        em.envelope.artifacts.push(x);
    }
    em.finish()
}

/// Entry point used by the binary: parse, run, print, and map the result to
/// an exit code.
pub fn main_with<I, T>(args: I, capacity_env: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(args, capacity_env).and_then(|c| run(&c));
    match result {
        Ok(o) => {
            print!("{}", o.stdout);
            o.exit_code
        }
        Err(CliError::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_ERROR
        }
    }
}
