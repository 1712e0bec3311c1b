//! Command-line interface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contest_core::planner::Panel;
use contest_core::{
    default_paylines, solve_bid_schedule, ClaytonCopula, ContestEnvironment, ExternalitySpec, Mechanism,
    SimpleContestParams, DEFAULT_GRID_SIZE,
};

use crate::config::Config;
use crate::error::AppError;
use crate::output::{emit, num, CsvTable};
use crate::parallel::par_payline_sweep;
use crate::poisson::{fit_spec, PoissonSpec, Transform};
use crate::report::{mc_check, mc_csv, sweep_csv, Figure4, McSettings};
use crate::survey::{jackknife_instrument, load_and_filter, summarize, RejectionReport};
use crate::synth::{generate, to_csv, SynthConfig};

pub const THREADS_ENV: &str = "GRANT_CONTEST_THREADS";

pub const MC_PAYLINES: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.5, 1.0];

#[derive(Parser, Debug)]
#[command(name = "grant-contest", version, about = "Equilibria and planner productivity of grant funding contests")]
pub struct Cli {
    /// TOML config file; command-line flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps and replications, count; 0 uses every core [default: 0]
    #[arg(long, global = true, env = THREADS_ENV, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form n-player contest
    #[command(subcommand)]
    Simple(SimpleCommand),
    /// Equilibrium bid schedule as CSV: v,u,b,eta,payoff
    Bids(BidsArgs),
    /// Planner productivity over paylines as CSV
    Sweep(SweepArgs),
    /// Productivity curves for the externality-size (a) or -nature (b) panel
    Figure4(Figure4Args),
    /// Analytic planner integrals against the discrete-applicant simulation
    McCheck(McCheckArgs),
    /// Survey data tools
    #[command(subcommand)]
    Survey(SurveyCommand),
}

#[derive(Subcommand, Debug)]
pub enum SimpleCommand {
    /// Effort and contest values at one parameter point
    Eval(SimpleArgs),
    /// Closed-form values for n = 2..=n-max as CSV
    Sweep(SimpleSweepArgs),
}

#[derive(Subcommand, Debug)]
pub enum SurveyCommand {
    /// Leave-one-out field average of grant $ per fundraising hour
    Instrument(SurveyInput),
    /// Count, mean and sd of each variable
    Summarize(SurveyInput),
    /// Log-link Poisson regression with robust standard errors
    Poisson(PoissonArgs),
    /// Seeded synthetic survey panel
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutArg {
    /// Output path, written atomically; stdout when omitted
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimpleParams {
    /// Number of players, count >= 2 [default: 2]
    #[arg(long)]
    pub n: Option<u32>,
    /// Private value of the prize, $ [default: 1]
    #[arg(long)]
    pub v: Option<f64>,
    /// Marginal cost of effort, $ per unit effort [default: 1]
    #[arg(long)]
    pub c: Option<f64>,
    /// Social multiplier on the prize, unitless >= 1 [default: 1]
    #[arg(long)]
    pub m: Option<f64>,
    /// Social value of effort, $ per unit effort [default: 0]
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimpleArgs {
    #[command(flatten)]
    pub params: SimpleParams,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct SimpleSweepArgs {
    #[command(flatten)]
    pub params: SimpleParams,
    /// Largest number of players, count >= 2 [default: 20]
    #[arg(long)]
    pub n_max: Option<u32>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EnvArgs {
    /// Cost-recoupment share k, unitless in [0, 1) [default: 0.3333333333333333]
    #[arg(long)]
    pub k: Option<f64>,
    /// Social multiplier m, unitless >= 1 [default: 1]
    #[arg(long)]
    pub m: Option<f64>,
    /// Clayton review-noise dependence theta, unitless > 0 [default: 10]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Bid-solver grid points, count >= 101 [default: 2001]
    #[arg(long)]
    pub grid_size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BidsArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Funded share of applicants, fraction in (0, 1] [default: 0.2]
    #[arg(long, conflicts_with_all = ["lottery_line", "funded"])]
    pub payline: Option<f64>,
    /// Share of applicants entering the lottery, fraction in (0, 1]; needs --funded [default: none]
    #[arg(long, requires = "funded")]
    pub lottery_line: Option<f64>,
    /// Share of applicants funded by lottery, fraction in (0, lottery-line]; needs --lottery-line [default: none]
    #[arg(long, requires = "lottery_line")]
    pub funded: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalityKind {
    None,
    InverseCost,
    PartialCompletion,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Comma-separated paylines, fractions in (0, 1] [default: 0.02,0.04,...,1]
    #[arg(long, value_delimiter = ',')]
    pub paylines: Option<Vec<f64>>,
    /// Effort externality [default: none]
    #[arg(long, value_enum)]
    pub externality: Option<ExternalityKind>,
    /// Inverse-cost exponent r, unitless > 0 [default: 2]
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelArg {
    /// Size of externality
    A,
    /// Nature of externality
    B,
}

#[derive(Args, Debug)]
pub struct Figure4Args {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Panel [default: a]
    #[arg(long, value_enum)]
    pub panel: Option<PanelArg>,
    /// Comma-separated paylines, fractions in (0, 1] [default: 0.02,0.04,...,1]
    #[arg(long, value_delimiter = ',')]
    pub paylines: Option<Vec<f64>>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct McCheckArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Comma-separated paylines, fractions in (0, 1] [default: 0.05,0.1,0.2,0.3,0.5,1]
    #[arg(long, value_delimiter = ',')]
    pub paylines: Option<Vec<f64>>,
    /// Comma-separated effort externalities [default: none,inverse-cost]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub externalities: Option<Vec<ExternalityKind>>,
    /// Inverse-cost exponent r, unitless > 0 [default: 2]
    #[arg(long)]
    pub r: Option<f64>,
    /// Applicants per replication, count >= 100 [default: 100000]
    #[arg(long)]
    pub applicants: Option<usize>,
    /// Replications, count >= 2 for standard errors [default: 20]
    #[arg(long)]
    pub replications: Option<usize>,
    /// RNG seed, 64-bit integer [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct SurveyInput {
    /// Survey CSV: id,field,hrs_research,hrs_fundraising,hrs_other,grant_expected,grant_guaranteed[,covariates]
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub input: SurveyInput,
    /// Outcome variable, hours per week [default: hrs_research]
    #[arg(long)]
    pub outcome: Option<String>,
    /// Comma-separated focal regressors [default: hrs_fundraising,hrs_other]
    #[arg(long, value_delimiter = ',')]
    pub regressors: Option<Vec<String>>,
    /// Transform of the focal regressors, log or level [default: log]
    #[arg(long)]
    pub transform: Option<Transform>,
    /// Variable expanded into a four-knot restricted cubic spline [default: none]
    #[arg(long)]
    pub spline: Option<String>,
    /// Comma-separated controls entered in levels [default: none]
    #[arg(long, value_delimiter = ',')]
    pub controls: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Records to generate, count [default: 4388]
    #[arg(long)]
    pub records: Option<usize>,
    /// RNG seed, 64-bit integer [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Intercept of log research hours [default: 3.2]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Elasticity of research hours in fundraising hours [default: 0.05]
    #[arg(long)]
    pub beta_f: Option<f64>,
    /// Elasticity of research hours in other work hours [default: -0.1]
    #[arg(long, allow_hyphen_values = true)]
    pub beta_o: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), AppError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let threads = match cli.threads {
        Some(t) => t,
        None => config.usize("", "threads")?.unwrap_or(0),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| dispatch(&cli.command, &config))
}

fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn out_path(section: &str, out: &OutArg, config: &Config) -> Result<Option<PathBuf>, AppError> {
    Ok(match &out.out {
        Some(p) => Some(p.clone()),
        None => config.string(section, "out")?.map(PathBuf::from),
    })
}

fn environment(section: &str, args: &EnvArgs, config: &Config) -> Result<(ContestEnvironment, usize), AppError> {
    let d = ContestEnvironment::default();
    let k = pick(args.k, config.f64(section, "k")?, d.k());
    let m = pick(args.m, config.f64(section, "m")?, d.m());
    let theta = pick(args.theta, config.f64(section, "theta")?, d.noise().theta());
    let grid = pick(args.grid_size, config.usize(section, "grid-size")?, DEFAULT_GRID_SIZE);
    let env = ContestEnvironment::new(ClaytonCopula::new(theta)?, k, m)?;
    Ok((env, grid))
}

fn paylines(section: &str, flag: &Option<Vec<f64>>, config: &Config, default: Vec<f64>) -> Result<Vec<f64>, AppError> {
    let ps = pick(flag.clone(), config.f64_list(section, "paylines")?, default);
    if ps.is_empty() {
        return Err(AppError::Usage("--paylines needs at least one value".into()));
    }
    Ok(ps)
}

fn kind_from_str(section: &str, key: &str, s: &str) -> Result<ExternalityKind, AppError> {
    ExternalityKind::from_str(s, false).map_err(|_| {
        AppError::Config(format!(
            "[{section}] `{key}`: unknown externality `{s}` (expected none, inverse-cost or partial-completion)"
        ))
    })
}

fn externality(kind: ExternalityKind, r: f64) -> Result<ExternalitySpec, AppError> {
    Ok(match kind {
        ExternalityKind::None => ExternalitySpec::None,
        ExternalityKind::InverseCost => ExternalitySpec::inverse_cost(r)?,
        ExternalityKind::PartialCompletion => ExternalitySpec::PartialCompletion,
    })
}

fn dispatch(command: &Command, config: &Config) -> Result<(), AppError> {
    match command {
        Command::Simple(SimpleCommand::Eval(a)) => simple_eval(a, config),
        Command::Simple(SimpleCommand::Sweep(a)) => simple_sweep(a, config),
        Command::Bids(a) => bids(a, config),
        Command::Sweep(a) => sweep(a, config),
        Command::Figure4(a) => figure4(a, config),
        Command::McCheck(a) => mc(a, config),
        Command::Survey(SurveyCommand::Instrument(a)) => survey_instrument(a, config),
        Command::Survey(SurveyCommand::Summarize(a)) => survey_summarize(a, config),
        Command::Survey(SurveyCommand::Poisson(a)) => survey_poisson(a, config),
        Command::Survey(SurveyCommand::Synth(a)) => survey_synth(a, config),
    }
}

fn simple_params(section: &str, p: &SimpleParams, config: &Config) -> Result<SimpleContestParams, AppError> {
    let n = match p.n {
        Some(n) => n,
        None => config.u64(section, "n")?.map_or(2, |n| n.min(u32::MAX as u64) as u32),
    };
    Ok(SimpleContestParams::new(
        n,
        pick(p.v, config.f64(section, "v")?, 1.0),
        pick(p.c, config.f64(section, "c")?, 1.0),
        pick(p.m, config.f64(section, "m")?, 1.0),
        pick(p.w, config.f64(section, "w")?, 0.0),
    )?)
}

fn simple_eval(a: &SimpleArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "simple-eval";
    let p = simple_params(S, &a.params, config)?;
    let text = format!(
        "x*={:?}\nV_contest={:?}\nV_lottery={:?}\nV_contest_ext={:?}\ncross_partial={:?}\n",
        p.equilibrium_effort(),
        p.contest_value(),
        p.lottery_value(),
        p.contest_value_with_externality(),
        p.competition_externality_cross_partial(),
    );
    emit(out_path(S, &a.out, config)?.as_deref(), &text)
}

fn simple_sweep(a: &SimpleSweepArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "simple-sweep";
    let base = simple_params(S, &a.params, config)?;
    let n_max = match a.n_max {
        Some(n) => n,
        None => config.u64(S, "n-max")?.map_or(20, |n| n.min(u32::MAX as u64) as u32),
    };
    if n_max < 2 {
        return Err(AppError::Usage(format!("--n-max must be at least 2, got {n_max}")));
    }
    let mut t = CsvTable::new(&["n", "x_star", "v_contest", "v_lottery", "v_contest_ext", "cross_partial"]);
    for n in 2..=n_max {
        let p = SimpleContestParams::new(n, base.v(), base.c(), base.m(), base.w())?;
        t.row([
            n.to_string(),
            num(p.equilibrium_effort()),
            num(p.contest_value()),
            num(p.lottery_value()),
            num(p.contest_value_with_externality()),
            num(p.competition_externality_cross_partial()),
        ]);
    }
    emit(out_path(S, &a.out, config)?.as_deref(), &t.into_string())
}

fn bids(a: &BidsArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "bids";
    let (env, grid) = environment(S, &a.env, config)?;
    let mech = match (a.payline, a.lottery_line, a.funded) {
        (Some(p), _, _) => Mechanism::payline(p)?,
        (None, Some(l), Some(f)) => Mechanism::lottery(l, f)?,
        _ => match (config.f64(S, "lottery-line")?, config.f64(S, "funded")?, config.f64(S, "payline")?) {
            (Some(_), Some(_), Some(_)) => {
                return Err(AppError::Config("[bids] sets both payline and lottery-line".into()))
            }
            (Some(l), Some(f), None) => Mechanism::lottery(l, f)?,
            (None, None, p) => Mechanism::payline(p.unwrap_or(0.2))?,
            _ => return Err(AppError::Config("[bids] lottery-line and funded go together".into())),
        },
    };
    let schedule = solve_bid_schedule(&env, &mech, grid)?;
    let mut t = CsvTable::new(&["v", "u", "b", "eta", "payoff"]);
    for r in schedule.rows() {
        t.row([num(r.v), num(r.u), num(r.b), num(r.eta), num(r.payoff)]);
    }
    emit(out_path(S, &a.out, config)?.as_deref(), &t.into_string())
}

fn sweep(a: &SweepArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "sweep";
    let (env, grid) = environment(S, &a.env, config)?;
    let ps = paylines(S, &a.paylines, config, default_paylines())?;
    let kind = match a.externality {
        Some(k) => k,
        None => match config.string(S, "externality")? {
            Some(s) => kind_from_str(S, "externality", &s)?,
            None => ExternalityKind::None,
        },
    };
    if a.r.is_some() && kind != ExternalityKind::InverseCost {
        return Err(AppError::Usage("--r only applies to --externality inverse-cost".into()));
    }
    let ext = externality(kind, pick(a.r, config.f64(S, "r")?, 2.0))?;
    let outcomes = par_payline_sweep(&env, &ps, &ext, grid)?;
    emit(out_path(S, &a.out, config)?.as_deref(), &sweep_csv(&outcomes))
}

fn figure4(a: &Figure4Args, config: &Config) -> Result<(), AppError> {
    const S: &str = "figure4";
    let (env, grid) = environment(S, &a.env, config)?;
    let ps = paylines(S, &a.paylines, config, default_paylines())?;
    let panel = match a.panel {
        Some(p) => p,
        None => match config.string(S, "panel")? {
            Some(s) => PanelArg::from_str(&s, true)
                .map_err(|_| AppError::Config(format!("[{S}] `panel`: expected a or b, got `{s}`")))?,
            None => PanelArg::A,
        },
    };
    let panel = match panel {
        PanelArg::A => Panel::Size,
        PanelArg::B => Panel::Nature,
    };
    let fig = Figure4::compute(&env, panel, &ps, grid)?;
    emit(out_path(S, &a.out, config)?.as_deref(), &fig.to_csv())?;
    eprint!("{}", fig.summary());
    Ok(())
}

fn mc(a: &McCheckArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "mc-check";
    let (env, grid) = environment(S, &a.env, config)?;
    let ps = paylines(S, &a.paylines, config, MC_PAYLINES.to_vec())?;
    let kinds = match &a.externalities {
        Some(k) => k.clone(),
        None => match config.string_list(S, "externalities")? {
            Some(list) => list
                .iter()
                .map(|s| kind_from_str(S, "externalities", s))
                .collect::<Result<_, _>>()?,
            None => vec![ExternalityKind::None, ExternalityKind::InverseCost],
        },
    };
    let r = pick(a.r, config.f64(S, "r")?, 2.0);
    let exts = kinds
        .into_iter()
        .map(|k| externality(k, r))
        .collect::<Result<Vec<_>, _>>()?;
    let settings = McSettings {
        applicants: pick(a.applicants, config.usize(S, "applicants")?, 100_000),
        replications: pick(a.replications, config.usize(S, "replications")?, 20),
        seed: pick(a.seed, config.u64(S, "seed")?, 0),
        grid_size: grid,
    };
    let rows = mc_check(&env, &ps, &exts, settings)?;
    emit(out_path(S, &a.out, config)?.as_deref(), &mc_csv(&rows))
}

fn survey_input(section: &str, a: &SurveyInput, config: &Config) -> Result<PathBuf, AppError> {
    match &a.input {
        Some(p) => Ok(p.clone()),
        None => config
            .string(section, "input")?
            .map(PathBuf::from)
            .ok_or_else(|| AppError::Usage("--input is required".into())),
    }
}

fn report_rejections(report: &RejectionReport, kept: usize) {
    for (rule, count) in report.entries() {
        eprintln!("dropped {rule}: {count}");
    }
    eprintln!("kept: {kept}");
}

fn load(section: &str, a: &SurveyInput, config: &Config) -> Result<crate::survey::SurveyData, AppError> {
    let path = survey_input(section, a, config)?;
    let data = load_and_filter(&path)?;
    report_rejections(&data.report, data.records.len());
    Ok(data)
}

fn survey_instrument(a: &SurveyInput, config: &Config) -> Result<(), AppError> {
    const S: &str = "survey-instrument";
    let data = load(S, a, config)?;
    let z = jackknife_instrument(&data.records)?;
    let mut t = CsvTable::new(&["id", "field", "grant_per_fundraising_hour", "instrument"]);
    for (r, z) in data.records.iter().zip(z) {
        t.row([r.id.clone(), r.field.clone(), num(r.grant_per_fundraising_hour()), num(z)]);
    }
    emit(out_path(S, &a.out, config)?.as_deref(), &t.into_string())
}

fn survey_summarize(a: &SurveyInput, config: &Config) -> Result<(), AppError> {
    const S: &str = "survey-summarize";
    let data = load(S, a, config)?;
    let rows = summarize(&data.records)?;
    let mut t = CsvTable::new(&["group", "variable", "count", "mean", "sd", "degenerate"]);
    for r in rows {
        t.row([
            r.group.to_string(),
            r.variable,
            r.count.to_string(),
            num(r.mean),
            num(r.sd),
            r.degenerate.to_string(),
        ]);
    }
    emit(out_path(S, &a.out, config)?.as_deref(), &t.into_string())
}

fn survey_poisson(a: &PoissonArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "survey-poisson";
    let data = load(S, &a.input, config)?;
    let transform = match a.transform {
        Some(t) => t,
        None => match config.string(S, "transform")? {
            Some(s) => s.parse().map_err(AppError::Config)?,
            None => Transform::Log,
        },
    };
    let default_regressors = vec!["hrs_fundraising".to_string(), "hrs_other".to_string()];
    let spec = PoissonSpec {
        outcome: pick(a.outcome.clone(), config.string(S, "outcome")?, "hrs_research".to_string()),
        regressors: pick(a.regressors.clone(), config.string_list(S, "regressors")?, default_regressors),
        transform,
        spline: a.spline.clone().or(config.string(S, "spline")?),
        controls: pick(a.controls.clone(), config.string_list(S, "controls")?, Vec::new()),
    };
    let fit = fit_spec(&data.records, &spec)?;
    let mut t = CsvTable::new(&["term", "coefficient", "robust_se"]);
    for ((term, b), se) in fit.terms.iter().zip(&fit.coefficients).zip(&fit.robust_se) {
        t.row([term.clone(), num(*b), num(*se)]);
    }
    emit(out_path(S, &a.input.out, config)?.as_deref(), &t.into_string())?;
    eprintln!(
        "observations: {}\nlog_likelihood: {}\niterations: {}",
        fit.observations, fit.log_likelihood, fit.iterations
    );
    Ok(())
}

fn survey_synth(a: &SynthArgs, config: &Config) -> Result<(), AppError> {
    const S: &str = "survey-synth";
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        records: pick(a.records, config.usize(S, "records")?, d.records),
        seed: pick(a.seed, config.u64(S, "seed")?, d.seed),
        alpha: pick(a.alpha, config.f64(S, "alpha")?, d.alpha),
        beta_f: pick(a.beta_f, config.f64(S, "beta-f")?, d.beta_f),
        beta_o: pick(a.beta_o, config.f64(S, "beta-o")?, d.beta_o),
        ..d
    };
    emit(out_path(S, &a.out, config)?.as_deref(), &to_csv(&generate(&cfg)))
}
