//! `qds-forge`: hashing, protocol sessions, attack simulations, security
//! reports and signature-rate sweeps from the command line.

pub mod config;
pub mod csv;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use qds_core::bitcore::{binary_entropy, gen_irreducible, hamming_ball_size, BitString};
use qds_core::channel_sim::{
    guessing_attack, simulate_kgp, tamper_attack, AdversaryModel, TamperFixture, TamperStrategy,
};
use qds_core::lfsr_hash::{toeplitz_hash, HashSpec};
use qds_core::optimizer::{evaluate, search, sweep_with_start};
use qds_core::protocol::{radius_for, run_session, SessionConfig, SessionVerdict, Variant};
use qds_core::security::{analyze, hash_forgery_bound};
use qds_core::seed::{derive_seed, rng_for};
use qds_core::Error;

use config::{AdversaryKind, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible configuration: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(i) => CliError::Infeasible(i.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qds-forge", version, about = "Likely-bit-string quantum digital signature toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hash a message file with a seed-derived polynomial and key
    Hash {
        /// Message file; its bytes are the message bits
        message: Option<PathBuf>,
        /// Hash width in bits
        #[arg(long)]
        width: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run one signing session on simulated keys
    Session {
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Raw-key length
        #[arg(long)]
        n: Option<usize>,
        /// Let Bob alter the pair he forwards
        #[arg(long, value_enum)]
        adversary: Option<AdversaryKind>,
        /// With an adversary, also estimate its success rate over this many
        /// fresh sessions
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo forgery experiments against their bounds
    Attack {
        #[arg(long, value_enum)]
        adversary: Option<AdversaryKind>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Security report from direct inputs or from the model at one distance
    Security {
        #[arg(long, value_delimiter = ',')]
        distance_km: Vec<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        delta1: Option<f64>,
        #[arg(long)]
        eph: Option<f64>,
        #[arg(long)]
        m: Option<u128>,
        #[arg(long)]
        nx: Option<String>,
        #[arg(long)]
        ny: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimized rate at each listed distance, searched independently
    Rate {
        #[arg(long, value_delimiter = ',')]
        distance_km: Vec<f64>,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimized rate over a distance sweep with warm starts
    Sweep {
        #[arg(long, value_delimiter = ',')]
        distance_km: Vec<f64>,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VariantArg {
    Original,
    Improved,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Original => Variant::Original,
            VariantArg::Improved => Variant::Improved,
        }
    }
}

/// Primary output of a command: text for standard output or `--out`, plus
/// lines that always go to standard output.
struct Output {
    primary: String,
    stdout_extra: String,
    exit: i32,
}

impl Output {
    fn ok(primary: String) -> Self {
        Self {
            primary,
            stdout_extra: String::new(),
            exit: EXIT_OK,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let common = match &cli.command {
        Command::Hash { common, .. }
        | Command::Session { common, .. }
        | Command::Attack { common, .. }
        | Command::Security { common, .. }
        | Command::Rate { common, .. }
        | Command::Sweep { common, .. } => common.clone(),
    };
    let result = RunConfig::load(common.config.as_deref()).and_then(|mut cfg| {
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        dispatch(&cli.command, &cfg)
    });
    match result.and_then(|o| emit(o, common.out.as_deref())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qds-forge: {e}");
            e.exit_code()
        }
    }
}

fn emit(o: Output, out: Option<&Path>) -> Result<i32, CliError> {
    match out {
        Some(path) => std::fs::write(path, &o.primary)
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", o.primary),
    }
    print!("{}", o.stdout_extra);
    std::io::stdout()
        .flush()
        .map_err(|e| CliError::Invalid(format!("cannot write output: {e}")))?;
    Ok(o.exit)
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Hash { message, width, .. } => cmd_hash(cfg, message.as_deref(), *width),
        Command::Session {
            variant,
            n,
            adversary,
            trials,
            ..
        } => cmd_session(cfg, variant.map(Into::into), *n, *adversary, *trials),
        Command::Attack {
            adversary,
            variant,
            trials,
            n,
            ..
        } => cmd_attack(cfg, *adversary, variant.map(Into::into), *trials, *n),
        Command::Security {
            distance_km,
            n,
            delta1,
            eph,
            m,
            nx,
            ny,
            ..
        } => {
            let direct = DirectArgs {
                n: *n,
                delta1: *delta1,
                e_ph: *eph,
                m: *m,
                n_x: nx.clone(),
                n_y: ny.clone(),
            };
            cmd_security(cfg, distance_km, direct)
        }
        Command::Rate {
            distance_km, budget, ..
        } => cmd_rate(cfg, distance_km, *budget, false),
        Command::Sweep {
            distance_km, budget, ..
        } => cmd_rate(cfg, distance_km, *budget, true),
    }
}

fn cmd_hash(cfg: &RunConfig, message: Option<&Path>, width: Option<usize>) -> Result<Output, CliError> {
    let path = message
        .map(Path::to_path_buf)
        .or_else(|| cfg.hash.message.clone())
        .ok_or_else(|| CliError::Invalid("no message file given".into()))?;
    let bytes = std::fs::read(&path)
        .map_err(|e| CliError::Invalid(format!("cannot read message {}: {e}", path.display())))?;
    if bytes.is_empty() {
        return Err(CliError::Invalid(format!("message {} is empty", path.display())));
    }
    let width = width.unwrap_or(cfg.hash.width);
    let msg = BitString::from_packed_bytes(&bytes, 8 * bytes.len())?;
    let poly_seed = BitString::random(width, &mut rng_for(cfg.seed, "hash/poly"));
    let init = BitString::random(width, &mut rng_for(cfg.seed, "hash/init"));
    let poly = gen_irreducible(&poly_seed, width)?;
    let spec = HashSpec::new(poly.clone(), init.clone())?;
    let h = toeplitz_hash(&spec, &msg)?;
    let mut s = String::new();
    let _ = writeln!(s, "message_bits={}", msg.len());
    let _ = writeln!(s, "width={width}");
    let _ = writeln!(s, "poly={}", poly.to_hex());
    let _ = writeln!(s, "init={}", init.to_hex());
    let _ = writeln!(s, "hash={}", h.to_hex());
    Ok(Output::ok(s))
}

fn adversary_model(kind: AdversaryKind, p_e: f64) -> AdversaryModel {
    match kind {
        AdversaryKind::Tamper => AdversaryModel::TamperMessage,
        AdversaryKind::Forge => AdversaryModel::ForgePair,
        AdversaryKind::Guess => AdversaryModel::GuessKeys { p_e },
    }
}

fn cmd_session(
    cfg: &RunConfig,
    variant: Option<Variant>,
    n: Option<usize>,
    adversary: Option<AdversaryKind>,
    trials: Option<u64>,
) -> Result<Output, CliError> {
    let pc = &cfg.protocol;
    let n = n.unwrap_or(pc.n);
    let variant = variant.unwrap_or(pc.variant);
    let kind = adversary.or(pc.adversary);
    let adversary = kind.map(|k| adversary_model(k, pc.p_e));
    let keys = simulate_kgp(n, pc.rates, pc.flip_mode, derive_seed(cfg.seed, "session/kgp"))?;
    let message = BitString::random(pc.message_bits, &mut rng_for(cfg.seed, "session/message"));
    let config = SessionConfig {
        variant,
        max_radius: pc.max_radius,
    };
    let report = run_session(&config, &keys, &message, adversary.as_ref(), derive_seed(cfg.seed, "session/run"))?;
    let word = |a: bool| if a { "accept" } else { "reject" };
    let mut verdict = match &report.verdict {
        SessionVerdict::Completed { bob, charlie } => format!(
            "bob={} charlie={} comparisons={}\n",
            word(bob.accepted),
            word(charlie.accepted),
            bob.comparisons_made + charlie.comparisons_made
        ),
        SessionVerdict::Aborted { reason } => {
            format!("bob=reject charlie=reject comparisons=0\naborted={reason}\n")
        }
    };
    if let (Some(k), Some(t)) = (kind, trials) {
        verdict.push_str(&attack_line(cfg, k, variant, n, t)?);
    }
    Ok(Output {
        primary: report.transcript.to_log(),
        stdout_extra: verdict,
        exit: EXIT_OK,
    })
}

/// Exact likely-set sizes used by the original variant for the configured
/// rates.
fn ball_sizes(n: usize, cfg: &RunConfig) -> Result<(BigUint, BigUint), CliError> {
    let r = &cfg.protocol.rates;
    let r_x = radius_for(n, r.e_x()).min(n);
    let r_y = radius_for(2 * n, r.e_y()).min(2 * n);
    Ok((hamming_ball_size(n, r_x)?, hamming_ball_size(2 * n, r_y)?))
}

fn cmd_attack(
    cfg: &RunConfig,
    adversary: Option<AdversaryKind>,
    variant: Option<Variant>,
    trials: Option<u64>,
    n: Option<usize>,
) -> Result<Output, CliError> {
    let pc = &cfg.protocol;
    let kind = adversary.or(pc.adversary).unwrap_or(AdversaryKind::Tamper);
    let line = attack_line(
        cfg,
        kind,
        variant.unwrap_or(pc.variant),
        n.unwrap_or(pc.n),
        trials.unwrap_or(pc.trials),
    )?;
    Ok(Output::ok(line))
}

/// Runs `trials` independent attacks and reports the success count next to
/// the matching bound.
fn attack_line(cfg: &RunConfig, kind: AdversaryKind, variant: Variant, n: usize, trials: u64) -> Result<String, CliError> {
    let pc = &cfg.protocol;
    let seed = derive_seed(cfg.seed, "attack");
    let mut s = String::new();
    match kind {
        AdversaryKind::Guess => {
            let keys = simulate_kgp(n, pc.rates, pc.flip_mode, derive_seed(seed, "kgp"))?;
            let stats = guessing_attack(&keys, pc.p_e, trials, seed)?;
            let bound = (-(n as f64) * binary_entropy(pc.p_e)?).exp2();
            let _ = writeln!(
                s,
                "attack=guess n={n} p_e={} trials={trials} successes={} rate={:.16e} bound={:.16e} sigma={:.16e}",
                pc.p_e,
                stats.successes,
                stats.rate(),
                bound,
                stats.sigma(bound)
            );
        }
        AdversaryKind::Tamper | AdversaryKind::Forge => {
            let fixture = TamperFixture {
                n,
                m: pc.attack_message_bits,
                rates: pc.rates,
                improved: variant == Variant::Improved,
                max_radius: pc.max_radius,
            };
            let strategy = if kind == AdversaryKind::Tamper {
                TamperStrategy::RandomMessage
            } else {
                TamperStrategy::RandomPair
            };
            let stats = tamper_attack(&fixture, strategy, trials, seed)?;
            let (n_x, n_y) = match variant {
                Variant::Original => ball_sizes(n, cfg)?,
                Variant::Improved => (BigUint::from(1u8), BigUint::from(1u8)),
            };
            let bound = hash_forgery_bound(pc.attack_message_bits as u128, n as u64, &n_x, &n_y)?.value();
            let name = if kind == AdversaryKind::Tamper { "tamper" } else { "forge" };
            let variant_name = match variant {
                Variant::Original => "original",
                Variant::Improved => "improved",
            };
            let _ = writeln!(
                s,
                "attack={name} variant={variant_name} n={n} m={} n_x={n_x} n_y={n_y} trials={trials} successes={} rate={:.16e} bound={:.16e} sigma={:.16e}",
                pc.attack_message_bits,
                stats.successes,
                stats.rate(),
                bound,
                stats.sigma(bound)
            );
        }
    }
    Ok(s)
}

struct DirectArgs {
    n: Option<u64>,
    delta1: Option<f64>,
    e_ph: Option<f64>,
    m: Option<u128>,
    n_x: Option<String>,
    n_y: Option<String>,
}

impl DirectArgs {
    fn any(&self) -> bool {
        self.n.is_some()
            || self.delta1.is_some()
            || self.e_ph.is_some()
            || self.m.is_some()
            || self.n_x.is_some()
            || self.n_y.is_some()
    }
}

fn parse_big(name: &str, s: &str) -> Result<BigUint, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("{name} must be a nonnegative integer, got {s:?}")))
}

fn cmd_security(cfg: &RunConfig, distances: &[f64], d: DirectArgs) -> Result<Output, CliError> {
    if d.any() || cfg.security.is_some() {
        let base = cfg.security.clone();
        let need = |what: &str| CliError::Invalid(format!("direct security mode needs {what}"));
        let n = d.n.or(base.as_ref().map(|b| b.n)).ok_or_else(|| need("n"))?;
        let delta1 = d.delta1.or(base.as_ref().map(|b| b.delta1)).ok_or_else(|| need("delta1"))?;
        let e_ph = d.e_ph.or(base.as_ref().map(|b| b.e_ph)).ok_or_else(|| need("eph"))?;
        let m = d.m.or(base.as_ref().and_then(|b| b.m)).unwrap_or(cfg.m);
        let n_x = d.n_x.or(base.as_ref().map(|b| b.n_x.clone())).unwrap_or_else(|| "1".into());
        let n_y = d.n_y.or(base.as_ref().map(|b| b.n_y.clone())).unwrap_or_else(|| "1".into());
        let report = analyze(n, delta1, e_ph, m, &parse_big("nx", &n_x)?, &parse_big("ny", &n_y)?)?;
        let mut s = report.to_lines().join("\n");
        s.push('\n');
        return Ok(Output::ok(s));
    }
    let distance = match distances {
        [d] => *d,
        [] => return Err(CliError::Invalid("give --distance-km or direct inputs".into())),
        _ => return Err(CliError::Invalid("security takes a single distance".into())),
    };
    let point = evaluate(&cfg.sns, &cfg.problem(distance));
    let Some(report) = point.report else {
        let reason = point.reason.map(|r| r.to_string()).unwrap_or_default();
        return Err(CliError::Infeasible(reason));
    };
    let mut s = String::new();
    let _ = writeln!(s, "distance_km={}", csv::float(distance));
    for line in report.to_lines() {
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "feasible={}", point.feasible);
    if let Some(r) = point.reason {
        let _ = writeln!(s, "reason={r}");
    }
    let mut out = Output::ok(s);
    if !point.feasible {
        out.exit = EXIT_INFEASIBLE;
    }
    Ok(out)
}

fn cmd_rate(cfg: &RunConfig, distances: &[f64], budget: Option<u64>, warm: bool) -> Result<Output, CliError> {
    let distances: Vec<f64> = if distances.is_empty() {
        if !warm {
            return Err(CliError::Invalid("rate needs --distance-km".into()));
        }
        cfg.distances_km.clone()
    } else {
        distances.to_vec()
    };
    if let Some(bad) = distances.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(CliError::Invalid(format!("distance {bad} is not a nonnegative number")));
    }
    if warm && distances.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Invalid("sweep distances must be ascending".into()));
    }
    let budget = budget.unwrap_or(cfg.budget);
    if budget == 0 {
        return Err(CliError::Invalid("budget must be at least 1".into()));
    }
    let problem = cfg.problem(0.0);
    let points = if warm {
        sweep_with_start(&distances, &problem, budget, cfg.start)
    } else {
        distances
            .iter()
            .map(|&d| search(&problem.at_distance(d), budget, cfg.start))
            .collect()
    };
    Ok(Output::ok(csv::render(&points)))
}
