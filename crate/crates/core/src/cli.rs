//! Command-line front end.
//!
//! Every subcommand resolves an [`ExperimentConfig`] from built-in defaults,
//! an optional `key=value` file (`--config`) and flag overrides, in that
//! order, and writes the resolved config as `config.txt` next to its outputs.
//! Feeding that file back with `--config` reproduces the outputs; only the
//! `wall_ms` column of `fer.csv` depends on the machine.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;

use crate::channel::ChannelParams;
use crate::decoder::{syndrome, BpDecoder, DecoderConfig};
use crate::ensemble::{code_rate, plan_rate, snr_for_efficiency, AdaptLimits, AdaptMode, DegreeDistribution, Side};
use crate::keyrate::{key_rate_at_distance, KeyRateInputs};
use crate::matrix::alist::{read_alist, write_alist};
use crate::matrix::{build_base, extend, matrix_stats, puncture, RlLdpcCode, Scale};
use crate::sim::{run_point, simulate_frame_data, PointResult};
use crate::{privacy, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const KEYRATE_CSV_HEADER: &str = "distance_km,snr,va_opt,i_ab,chi_be,delta_n,k,plob";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonIntegralScale { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `r002`, `r005` or a path to an ensemble file.
    pub ensemble: String,
    pub scale: Scale,
    pub seed: u64,
    /// Input alist; when absent the base matrix is built from `scale`, `seed`.
    pub matrix: Option<PathBuf>,
    pub p: Option<u64>,
    pub e: Option<u64>,
    pub target_snr: Option<f64>,
    /// Reconciliation efficiency: adaptation target, key-rate β, and the
    /// operating point of `decode` when `snr` is unset.
    pub beta: f64,
    pub snr: Option<f64>,
    pub decoder: DecoderConfig,
    pub betas: Vec<f64>,
    /// When non-empty, replaces `betas` as the sweep grid.
    pub snrs: Vec<f64>,
    pub frames: usize,
    pub frame: u64,
    pub distances: Vec<f64>,
    pub fer: f64,
    pub alpha: f64,
    pub block_size: f64,
    pub eps: f64,
    pub loss_db_per_km: f64,
    pub detector_efficiency: f64,
    pub excess_noise: f64,
    pub electronic_noise: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let link = ChannelParams::standard(0.0, 1.0);
        Self {
            ensemble: "r002".into(),
            scale: Scale::new(1, 25),
            seed: 1,
            matrix: None,
            p: None,
            e: None,
            target_snr: None,
            beta: 0.98,
            snr: None,
            decoder: DecoderConfig::default(),
            betas: vec![0.90, 0.92, 0.94, 0.96],
            snrs: Vec::new(),
            frames: 200,
            frame: 0,
            distances: (1..=16).map(|d| 10.0 * d as f64).collect(),
            fer: 0.75,
            alpha: 1.0,
            block_size: 1e10,
            eps: crate::keyrate::DEFAULT_EPS,
            loss_db_per_km: link.loss_db_per_km,
            detector_efficiency: link.detector_efficiency,
            excess_noise: link.excess_noise,
            electronic_noise: link.electronic_noise,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| usage(format!("{key}: cannot parse {value:?}")))
}

fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<Option<T>> {
    if value.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_list(key: &str, value: &str) -> CliResult<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(usage(format!("{key}: expected true or false, got {other:?}"))),
    }
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key.trim() {
            "ensemble" => self.ensemble = v.to_string(),
            "scale" => self.scale = v.parse().map_err(|e: Error| usage(format!("scale: {e}")))?,
            "seed" => self.seed = parse_num(key, v)?,
            "matrix" => self.matrix = (!v.is_empty()).then(|| PathBuf::from(v)),
            "p" => self.p = parse_opt(key, v)?,
            "e" => self.e = parse_opt(key, v)?,
            "target_snr" => self.target_snr = parse_opt(key, v)?,
            "beta" => self.beta = parse_num(key, v)?,
            "snr" => self.snr = parse_opt(key, v)?,
            "max_iters" => self.decoder.max_iterations = parse_num(key, v)?,
            "early_stop" => self.decoder.early_stop = parse_bool(key, v)?,
            "llr_clamp" => self.decoder.llr_clamp = parse_num(key, v)?,
            "betas" => self.betas = parse_list(key, v)?,
            "snrs" => self.snrs = parse_list(key, v)?,
            "frames" => self.frames = parse_num(key, v)?,
            "frame" => self.frame = parse_num(key, v)?,
            "distances" => self.distances = parse_list(key, v)?,
            "fer" => self.fer = parse_num(key, v)?,
            "alpha" => self.alpha = parse_num(key, v)?,
            "block_size" => self.block_size = parse_num(key, v)?,
            "eps" => self.eps = parse_num(key, v)?,
            "loss_db_per_km" => self.loss_db_per_km = parse_num(key, v)?,
            "detector_efficiency" => self.detector_efficiency = parse_num(key, v)?,
            "excess_noise" => self.excess_noise = parse_num(key, v)?,
            "electronic_noise" => self.electronic_noise = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` text; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// All keys in a fixed order; [`apply_text`](Self::apply_text) inverts it.
    pub fn to_text(&self) -> String {
        let m = self.matrix.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let pairs: Vec<(&str, String)> = vec![
            ("ensemble", self.ensemble.clone()),
            ("scale", self.scale.to_string()),
            ("seed", self.seed.to_string()),
            ("matrix", m),
            ("p", fmt_opt(&self.p)),
            ("e", fmt_opt(&self.e)),
            ("target_snr", fmt_opt(&self.target_snr)),
            ("beta", self.beta.to_string()),
            ("snr", fmt_opt(&self.snr)),
            ("max_iters", self.decoder.max_iterations.to_string()),
            ("early_stop", self.decoder.early_stop.to_string()),
            ("llr_clamp", self.decoder.llr_clamp.to_string()),
            ("betas", fmt_list(&self.betas)),
            ("snrs", fmt_list(&self.snrs)),
            ("frames", self.frames.to_string()),
            ("frame", self.frame.to_string()),
            ("distances", fmt_list(&self.distances)),
            ("fer", self.fer.to_string()),
            ("alpha", self.alpha.to_string()),
            ("block_size", self.block_size.to_string()),
            ("eps", self.eps.to_string()),
            ("loss_db_per_km", self.loss_db_per_km.to_string()),
            ("detector_efficiency", self.detector_efficiency.to_string()),
            ("excess_noise", self.excess_noise.to_string()),
            ("electronic_noise", self.electronic_noise.to_string()),
            ("out", self.out.display().to_string()),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn load_ensemble(&self) -> CliResult<DegreeDistribution> {
        match self.ensemble.as_str() {
            "r002" => Ok(DegreeDistribution::rate_002()),
            "r005" => Ok(DegreeDistribution::rate_005()),
            path => {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("ensemble {path}: {e}")))?;
                text.parse().map_err(|e: Error| CliError::Failure(format!("ensemble {path}: {e}")))
            }
        }
    }

    /// The input matrix, or the base matrix built from scale and seed.
    fn load_code(&self) -> CliResult<RlLdpcCode> {
        match &self.matrix {
            Some(path) => {
                let h = read_alist(path)?;
                RlLdpcCode::from_matrix(h).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
            }
            None => {
                log::info!("building base matrix at scale {} with seed {}", self.scale, self.seed);
                Ok(build_base(self.scale, self.seed)?)
            }
        }
    }

    fn link(&self) -> ChannelParams {
        ChannelParams {
            distance_km: 0.0,
            loss_db_per_km: self.loss_db_per_km,
            detector_efficiency: self.detector_efficiency,
            excess_noise: self.excess_noise,
            electronic_noise: self.electronic_noise,
            modulation_variance: 1.0,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rlldpc", version, about = "Raptor-like LDPC reconciliation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value config file applied before flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra key=value override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale factor, e.g. 1/25.
    #[arg(long)]
    pub scale: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Input alist matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// r002, r005 or an ensemble file.
    #[arg(long)]
    pub ensemble: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecoderFlags {
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub no_early_stop: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the base matrix; writes base.alist and stats.txt.
    Construct {
        #[command(flatten)]
        common: Common,
    },
    /// Puncture or extend a matrix; writes adapted.alist and stats.txt.
    Adapt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        e: Option<u64>,
        #[arg(long)]
        target_snr: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Frame-error-rate sweep over an efficiency or SNR grid; writes fer.csv.
    FerSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decoder: DecoderFlags,
        /// Comma-separated efficiencies.
        #[arg(long)]
        betas: Option<String>,
        /// Comma-separated linear SNRs; replaces the efficiency grid.
        #[arg(long)]
        snrs: Option<String>,
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Secret key rate against distance; writes keyrate.csv.
    Keyrate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated distances in km.
        #[arg(long)]
        distances: Option<String>,
        #[arg(long)]
        fer: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Check a matrix against an ensemble; writes validate.txt.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate and decode one frame; writes decode.txt.
    Decode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decoder: DecoderFlags,
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        frame: Option<u64>,
    },
}

fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key, v.to_string()));
    }
}

fn push_decoder(out: &mut Vec<(&'static str, String)>, d: &DecoderFlags) {
    push(out, "max_iters", &d.max_iters);
    if d.no_early_stop {
        out.push(("early_stop", "false".into()));
    }
}

/// Resolves the config of a parsed command line.
pub fn resolve(command: &Command) -> CliResult<ExperimentConfig> {
    let mut over: Vec<(&'static str, String)> = Vec::new();
    let common = match command {
        Command::Construct { common } | Command::Validate { common } => common,
        Command::Adapt { common, p, e, target_snr, beta } => {
            push(&mut over, "p", p);
            push(&mut over, "e", e);
            push(&mut over, "target_snr", target_snr);
            push(&mut over, "beta", beta);
            common
        }
        Command::FerSweep { common, decoder, betas, snrs, frames } => {
            push_decoder(&mut over, decoder);
            push(&mut over, "betas", betas);
            push(&mut over, "snrs", snrs);
            push(&mut over, "frames", frames);
            common
        }
        Command::Keyrate { common, distances, fer, beta, alpha } => {
            push(&mut over, "distances", distances);
            push(&mut over, "fer", fer);
            push(&mut over, "beta", beta);
            push(&mut over, "alpha", alpha);
            common
        }
        Command::Decode { common, decoder, snr, beta, frame } => {
            push_decoder(&mut over, decoder);
            push(&mut over, "snr", snr);
            push(&mut over, "beta", beta);
            push(&mut over, "frame", frame);
            common
        }
    };
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    push(&mut over, "seed", &common.seed);
    push(&mut over, "scale", &common.scale);
    push(&mut over, "out", &common.out.as_ref().map(|p| p.display().to_string()));
    push(&mut over, "matrix", &common.matrix.as_ref().map(|p| p.display().to_string()));
    push(&mut over, "ensemble", &common.ensemble);
    for (k, v) in over {
        cfg.set(k, &v)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    cfg.decoder.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn prepare_out(cfg: &ExperimentConfig) -> CliResult<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    write_file(&cfg.out.join("config.txt"), &cfg.to_text())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match resolve(&cli.command).and_then(|cfg| dispatch(&cli.command, &cfg)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> CliResult<()> {
    prepare_out(cfg)?;
    match command {
        Command::Construct { .. } => cmd_construct(cfg),
        Command::Adapt { .. } => cmd_adapt(cfg),
        Command::FerSweep { .. } => cmd_fer_sweep(cfg),
        Command::Keyrate { .. } => cmd_keyrate(cfg),
        Command::Validate { .. } => cmd_validate(cfg),
        Command::Decode { .. } => cmd_decode(cfg),
    }
}

pub fn cmd_construct(cfg: &ExperimentConfig) -> CliResult<()> {
    let ensemble = cfg.load_ensemble()?;
    if ensemble != DegreeDistribution::rate_002() {
        return Err(usage("construction is defined for the rate-0.02 ensemble (r002) only"));
    }
    let code = build_base(cfg.scale, cfg.seed)?;
    write_alist(&code.matrix, &cfg.out.join("base.alist"))?;
    let stats = matrix_stats(&code, false).to_string();
    write_file(&cfg.out.join("stats.txt"), &stats)?;
    print!("{stats}");
    Ok(())
}

pub fn cmd_adapt(cfg: &ExperimentConfig) -> CliResult<()> {
    let chosen = [cfg.p.is_some(), cfg.e.is_some(), cfg.target_snr.is_some()];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        return Err(usage("adapt needs exactly one of p, e or target_snr"));
    }
    let code = cfg.load_code()?;
    let mut plan_lines = String::new();
    let adapted = if let Some(p) = cfg.p {
        puncture(&code, p as usize)?
    } else if let Some(e) = cfg.e {
        extend(&code, e as usize, cfg.seed)?
    } else {
        let snr = cfg.target_snr.expect("checked above");
        let (n, m) = (code.matrix.cols() as u64, code.matrix.rows() as u64);
        let limits = AdaptLimits {
            max_p: code.layout.cd_rows.saturating_sub(1) as u64,
            max_e: n,
        };
        let plan = plan_rate(n, m, snr, cfg.beta, limits)?;
        writeln!(plan_lines, "plan_mode={}", plan.mode).ok();
        writeln!(plan_lines, "plan_length={}", plan.length).ok();
        writeln!(plan_lines, "plan_beta={}", plan.achieved_efficiency).ok();
        match plan.mode {
            AdaptMode::Puncture => puncture(&code, plan.length as usize)?,
            AdaptMode::Extend => extend(&code, plan.length as usize, cfg.seed)?,
            AdaptMode::None => code,
        }
    };
    write_alist(&adapted.matrix, &cfg.out.join("adapted.alist"))?;
    let stats = format!("{}{plan_lines}", matrix_stats(&adapted, false));
    write_file(&cfg.out.join("stats.txt"), &stats)?;
    print!("{stats}");
    Ok(())
}

/// Sweep SNRs; efficiencies are converted at the code rate.
fn sweep_grid(cfg: &ExperimentConfig, rate: f64) -> CliResult<Vec<f64>> {
    let grid = if cfg.snrs.is_empty() {
        cfg.betas
            .iter()
            .map(|&b| snr_for_efficiency(rate, b).map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        cfg.snrs.clone()
    };
    if grid.is_empty() {
        return Err(usage("the sweep grid is empty"));
    }
    Ok(grid)
}

/// Runs the sweep and returns its CSV text.
pub fn fer_sweep_csv(cfg: &ExperimentConfig, code: &RlLdpcCode) -> CliResult<(String, Vec<PointResult>)> {
    let rate = code.rate().to_f64().unwrap_or(f64::NAN);
    let grid = sweep_grid(cfg, rate)?;
    if cfg.frames == 0 {
        return Err(usage("frames must be positive"));
    }
    let dec = BpDecoder::new(&code.matrix);
    let mut csv = format!("{}\n", PointResult::CSV_HEADER);
    let mut points = Vec::with_capacity(grid.len());
    for (i, &snr) in grid.iter().enumerate() {
        let r = run_point(&dec, rate, snr, cfg.frames, cfg.seed, i as u64, &cfg.decoder)?;
        log::info!("point {i}: snr {snr} fer {} ({} ms)", r.fer, r.wall_ms);
        csv.push_str(&r.csv_row());
        csv.push('\n');
        points.push(r);
    }
    Ok((csv, points))
}

pub fn cmd_fer_sweep(cfg: &ExperimentConfig) -> CliResult<()> {
    let code = cfg.load_code()?;
    let (csv, _) = fer_sweep_csv(cfg, &code)?;
    write_file(&cfg.out.join("fer.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

pub fn keyrate_csv(cfg: &ExperimentConfig) -> CliResult<String> {
    if cfg.distances.is_empty() {
        return Err(usage("no distances given"));
    }
    let template = KeyRateInputs {
        alpha: cfg.alpha,
        fer: cfg.fer,
        beta: cfg.beta,
        channel: cfg.link(),
        block_size_n: cfg.block_size,
        security_eps: cfg.eps,
    };
    template.validate()?;
    let mut csv = format!("{KEYRATE_CSV_HEADER}\n");
    for &d in &cfg.distances {
        let p = key_rate_at_distance(&template, d)?;
        let b = p.breakdown;
        writeln!(csv, "{},{},{},{},{},{},{},{}", d, b.snr, p.va_opt, b.i_ab, b.chi_be, b.delta_n, b.k, p.plob).ok();
    }
    Ok(csv)
}

pub fn cmd_keyrate(cfg: &ExperimentConfig) -> CliResult<()> {
    let csv = keyrate_csv(cfg)?;
    write_file(&cfg.out.join("keyrate.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

/// Degree histogram as `(degree, count)` sorted by degree.
fn histogram(degrees: impl Iterator<Item = usize>) -> Vec<(u32, u64)> {
    let mut h = std::collections::BTreeMap::new();
    for d in degrees {
        *h.entry(d as u32).or_insert(0u64) += 1;
    }
    h.into_iter().collect()
}

fn fmt_hist(h: &[(u32, u64)]) -> String {
    h.iter().map(|(d, n)| format!("{d}:{n}")).collect::<Vec<_>>().join(",")
}

/// Validation report lines and the overall verdict.
pub fn validate_report(cfg: &ExperimentConfig) -> CliResult<(String, bool)> {
    let path = cfg
        .matrix
        .as_ref()
        .ok_or_else(|| usage("validate needs a matrix (--matrix)"))?;
    let ensemble = cfg.load_ensemble()?;
    let mut report = String::new();
    writeln!(report, "matrix={}", path.display()).ok();
    writeln!(report, "ensemble={}", cfg.ensemble).ok();
    let h = match read_alist(path) {
        Ok(h) => h,
        Err(e @ (Error::DuplicateEdge { .. } | Error::Parse { .. })) => {
            writeln!(report, "check.parse=fail ({e})").ok();
            writeln!(report, "result=fail").ok();
            return Ok((report, false));
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(report, "check.parse=pass").ok();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        let verdict = if pass { "pass" } else { "fail" };
        writeln!(report, "check.{name}={verdict} ({detail})").ok();
    };

    let n = h.cols() as u64;
    let m = h.rows() as u64;
    let rate = crate::ensemble::Fraction::new(n as i128 - m as i128, n as i128);
    match code_rate(&ensemble) {
        Ok(expected) => check("rate", rate == expected, format!("matrix {rate}, ensemble {expected}")),
        Err(e) => check("rate", false, format!("ensemble rate undefined: {e}")),
    }
    let layout = crate::matrix::BlockLayout::infer(&h);
    check(
        "layout",
        layout.is_some(),
        match layout {
            Some(l) => format!("{} typed columns, {} identity-paired rows", l.typed_cols, l.cd_rows),
            None => "no trailing identity block".into(),
        },
    );
    let cols = histogram((0..h.cols()).map(|c| h.col_weight(c)));
    let rows = histogram((0..h.rows()).map(|r| h.row_weight(r)));
    match ensemble.node_counts(Side::Variable, n) {
        Some(expected) => check(
            "variable_degrees",
            cols == expected,
            format!("matrix {}, ensemble {}", fmt_hist(&cols), fmt_hist(&expected)),
        ),
        None => check("variable_degrees", false, format!("ensemble node counts are not integral at N={n}")),
    }
    match ensemble.node_counts(Side::Check, n) {
        Some(expected) => {
            // several check types may share a total degree
            let expected = histogram(expected.iter().flat_map(|&(d, c)| std::iter::repeat_n(d as usize, c as usize)));
            check(
                "check_degrees",
                rows == expected,
                format!("matrix {}, ensemble {}", fmt_hist(&rows), fmt_hist(&expected)),
            )
        }
        None => check("check_degrees", false, format!("ensemble node counts are not integral at N={n}")),
    }
    writeln!(report, "result={}", if ok { "pass" } else { "fail" }).ok();
    Ok((report, ok))
}

pub fn cmd_validate(cfg: &ExperimentConfig) -> CliResult<()> {
    let (report, ok) = validate_report(cfg)?;
    write_file(&cfg.out.join("validate.txt"), &report)?;
    print!("{report}");
    if ok {
        Ok(())
    } else {
        Err(CliError::Failure("validation failed".into()))
    }
}

pub fn cmd_decode(cfg: &ExperimentConfig) -> CliResult<()> {
    let code = cfg.load_code()?;
    let rate = code.rate().to_f64().unwrap_or(f64::NAN);
    let snr = match cfg.snr {
        Some(s) => s,
        None => snr_for_efficiency(rate, cfg.beta)?,
    };
    let data = simulate_frame_data(&code.matrix, snr, cfg.seed, 0, cfg.frame)?;
    let res = BpDecoder::new(&code.matrix).decode(&data.llrs, &data.syndrome, &cfg.decoder)?;
    let bit_errors = res.hard_bits.iter().zip(&data.key).filter(|(a, b)| a != b).count();
    let reconciled = syndrome(&code.matrix, &res.hard_bits)? == data.syndrome;
    let key = privacy::amplify(&res.hard_bits);
    let mut report = String::new();
    writeln!(report, "snr={snr}").ok();
    writeln!(report, "snr_used={}", data.snr_used).ok();
    writeln!(report, "converged={}", res.converged).ok();
    writeln!(report, "iterations={}", res.iterations_used).ok();
    writeln!(report, "final_syndrome_weight={}", res.final_syndrome_weight).ok();
    writeln!(report, "syndrome_match={reconciled}").ok();
    writeln!(report, "bit_errors={bit_errors}").ok();
    writeln!(report, "key_bits={}", key.len()).ok();
    write_file(&cfg.out.join("decode.txt"), &report)?;
    print!("{report}");
    Ok(())
}
