//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    dim_sum_distribution, empirical_dim_experiment, mix64, monte_carlo_dfr, preimage_dim_distribution, trial_rng,
    tv_distance, write_csv, DfrConfig, DimDistribution, DimExperiment, Histogram,
};
use crate::decoder::{decode, Algorithm, Strictness};
use crate::error::Error;
use crate::glrpc::{classical_tensor, sample_error, GlrpcInstance, GlrpcParams, TensorMode};
use crate::linalg::MatrixFq;
use crate::tensor::{ScanMode, Tensor3};
use crate::FieldCtx;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DECODE: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const THREADS_ENV: &str = "TENSOR_LRPC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tensor-lrpc", version, about = "Generalized LRPC codes over 3-tensor products")]
pub struct Cli {
    /// JSON file with default values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample an instance and write its JSON bundle.
    Gen(RunArgs),
    /// Encode a random message, add a rank-r error and decode it.
    Roundtrip(RunArgs),
    /// Monte Carlo decoding-failure campaign; sweeps over repeated --r / --d.
    Dfr(RunArgs),
    /// Compatibility and presemifield checks for a tensor.
    CheckTensor(CheckArgs),
    /// Exact dimension distribution beside an empirical histogram.
    Dist(DistArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Random,
    Classical,
    Supplied,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgArg {
    Basic,
    Improved,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<usize>,
    #[arg(long, value_enum)]
    pub tensor_mode: Option<ModeArg>,
    /// Tensor JSON for `--tensor-mode supplied`.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgArg>,
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror of the dfr report.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Instance bundle for roundtrip.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Tensor JSON; without it the classical tensor for --q/--m is used.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    /// Matrix JSON whose rows are the basis to test.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Force sampled scanning with this many draws.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistKind {
    Sum,
    Preimage,
    SyndromeSpan,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub kind: DistKind,
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub rd: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of `--config`; every field optional.
#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub q: Option<u32>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<OneOrMany>,
    pub r: Option<OneOrMany>,
    pub tensor_mode: Option<ModeArg>,
    pub tensor: Option<PathBuf>,
    pub algorithm: Option<AlgArg>,
    pub strictness: Option<Strictness>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub instance: Option<PathBuf>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub rd: Option<usize>,
}

/// Merged and defaulted settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: Vec<usize>,
    pub r: Vec<usize>,
    pub tensor_mode: ModeArg,
    pub tensor: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub strictness: Strictness,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub instance: Option<PathBuf>,
}

impl RunConfig {
    pub fn merge(args: &RunArgs, file: &FileConfig) -> RunConfig {
        let pick = |flag: &Vec<usize>, f: &Option<OneOrMany>, def: usize| {
            if !flag.is_empty() {
                flag.clone()
            } else {
                f.clone().map(OneOrMany::into_vec).unwrap_or_else(|| vec![def])
            }
        };
        let strictness = if args.strict {
            Strictness::Strict
        } else if args.lenient {
            Strictness::Lenient
        } else {
            file.strictness.unwrap_or_default()
        };
        let algorithm = match args.algorithm.or(file.algorithm).unwrap_or(AlgArg::Basic) {
            AlgArg::Basic => Algorithm::Basic,
            AlgArg::Improved => Algorithm::Improved,
        };
        RunConfig {
            q: args.q.or(file.q).unwrap_or(2),
            m: args.m.or(file.m).unwrap_or(20),
            n: args.n.or(file.n).unwrap_or(20),
            k: args.k.or(file.k).unwrap_or(10),
            d: pick(&args.d, &file.d, 2),
            r: pick(&args.r, &file.r, 2),
            tensor_mode: args.tensor_mode.or(file.tensor_mode).unwrap_or(ModeArg::Classical),
            tensor: args.tensor.clone().or_else(|| file.tensor.clone()),
            algorithm,
            strictness,
            trials: args.trials.or(file.trials).unwrap_or(100),
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone().or_else(|| file.out.clone()),
            json: args.json.clone().or_else(|| file.json.clone()),
            instance: args.instance.clone().or_else(|| file.instance.clone()),
        }
    }

    pub fn params(&self, d: usize, r: usize) -> GlrpcParams {
        GlrpcParams { q: self.q, m: self.m, n: self.n, k: self.k, d, r, seed: self.seed }
    }

    fn single(&self) -> Result<GlrpcParams, Failure> {
        if self.d.len() != 1 || self.r.len() != 1 {
            return Err(Failure::Validation("this subcommand takes a single --d and --r".into()));
        }
        Ok(self.params(self.d[0], self.r[0]))
    }

    pub fn mode(&self) -> Result<TensorMode, Failure> {
        match self.tensor_mode {
            ModeArg::Random => Ok(TensorMode::Random),
            ModeArg::Classical => Ok(TensorMode::Classical),
            ModeArg::Supplied => {
                let path = self
                    .tensor
                    .as_ref()
                    .ok_or_else(|| Failure::Validation("--tensor-mode supplied needs --tensor FILE".into()))?;
                Ok(TensorMode::Supplied(read_json(path)?))
            }
        }
    }
}

/// Outcome of a subcommand that did not succeed.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Decode(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Decode(_) => EXIT_DECODE,
            Failure::Io(_) => EXIT_IO,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Validation(s) | Failure::Decode(s) | Failure::Io(s) => s,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) | Error::HashMismatch => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| io_err(path, e))
}

fn write_out(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => stdout.write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Worker count from the environment, if set.
pub fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| Failure::Validation(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = read_text(p)?;
            serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_gen(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let params = cfg.single()?;
    params.validate()?;
    let inst = GlrpcInstance::generate(&params, &cfg.mode()?)?;
    let text = inst.to_json();
    let summary = json!({
        "out": cfg.out.as_ref().map(|p| p.display().to_string()),
        "expansion_dim": inst.expansion_dim(),
        "code_dim": inst.code_dim(),
        "content_hash": inst.content_hash(),
    });
    match &cfg.out {
        Some(p) => {
            fs::write(p, text.as_bytes()).map_err(|e| io_err(p, e))?;
            writeln!(stdout, "{summary}").map_err(|e| Failure::Io(e.to_string()))
        }
        None => writeln!(stdout, "{text}").map_err(|e| Failure::Io(e.to_string())),
    }
}

fn cmd_roundtrip(cfg: &RunConfig, args: &RunArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let inst = match &cfg.instance {
        Some(path) => GlrpcInstance::from_json(&read_text(path)?)?,
        None => {
            let p = cfg.single()?;
            p.validate()?;
            GlrpcInstance::generate(&p, &cfg.mode()?)?
        }
    };
    let mut p = *inst.params();
    if let [r] = args.r.as_slice() {
        p.r = *r;
    }
    if p.r > p.m.min(p.n) {
        return Err(Failure::Validation(format!("r = {} exceeds min(m, n)", p.r)));
    }
    let mut rng = trial_rng(mix64(cfg.seed, 0x726f_756e_6474_7270), 0);
    let msg: Vec<u32> = (0..inst.code_dim()).map(|_| rng.gen_range(0..p.q)).collect();
    let c = inst.encode(&msg)?;
    let err = sample_error(p.q, p.m, p.n, p.r, &mut rng)?;
    let y = c.add(&err.e)?;
    let decode_inst;
    let target = if p.r != inst.params().r {
        decode_inst = GlrpcInstance::from_parts(
            p,
            inst.tensor_mode(),
            inst.tensor().clone(),
            inst.support_basis().clone(),
            inst.mu_data().to_vec(),
        )?;
        &decode_inst
    } else {
        &inst
    };
    let outcome = match decode(target, &y, cfg.algorithm, cfg.strictness) {
        Err(Error::Incompatible { ranks }) => {
            return Err(Failure::Validation(format!(
                "tensor is not compatible with the support basis (slice ranks {ranks:?}); use --algorithm improved"
            )))
        }
        other => other?,
    };
    let correct = outcome.is_unique() && outcome.recovered_e.as_ref() == Some(&err.e);
    let report = json!({
        "r": p.r,
        "algorithm": cfg.algorithm,
        "strictness": cfg.strictness,
        "correct": correct,
        "outcome": outcome,
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    write_out(cfg.out.as_deref(), text.as_bytes(), stdout)?;
    if correct {
        Ok(())
    } else {
        Err(Failure::Decode(format!("decoding failed: {}", outcome.status.name())))
    }
}

fn cmd_dfr(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let threads = threads_from_env()?;
    let mode = cfg.mode()?;
    let mut configs = Vec::new();
    for &d in &cfg.d {
        for &r in &cfg.r {
            let params = cfg.params(d, r);
            params.validate()?;
            configs.push(DfrConfig {
                params,
                tensor_mode: mode.clone(),
                algorithm: cfg.algorithm,
                strictness: cfg.strictness,
                trials: cfg.trials,
                master_seed: cfg.seed,
            });
        }
    }
    if cfg.trials == 0 {
        return Err(Failure::Validation("--trials must be at least 1".into()));
    }
    let reports = configs.iter().map(|c| monte_carlo_dfr(c, threads)).collect::<Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &reports)?;
    write_out(cfg.out.as_deref(), &buf, stdout)?;
    if let Some(p) = &cfg.json {
        let text = serde_json::to_string_pretty(&reports).expect("serializable") + "\n";
        fs::write(p, text).map_err(|e| io_err(p, e))?;
    }
    Ok(())
}

fn cmd_check_tensor(args: &CheckArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let tensor: Tensor3 = match args.tensor.as_ref().or(file.tensor.as_ref()) {
        Some(p) => read_json(p)?,
        None => {
            let q = args.q.or(file.q).unwrap_or(2);
            let m = args.m.or(file.m).unwrap_or(4);
            classical_tensor(&FieldCtx::standard(q, m)?)?
        }
    };
    let compatibility = match &args.basis {
        Some(p) => {
            let b: MatrixFq = read_json(p)?;
            Some(tensor.is_compatible(&b)?)
        }
        None => None,
    };
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let dims = tensor.dims();
    let space = (tensor.q() as f64).powi(dims[0] as i32);
    let mode = match args.samples {
        Some(samples) => ScanMode::Sampled { samples, seed },
        None if space <= crate::tensor::EXHAUSTIVE_BOUND as f64 => ScanMode::Exhaustive,
        None => ScanMode::sampled_default(seed),
    };
    let verdict = tensor.is_presemifield(mode)?;
    let report = json!({
        "q": tensor.q(),
        "dims": dims,
        "compatibility": compatibility,
        "presemifield": verdict,
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    write_out(args.out.as_deref(), text.as_bytes(), stdout)
}

fn dist_csv(kind: DistKind, exact: Option<&DimDistribution>, hist: &Histogram) -> Result<Vec<u8>, Failure> {
    let total: u64 = hist.values().sum();
    let tv = exact.map(|e| tv_distance(e, hist));
    let mut values: Vec<usize> = hist.keys().copied().collect();
    if let Some(e) = exact {
        values.extend(e.support.iter().map(|(v, _)| *v));
    }
    values.sort_unstable();
    values.dedup();
    let name = match kind {
        DistKind::Sum => "sum",
        DistKind::Preimage => "preimage",
        DistKind::SyndromeSpan => "syndrome_span",
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(["kind", "value", "exact", "exact_float", "count", "empirical", "tv_distance"]).map_err(io)?;
    for v in values {
        let p = exact.and_then(|e| e.get(v));
        let count = *hist.get(&v).unwrap_or(&0);
        let freq = if total == 0 { 0.0 } else { count as f64 / total as f64 };
        w.write_record([
            name.to_string(),
            v.to_string(),
            p.map(|p| p.exact.to_string()).unwrap_or_default(),
            p.map(|p| format!("{:.9}", p.approx)).unwrap_or_default(),
            count.to_string(),
            format!("{freq:.9}"),
            tv.map(|t| format!("{t:.9}")).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn cmd_dist(args: &DistArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cfg = RunConfig::merge(&args.run, file);
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Failure::Validation(format!("--{name} is required")));
    let (q, m) = (cfg.q, cfg.m);
    let (kind, exact) = match args.kind {
        DistKind::Sum => {
            let a = need(args.a.or(file.a), "a")?;
            let b = need(args.b.or(file.b), "b")?;
            (DimExperiment::Sum { m, a, b, q }, Some(dim_sum_distribution(m, a, b, q)?))
        }
        DistKind::Preimage => {
            let a = need(args.a.or(file.a), "a")?;
            let rd = need(args.rd.or(file.rd), "rd")?;
            (DimExperiment::Preimage { m, a, rd, q }, Some(preimage_dim_distribution(m, a, rd, q)?))
        }
        DistKind::SyndromeSpan => {
            let params = cfg.single()?;
            params.validate()?;
            (DimExperiment::SyndromeSpan { params, mode: cfg.mode()? }, None)
        }
    };
    if let Some(e) = &exact {
        debug_assert_eq!(e.total(), num_traits::One::one());
    }
    let hist = crate::analysis::with_threads(threads_from_env()?, || empirical_dim_experiment(&kind, cfg.trials, cfg.seed))??;
    let bytes = dist_csv(args.kind, exact.as_ref(), &hist)?;
    write_out(cfg.out.as_deref(), &bytes, stdout)
}

/// Runs a parsed command; returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = load_file_config(cli.config.as_deref()).and_then(|file| match &cli.command {
        Command::Gen(a) => cmd_gen(&RunConfig::merge(a, &file), stdout),
        Command::Roundtrip(a) => cmd_roundtrip(&RunConfig::merge(a, &file), a, stdout),
        Command::Dfr(a) => cmd_dfr(&RunConfig::merge(a, &file), stdout),
        Command::CheckTensor(a) => cmd_check_tensor(a, &file, stdout),
        Command::Dist(a) => cmd_dist(a, &file, stdout),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

/// Parses arguments and runs; clap usage errors exit with the validation code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            }
        }
    }
}
