use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::formulas::{dfr_bound, DimDistribution};
use crate::decoder::{decode, Algorithm, DecodeStatus, Strictness};
use crate::error::{Error, Result};
use crate::glrpc::{sample_error, sample_instance, GlrpcParams, TensorMode};
use crate::linalg::{random_matrix_of_rank, random_subspace, Subspace};

/// The splitmix64 output function applied to `x + 0x9E3779B97F4A7C15`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(master ^ splitmix64(index))`.
pub fn mix64(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(master, index))
}

/// Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub const WILSON_Z: f64 = 1.96;

/// Runs `f` on a pool with the given number of workers (`None`: rayon default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Param(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DfrConfig {
    pub params: GlrpcParams,
    #[serde(serialize_with = "ser_mode")]
    pub tensor_mode: TensorMode,
    pub algorithm: Algorithm,
    pub strictness: Strictness,
    pub trials: u64,
    pub master_seed: u64,
}

fn ser_mode<S: serde::Serializer>(m: &TensorMode, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(m.name())
}

/// Classification of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub status: DecodeStatus,
    /// Unique decode whose error differs from the planted one.
    pub miscorrection: bool,
    /// Basic decoder rejected the instance as incompatible.
    pub incompatible: bool,
    pub syndrome_dim: usize,
    /// `Some(contained)` when the syndrome space has dimension `rd` and a support was recovered.
    pub containment: Option<bool>,
}

impl TrialRecord {
    pub fn success(&self) -> bool {
        self.status == DecodeStatus::Unique && !self.miscorrection
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfrReport {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub tensor_mode: String,
    pub algorithm: Algorithm,
    pub strictness: Strictness,
    pub master_seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub ambiguous: u64,
    /// Includes incompatible instances under the basic decoder.
    pub support_failures: u64,
    /// Includes miscorrections.
    pub system_failures: u64,
    pub miscorrections: u64,
    pub incompatible: u64,
    pub syndrome_full_rank: u64,
    pub containment_checked: u64,
    pub containment_violations: u64,
    pub success_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub bound: f64,
    pub bound_exact: String,
    pub bound_degenerate: bool,
}

pub const CSV_HEADER: [&str; 17] = [
    "q",
    "m",
    "n",
    "k",
    "d",
    "r",
    "tensor_mode",
    "algorithm",
    "trials",
    "successes",
    "ambiguous",
    "support_failures",
    "system_failures",
    "success_rate",
    "wilson_lo",
    "wilson_hi",
    "bound",
];

impl DfrReport {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.d.to_string(),
            self.r.to_string(),
            self.tensor_mode.clone(),
            self.algorithm.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            self.ambiguous.to_string(),
            self.support_failures.to_string(),
            self.system_failures.to_string(),
            format!("{:.6}", self.success_rate),
            format!("{:.6}", self.wilson_lo),
            format!("{:.6}", self.wilson_hi),
            format!("{:.6}", self.bound),
        ]
    }

    pub fn half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

/// Writes reports as CSV with the fixed header.
pub fn write_csv<W: std::io::Write>(w: W, reports: &[DfrReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in reports {
        out.write_record(r.csv_record())?;
    }
    out.flush()?;
    Ok(())
}

/// One seeded trial: fresh instance, random message, rank-`r` error, decode.
pub fn run_trial(cfg: &DfrConfig, index: u64) -> Result<TrialRecord> {
    let p = &cfg.params;
    let mut rng = trial_rng(cfg.master_seed, index);
    let inst = sample_instance(p, &cfg.tensor_mode, &mut rng)?;
    let c = inst.random_codeword(&mut rng)?;
    let err = sample_error(p.q, p.m, p.n, p.r, &mut rng)?;
    let y = c.add(&err.e)?;
    let out = match decode(&inst, &y, cfg.algorithm, cfg.strictness) {
        Err(Error::Incompatible { .. }) => {
            let s = inst.syndromes(&y)?;
            let dim = Subspace::span(p.q, p.m, &s)?.dim();
            return Ok(TrialRecord {
                status: DecodeStatus::SupportFailure,
                miscorrection: false,
                incompatible: true,
                syndrome_dim: dim,
                containment: None,
            });
        }
        other => other?,
    };
    let miscorrection = out.status == DecodeStatus::Unique && out.recovered_e.as_ref() != Some(&err.e);
    let containment = match (&out.recovered_support, out.diagnostics.syndrome_dim == p.r * p.d) {
        (Some(rec), true) => Some(err.support().is_subspace_of(rec)),
        _ => None,
    };
    Ok(TrialRecord {
        status: out.status,
        miscorrection,
        incompatible: false,
        syndrome_dim: out.diagnostics.syndrome_dim,
        containment,
    })
}

/// Per-trial records in trial order; parallel over the current rayon pool.
pub fn run_trials(cfg: &DfrConfig) -> Result<Vec<TrialRecord>> {
    (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect()
}

pub fn summarize(cfg: &DfrConfig, records: &[TrialRecord]) -> DfrReport {
    let p = &cfg.params;
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
    let successes = count(&|r| r.success());
    let trials = records.len() as u64;
    let (lo, hi) = wilson_interval(successes, trials, WILSON_Z);
    let bound = dfr_bound(p);
    DfrReport {
        q: p.q,
        m: p.m,
        n: p.n,
        k: p.k,
        d: p.d,
        r: p.r,
        tensor_mode: cfg.tensor_mode.name().to_string(),
        algorithm: cfg.algorithm,
        strictness: cfg.strictness,
        master_seed: cfg.master_seed,
        trials,
        successes,
        ambiguous: count(&|r| matches!(r.status, DecodeStatus::Ambiguous { .. })),
        support_failures: count(&|r| r.status == DecodeStatus::SupportFailure),
        system_failures: count(&|r| r.status == DecodeStatus::SystemInconsistent || r.miscorrection),
        miscorrections: count(&|r| r.miscorrection),
        incompatible: count(&|r| r.incompatible),
        syndrome_full_rank: count(&|r| r.syndrome_dim == p.r * p.d),
        containment_checked: count(&|r| r.containment.is_some()),
        containment_violations: count(&|r| r.containment == Some(false)),
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        wilson_lo: lo,
        wilson_hi: hi,
        bound: bound.bound.approx,
        bound_exact: bound.bound.exact.to_string(),
        bound_degenerate: bound.degenerate,
    }
}

/// Seeded Monte Carlo estimate of the decoding success rate.
pub fn monte_carlo_dfr(cfg: &DfrConfig, threads: Option<usize>) -> Result<DfrReport> {
    cfg.params.validate()?;
    if cfg.trials == 0 {
        return Err(Error::Param("trials must be at least 1".into()));
    }
    let records = with_threads(threads, || run_trials(cfg))??;
    Ok(summarize(cfg, &records))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DimExperiment {
    /// `t = dim(A + B) - a` for uniform `A`, `B` of dimensions `a`, `b`.
    Sum { m: usize, a: usize, b: usize, q: u32 },
    /// `eps = dim(L^-1(S)) - rd` for a uniform rank-`a` map `L` and uniform `rd`-space `S`.
    Preimage { m: usize, a: usize, rd: usize, q: u32 },
    /// `dim(S)` of the syndrome space for planted rank-`r` errors.
    SyndromeSpan { params: GlrpcParams, mode: TensorMode },
}

pub type Histogram = BTreeMap<usize, u64>;

fn dim_sample(kind: &DimExperiment, seed: u64, i: u64) -> Result<usize> {
    let mut rng = trial_rng(seed, i);
    match kind {
        DimExperiment::Sum { m, a, b, q } => {
            let sa = random_subspace(*q, *m, *a, &mut rng)?;
            let sb = random_subspace(*q, *m, *b, &mut rng)?;
            Ok(sa.sum(&sb)?.dim() - a)
        }
        DimExperiment::Preimage { m, a, rd, q } => {
            let l = random_matrix_of_rank(*q, *m, *m, *a, &mut rng)?;
            let s = random_subspace(*q, *m, *rd, &mut rng)?;
            Ok(s.preimage(&l)?.dim() - rd)
        }
        DimExperiment::SyndromeSpan { params, mode } => {
            let inst = sample_instance(params, mode, &mut rng)?;
            let e = sample_error(params.q, params.m, params.n, params.r, &mut rng)?;
            Ok(Subspace::span(params.q, params.m, &inst.syndromes(&e.e)?)?.dim())
        }
    }
}

/// Seeded histogram of observed dimensions.
pub fn empirical_dim_experiment(kind: &DimExperiment, trials: u64, seed: u64) -> Result<Histogram> {
    let dims: Vec<usize> = (0..trials).into_par_iter().map(|i| dim_sample(kind, seed, i)).collect::<Result<_>>()?;
    let mut h = Histogram::new();
    for d in dims {
        *h.entry(d).or_insert(0) += 1;
    }
    Ok(h)
}

/// `1/2 sum |p - f|` between a distribution and a histogram's frequencies.
pub fn tv_distance(exact: &DimDistribution, hist: &Histogram) -> f64 {
    let total: u64 = hist.values().sum();
    let freq = |v: usize| if total == 0 { 0.0 } else { *hist.get(&v).unwrap_or(&0) as f64 / total as f64 };
    let mut keys: Vec<usize> = exact.support.iter().map(|(v, _)| *v).collect();
    keys.extend(hist.keys().copied());
    keys.sort_unstable();
    keys.dedup();
    keys.iter().map(|&v| (exact.prob(v) - freq(v)).abs()).sum::<f64>() / 2.0
}
