//! Error-support recovery, coefficient solving and the decode pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glrpc::GlrpcInstance;
use crate::linalg::{MatrixFq, Subspace};
use crate::tensor::Axis;

/// Largest solution set that is enumerated explicitly.
pub const ENUMERATION_CAP: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Basic,
    Improved,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Basic => "basic",
            Algorithm::Improved => "improved",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Algorithm::Basic),
            "improved" => Ok(Algorithm::Improved),
            _ => Err(Error::Param(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Strict mode fails unless the syndrome space has dimension exactly `rd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeStatus {
    Unique,
    Ambiguous { dim: usize },
    SupportFailure,
    SystemInconsistent,
}

impl DecodeStatus {
    pub fn name(&self) -> &'static str {
        match self {
            DecodeStatus::Unique => "unique",
            DecodeStatus::Ambiguous { .. } => "ambiguous",
            DecodeStatus::SupportFailure => "support_failure",
            DecodeStatus::SystemInconsistent => "system_inconsistent",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub syndrome_dim: usize,
    pub expected_dim: usize,
    /// Dimension of each per-basis-vector preimage of the syndrome space.
    pub preimage_dims: Vec<usize>,
    /// Dimension of the running intersection after each basis vector.
    pub intersection_dims: Vec<usize>,
    pub support_dim: Option<usize>,
    /// Recovered support larger than the target rank.
    pub oversized_support: bool,
    pub z_rank: Option<usize>,
    pub system_rank: Option<usize>,
    pub equations: Option<usize>,
    pub unknowns: Option<usize>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    pub recovered_support: Option<Subspace>,
    pub recovered_e: Option<MatrixFq>,
    pub recovered_codeword: Option<MatrixFq>,
    /// Candidate errors when ambiguous and small enough to list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<MatrixFq>,
    pub diagnostics: Diagnostics,
}

impl DecodeOutcome {
    fn failure(status: DecodeStatus, diagnostics: Diagnostics) -> Self {
        DecodeOutcome {
            status,
            recovered_support: None,
            recovered_e: None,
            recovered_codeword: None,
            candidates: Vec::new(),
            diagnostics,
        }
    }

    pub fn is_unique(&self) -> bool {
        self.status == DecodeStatus::Unique
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Support recovery result: the subspace, or a support failure, plus diagnostics.
#[derive(Debug, Clone)]
pub struct SupportRecovery {
    pub support: Option<Subspace>,
    pub diagnostics: Diagnostics,
}

fn syndrome_space(inst: &GlrpcInstance, y: &MatrixFq) -> Result<Subspace> {
    let s = inst.syndromes(y)?;
    Subspace::span(inst.params().q, inst.params().m, &s)
}

fn start(inst: &GlrpcInstance, s: &Subspace, strict: Strictness) -> (Diagnostics, bool) {
    let p = inst.params();
    let diag = Diagnostics { syndrome_dim: s.dim(), expected_dim: p.r * p.d, ..Default::default() };
    let proceed = match strict {
        Strictness::Strict => s.dim() == p.r * p.d,
        Strictness::Lenient => true,
    };
    (diag, proceed)
}

fn b_slices(inst: &GlrpcInstance) -> Result<Vec<MatrixFq>> {
    let b = inst.support_basis();
    (0..b.rows()).map(|l| inst.tensor().dir_mult(Axis::Second, b.row(l))).collect()
}

/// Intersection of `S (T_{*,b_j,*})^-1` over the basis of the support space.
pub fn recover_support_basic(inst: &GlrpcInstance, y: &MatrixFq, strict: Strictness) -> Result<SupportRecovery> {
    let s = syndrome_space(inst, y)?;
    let c = inst.tensor().is_compatible(inst.support_basis())?;
    if !c.compatible {
        return Err(Error::Incompatible { ranks: c.ranks });
    }
    let (mut diag, proceed) = start(inst, &s, strict);
    if !proceed {
        diag.reason = Some("syndrome space dimension differs from rd".into());
        return Ok(SupportRecovery { support: None, diagnostics: diag });
    }
    let mut acc = Subspace::full(inst.params().q, inst.params().m);
    for t in b_slices(inst)? {
        let z = s.image_under(&t.inverse()?)?;
        diag.preimage_dims.push(z.dim());
        acc = acc.intersect(&z)?;
        diag.intersection_dims.push(acc.dim());
    }
    diag.support_dim = Some(acc.dim());
    Ok(SupportRecovery { support: Some(acc), diagnostics: diag })
}

/// `{f : f T = v for some v in S}` as image intersection, per-vector solves and the kernel.
pub fn inverse_image(t: &MatrixFq, s: &Subspace) -> Result<Subspace> {
    let im = t.image().intersect(s)?;
    let mut z = t.kernel();
    let mut particular = Vec::with_capacity(im.dim());
    for v in im.basis_vectors() {
        particular.push(t.solve(&v)?.ok_or(Error::Singular)?);
    }
    z = z.sum(&Subspace::span(t.q(), t.rows(), &particular)?)?;
    Ok(z)
}

/// Intersection of the full preimages `T_{b_i}^-1(S)`; no invertibility needed.
pub fn recover_support_improved(inst: &GlrpcInstance, y: &MatrixFq, strict: Strictness) -> Result<SupportRecovery> {
    let s = syndrome_space(inst, y)?;
    let (mut diag, proceed) = start(inst, &s, strict);
    if !proceed {
        diag.reason = Some("syndrome space dimension differs from rd".into());
        return Ok(SupportRecovery { support: None, diagnostics: diag });
    }
    let mut acc = Subspace::full(inst.params().q, inst.params().m);
    for t in b_slices(inst)? {
        let z = inverse_image(&t, &s)?;
        diag.preimage_dims.push(z.dim());
        acc = acc.intersect(&z)?;
        diag.intersection_dims.push(acc.dim());
    }
    diag.support_dim = Some(acc.dim());
    Ok(SupportRecovery { support: Some(acc), diagnostics: diag })
}

/// Linear system `x M = rhs` together with its provenance sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    /// Rows index unknowns `x_{a,j}` (as `a n + j`), columns index equations.
    pub matrix: MatrixFq,
    pub rhs: Vec<u32>,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.matrix.rows()
    }
    pub fn equations(&self) -> usize {
        self.matrix.cols()
    }
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
    /// Particular solution and the homogeneous solution space.
    pub fn solve(&self) -> Result<Option<(Vec<u32>, Subspace)>> {
        Ok(self.matrix.solve(&self.rhs)?.map(|x| (x, self.matrix.kernel())))
    }
}

/// `z_{a,l} = f_a .T b_l`, rows ordered `a d + l`.
pub fn z_generators(inst: &GlrpcInstance, f: &MatrixFq) -> Result<MatrixFq> {
    let (q, m, d) = (inst.params().q, inst.params().m, inst.params().d);
    if f.rows() != m {
        return Err(Error::Shape(format!("support basis with {} rows, expected {m}", f.rows())));
    }
    let slices = b_slices(inst)?;
    let ft = f.transpose();
    let mut rows = Vec::with_capacity(f.cols() * d);
    for a in 0..f.cols() {
        for s in &slices {
            rows.push(s.vec_mul(ft.row(a))?);
        }
    }
    MatrixFq::from_rows(q, m, &rows)
}

fn structured_matrix(inst: &GlrpcInstance, rp: usize) -> MatrixFq {
    let p = inst.params();
    let (n, d, nk) = (p.n, p.d, p.redundancy());
    let mut out = MatrixFq::zeros(p.q, rp * n, nk * rp * d);
    for a in 0..rp {
        for j in 0..n {
            for i in 0..nk {
                for l in 0..d {
                    out.set(a * n + j, (i * rp + a) * d + l, inst.mu(i, j, l));
                }
            }
        }
    }
    out
}

/// System `sum_j x_{a,j} mu_{i,j,l} = eta_{i,a,l}`, or `None` if some syndrome is outside span(z).
///
/// Dependent generators: `Err(Dependent)` in strict mode, any coordinate choice otherwise.
pub fn structured_system(
    inst: &GlrpcInstance,
    syndromes: &[Vec<u32>],
    f: &MatrixFq,
    strict: Strictness,
) -> Result<Option<LinearSystem>> {
    let p = inst.params();
    let (d, rp) = (p.d, f.cols());
    let z = z_generators(inst, f)?;
    if strict == Strictness::Strict && z.rank() != rp * d {
        return Err(Error::Dependent);
    }
    let mut rhs = vec![0; p.redundancy() * rp * d];
    for (i, s) in syndromes.iter().enumerate() {
        let Some(eta) = z.solve(s)? else { return Ok(None) };
        rhs[i * rp * d..(i + 1) * rp * d].copy_from_slice(&eta);
    }
    Ok(Some(LinearSystem { matrix: structured_matrix(inst, rp), rhs }))
}

/// Direct system `s_{i,k} = Tr(T_{*,*,k} H_i X^T F^T)` in the unknowns of `X`.
pub fn trace_system(inst: &GlrpcInstance, syndromes: &[Vec<u32>], f: &MatrixFq) -> Result<LinearSystem> {
    let p = inst.params();
    let (q, m, n, nk, rp) = (p.q, p.m, p.n, p.redundancy(), f.cols());
    let ft = f.transpose();
    let hts: Vec<MatrixFq> = inst.parity().iter().map(|h| h.transpose()).collect();
    let mut matrix = MatrixFq::zeros(q, rp * n, nk * m);
    for a in 0..rp {
        for j in 0..n {
            let row = matrix.row_mut(a * n + j);
            for (i, ht) in hts.iter().enumerate() {
                let c = inst.tensor().t_product(ft.row(a), ht.row(j))?;
                row[i * m..(i + 1) * m].copy_from_slice(&c);
            }
        }
    }
    let rhs = syndromes.concat();
    Ok(LinearSystem { matrix, rhs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepTwo {
    Unique(MatrixFq),
    Ambiguous { dim: usize, particular: MatrixFq, kernel: Subspace, candidates: Vec<MatrixFq> },
    Inconsistent(String),
}

#[derive(Debug, Clone)]
pub struct StepTwoReport {
    pub result: StepTwo,
    pub z_rank: usize,
    pub system_rank: Option<usize>,
    pub equations: usize,
    pub unknowns: usize,
}

/// Solves for `X` with `E = F X` from the syndromes and a support basis `F` (columns).
pub fn solve_error(inst: &GlrpcInstance, syndromes: &[Vec<u32>], f: &MatrixFq, strict: Strictness) -> Result<StepTwoReport> {
    let p = inst.params();
    let (q, n, rp) = (p.q, p.n, f.cols());
    if rp == 0 {
        return Err(Error::Param("empty support basis".into()));
    }
    if f.rank() != rp {
        return Err(Error::Dependent);
    }
    let z_rank = z_generators(inst, f)?.rank();
    let equations = p.redundancy() * rp * p.d;
    let unknowns = n * rp;
    let report = |result, system_rank| StepTwoReport { result, z_rank, system_rank, equations, unknowns };
    let sys = match structured_system(inst, syndromes, f, strict) {
        Err(Error::Dependent) => return Ok(report(StepTwo::Inconsistent("z-generators are dependent".into()), None)),
        Err(e) => return Err(e),
        Ok(None) => return Ok(report(StepTwo::Inconsistent("syndrome outside span of z-generators".into()), None)),
        Ok(Some(s)) => s,
    };
    let rank = sys.rank();
    let Some((x, kernel)) = sys.solve()? else {
        return Ok(report(StepTwo::Inconsistent("coefficient system is inconsistent".into()), Some(rank)));
    };
    let to_mat = |v: Vec<u32>| MatrixFq::new(q, rp, n, v);
    let particular = to_mat(x.clone())?;
    if kernel.dim() == 0 {
        return Ok(report(StepTwo::Unique(particular), Some(rank)));
    }
    let dim = kernel.dim();
    let mut candidates = Vec::new();
    let count = (q as u64).checked_pow(dim as u32);
    if let Some(count) = count.filter(|&c| c <= ENUMERATION_CAP) {
        let basis = kernel.basis_vectors();
        for idx in 0..count {
            let mut v = x.clone();
            let mut t = idx;
            for b in &basis {
                let c = (t % q as u64) as u32;
                t /= q as u64;
                crate::linalg::axpy(q, &mut v, b, c);
            }
            candidates.push(f.mul(&to_mat(v)?)?);
        }
    }
    Ok(report(StepTwo::Ambiguous { dim, particular, kernel, candidates }, Some(rank)))
}

/// Support recovery followed by coefficient solving; `unique` only when `Y - E` is a codeword.
pub fn decode(inst: &GlrpcInstance, y: &MatrixFq, algorithm: Algorithm, strict: Strictness) -> Result<DecodeOutcome> {
    let p = *inst.params();
    let syndromes = inst.syndromes(y)?;
    let rec = match algorithm {
        Algorithm::Basic => recover_support_basic(inst, y, strict)?,
        Algorithm::Improved => recover_support_improved(inst, y, strict)?,
    };
    let mut diag = rec.diagnostics;
    let Some(support) = rec.support else {
        return Ok(DecodeOutcome::failure(DecodeStatus::SupportFailure, diag));
    };
    let rp = support.dim();
    diag.oversized_support = rp > p.r;
    let mut out = DecodeOutcome::failure(DecodeStatus::SupportFailure, diag);
    out.recovered_support = Some(support.clone());
    if rp == 0 {
        if syndromes.iter().all(|s| s.iter().all(|&x| x == 0)) {
            out.status = DecodeStatus::Unique;
            out.recovered_e = Some(MatrixFq::zeros(p.q, p.m, p.n));
            out.recovered_codeword = Some(y.clone());
        } else {
            out.diagnostics.reason = Some("recovered support is zero".into());
        }
        return Ok(out);
    }
    let f = support.basis().transpose();
    let step = solve_error(inst, &syndromes, &f, strict)?;
    out.diagnostics.z_rank = Some(step.z_rank);
    out.diagnostics.system_rank = step.system_rank;
    out.diagnostics.equations = Some(step.equations);
    out.diagnostics.unknowns = Some(step.unknowns);
    match step.result {
        StepTwo::Unique(x) => {
            let e = f.mul(&x)?;
            let c = y.sub(&e)?;
            if inst.is_codeword(&c)? {
                out.status = DecodeStatus::Unique;
                out.recovered_e = Some(e);
                out.recovered_codeword = Some(c);
            } else {
                out.status = DecodeStatus::SystemInconsistent;
                out.diagnostics.reason = Some("residual has nonzero syndromes".into());
            }
        }
        StepTwo::Ambiguous { dim, candidates, .. } => {
            out.status = DecodeStatus::Ambiguous { dim };
            out.candidates = candidates;
        }
        StepTwo::Inconsistent(reason) => {
            out.status = DecodeStatus::SystemInconsistent;
            out.diagnostics.reason = Some(reason);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glrpc::{sample_error, sample_instance, GlrpcParams, TensorMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> GlrpcParams {
        GlrpcParams { q: 2, m: 12, n: 10, k: 5, d: 2, r: 2, seed: 0 }
    }

    #[test]
    fn zero_error() {
        let inst = GlrpcInstance::generate(&params(), &TensorMode::Classical).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = inst.random_codeword(&mut rng).unwrap();
        let strict = decode(&inst, &c, Algorithm::Basic, Strictness::Strict).unwrap();
        assert_eq!(strict.status, DecodeStatus::SupportFailure);
        let lenient = decode(&inst, &c, Algorithm::Basic, Strictness::Lenient).unwrap();
        assert_eq!(lenient.status, DecodeStatus::Unique);
        assert!(lenient.recovered_e.unwrap().is_zero());
        assert_eq!(lenient.recovered_codeword.unwrap(), c);
    }

    #[test]
    fn planted_x_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut done = 0;
        while done < 10 {
            let inst = sample_instance(&params(), &TensorMode::Random, &mut rng).unwrap();
            let err = sample_error(2, 12, 10, 2, &mut rng).unwrap();
            if z_generators(&inst, &err.f).unwrap().rank() != 4 {
                continue;
            }
            let s = inst.syndromes(&err.e).unwrap();
            let rep = solve_error(&inst, &s, &err.f, Strictness::Strict).unwrap();
            assert_eq!(rep.equations, 5 * 2 * 2);
            assert_eq!(rep.unknowns, 20);
            assert_eq!(rep.result, StepTwo::Unique(err.x.clone()));
            done += 1;
        }
    }

    #[test]
    fn zero_syndromes_rank_one_support() {
        let inst = GlrpcInstance::generate(&params(), &TensorMode::Classical).unwrap();
        let s = vec![vec![0; 12]; 5];
        let f = MatrixFq::from_fn(2, 12, 1, |i, _| (i == 3) as u64);
        let rep = solve_error(&inst, &s, &f, Strictness::Strict).unwrap();
        assert_eq!(rep.result, StepTwo::Unique(MatrixFq::zeros(2, 1, 10)));
    }

    #[test]
    fn basic_and_improved_agree_on_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = sample_instance(&params(), &TensorMode::Classical, &mut rng).unwrap();
            let err = sample_error(2, 12, 10, 2, &mut rng).unwrap();
            let y = inst.random_codeword(&mut rng).unwrap().add(&err.e).unwrap();
            let a = recover_support_basic(&inst, &y, Strictness::Lenient).unwrap();
            let b = recover_support_improved(&inst, &y, Strictness::Lenient).unwrap();
            assert_eq!(a.support, b.support);
        }
    }

    #[test]
    fn incompatible_is_precondition_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = crate::tensor::Tensor3::zeros(2, [12, 12, 12]);
        let inst = sample_instance(&params(), &TensorMode::Supplied(t), &mut rng).unwrap();
        let y = MatrixFq::zeros(2, 12, 10);
        assert!(matches!(recover_support_basic(&inst, &y, Strictness::Lenient), Err(Error::Incompatible { .. })));
    }

    #[test]
    fn inverse_image_matches_preimage() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let t = crate::linalg::random_matrix_of_rank(2, 10, 10, 7, &mut rng).unwrap();
            let s = Subspace::random(2, 10, 4, &mut rng).unwrap();
            assert_eq!(inverse_image(&t, &s).unwrap(), s.preimage(&t).unwrap());
        }
    }
}
