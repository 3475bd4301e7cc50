//! Generalized LRPC codes: T-expansion, trace dual, sampling, encoding, syndromes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{is_prime, ExtElem, FieldCtx};
use crate::linalg::{random_full_rank, random_rank_factors, right_null_space, MatrixFq, Subspace};
use crate::tensor::{Axis, Tensor3};

pub const MAX_RESAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlrpcParams {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GlrpcParams {
    pub fn validate(&self) -> Result<()> {
        let p = |s: String| Err(Error::Param(s));
        if !is_prime(self.q) || self.q >= 1 << 16 {
            return p(format!("q = {} must be a prime below 2^16", self.q));
        }
        if self.m == 0 || self.n == 0 {
            return p("m and n must be positive".into());
        }
        if self.k >= self.n {
            return p(format!("k = {} must be smaller than n = {}", self.k, self.n));
        }
        if self.d == 0 || self.d >= self.m {
            return p(format!("d = {} must satisfy 1 <= d < m = {}", self.d, self.m));
        }
        if self.r > self.m.min(self.n) {
            return p(format!("r = {} exceeds min(m, n)", self.r));
        }
        Ok(())
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    /// `rd <= min(m, n - k)`.
    pub fn in_decoding_regime(&self) -> bool {
        self.r * self.d <= self.m.min(self.n - self.k)
    }
}

/// How the tensor of an instance is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorMode {
    Random,
    Classical,
    Supplied(Tensor3),
}

impl TensorMode {
    pub fn name(&self) -> &'static str {
        match self {
            TensorMode::Random => "random",
            TensorMode::Classical => "classical",
            TensorMode::Supplied(_) => "supplied",
        }
    }
}

impl fmt::Display for TensorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TensorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TensorMode::Random),
            "classical" => Ok(TensorMode::Classical),
            "supplied" => Err(Error::Param("supplied mode needs a tensor file".into())),
            _ => Err(Error::Param(format!("unknown tensor mode {s:?}"))),
        }
    }
}

/// Tensor with third-axis slices `A^0, A^1, ..., A^(m-1)` for the companion matrix `A`.
pub fn classical_tensor(ctx: &FieldCtx) -> Result<Tensor3> {
    let a = ctx.companion_matrix()?;
    let m = a.rows();
    let mut slices = Vec::with_capacity(m);
    let mut p = MatrixFq::identity(ctx.q(), m);
    for _ in 0..m {
        slices.push(p.clone());
        p = p.mul(&a)?;
    }
    Tensor3::from_third_slices(&slices)
}

/// Embeds a parity-check matrix over F_{q^m} (rows of length n) as `(T, H_1..H_{n-k})`.
pub fn classical_embed(ctx: &FieldCtx, h: &[Vec<ExtElem>]) -> Result<(Tensor3, Vec<MatrixFq>)> {
    if ctx.ext_rank(h)? != h.len() {
        return Err(Error::Param("parity-check matrix is rank deficient".into()));
    }
    let t = classical_tensor(ctx)?;
    let hs = h.iter().map(|row| ctx.phi_embed(row)).collect();
    Ok((t, hs))
}

/// Tensor `U` with `phi(x y^T) = phi(x) .U phi(y)`.
pub fn product_tensor_u(ctx: &FieldCtx) -> Result<Tensor3> {
    let a = ctx.companion_matrix()?;
    let db = ctx.dual_basis()?;
    let m = a.rows();
    let q = ctx.q();
    // T_k = (A^(k))^T M^-1 with M^-1 = Delta
    let mut t = Vec::with_capacity(m);
    let mut p = MatrixFq::identity(q, m);
    for _ in 0..m {
        t.push(p.transpose().mul(&db.delta)?);
        p = p.mul(&a)?;
    }
    let dinv = &db.change;
    let mut u = Vec::with_capacity(m);
    for l in 0..m {
        let mut acc = MatrixFq::zeros(q, m, m);
        for (k, tk) in t.iter().enumerate() {
            acc.add_scaled(tk, dinv.get(k, l))?;
        }
        u.push(acc);
    }
    Tensor3::from_third_slices(&u)
}

/// Span of `T_{*,*,i} H_j` over all `i`, `j`, flattened row-major.
pub fn t_expand(h: &[MatrixFq], t: &Tensor3) -> Result<Subspace> {
    Ok(Subspace::from_matrix(&expansion_matrix(h, t)?))
}

fn expansion_matrix(h: &[MatrixFq], t: &Tensor3) -> Result<MatrixFq> {
    if !t.is_square() {
        return Err(Error::Shape("tensor is not square".into()));
    }
    let m = t.dims()[0];
    let first = h.first().ok_or_else(|| Error::Shape("no parity matrices".into()))?;
    let n = first.cols();
    let q = t.q();
    let slices: Vec<MatrixFq> = (0..m).map(|k| t.slice(Axis::Third, k)).collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(m * h.len() * m * n);
    for hj in h {
        if hj.rows() != m || hj.cols() != n {
            return Err(Error::Shape(format!("parity matrix {}x{}, expected {m}x{n}", hj.rows(), hj.cols())));
        }
        for s in &slices {
            data.extend(s.mul(hj)?.into_data());
        }
    }
    MatrixFq::new(q, m * h.len(), m * n, data)
}

/// `(F, X, E = F X)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub f: MatrixFq,
    pub x: MatrixFq,
    pub e: MatrixFq,
}

impl ErrorSample {
    pub fn support(&self) -> Subspace {
        Subspace::from_matrix(&self.f.transpose())
    }
}

pub fn sample_error(q: u32, m: usize, n: usize, r: usize, rng: &mut impl Rng) -> Result<ErrorSample> {
    let (f, x) = random_rank_factors(q, m, n, r, rng)?;
    let e = f.mul(&x)?;
    Ok(ErrorSample { f, x, e })
}

/// A generalized LRPC code `C = (H_T)^perp` with its sampling data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlrpcInstance {
    params: GlrpcParams,
    mode: String,
    tensor: Tensor3,
    support: MatrixFq,
    h: Vec<MatrixFq>,
    mu: Vec<u32>,
    generator: MatrixFq,
    expansion_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct Bundle {
    params: GlrpcParams,
    tensor_mode: String,
    tensor: Tensor3,
    support: MatrixFq,
    h: Vec<MatrixFq>,
    mu: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content_hash: Option<String>,
}

fn mu_index(n: usize, d: usize, i: usize, j: usize, l: usize) -> usize {
    (i * n + j) * d + l
}

/// Rows `(i, l)`, columns `j`, entries `mu_{i,j,l}`.
pub fn mu_matrix(q: u32, n: usize, nk: usize, d: usize, mu: &[u32]) -> MatrixFq {
    MatrixFq::from_fn(q, nk * d, n, |row, j| mu[mu_index(n, d, row / d, j, row % d)] as u64)
}

fn parity_from_mu(support: &MatrixFq, n: usize, nk: usize, mu: &[u32]) -> Result<Vec<MatrixFq>> {
    let q = support.q();
    let d = support.rows();
    let bt = support.transpose();
    (0..nk)
        .map(|i| {
            let coeff = MatrixFq::from_fn(q, d, n, |l, j| mu[mu_index(n, d, i, j, l)] as u64);
            bt.mul(&coeff)
        })
        .collect()
}

fn parity_independent(h: &[MatrixFq]) -> bool {
    let flat: Vec<Vec<u32>> = h.iter().map(|x| x.data().to_vec()).collect();
    let cols = h[0].rows() * h[0].cols();
    MatrixFq::from_rows(h[0].q(), cols, &flat).map(|m| m.rank() == h.len()).unwrap_or(false)
}

impl GlrpcInstance {
    /// Seeds a ChaCha8 generator from `params.seed`.
    pub fn generate(params: &GlrpcParams, mode: &TensorMode) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        sample_instance(params, mode, &mut rng)
    }

    /// Assembles an instance from its parts, recomputing the expansion and the dual.
    pub fn from_parts(
        params: GlrpcParams,
        mode: &str,
        tensor: Tensor3,
        support: MatrixFq,
        mu: Vec<u32>,
    ) -> Result<Self> {
        params.validate()?;
        let (q, m, n, d, nk) = (params.q, params.m, params.n, params.d, params.redundancy());
        if tensor.dims() != [m, m, m] || tensor.q() != q {
            return Err(Error::Shape(format!("tensor {:?}, expected [{m}, {m}, {m}]", tensor.dims())));
        }
        if support.rows() != d || support.cols() != m || support.q() != q {
            return Err(Error::Shape(format!("support basis {}x{}, expected {d}x{m}", support.rows(), support.cols())));
        }
        if support.rank() != d {
            return Err(Error::Dependent);
        }
        if mu.len() != nk * n * d || mu.iter().any(|&x| x >= q) {
            return Err(Error::Shape(format!("{} coefficients, expected {}", mu.len(), nk * n * d)));
        }
        let h = parity_from_mu(&support, n, nk, &mu)?;
        let g = expansion_matrix(&h, &tensor)?;
        let dual = right_null_space(&g);
        let expansion_dim = m * n - dual.dim();
        Ok(GlrpcInstance {
            params,
            mode: mode.to_string(),
            tensor,
            support,
            h,
            mu,
            generator: dual.basis().clone(),
            expansion_dim,
        })
    }

    pub fn params(&self) -> &GlrpcParams {
        &self.params
    }
    pub fn tensor_mode(&self) -> &str {
        &self.mode
    }
    pub fn tensor(&self) -> &Tensor3 {
        &self.tensor
    }
    /// Rows `b_1..b_d`.
    pub fn support_basis(&self) -> &MatrixFq {
        &self.support
    }
    pub fn support_space(&self) -> Subspace {
        Subspace::from_matrix(&self.support)
    }
    pub fn parity(&self) -> &[MatrixFq] {
        &self.h
    }
    pub fn mu(&self, i: usize, j: usize, l: usize) -> u32 {
        self.mu[mu_index(self.params.n, self.params.d, i, j, l)]
    }
    pub fn mu_data(&self) -> &[u32] {
        &self.mu
    }
    pub fn mu_matrix(&self) -> MatrixFq {
        mu_matrix(self.params.q, self.params.n, self.params.redundancy(), self.params.d, &self.mu)
    }
    pub fn expansion_dim(&self) -> usize {
        self.expansion_dim
    }
    pub fn expansion(&self) -> Result<Subspace> {
        t_expand(&self.h, &self.tensor)
    }
    pub fn code_dim(&self) -> usize {
        self.generator.rows()
    }
    /// Generator matrices in canonical order, each `m x n`.
    pub fn gen_basis(&self) -> Vec<MatrixFq> {
        let (m, n) = (self.params.m, self.params.n);
        (0..self.generator.rows())
            .map(|i| MatrixFq::new(self.params.q, m, n, self.generator.row(i).to_vec()).expect("shape"))
            .collect()
    }

    pub fn encode(&self, msg: &[u32]) -> Result<MatrixFq> {
        if msg.len() != self.code_dim() {
            return Err(Error::Shape(format!("message of length {}, code dimension {}", msg.len(), self.code_dim())));
        }
        let flat = self.generator.vec_mul(msg)?;
        MatrixFq::new(self.params.q, self.params.m, self.params.n, flat)
    }

    pub fn random_codeword(&self, rng: &mut impl Rng) -> Result<MatrixFq> {
        let msg: Vec<u32> = (0..self.code_dim()).map(|_| rng.gen_range(0..self.params.q)).collect();
        self.encode(&msg)
    }

    /// `s_i = Y .T H_i` for each parity matrix.
    pub fn syndromes(&self, y: &MatrixFq) -> Result<Vec<Vec<u32>>> {
        if y.rows() != self.params.m || y.cols() != self.params.n {
            return Err(Error::Shape(format!("received word {}x{}", y.rows(), y.cols())));
        }
        self.h.iter().map(|h| self.tensor.t_inner(y, h)).collect()
    }

    pub fn is_codeword(&self, y: &MatrixFq) -> Result<bool> {
        Ok(self.syndromes(y)?.iter().all(|s| s.iter().all(|&x| x == 0)))
    }

    /// Rechecks the structural invariants of the instance.
    pub fn verify(&self) -> Result<()> {
        let (q, m, n, d, nk) = (self.params.q, self.params.m, self.params.n, self.params.d, self.params.redundancy());
        let b = self.support_space();
        for (i, h) in self.h.iter().enumerate() {
            let ht = h.transpose();
            for j in 0..n {
                let col = ht.row(j);
                if !b.contains(col) {
                    return Err(Error::Param(format!("column {j} of H_{i} is outside the support")));
                }
                let coords = self.support.solve(col)?.ok_or(Error::Singular)?;
                for l in 0..d {
                    if coords[l] != self.mu(i, j, l) {
                        return Err(Error::Param(format!("stored coefficient mu[{i}][{j}][{l}] disagrees")));
                    }
                }
            }
        }
        if !parity_independent(&self.h) {
            return Err(Error::Dependent);
        }
        if self.code_dim() != m * n - self.expansion_dim {
            return Err(Error::Param("code dimension is not mn minus expansion dimension".into()));
        }
        for g in self.gen_basis() {
            if !self.is_codeword(&g)? {
                return Err(Error::Param("generator has a nonzero syndrome".into()));
            }
        }
        let _ = (q, nk);
        Ok(())
    }

    fn bundle(&self) -> Bundle {
        Bundle {
            params: self.params,
            tensor_mode: self.mode.clone(),
            tensor: self.tensor.clone(),
            support: self.support.clone(),
            h: self.h.clone(),
            mu: self.mu.clone(),
            content_hash: None,
        }
    }

    /// SHA-256 over the canonical JSON of the bundle without its hash field.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.bundle()).expect("serializable");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        let mut b = self.bundle();
        b.content_hash = Some(self.content_hash());
        serde_json::to_string(&b).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut b: Bundle = serde_json::from_str(s)?;
        if let Some(h) = b.content_hash.take() {
            let bytes = serde_json::to_vec(&b).expect("serializable");
            if h != hex::encode(Sha256::digest(&bytes)) {
                return Err(Error::HashMismatch);
            }
        }
        let inst = GlrpcInstance::from_parts(b.params, &b.tensor_mode, b.tensor, b.support, b.mu)?;
        if inst.h != b.h {
            return Err(Error::Format("parity matrices disagree with the coefficients".into()));
        }
        Ok(inst)
    }
}

/// Samples the support, coefficients and (per `mode`) the tensor.
///
/// The coefficients are redrawn until the parity matrices are independent and
/// the stacked coefficient matrix (rows `(i, l)`, columns `j`) has rank
/// `min(n, (n-k)d)`.
pub fn sample_instance(params: &GlrpcParams, mode: &TensorMode, rng: &mut impl Rng) -> Result<GlrpcInstance> {
    params.validate()?;
    let (q, m, n, d, nk) = (params.q, params.m, params.n, params.d, params.redundancy());
    let tensor = match mode {
        TensorMode::Random => Tensor3::random(q, [m, m, m], rng),
        TensorMode::Classical => classical_tensor(&FieldCtx::standard(q, m)?)?,
        TensorMode::Supplied(t) => t.clone(),
    };
    let support = random_full_rank(q, d, m, rng);
    let target = n.min(nk * d);
    for _ in 0..MAX_RESAMPLES {
        let mu: Vec<u32> = (0..nk * n * d).map(|_| rng.gen_range(0..q)).collect();
        if mu_matrix(q, n, nk, d, &mu).rank() != target {
            continue;
        }
        let h = parity_from_mu(&support, n, nk, &mu)?;
        if !parity_independent(&h) {
            continue;
        }
        return GlrpcInstance::from_parts(*params, mode.name(), tensor, support, mu);
    }
    Err(Error::ResampleExhausted(MAX_RESAMPLES, "parity coefficients".into()))
}
