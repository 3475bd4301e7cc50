//! 3-tensors over F_q, stored row-major in `(i, j, k)` with `k` fastest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, MatrixFq, Subspace};

/// Which index is fixed by a slice or contracted by a directional product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    First,
    Second,
    Third,
}

impl Axis {
    /// 1, 2 or 3.
    pub fn from_index(a: usize) -> Result<Axis> {
        match a {
            1 => Ok(Axis::First),
            2 => Ok(Axis::Second),
            3 => Ok(Axis::Third),
            _ => Err(Error::Param(format!("axis {a} not in 1..=3"))),
        }
    }

    fn pos(self) -> usize {
        match self {
            Axis::First => 0,
            Axis::Second => 1,
            Axis::Third => 2,
        }
    }
}

#[derive(Deserialize)]
struct RawTensor {
    q: u32,
    dims: [usize; 3],
    data: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor3 {
    q: u32,
    dims: [usize; 3],
    data: Vec<u32>,
}

impl TryFrom<RawTensor> for Tensor3 {
    type Error = Error;
    fn try_from(r: RawTensor) -> Result<Self> {
        Tensor3::new(r.q, r.dims, r.data)
    }
}

/// Compatibility of a tensor with a given basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl ScanMode {
    pub fn sampled_default(seed: u64) -> Self {
        ScanMode::Sampled { samples: 10_000, seed }
    }
}

/// Outcome of a rank scan over nonzero directional products.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanVerdict {
    /// Exact when exhaustive; "no counterexample found" when sampled.
    pub holds: bool,
    pub exhaustive: bool,
    pub checked: u64,
    pub witness: Option<Vec<u32>>,
}

pub const EXHAUSTIVE_BOUND: u64 = 1 << 20;

impl Tensor3 {
    pub fn new(q: u32, dims: [usize; 3], data: Vec<u32>) -> Result<Self> {
        if !(2..1 << 16).contains(&q) {
            return Err(Error::Param(format!("modulus {q} out of range")));
        }
        if data.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::Shape(format!("{} entries for dims {:?}", data.len(), dims)));
        }
        if data.iter().any(|&x| x >= q) {
            return Err(Error::Param(format!("entries not reduced mod {q}")));
        }
        Ok(Tensor3 { q, dims, data })
    }

    pub fn zeros(q: u32, dims: [usize; 3]) -> Self {
        Tensor3 { q, dims, data: vec![0; dims[0] * dims[1] * dims[2]] }
    }

    pub fn random(q: u32, dims: [usize; 3], rng: &mut impl Rng) -> Self {
        let data = (0..dims[0] * dims[1] * dims[2]).map(|_| rng.gen_range(0..q)).collect();
        Tensor3 { q, dims, data }
    }

    /// Stacks `n1 x n2` matrices along the third axis.
    pub fn from_third_slices(slices: &[MatrixFq]) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::Shape("no slices".into()))?;
        let (q, n1, n2, n3) = (first.q(), first.rows(), first.cols(), slices.len());
        let mut t = Self::zeros(q, [n1, n2, n3]);
        for (k, s) in slices.iter().enumerate() {
            if s.rows() != n1 || s.cols() != n2 || s.q() != q {
                return Err(Error::Shape("slices differ in shape".into()));
            }
            for i in 0..n1 {
                for j in 0..n2 {
                    t.set(i, j, k, s.get(i, j));
                }
            }
        }
        Ok(t)
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: u32) {
        let x = self.idx(i, j, k);
        self.data[x] = v % self.q;
    }

    pub fn is_square(&self) -> bool {
        self.dims[0] == self.dims[1] && self.dims[1] == self.dims[2]
    }

    fn square_dim(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::Shape(format!("tensor {:?} is not square", self.dims)));
        }
        Ok(self.dims[0])
    }

    /// Matrix with one index fixed; remaining indices in ascending axis order.
    pub fn slice(&self, axis: Axis, index: usize) -> Result<MatrixFq> {
        let p = axis.pos();
        if index >= self.dims[p] {
            return Err(Error::Shape(format!("index {index} out of range for axis of length {}", self.dims[p])));
        }
        let mut e = vec![0; self.dims[p]];
        e[index] = 1;
        self.dir_mult(axis, &e)
    }

    /// `sum_i v_i * slice(axis, i)`.
    pub fn dir_mult(&self, axis: Axis, v: &[u32]) -> Result<MatrixFq> {
        let [n1, n2, n3] = self.dims;
        let q = self.q;
        if v.len() != self.dims[axis.pos()] {
            return Err(Error::Shape(format!("vector of length {} along axis of length {}", v.len(), self.dims[axis.pos()])));
        }
        let out = match axis {
            Axis::First => {
                let mut acc = vec![0; n2 * n3];
                for (i, &c) in v.iter().enumerate() {
                    axpy(q, &mut acc, &self.data[i * n2 * n3..(i + 1) * n2 * n3], c % q);
                }
                MatrixFq::new(q, n2, n3, acc)?
            }
            Axis::Second => {
                let mut acc = vec![0; n1 * n3];
                for i in 0..n1 {
                    let dst = &mut acc[i * n3..(i + 1) * n3];
                    for (j, &c) in v.iter().enumerate() {
                        let s = (i * n2 + j) * n3;
                        axpy(q, dst, &self.data[s..s + n3], c % q);
                    }
                }
                MatrixFq::new(q, n1, n3, acc)?
            }
            Axis::Third => {
                let mut acc = vec![0; n1 * n2];
                for (r, slot) in acc.iter_mut().enumerate() {
                    *slot = crate::linalg::dot(q, &self.data[r * n3..(r + 1) * n3], v);
                }
                MatrixFq::new(q, n1, n2, acc)?
            }
        };
        Ok(out)
    }

    /// `c_k = sum_{i,j} a_i b_j t_{ijk}`, computed as `a T_{*,b,*}`.
    pub fn t_product(&self, a: &[u32], b: &[u32]) -> Result<Vec<u32>> {
        let m = self.square_dim()?;
        if a.len() != m || b.len() != m {
            return Err(Error::Shape(format!("vectors of length {} and {}, tensor of size {m}", a.len(), b.len())));
        }
        self.dir_mult(Axis::Second, b)?.vec_mul(a)
    }

    /// Column-wise sum of T-products of `A` and `B` (both `m x n`).
    pub fn t_inner(&self, a: &MatrixFq, b: &MatrixFq) -> Result<Vec<u32>> {
        let m = self.square_dim()?;
        if a.rows() != m || b.rows() != m || a.cols() != b.cols() {
            return Err(Error::Shape(format!(
                "T-inner product of {}x{} and {}x{} with tensor of size {m}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        let mut acc = vec![0; m];
        let (at, bt) = (a.transpose(), b.transpose());
        for j in 0..a.cols() {
            let c = self.t_product(at.row(j), bt.row(j))?;
            axpy(self.q, &mut acc, &c, 1);
        }
        Ok(acc)
    }

    /// The same product via `(Tr(T_{*,*,k} B A^T))_k`.
    pub fn t_inner_trace(&self, a: &MatrixFq, b: &MatrixFq) -> Result<Vec<u32>> {
        let m = self.square_dim()?;
        if a.rows() != m || b.rows() != m || a.cols() != b.cols() {
            return Err(Error::Shape("T-inner shapes".into()));
        }
        let bat = b.mul(&a.transpose())?;
        (0..m)
            .map(|k| {
                let tk = self.slice(Axis::Third, k)?;
                let p = tk.mul(&bat)?;
                Ok((0..m).fold(0, |s, i| (s + p.get(i, i)) % self.q))
            })
            .collect()
    }

    /// Checks that every `T_{*,b_j,*}` is invertible for the given basis rows.
    pub fn is_compatible(&self, basis: &MatrixFq) -> Result<Compatibility> {
        let m = self.square_dim()?;
        if basis.cols() != m {
            return Err(Error::Shape(format!("basis vectors of length {}, tensor of size {m}", basis.cols())));
        }
        if basis.rank() != basis.rows() {
            return Err(Error::Dependent);
        }
        let ranks: Vec<usize> = (0..basis.rows())
            .map(|j| self.dir_mult(Axis::Second, basis.row(j)).map(|s| s.rank()))
            .collect::<Result<_>>()?;
        Ok(Compatibility { compatible: ranks.iter().all(|&r| r == m), ranks })
    }

    /// Whether every nonzero directional product along `axis` is invertible.
    pub fn scan_slices(&self, axis: Axis, mode: ScanMode) -> Result<ScanVerdict> {
        let m = self.square_dim()?;
        let q = self.q as u64;
        let check = |v: &[u32]| -> Result<bool> { Ok(self.dir_mult(axis, v)?.rank() == m) };
        match mode {
            ScanMode::Exhaustive => {
                let total = q.checked_pow(m as u32).unwrap_or(u64::MAX);
                if total > EXHAUSTIVE_BOUND {
                    return Err(Error::SearchTooLarge(total));
                }
                for k in 1..total {
                    let mut t = k;
                    let v: Vec<u32> = (0..m)
                        .map(|_| {
                            let d = (t % q) as u32;
                            t /= q;
                            d
                        })
                        .collect();
                    if !check(&v)? {
                        return Ok(ScanVerdict { holds: false, exhaustive: true, checked: k, witness: Some(v) });
                    }
                }
                Ok(ScanVerdict { holds: true, exhaustive: true, checked: total - 1, witness: None })
            }
            ScanMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut checked = 0;
                while checked < samples {
                    let v: Vec<u32> = (0..m).map(|_| rng.gen_range(0..self.q)).collect();
                    if v.iter().all(|&x| x == 0) {
                        continue;
                    }
                    checked += 1;
                    if !check(&v)? {
                        return Ok(ScanVerdict { holds: false, exhaustive: false, checked, witness: Some(v) });
                    }
                }
                Ok(ScanVerdict { holds: true, exhaustive: false, checked, witness: None })
            }
        }
    }

    /// `T_{*,b,*}` invertible for every nonzero `b`.
    pub fn is_presemifield(&self, mode: ScanMode) -> Result<ScanVerdict> {
        self.scan_slices(Axis::Second, mode)
    }

    /// `U[x] = T[x_{s0}, x_{s1}, x_{s2}]` for a permutation `s` of `(0, 1, 2)`.
    pub fn permute(&self, sigma: [usize; 3]) -> Result<Tensor3> {
        let mut seen = [false; 3];
        for &s in &sigma {
            if s > 2 || seen[s] {
                return Err(Error::Param(format!("{sigma:?} is not a permutation of (0, 1, 2)")));
            }
            seen[s] = true;
        }
        let mut dims = [0; 3];
        for a in 0..3 {
            dims[sigma[a]] = self.dims[a];
        }
        let mut u = Tensor3::zeros(self.q, dims);
        for x0 in 0..dims[0] {
            for x1 in 0..dims[1] {
                for x2 in 0..dims[2] {
                    let x = [x0, x1, x2];
                    u.set(x0, x1, x2, self.get(x[sigma[0]], x[sigma[1]], x[sigma[2]]));
                }
            }
        }
        Ok(u)
    }

    /// `new[.., i, ..] = sum_u a[i][u] * self[.., u, ..]` along one axis.
    pub fn mode_product(&self, axis: Axis, a: &MatrixFq) -> Result<Tensor3> {
        let p = axis.pos();
        if a.cols() != self.dims[p] {
            return Err(Error::Shape(format!("{} columns for axis of length {}", a.cols(), self.dims[p])));
        }
        let mut dims = self.dims;
        dims[p] = a.rows();
        let mut u = Tensor3::zeros(self.q, dims);
        for x0 in 0..dims[0] {
            for x1 in 0..dims[1] {
                for x2 in 0..dims[2] {
                    let x = [x0, x1, x2];
                    let mut acc = 0u64;
                    for s in 0..self.dims[p] {
                        let mut y = x;
                        y[p] = s;
                        acc += (a.get(x[p], s) as u64) * (self.get(y[0], y[1], y[2]) as u64);
                    }
                    u.set(x0, x1, x2, (acc % self.q as u64) as u32);
                }
            }
        }
        Ok(u)
    }

    /// `u_{ijk} = sum a_{iu} b_{jv} c_{kw} t_{uvw}` for invertible `A`, `B`, `C`.
    pub fn isotope(&self, a: &MatrixFq, b: &MatrixFq, c: &MatrixFq) -> Result<Tensor3> {
        for x in [a, b, c] {
            if !x.is_invertible() {
                return Err(Error::Singular);
            }
        }
        self.mode_product(Axis::First, a)?
            .mode_product(Axis::Second, b)?
            .mode_product(Axis::Third, c)
    }

    /// Span of `{a .T b : a in A, b in B}`.
    pub fn product_space(&self, a: &Subspace, b: &Subspace) -> Result<Subspace> {
        let m = self.square_dim()?;
        let mut gens = Vec::new();
        for bj in b.basis_vectors() {
            let tb = self.dir_mult(Axis::Second, &bj)?;
            for ai in a.basis_vectors() {
                gens.push(tb.vec_mul(&ai)?);
            }
        }
        Subspace::span(self.q, m, &gens)
    }
}
