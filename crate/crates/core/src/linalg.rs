//! Dense linear algebra and subspaces over a prime field F_q.
//!
//! Vectors are rows. A matrix `L` acts as `x -> xL`, so `kernel(L)` is the
//! set of rows `x` with `xL = 0` and the image of `L` is its row space.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `dst += c * src` over F_q.
#[inline]
pub(crate) fn axpy(q: u32, dst: &mut [u32], src: &[u32], c: u32) {
    if c == 0 {
        return;
    }
    if q == 2 {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= *s;
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = (*d + c * *s) % q;
        }
    }
}

#[inline]
fn scale(q: u32, row: &mut [u32], c: u32) {
    if c == 1 {
        return;
    }
    for x in row.iter_mut() {
        *x = *x * c % q;
    }
}

pub(crate) fn inv_mod(q: u32, a: u32) -> u32 {
    // q is prime, so a^(q-2) is the inverse
    let (mut base, mut e, mut acc) = (a as u64 % q as u64, q as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        e >>= 1;
    }
    acc as u32
}

#[derive(Debug, Clone, Deserialize)]
struct RawMatrix {
    q: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Dense row-major matrix over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct MatrixFq {
    q: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl TryFrom<RawMatrix> for MatrixFq {
    type Error = Error;
    fn try_from(r: RawMatrix) -> Result<Self> {
        MatrixFq::new(r.q, r.rows, r.cols, r.data)
    }
}

/// Result of row reduction.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: MatrixFq,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl MatrixFq {
    pub fn new(q: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if !(2..1 << 16).contains(&q) {
            return Err(Error::Param(format!("modulus {q} out of range")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|&&x| x >= q) {
            return Err(Error::Param(format!("entry {x} not reduced mod {q}")));
        }
        Ok(MatrixFq { q, rows, cols, data })
    }

    pub fn zeros(q: u32, rows: usize, cols: usize) -> Self {
        MatrixFq { q, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(q: u32, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Entries are reduced mod q.
    pub fn from_fn(q: u32, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push((f(i, j) % q as u64) as u32);
            }
        }
        MatrixFq { q, rows, cols, data }
    }

    pub fn from_rows(q: u32, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape(format!("row of length {}, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(q, rows.len(), cols, data)
    }

    pub fn random(q: u32, rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        MatrixFq { q, rows, cols, data }
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    pub fn into_data(self) -> Vec<u32> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.q;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> MatrixFq {
        let mut t = Self::zeros(self.q, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    fn check_same(&self, other: &MatrixFq) -> Result<()> {
        if self.q != other.q || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} over F_{} vs {}x{} over F_{}",
                self.rows, self.cols, self.q, other.rows, other.cols, other.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixFq) -> Result<MatrixFq> {
        self.check_same(other)?;
        let mut out = self.clone();
        axpy(self.q, &mut out.data, &other.data, 1);
        Ok(out)
    }

    pub fn sub(&self, other: &MatrixFq) -> Result<MatrixFq> {
        self.check_same(other)?;
        let mut out = self.clone();
        axpy(self.q, &mut out.data, &other.data, self.q - 1);
        Ok(out)
    }

    pub fn scaled(&self, c: u32) -> MatrixFq {
        let c = c % self.q;
        let mut out = self.clone();
        if c == 0 {
            out.data.iter_mut().for_each(|x| *x = 0);
        } else {
            scale(self.q, &mut out.data, c);
        }
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &MatrixFq, c: u32) -> Result<()> {
        self.check_same(other)?;
        axpy(self.q, &mut self.data, &other.data, c % self.q);
        Ok(())
    }

    pub fn mul(&self, other: &MatrixFq) -> Result<MatrixFq> {
        if self.cols != other.rows || self.q != other.q {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.q, self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for t in 0..self.cols {
                let a = self.data[i * self.cols + t];
                if a != 0 {
                    axpy(self.q, dst, other.row(t), a);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix, `xM`.
    pub fn vec_mul(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.rows {
            return Err(Error::Shape(format!(
                "vector of length {} times {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![0; self.cols];
        for (i, &a) in x.iter().enumerate() {
            axpy(self.q, &mut out, self.row(i), a);
        }
        Ok(out)
    }

    /// Matrix times column vector, `M y^T`, returned as a row.
    pub fn mul_vec(&self, y: &[u32]) -> Result<Vec<u32>> {
        if y.len() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.q, self.row(i), y)).collect())
    }

    pub fn vstack(&self, other: &MatrixFq) -> Result<MatrixFq> {
        if self.cols != other.cols || self.q != other.q {
            return Err(Error::Shape("vstack column mismatch".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(MatrixFq { q: self.q, rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &MatrixFq) -> Result<MatrixFq> {
        if self.rows != other.rows || self.q != other.q {
            return Err(Error::Shape("hstack row mismatch".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(MatrixFq { q: self.q, rows: self.rows, cols, data })
    }

    /// Same entries, new shape.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<MatrixFq> {
        if rows * cols != self.data.len() {
            return Err(Error::Shape(format!("cannot reshape {} entries to {rows}x{cols}", self.data.len())));
        }
        Ok(MatrixFq { q: self.q, rows, cols, data: self.data.clone() })
    }

    /// Reduced row echelon form. Pivoting takes the first nonzero entry.
    pub fn rref(&self) -> Rref {
        let q = self.q;
        let (rows, cols) = (self.rows, self.cols);
        let mut d = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| d[i * cols + c] != 0) else {
                continue;
            };
            if p != r {
                for j in c..cols {
                    d.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = inv_mod(q, d[r * cols + c]);
            scale(q, &mut d[r * cols + c..(r + 1) * cols], inv);
            let (before, rest) = d.split_at_mut(r * cols);
            let (prow, after) = rest.split_at_mut(cols);
            let prow = &prow[c..];
            for i in 0..r {
                let f = before[i * cols + c];
                if f != 0 {
                    axpy(q, &mut before[i * cols + c..(i + 1) * cols], prow, q - f);
                }
            }
            for i in 0..rows - r - 1 {
                let f = after[i * cols + c];
                if f != 0 {
                    axpy(q, &mut after[i * cols + c..(i + 1) * cols], prow, q - f);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: MatrixFq { q, rows, cols, data: d }, rank: r, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<MatrixFq> {
        if self.rows != self.cols {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.q, n))?.rref();
        if aug.pivots.len() < n || aug.pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut out = Self::zeros(self.q, n, n);
        for i in 0..n {
            out.row_mut(i).copy_from_slice(&aug.matrix.row(i)[n..]);
        }
        Ok(out)
    }

    /// `{x : xM = 0}`
    pub fn kernel(&self) -> Subspace {
        right_null_space(&self.transpose())
    }

    /// Row space.
    pub fn image(&self) -> Subspace {
        Subspace::from_matrix(self)
    }

    /// Some `x` with `xM = b`, or `None` when `b` is outside the image.
    /// Every solution is this one plus an element of `kernel()`.
    pub fn solve(&self, b: &[u32]) -> Result<Option<Vec<u32>>> {
        if b.len() != self.cols {
            return Err(Error::Shape(format!("rhs of length {} for {} columns", b.len(), self.cols)));
        }
        let bt = MatrixFq { q: self.q, rows: self.cols, cols: 1, data: b.to_vec() };
        let r = self.transpose().hstack(&bt)?.rref();
        let n = self.rows;
        if r.pivots.last() == Some(&n) {
            return Ok(None);
        }
        let mut x = vec![0; n];
        for (i, &p) in r.pivots.iter().enumerate() {
            x[p] = r.matrix.get(i, n);
        }
        Ok(Some(x))
    }
}

pub fn dot(q: u32, a: &[u32], b: &[u32]) -> u32 {
    if q == 2 {
        let mut acc = 0;
        for (x, y) in a.iter().zip(b) {
            acc ^= x & y;
        }
        acc
    } else {
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc += (*x as u64) * (*y as u64);
        }
        (acc % q as u64) as u32
    }
}

/// `{y : A y^T = 0}` as a subspace of F_q^{cols(A)}.
pub fn right_null_space(a: &MatrixFq) -> Subspace {
    let Rref { matrix: r, rank, pivots } = a.rref();
    let n = a.cols;
    let q = a.q;
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let mut basis = MatrixFq::zeros(q, free.len(), n);
    for (k, &f) in free.iter().enumerate() {
        let row = basis.row_mut(k);
        row[f] = 1;
        for i in 0..rank {
            let v = r.get(i, f);
            if v != 0 {
                row[pivots[i]] = q - v;
            }
        }
    }
    Subspace::from_matrix(&basis)
}

/// Canonical F_q-subspace: basis rows in reduced row echelon form, no zero rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixFq", into = "MatrixFq")]
pub struct Subspace {
    basis: MatrixFq,
}

impl TryFrom<MatrixFq> for Subspace {
    type Error = Error;
    fn try_from(m: MatrixFq) -> Result<Self> {
        Ok(Subspace::from_matrix(&m))
    }
}

impl From<Subspace> for MatrixFq {
    fn from(s: Subspace) -> MatrixFq {
        s.basis
    }
}

impl Subspace {
    pub fn zero(q: u32, ambient: usize) -> Self {
        Subspace { basis: MatrixFq::zeros(q, 0, ambient) }
    }

    pub fn full(q: u32, ambient: usize) -> Self {
        Subspace { basis: MatrixFq::identity(q, ambient) }
    }

    /// Row space of `m`.
    pub fn from_matrix(m: &MatrixFq) -> Self {
        let r = m.rref();
        let cols = m.cols;
        let data = r.matrix.data[..r.rank * cols].to_vec();
        Subspace { basis: MatrixFq { q: m.q, rows: r.rank, cols, data } }
    }

    pub fn span(q: u32, ambient: usize, vectors: &[Vec<u32>]) -> Result<Self> {
        Ok(Self::from_matrix(&MatrixFq::from_rows(q, ambient, vectors)?))
    }

    pub fn q(&self) -> u32 {
        self.basis.q
    }
    pub fn dim(&self) -> usize {
        self.basis.rows
    }
    pub fn ambient(&self) -> usize {
        self.basis.cols
    }
    pub fn basis(&self) -> &MatrixFq {
        &self.basis
    }
    pub fn basis_vectors(&self) -> Vec<Vec<u32>> {
        self.basis.row_vecs()
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.ambient() != other.ambient() || self.q() != other.q() {
            return Err(Error::Shape(format!(
                "ambient F_{}^{} vs F_{}^{}",
                self.q(),
                self.ambient(),
                other.q(),
                other.ambient()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        if v.len() != self.ambient() {
            return false;
        }
        let q = self.q();
        let mut w = v.to_vec();
        for i in 0..self.dim() {
            let row = self.basis.row(i);
            let p = row.iter().position(|&x| x != 0).expect("basis row is nonzero");
            let c = w[p];
            if c != 0 {
                axpy(q, &mut w, row, q - c);
            }
        }
        w.iter().all(|&x| x == 0)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient() == other.ambient() && (0..self.dim()).all(|i| other.contains(self.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        Ok(Self::from_matrix(&self.basis.vstack(&other.basis)?))
    }

    /// Rows spanning `{y : <x, y> = 0 for all x in self}`.
    pub fn annihilator(&self) -> MatrixFq {
        right_null_space(&self.basis).basis
    }

    pub fn orthogonal(&self) -> Subspace {
        right_null_space(&self.basis)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let constraints = self.annihilator().vstack(&other.annihilator())?;
        Ok(right_null_space(&constraints))
    }

    /// `{x : xL in self}`.
    pub fn preimage(&self, l: &MatrixFq) -> Result<Subspace> {
        if l.cols != self.ambient() || l.q != self.q() {
            return Err(Error::Shape(format!(
                "map with {} columns, subspace of F_q^{}",
                l.cols,
                self.ambient()
            )));
        }
        // x L N^T = 0  <=>  (N L^T) x^T = 0
        let n = self.annihilator();
        Ok(right_null_space(&n.mul(&l.transpose())?))
    }

    /// `{vL : v in self}`.
    pub fn image_under(&self, l: &MatrixFq) -> Result<Subspace> {
        if l.rows != self.ambient() || l.q != self.q() {
            return Err(Error::Shape(format!(
                "map with {} rows, subspace of F_q^{}",
                l.rows,
                self.ambient()
            )));
        }
        Ok(Self::from_matrix(&self.basis.mul(l)?))
    }

    pub fn random(q: u32, ambient: usize, dim: usize, rng: &mut impl Rng) -> Result<Self> {
        random_subspace(q, ambient, dim, rng)
    }
}

pub fn kernel(m: &MatrixFq) -> Subspace {
    m.kernel()
}

pub fn solve(m: &MatrixFq, b: &[u32]) -> Result<Option<Vec<u32>>> {
    m.solve(b)
}

pub fn span(q: u32, ambient: usize, vectors: &[Vec<u32>]) -> Result<Subspace> {
    Subspace::span(q, ambient, vectors)
}

pub fn subspace_sum(u: &Subspace, v: &Subspace) -> Result<Subspace> {
    u.sum(v)
}

pub fn subspace_intersect(u: &Subspace, v: &Subspace) -> Result<Subspace> {
    u.intersect(v)
}

pub fn preimage(l: &MatrixFq, s: &Subspace) -> Result<Subspace> {
    s.preimage(l)
}

pub fn image_subspace(l: &MatrixFq, v: &Subspace) -> Result<Subspace> {
    v.image_under(l)
}

/// Rejection-samples `rows x cols` matrices until one has full rank.
pub fn random_full_rank(q: u32, rows: usize, cols: usize, rng: &mut impl Rng) -> MatrixFq {
    let target = rows.min(cols);
    loop {
        let m = MatrixFq::random(q, rows, cols, rng);
        if m.rank() == target {
            return m;
        }
    }
}

/// Uniform subspace of the given dimension.
pub fn random_subspace(q: u32, ambient: usize, dim: usize, rng: &mut impl Rng) -> Result<Subspace> {
    if dim > ambient {
        return Err(Error::Param(format!("dimension {dim} exceeds ambient {ambient}")));
    }
    Ok(Subspace::from_matrix(&random_full_rank(q, dim, ambient, rng)))
}

/// `(F, X)` with `F` of shape `m x r`, `X` of shape `r x n`, both of rank `r`.
pub fn random_rank_factors(
    q: u32,
    m: usize,
    n: usize,
    r: usize,
    rng: &mut impl Rng,
) -> Result<(MatrixFq, MatrixFq)> {
    if r > m.min(n) {
        return Err(Error::Param(format!("rank {r} infeasible for {m}x{n}")));
    }
    let f = random_full_rank(q, m, r, rng);
    let x = random_full_rank(q, r, n, rng);
    Ok((f, x))
}

pub fn random_matrix_of_rank(q: u32, m: usize, n: usize, r: usize, rng: &mut impl Rng) -> Result<MatrixFq> {
    let (f, x) = random_rank_factors(q, m, n, r, rng)?;
    f.mul(&x)
}

/// `Tr(A B^T)`, the sum of entrywise products.
pub fn trace_inner(a: &MatrixFq, b: &MatrixFq) -> Result<u32> {
    a.check_same(b)?;
    Ok(dot(a.q, &a.data, &b.data))
}

/// Basis of `{X : Tr(G X^T) = 0 for every generator G}` in canonical order.
pub fn matrix_code_dual(q: u32, rows: usize, cols: usize, generators: &[MatrixFq]) -> Result<Vec<MatrixFq>> {
    let mut stacked = MatrixFq::zeros(q, 0, rows * cols);
    for g in generators {
        if g.rows != rows || g.cols != cols || g.q != q {
            return Err(Error::Shape(format!("generator {}x{}, expected {rows}x{cols}", g.rows, g.cols)));
        }
        stacked = stacked.vstack(&MatrixFq { q, rows: 1, cols: rows * cols, data: g.data.clone() })?;
    }
    let dual = right_null_space(&stacked);
    dual.basis_vectors()
        .into_iter()
        .map(|v| MatrixFq::new(q, rows, cols, v))
        .collect()
}

/// Flattened matrices as a subspace of F_q^{rows*cols}.
pub fn matrix_span(q: u32, rows: usize, cols: usize, mats: &[MatrixFq]) -> Result<Subspace> {
    let flat: Vec<Vec<u32>> = mats.iter().map(|m| m.data.clone()).collect();
    Subspace::span(q, rows * cols, &flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(q: u32, rows: &[&[u32]]) -> MatrixFq {
        let v: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        MatrixFq::from_rows(q, rows[0].len(), &v).unwrap()
    }

    // Independent rank oracle: Bareiss-style fraction-free elimination over i64, reduced mod q.
    fn oracle_rank(a: &MatrixFq) -> usize {
        let q = a.q() as i64;
        let mut d: Vec<Vec<i64>> = a.row_vecs().iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        let (rows, cols) = (a.rows(), a.cols());
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&i| d[i][c].rem_euclid(q) != 0) else { continue };
            d.swap(rank, p);
            for i in 0..rows {
                if i != rank {
                    let (piv, f) = (d[rank][c], d[i][c]);
                    for j in 0..cols {
                        d[i][j] = (piv * d[i][j] - f * d[rank][j]).rem_euclid(q);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn identity_rref() {
        let r = MatrixFq::identity(2, 3).rref();
        assert_eq!(r.rank, 3);
        assert_eq!(r.pivots, vec![0, 1, 2]);
    }

    #[test]
    fn equal_rows_rank_one() {
        assert_eq!(m(2, &[&[1, 1], &[1, 1]]).rank(), 1);
    }

    #[test]
    fn rank_matches_fraction_free_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = MatrixFq::random(7, 5, 5, &mut rng);
            assert_eq!(a.rank(), oracle_rank(&a));
            let b = random_matrix_of_rank(7, 5, 5, rng.gen_range(0..=5), &mut rng).unwrap();
            assert_eq!(b.rank(), oracle_rank(&b));
        }
    }

    #[test]
    fn kernel_edge_cases() {
        assert_eq!(MatrixFq::identity(5, 4).kernel().dim(), 0);
        assert_eq!(MatrixFq::zeros(5, 4, 3).kernel(), Subspace::full(5, 4));
    }

    #[test]
    fn kernel_rank_nullity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in 0..=6 {
            let a = random_matrix_of_rank(2, 6, 8, r, &mut rng).unwrap();
            let k = a.kernel();
            assert_eq!(k.dim(), 6 - r);
            for v in k.basis_vectors() {
                assert!(a.vec_mul(&v).unwrap().iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn solve_cases() {
        let b = vec![3, 1, 4];
        assert_eq!(MatrixFq::identity(7, 3).solve(&b).unwrap(), Some(b));
        assert_eq!(MatrixFq::zeros(7, 3, 3).solve(&[1, 0, 0]).unwrap(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = MatrixFq::random(3, 4, 6, &mut rng);
            let x0: Vec<u32> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            let b = a.vec_mul(&x0).unwrap();
            let x = a.solve(&b).unwrap().unwrap();
            assert_eq!(a.vec_mul(&x).unwrap(), b);
        }
    }

    #[test]
    fn span_basics() {
        assert_eq!(Subspace::span(2, 3, &[]).unwrap().dim(), 0);
        let e = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(Subspace::span(2, 3, &e).unwrap(), Subspace::full(2, 3));
        let d = vec![vec![1, 1, 0], vec![1, 1, 0]];
        assert_eq!(Subspace::span(2, 3, &d).unwrap().dim(), 1);
    }

    #[test]
    fn lattice_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_subspace(2, 8, 4, &mut rng).unwrap();
        assert_eq!(u.intersect(&u).unwrap(), u);
        assert_eq!(u.sum(&u).unwrap(), u);
        assert_eq!(u.intersect(&Subspace::zero(2, 8)).unwrap().dim(), 0);
        assert_eq!(u.sum(&Subspace::full(2, 8)).unwrap(), Subspace::full(2, 8));
        for _ in 0..100 {
            let a = random_subspace(2, 8, rng.gen_range(0..=8), &mut rng).unwrap();
            let b = random_subspace(2, 8, rng.gen_range(0..=8), &mut rng).unwrap();
            let s = a.sum(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
            assert!(i.is_subspace_of(&a) && i.is_subspace_of(&b));
        }
    }

    fn enumerate(q: u32, n: usize) -> Vec<Vec<u32>> {
        let total = (q as usize).pow(n as u32);
        (0..total)
            .map(|mut k| {
                (0..n)
                    .map(|_| {
                        let d = (k % q as usize) as u32;
                        k /= q as usize;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn preimage_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let all = enumerate(2, 6);
        for _ in 0..40 {
            let l = random_matrix_of_rank(2, 6, 6, rng.gen_range(0..=6), &mut rng).unwrap();
            let s = random_subspace(2, 6, rng.gen_range(0..=6), &mut rng).unwrap();
            let p = s.preimage(&l).unwrap();
            let count = all.iter().filter(|x| s.contains(&l.vec_mul(x).unwrap())).count();
            assert_eq!(count, 1 << p.dim());
            for x in &all {
                assert_eq!(p.contains(x), s.contains(&l.vec_mul(x).unwrap()));
            }
            let im = l.image();
            assert_eq!(p.dim(), l.kernel().dim() + s.intersect(&im).unwrap().dim());
        }
    }

    #[test]
    fn preimage_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = random_full_rank(2, 5, 5, &mut rng);
        let s = random_subspace(2, 5, 2, &mut rng).unwrap();
        assert_eq!(s.preimage(&l).unwrap(), s.image_under(&l.inverse().unwrap()).unwrap());
        assert_eq!(Subspace::full(2, 5).preimage(&l).unwrap(), Subspace::full(2, 5));
    }

    #[test]
    fn preimage_of_image_is_v_plus_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let l = random_matrix_of_rank(2, 6, 6, rng.gen_range(0..=6), &mut rng).unwrap();
            let v = random_subspace(2, 6, rng.gen_range(0..=6), &mut rng).unwrap();
            let lhs = v.image_under(&l).unwrap().preimage(&l).unwrap();
            assert_eq!(lhs, v.sum(&l.kernel()).unwrap());
        }
        let v = random_subspace(2, 6, 3, &mut rng).unwrap();
        assert_eq!(v.image_under(&MatrixFq::identity(2, 6)).unwrap(), v);
        assert_eq!(Subspace::zero(2, 6).image_under(&MatrixFq::random(2, 6, 6, &mut rng)).unwrap().dim(), 0);
    }

    #[test]
    fn random_samplers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(random_subspace(2, 5, 0, &mut rng).unwrap().dim(), 0);
        assert_eq!(random_subspace(2, 5, 5, &mut rng).unwrap(), Subspace::full(2, 5));
        for _ in 0..10_000 {
            assert_eq!(random_matrix_of_rank(2, 6, 5, 3, &mut rng).unwrap().rank(), 3);
        }
        assert!(random_subspace(2, 3, 4, &mut rng).is_err());
    }

    #[test]
    fn trace_inner_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = MatrixFq::random(7, 3, 4, &mut rng);
        assert_eq!(trace_inner(&a, &MatrixFq::zeros(7, 3, 4)).unwrap(), 0);
        assert_eq!(trace_inner(&MatrixFq::identity(7, 9), &MatrixFq::identity(7, 9)).unwrap(), 2);
        let b = MatrixFq::random(7, 3, 4, &mut rng);
        let mut acc = 0u32;
        for i in 0..3 {
            for j in 0..4 {
                acc = (acc + a.get(i, j) * b.get(i, j)) % 7;
            }
        }
        assert_eq!(trace_inner(&a, &b).unwrap(), acc);
        assert_eq!(trace_inner(&a, &b).unwrap(), trace_inner(&b, &a).unwrap());
    }

    #[test]
    fn dual_code() {
        let zero = [MatrixFq::zeros(2, 3, 3)];
        assert_eq!(matrix_code_dual(2, 3, 3, &zero).unwrap().len(), 9);
        let full: Vec<MatrixFq> = (0..9)
            .map(|k| MatrixFq::from_fn(2, 3, 3, |i, j| (i * 3 + j == k) as u64))
            .collect();
        assert!(matrix_code_dual(2, 3, 3, &full).unwrap().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let gens: Vec<MatrixFq> = (0..rng.gen_range(1..6)).map(|_| MatrixFq::random(2, 3, 3, &mut rng)).collect();
            let dual = matrix_code_dual(2, 3, 3, &gens).unwrap();
            let span = matrix_span(2, 3, 3, &gens).unwrap();
            assert_eq!(dual.len(), 9 - span.dim());
            let double = matrix_code_dual(2, 3, 3, &dual).unwrap();
            assert_eq!(matrix_span(2, 3, 3, &double).unwrap(), span);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_full_rank(5, 6, 6, &mut rng);
        assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), MatrixFq::identity(5, 6));
        assert_eq!(MatrixFq::zeros(5, 2, 2).inverse(), Err(Error::Singular));
    }

    #[test]
    fn json_roundtrip() {
        let a = m(7, &[&[1, 2, 3], &[4, 5, 6]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"q":7,"rows":2,"cols":3,"data":[1,2,3,4,5,6]}"#);
        assert_eq!(serde_json::from_str::<MatrixFq>(&s).unwrap(), a);
        assert!(serde_json::from_str::<MatrixFq>(r#"{"q":7,"rows":1,"cols":1,"data":[9]}"#).is_err());
        let sub = Subspace::from_matrix(&a);
        let t = serde_json::to_string(&sub).unwrap();
        assert_eq!(serde_json::from_str::<Subspace>(&t).unwrap(), sub);
    }
}
