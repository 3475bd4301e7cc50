//! Prime fields F_q and extensions F_{q^m} in the power basis `1, a, ..., a^(m-1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inv_mod, MatrixFq};

const MAX_FIELD: u64 = 1 << 24;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic modulo a prime `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fq {
    q: u32,
}

impl Fq {
    pub fn new(q: u32) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q >= 1 << 16 {
            return Err(Error::ModulusTooLarge(q));
        }
        Ok(Fq { q })
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.q
    }
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.q - b) % self.q
    }
    pub fn neg(&self, a: u32) -> u32 {
        (self.q - a) % self.q
    }
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.q
    }
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.q) {
            return Err(Error::DivisionByZero);
        }
        Ok(inv_mod(self.q, a))
    }
}

/// Element of F_{q^m} as its coordinates in the power basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtElem {
    pub coeffs: Vec<u32>,
}

impl ExtElem {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Primitive polynomials, low degree first without the leading 1, as exponent lists.
fn table_q2(m: usize) -> Option<&'static [usize]> {
    Some(match m {
        1 => &[0],
        2 => &[0, 1],
        3 => &[0, 1],
        4 => &[0, 1],
        5 => &[0, 2],
        6 => &[0, 1],
        7 => &[0, 1],
        8 => &[0, 2, 3, 4],
        9 => &[0, 4],
        10 => &[0, 3],
        11 => &[0, 2],
        12 => &[0, 1, 4, 6],
        13 => &[0, 1, 3, 4],
        14 => &[0, 1, 6, 10],
        15 => &[0, 1],
        16 => &[0, 1, 3, 12],
        17 => &[0, 3],
        18 => &[0, 7],
        19 => &[0, 1, 2, 5],
        20 => &[0, 3],
        21 => &[0, 2],
        22 => &[0, 1],
        23 => &[0, 5],
        24 => &[0, 1, 2, 7],
        _ => return None,
    })
}

/// Full coefficient lists (low degree first, monic) over F_3.
fn table_q3(m: usize) -> Option<&'static [u32]> {
    Some(match m {
        1 => &[1, 1],
        2 => &[2, 1, 1],
        3 => &[1, 0, 2, 1],
        4 => &[2, 0, 0, 1, 1],
        5 => &[1, 0, 0, 0, 2, 1],
        6 => &[2, 0, 0, 0, 0, 1, 1],
        7 => &[1, 0, 0, 0, 0, 1, 2, 1],
        8 => &[2, 0, 0, 0, 0, 1, 0, 0, 1],
        9 => &[1, 0, 0, 0, 0, 0, 2, 1, 0, 1],
        10 => &[2, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1],
        11 => &[1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 1],
        12 => &[2, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 2, 1],
        _ => return None,
    })
}

/// Built-in primitive polynomial for `(q, m)`, low degree first.
pub fn table_polynomial(q: u32, m: usize) -> Option<Vec<u32>> {
    match q {
        2 => table_q2(m).map(|exps| {
            let mut p = vec![0; m + 1];
            for &e in exps {
                p[e] = 1;
            }
            p[m] = 1;
            p
        }),
        3 => table_q3(m).map(|c| c.to_vec()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Extension {
    m: usize,
    poly: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    q: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    poly: Option<Vec<u32>>,
}

/// F_q, optionally with F_{q^m} defined by a primitive polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FieldJson", into = "FieldJson")]
pub struct FieldCtx {
    fq: Fq,
    ext: Option<Extension>,
    primitive_verified: bool,
}

impl TryFrom<FieldJson> for FieldCtx {
    type Error = Error;
    fn try_from(j: FieldJson) -> Result<Self> {
        match (j.m, j.poly) {
            (Some(m), Some(p)) => FieldCtx::new(j.q, m, &p),
            (Some(m), None) => FieldCtx::standard(j.q, m),
            (None, _) => FieldCtx::prime(j.q),
        }
    }
}

impl From<FieldCtx> for FieldJson {
    fn from(c: FieldCtx) -> Self {
        FieldJson {
            q: c.fq.q,
            m: c.ext.as_ref().map(|e| e.m),
            poly: c.ext.map(|e| e.poly),
        }
    }
}

fn poly_rem(q: u32, a: &[u32], g: &[u32]) -> Vec<u32> {
    // g monic
    let dg = g.len() - 1;
    let mut r = a.to_vec();
    if r.len() <= dg {
        return r;
    }
    for d in (dg..r.len()).rev() {
        let c = r[d];
        if c != 0 {
            for i in 0..=dg {
                let idx = d - dg + i;
                r[idx] = (r[idx] + (q - c) * g[i]) % q;
            }
        }
    }
    r.truncate(dg);
    r
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldCtx {
    pub fn prime(q: u32) -> Result<Self> {
        Ok(FieldCtx { fq: Fq::new(q)?, ext: None, primitive_verified: false })
    }

    /// Builds F_{q^m} from a monic polynomial (low degree first), checking
    /// irreducibility by trial division and primitivity by the order of x.
    pub fn new(q: u32, m: usize, poly: &[u32]) -> Result<Self> {
        let fq = Fq::new(q)?;
        if m == 0 || poly.len() != m + 1 || poly[m] != 1 || poly.iter().any(|&c| c >= q) {
            return Err(Error::BadPolynomial(m));
        }
        let size = (q as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
        if size > MAX_FIELD {
            return Err(Error::FieldTooLarge(size));
        }
        if !Self::irreducible(q, poly) {
            return Err(Error::Reducible(q));
        }
        let ctx = FieldCtx { fq, ext: Some(Extension { m, poly: poly.to_vec() }), primitive_verified: false };
        let order = ctx.order(&ctx.x())?;
        if order != size - 1 {
            return Err(Error::NotPrimitive { order });
        }
        Ok(FieldCtx { primitive_verified: true, ..ctx })
    }

    /// Context from the built-in table (q = 2 up to m = 24, q = 3 up to m = 12).
    pub fn standard(q: u32, m: usize) -> Result<Self> {
        let poly = table_polynomial(q, m).ok_or(Error::NoTableEntry { q, m })?;
        Self::new(q, m, &poly)
    }

    fn irreducible(q: u32, poly: &[u32]) -> bool {
        let m = poly.len() - 1;
        // every monic divisor candidate of degree 1..=m/2
        for deg in 1..=m / 2 {
            let count = (q as u64).pow(deg as u32);
            for k in 0..count {
                let mut g = Vec::with_capacity(deg + 1);
                let mut t = k;
                for _ in 0..deg {
                    g.push((t % q as u64) as u32);
                    t /= q as u64;
                }
                g.push(1);
                if poly_rem(q, poly, &g).iter().all(|&c| c == 0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn q(&self) -> u32 {
        self.fq.q
    }

    pub fn fq(&self) -> Fq {
        self.fq
    }

    pub fn m(&self) -> Option<usize> {
        self.ext.as_ref().map(|e| e.m)
    }

    pub fn poly(&self) -> Option<&[u32]> {
        self.ext.as_ref().map(|e| e.poly.as_slice())
    }

    pub fn primitive_verified(&self) -> bool {
        self.primitive_verified
    }

    fn ext(&self) -> Result<&Extension> {
        self.ext.as_ref().ok_or(Error::NoExtension)
    }

    fn dim(&self) -> usize {
        self.ext.as_ref().map(|e| e.m).unwrap_or(1)
    }

    pub fn size(&self) -> u64 {
        (self.q() as u64).pow(self.dim() as u32)
    }

    pub fn zero(&self) -> ExtElem {
        ExtElem { coeffs: vec![0; self.dim()] }
    }

    pub fn one(&self) -> ExtElem {
        let mut c = vec![0; self.dim()];
        c[0] = 1;
        ExtElem { coeffs: c }
    }

    /// The class of x, the primitive element.
    pub fn x(&self) -> ExtElem {
        let e = match &self.ext {
            Some(e) => e,
            None => return self.one(),
        };
        ExtElem { coeffs: poly_rem(self.q(), &[0, 1], &e.poly).into_iter().chain(std::iter::repeat(0)).take(e.m).collect() }
    }

    pub fn elem(&self, coeffs: &[u32]) -> Result<ExtElem> {
        if coeffs.len() != self.dim() || coeffs.iter().any(|&c| c >= self.q()) {
            return Err(Error::Shape(format!("{} coordinates for degree {}", coeffs.len(), self.dim())));
        }
        Ok(ExtElem { coeffs: coeffs.to_vec() })
    }

    /// Element with index `k` in the enumeration of all q^m elements.
    pub fn elem_from_index(&self, mut k: u64) -> ExtElem {
        let q = self.q() as u64;
        ExtElem {
            coeffs: (0..self.dim())
                .map(|_| {
                    let c = (k % q) as u32;
                    k /= q;
                    c
                })
                .collect(),
        }
    }

    pub fn random(&self, rng: &mut impl rand::Rng) -> ExtElem {
        ExtElem { coeffs: (0..self.dim()).map(|_| rng.gen_range(0..self.q())).collect() }
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let q = self.q();
        ExtElem { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % q).collect() }
    }

    pub fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let q = self.q();
        ExtElem { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + q - y) % q).collect() }
    }

    pub fn scale(&self, a: &ExtElem, c: u32) -> ExtElem {
        let q = self.q();
        ExtElem { coeffs: a.coeffs.iter().map(|x| x * (c % q) % q).collect() }
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let q = self.q();
        let Some(e) = &self.ext else {
            return ExtElem { coeffs: vec![a.coeffs[0] * b.coeffs[0] % q] };
        };
        let m = e.m;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] += (x * y) as u64;
            }
        }
        let mut r: Vec<u32> = prod.into_iter().map(|v| (v % q as u64) as u32).collect();
        r = poly_rem(q, &r, &e.poly);
        r.resize(m, 0);
        ExtElem { coeffs: r }
    }

    pub fn pow(&self, a: &ExtElem, mut e: u64) -> ExtElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &ExtElem) -> Result<ExtElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.size() - 2))
    }

    /// `x^e` for the primitive element x.
    pub fn alpha_pow(&self, e: u64) -> ExtElem {
        self.pow(&self.x(), e)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: &ExtElem) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.size() - 1;
        let one = self.one();
        let mut ord = n;
        for p in distinct_prime_factors(n) {
            while ord.is_multiple_of(p) && self.pow(a, ord / p) == one {
                ord /= p;
            }
        }
        if self.pow(a, ord) != one {
            // reducible modulus: x is not a unit of order dividing q^m - 1
            return Ok(0);
        }
        Ok(ord)
    }

    /// Tr(a) = a + a^q + ... + a^(q^(m-1)).
    pub fn trace(&self, a: &ExtElem) -> u32 {
        let q = self.q() as u64;
        let mut acc = a.clone();
        let mut cur = a.clone();
        for _ in 1..self.dim() {
            cur = self.pow(&cur, q);
            acc = self.add(&acc, &cur);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        acc.coeffs[0]
    }

    /// Matrix `A` with `A phi(x) = phi(a x)` for column coordinate vectors.
    pub fn companion_matrix(&self) -> Result<MatrixFq> {
        let m = self.ext()?.m;
        let mut a = MatrixFq::zeros(self.q(), m, m);
        let mut p = self.x();
        for j in 0..m {
            for i in 0..m {
                a.set(i, j, p.coeffs[i]);
            }
            p = self.mul(&p, &self.x());
        }
        Ok(a)
    }

    /// Gram matrix `Tr(a^i a^j)` of the power basis.
    pub fn trace_gram(&self) -> Result<MatrixFq> {
        let m = self.ext()?.m;
        let mut d = MatrixFq::zeros(self.q(), m, m);
        for i in 0..m {
            for j in i..m {
                let t = self.trace(&self.alpha_pow((i + j) as u64));
                d.set(i, j, t);
                d.set(j, i, t);
            }
        }
        Ok(d)
    }

    /// Trace-dual basis `B'`, the Gram matrix `Delta`, and the change of basis `M`
    /// with `B M = B'` (so `M = Delta^-1`).
    pub fn dual_basis(&self) -> Result<DualBasis> {
        let m = self.ext()?.m;
        let delta = self.trace_gram()?;
        let change = delta.inverse().expect("trace form is nondegenerate");
        let basis = (0..m)
            .map(|j| ExtElem { coeffs: change.col(j) })
            .collect();
        Ok(DualBasis { basis, delta, change })
    }

    /// Columns are the power-basis coordinates of the entries of `v`.
    pub fn phi_embed(&self, v: &[ExtElem]) -> MatrixFq {
        let m = self.dim();
        let mut out = MatrixFq::zeros(self.q(), m, v.len());
        for (j, x) in v.iter().enumerate() {
            for i in 0..m {
                out.set(i, j, x.coeffs[i]);
            }
        }
        out
    }

    /// Inverse of `phi_embed`.
    pub fn phi_inverse(&self, a: &MatrixFq) -> Result<Vec<ExtElem>> {
        if a.rows() != self.dim() {
            return Err(Error::Shape(format!("{} rows, expected {}", a.rows(), self.dim())));
        }
        Ok((0..a.cols()).map(|j| ExtElem { coeffs: a.col(j) }).collect())
    }

    /// Coordinates in the dual basis: `Tr(a^l x)` for each l.
    pub fn phi_dual_embed(&self, v: &[ExtElem]) -> Result<MatrixFq> {
        let m = self.ext()?.m;
        let powers: Vec<ExtElem> = (0..m).map(|l| self.alpha_pow(l as u64)).collect();
        let mut out = MatrixFq::zeros(self.q(), m, v.len());
        for (j, x) in v.iter().enumerate() {
            for (l, p) in powers.iter().enumerate() {
                out.set(l, j, self.trace(&self.mul(p, x)));
            }
        }
        Ok(out)
    }

    /// Row reduction over F_{q^m}; returns the rank and reduced rows.
    pub fn ext_rref(&self, rows: &[Vec<ExtElem>]) -> Result<(usize, Vec<Vec<ExtElem>>, Vec<usize>)> {
        let mut r: Vec<Vec<ExtElem>> = rows.to_vec();
        let n = r.first().map(|v| v.len()).unwrap_or(0);
        if r.iter().any(|v| v.len() != n) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n {
            let Some(p) = (rank..r.len()).find(|&i| !r[i][c].is_zero()) else { continue };
            r.swap(rank, p);
            let inv = self.inv(&r[rank][c])?;
            r[rank] = r[rank].iter().map(|x| self.mul(x, &inv)).collect();
            for i in 0..r.len() {
                if i != rank && !r[i][c].is_zero() {
                    let f = r[i][c].clone();
                    let prow = r[rank].clone();
                    for (x, y) in r[i].iter_mut().zip(&prow) {
                        *x = self.sub(x, &self.mul(&f, y));
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        r.truncate(rank);
        Ok((rank, r, pivots))
    }

    pub fn ext_rank(&self, rows: &[Vec<ExtElem>]) -> Result<usize> {
        Ok(self.ext_rref(rows)?.0)
    }

    /// Basis of `{x in F_{q^m}^n : sum_j g_ij x_j = 0 for all i}`.
    pub fn ext_null_space(&self, rows: &[Vec<ExtElem>], n: usize) -> Result<Vec<Vec<ExtElem>>> {
        let (rank, r, pivots) = self.ext_rref(rows)?;
        let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
        let mut out = Vec::new();
        for &f in &free {
            let mut v = vec![self.zero(); n];
            v[f] = self.one();
            for i in 0..rank {
                v[pivots[i]] = self.sub(&self.zero(), &r[i][f]);
            }
            out.push(v);
        }
        Ok(out)
    }

    /// F_q-dimension of the span of the given elements.
    pub fn support_dim(&self, v: &[ExtElem]) -> usize {
        self.phi_embed(v).rank()
    }
}

/// Output of `FieldCtx::dual_basis`.
#[derive(Debug, Clone)]
pub struct DualBasis {
    pub basis: Vec<ExtElem>,
    pub delta: MatrixFq,
    pub change: MatrixFq,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f8() -> FieldCtx {
        FieldCtx::new(2, 3, &[1, 1, 0, 1]).unwrap()
    }

    #[test]
    fn base_ops() {
        let f = Fq::new(7).unwrap();
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(3).unwrap(), 5);
        assert_eq!(Fq::new(2).unwrap().add(1, 1), 0);
        assert_eq!(f.inv(0), Err(Error::DivisionByZero));
        assert_eq!(Fq::new(9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn build_errors() {
        assert!(f8().primitive_verified());
        assert_eq!(FieldCtx::new(2, 2, &[1, 0, 1]), Err(Error::Reducible(2)));
        assert!(matches!(FieldCtx::new(2, 4, &[1, 1, 1, 1, 1]), Err(Error::NotPrimitive { order: 5 })));
        assert!(matches!(FieldCtx::new(2, 25, &[1; 26]), Err(Error::FieldTooLarge(_))));
    }

    #[test]
    fn x_generates_f8() {
        let f = f8();
        let mut seen = std::collections::HashSet::new();
        let mut p = f.one();
        for _ in 0..7 {
            seen.insert(p.clone());
            p = f.mul(&p, &f.x());
        }
        assert_eq!(p, f.one());
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn tables_are_primitive() {
        for m in 1..=24 {
            let c = FieldCtx::standard(2, m).unwrap();
            assert!(c.primitive_verified());
        }
        for m in 1..=12 {
            FieldCtx::standard(3, m).unwrap();
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (q, m) in [(2, 4), (3, 2), (2, 5)] {
            let f = FieldCtx::standard(q, m).unwrap();
            let els: Vec<ExtElem> = (0..f.size()).map(|k| f.elem_from_index(k)).collect();
            for a in &els {
                if !a.is_zero() {
                    assert_eq!(f.mul(a, &f.inv(a).unwrap()), f.one());
                }
                for b in &els {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64 * 100 + m as u64);
            for _ in 0..500 {
                let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            }
        }
    }

    #[test]
    fn companion_example() {
        let f = f8();
        let a = f.companion_matrix().unwrap();
        let expected = MatrixFq::from_rows(2, 3, &[vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]]).unwrap();
        assert_eq!(a, expected);
        let a3 = a.mul(&a).unwrap().mul(&a).unwrap();
        assert_eq!(a3, a.add(&MatrixFq::identity(2, 3)).unwrap());
        let one = f.phi_embed(&[f.one()]);
        assert_eq!(a.mul(&one).unwrap(), f.phi_embed(&[f.x()]));
    }

    #[test]
    fn companion_acts_as_alpha() {
        let f = FieldCtx::standard(3, 4).unwrap();
        let a = f.companion_matrix().unwrap();
        for k in 0..f.size() {
            let x = f.elem_from_index(k);
            let lhs = a.mul(&f.phi_embed(std::slice::from_ref(&x))).unwrap();
            assert_eq!(lhs, f.phi_embed(&[f.mul(&f.x(), &x)]));
        }
    }

    #[test]
    fn companion_order() {
        for (q, m) in [(2, 3), (2, 4), (3, 3), (2, 8)] {
            let f = FieldCtx::standard(q, m).unwrap();
            let a = f.companion_matrix().unwrap();
            let id = MatrixFq::identity(q, m);
            let n = f.size() - 1;
            let mut p = a.clone();
            for k in 1..=n {
                assert_eq!(p == id, k == n, "A^{k} at q={q} m={m}");
                p = p.mul(&a).unwrap();
            }
        }
    }

    #[test]
    fn trace_values() {
        let f = f8();
        assert_eq!(f.trace(&f.one()), 1);
        assert_eq!(f.trace(&f.x()), 0);
        assert_eq!(f.trace(&f.zero()), 0);
    }

    // Delta computed by a brute-force Frobenius sum, independent of `trace`.
    #[test]
    fn dual_basis_f8() {
        let f = f8();
        let db = f.dual_basis().unwrap();
        let brute = |e: u64| {
            let a = f.alpha_pow(e);
            let s = f.add(&f.add(&a, &f.mul(&a, &a)), &f.pow(&a, 4));
            s.coeffs[0]
        };
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(db.delta.get(i, j), brute((i + j) as u64));
            }
        }
        let expected = MatrixFq::from_rows(2, 3, &[vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]).unwrap();
        assert_eq!(db.delta, expected);
    }

    #[test]
    fn dual_basis_pairing_is_identity() {
        for (q, m) in [(2, 3), (2, 6), (3, 4), (7, 1)] {
            let f = if m == 1 { FieldCtx::new(q, 1, &[4, 1]).unwrap() } else { FieldCtx::standard(q, m).unwrap() };
            let db = f.dual_basis().unwrap();
            assert_eq!(db.delta, db.delta.transpose());
            assert!(db.delta.is_invertible());
            for i in 0..m {
                for j in 0..m {
                    let t = f.trace(&f.mul(&f.alpha_pow(i as u64), &db.basis[j]));
                    assert_eq!(t, (i == j) as u32);
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let f = f8();
        assert!(f.phi_embed(&[f.zero(), f.zero()]).is_zero());
        let p = f.phi_embed(&[f.one(), f.x()]);
        assert_eq!(p, MatrixFq::from_rows(2, 2, &[vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap());
        assert_eq!(f.phi_inverse(&p).unwrap(), vec![f.one(), f.x()]);
    }

    #[test]
    fn phi_rank_is_support_dim() {
        let f = FieldCtx::standard(2, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            // entries drawn from a random small subspace
            let gens: Vec<ExtElem> = (0..3).map(|_| f.random(&mut rng)).collect();
            let v: Vec<ExtElem> = (0..5)
                .map(|_| {
                    gens.iter().fold(f.zero(), |acc, g| {
                        if rand::Rng::gen_bool(&mut rng, 0.5) { f.add(&acc, g) } else { acc }
                    })
                })
                .collect();
            // oracle: count distinct F_2-combinations of the entries
            let mut seen = std::collections::HashSet::new();
            for mask in 0u32..32 {
                let s = (0..5).filter(|b| mask >> b & 1 == 1).fold(f.zero(), |acc, b| f.add(&acc, &v[b]));
                seen.insert(s);
            }
            assert_eq!(1usize << f.phi_embed(&v).rank(), seen.len());
        }
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&f8()).unwrap();
        assert_eq!(s, r#"{"q":2,"m":3,"poly":[1,1,0,1]}"#);
        assert_eq!(serde_json::from_str::<FieldCtx>(&s).unwrap(), f8());
        assert!(serde_json::from_str::<FieldCtx>(r#"{"q":2,"m":2,"poly":[1,0,1]}"#).is_err());
    }
}
