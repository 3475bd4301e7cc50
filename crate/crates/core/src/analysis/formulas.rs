use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::glrpc::GlrpcParams;

/// Exact rational probability with a float copy for display.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbValue {
    pub exact: BigRational,
    pub approx: f64,
}

impl ProbValue {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        ProbValue { exact, approx }
    }
    pub fn zero() -> Self {
        ProbValue::new(BigRational::zero())
    }
    pub fn one() -> Self {
        ProbValue::new(BigRational::one())
    }
}

impl fmt::Display for ProbValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{:.9})", self.exact, self.approx)
    }
}

impl Serialize for ProbValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ProbValue", 2)?;
        st.serialize_field("exact", &self.exact.to_string())?;
        st.serialize_field("approx", &self.approx)?;
        st.end()
    }
}

/// `P(dim = value)` for each listed value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimDistribution {
    pub support: Vec<(usize, ProbValue)>,
}

impl DimDistribution {
    pub fn total(&self) -> BigRational {
        self.support.iter().fold(BigRational::zero(), |acc, (_, p)| acc + &p.exact)
    }
    pub fn get(&self, value: usize) -> Option<&ProbValue> {
        self.support.iter().find(|(v, _)| *v == value).map(|(_, p)| p)
    }
    pub fn prob(&self, value: usize) -> f64 {
        self.get(value).map(|p| p.approx).unwrap_or(0.0)
    }
}

fn pow(q: u32, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(q), e)
}

/// `q^e` for a possibly negative exponent.
pub fn qpow(q: u32, e: i64) -> BigRational {
    let p = pow(q, e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Number of `r`-dimensional subspaces of F_q^m; zero when `r > m`.
pub fn gauss_binomial(m: usize, r: usize, q: u32) -> BigUint {
    if r > m {
        return BigUint::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..r {
        num *= pow(q, m) - pow(q, i);
        den *= pow(q, r) - pow(q, i);
    }
    (num / den).to_biguint().expect("positive")
}

/// Largest box area accepted by `path_polynomial`.
pub const PATH_AREA_BOUND: usize = 64;

/// `N_{m,r,alpha}`: monotone lattice paths in an `r x (m-r)` box counted by the area below them.
pub fn path_polynomial(m: usize, r: usize) -> Result<Vec<u64>> {
    if r > m {
        return Err(Error::Param(format!("r = {r} exceeds m = {m}")));
    }
    let area = r * (m - r);
    if area > PATH_AREA_BOUND {
        return Err(Error::SearchTooLarge(area as u64));
    }
    let mut coeffs = vec![0u64; area + 1];
    // walk from (0,0) to (m-r, r); an up-step at column x adds x squares below the path
    fn walk(east: usize, north: usize, x: usize, acc: usize, coeffs: &mut [u64]) {
        if east == 0 && north == 0 {
            coeffs[acc] += 1;
            return;
        }
        if east > 0 {
            walk(east - 1, north, x + 1, acc, coeffs);
        }
        if north > 0 {
            walk(east, north - 1, x, acc + x, coeffs);
        }
    }
    walk(m - r, r, 0, 0, &mut coeffs);
    Ok(coeffs)
}

pub fn eval_polynomial(coeffs: &[u64], q: u32) -> BigUint {
    coeffs.iter().rev().fold(BigUint::zero(), |acc, &c| acc * q + c)
}

fn check_sum_args(m: usize, a: usize, b: usize, q: u32) -> Result<()> {
    if !crate::field::is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if a < b {
        return Err(Error::Param(format!("requires a >= b, got a = {a}, b = {b}")));
    }
    if a > m {
        return Err(Error::Param(format!("a = {a} exceeds m = {m}")));
    }
    Ok(())
}

fn sum_prob(m: usize, a: usize, b: usize, t: usize, q: u32) -> BigRational {
    let mut num = BigInt::one();
    for i in 0..t {
        num *= pow(q, m) - pow(q, a + i);
    }
    for i in 0..b - t {
        num *= pow(q, a) - pow(q, i);
    }
    let mut den = BigInt::one();
    for i in 0..b {
        den *= pow(q, m) - pow(q, i);
    }
    BigRational::new(num * BigInt::from(gauss_binomial(b, t, q)), den)
}

/// Distribution of `t = dim(A + B) - a` for a fixed `a`-space `A` and uniform `b`-space `B`.
pub fn dim_sum_distribution(m: usize, a: usize, b: usize, q: u32) -> Result<DimDistribution> {
    check_sum_args(m, a, b, q)?;
    let support = (0..=b.min(m - a)).map(|t| (t, ProbValue::new(sum_prob(m, a, b, t, q)))).collect();
    Ok(DimDistribution { support })
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// The reformulation `q^{b(t-(m-a))} [m-a, t]_q alpha beta`.
pub fn dim_sum_reformulated(m: usize, a: usize, b: usize, q: u32) -> Result<DimDistribution> {
    check_sum_args(m, a, b, q)?;
    let qm = pow(q, m);
    let support = (0..=b.min(m - a))
        .map(|t| {
            let mut v = qpow(q, b as i64 * (t as i64 - (m - a) as i64))
                * BigRational::from_integer(BigInt::from(gauss_binomial(m - a, t, q)));
            for i in 0..t {
                v *= ratio(&qm - pow(q, i + m - b), &qm - pow(q, i));
            }
            for i in t..b {
                v *= ratio(&qm - pow(q, i + m - a - t), &qm - pow(q, i));
            }
            (t, ProbValue::new(v))
        })
        .collect();
    Ok(DimDistribution { support })
}

/// `prod_{i < m-a} (q^m - q^{i+m-b}) / (q^m - q^i)`, the value at `t = m - a`.
pub fn dim_sum_full_closed(m: usize, a: usize, b: usize, q: u32) -> Result<ProbValue> {
    check_sum_args(m, a, b, q)?;
    if m - a > b {
        return Err(Error::Param(format!("t = m - a = {} exceeds b = {b}", m - a)));
    }
    let qm = pow(q, m);
    let v = (0..m - a).fold(BigRational::one(), |acc, i| acc * ratio(&qm - pow(q, i + m - b), &qm - pow(q, i)));
    Ok(ProbValue::new(v))
}

/// `1 - q^{m-a-b-1}`.
pub fn dim_sum_full_approx(m: usize, a: usize, b: usize, q: u32) -> f64 {
    1.0 - (q as f64).powi(m as i32 - a as i32 - b as i32 - 1)
}

/// `q^{(t-b)(m-a-t)}`, for `t < m - a`.
pub fn dim_sum_lower_approx(m: usize, a: usize, b: usize, t: usize, q: u32) -> f64 {
    (q as f64).powi((t as i32 - b as i32) * (m as i32 - a as i32 - t as i32))
}

fn check_preimage_args(m: usize, a: usize, rd: usize, q: u32) -> Result<()> {
    if a < rd {
        return Err(Error::Param(format!("requires a >= rd, got a = {a}, rd = {rd}")));
    }
    check_sum_args(m, a, rd, q)
}

/// Distribution of `eps = dim(L^-1(S)) - rd` for a rank-`a` map `L` and uniform `rd`-space `S`.
pub fn preimage_dim_distribution(m: usize, a: usize, rd: usize, q: u32) -> Result<DimDistribution> {
    check_preimage_args(m, a, rd, q)?;
    let sum = dim_sum_distribution(m, a, rd, q)?;
    let mut support: Vec<(usize, ProbValue)> = sum.support.into_iter().map(|(t, p)| (m - a - t, p)).collect();
    support.sort_by_key(|(e, _)| *e);
    Ok(DimDistribution { support })
}

/// `q^{-rd eps} [m-a, eps]_q alpha` with `alpha` the two products over `t = m - a - eps`.
pub fn preimage_dim_product_form(m: usize, a: usize, rd: usize, q: u32) -> Result<DimDistribution> {
    check_preimage_args(m, a, rd, q)?;
    let lo = (m - a).saturating_sub(rd);
    let support = (lo..=m - a)
        .map(|eps| {
            let t = m - a - eps;
            let one = BigRational::one();
            let mut v = qpow(q, -((rd * eps) as i64)) * BigRational::from_integer(BigInt::from(gauss_binomial(m - a, eps, q)));
            for i in 0..t {
                v *= (&one - qpow(q, i as i64 - rd as i64)) / (&one - qpow(q, i as i64 - m as i64));
            }
            for i in t..rd {
                v *= (&one - qpow(q, i as i64 - (a + t) as i64)) / (&one - qpow(q, i as i64 - m as i64));
            }
            (eps, ProbValue::new(v))
        })
        .collect();
    Ok(DimDistribution { support })
}

/// `P(eps = 0) ~ 1 - q^{-(a+rd-m)}/(q-1)`.
pub fn preimage_approx_eps0(m: usize, a: usize, rd: usize, q: u32) -> f64 {
    let q = q as f64;
    1.0 - q.powi(-((a + rd) as i32 - m as i32)) / (q - 1.0)
}

/// `P(eps = 1) ~ (1 - q^{-(a+rd+2-m)}) q^{-(a+rd-m)}/(q-1)`.
pub fn preimage_approx_eps1(m: usize, a: usize, rd: usize, q: u32) -> f64 {
    let q = q as f64;
    let e = (a + rd) as i32 - m as i32;
    (1.0 - q.powi(-(e + 2))) * q.powi(-e) / (q - 1.0)
}

/// Step 1 failure terms and the resulting success lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfrBound {
    /// `q^{rd-(n-k)}`
    pub span_failure: ProbValue,
    /// `q^{-(d-1)(m-rd-r)}`
    pub intersect_failure: ProbValue,
    /// `1 - span_failure - intersect_failure`
    pub bound: ProbValue,
    /// `bound` clamped to `[0, 1]`.
    pub clamped: f64,
    pub degenerate: bool,
    pub flags: Vec<String>,
}

pub fn dfr_bound(p: &GlrpcParams) -> DfrBound {
    let (q, m, n, k, d, r) = (p.q, p.m as i64, p.n as i64, p.k as i64, p.d as i64, p.r as i64);
    let span = qpow(q, r * d - (n - k));
    let inter = qpow(q, -(d - 1) * (m - r * d - r));
    let bound = BigRational::one() - &span - &inter;
    let mut flags = Vec::new();
    if span >= BigRational::one() {
        flags.push("span term >= 1 (rd >= n-k)".to_string());
    }
    if inter >= BigRational::one() {
        flags.push("intersection term >= 1".to_string());
    }
    if !bound.is_positive() {
        flags.push("bound <= 0".to_string());
    }
    let clamped = bound.to_f64().unwrap_or(0.0).clamp(0.0, 1.0);
    DfrBound {
        span_failure: ProbValue::new(span),
        intersect_failure: ProbValue::new(inter),
        bound: ProbValue::new(bound),
        clamped,
        degenerate: !flags.is_empty(),
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gauss_small() {
        assert_eq!(gauss_binomial(5, 0, 2), BigUint::one());
        assert_eq!(gauss_binomial(2, 1, 2), BigUint::from(3u32));
        assert_eq!(gauss_binomial(4, 2, 2), BigUint::from(35u32));
        assert_eq!(gauss_binomial(3, 4, 2), BigUint::zero());
    }

    #[test]
    fn paths() {
        assert_eq!(path_polynomial(3, 3).unwrap(), vec![1]);
        assert_eq!(path_polynomial(2, 1).unwrap(), vec![1, 1]);
        let p = path_polynomial(4, 2).unwrap();
        assert_eq!(p.iter().sum::<u64>(), 6);
        assert_eq!(eval_polynomial(&p, 2), BigUint::from(35u32));
        assert!(path_polynomial(20, 10).is_err());
    }

    #[test]
    fn sum_tiny() {
        let d = dim_sum_distribution(2, 1, 1, 2).unwrap();
        assert_eq!(d.get(1).unwrap().exact, rat(2, 3));
        assert_eq!(d.total(), BigRational::one());
        let z = dim_sum_distribution(5, 2, 0, 3).unwrap();
        assert_eq!(z.support.len(), 1);
        assert_eq!(z.get(0).unwrap().exact, BigRational::one());
        assert!(dim_sum_distribution(5, 1, 2, 2).is_err());
    }

    #[test]
    fn dfr_values() {
        let p = GlrpcParams { q: 2, m: 20, n: 20, k: 10, d: 2, r: 2, seed: 0 };
        let b = dfr_bound(&p);
        assert_eq!(b.span_failure.exact, rat(1, 64));
        assert_eq!(b.intersect_failure.exact, rat(1, 16384));
        assert_eq!(b.bound.exact, BigRational::one() - rat(1, 64) - rat(1, 16384));
        assert!(!b.degenerate);
        let d1 = dfr_bound(&GlrpcParams { d: 1, ..p });
        assert_eq!(d1.intersect_failure.exact, BigRational::one());
        assert!(d1.degenerate);
        let full = dfr_bound(&GlrpcParams { r: 5, ..p });
        assert_eq!(full.span_failure.exact, BigRational::one());
        assert!(full.degenerate);
        assert_eq!(full.clamped, 0.0);
    }
}
