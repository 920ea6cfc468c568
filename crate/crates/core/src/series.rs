//! Truncated power series over Z_p with a global denominator exponent.
//!
//! A [`TruncatedSeries`] represents `p^{-s} * (c_0 + c_1 X + ... + c_D X^D)`
//! with the integer coefficients held modulo `p^N`, so the value is known
//! modulo `(p^{N-s}, X^{D+1})`. The pair `(s, N)` is tracked exactly through
//! every operation; precision is propagated pessimistically and never gained.
//!
//! Normal form: either `s = 0` or at least one coefficient is a p-adic unit.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{big_valuation, mod_inverse, p_pow, reduce_signed, PadicScalar};

/// Exact or lower-bounded p-adic valuation of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesValuation {
    /// Minimal coefficient valuation minus the denominator exponent.
    Exact(i64),
    /// Every stored digit vanishes; the true valuation is at least this.
    AtLeast(i64),
}

impl SeriesValuation {
    pub fn lower_bound(&self) -> i64 {
        match self {
            SeriesValuation::Exact(v) | SeriesValuation::AtLeast(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SeriesValuation::Exact(_))
    }
}

/// Element of `p^{-s} * (Z/p^N)[X]/(X^{D+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    p: u64,
    denom_exp: u32,
    prec: u32,
    coeffs: Vec<BigUint>,
}

impl TruncatedSeries {
    /// The zero series at the given truncation and precision.
    pub fn zero(p: u64, x_prec: usize, prec: u32) -> Self {
        assert!(prec > 0, "p-precision must be positive");
        TruncatedSeries {
            p,
            denom_exp: 0,
            prec,
            coeffs: vec![BigUint::zero(); x_prec + 1],
        }
    }

    pub fn one(p: u64, x_prec: usize, prec: u32) -> Self {
        let mut s = Self::zero(p, x_prec, prec);
        s.coeffs[0] = BigUint::one();
        s
    }

    /// The variable X.
    pub fn x(p: u64, x_prec: usize, prec: u32) -> Self {
        Self::monomial(p, x_prec, prec, 1)
    }

    pub fn monomial(p: u64, x_prec: usize, prec: u32, degree: usize) -> Self {
        assert!(degree <= x_prec);
        let mut s = Self::zero(p, x_prec, prec);
        s.coeffs[degree] = BigUint::one();
        s
    }

    /// Build from signed integer coefficients (constant term first), reduced
    /// modulo `p^prec`.
    pub fn from_signed_coeffs(
        p: u64,
        denom_exp: u32,
        prec: u32,
        coeffs: &[BigInt],
        x_prec: usize,
    ) -> Result<Self> {
        let modulus = p_pow(p, prec);
        let mut c: Vec<BigUint> = coeffs.iter().map(|x| reduce_signed(x, &modulus)).collect();
        c.resize(x_prec + 1, BigUint::zero());
        c.truncate(x_prec + 1);
        Self::from_parts(p, denom_exp, prec, c)
    }

    pub fn from_i64_coeffs(p: u64, prec: u32, coeffs: &[i64], x_prec: usize) -> Result<Self> {
        let big: Vec<BigInt> = coeffs.iter().map(|&x| BigInt::from(x)).collect();
        Self::from_signed_coeffs(p, 0, prec, &big, x_prec)
    }

    /// Assemble from canonical parts and normalize.
    pub fn from_parts(p: u64, denom_exp: u32, prec: u32, coeffs: Vec<BigUint>) -> Result<Self> {
        if p < 3 || prec == 0 || coeffs.is_empty() {
            return Err(Error::usage("series needs an odd prime, positive precision, and coefficients"));
        }
        if i64::from(prec) - i64::from(denom_exp) < 1 {
            return Err(Error::Precision {
                needed: i64::from(denom_exp) + 1,
                available: i64::from(prec),
            });
        }
        let modulus = p_pow(p, prec);
        let coeffs = coeffs.into_iter().map(|c| c % &modulus).collect();
        Ok(TruncatedSeries { p, denom_exp, prec, coeffs }.normalize())
    }

    /// Restore the normal form: strip common powers of p into the
    /// denominator exponent. Absolute precision is preserved.
    fn normalize(mut self) -> Self {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            self.prec -= self.denom_exp;
            self.denom_exp = 0;
            return self;
        }
        let p = BigUint::from(self.p);
        while self.denom_exp > 0 && self.coeffs.iter().all(|c| (c % &p).is_zero()) {
            for c in &mut self.coeffs {
                *c /= &p;
            }
            self.denom_exp -= 1;
            self.prec -= 1;
        }
        self
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Denominator exponent s.
    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    /// Integer-coefficient precision N.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Truncation degree D.
    pub fn x_prec(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The value is known modulo `p^{N-s}`.
    pub fn absolute_precision(&self) -> i64 {
        i64::from(self.prec) - i64::from(self.denom_exp)
    }

    pub fn coeff(&self, i: usize) -> &BigUint {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Coefficient of X^i as a p-adic scalar (valuation includes the
    /// denominator shift).
    pub fn coeff_scalar(&self, i: usize) -> PadicScalar {
        let c = &self.coeffs[i];
        if c.is_zero() {
            return PadicScalar::precision_zero(self.p, self.absolute_precision());
        }
        let v = big_valuation(c, self.p);
        let unit = c / p_pow(self.p, v);
        PadicScalar::from_unit_parts(
            self.p,
            i64::from(v) - i64::from(self.denom_exp),
            unit,
            self.prec - v,
        )
        .expect("unit part is coprime to p by construction")
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Minimal p-adic valuation over all stored coefficients, accounting for
    /// the denominator exponent.
    pub fn valuation(&self) -> SeriesValuation {
        let mut best: Option<u32> = None;
        for c in &self.coeffs {
            if !c.is_zero() {
                let v = big_valuation(c, self.p);
                best = Some(best.map_or(v, |b| b.min(v)));
                if v == 0 {
                    break;
                }
            }
        }
        match best {
            Some(v) => SeriesValuation::Exact(i64::from(v) - i64::from(self.denom_exp)),
            None => SeriesValuation::AtLeast(self.absolute_precision()),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// Shrink the truncation degree.
    pub fn truncate(&self, x_prec: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(x_prec + 1);
        c.resize(x_prec + 1, BigUint::zero());
        TruncatedSeries { p: self.p, denom_exp: self.denom_exp, prec: self.prec, coeffs: c }
            .normalize()
    }

    /// Drop integer-coefficient precision to `prec` digits.
    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        if prec >= self.prec {
            return Ok(self.clone());
        }
        let modulus = p_pow(self.p, prec);
        let coeffs = self.coeffs.iter().map(|c| c % &modulus).collect();
        Self::from_parts(self.p, self.denom_exp, prec, coeffs)
    }

    pub fn neg(&self) -> Self {
        let modulus = p_pow(self.p, self.prec);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { BigUint::zero() } else { &modulus - c })
            .collect();
        TruncatedSeries { p: self.p, denom_exp: self.denom_exp, prec: self.prec, coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let d = self.x_prec().min(other.x_prec());
        let s = self.denom_exp.max(other.denom_exp);
        let abs = self.absolute_precision().min(other.absolute_precision());
        let prec = (i64::from(s) + abs) as u32;
        let modulus = p_pow(self.p, prec);
        let sa = p_pow(self.p, s - self.denom_exp);
        let sb = p_pow(self.p, s - other.denom_exp);
        let coeffs = (0..=d)
            .map(|i| (&self.coeffs[i] * &sa + &other.coeffs[i] * &sb) % &modulus)
            .collect();
        Ok(TruncatedSeries { p: self.p, denom_exp: s, prec, coeffs }.normalize())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let d = self.x_prec().min(other.x_prec());
        let s = self.denom_exp + other.denom_exp;
        let prec = self.prec.min(other.prec);
        if i64::from(prec) - i64::from(s) < 1 {
            return Err(Error::Precision {
                needed: i64::from(s) + 1,
                available: i64::from(prec),
            });
        }
        let coeffs = convolve(&self.coeffs, &other.coeffs, d, self.p, prec);
        Ok(TruncatedSeries { p: self.p, denom_exp: s, prec, coeffs }.normalize())
    }

    /// Multiply by a scalar, routed through a constant series so the
    /// precision bookkeeping has a single home.
    pub fn mul_scalar(&self, k: &PadicScalar) -> Result<Self> {
        if k.prime() != self.p {
            return Err(Error::PrimeMismatch(self.p, k.prime()));
        }
        if k.is_exact_zero() {
            return Ok(Self::zero(self.p, self.x_prec(), self.prec));
        }
        let c = constant_from_scalar(k, self.x_prec())?;
        self.mul(&c)
    }

    /// Divide the value by `p^extra` (a pure denominator shift).
    pub fn shift_denominator(&self, extra: u32) -> Result<Self> {
        Self::from_parts(self.p, self.denom_exp + extra, self.prec, self.coeffs.clone())
    }

    /// Multiply the value by `p^k`, losslessly: the denominator absorbs what
    /// it can and the coefficients are lifted into a larger modulus for the
    /// rest.
    pub fn scale_by_p_pow(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        let strip = k.min(self.denom_exp);
        let lift = k - strip;
        let factor = p_pow(self.p, lift);
        let coeffs = self.coeffs.iter().map(|c| c * &factor).collect();
        Self::from_parts(self.p, self.denom_exp - strip, self.prec + lift, coeffs)
    }

    /// Exact division by a series with unit constant term and no denominator.
    pub fn div_unit(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if other.denom_exp != 0 || (other.coeffs[0].clone() % other.p).is_zero() {
            return Err(Error::usage("divisor must be integral with unit constant term"));
        }
        let d = self.x_prec().min(other.x_prec());
        let prec = self.prec.min(other.prec);
        if i64::from(prec) - i64::from(self.denom_exp) < 1 {
            return Err(Error::Precision {
                needed: i64::from(self.denom_exp) + 1,
                available: i64::from(prec),
            });
        }
        let modulus = p_pow(self.p, prec);
        let inv0 = mod_inverse(&(other.coeffs[0].clone() % &modulus), &modulus)
            .expect("constant term is a unit");
        let mut q: Vec<BigUint> = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut acc = self.coeffs[k].clone() % &modulus;
            for j in 1..=k {
                let t = (&other.coeffs[j] * &q[k - j]) % &modulus;
                acc = (acc + &modulus - t) % &modulus;
            }
            q.push((acc * &inv0) % &modulus);
        }
        Ok(TruncatedSeries { p: self.p, denom_exp: self.denom_exp, prec, coeffs: q }.normalize())
    }

    /// Value-level equality at the shared tracked precision (and shared
    /// truncation degree).
    pub fn value_eq(&self, other: &Self) -> Result<bool> {
        self.check_prime(other)?;
        let d = self.x_prec().min(other.x_prec());
        let s = self.denom_exp.max(other.denom_exp);
        let abs = self.absolute_precision().min(other.absolute_precision());
        let prec = (i64::from(s) + abs) as u32;
        let modulus = p_pow(self.p, prec);
        let sa = p_pow(self.p, s - self.denom_exp);
        let sb = p_pow(self.p, s - other.denom_exp);
        for i in 0..=d {
            if (&self.coeffs[i] * &sa) % &modulus != (&other.coeffs[i] * &sb) % &modulus {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A scalar as a constant series at matching truncation.
pub fn constant_from_scalar(k: &PadicScalar, x_prec: usize) -> Result<TruncatedSeries> {
    let p = k.prime();
    if k.is_exact_zero() {
        return Ok(TruncatedSeries::zero(p, x_prec, 1));
    }
    if let Some(bound) = k.valuation_lower_bound() {
        if k.is_precision_zero() {
            if bound < 1 {
                return Err(Error::Precision { needed: 1, available: bound });
            }
            return Ok(TruncatedSeries::zero(p, x_prec, bound as u32));
        }
    }
    let val = k.valuation().expect("nonzero scalar");
    let rel = k.precision().expect("nonzero scalar");
    let unit = k.unit_part().expect("nonzero scalar");
    let (denom_exp, shift) = if val >= 0 { (0u32, val as u32) } else { ((-val) as u32, 0u32) };
    let prec_i = i64::from(rel) + i64::from(shift);
    let prec = u32::try_from(prec_i).map_err(|_| Error::usage("scalar precision overflow"))?;
    let mut coeffs = vec![BigUint::zero(); x_prec + 1];
    coeffs[0] = unit * p_pow(p, shift);
    TruncatedSeries::from_parts(p, denom_exp, prec, coeffs)
}

/// Coefficientwise product modulo `p^prec`, with a machine-word fast path
/// when `p^prec` fits in 48 bits.
fn convolve(a: &[BigUint], b: &[BigUint], d: usize, p: u64, prec: u32) -> Vec<BigUint> {
    let modulus = p_pow(p, prec);
    if modulus.bits() <= 48 {
        let m = modulus.to_u64().expect("fits by construction");
        let aa: Vec<u64> = a.iter().take(d + 1).map(|c| u64_residue(c, m)).collect();
        let bb: Vec<u64> = b.iter().take(d + 1).map(|c| u64_residue(c, m)).collect();
        return (0..=d)
            .map(|k| {
                let lo = k.saturating_sub(bb.len() - 1);
                let mut acc: u128 = 0;
                for i in lo..=k.min(aa.len() - 1) {
                    acc += u128::from(aa[i]) * u128::from(bb[k - i]);
                }
                BigUint::from((acc % u128::from(m)) as u64)
            })
            .collect();
    }
    (0..=d)
        .map(|k| {
            let mut acc = BigUint::zero();
            for i in 0..=k {
                acc += &a[i] * &b[k - i];
            }
            acc % &modulus
        })
        .collect()
}

fn u64_residue(c: &BigUint, m: u64) -> u64 {
    (c % m).to_u64().expect("residue fits")
}

/// Row of binomial coefficients `binom(m, 0..=d)`, exact.
pub fn binomial_row(m: &BigUint, d: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(d + 1);
    row.push(BigUint::one());
    for k in 1..=d {
        let kb = BigUint::from(k);
        if &kb > m {
            row.push(BigUint::zero());
            continue;
        }
        let prev = row.last().unwrap();
        let next = prev * (m - (&kb - 1u32)) / kb;
        row.push(next);
    }
    row
}

/// `(1+X)^e mod X^{D+1}` for a signed exponent, with integer coefficients.
pub fn one_plus_x_pow(p: u64, e: i64, x_prec: usize, prec: u32) -> Result<TruncatedSeries> {
    let modulus = p_pow(p, prec);
    let coeffs: Vec<BigUint> = if e >= 0 {
        binomial_row(&BigUint::from(e as u64), x_prec)
            .into_iter()
            .map(|c| c % &modulus)
            .collect()
    } else {
        // binom(-n, k) = (-1)^k binom(n+k-1, k)
        let n = (-e) as u64;
        (0..=x_prec)
            .map(|k| {
                let mut num = BigUint::one();
                let mut den = BigUint::one();
                for j in 0..k {
                    num *= BigUint::from(n) + BigUint::from(j as u64);
                    den *= BigUint::from(j as u64 + 1);
                }
                let c = (num / den) % &modulus;
                if k % 2 == 1 && !c.is_zero() {
                    &modulus - c
                } else {
                    c
                }
            })
            .collect()
    };
    TruncatedSeries::from_parts(p, 0, prec, coeffs)
}

/// Shifted cyclotomic polynomial `Phi_{p^n}(1+X)` truncated at `X^{D+1}`,
/// computed from `Phi_{p^n}(Y) = sum_{j<p} Y^{j p^{n-1}}`.
pub fn cyclotomic_shifted(p: u64, n: u32, x_prec: usize, prec: u32) -> Result<TruncatedSeries> {
    if n == 0 {
        return Err(Error::usage("cyclotomic level n must be at least 1"));
    }
    let modulus = p_pow(p, prec);
    let step = p_pow(p, n - 1);
    let mut coeffs = vec![BigUint::zero(); x_prec + 1];
    for j in 0..p {
        let m = &step * j;
        let row = binomial_row(&m, x_prec);
        for (k, c) in row.into_iter().enumerate() {
            coeffs[k] = (&coeffs[k] + c) % &modulus;
        }
    }
    TruncatedSeries::from_parts(p, 0, prec, coeffs)
}

/// `prod_{k=1}^{n} Phi_{p^k}(1+X)` truncated at `X^{D+1}`.
pub fn cyclotomic_product(p: u64, n: u32, x_prec: usize, prec: u32) -> Result<TruncatedSeries> {
    let mut acc = TruncatedSeries::one(p, x_prec, prec);
    for k in 1..=n {
        acc = acc.mul(&cyclotomic_shifted(p, k, x_prec, prec)?)?;
    }
    Ok(acc)
}

/// `log(1+X) / (pX) = (1/p) sum_{k>=0} (-1)^k X^k/(k+1)` at the stated
/// precision; the limit of `prod_{k<=n} Phi_{p^k}(1+X) / p^{n+1}`.
pub fn log_over_px(p: u64, x_prec: usize, prec: u32) -> Result<TruncatedSeries> {
    let denom_exp = 1 + max_val_up_to(p, x_prec as u64 + 1);
    series_from_unit_fractions(p, x_prec, prec, denom_exp, |k| {
        // coefficient of X^k: (-1)^k / (p (k+1))
        (k as u64 + 1, k % 2 == 1, 1)
    })
}

/// `log(1+X) = sum_{k>=1} (-1)^{k+1} X^k / k`.
pub fn log_one_plus_x(p: u64, x_prec: usize, prec: u32) -> Result<TruncatedSeries> {
    let denom_exp = max_val_up_to(p, x_prec as u64);
    series_from_unit_fractions(p, x_prec, prec, denom_exp, |k| {
        if k == 0 {
            (0, false, 0) // zero coefficient sentinel (denominator 0)
        } else {
            (k as u64, k % 2 == 0, 0)
        }
    })
}

/// Largest `v_p(k)` for `1 <= k <= limit`.
fn max_val_up_to(p: u64, limit: u64) -> u32 {
    let mut v = 0u32;
    let mut q = p;
    while q <= limit {
        v += 1;
        q = q.saturating_mul(p);
    }
    v
}

/// Assemble `p^{-s} * sum c_k X^k` where coefficient k is
/// `(+/-) 1/(p^extra * den)` described by the callback
/// `k -> (den, negative, extra)`; a zero denominator marks a zero coefficient.
fn series_from_unit_fractions(
    p: u64,
    x_prec: usize,
    prec: u32,
    denom_exp: u32,
    f: impl Fn(usize) -> (u64, bool, u32),
) -> Result<TruncatedSeries> {
    if i64::from(prec) - i64::from(denom_exp) < 1 {
        return Err(Error::Precision {
            needed: i64::from(denom_exp) + 1,
            available: i64::from(prec),
        });
    }
    let modulus = p_pow(p, prec);
    let mut coeffs = Vec::with_capacity(x_prec + 1);
    for k in 0..=x_prec {
        let (den, negative, extra) = f(k);
        if den == 0 {
            coeffs.push(BigUint::zero());
            continue;
        }
        let v = big_valuation(&BigUint::from(den), p);
        let unit = BigUint::from(den) / p_pow(p, v);
        // p^{-denom_exp} * c_k = 1/(p^{extra+v} * unit)  =>  c_k = p^{denom_exp-extra-v} / unit
        let shift = denom_exp
            .checked_sub(extra + v)
            .ok_or_else(|| Error::usage("denominator exponent too small for coefficient"))?;
        let inv = mod_inverse(&(unit % &modulus), &modulus).expect("unit denominator");
        let mut c = (inv * p_pow(p, shift)) % &modulus;
        if negative && !c.is_zero() {
            c = &modulus - c;
        }
        coeffs.push(c);
    }
    TruncatedSeries::from_parts(p, denom_exp, prec, coeffs)
}

impl std::fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.denom_exp > 0 {
            write!(f, "(1/{}^{})*(", self.p, self.denom_exp)?;
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "{}*X", c)?,
                _ => write!(f, "{}*X^{}", c, i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.denom_exp > 0 {
            write!(f, ")")?;
        }
        write!(
            f,
            " + O({}^{}, X^{})",
            self.p,
            self.absolute_precision(),
            self.coeffs.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(p: u64, prec: u32, coeffs: &[i64], d: usize) -> TruncatedSeries {
        TruncatedSeries::from_i64_coeffs(p, prec, coeffs, d).unwrap()
    }

    #[test]
    fn one_minus_x_squared() {
        let a = poly(3, 6, &[1, 1], 4);
        let b = poly(3, 6, &[1, -1], 4);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, poly(3, 6, &[1, 0, -1], 4));
    }

    #[test]
    fn multiply_by_zero() {
        let f = poly(5, 6, &[2, 3, 4], 5);
        let z = TruncatedSeries::zero(5, 5, 6);
        let prod = f.mul(&z).unwrap();
        assert!(prod.is_zero_at_precision());
    }

    #[test]
    fn convolution_matches_schoolbook_oracle() {
        // (X^2+3X+3)^2 against an independent i64 convolution
        let f = poly(3, 9, &[3, 3, 1], 6);
        let prod = f.mul(&f).unwrap();
        let a = [3i64, 3, 1, 0, 0, 0, 0];
        let mut expect = [0i64; 7];
        for i in 0..7 {
            for j in 0..(7 - i) {
                expect[i + j] += a[i] * a[j];
            }
        }
        let oracle = poly(3, 9, &expect, 6);
        assert_eq!(prod, oracle);
    }

    #[test]
    fn add_aligns_denominators() {
        // 1/3 + X  ->  (1/3)(1 + 3X)
        let third = constant_from_scalar(
            &PadicScalar::from_i64(3, 3, 8).invert().unwrap(),
            4,
        )
        .unwrap();
        let x = TruncatedSeries::x(3, 4, 8);
        let sum = third.add(&x).unwrap();
        assert_eq!(sum.denom_exp(), 1);
        assert_eq!(sum.coeff(0), &BigUint::from(1u32));
        assert_eq!(sum.coeff(1), &BigUint::from(3u32));
        // absolute precision followed the scalar: min(8-1, 8-0) = 7
        assert_eq!(sum.absolute_precision(), 7);
    }

    #[test]
    fn normalization_strips_common_p() {
        // (1/9)(3 + 9X) normalizes to (1/3)(1 + 3X)
        let s = TruncatedSeries::from_signed_coeffs(
            3,
            2,
            8,
            &[BigInt::from(3), BigInt::from(9)],
            3,
        )
        .unwrap();
        assert_eq!(s.denom_exp(), 1);
        assert_eq!(s.coeff(0), &BigUint::one());
        assert_eq!(s.absolute_precision(), 6);
    }

    #[test]
    fn cyclotomic_p3_n1() {
        let phi = cyclotomic_shifted(3, 1, 4, 8).unwrap();
        assert_eq!(phi, poly(3, 8, &[3, 3, 1], 4));
    }

    #[test]
    fn cyclotomic_constant_term_is_p() {
        for (p, n, d) in [(3u64, 1u32, 10usize), (3, 2, 10), (5, 1, 12), (5, 3, 8), (7, 2, 9)] {
            let phi = cyclotomic_shifted(p, n, d, 10).unwrap();
            assert_eq!(phi.coeff(0), &BigUint::from(p), "p={p} n={n}");
            assert_eq!(phi.denom_exp(), 0);
        }
    }

    #[test]
    fn cyclotomic_matches_exact_division_oracle() {
        // Oracle: divide (1+X)^9 - 1 by (1+X)^3 - 1 with exact integers.
        let num = binomial_row(&BigUint::from(9u32), 9);
        let den = binomial_row(&BigUint::from(3u32), 9);
        // both have zero constant term after subtracting 1; shift down by X
        let num: Vec<BigInt> = (1..=9).map(|i| BigInt::from(num[i].clone())).collect();
        let den: Vec<BigInt> = (1..=3).map(|i| BigInt::from(den[i].clone())).collect();
        let mut rem = num.clone();
        let mut q = vec![BigInt::from(0); 9];
        for k in 0..=6 {
            let (quot, r) = (rem[k].clone() / den[0].clone(), rem[k].clone() % den[0].clone());
            assert_eq!(r, BigInt::from(0), "division must be exact");
            q[k] = quot.clone();
            for j in 0..den.len() {
                if k + j < rem.len() {
                    let t = quot.clone() * den[j].clone();
                    rem[k + j] -= t;
                }
            }
        }
        assert!(rem.iter().all(|r| r == &BigInt::from(0)));
        // frozen oracle output: Phi_9(1+X) = X^6+6X^5+15X^4+21X^3+18X^2+9X+3
        assert_eq!(
            q[..7].iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            ["3", "9", "18", "21", "15", "6", "1"]
        );
        let phi = cyclotomic_shifted(3, 2, 8, 10).unwrap();
        let oracle =
            TruncatedSeries::from_signed_coeffs(3, 0, 10, &q, 8).unwrap();
        assert_eq!(phi, oracle);
    }

    #[test]
    fn cyclotomic_rejects_level_zero() {
        assert!(cyclotomic_shifted(3, 0, 4, 6).is_err());
    }

    #[test]
    fn log_over_px_small() {
        // (1/3)(1 - X/2 + X^2/3): s = 2, coefficients 3, -3/2, 1 as residues
        let l = log_over_px(3, 2, 8).unwrap();
        assert_eq!(l.denom_exp(), 2);
        assert_eq!(l.coeff(0), &BigUint::from(3u32));
        assert_eq!(l.coeff(2), &BigUint::one());
        // c1 = -3 * inv(2) mod 3^8: check 2*c1 + 3 = 0 mod 3^8
        let m = p_pow(3, 8);
        assert_eq!((l.coeff(1) * 2u32 + 3u32) % &m, BigUint::zero());
        // constant term of the value is 1/p
        let c0 = l.coeff_scalar(0);
        assert_eq!(c0.valuation(), Some(-1));
    }

    #[test]
    fn log_over_px_matches_partial_products() {
        // independent oracle: prod Phi/p^{n+1} = ((1+X)^{p^n}-1)/(X p^{n+1}),
        // coefficients binom(p^n, k+1); agreement valuation must increase.
        let d = 9;
        let l = log_over_px(3, d, 12).unwrap();
        let mut last = i64::MIN;
        for n in 1u32..=4 {
            let pn = 3u64.pow(n);
            let row = binomial_row(&BigUint::from(pn), d + 1);
            let coeffs: Vec<BigInt> = (1..=d + 1).map(|i| BigInt::from(row[i].clone())).collect();
            let prod = TruncatedSeries::from_signed_coeffs(3, 0, 12, &coeffs, d)
                .unwrap()
                .shift_denominator(n + 1)
                .unwrap();
            let diff = prod.sub(&l).unwrap();
            let v = diff.valuation().lower_bound();
            assert!(v > last, "agreement valuation must grow: n={n} v={v} last={last}");
            last = v;
        }
    }

    #[test]
    fn distinguished_shape_of_cyclotomic() {
        // all coefficients below the leading block divisible by p when the
        // full degree p^n - p^{n-1} fits
        for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (7, 1)] {
            let deg = (p.pow(n) - p.pow(n - 1)) as usize;
            let phi = cyclotomic_shifted(p, n, deg, 8).unwrap();
            assert_eq!(phi.coeff(deg), &BigUint::one());
            for i in 0..deg {
                assert!((phi.coeff(i) % p).is_zero());
            }
        }
    }

    #[test]
    fn div_unit_roundtrip() {
        let f = poly(5, 8, &[2, 7, 1, 3], 6);
        let g = poly(5, 8, &[1, 4, 2], 6);
        let q = f.div_unit(&g).unwrap();
        assert!(q.mul(&g).unwrap().value_eq(&f).unwrap());
    }

    #[test]
    fn mul_precision_exhaustion_is_an_error() {
        let l = log_over_px(3, 9, 4).unwrap(); // s = 3, N = 4
        let err = l.mul(&l).unwrap_err();
        assert!(matches!(err, Error::Precision { .. }));
    }
}
