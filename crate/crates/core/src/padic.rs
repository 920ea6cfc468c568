//! Exact p-adic scalar arithmetic with explicit precision windows.
//!
//! A [`PadicScalar`] is `p^v * unit` where the unit is coprime to `p` and
//! known modulo `p^prec`, i.e. the value is known modulo `p^{v+prec}`.
//! Exact zero and "zero at the working precision" are distinct states;
//! operations that must tell them apart (inversion, normalization) return
//! errors instead of guessing.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `p^e` as a big integer.
pub fn p_pow(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// p-adic valuation of a nonzero big integer.
pub fn big_valuation(x: &BigUint, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut v = 0u32;
    let mut x = x.clone();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        x = q;
    }
}

/// Inverse of `a` modulo `modulus` (coprime inputs), by extended Euclid.
pub fn mod_inverse(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a.clone());
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m;
    if x.sign() == Sign::Minus {
        x += &m;
    }
    Some(x.to_biguint().expect("reduced representative is non-negative"))
}

/// Canonical residue of a signed integer modulo `modulus`.
pub fn reduce_signed(x: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let mut r = x % &m;
    if r.sign() == Sign::Minus {
        r += &m;
    }
    r.to_biguint().expect("reduced representative is non-negative")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    /// The exact number 0.
    ExactZero,
    /// All p-adic digits below `bound` vanish; nothing is known beyond.
    PrecisionZero { bound: i64 },
    /// `p^val * unit` with `unit` coprime to `p`, known modulo `p^prec`.
    Unit { val: i64, unit: BigUint, prec: u32 },
}

/// A p-adic number with explicit valuation and precision window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    p: u64,
    value: Value,
}

impl PadicScalar {
    /// Exact zero.
    pub fn zero(p: u64) -> Self {
        PadicScalar { p, value: Value::ExactZero }
    }

    /// The unit 1 at `prec` significant digits.
    pub fn one(p: u64, prec: u32) -> Self {
        PadicScalar {
            p,
            value: Value::Unit { val: 0, unit: BigUint::one(), prec },
        }
    }

    /// A value whose known digits all vanish: `O(p^bound)`.
    pub fn precision_zero(p: u64, bound: i64) -> Self {
        PadicScalar { p, value: Value::PrecisionZero { bound } }
    }

    /// Value from a canonical residue known modulo `p^abs_prec` (absolute
    /// precision; a zero residue is precision-zero, not exact zero).
    pub fn from_residue(p: u64, residue: BigUint, abs_prec: u32) -> Self {
        let modulus = p_pow(p, abs_prec);
        let r = residue % &modulus;
        if r.is_zero() {
            return Self::precision_zero(p, i64::from(abs_prec));
        }
        let v = big_valuation(&r, p);
        let unit = r / p_pow(p, v);
        PadicScalar { p, value: Value::Unit { val: i64::from(v), unit, prec: abs_prec - v } }
    }

    /// An integer viewed p-adically with `prec` significant digits
    /// (the valuation is extracted exactly; zero maps to exact zero).
    pub fn from_bigint(p: u64, n: &BigInt, prec: u32) -> Self {
        assert!(prec > 0, "precision must be positive");
        if n.is_zero() {
            return Self::zero(p);
        }
        let mag = n.magnitude();
        let v = big_valuation(mag, p);
        let unit_mag = mag / p_pow(p, v);
        let modulus = p_pow(p, prec);
        let unit = if n.sign() == Sign::Minus {
            &modulus - (unit_mag % &modulus)
        } else {
            unit_mag % &modulus
        };
        PadicScalar {
            p,
            value: Value::Unit { val: i64::from(v), unit, prec },
        }
    }

    pub fn from_i64(p: u64, n: i64, prec: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    /// Assemble `p^val * unit` directly; `unit` must be coprime to `p`.
    pub fn from_unit_parts(p: u64, val: i64, unit: BigUint, prec: u32) -> Result<Self> {
        let modulus = p_pow(p, prec);
        let unit = unit % &modulus;
        if (&unit % p).is_zero() {
            return Err(Error::usage("unit part must be coprime to p"));
        }
        Ok(PadicScalar { p, value: Value::Unit { val, unit, prec } })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.value, Value::ExactZero)
    }

    pub fn is_precision_zero(&self) -> bool {
        matches!(self.value, Value::PrecisionZero { .. })
    }

    /// Valuation, when it is determined (exact zero has none; a
    /// precision-zero value only has a lower bound).
    pub fn valuation(&self) -> Option<i64> {
        match &self.value {
            Value::Unit { val, .. } => Some(*val),
            _ => None,
        }
    }

    /// Certified lower bound for the valuation, `None` for exact zero
    /// (valuation +infinity).
    pub fn valuation_lower_bound(&self) -> Option<i64> {
        match &self.value {
            Value::ExactZero => None,
            Value::PrecisionZero { bound } => Some(*bound),
            Value::Unit { val, .. } => Some(*val),
        }
    }

    /// Unit part of a nonzero value.
    pub fn unit_part(&self) -> Option<&BigUint> {
        match &self.value {
            Value::Unit { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Number of significant digits carried by the unit part.
    pub fn precision(&self) -> Option<u32> {
        match &self.value {
            Value::Unit { prec, .. } => Some(*prec),
            _ => None,
        }
    }

    /// The exponent `a` such that the value is known modulo `p^a`
    /// (`None` = known exactly).
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.value {
            Value::ExactZero => None,
            Value::PrecisionZero { bound } => Some(*bound),
            Value::Unit { val, prec, .. } => Some(val + i64::from(*prec)),
        }
    }

    /// True when the value is a p-adic integer as far as it is known.
    pub fn is_integral(&self) -> bool {
        match &self.value {
            Value::ExactZero => true,
            Value::PrecisionZero { bound } => *bound >= 0,
            Value::Unit { val, .. } => *val >= 0,
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        match &self.value {
            Value::Unit { val, unit, prec } => {
                let modulus = p_pow(self.p, *prec);
                PadicScalar {
                    p: self.p,
                    value: Value::Unit { val: *val, unit: &modulus - unit, prec: *prec },
                }
            }
            _ => self.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let p = self.p;
        match (&self.value, &other.value) {
            (Value::ExactZero, _) => Ok(other.clone()),
            (_, Value::ExactZero) => Ok(self.clone()),
            (Value::PrecisionZero { bound: a }, Value::PrecisionZero { bound: b }) => {
                Ok(PadicScalar { p, value: Value::PrecisionZero { bound: (*a).min(*b) } })
            }
            (Value::PrecisionZero { bound }, Value::Unit { val, unit, prec })
            | (Value::Unit { val, unit, prec }, Value::PrecisionZero { bound }) => {
                let abs = (*bound).min(val + i64::from(*prec));
                if *val >= abs {
                    Ok(PadicScalar { p, value: Value::PrecisionZero { bound: abs } })
                } else {
                    let rel = (abs - val) as u32;
                    let unit = unit % p_pow(p, rel);
                    Ok(PadicScalar { p, value: Value::Unit { val: *val, unit, prec: rel } })
                }
            }
            (
                Value::Unit { val: va, unit: ua, prec: na },
                Value::Unit { val: vb, unit: ub, prec: nb },
            ) => {
                let abs = (va + i64::from(*na)).min(vb + i64::from(*nb));
                let vmin = (*va).min(*vb);
                let rel = (abs - vmin) as u32; // > 0: each abs exceeds its own valuation
                let modulus = p_pow(p, rel);
                let x = (ua * p_pow(p, (va - vmin) as u32) + ub * p_pow(p, (vb - vmin) as u32))
                    % &modulus;
                if x.is_zero() {
                    return Ok(PadicScalar { p, value: Value::PrecisionZero { bound: abs } });
                }
                let w = big_valuation(&x, p);
                let unit = x / p_pow(p, w);
                Ok(PadicScalar {
                    p,
                    value: Value::Unit { val: vmin + i64::from(w), unit, prec: rel - w },
                })
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let p = self.p;
        match (&self.value, &other.value) {
            (Value::ExactZero, _) | (_, Value::ExactZero) => Ok(Self::zero(p)),
            (Value::PrecisionZero { bound: a }, Value::PrecisionZero { bound: b }) => {
                Ok(PadicScalar { p, value: Value::PrecisionZero { bound: a + b } })
            }
            (Value::PrecisionZero { bound }, Value::Unit { val, .. })
            | (Value::Unit { val, .. }, Value::PrecisionZero { bound }) => {
                Ok(PadicScalar { p, value: Value::PrecisionZero { bound: bound + val } })
            }
            (
                Value::Unit { val: va, unit: ua, prec: na },
                Value::Unit { val: vb, unit: ub, prec: nb },
            ) => {
                let prec = (*na).min(*nb);
                let unit = (ua * ub) % p_pow(p, prec);
                Ok(PadicScalar { p, value: Value::Unit { val: va + vb, unit, prec } })
            }
        }
    }

    /// Multiplicative inverse; refuses values indistinguishable from zero.
    pub fn invert(&self) -> Result<Self> {
        match &self.value {
            Value::Unit { val, unit, prec } => {
                let modulus = p_pow(self.p, *prec);
                let inv = mod_inverse(unit, &modulus).expect("unit is coprime to p");
                Ok(PadicScalar {
                    p: self.p,
                    value: Value::Unit { val: -val, unit: inv, prec: *prec },
                })
            }
            _ => Err(Error::InvertZero),
        }
    }

    /// Canonical residue in `[0, p^abs_prec)` when the value is integral
    /// and carries at least `abs_prec` digits.
    pub fn residue_mod(&self, abs_prec: u32) -> Result<BigUint> {
        match &self.value {
            Value::ExactZero => Ok(BigUint::zero()),
            Value::PrecisionZero { bound } => {
                if *bound >= i64::from(abs_prec) {
                    Ok(BigUint::zero())
                } else {
                    Err(Error::Precision { needed: i64::from(abs_prec), available: *bound })
                }
            }
            Value::Unit { val, unit, prec } => {
                if *val < 0 {
                    return Err(Error::usage("value is not a p-adic integer"));
                }
                let abs = val + i64::from(*prec);
                if abs < i64::from(abs_prec) {
                    return Err(Error::Precision { needed: i64::from(abs_prec), available: abs });
                }
                Ok(unit * p_pow(self.p, *val as u32) % p_pow(self.p, abs_prec))
            }
        }
    }

    /// p-adic logarithm of a 1-unit (`u == 1 mod p`), by the Mercator series.
    pub fn log_one_unit(&self) -> Result<Self> {
        let one = Self::one(self.p, self.precision().unwrap_or(1));
        let z = self.sub(&one)?;
        if z.is_exact_zero() {
            return Ok(Self::zero(self.p));
        }
        let vz = match z.valuation() {
            Some(v) if v >= 1 => v,
            _ => {
                return Err(Error::usage(
                    "p-adic logarithm requires a 1-unit (argument must be 1 mod p)",
                ))
            }
        };
        let target = z.absolute_precision().expect("nonzero finite-precision value");
        let mut sum = Self::zero(self.p);
        let mut zk = z.clone();
        let mut k: u64 = 1;
        loop {
            // term = (-1)^{k+1} z^k / k
            let kv = Self::from_bigint(self.p, &BigInt::from(k), z.precision().unwrap());
            let mut term = zk.mul(&kv.invert()?)?;
            if k % 2 == 0 {
                term = term.neg();
            }
            sum = sum.add(&term)?;
            k += 1;
            let term_val = (k as i64) * vz - i64::from(big_valuation(&BigUint::from(k), self.p));
            if term_val > target {
                break;
            }
            zk = zk.mul(&z)?;
        }
        Ok(sum)
    }
}

impl std::fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.value {
            Value::ExactZero => write!(f, "0"),
            Value::PrecisionZero { bound } => write!(f, "O({}^{})", self.p, bound),
            Value::Unit { val, unit, prec } => {
                if *val == 0 {
                    write!(f, "{} + O({}^{})", unit, self.p, prec)
                } else {
                    write!(f, "{}^{}*{} + O({}^{})", self.p, val, unit, self.p, val + i64::from(*prec))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: u64, n: i64) -> PadicScalar {
        PadicScalar::from_i64(p, n, 8)
    }

    #[test]
    fn add_small_integers() {
        // 1 + 2 = 3 = 3^1 * 1
        let r = s(3, 1).add(&s(3, 2)).unwrap();
        assert_eq!(r.valuation(), Some(1));
        assert_eq!(r.unit_part().unwrap(), &BigUint::one());
    }

    #[test]
    fn zero_absorbs_under_mul() {
        let r = PadicScalar::zero(5).mul(&s(5, 17)).unwrap();
        assert!(r.is_exact_zero());
    }

    #[test]
    fn third_plus_third() {
        // 1/3 + 1/3 = 2/3, valuation -1
        let third = s(3, 3).invert().unwrap(); // 1/3
        let r = third.add(&third).unwrap();
        assert_eq!(r.valuation(), Some(-1));
        // unit part is 2 * inverse(1) = 2
        assert_eq!(r.unit_part().unwrap(), &BigUint::from(2u32));
    }

    #[test]
    fn invert_two_mod_81() {
        // extended-Euclid oracle: 2 * 41 = 82 = 1 mod 81
        let two = PadicScalar::from_i64(3, 2, 4);
        let inv = two.invert().unwrap();
        assert_eq!(inv.unit_part().unwrap(), &BigUint::from(41u32));
        let prod = two.mul(&inv).unwrap();
        assert_eq!(prod.residue_mod(4).unwrap(), BigUint::one());
    }

    #[test]
    fn invert_one_and_uniformizer() {
        let one = PadicScalar::one(5, 6);
        assert_eq!(one.invert().unwrap(), one);
        let three = s(3, 3);
        let inv = three.invert().unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert_eq!(inv.unit_part().unwrap(), &BigUint::one());
    }

    #[test]
    fn invert_refuses_zeroish() {
        assert!(matches!(PadicScalar::zero(3).invert(), Err(Error::InvertZero)));
        let a = s(3, 5);
        let pz = a.sub(&a).unwrap();
        assert!(pz.is_precision_zero());
        assert!(matches!(pz.invert(), Err(Error::InvertZero)));
    }

    #[test]
    fn precision_propagates_through_cancellation() {
        // (1 + 3^5) - 1 at 8 digits: valuation 5 certified with 3 digits left
        let a = PadicScalar::from_i64(3, 1 + 243, 8);
        let r = a.sub(&PadicScalar::one(3, 8)).unwrap();
        assert_eq!(r.valuation(), Some(5));
        assert_eq!(r.precision(), Some(3));
    }

    #[test]
    fn prime_mismatch_is_rejected() {
        assert!(matches!(s(3, 1).add(&s(5, 1)), Err(Error::PrimeMismatch(3, 5))));
    }

    #[test]
    fn log_of_one_plus_p() {
        // log(1+3) = 3 - 9/2 + 27/3 - ... has valuation 1 for p=3
        let u = PadicScalar::from_i64(3, 4, 10);
        let l = u.log_one_unit().unwrap();
        assert_eq!(l.valuation(), Some(1));
        // l/3 = 1 - 3/2 + 3 - ... is 1 mod 3
        let unit = l.unit_part().unwrap();
        assert_eq!(unit % 3u32, BigUint::one());
    }
}
