//! Group-ring layer over the series core: idempotents for the order p-1
//! factor, the involution induced by group inversion, Weierstrass
//! preparation with mu/lambda invariants, characteristic polynomials of
//! torsion-module presentations, and the functional-equation comparator.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{big_valuation, mod_inverse, p_pow, PadicScalar};
use crate::report::{CompareReport, Witness};
use crate::series::{log_one_plus_x, TruncatedSeries};

/// Element of Z_p[Delta][[X]] in its isotypic decomposition: one series per
/// character of the cyclic group Delta of order p-1, indexed by exponents
/// modulo p-1 relative to a fixed generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IwasawaElement {
    p: u64,
    components: Vec<TruncatedSeries>,
}

impl IwasawaElement {
    pub fn new(p: u64, components: Vec<TruncatedSeries>) -> Result<Self> {
        if components.len() != (p - 1) as usize {
            return Err(Error::usage(format!(
                "expected exactly p-1 = {} isotypic components",
                p - 1
            )));
        }
        let d = components[0].x_prec();
        for c in &components {
            if c.prime() != p {
                return Err(Error::PrimeMismatch(p, c.prime()));
            }
            if c.x_prec() != d {
                return Err(Error::usage("components must share the truncation degree"));
            }
        }
        Ok(IwasawaElement { p, components })
    }

    /// The ring identity: every isotypic component is 1.
    pub fn one(p: u64, x_prec: usize, prec: u32) -> Self {
        let one = TruncatedSeries::one(p, x_prec, prec);
        IwasawaElement { p, components: vec![one; (p - 1) as usize] }
    }

    pub fn zero(p: u64, x_prec: usize, prec: u32) -> Self {
        let zero = TruncatedSeries::zero(p, x_prec, prec);
        IwasawaElement { p, components: vec![zero; (p - 1) as usize] }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn component(&self, eta: usize) -> &TruncatedSeries {
        &self.components[eta]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(IwasawaElement { p: self.p, components })
    }

    /// Multiplication is componentwise in the isotypic basis.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<_>>()?;
        Ok(IwasawaElement { p: self.p, components })
    }

    /// The involution sigma -> sigma^{-1}: character indices negate and the
    /// series variable maps through X -> (1+X)^{-1} - 1.
    pub fn involution(&self) -> Result<Self> {
        let k = self.components.len();
        let mut components = vec![None; k];
        for (eta, c) in self.components.iter().enumerate() {
            let target = (k - eta) % k;
            components[target] = Some(involution_iota(c)?);
        }
        Ok(IwasawaElement {
            p: self.p,
            components: components.into_iter().map(|c| c.expect("permutation")).collect(),
        })
    }
}

/// Idempotent e_eta: the basis element with 1 in component eta.
pub fn idempotent(p: u64, eta: usize, x_prec: usize, prec: u32) -> Result<IwasawaElement> {
    let k = (p - 1) as usize;
    if eta >= k {
        return Err(Error::usage(format!("character index must lie in 0..{k}")));
    }
    let mut components = vec![TruncatedSeries::zero(p, x_prec, prec); k];
    components[eta] = TruncatedSeries::one(p, x_prec, prec);
    IwasawaElement::new(p, components)
}

/// The involution on series: substitute `X -> (1+X)^{-1} - 1 = -X/(1+X)`,
/// exactly in the truncated ring. A ring automorphism, so it is an exact
/// involution at full precision.
pub fn involution_iota(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let p = f.prime();
    let d = f.x_prec();
    let prec = f.prec();
    let modulus = p_pow(p, prec);
    // tau = -X + X^2 - X^3 + ...
    let tau_coeffs: Vec<BigUint> = (0..=d)
        .map(|k| {
            if k == 0 {
                BigUint::zero()
            } else if k % 2 == 1 {
                &modulus - BigUint::one()
            } else {
                BigUint::one()
            }
        })
        .collect();
    let tau = TruncatedSeries::from_parts(p, 0, prec, tau_coeffs)?;
    // Horner on the integer part; the denominator exponent is untouched
    let mut acc = constant_term_series(p, d, prec, f.coeff(d));
    for i in (0..d).rev() {
        acc = acc.mul(&tau)?;
        acc = acc.add(&constant_term_series(p, d, prec, f.coeff(i)))?;
    }
    if f.denom_exp() > 0 {
        acc = acc.shift_denominator(f.denom_exp())?;
    }
    Ok(acc)
}

fn constant_term_series(p: u64, d: usize, prec: u32, c: &BigUint) -> TruncatedSeries {
    let mut coeffs = vec![BigUint::zero(); d + 1];
    coeffs[0] = c.clone();
    TruncatedSeries::from_parts(p, 0, prec, coeffs).expect("valid constant series")
}

/// `log(1+X) / log_p(u)` for a 1-unit `u`; the default `u = 1+p` is a
/// convention, not a canonical choice.
pub fn ell_zero(p: u64, x_prec: usize, prec: u32, u: Option<&PadicScalar>) -> Result<TruncatedSeries> {
    let default_u;
    let u = match u {
        Some(u) => u,
        None => {
            default_u = PadicScalar::from_i64(p, 1 + p as i64, prec);
            &default_u
        }
    };
    let log_u = u.log_one_unit()?;
    log_one_plus_x(p, x_prec, prec)?.mul_scalar(&log_u.invert()?)
}

/// Result of Weierstrass preparation: `f = p^mu * distinguished * unit`.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    pub mu: u32,
    pub lambda: usize,
    /// Monic of degree lambda, all lower coefficients divisible by p.
    /// Satisfies the product identity at the full working precision; only
    /// the first `distinguished_prec` digits are canonical (independent of
    /// the unknown tail beyond the truncation degree).
    pub distinguished: TruncatedSeries,
    /// Digits of the distinguished coefficients pinned down by the data:
    /// two factorizations of the same truncated series can differ only
    /// through the X^{D+1} boundary, and that ambiguity loses lambda
    /// degrees of X-support per power of p, so it cannot reach the
    /// distinguished block before p^{floor((D+1)/lambda)}.
    pub distinguished_prec: u32,
    /// Cofactor with unit constant term.
    pub unit: TruncatedSeries,
    /// Every mu/lambda/unitness decision rested on at least one certain
    /// p-adic digit (inputs where that is impossible error out instead).
    pub certified: bool,
}

/// Weierstrass preparation by linear Hensel lifting of the mod-p split
/// `f/p^mu = X^lambda * (unit)`.
pub fn weierstrass(f: &TruncatedSeries) -> Result<WeierstrassData> {
    let p = f.prime();
    let d = f.x_prec();
    if f.denom_exp() != 0 {
        return Err(Error::usage(
            "Weierstrass preparation needs an integral series (denominator exponent 0)",
        ));
    }
    if f.is_zero_at_precision() {
        return Err(Error::Uncertifiable(
            "every coefficient vanishes at the working precision".to_string(),
        ));
    }
    // mu: minimal coefficient valuation; exact because some residue is nonzero
    let mu = f
        .coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| big_valuation(c, p))
        .min()
        .expect("nonzero coefficient exists");
    let prec = f.prec() - mu;
    let p_mu = p_pow(p, mu);
    let scaled: Vec<BigUint> = f.coeffs().iter().map(|c| c / &p_mu).collect();
    // lambda: least index with a unit coefficient
    let lambda = scaled
        .iter()
        .position(|c| !(c % p).is_zero())
        .expect("some coefficient is a unit after removing p^mu");
    if lambda >= d {
        return Err(Error::Uncertifiable(format!(
            "lambda = {lambda} leaves no room below the truncation degree {d}"
        )));
    }

    let modulus = p_pow(p, prec);
    // initial split mod p: P = X^lambda, u = shifted coefficients
    let mut unit: Vec<BigUint> = (0..=d)
        .map(|i| scaled.get(i + lambda).cloned().unwrap_or_default())
        .collect();
    let mut dist: Vec<BigUint> = vec![BigUint::zero(); d + 1];
    dist[lambda] = BigUint::one();

    // unit residues mod p are invariant across the lift; keep the inverse too
    let u0: Vec<u64> = unit.iter().map(|c| (c % p).to_u64().unwrap()).collect();
    let u_inv_p = invert_series_mod_p(&u0, p);

    for k in 1..prec {
        let pk = p_pow(p, k);
        let prod = poly_mul_mod(&dist, &unit, d, &modulus);
        // residual is divisible by p^k by the lifting invariant
        let h: Vec<u64> = (0..=d)
            .map(|i| {
                let r = (&scaled[i] + &modulus - &prod[i]) % &modulus;
                ((r / &pk) % p).to_u64().unwrap()
            })
            .collect();
        if h.iter().all(|&x| x == 0) {
            continue;
        }
        // solve dP*u + X^lambda*du = h mod p: with w = h/u, the part of w
        // below X^lambda corrects P and u*(w >> lambda) corrects u
        let w = poly_mul_mod_p(&h, &u_inv_p, d, p);
        let mut w_high = vec![0u64; d + 1];
        for i in lambda..=d {
            w_high[i - lambda] = w[i];
        }
        let du = poly_mul_mod_p(&w_high, &u0, d, p);
        for (i, &wi) in w.iter().take(lambda).enumerate() {
            if wi != 0 {
                dist[i] = (&dist[i] + &pk * wi) % &modulus;
            }
        }
        for (j, &dj) in du.iter().enumerate() {
            if dj != 0 {
                unit[j] = (&unit[j] + &pk * dj) % &modulus;
            }
        }
    }

    let distinguished_prec = if lambda == 0 {
        prec
    } else {
        prec.min(((d + 1) / lambda) as u32)
    };
    Ok(WeierstrassData {
        mu,
        lambda,
        distinguished: TruncatedSeries::from_parts(p, 0, prec, dist)?,
        distinguished_prec,
        unit: TruncatedSeries::from_parts(p, 0, prec, unit)?,
        certified: true,
    })
}

fn poly_mul_mod(a: &[BigUint], b: &[BigUint], d: usize, modulus: &BigUint) -> Vec<BigUint> {
    (0..=d)
        .map(|k| {
            let mut acc = BigUint::zero();
            for i in 0..=k {
                if !a[i].is_zero() && !b[k - i].is_zero() {
                    acc += &a[i] * &b[k - i];
                }
            }
            acc % modulus
        })
        .collect()
}

fn poly_mul_mod_p(a: &[u64], b: &[u64], d: usize, p: u64) -> Vec<u64> {
    (0..=d)
        .map(|k| {
            let mut acc: u128 = 0;
            for i in 0..=k {
                acc += u128::from(a[i]) * u128::from(b[k - i]);
            }
            (acc % u128::from(p)) as u64
        })
        .collect()
}

fn invert_series_mod_p(a: &[u64], p: u64) -> Vec<u64> {
    let inv0 = mod_inverse(&BigUint::from(a[0] % p), &BigUint::from(p))
        .expect("constant term is a unit mod p")
        .to_u64()
        .unwrap();
    let mut q = vec![0u64; a.len()];
    q[0] = inv0;
    for k in 1..a.len() {
        let mut acc: u128 = 0;
        for j in 1..=k {
            acc += u128::from(a[j] % p) * u128::from(q[k - j]);
        }
        let acc = (acc % u128::from(p)) as u64;
        q[k] = (p - acc) % p * inv0 % p;
    }
    q
}

/// Square presentation matrix of a torsion module over the series ring; the
/// determinant (characteristic power series) is certified nonzero on
/// construction.
#[derive(Debug, Clone)]
pub struct ModulePresentation {
    size: usize,
    matrix: Vec<Vec<TruncatedSeries>>,
    char_series: TruncatedSeries,
}

impl ModulePresentation {
    pub fn new(matrix: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let size = matrix.len();
        if size == 0 || matrix.iter().any(|r| r.len() != size) {
            return Err(Error::usage("presentation matrix must be square and nonempty"));
        }
        for row in &matrix {
            for e in row {
                if e.denom_exp() != 0 {
                    return Err(Error::usage("presentation entries must be integral"));
                }
            }
        }
        let sm = crate::logmatrix::SeriesMatrix::from_entries(0, matrix.clone(), None)?;
        let char_series = sm.det_integral()?;
        if char_series.is_zero_at_precision() {
            return Err(Error::TorsionUncertifiable);
        }
        Ok(ModulePresentation { size, matrix, char_series })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &[Vec<TruncatedSeries>] {
        &self.matrix
    }
}

/// Characteristic power series: the determinant of the presentation matrix,
/// division-free, with denominator exponent 0.
pub fn char_poly(presentation: &ModulePresentation) -> TruncatedSeries {
    presentation.char_series.clone()
}

/// Functional-equation comparator at the characteristic-ideal level:
/// `f_X ~ iota(f_Y)` up to a unit of the series ring, i.e. equal (mu,
/// lambda) and equal distinguished polynomials.
pub fn functional_equation_compare(
    fx: &TruncatedSeries,
    fy: &TruncatedSeries,
) -> Result<CompareReport> {
    let wx = weierstrass(fx)?;
    let wy = weierstrass(&involution_iota(fy)?)?;
    let mu = [wx.mu, wy.mu];
    let lambda = [wx.lambda, wy.lambda];
    if wx.mu != wy.mu {
        return Ok(CompareReport {
            pass: false,
            mu,
            lambda,
            witness: Some(Witness {
                context: "mu mismatch".to_string(),
                row: None,
                col: None,
                coeff_index: 0,
                lhs: wx.mu.to_string(),
                rhs: wy.mu.to_string(),
            }),
        });
    }
    if wx.lambda != wy.lambda {
        return Ok(CompareReport {
            pass: false,
            mu,
            lambda,
            witness: Some(Witness {
                context: "lambda mismatch".to_string(),
                row: None,
                col: None,
                coeff_index: 0,
                lhs: wx.lambda.to_string(),
                rhs: wy.lambda.to_string(),
            }),
        });
    }
    // compare distinguished polynomials coefficientwise at the precision
    // both sides are canonically determined to
    let prec = wx.distinguished_prec.min(wy.distinguished_prec);
    let m = p_pow(fx.prime(), prec);
    for i in 0..=wx.lambda {
        let a = wx.distinguished.coeff(i) % &m;
        let b = wy.distinguished.coeff(i) % &m;
        if a != b {
            return Ok(CompareReport {
                pass: false,
                mu,
                lambda,
                witness: Some(Witness {
                    context: "distinguished polynomial mismatch".to_string(),
                    row: None,
                    col: None,
                    coeff_index: i,
                    lhs: a.to_string(),
                    rhs: b.to_string(),
                }),
            });
        }
    }
    Ok(CompareReport { pass: true, mu, lambda, witness: None })
}

/// Exponent bookkeeping for the global and local Euler characteristics:
/// returns `(-m p^n e deg(f) g_minus, m p^n e deg(f) g)`. The local count is
/// returned with the positive exponent.
pub fn euler_characteristic_exponent(
    p: u64,
    m: u32,
    e: u32,
    deg_f: u32,
    n_level: u32,
    g: u32,
    g_minus: u32,
) -> Result<(i64, i64)> {
    if g_minus > g {
        return Err(Error::usage("g_minus must not exceed g"));
    }
    let pn = (p as i128).checked_pow(n_level).ok_or_else(|| Error::usage("p^n overflows"))?;
    let base = (m as i128) * pn * (e as i128) * (deg_f as i128);
    let global = base
        .checked_mul(g_minus as i128)
        .and_then(|x| x.checked_neg())
        .ok_or_else(|| Error::usage("global exponent overflows"))?;
    let local = base
        .checked_mul(g as i128)
        .ok_or_else(|| Error::usage("local exponent overflows"))?;
    let global = i64::try_from(global).map_err(|_| Error::usage("global exponent overflows"))?;
    let local = i64::try_from(local).map_err(|_| Error::usage("local exponent overflows"))?;
    Ok((global, local))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use crate::series::one_plus_x_pow;

    fn poly(p: u64, prec: u32, coeffs: &[i64], d: usize) -> TruncatedSeries {
        TruncatedSeries::from_i64_coeffs(p, prec, coeffs, d).unwrap()
    }

    #[test]
    fn idempotents_are_complete_and_orthogonal() {
        let p = 5u64;
        let mut sum = IwasawaElement::zero(p, 4, 6);
        for eta in 0..4 {
            let e = idempotent(p, eta, 4, 6).unwrap();
            assert_eq!(e.mul(&e).unwrap(), e, "e_eta^2 = e_eta");
            for other in 0..4 {
                if other != eta {
                    let z = e.mul(&idempotent(p, other, 4, 6).unwrap()).unwrap();
                    assert!(z.components().iter().all(|c| c.is_zero_at_precision()));
                }
            }
            sum = sum.add(&e).unwrap();
        }
        assert_eq!(sum, IwasawaElement::one(p, 4, 6));
    }

    #[test]
    fn iota_of_x_is_alternating_geometric() {
        let x = TruncatedSeries::x(3, 6, 8);
        let t = involution_iota(&x).unwrap();
        assert_eq!(t, poly(3, 8, &[0, -1, 1, -1, 1, -1, 1], 6));
    }

    #[test]
    fn iota_of_one_plus_x_is_its_inverse() {
        let f = poly(3, 8, &[1, 1], 8);
        let t = involution_iota(&f).unwrap();
        let inv = one_plus_x_pow(3, -1, 8, 8).unwrap();
        assert_eq!(t, inv);
    }

    #[test]
    fn iota_is_an_involution() {
        let f = poly(3, 10, &[4, 7, 0, 2, 9, 1, 5, 3], 20);
        let tt = involution_iota(&involution_iota(&f).unwrap()).unwrap();
        assert_eq!(tt, f);
    }

    #[test]
    fn iota_permutes_idempotents() {
        let p = 7u64;
        for eta in 0..6usize {
            let e = idempotent(p, eta, 3, 5).unwrap();
            let t = e.involution().unwrap();
            let expect = idempotent(p, (6 - eta) % 6, 3, 5).unwrap();
            assert_eq!(t, expect);
        }
    }

    /// Coefficientwise equality modulo `p^prec`.
    fn eq_mod(a: &TruncatedSeries, b: &TruncatedSeries, prec: u32) -> bool {
        let m = p_pow(a.prime(), prec);
        (0..=a.x_prec().min(b.x_prec())).all(|i| a.coeff(i) % &m == b.coeff(i) % &m)
    }

    #[test]
    fn weierstrass_p_times_unit() {
        let f = poly(3, 8, &[3, 3], 6); // 3(1+X)
        let w = weierstrass(&f).unwrap();
        assert_eq!((w.mu, w.lambda), (1, 0));
        assert!(w.certified);
        assert!(w.unit.value_eq(&poly(3, 7, &[1, 1], 6)).unwrap());
        assert!(w.distinguished.value_eq(&poly(3, 7, &[1], 6)).unwrap());
    }

    #[test]
    fn weierstrass_x_plus_p() {
        let f = poly(3, 8, &[3, 1], 6);
        let w = weierstrass(&f).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 1));
        assert!(eq_mod(&w.distinguished, &poly(3, 8, &[3, 1], 6), w.distinguished_prec));
        // product property at full precision
        let prod = w.distinguished.mul(&w.unit).unwrap();
        assert!(prod.value_eq(&f).unwrap());
    }

    #[test]
    fn weierstrass_recovers_planted_distinguished_factor() {
        // (X+3)(X^2+3X+3)(2+X) = X^4+8X^3+24X^2+33X+18 over p=3
        let f = poly(3, 9, &[18, 33, 24, 8, 1], 10);
        let w = weierstrass(&f).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 3));
        assert!(w.certified);
        let planted = poly(3, 9, &[9, 12, 6, 1], 10); // (X+3)(X^2+3X+3)
        assert!(eq_mod(&w.distinguished, &planted, w.distinguished_prec));
        // product property: distinguished * unit == f at full precision
        let prod = w.distinguished.mul(&w.unit).unwrap();
        assert!(prod.value_eq(&f).unwrap());
    }

    #[test]
    fn distinguished_factor_is_canonical_under_unit_twists() {
        // two valid factorizations of unit-multiples must agree on the
        // distinguished block modulo p^{distinguished_prec}
        let planted = poly(3, 12, &[9, 12, 6, 1], 16);
        let u1 = poly(3, 12, &[2, 5, 1, 7, 4], 16);
        let u2 = poly(3, 12, &[1, 0, 8, 0, 0, 2], 16);
        let w1 = weierstrass(&planted.mul(&u1).unwrap()).unwrap();
        let w2 = weierstrass(&planted.mul(&u2).unwrap()).unwrap();
        assert_eq!((w1.mu, w1.lambda), (w2.mu, w2.lambda));
        let prec = w1.distinguished_prec.min(w2.distinguished_prec);
        assert!(prec >= 2, "determination window too small: {prec}");
        assert!(eq_mod(&w1.distinguished, &w2.distinguished, prec));
        assert!(eq_mod(&w1.distinguished, &planted, prec));
    }

    #[test]
    fn weierstrass_rejects_hopeless_inputs() {
        let z = TruncatedSeries::zero(3, 4, 6);
        assert!(matches!(weierstrass(&z), Err(Error::Uncertifiable(_))));
        // all-divisible residues with nothing below the truncation degree:
        // 3 + 3X + ... + X^4 at D = 4 has lambda = D
        let f = poly(3, 6, &[3, 3, 3, 3, 1], 4);
        assert!(matches!(weierstrass(&f), Err(Error::Uncertifiable(_))));
    }

    #[test]
    fn char_poly_of_diagonal_presentation() {
        let xp = poly(3, 8, &[3, 1], 6);
        let zero = TruncatedSeries::zero(3, 6, 8);
        let m = ModulePresentation::new(vec![
            vec![xp.clone(), zero.clone()],
            vec![zero.clone(), xp.clone()],
        ])
        .unwrap();
        let cp = char_poly(&m);
        assert!(cp.value_eq(&xp.mul(&xp).unwrap()).unwrap());
    }

    #[test]
    fn char_poly_x_p_p_x() {
        let x = TruncatedSeries::x(3, 6, 8);
        let p3 = poly(3, 8, &[3], 6);
        let m = ModulePresentation::new(vec![
            vec![x.clone(), p3.clone()],
            vec![p3.clone(), x.clone()],
        ])
        .unwrap();
        // X^2 - p^2
        assert!(char_poly(&m).value_eq(&poly(3, 8, &[-9, 0, 1], 6)).unwrap());
    }

    #[test]
    fn char_poly_planted_determinant_survives_row_ops() {
        // start from diag(d1,d2,d3), apply unimodular row operations
        let d1 = poly(3, 8, &[3, 1], 8);
        let d2 = poly(3, 8, &[0, 3, 1], 8);
        let d3 = poly(3, 8, &[6, 1], 8);
        let zero = TruncatedSeries::zero(3, 8, 8);
        let mut m = vec![
            vec![d1.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), d2.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), d3.clone()],
        ];
        // row1 += (1+X) * row0;  row2 += 2 * row1
        let u = poly(3, 8, &[1, 1], 8);
        let two = poly(3, 8, &[2], 8);
        for j in 0..3 {
            let t = u.mul(&m[0][j]).unwrap();
            m[1][j] = m[1][j].add(&t).unwrap();
        }
        for j in 0..3 {
            let t = two.mul(&m[1][j]).unwrap();
            m[2][j] = m[2][j].add(&t).unwrap();
        }
        let planted = d1.mul(&d2).unwrap().mul(&d3).unwrap();
        let pres = ModulePresentation::new(m).unwrap();
        assert!(char_poly(&pres).value_eq(&planted).unwrap());
    }

    #[test]
    fn torsion_certificate_rejects_zero_determinant() {
        let x = TruncatedSeries::x(3, 4, 6);
        let err = ModulePresentation::new(vec![
            vec![x.clone(), x.clone()],
            vec![x.clone(), x.clone()],
        ])
        .unwrap_err();
        assert!(matches!(err, Error::TorsionUncertifiable));
    }

    #[test]
    fn compare_x_with_x_passes() {
        let x = TruncatedSeries::x(3, 10, 8);
        let r = functional_equation_compare(&x, &x).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        assert_eq!(r.mu, [0, 0]);
        assert_eq!(r.lambda, [1, 1]);
    }

    #[test]
    fn compare_constructed_unit_multiple_passes() {
        // fY = unit * iota(X+p): comparator must accept (fX = X+p)
        let fx = poly(3, 9, &[3, 1], 12);
        let unit = poly(3, 9, &[2, 3, 1], 12);
        let fy = involution_iota(&fx).unwrap().mul(&unit).unwrap();
        let r = functional_equation_compare(&fx, &fy).unwrap();
        assert!(r.pass, "{:?}", r.witness);
    }

    #[test]
    fn compare_lambda_mismatch_fails_with_witness() {
        let x = TruncatedSeries::x(3, 10, 8);
        let x2 = poly(3, 8, &[0, 0, 1], 10);
        let r = functional_equation_compare(&x, &x2).unwrap();
        assert!(!r.pass);
        assert_eq!(r.lambda, [1, 2]);
        assert_eq!(r.witness.unwrap().context, "lambda mismatch");
    }

    #[test]
    fn euler_exponent_examples() {
        assert_eq!(euler_characteristic_exponent(3, 1, 1, 1, 0, 2, 1).unwrap(), (-1, 2));
        assert_eq!(euler_characteristic_exponent(5, 0, 4, 2, 3, 6, 3).unwrap(), (0, 0));
        assert_eq!(euler_characteristic_exponent(3, 2, 3, 2, 1, 4, 2).unwrap(), (-72, 144));
    }

    #[test]
    fn ell_zero_leading_coefficient() {
        // log(1+X)/log(1+p): coefficient of X is 1/log(1+p), valuation -1
        let l = ell_zero(3, 6, 10, None).unwrap();
        let c1 = l.coeff_scalar(1);
        assert_eq!(c1.valuation(), Some(-1));
        // constant term vanishes
        assert!(l.coeff_scalar(0).is_precision_zero() || l.coeff(0).is_zero());
    }

    #[test]
    fn mu_lambda_are_iota_invariant_on_samples() {
        let samples = [
            vec![18i64, 33, 24, 8, 1],
            vec![9, 3, 5, 0, 2],
            vec![27, 9, 3, 12, 6],
            vec![3, 6, 2],
        ];
        for coeffs in &samples {
            let f = TruncatedSeries::from_signed_coeffs(
                3,
                0,
                9,
                &coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(),
                16,
            )
            .unwrap();
            let wf = weierstrass(&f).unwrap();
            let wi = weierstrass(&involution_iota(&f).unwrap()).unwrap();
            assert_eq!((wf.mu, wf.lambda), (wi.mu, wi.lambda));
        }
    }
}
