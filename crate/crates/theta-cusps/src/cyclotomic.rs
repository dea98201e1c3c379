//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! A value is stored as the canonical remainder modulo the N-th cyclotomic
//! polynomial in the power basis `{1, zeta, ..., zeta^{phi(N)-1}}`, so exact
//! equality of values is equality of representations once both sides are
//! promoted to a common order. Orders are kept as constructed (no descent
//! to subfields); equality always promotes to the lcm first.
//!
//! The complex embedding sends `zeta_N` to `exp(2*pi*i/N)` in double
//! precision and is used only for comparisons against the numerical oracle.

use crate::numeric::{
    divisors_u64, euler_phi, frac_p, is_prime_u64, kronecker_i64, lcm_u64, vp_int,
    NumericError, Rational,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Hard cap on cyclotomic orders. Everything in this crate lives in fields
/// like Q(zeta_{8*3*p^f}); hitting the cap signals runaway lcm growth.
pub const MAX_ORDER: u64 = 1 << 20;

static CYCLO_POLYS: Lazy<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Coefficients (low to high, monic) of the N-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<BigInt>> {
    assert!((1..=MAX_ORDER).contains(&n), "cyclotomic order cap exceeded: {n}");
    if let Some(p) = CYCLO_POLYS.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d | n
    let mut q: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    q[0] = -BigInt::one();
    q[n as usize] = BigInt::one();
    for d in divisors_u64(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        q = poly_div_exact_int(&q, &phi_d);
    }
    let arc = Arc::new(q);
    CYCLO_POLYS.lock().unwrap().insert(n, arc.clone());
    arc
}

/// Exact division of integer polynomials by a monic divisor.
fn poly_div_exact_int(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    debug_assert!(den[dn].is_one(), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let qn = num.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn].clone();
        if !c.is_zero() {
            for (i, d) in den.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

/// An exact element of `Q(zeta_order)`.
#[derive(Clone)]
pub struct Cyclo {
    order: u64,
    /// canonical remainder mod Phi_order; length phi(order)
    coeffs: Vec<Rational>,
}

fn reduce_dense(order: u64, dense: &mut Vec<Rational>) {
    let n = order as usize;
    // fold exponents mod order first (zeta^order = 1)
    if dense.len() > n {
        for k in n..dense.len() {
            let c = std::mem::replace(&mut dense[k], Rational::zero());
            if !c.is_zero() {
                let t = k % n;
                let cur = std::mem::replace(&mut dense[t], Rational::zero());
                dense[t] = cur + c;
            }
        }
    }
    dense.resize(n.max(dense.len().min(n)), Rational::zero());
    dense.truncate(n);
    if dense.len() < n {
        dense.resize(n, Rational::zero());
    }
    // remainder modulo the (monic) cyclotomic polynomial
    let phi = euler_phi(order) as usize;
    let cp = cyclotomic_poly(order);
    for k in (phi..n).rev() {
        let c = std::mem::replace(&mut dense[k], Rational::zero());
        if !c.is_zero() {
            for i in 0..phi {
                if !cp[i].is_zero() {
                    let delta = &c * BigRational::from_integer(cp[i].clone());
                    let cur = std::mem::replace(&mut dense[k - phi + i], Rational::zero());
                    dense[k - phi + i] = cur - delta;
                }
            }
        }
    }
    dense.truncate(phi);
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![Rational::zero()],
        }
    }

    pub fn one() -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![Rational::one()],
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![r],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// The imaginary unit, `zeta_4`.
    pub fn i() -> Self {
        root_of_unity(4, 1)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    fn from_dense(order: u64, mut dense: Vec<Rational>) -> Self {
        reduce_dense(order, &mut dense);
        Cyclo {
            order,
            coeffs: dense,
        }
    }

    /// Public low-level constructor: the class of `sum coeffs[k] zeta^k`
    /// (any length), reduced to canonical form.
    pub fn from_coeffs(order: u64, coeffs: Vec<Rational>) -> Self {
        assert!((1..=MAX_ORDER).contains(&order));
        Self::from_dense(order, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Some(r) when the value lies in Q. The canonical remainder of a
    /// rational is the constant polynomial at any order, so this is just a
    /// check on the higher coefficients.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Rewrite in `Q(zeta_m)` where `order | m`.
    pub fn promote(&self, m: u64) -> Cyclo {
        assert!(m.is_multiple_of(self.order), "promotion target must be a multiple");
        assert!(m <= MAX_ORDER, "cyclotomic order cap exceeded: {m}");
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut dense = vec![Rational::zero(); m as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[k * step] = c.clone();
            }
        }
        Cyclo::from_dense(m, dense)
    }

    fn common_order(&self, other: &Cyclo) -> u64 {
        lcm_u64(self.order, other.order)
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        let m = self.common_order(other);
        let a = self.promote(m);
        let b = other.promote(m);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x + y)
            .collect();
        Cyclo { order: m, coeffs }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        let m = self.common_order(other);
        let a = self.promote(m);
        let b = other.promote(m);
        let mut dense = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len()];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let cur = std::mem::replace(&mut dense[i + j], Rational::zero());
                dense[i + j] = cur + x * y;
            }
        }
        Cyclo::from_dense(m, dense)
    }

    pub fn mul_rat(&self, r: &Rational) -> Cyclo {
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// The ring automorphism `zeta_N -> zeta_N^{-1}`; commutes with complex
    /// conjugation of the embedding.
    pub fn conj(&self) -> Cyclo {
        let n = self.order as usize;
        let mut dense = vec![Rational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let t = (n - k) % n;
                let cur = std::mem::replace(&mut dense[t], Rational::zero());
                dense[t] = cur + c;
            }
        }
        Cyclo::from_dense(self.order, dense)
    }

    /// Multiplicative inverse, via the extended Euclidean algorithm against
    /// the (irreducible) cyclotomic polynomial.
    pub fn inverse(&self) -> Result<Cyclo, NumericError> {
        if self.is_zero() {
            return Err(NumericError::ZeroHilbertArgument);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Cyclo::from_rational(r.recip()));
        }
        let cp = cyclotomic_poly(self.order);
        let modpoly: Vec<Rational> = cp
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let inv = poly_mod_inverse(&self.coeffs, &modpoly)
            .expect("nonzero element of a field is invertible");
        Ok(Cyclo::from_dense(self.order, inv))
    }

    pub fn pow(&self, e: i64) -> Cyclo {
        if e < 0 {
            return self.inverse().expect("pow of zero").pow(-e);
        }
        let mut acc = Cyclo::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `x * conj(x)`; rational and nonnegative for the values handled here.
    pub fn abs_sq(&self) -> Cyclo {
        self.mul(&self.conj())
    }

    pub fn is_unimodular(&self) -> bool {
        self.abs_sq() == Cyclo::one()
    }

    /// Evaluation at `zeta_N = exp(2*pi*i/N)` in double precision.
    pub fn embed(&self) -> Complex64 {
        let n = self.order as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / n;
            let cf = c.to_f64().expect("rational representable as f64");
            acc += Complex64::new(theta.cos(), theta.sin()) * cf;
        }
        acc
    }
}

fn poly_deg(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn poly_divmod(num: &[Rational], den: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let dd = poly_deg(den).expect("division by zero polynomial");
    let lead = den[dd].clone();
    let mut rem: Vec<Rational> = num.to_vec();
    let nd = match poly_deg(&rem) {
        Some(d) if d >= dd => d,
        _ => return (vec![Rational::zero()], rem),
    };
    let mut quot = vec![Rational::zero(); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = &rem[k + dd] / &lead;
        if !c.is_zero() {
            for i in 0..=dd {
                if !den[i].is_zero() {
                    let delta = &c * &den[i];
                    let cur = std::mem::replace(&mut rem[k + i], Rational::zero());
                    rem[k + i] = cur - delta;
                }
            }
        }
        quot[k] = c;
    }
    (quot, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let cur = std::mem::replace(&mut out[i + j], Rational::zero());
            out[i + j] = cur + x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).cloned().unwrap_or_else(Rational::zero);
        let y = b.get(i).cloned().unwrap_or_else(Rational::zero);
        *o = x - y;
    }
    out
}

/// Inverse of `a` modulo `modpoly` (monic, irreducible over Q).
fn poly_mod_inverse(a: &[Rational], modpoly: &[Rational]) -> Option<Vec<Rational>> {
    let mut r0: Vec<Rational> = modpoly.to_vec();
    let mut r1: Vec<Rational> = a.to_vec();
    let mut t0: Vec<Rational> = vec![Rational::zero()];
    let mut t1: Vec<Rational> = vec![Rational::one()];
    loop {
        let d1 = poly_deg(&r1)?;
        if d1 == 0 {
            let c = r1[0].clone();
            let mut out: Vec<Rational> = t1.iter().map(|x| x / &c).collect();
            // reduce mod modpoly
            let (_, rem) = poly_divmod(&out, modpoly);
            out = rem;
            return Some(out);
        }
        let (q, rem) = poly_divmod(&r0, &r1);
        r0 = std::mem::replace(&mut r1, rem);
        let tn = poly_sub(&t0, &poly_mul(&q, &t1));
        t0 = std::mem::replace(&mut t1, tn);
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        let m = self.common_order(other);
        let a = self.promote(m);
        let b = other.promote(m);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclo {}

impl std::fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cyclo(order={}, {})", self.order, self)
    }
}

impl std::fmt::Display for Cyclo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{c}")?;
            } else if k == 1 {
                write!(f, "({c})*z{}", self.order)?;
            } else {
                write!(f, "({c})*z{}^{k}", self.order)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl std::ops::Add for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        Cyclo::add(self, rhs)
    }
}

impl std::ops::Sub for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        Cyclo::sub(self, rhs)
    }
}

impl std::ops::Mul for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        Cyclo::mul(self, rhs)
    }
}

impl std::ops::Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo::neg(self)
    }
}

/// `zeta_N^k = exp(2*pi*i*k/N)`, stored at the minimal order `N/gcd(N,k)`.
pub fn root_of_unity(n: u64, k: i64) -> Cyclo {
    assert!(n >= 1, "order must be positive");
    let k = k.rem_euclid(n as i64) as u64;
    let g = k.gcd(&n);
    let (n, k) = (n / g, k / g);
    assert!(n <= MAX_ORDER, "cyclotomic order cap exceeded: {n}");
    // +-1 are rational; keep them at order 1
    if n == 1 {
        return Cyclo::one();
    }
    if n == 2 {
        return Cyclo::from_int(-1);
    }
    let mut dense = vec![Rational::zero(); n as usize];
    dense[k as usize] = Rational::one();
    Cyclo::from_dense(n, dense)
}

/// The local additive character at `p`: `e_p(x) = exp(-2*pi*i*{x}_p)`.
pub fn e_p(x: &Rational, p: u64) -> Cyclo {
    let f = frac_p(x, p);
    if f.is_zero() {
        return Cyclo::one();
    }
    let pk = f.denom().to_u64().expect("p-power denominator fits u64");
    let m = f.numer().to_i64().expect("fractional part numerator fits i64");
    root_of_unity(pk, -m)
}

/// `exp(2*pi*i*x)` for rational `x`.
pub fn e_inf_rat(x: &Rational) -> Cyclo {
    if x.is_zero() {
        return Cyclo::one();
    }
    let den = x.denom().to_u64().expect("denominator fits u64");
    let num = x.numer().mod_floor(x.denom()).to_i64().expect("numerator fits i64");
    root_of_unity(den, num)
}

/// `eps_d`: 1 for `d = 1 mod 4`, the imaginary unit for `d = 3 mod 4`.
pub fn eps_d(d: &BigInt) -> Result<Cyclo, NumericError> {
    if d.is_even() {
        return Err(NumericError::NotCoprime(2));
    }
    let r = d.mod_floor(&BigInt::from(4)).to_u64().unwrap();
    Ok(if r == 1 { Cyclo::one() } else { Cyclo::i() })
}

pub fn eps_d_i64(d: i64) -> Result<Cyclo, NumericError> {
    eps_d(&BigInt::from(d))
}

/// Quadratic Gauss sum `sum_n (n/p) zeta_p^n` for odd prime `p`. Its value
/// is `sqrt(p)` for `p = 1 mod 4` and `i*sqrt(p)` for `p = 3 mod 4`, i.e.
/// `eps_p * sqrt(p)` in both cases.
pub fn quadratic_gauss(p: u64) -> Cyclo {
    assert!(p > 2 && is_prime_u64(p));
    let mut acc = Cyclo::zero();
    for n in 1..p {
        let s = kronecker_i64(n as i64, p as i64);
        if s == 1 {
            acc = acc.add(&root_of_unity(p, n as i64));
        } else {
            acc = acc.sub(&root_of_unity(p, n as i64));
        }
    }
    acc
}

/// A cyclotomic square root of `p` whose complex embedding is the positive
/// real root. For `p = 1 mod 4` this is the quadratic Gauss sum itself; for
/// `p = 3 mod 4` it is `zeta_4^{-1}` times the Gauss sum, inside
/// `Q(zeta_{4p})`; `sqrt(2) = zeta_8 + zeta_8^{-1}`.
pub fn sqrt_of_prime(p: u64) -> Cyclo {
    assert!(is_prime_u64(p), "sqrt_of_prime needs a prime");
    if p == 2 {
        return root_of_unity(8, 1).add(&root_of_unity(8, -1));
    }
    let g = quadratic_gauss(p);
    if p % 4 == 1 {
        g
    } else {
        root_of_unity(4, -1).mul(&g)
    }
}

/// Exponentiation helper for prime powers `p^k` as u64 with overflow check.
pub fn pow_u64(p: u64, k: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..k {
        acc = acc.checked_mul(p).expect("prime power overflow");
    }
    acc
}

/// `p^{f/2}` as a Cyclo: integer part times `sqrt(p)` when `f` is odd.
pub fn prime_power_sqrt(p: u64, f: u32) -> Cyclo {
    let whole = pow_u64(p, f / 2);
    let base = Cyclo::from_rational(Rational::from_integer(BigInt::from(whole)));
    if f % 2 == 1 {
        base.mul(&sqrt_of_prime(p))
    } else {
        base
    }
}

pub fn vp_u64(n: u64, p: u64) -> u32 {
    vp_int(&BigInt::from(n), p) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn roots_of_unity_basics() {
        let i = root_of_unity(4, 1);
        assert!(close(i.embed(), Complex64::new(0.0, 1.0), 1e-14));
        assert_eq!(root_of_unity(8, 1).pow(8), Cyclo::one());
        let z3 = root_of_unity(3, 1);
        let z32 = root_of_unity(3, 2);
        assert_eq!(z3.add(&z32), Cyclo::from_int(-1));
        // depends only on k mod N
        assert_eq!(root_of_unity(12, 5), root_of_unity(12, 17));
        assert_eq!(root_of_unity(12, -7), root_of_unity(12, 5));
    }

    #[test]
    fn e_p_values() {
        assert_eq!(e_p(&rat(1, 5), 5), root_of_unity(5, -1));
        assert_eq!(e_p(&rat_int(2), 5), Cyclo::one());
        assert_eq!(e_p(&rat(1, 2), 2), Cyclo::from_int(-1));
    }

    #[test]
    fn sqrt_of_prime_values() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let s = sqrt_of_prime(p);
            assert_eq!(s.mul(&s), Cyclo::from_int(p as i64), "sqrt({p})^2");
            let e = s.embed();
            assert!(
                (e.re - (p as f64).sqrt()).abs() < 1e-12 && e.im.abs() < 1e-12,
                "embedding of sqrt({p}) = {e}"
            );
        }
    }

    #[test]
    fn conj_and_inverse() {
        assert_eq!(root_of_unity(5, 1).conj(), root_of_unity(5, 4));
        assert_eq!(
            root_of_unity(8, 3).inverse().unwrap(),
            root_of_unity(8, 5)
        );
        let x = root_of_unity(12, 5)
            .add(&Cyclo::from_int(2))
            .mul(&root_of_unity(8, 1));
        assert_eq!(x.conj().conj(), x);
        assert_eq!(x.mul(&x.inverse().unwrap()), Cyclo::one());
        assert!(close(x.conj().embed(), x.embed().conj(), 1e-12));
    }

    #[test]
    fn eps_d_values() {
        assert_eq!(eps_d_i64(1).unwrap(), Cyclo::one());
        assert_eq!(eps_d_i64(3).unwrap(), Cyclo::i());
        assert_eq!(eps_d_i64(-1).unwrap(), Cyclo::i());
        assert!(eps_d_i64(2).is_err());
    }

    #[test]
    fn embedding_is_ring_hom() {
        let samples = [
            root_of_unity(7, 2).add(&Cyclo::from_int(1)),
            root_of_unity(24, 5).mul_rat(&rat(3, 2)),
            sqrt_of_prime(5).sub(&root_of_unity(3, 1)),
            root_of_unity(16, 3).add(&root_of_unity(9, 4)),
        ];
        for x in &samples {
            for y in &samples {
                assert!(
                    close(x.mul(y).embed(), x.embed() * y.embed(), 1e-10),
                    "embed multiplicative on {x}, {y}"
                );
                assert!(close(x.add(y).embed(), x.embed() + y.embed(), 1e-10));
            }
        }
    }

    #[test]
    fn equality_promotes_consistently() {
        let a = root_of_unity(6, 1);
        let b = root_of_unity(12, 2);
        let c = root_of_unity(24, 4);
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a, c);
        assert_ne!(a, root_of_unity(12, 5));
        // -zeta_3^2 = zeta_6: a relation across orders
        assert_eq!(root_of_unity(3, 2).neg(), root_of_unity(6, 1));
    }

    #[test]
    fn rational_detection() {
        let half = Cyclo::from_rational(rat(1, 2));
        assert_eq!(half.as_rational(), Some(rat(1, 2)));
        let s5 = sqrt_of_prime(5);
        assert_eq!(s5.as_rational(), None);
        assert_eq!(s5.mul(&s5).as_rational(), Some(rat_int(5)));
    }

    #[test]
    fn gauss_sum_magnitudes() {
        for p in [3u64, 5, 7, 11] {
            let g = quadratic_gauss(p);
            assert_eq!(g.abs_sq(), Cyclo::from_int(p as i64));
        }
    }
}
