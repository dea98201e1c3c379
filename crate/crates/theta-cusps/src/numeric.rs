//! Exact rational scalars and local number theory: p-adic valuations and
//! fractional parts, Legendre/Kronecker symbols, and Hilbert symbols over
//! R and Q_p for rational arguments.
//!
//! Everything here is exact; integers are arbitrary precision throughout
//! because conductor/lcm products like `[w^2, N]` overflow 64 bits already
//! at N = 14400.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// The universal exact scalar: reduced fraction with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("Hilbert symbol arguments must be nonzero")]
    ZeroHilbertArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("denominator not coprime to modulus {0}")]
    NotCoprime(u64),
    #[error("value too large for exact factorization")]
    FactorOverflow,
}

/// A place of Q: the archimedean place or a finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl Place {
    /// Finite place at `p`; the primality of `p` is verified here, so a
    /// `Place::Prime` obtained through this constructor is always valid.
    pub fn prime(p: u64) -> Result<Self, NumericError> {
        if is_prime_u64(p) {
            Ok(Place::Prime(p))
        } else {
            Err(NumericError::NotPrime(p))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Prime(_))
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Reduced fraction n/d.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(big(n), big(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(big(n))
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u64(acc, a, m);
        }
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Exponent of `p` in a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "vp_int of zero");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

/// `vp(x, p)`: the exponent of `p` in a nonzero rational.
pub fn vp(x: &Rational, p: u64) -> Result<i64, NumericError> {
    if x.is_zero() {
        return Err(NumericError::ZeroValuation);
    }
    Ok(vp_int(x.numer(), p) - vp_int(x.denom(), p))
}

/// True when `x` is zero or `vp(x) >= k`; the p-integrality test used by
/// membership checks, where zero entries always pass.
pub fn vp_ge(x: &Rational, p: u64, k: i64) -> bool {
    x.is_zero() || vp(x, p).unwrap() >= k
}

/// Strip the p-part of a nonzero rational: returns `x / p^{vp(x)}`.
pub fn unit_part(x: &Rational, p: u64) -> Rational {
    let v = vp(x, p).expect("unit_part of zero");
    let pk = Rational::from_integer(BigInt::from(p)).pow(v as i32);
    x / pk
}

fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    // extended Euclid on (a mod m, m)
    let a = a.mod_floor(m);
    let (mut old_r, mut r) = (a, m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let tmp = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, tmp);
        let tmp = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, tmp);
    }
    if old_r.is_one() {
        Some(old_s.mod_floor(m))
    } else {
        None
    }
}

/// The p-adic fractional part `{x}_p` in `[0, 1)`: the unique fraction with
/// p-power denominator such that `x - {x}_p` is p-integral. Accepts any
/// rational; the prime-to-p part of the denominator is cleared with a
/// modular inverse.
pub fn frac_p(x: &Rational, p: u64) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    let v = vp(x, p).unwrap();
    if v >= 0 {
        return Rational::zero();
    }
    let k = (-v) as u32;
    let pk = BigInt::from(p).pow(k);
    let b = x.denom() / &pk; // prime-to-p denominator
    let inv = modinv(&b, &pk).expect("denominator coprime to p^k by construction");
    let m = (x.numer() * inv).mod_floor(&pk);
    BigRational::new(m, pk)
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    debug_assert!(p > 2 && is_prime_u64(p));
    let pb = BigInt::from(p);
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return 0;
    }
    let e = (&pb - 1u32) / 2u32;
    let s = r.modpow(&e, &pb);
    if s.is_one() {
        1
    } else {
        -1
    }
}

pub fn legendre_i64(a: i64, p: u64) -> i32 {
    legendre(&big(a), p)
}

fn jacobi_odd(a: &BigInt, n: &BigInt) -> i32 {
    // Jacobi symbol for odd n > 0.
    debug_assert!(n.is_positive() && n.is_odd());
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1i32;
    let three = big(3);
    let four = big(4);
    let five = big(5);
    let eight = big(8);
    while !a.is_zero() {
        while a.is_even() {
            a /= 2;
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`, extending the Jacobi symbol to all integers n.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i32 {
    if n.is_zero() {
        return if a.magnitude() == &BigInt::one().to_biguint().unwrap() {
            1
        } else {
            0
        };
    }
    let mut result = 1i32;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let mut e = 0u32;
    while n.is_even() {
        n /= 2;
        e += 1;
    }
    if e > 0 {
        if a.is_even() {
            return 0;
        }
        if e % 2 == 1 {
            let r = a.mod_floor(&big(8)).to_i64().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    result * jacobi_odd(a, &n)
}

pub fn kronecker_i64(a: i64, n: i64) -> i32 {
    kronecker(&big(a), &big(n))
}

/// Residue of a rational with denominator coprime to `m`, computed via a
/// modular inverse. Used to lift p-adic units to integer representatives.
pub fn unit_residue(x: &Rational, m: u64) -> Result<u64, NumericError> {
    let mb = BigInt::from(m);
    let den = x.denom().mod_floor(&mb);
    let inv = modinv(&den, &mb).ok_or(NumericError::NotCoprime(m))?;
    let r = (x.numer() * inv).mod_floor(&mb);
    Ok(r.to_u64().unwrap())
}

fn eps_mod2(u_mod4: u64) -> u32 {
    // (u-1)/2 mod 2 for odd u
    match u_mod4 {
        1 => 0,
        3 => 1,
        _ => unreachable!("odd unit expected"),
    }
}

fn omega_mod2(u_mod8: u64) -> u32 {
    // (u^2-1)/8 mod 2 for odd u
    match u_mod8 {
        1 | 7 => 0,
        3 | 5 => 1,
        _ => unreachable!("odd unit expected"),
    }
}

/// Hilbert symbol `(a, b)_v` in `{+1, -1}`: whether `z^2 = a x^2 + b y^2`
/// has a nontrivial solution over the completion at `v`.
///
/// At the infinite place the symbol is -1 exactly when both arguments are
/// negative. At p = 2 the closed form is
/// `(-1)^{eps(u)eps(w) + alpha*omega(w) + beta*omega(u)}`, and at odd p it
/// is `(-1)^{alpha*beta*(p-1)/2} (u/p)^beta (w/p)^alpha`, where
/// `a = p^alpha u`, `b = p^beta w` with units u, w.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: Place) -> Result<i32, NumericError> {
    if a.is_zero() || b.is_zero() {
        return Err(NumericError::ZeroHilbertArgument);
    }
    match v {
        Place::Infinity => Ok(if a.is_negative() && b.is_negative() {
            -1
        } else {
            1
        }),
        Place::Prime(2) => {
            let alpha = vp(a, 2).unwrap();
            let beta = vp(b, 2).unwrap();
            let u = unit_part(a, 2);
            let w = unit_part(b, 2);
            let u8 = unit_residue(&u, 8)?;
            let w8 = unit_residue(&w, 8)?;
            let exp = eps_mod2(u8 % 4) * eps_mod2(w8 % 4)
                + (alpha.rem_euclid(2) as u32) * omega_mod2(w8)
                + (beta.rem_euclid(2) as u32) * omega_mod2(u8);
            Ok(if exp.is_multiple_of(2) { 1 } else { -1 })
        }
        Place::Prime(p) => {
            let alpha = vp(a, p).unwrap();
            let beta = vp(b, p).unwrap();
            let u = unit_part(a, p);
            let w = unit_part(b, p);
            let lu = legendre(&big(unit_residue(&u, p)? as i64), p);
            let lw = legendre(&big(unit_residue(&w, p)? as i64), p);
            let mut sign = 1i32;
            if alpha.rem_euclid(2) == 1 && beta.rem_euclid(2) == 1 && (p - 1) / 2 % 2 == 1 {
                sign = -sign;
            }
            if beta.rem_euclid(2) == 1 {
                sign *= lu;
            }
            if alpha.rem_euclid(2) == 1 {
                sign *= lw;
            }
            Ok(sign)
        }
    }
}

/// Trial-division factorization. Inputs in this crate are conductors, lcms
/// and matrix entries of modest size; anything bigger is a bug upstream.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0);
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Distinct primes dividing numerator or denominator of a nonzero rational.
pub fn prime_support(x: &Rational) -> Result<Vec<u64>, NumericError> {
    let mut primes = Vec::new();
    for part in [x.numer(), x.denom()] {
        let m = part
            .magnitude()
            .to_u64()
            .ok_or(NumericError::FactorOverflow)?;
        if m > 1 {
            for (p, _) in factor_u64(m) {
                if !primes.contains(&p) {
                    primes.push(p);
                }
            }
        }
    }
    primes.sort_unstable();
    Ok(primes)
}

pub fn divisors_u64(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(n) {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut pe = 1u64;
            for _ in 0..=e {
                next.push(d * pe);
                pe = pe.saturating_mul(p);
            }
        }
        out = next;
    }
    out.sort_unstable();
    out
}

pub fn euler_phi(n: u64) -> u64 {
    let mut out = n;
    for (p, _) in factor_u64(n) {
        out = out / p * (p - 1);
    }
    out
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}
