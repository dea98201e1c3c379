//! SL(2,Q) matrix algebra, the Kubota 2-cocycle at every place, the adelic
//! sign `s_A`, generator-word decomposition inside `K_p^{(M)}`, scaling
//! matrices in `Gamma^{(M)}`, and cusp enumeration for `Gamma_0(N)`.

use crate::numeric::{
    big, divisors_u64, euler_phi, gcd_u64, hilbert_symbol, lcm_u64, prime_support, rat_int, vp,
    vp_ge, NumericError, Place, Rational,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix determinant must be 1, got {0}")]
    BadDeterminant(Rational),
    #[error("cusp u/w must be reduced: gcd({0}, {1}) > 1")]
    CuspNotReduced(i64, u64),
    #[error("w = {0} does not divide the level square {1}")]
    BadCuspDenominator(u64, u64),
    #[error("not in K_{p}^{{({m})}}: entry {entry} = {value} fails the valuation bound")]
    NotInKp {
        p: u64,
        m: u64,
        entry: char,
        value: Rational,
    },
    #[error("generator word exceeded the {0}-token cap")]
    WordTooLong(usize),
    #[error("five-factor decomposition needs u != 0")]
    ZeroCuspNumerator,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// An element of SL(2, Q).
#[derive(Clone, PartialEq, Eq)]
pub struct Mat2Q {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Mat2Q {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self, MatError> {
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(MatError::BadDeterminant(det));
        }
        Ok(Mat2Q { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self, MatError> {
        Self::new(rat_int(a), rat_int(b), rat_int(c), rat_int(d))
    }

    pub fn identity() -> Self {
        Mat2Q {
            a: Rational::one(),
            b: Rational::zero(),
            c: Rational::zero(),
            d: Rational::one(),
        }
    }

    /// `[[1, x], [0, 1]]`
    pub fn unip(x: Rational) -> Self {
        Mat2Q {
            a: Rational::one(),
            b: x,
            c: Rational::zero(),
            d: Rational::one(),
        }
    }

    /// `[[x, 0], [0, 1/x]]`
    pub fn diag(x: Rational) -> Self {
        assert!(!x.is_zero());
        Mat2Q {
            a: x.clone(),
            b: Rational::zero(),
            c: Rational::zero(),
            d: x.recip(),
        }
    }

    /// `[[0, 1/m], [-m, 0]]`, the scaled flip.
    pub fn flip_scaled(m: &Rational) -> Self {
        assert!(!m.is_zero());
        Mat2Q {
            a: Rational::zero(),
            b: m.recip(),
            c: -m.clone(),
            d: Rational::zero(),
        }
    }

    pub fn mul(&self, o: &Mat2Q) -> Mat2Q {
        Mat2Q {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> Mat2Q {
        Mat2Q {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    pub fn neg(&self) -> Mat2Q {
        Mat2Q {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.c.is_zero()
    }

    /// Membership in `Gamma^{(M)} = diag(1,M) SL(2,Z) diag(1,M)^{-1}`:
    /// integer diagonal, `b` in `(1/M)Z`, `c` in `MZ`.
    pub fn in_gamma_m(&self, m: u64) -> bool {
        let mr = rat_int(m as i64);
        self.a.is_integer()
            && self.d.is_integer()
            && (&self.b * &mr).is_integer()
            && (&self.c / &mr).is_integer()
    }
}

impl std::ops::Mul for &Mat2Q {
    type Output = Mat2Q;
    fn mul(self, rhs: &Mat2Q) -> Mat2Q {
        Mat2Q::mul(self, rhs)
    }
}

impl std::fmt::Debug for Mat2Q {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl std::fmt::Display for Mat2Q {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// An element of the metaplectic double cover: a matrix with a sign.
#[derive(Clone, PartialEq, Debug)]
pub struct MetaElem {
    pub g: Mat2Q,
    pub zeta: i32,
}

impl MetaElem {
    pub fn new(g: Mat2Q, zeta: i32) -> Self {
        assert!(zeta == 1 || zeta == -1);
        MetaElem { g, zeta }
    }
}

/// `x(g)`: the lower-left entry when nonzero, else the lower-right.
pub fn kubota_x(g: &Mat2Q) -> Rational {
    if g.c.is_zero() {
        g.d.clone()
    } else {
        g.c.clone()
    }
}

/// The correction factor `s_v(g)`: `(c,d)_v` at a finite place when
/// `cd != 0` and `ord(c)` is odd, else 1.
pub fn s_v(g: &Mat2Q, v: Place) -> i32 {
    match v {
        Place::Infinity => 1,
        Place::Prime(p) => {
            if g.c.is_zero() || g.d.is_zero() {
                return 1;
            }
            if vp(&g.c, p).unwrap().rem_euclid(2) == 0 {
                return 1;
            }
            hilbert_symbol(&g.c, &g.d, v).unwrap()
        }
    }
}

/// The Kubota 2-cocycle
/// `beta_v(g1,g2) = (x(g1),x(g2))_v (-x(g1)x(g2), x(g1 g2))_v s(g1)s(g2)s(g1 g2)`.
pub fn beta_v(g1: &Mat2Q, g2: &Mat2Q, v: Place) -> i32 {
    let x1 = kubota_x(g1);
    let x2 = kubota_x(g2);
    let x12 = kubota_x(&g1.mul(g2));
    let mut sign = hilbert_symbol(&x1, &x2, v).unwrap();
    sign *= hilbert_symbol(&(-(&x1 * &x2)), &x12, v).unwrap();
    sign * s_v(g1, v) * s_v(g2, v) * s_v(&g1.mul(g2), v)
}

/// Metaplectic multiplication `(g1, z1)(g2, z2) = (g1 g2, beta_v z1 z2)`.
pub fn meta_mul(x: &MetaElem, y: &MetaElem, v: Place) -> MetaElem {
    MetaElem::new(x.g.mul(&y.g), beta_v(&x.g, &y.g, v) * x.zeta * y.zeta)
}

fn candidate_primes(values: &[&Rational]) -> Vec<u64> {
    let mut primes = vec![2u64];
    for x in values {
        if x.is_zero() {
            continue;
        }
        for p in prime_support(x).expect("entries small enough to factor") {
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes
}

/// `s_A(g) = prod_p s_p(g)`: nontrivial only at primes where `ord_p(c)` is
/// odd, so the product runs over the primes dividing 2cd.
pub fn s_adelic(g: &Mat2Q) -> i32 {
    if g.c.is_zero() || g.d.is_zero() {
        return 1;
    }
    let mut sign = 1;
    for p in candidate_primes(&[&g.c, &g.d]) {
        sign *= s_v(g, Place::Prime(p));
    }
    sign
}

/// `prod_p beta_p(g1, g2)` over all finite places; only primes dividing the
/// entries of the three x-values and the s-factor data can contribute.
pub fn beta_finite(g1: &Mat2Q, g2: &Mat2Q) -> i32 {
    let g12 = g1.mul(g2);
    let x1 = kubota_x(g1);
    let x2 = kubota_x(g2);
    let x12 = kubota_x(&g12);
    let mut values: Vec<&Rational> = vec![&x1, &x2, &x12];
    for g in [g1, g2, &g12] {
        if !g.c.is_zero() {
            values.push(&g.c);
        }
        if !g.d.is_zero() {
            values.push(&g.d);
        }
    }
    let mut sign = 1;
    for p in candidate_primes(&values) {
        sign *= beta_v(g1, g2, Place::Prime(p));
    }
    sign
}

/// A generator token of `K_p^{(M)}`: the scaled flip `[[0,1/M],[-M,0]]` or
/// the scaled unipotent `[[1, x/M],[0,1]]` with p-integral x.
#[derive(Clone, PartialEq, Debug)]
pub enum GenToken {
    Flip,
    Upper(Rational),
}

/// A word in the `K_p^{(M)}` generators whose left-to-right product
/// reproduces the decomposed matrix exactly.
#[derive(Clone, Debug)]
pub struct GeneratorWord {
    pub p: u64,
    pub scale: u64,
    pub tokens: Vec<GenToken>,
}

pub const WORD_CAP: usize = 10_000;

impl GeneratorWord {
    pub fn token_matrix(&self, t: &GenToken) -> Mat2Q {
        let m = rat_int(self.scale as i64);
        match t {
            GenToken::Flip => Mat2Q::flip_scaled(&m),
            GenToken::Upper(x) => Mat2Q::unip(x / &m),
        }
    }

    /// Product of the tokens, left to right.
    pub fn product(&self) -> Mat2Q {
        let mut acc = Mat2Q::identity();
        for t in &self.tokens {
            acc = acc.mul(&self.token_matrix(t));
        }
        acc
    }

    /// Accumulated Kubota sign of the word at `p`: the sign `B` such that
    /// `(t_1,1)(t_2,1)...(t_k,1) = (product, B)` in the double cover.
    pub fn cocycle_sign(&self) -> i32 {
        let v = Place::Prime(self.p);
        let mut acc = Mat2Q::identity();
        let mut sign = 1;
        for (i, t) in self.tokens.iter().enumerate() {
            let m = self.token_matrix(t);
            if i > 0 {
                sign *= beta_v(&acc, &m, v);
            }
            acc = acc.mul(&m);
        }
        sign
    }
}

/// Membership test for `K_p^{(M)}`: diagonal p-integral, `b` in `M^{-1}Z_p`,
/// `c` in `M Z_p`.
pub fn kp_membership(g: &Mat2Q, p: u64, m: u64) -> Result<(), MatError> {
    let e = crate::cyclotomic::vp_u64(m, p) as i64;
    let checks = [
        ('a', &g.a, 0i64),
        ('b', &g.b, -e),
        ('c', &g.c, e),
        ('d', &g.d, 0),
    ];
    for (entry, value, bound) in checks {
        if !vp_ge(value, p, bound) {
            return Err(MatError::NotInKp {
                p,
                m,
                entry,
                value: value.clone(),
            });
        }
    }
    Ok(())
}

/// `lower(y) = [[1,0],[y,1]]` as flip/unipotent tokens:
/// `flip^3 upper(-y) flip`.
fn lower_word(y: &Rational, out: &mut Vec<GenToken>) {
    out.push(GenToken::Flip);
    out.push(GenToken::Flip);
    out.push(GenToken::Flip);
    if !y.is_zero() {
        out.push(GenToken::Upper(-y.clone()));
    }
    out.push(GenToken::Flip);
}

/// `diag(x, 1/x)` for a p-adic unit x, via
/// `upper(x-1) lower(1) upper(-(x-1)/x) lower(-x)`.
fn diag_word(x: &Rational, out: &mut Vec<GenToken>) {
    if x.is_one() {
        return;
    }
    let xm1 = x - Rational::one();
    if !xm1.is_zero() {
        out.push(GenToken::Upper(xm1.clone()));
    }
    lower_word(&Rational::one(), out);
    let t = -(&xm1 / x);
    if !t.is_zero() {
        out.push(GenToken::Upper(t));
    }
    lower_word(&(-x.clone()), out);
}

/// Decompose g in `K_p^{(M)}` into a word in the scaled flip and scaled
/// unipotents with p-integral parameters. The word is found by conjugating
/// into SL(2, Z_p) and clearing entries with unipotents and flips; the
/// diagonal leftover expands through the four-factor unipotent identity.
/// The token product is verified to equal g exactly before returning.
pub fn decompose_in_kp(g: &Mat2Q, p: u64, m: u64) -> Result<GeneratorWord, MatError> {
    kp_membership(g, p, m)?;
    // h = diag(1,M)^{-1} g diag(1,M) has p-integral entries
    let mr = rat_int(m as i64);
    let h = Mat2Q {
        a: g.a.clone(),
        b: &g.b * &mr,
        c: &g.c / &mr,
        d: g.d.clone(),
    };
    let mut tokens = Vec::new();
    if h.c.is_zero() {
        // upper triangular: h = upper(a*b) diag(a, 1/a)
        let ab = &h.a * &h.b;
        if !ab.is_zero() {
            tokens.push(GenToken::Upper(ab));
        }
        diag_word(&h.a, &mut tokens);
    } else if vp(&h.c, p).unwrap() > 0 {
        // c nonzero but divisible by p forces d to be a unit:
        // h = upper(b/d) lower(c*d) diag(1/d, d)
        let bd = &h.b / &h.d;
        if !bd.is_zero() {
            tokens.push(GenToken::Upper(bd));
        }
        lower_word(&(&h.c * &h.d), &mut tokens);
        diag_word(&h.d.recip(), &mut tokens);
    } else {
        // c is a unit: h = upper(a/c) flip diag(-c, -1/c) upper(d/c)
        let ac = &h.a / &h.c;
        if !ac.is_zero() {
            tokens.push(GenToken::Upper(ac));
        }
        tokens.push(GenToken::Flip);
        diag_word(&(-h.c.clone()), &mut tokens);
        let dc = &h.d / &h.c;
        if !dc.is_zero() {
            tokens.push(GenToken::Upper(dc));
        }
    }
    if tokens.len() > WORD_CAP {
        return Err(MatError::WordTooLong(WORD_CAP));
    }
    let word = GeneratorWord {
        p,
        scale: m,
        tokens,
    };
    assert_eq!(word.product(), *g, "token product must rebuild the input");
    Ok(word)
}

/// A cusp `u/w` of the upper half plane, reduced, with the point at
/// infinity encoded as `(1, 0)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Cusp {
    pub u: i64,
    pub w: u64,
}

impl Cusp {
    pub fn infinity() -> Self {
        Cusp { u: 1, w: 0 }
    }

    pub fn new(u: i64, w: u64) -> Result<Self, MatError> {
        if w == 0 {
            return if u == 1 {
                Ok(Self::infinity())
            } else {
                Err(MatError::CuspNotReduced(u, 0))
            };
        }
        if gcd_u64(u.unsigned_abs(), w) != 1 {
            return Err(MatError::CuspNotReduced(u, w));
        }
        Ok(Cusp { u, w })
    }

    pub fn is_infinity(&self) -> bool {
        self.w == 0
    }
}

impl std::fmt::Display for Cusp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.u, self.w)
        }
    }
}

/// A scaling matrix in `Gamma^{(M)}` for the cusp u/w of `Gamma_0(M^2)`,
/// together with the Bezout data `u M s - r w = (M, w)` that pins it down.
#[derive(Clone, Debug)]
pub struct ScalingMatrix {
    pub sigma: Mat2Q,
    pub r: BigInt,
    pub s: BigInt,
    pub cusp: Cusp,
    pub m: u64,
}

/// Construct the scaling matrix
/// `[[ u[M,w]/w, r/M ], [ [M,w], s ]]` with `u M s - r w = (M, w)`.
/// `r` is normalized to the least nonnegative residue modulo `|u| M/(M,w)`
/// (for the cusp 0 it is forced to -(M,w)/w = -1 with s = 0). The cusp at
/// infinity gets the identity.
pub fn scaling_matrix(u: i64, w: u64, m: u64) -> Result<ScalingMatrix, MatError> {
    let cusp = Cusp::new(u, w)?;
    if cusp.is_infinity() {
        return Ok(ScalingMatrix {
            sigma: Mat2Q::identity(),
            r: BigInt::zero(),
            s: BigInt::one(),
            cusp,
            m,
        });
    }
    if !(m as u128 * m as u128).is_multiple_of(w as u128) {
        return Err(MatError::BadCuspDenominator(w, m * m));
    }
    let g = gcd_u64(m, w);
    let (r, s) = if u == 0 {
        // w = 1 here; -r = (M, 1) = 1
        (big(-1), BigInt::zero())
    } else {
        // extended gcd: (uM) s + w (-r) = (M, w)
        let um = big(u) * big(m as i64);
        let wb = big(w as i64);
        let (_, t0) = ext_gcd(&um, &wb, &big(g as i64));
        let r0 = -t0;
        // r is determined modulo |u| M / (M, w); reduce to least nonnegative
        let q = (big(u).abs() * big(m as i64)) / big(g as i64);
        let r = r0.mod_floor(&q);
        let s = (big(g as i64) + &r * &wb) / um;
        (r, s)
    };
    let l = lcm_u64(m, w);
    let sigma = Mat2Q::new(
        Rational::new(big(u) * big(l as i64), big(w as i64)),
        Rational::new(r.clone(), big(m as i64)),
        rat_int(l as i64),
        Rational::from_integer(s.clone()),
    )?;
    debug_assert!(sigma.in_gamma_m(m));
    Ok(ScalingMatrix {
        sigma,
        r,
        s,
        cusp,
        m,
    })
}

/// Bezout coefficients: returns (x, y) with a x + b y = g, where g is the
/// (positive) gcd handed in by the caller.
fn ext_gcd(a: &BigInt, b: &BigInt, g: &BigInt) -> (BigInt, BigInt) {
    let e = a.extended_gcd(b);
    debug_assert!(e.gcd.magnitude() == g.magnitude());
    if e.gcd == *g {
        (e.x, e.y)
    } else {
        (-e.x, -e.y)
    }
}

/// Which of the two exact factorizations of `sigma^{-1}` applies at `p`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SigmaBranch {
    /// unipotent * scaled flip * unipotent, for `v_p(w) <= v_p(M)`
    ThreeFactor,
    /// unipotent * diagonal * flip_M * unipotent * flip_M, for deeper w
    FiveFactor,
}

#[derive(Clone, Debug)]
pub struct SigmaDecomposition {
    pub branch: SigmaBranch,
    pub factors: Vec<Mat2Q>,
}

/// Exact factor list for `sigma^{-1}`, selected per the target prime:
/// three factors when `v_p(w) <= v_p(M)` (each factor then lies in
/// `K_p^{(M)}`), five when `v_p(w) > v_p(M)`. The product of the returned
/// factors is verified to equal `sigma^{-1}` exactly.
pub fn sigma_inverse_decomposition(
    u: i64,
    w: u64,
    m: u64,
    p: u64,
) -> Result<SigmaDecomposition, MatError> {
    let sm = scaling_matrix(u, w, m)?;
    let sigma_inv = sm.sigma.inverse();
    let l = lcm_u64(m, w);
    let vp_w = crate::cyclotomic::vp_u64(w.max(1), p);
    let vp_m = crate::cyclotomic::vp_u64(m, p);
    let (branch, factors) = if w == 0 || vp_w <= vp_m {
        let lr = rat_int(l as i64);
        let f = vec![
            Mat2Q::unip(-(Rational::from_integer(sm.s.clone()) / &lr)),
            Mat2Q::flip_scaled(&lr),
            Mat2Q::unip(if w == 0 {
                Rational::zero()
            } else {
                -Rational::new(big(u), big(w as i64))
            }),
        ];
        (SigmaBranch::ThreeFactor, f)
    } else {
        if u == 0 {
            return Err(MatError::ZeroCuspNumerator);
        }
        let ub = Rational::from_integer(big(u));
        let wb = rat_int(w as i64);
        let mb = rat_int(m as i64);
        let lb = rat_int(l as i64);
        let r = Rational::from_integer(sm.r.clone());
        let f = vec![
            Mat2Q::unip(-(&r * &wb) / (&lb * &mb * &ub)),
            Mat2Q::new(
                -(&wb / (&lb * &ub)),
                Rational::zero(),
                Rational::zero(),
                -(&ub * &lb) / &wb,
            )?,
            Mat2Q::flip_scaled(&mb.clone()),
            Mat2Q::unip(&wb / (&ub * &mb * &mb)),
            Mat2Q::flip_scaled(&mb),
        ];
        (SigmaBranch::FiveFactor, f)
    };
    let prod = factors
        .iter()
        .fold(Mat2Q::identity(), |acc, f| acc.mul(f));
    assert_eq!(prod, sigma_inv, "factor product must rebuild sigma^{{-1}}");
    Ok(SigmaDecomposition { branch, factors })
}

/// Complete duplicate-free cusp representatives for `Gamma_0(N)`: for each
/// w | N one representative u/w per residue class of u modulo (w, N/w)
/// coprime to w. The class of w = N is the cusp at infinity; the class of
/// w = 1 is the cusp 0.
pub fn cusps_of_gamma0(n: u64) -> Vec<Cusp> {
    assert!(n >= 1);
    let mut out = Vec::new();
    for w in divisors_u64(n) {
        if w == n {
            out.push(Cusp::infinity());
            continue;
        }
        if w == 1 {
            out.push(Cusp { u: 0, w: 1 });
            continue;
        }
        let g = gcd_u64(w, n / w);
        for x in 1..=g {
            if gcd_u64(x, g) != 1 {
                continue;
            }
            let mut u = x;
            while gcd_u64(u, w) != 1 {
                u += g;
            }
            out.push(Cusp { u: u as i64, w });
        }
    }
    out.sort_by_key(|c| (c.is_infinity(), c.w, c.u));
    out
}

/// Predicted cusp count for `Gamma_0(N)`: `sum_{w | N} phi((w, N/w))`.
pub fn cusp_count_gamma0(n: u64) -> u64 {
    divisors_u64(n)
        .into_iter()
        .map(|w| euler_phi(gcd_u64(w, n / w)))
        .sum()
}

/// Exact `Gamma_0(N)`-equivalence of two reduced cusps: with d, d' chosen
/// so that `u d = 1 (mod w)` and `u' d' = 1 (mod w')`, the cusps are
/// equivalent iff `w' d = w d' (mod gcd(w w', N))`. Infinity is the class
/// of denominators divisible by N.
pub fn cusps_equivalent(n: u64, c1: &Cusp, c2: &Cusp) -> bool {
    fn inv_mod(u: i64, w: u64) -> BigInt {
        if w == 0 {
            return big(u); // u = +/-1; exact inverse
        }
        let wb = big(w as i64);
        let e = big(u).extended_gcd(&wb);
        debug_assert!(e.gcd.magnitude().to_string() == "1");
        if e.gcd == BigInt::one() {
            e.x.mod_floor(&wb)
        } else {
            (-e.x).mod_floor(&wb)
        }
    }
    // w'd - wd' = 0 mod gcd(w w', N); with w = 0 this degenerates to N | w'
    let d1 = inv_mod(c1.u, c1.w);
    let d2 = inv_mod(c2.u, c2.w);
    let ww = big(c1.w as i64) * big(c2.w as i64);
    let modulus = if ww.is_zero() {
        big(n as i64)
    } else {
        ww.gcd(&big(n as i64))
    };
    let lhs = big(c2.w as i64) * &d1 - big(c1.w as i64) * &d2;
    lhs.mod_floor(&modulus).is_zero()
}
