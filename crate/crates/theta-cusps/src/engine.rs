//! Exact Fourier coefficients of the twisted theta series at every cusp.
//!
//! For the first twist (the quadratic character mod 12, level 576) the
//! coefficient at a scaling matrix `sigma` in `Gamma^{(24)}` is
//! `xi(sigma^{-1}) chi(m)` at the square frequencies `nu = m^2` and zero
//! elsewhere, where
//! `xi(g) = xi_2(g,1) xi_3(g,1) s_A(g) beta_inf(g^{-1}, g)`.
//!
//! For the twist by an even character psi_j mod p (level `(24p)^2`) the
//! box-indicator coordinates of the transformed local vector at p are
//! `rho_{B1,p}(sigma^{-1}) c e_j`, and the coefficient at `nu = n^2` is
//! `xi(sigma^{-1}) chi(n)` times the coordinate indexed by the square class
//! of n (the last coordinate when p | n). The identity cusp then reproduces
//! the classical expansion `chi(n) psi_j(n)` exactly, which pins the
//! normalization; the numerical oracle cross-checks it at non-identity
//! cusps.

use crate::characters::{default_generator, is_generator, DirichletCharacter};
use crate::cyclotomic::{e_inf_rat, e_p, sqrt_of_prime, vp_u64, Cyclo};
use crate::metaplectic::{
    beta_v, cusps_of_gamma0, kp_membership, scaling_matrix, sigma_inverse_decomposition, Cusp,
    Mat2Q, MatError,
};
use crate::numeric::{gcd_u64, is_prime_u64, rat, rat_int, Place, Rational};
use crate::weil::{change_of_basis, rho_b1_apply, space_dim, to_basis, xi2, xi3, BasisTag, WeilError};
use num_bigint::BigInt;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("matrix is not in Gamma^{{({0})}}")]
    NotInGamma(u64),
    #[error("unsupported twist prime {0}; need a prime in 5..=13")]
    BadTwistPrime(u64),
    #[error("twist index j={0} out of range 1..={1}")]
    BadTwistIndex(u64, u64),
    #[error("{0} does not generate the units mod {1}")]
    BadGenerator(u64, u64),
    #[error("transfer to the common scaling matrix needs a cusp with u != 0")]
    ZeroNumeratorTransfer,
    #[error(transparent)]
    Weil(#[from] WeilError),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// An exact Fourier coefficient together with its float shadow.
#[derive(Clone, Debug)]
pub struct CoeffResult {
    pub nu: u64,
    pub exact: Cyclo,
    pub approx: Complex64,
    pub abs: f64,
}

impl CoeffResult {
    pub fn from_exact(nu: u64, exact: Cyclo) -> Self {
        let approx = exact.embed();
        CoeffResult {
            nu,
            exact,
            approx,
            abs: approx.norm(),
        }
    }
}

/// The global scalar `xi(g) = xi_2(g,1) xi_3(g,1) s_A(g) beta_inf(g^{-1}, g)`
/// on `Gamma^{(24)}` and `Gamma^{(24p)}`. Membership is verified locally at
/// 2 and 3 (where the factors live); the caller guarantees the global
/// integral structure.
pub fn xi_global(g: &Mat2Q) -> Result<Cyclo, EngineError> {
    kp_membership(g, 2, 8)?;
    kp_membership(g, 3, 3)?;
    let x2 = xi2(g, 1)?;
    let x3 = xi3(g, 1)?;
    let s = crate::metaplectic::s_adelic(g);
    let binf = beta_v(&g.inverse(), g, Place::Infinity);
    let sign = Cyclo::from_int((s * binf) as i64);
    Ok(x2.mul(&x3).mul(&sign))
}

fn exact_sqrt(nu: u64) -> Option<u64> {
    let m = (nu as f64).sqrt().round() as u64;
    [m.saturating_sub(1), m, m + 1].into_iter().find(|&c| c * c == nu)
}

/// Coefficient of `theta_chi |_{1/2} sigma` at the frequency `nu`, for a
/// scaling matrix `sigma` in `Gamma^{(24)}`: `xi(sigma^{-1}) chi(m)` when
/// `nu = m^2`, zero otherwise.
pub fn coeff_first_twist(sigma: &Mat2Q, nu: u64) -> Result<CoeffResult, EngineError> {
    let m = match exact_sqrt(nu) {
        Some(m) => m,
        None => return Ok(CoeffResult::from_exact(nu, Cyclo::zero())),
    };
    let chi_m = DirichletCharacter::chi12().eval_u64(m);
    if chi_m.is_zero() {
        return Ok(CoeffResult::from_exact(nu, Cyclo::zero()));
    }
    let xi = xi_global(&sigma.inverse())?;
    Ok(CoeffResult::from_exact(nu, xi.mul(&chi_m)))
}

/// Selection of a higher twist: the even character `psi_j` mod p with
/// respect to a fixed generator of the units mod p.
#[derive(Clone, Copy, Debug)]
pub struct HigherTwist {
    pub p: u64,
    pub j: u64,
    pub generator: u64,
}

impl HigherTwist {
    pub fn new(p: u64, j: u64) -> Result<Self, EngineError> {
        Self::with_generator(p, j, default_generator(p))
    }

    pub fn with_generator(p: u64, j: u64, generator: u64) -> Result<Self, EngineError> {
        if !(5..=13).contains(&p) || !is_prime_u64(p) {
            return Err(EngineError::BadTwistPrime(p));
        }
        let jmax = (p - 3) / 2;
        if j == 0 || j > jmax {
            return Err(EngineError::BadTwistIndex(j, jmax));
        }
        if !is_generator(generator, p) {
            return Err(EngineError::BadGenerator(generator, p));
        }
        Ok(HigherTwist { p, j, generator })
    }

    pub fn level(&self) -> u64 {
        576 * self.p * self.p
    }

    pub fn psi(&self) -> DirichletCharacter {
        DirichletCharacter::psi_j(self.p, self.generator, self.j).expect("validated at construction")
    }

    /// B1 index (1-based) of the square class of n: the class of n^2 mod p,
    /// or the last slot when p | n.
    pub fn box_index(&self, n: u64) -> usize {
        let p = self.p;
        if n.is_multiple_of(p) {
            return space_dim(p);
        }
        let nsq = n % p * (n % p) % p;
        for i in 1..=(p - 1) / 2 {
            if i * i % p == nsq {
                return i as usize;
            }
        }
        unreachable!("every unit square class has a representative");
    }
}

/// The transformed local vector at p in box coordinates:
/// `rho_{B1,p}(sigma^{-1}, 1) c e_j`. All coefficients of the twisted theta
/// at this scaling matrix are read off from this vector.
pub fn higher_twist_vector(tw: &HigherTwist, sigma: &Mat2Q) -> Result<Vec<Cyclo>, EngineError> {
    if !sigma.in_gamma_m(24 * tw.p) {
        return Err(EngineError::NotInGamma(24 * tw.p));
    }
    let dim = space_dim(tw.p);
    let c = change_of_basis(tw.p, tw.generator)?;
    let mut v = vec![Cyclo::zero(); dim];
    for i in 0..dim {
        v[i] = c.get(i, (tw.j - 1) as usize).clone();
    }
    Ok(rho_b1_apply(tw.p, tw.generator, &sigma.inverse(), 1, &v)?)
}

/// Coefficient of `theta_{chi psi_j} |_{1/2} sigma` at the frequency `nu`
/// for `sigma` in `Gamma^{(24p)}`.
pub fn coeff_higher_twist(
    tw: &HigherTwist,
    sigma: &Mat2Q,
    nu: u64,
) -> Result<CoeffResult, EngineError> {
    let vec = higher_twist_vector(tw, sigma)?;
    let xi = xi_global(&sigma.inverse())?;
    Ok(coeff_from_vector(tw, &xi, &vec, nu))
}

/// Assemble one coefficient from the precomputed data (the per-table hot
/// path: the vector and xi are computed once per cusp).
pub fn coeff_from_vector(
    tw: &HigherTwist,
    xi: &Cyclo,
    vec: &[Cyclo],
    nu: u64,
) -> CoeffResult {
    let n = match exact_sqrt(nu) {
        Some(n) => n,
        None => return CoeffResult::from_exact(nu, Cyclo::zero()),
    };
    let chi_n = DirichletCharacter::chi12().eval_u64(n);
    if chi_n.is_zero() {
        return CoeffResult::from_exact(nu, Cyclo::zero());
    }
    let coord = &vec[tw.box_index(n) - 1];
    CoeffResult::from_exact(nu, xi.mul(&chi_n).mul(coord))
}

/// Transfer a coefficient from the `Gamma^{(M)}` scaling matrix to the
/// common diagonal one: multiply by `e(-nu t)` with
/// `t = w r / (M u [M, w])` taken from the Bezout data of the cusp.
pub fn coeff_sigma0_transfer(
    res: &CoeffResult,
    u: i64,
    w: u64,
    m: u64,
) -> Result<CoeffResult, EngineError> {
    if u == 0 {
        return Err(EngineError::ZeroNumeratorTransfer);
    }
    let sm = scaling_matrix(u, w, m)?;
    let l = crate::numeric::lcm_u64(m, w.max(1));
    let t = Rational::new(
        BigInt::from(w) * &sm.r,
        BigInt::from(m) * BigInt::from(u) * BigInt::from(l),
    );
    let phase = e_inf_rat(&(-t * rat_int(res.nu as i64)));
    Ok(CoeffResult::from_exact(res.nu, res.exact.mul(&phase)))
}

/// The full local matrix at 5 in the theta-vector basis (the B2 view),
/// including the global scalar: `xi(sigma^{-1}) M_5(sigma^{-1})`. Column j
/// of this matrix expresses `theta_{chi psi_j} | sigma` in terms of
/// `(theta_{chi chi_5}, theta_chi, theta_chi^{(5)})`.
pub fn five_twist_matrix(sigma: &Mat2Q) -> Result<(Cyclo, crate::weil::CycloMat), EngineError> {
    let tw = HigherTwist::new(5, 1)?;
    if !sigma.in_gamma_m(120) {
        return Err(EngineError::NotInGamma(120));
    }
    let xi = xi_global(&sigma.inverse())?;
    let rho = crate::weil::rho_b1(5, tw.generator, &sigma.inverse(), 1)?;
    let b2 = to_basis(&rho, BasisTag::B2, tw.generator)?;
    Ok((xi, b2.mat))
}

/// Coefficient via the three-column formulation at p = 5: with
/// `(c1, c2, c3)` the first column of `xi(sigma^{-1}) M_5(sigma^{-1})`,
/// the coefficient at `nu = n^2` is `chi(n) (chi_5(n) c1 + c2)` for
/// `5 ∤ n` and `chi(n) (c2 + c3)` for `5 | n`.
pub fn coeff_five_twist_columns(sigma: &Mat2Q, nu: u64) -> Result<CoeffResult, EngineError> {
    let (xi, m5) = five_twist_matrix(sigma)?;
    let c1 = xi.mul(m5.get(0, 0));
    let c2 = xi.mul(m5.get(1, 0));
    let c3 = xi.mul(m5.get(2, 0));
    let n = match exact_sqrt(nu) {
        Some(n) => n,
        None => return Ok(CoeffResult::from_exact(nu, Cyclo::zero())),
    };
    let chi_n = DirichletCharacter::chi12().eval_u64(n);
    if chi_n.is_zero() {
        return Ok(CoeffResult::from_exact(nu, Cyclo::zero()));
    }
    let chi5_n = DirichletCharacter::quadratic_mod_p(5).eval_u64(n);
    let inner = if n % 5 == 0 {
        c2.add(&c3)
    } else {
        chi5_n.mul(&c1).add(&c2)
    };
    Ok(CoeffResult::from_exact(nu, chi_n.mul(&inner)))
}

/// Conjectured absolute-value class of a cusp for the five-twist.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GgClass {
    /// `5 ∤ w` or `25 | w`: |A| = 1 on square frequencies prime to 5, else 0
    Unimodular,
    /// `5 || w`, pattern (a, 2b)
    CycleA,
    /// `5 || w`, pattern (b, 2a)
    CycleB,
}

#[derive(Clone, Debug)]
pub struct GgCuspReport {
    pub cusp: Cusp,
    pub class: GgClass,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct GgReport {
    pub p: u64,
    pub asserted: bool,
    pub cusps: Vec<GgCuspReport>,
    pub failures: usize,
}

impl GgReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for GgReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut counts = [0usize; 3];
        for c in &self.cusps {
            counts[match c.class {
                GgClass::Unimodular => 0,
                GgClass::CycleA => 1,
                GgClass::CycleB => 2,
            }] += 1;
        }
        writeln!(
            f,
            "five-twist absolute-value check at p = {}: {} cusps ({} unimodular, {} a-cycle, {} b-cycle), {} failures",
            self.p,
            self.cusps.len(),
            counts[0],
            counts[1],
            counts[2],
            self.failures
        )?;
        for c in self.cusps.iter().filter(|c| !c.ok) {
            writeln!(f, "  FAIL {}: {}", c.cusp, c.detail)?;
        }
        Ok(())
    }
}

/// Exact targets for the five-twist absolute values, inside Q(zeta_20)-
/// compatible fields: `a^2 = (5 - sqrt5)/10`, `b^2 = (5 + sqrt5)/10`,
/// `(2b)^2 = 2(5 + sqrt5)/5`, `(2a)^2 = 2(5 - sqrt5)/5`.
pub struct GgTargets {
    pub a_sq: Cyclo,
    pub b_sq: Cyclo,
    pub two_a_sq: Cyclo,
    pub two_b_sq: Cyclo,
}

impl GgTargets {
    pub fn new() -> Self {
        let s5 = sqrt_of_prime(5);
        let five = Cyclo::from_int(5);
        let a_sq = five.sub(&s5).mul_rat(&rat(1, 10));
        let b_sq = five.add(&s5).mul_rat(&rat(1, 10));
        let two_a_sq = a_sq.mul_rat(&rat_int(4));
        let two_b_sq = b_sq.mul_rat(&rat_int(4));
        GgTargets {
            a_sq,
            b_sq,
            two_a_sq,
            two_b_sq,
        }
    }

    /// `a = 2 sin(4 pi/5)/sqrt(5)` and `b = 2 sin(2 pi/5)/sqrt(5)` as
    /// floats (the checker also verifies these against the embeddings).
    pub fn a_float() -> f64 {
        2.0 * (4.0 * std::f64::consts::PI / 5.0).sin() / 5.0f64.sqrt()
    }

    pub fn b_float() -> f64 {
        2.0 * (2.0 * std::f64::consts::PI / 5.0).sin() / 5.0f64.sqrt()
    }
}

impl Default for GgTargets {
    fn default() -> Self {
        Self::new()
    }
}

/// Test frequencies for the pattern check: squares of n coprime to 12
/// covering every residue class mod 5 twice, plus n sharing a factor with
/// 12 (zero coefficients) and non-squares.
fn gg_test_roots() -> Vec<u64> {
    vec![1, 5, 7, 11, 13, 17, 19, 23, 25, 29, 31, 35]
}

/// Verify the conjectured absolute-value patterns of the five-twist
/// coefficients across all cusps of `Gamma_0(14400)` (p = 5; for other
/// supported p the classes are reported but not asserted, and the checker
/// only confirms that `|A|` depends on n through its square class mod p).
pub fn gg_check(p: u64) -> Result<GgReport, EngineError> {
    let tw = HigherTwist::new(p, 1)?;
    let level = tw.level();
    let asserted = p == 5;
    let targets = GgTargets::new();
    let chi = DirichletCharacter::chi12();
    let mut cusps_out = Vec::new();
    let mut failures = 0usize;
    for cusp in cusps_of_gamma0(level) {
        let sm = scaling_matrix(cusp.u, cusp.w, 24 * p)?;
        let vec = higher_twist_vector(&tw, &sm.sigma)?;
        let xi = xi_global(&sm.sigma.inverse())?;
        let v5w = if cusp.w == 0 { 0 } else { vp_u64(cusp.w, p) };
        let mut ok = true;
        let mut detail = String::new();

        // per-root absolute values squared, exact
        let mut abs_sq_units: Vec<(u64, Cyclo)> = Vec::new();
        let mut abs_sq_divis: Vec<(u64, Cyclo)> = Vec::new();
        for n in gg_test_roots() {
            let res = coeff_from_vector(&tw, &xi, &vec, n * n);
            let asq = res.exact.abs_sq();
            if gcd_u64(n, 12) != 1 {
                if !res.exact.is_zero() {
                    ok = false;
                    detail = format!("coefficient at n={n} should vanish (chi(n)=0)");
                }
                continue;
            }
            debug_assert!(chi.eval_u64(n) != Cyclo::zero());
            if n % p == 0 {
                abs_sq_divis.push((n, asq));
            } else {
                abs_sq_units.push((n, asq));
            }
        }
        // non-square frequencies vanish
        for nu in [2u64, 3, 8, 27] {
            let res = coeff_from_vector(&tw, &xi, &vec, nu);
            if !res.exact.is_zero() {
                ok = false;
                detail = format!("coefficient at non-square nu={nu} should vanish");
            }
        }

        let class = if p != 5 {
            // report-only: |A| must depend on n only through n^2 mod p
            let mut by_class: std::collections::HashMap<u64, Cyclo> =
                std::collections::HashMap::new();
            for (n, asq) in abs_sq_units.iter().chain(abs_sq_divis.iter()) {
                let key = n % p * (n % p) % p;
                if let Some(prev) = by_class.get(&key) {
                    if prev != asq {
                        ok = false;
                        detail = format!("|A(n^2)| not constant on the class of n^2 = {key} mod {p}");
                    }
                } else {
                    by_class.insert(key, asq.clone());
                }
            }
            GgClass::Unimodular // placeholder label in report-only mode
        } else if v5w != 1 {
            // |A| = 1 for 5 ∤ n, 0 for 5 | n
            for (n, asq) in &abs_sq_units {
                if *asq != Cyclo::one() {
                    ok = false;
                    detail = format!("|A({n}^2)|^2 = {asq}, expected 1");
                }
            }
            for (n, asq) in &abs_sq_divis {
                if !asq.is_zero() {
                    ok = false;
                    detail = format!("|A({n}^2)|^2 = {asq}, expected 0");
                }
            }
            GgClass::Unimodular
        } else {
            // 5 || w: (a, 2b) or (b, 2a), constant across each n-class
            let unit_val = &abs_sq_units[0].1;
            for (n, asq) in &abs_sq_units {
                if asq != unit_val {
                    ok = false;
                    detail = format!("|A({n}^2)|^2 differs within the unit class");
                }
            }
            let div_val = &abs_sq_divis[0].1;
            for (n, asq) in &abs_sq_divis {
                if asq != div_val {
                    ok = false;
                    detail = format!("|A({n}^2)|^2 differs within the divisible class");
                }
            }
            let class = if *unit_val == targets.a_sq && *div_val == targets.two_b_sq {
                GgClass::CycleA
            } else if *unit_val == targets.b_sq && *div_val == targets.two_a_sq {
                GgClass::CycleB
            } else {
                ok = false;
                detail = format!(
                    "pattern ({unit_val}, {div_val}) matches neither (a^2, (2b)^2) nor (b^2, (2a)^2)"
                );
                GgClass::CycleA
            };
            // float check against the stated decimal constants
            let (target_unit, target_div) = match class {
                GgClass::CycleA => (GgTargets::a_float(), 2.0 * GgTargets::b_float()),
                _ => (GgTargets::b_float(), 2.0 * GgTargets::a_float()),
            };
            for (n, _) in &abs_sq_units {
                let res = coeff_from_vector(&tw, &xi, &vec, n * n);
                if (res.abs - target_unit).abs() > 1e-9 {
                    ok = false;
                    detail = format!("float |A({n}^2)| = {} vs {target_unit}", res.abs);
                }
            }
            for (n, _) in &abs_sq_divis {
                let res = coeff_from_vector(&tw, &xi, &vec, n * n);
                if (res.abs - target_div).abs() > 1e-9 {
                    ok = false;
                    detail = format!("float |A({n}^2)| = {} vs {target_div}", res.abs);
                }
            }
            class
        };

        // product-formula crosscheck for 25 not dividing w: the matrix
        // M_5(flip part) M_5(diagonal) M_5(unipotent) from the exact
        // three-factor splitting of sigma^{-1} must reproduce the closed
        // 3x3 table in absolute value entrywise (the closed table is
        // stated only up to the omitted unipotent phase and a sign)
        if p == 5 && ok && cusp.w != 0 && v5w <= 1 {
            if let Err(msg) = five_twist_product_table_check(&tw, cusp.u, cusp.w) {
                ok = false;
                detail = msg;
            }
        }

        // cross-check against the three-column route on a few frequencies
        if p == 5 && ok {
            for n in [1u64, 5, 7] {
                let via_cols = coeff_five_twist_columns(&sm.sigma, n * n)?;
                let via_thm = coeff_from_vector(&tw, &xi, &vec, n * n);
                if via_cols.exact != via_thm.exact {
                    ok = false;
                    detail = format!("column route disagrees with box route at n={n}");
                }
            }
        }

        if !ok {
            failures += 1;
        }
        cusps_out.push(GgCuspReport {
            cusp,
            class,
            ok,
            detail,
        });
    }
    Ok(GgReport {
        p,
        asserted,
        cusps: cusps_out,
        failures,
    })
}

/// Compare `M_5(B) M_5(U)` from the three-factor splitting of
/// `sigma^{-1} = U_1 B U` against the closed-form table with entries built
/// from `cos_5(2 pi u/w)`, `sin_5(2 pi u/w)` and `chi_5([24, w_1])`,
/// `w_1 = w/(w,5)`. Only absolute values are compared: the omitted factor
/// `U_1` contributes a unipotent phase, the Kubota sign between the factors
/// is a sign, and one sine entry of the printed table carries a wrong sign.
fn five_twist_product_table_check(
    tw: &HigherTwist,
    u: i64,
    w: u64,
) -> Result<(), String> {
    let err = |e: EngineError| e.to_string();
    let dec = sigma_inverse_decomposition(u, w, 120, 5).map_err(|e| err(e.into()))?;
    debug_assert_eq!(dec.factors.len(), 3);
    let b2 = |m: &Mat2Q| -> Result<crate::weil::CycloMat, String> {
        let r = crate::weil::rho_b1(5, tw.generator, m, 1).map_err(|e| err(e.into()))?;
        Ok(to_basis(&r, BasisTag::B2, tw.generator)
            .map_err(|e| err(e.into()))?
            .mat)
    };
    let prod = b2(&dec.factors[1])?.mul(&b2(&dec.factors[2])?);

    // closed-form entries
    let x = rat(u, w as i64);
    let e_plus = e_p(&x, 5);
    let e_minus = e_p(&(-x), 5);
    let cos5 = e_plus.add(&e_minus).mul_rat(&rat(1, 2));
    let sin5 = Cyclo::i().mul(&e_plus.sub(&e_minus)).mul_rat(&rat(1, 2));
    let w1 = w / gcd_u64(w, 5);
    let a_lcm = crate::numeric::lcm_u64(24, w1);
    let chi5_a = DirichletCharacter::quadratic_mod_p(5).eval_u64(a_lcm);
    let s5 = sqrt_of_prime(5);
    let inv_s5 = s5.mul_rat(&rat(1, 5));
    let i_sin5 = Cyclo::i().mul(&sin5);
    let table = [
        [
            chi5_a.mul(&cos5).neg(),
            chi5_a.mul(&i_sin5).neg(),
            Cyclo::zero(),
        ],
        [
            i_sin5.mul(&inv_s5),
            Cyclo::one().sub(&cos5).mul(&inv_s5),
            inv_s5.clone(),
        ],
        [i_sin5.mul(&s5), s5.mul(&cos5), Cyclo::zero()],
    ];
    for i in 0..3 {
        for j in 0..3 {
            if prod.get(i, j).abs_sq() != table[i][j].abs_sq() {
                return Err(format!(
                    "product table |entry|^2 mismatch at ({i},{j}) for cusp {u}/{w}"
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::{e_p, root_of_unity};
    use crate::numeric::rat;

    #[test]
    fn xi_global_basics() {
        assert_eq!(xi_global(&Mat2Q::identity()).unwrap(), Cyclo::one());
        // translation by 1/24 acts on theta by e^{2 pi i/24}, so
        // xi(unip(-1/24)) = e(1/24); equivalently xi(unip(1/24)) = e(-1/24)
        let u = Mat2Q::unip(rat(1, 24));
        let xi = xi_global(&u).unwrap();
        assert_eq!(xi, e_inf_rat(&rat(-1, 24)));
        // and xi_2/xi_3 factor values: e_2((1/3)/8) e_3((1/8)/3)
        let expect = e_p(&rat(1, 24), 2).mul(&e_p(&rat(1, 24), 3));
        assert_eq!(xi, expect);
    }

    #[test]
    fn xi_global_unimodular_on_words() {
        let mut state = 31u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(11);
            (state >> 33) as i64
        };
        for _ in 0..50 {
            let mut g = Mat2Q::identity();
            for _ in 0..4 {
                if next() % 2 == 0 {
                    g = g.mul(&Mat2Q::flip_scaled(&rat_int(24)));
                } else {
                    g = g.mul(&Mat2Q::unip(rat(next().rem_euclid(9) - 4, 24)));
                }
            }
            let xi = xi_global(&g).unwrap();
            assert!(xi.is_unimodular(), "xi({g:?}) unimodular");
            assert_eq!(xi.pow(24), Cyclo::one(), "xi lands in the 24th roots");
        }
    }

    #[test]
    fn first_twist_identity_cusp() {
        let id = Mat2Q::identity();
        assert_eq!(
            coeff_first_twist(&id, 1).unwrap().exact,
            Cyclo::one()
        );
        assert!(coeff_first_twist(&id, 2).unwrap().exact.is_zero());
        assert!(coeff_first_twist(&id, 4).unwrap().exact.is_zero()); // chi(2) = 0
        assert_eq!(
            coeff_first_twist(&id, 25).unwrap().exact,
            Cyclo::from_int(-1)
        );
        assert_eq!(
            coeff_first_twist(&id, 49).unwrap().exact,
            Cyclo::from_int(-1) // chi(7) = chi2(7) chi3(7) = (-1)(1)
        );
    }

    #[test]
    fn first_twist_abs_one_on_squares() {
        for cusp in cusps_of_gamma0(576) {
            let sm = scaling_matrix(cusp.u, cusp.w, 24).unwrap();
            let res = coeff_first_twist(&sm.sigma, 25).unwrap();
            assert!(
                res.exact.is_unimodular(),
                "|A(25)| = 1 at cusp {cusp}, got {}",
                res.abs
            );
            assert!((res.abs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_invariant_under_scaling_choice() {
        // replacing sigma by sigma * unip(k/24) multiplies A(nu) by e(nu k/24)
        let sm = scaling_matrix(1, 16, 24).unwrap();
        for nu in [1u64, 25, 49] {
            let base = coeff_first_twist(&sm.sigma, nu).unwrap();
            for k in [1i64, 5, -3] {
                let alt = sm.sigma.mul(&Mat2Q::unip(rat(k, 24)));
                let shifted = coeff_first_twist(&alt, nu).unwrap();
                let phase = e_inf_rat(&rat(nu as i64 * k, 24));
                assert_eq!(shifted.exact, base.exact.mul(&phase), "nu={nu}, k={k}");
                assert_eq!(shifted.exact.abs_sq(), base.exact.abs_sq());
            }
        }
    }

    #[test]
    fn sigma0_transfer_examples() {
        // r = 0 for the cusp 1/24 at M = 24, so the transfer is trivial
        let res = CoeffResult::from_exact(5, root_of_unity(8, 1));
        let moved = coeff_sigma0_transfer(&res, 1, 24, 24).unwrap();
        assert_eq!(moved.exact, res.exact);
        // nu = 0 is always trivial
        let res0 = CoeffResult::from_exact(0, Cyclo::one());
        let moved0 = coeff_sigma0_transfer(&res0, 1, 16, 24).unwrap();
        assert_eq!(moved0.exact, Cyclo::one());
        // cusp 1/16: t = 16/(24*48) = 1/72, phase e(-nu/72)
        let res1 = CoeffResult::from_exact(1, Cyclo::one());
        let moved1 = coeff_sigma0_transfer(&res1, 1, 16, 24).unwrap();
        assert_eq!(moved1.exact, e_inf_rat(&rat(-1, 72)));
        assert!(coeff_sigma0_transfer(&res1, 0, 1, 24).is_err());
    }

    #[test]
    fn higher_twist_identity_cusp_is_classical() {
        for (p, j) in [(5u64, 1u64), (7, 1), (7, 2)] {
            let tw = HigherTwist::new(p, j).unwrap();
            let psi = tw.psi();
            let chi = DirichletCharacter::chi12();
            for n in 1..=30u64 {
                let res = coeff_higher_twist(&tw, &Mat2Q::identity(), n * n).unwrap();
                let expect = chi.eval_u64(n).mul(&psi.eval_u64(n));
                assert_eq!(res.exact, expect, "identity cusp at p={p} j={j} n={n}");
            }
            // non-squares vanish
            assert!(coeff_higher_twist(&tw, &Mat2Q::identity(), 12)
                .unwrap()
                .exact
                .is_zero());
        }
    }

    #[test]
    fn higher_twist_rejects_bad_input() {
        assert!(HigherTwist::new(4, 1).is_err());
        assert!(HigherTwist::new(5, 0).is_err());
        assert!(HigherTwist::new(5, 2).is_err()); // (p-3)/2 = 1
        assert!(HigherTwist::with_generator(5, 1, 4).is_err());
        let tw = HigherTwist::new(5, 1).unwrap();
        // not in Gamma^{(120)}
        assert!(coeff_higher_twist(&tw, &Mat2Q::unip(rat(1, 7)), 1).is_err());
    }

    #[test]
    fn column_and_box_routes_agree() {
        let tw = HigherTwist::new(5, 1).unwrap();
        for (u, w) in [(1i64, 1u64), (1, 5), (2, 5), (1, 25), (1, 24), (5, 48)] {
            let sm = scaling_matrix(u, w, 120).unwrap();
            let vec = higher_twist_vector(&tw, &sm.sigma).unwrap();
            let xi = xi_global(&sm.sigma.inverse()).unwrap();
            for nu in 0..=100u64 {
                let via_cols = coeff_five_twist_columns(&sm.sigma, nu).unwrap();
                let via_thm = coeff_from_vector(&tw, &xi, &vec, nu);
                assert_eq!(
                    via_cols.exact, via_thm.exact,
                    "routes disagree at cusp {u}/{w}, nu={nu}"
                );
            }
        }
    }

    #[test]
    fn projective_consistency_through_factorizations() {
        // evaluating along the exact three/five-factor decompositions of
        // sigma^{-1} gives the same local matrix as the direct word
        use crate::metaplectic::sigma_inverse_decomposition;
        let tw = HigherTwist::new(5, 1).unwrap();
        for (u, w) in [(1i64, 5u64), (2, 5), (1, 25), (7, 25)] {
            let sm = scaling_matrix(u, w, 120).unwrap();
            let direct = crate::weil::rho_b1(5, tw.generator, &sm.sigma.inverse(), 1).unwrap();
            let dec = sigma_inverse_decomposition(u, w, 120, 5).unwrap();
            // multiply the factors with the Kubota cocycle corrections
            let mut acc_mat = Mat2Q::identity();
            let mut sign = 1i32;
            let dim = space_dim(5);
            let mut acc = crate::weil::CycloMat::identity(dim);
            for f in &dec.factors {
                sign *= beta_v(&acc_mat, f, Place::prime(5).unwrap());
                acc_mat = acc_mat.mul(f);
                let rf = crate::weil::rho_b1(5, tw.generator, f, 1).unwrap();
                acc = acc.mul(&rf.mat);
            }
            assert_eq!(acc_mat, sm.sigma.inverse());
            if sign < 0 {
                acc = acc.scalar_mul(&Cyclo::from_int(-1));
            }
            assert_eq!(acc, direct.mat, "factorization route at cusp {u}/{w}");
        }
    }

    #[test]
    fn gg_check_runs_clean() {
        let report = gg_check(5).unwrap();
        assert!(report.ok(), "{report}");
        assert_eq!(report.cusps.len(), 288);
        // both cycles occur among the 5||w cusps
        assert!(report.cusps.iter().any(|c| c.class == GgClass::CycleA));
        assert!(report.cusps.iter().any(|c| c.class == GgClass::CycleB));
    }
}
