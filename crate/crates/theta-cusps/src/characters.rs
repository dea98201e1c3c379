//! Dirichlet characters with exact cyclotomic values.
//!
//! A character is stored as its full value table modulo q, built once at
//! construction, so evaluation in hot loops is a table lookup. The table
//! entries are exact roots of unity (or zero off the units).

use crate::cyclotomic::{e_p, pow_u64, root_of_unity, vp_u64, Cyclo};
use crate::numeric::{
    euler_phi, factor_u64, gcd_u64, is_prime_u64, lcm_u64, unit_residue, Rational,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharacterError {
    #[error("{0} does not generate the units modulo {1}")]
    NotGenerator(u64, u64),
    #[error("character of modulus {0} is not primitive")]
    NotPrimitive(u64),
    #[error("modulus {0} is not a power of the prime {1}")]
    NotPrimePower(u64, u64),
    #[error("cannot evaluate at an argument with denominator sharing a factor with {0}")]
    BadArgument(u64),
}

/// A Dirichlet character mod q, with values in a cyclotomic field.
#[derive(Clone, PartialEq)]
pub struct DirichletCharacter {
    modulus: u64,
    values: Vec<Cyclo>,
}

impl DirichletCharacter {
    fn from_table(modulus: u64, values: Vec<Cyclo>) -> Self {
        debug_assert_eq!(values.len(), modulus as usize);
        DirichletCharacter { modulus, values }
    }

    pub fn principal(q: u64) -> Self {
        assert!(q >= 1);
        let values = (0..q)
            .map(|r| {
                if gcd_u64(r, q) == 1 || q == 1 {
                    Cyclo::one()
                } else {
                    Cyclo::zero()
                }
            })
            .collect();
        Self::from_table(q, values)
    }

    /// The nontrivial quadratic character mod 4.
    pub fn chi2() -> Self {
        let values = vec![
            Cyclo::zero(),
            Cyclo::one(),
            Cyclo::zero(),
            Cyclo::from_int(-1),
        ];
        Self::from_table(4, values)
    }

    /// The nontrivial quadratic character mod 3.
    pub fn chi3() -> Self {
        let values = vec![Cyclo::zero(), Cyclo::one(), Cyclo::from_int(-1)];
        Self::from_table(3, values)
    }

    /// `chi = chi2 * chi3`, the even quadratic character mod 12.
    pub fn chi12() -> Self {
        Self::chi2().product(&Self::chi3())
    }

    /// The quadratic character mod an odd prime (Legendre symbol values).
    pub fn quadratic_mod_p(p: u64) -> Self {
        assert!(p > 2 && is_prime_u64(p));
        let values = (0..p)
            .map(|r| {
                let s = crate::numeric::legendre_i64(r as i64, p);
                Cyclo::from_int(s as i64)
            })
            .collect();
        Self::from_table(p, values)
    }

    /// The even character `psi_j` mod p determined by `psi_j(g) =
    /// e(2j/(p-1))` for a fixed generator g of the units mod p. As j runs
    /// over `0..=(p-3)/2` these are exactly the even characters mod p;
    /// `psi_0` is principal.
    pub fn psi_j(p: u64, g: u64, j: u64) -> Result<Self, CharacterError> {
        assert!(p > 2 && is_prime_u64(p));
        if !is_generator(g, p) {
            return Err(CharacterError::NotGenerator(g, p));
        }
        let mut values = vec![Cyclo::zero(); p as usize];
        let mut pow = 1u64;
        for t in 0..p - 1 {
            values[pow as usize] = root_of_unity(p - 1, (2 * j * t) as i64);
            pow = pow * g % p;
        }
        Ok(Self::from_table(p, values))
    }

    /// Character of an odd prime-power modulus (cyclic unit group) sending
    /// the chosen generator to `zeta_{phi(q)}^k`.
    pub fn cyclic_character(q: u64, g: u64, k: i64) -> Result<Self, CharacterError> {
        let ord = euler_phi(q);
        if gcd_u64(g, q) != 1 || !unit_has_order(g, q, ord) {
            return Err(CharacterError::NotGenerator(g, q));
        }
        let mut values = vec![Cyclo::zero(); q as usize];
        let mut pow = 1u64;
        for t in 0..ord {
            values[pow as usize] = root_of_unity(ord, k * t as i64);
            pow = pow * g % q;
        }
        Ok(Self::from_table(q, values))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn eval_u64(&self, n: u64) -> Cyclo {
        self.values[(n % self.modulus) as usize].clone()
    }

    pub fn eval_i64(&self, n: i64) -> Cyclo {
        self.values[n.rem_euclid(self.modulus as i64) as usize].clone()
    }

    pub fn eval_big(&self, n: &BigInt) -> Cyclo {
        let r = n.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap();
        self.values[r as usize].clone()
    }

    /// Evaluation at a rational that is a unit at every prime of the
    /// modulus (the p-adic-unit lift used by the local character values).
    pub fn eval_rational(&self, x: &Rational) -> Result<Cyclo, CharacterError> {
        let r = unit_residue(x, self.modulus)
            .map_err(|_| CharacterError::BadArgument(self.modulus))?;
        Ok(self.values[r as usize].clone())
    }

    /// Pointwise product, on the lcm of the moduli.
    pub fn product(&self, other: &DirichletCharacter) -> DirichletCharacter {
        let q = lcm_u64(self.modulus, other.modulus);
        let values = (0..q)
            .map(|r| self.eval_u64(r).mul(&other.eval_u64(r)))
            .collect();
        Self::from_table(q, values)
    }

    pub fn conj(&self) -> DirichletCharacter {
        Self::from_table(self.modulus, self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn is_even(&self) -> bool {
        self.eval_i64(-1) == Cyclo::one()
    }

    pub fn is_principal(&self) -> bool {
        (0..self.modulus)
            .filter(|r| gcd_u64(*r, self.modulus) == 1)
            .all(|r| self.eval_u64(r) == Cyclo::one())
    }

    /// Smallest modulus f | q from which the character is induced.
    pub fn conductor(&self) -> u64 {
        let q = self.modulus;
        'outer: for f in crate::numeric::divisors_u64(q) {
            for a in 0..q {
                if gcd_u64(a, q) != 1 {
                    continue;
                }
                // compare against any unit b = a mod f
                for b in (a % f..q).step_by(f.max(1) as usize) {
                    if gcd_u64(b, q) == 1 && self.eval_u64(a) != self.eval_u64(b) {
                        continue 'outer;
                    }
                }
            }
            return f;
        }
        q
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// The local factorization `chi = prod_p chi_p` with `chi_p` of modulus
    /// `p^{v_p(q)}`, via CRT lifts that are 1 away from p.
    pub fn local_components(&self) -> Vec<(u64, DirichletCharacter)> {
        let q = self.modulus;
        if q == 1 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (p, e) in factor_u64(q) {
            let pe = pow_u64(p, e);
            let rest = q / pe;
            let values = (0..pe)
                .map(|m| {
                    if gcd_u64(m, pe) != 1 {
                        return Cyclo::zero();
                    }
                    // m' = m mod p^e, m' = 1 mod q/p^e
                    let mut lift = m;
                    if rest > 1 {
                        while lift % rest != 1 {
                            lift += pe;
                        }
                    }
                    self.eval_u64(lift)
                })
                .collect();
            out.push((p, Self::from_table(pe, values)));
        }
        out
    }

    /// Float value table for the oracle, indexed by residue mod q.
    pub fn complex_table(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.embed()).collect()
    }
}

impl std::fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DirichletCharacter(mod {})", self.modulus)
    }
}

/// Smallest positive primitive root mod p. Basis ordering of the invariant
/// space at p depends on this choice; the CLI can override it.
pub fn default_generator(p: u64) -> u64 {
    (2..p).find(|g| is_generator(*g, p)).expect("prime has a primitive root")
}

fn unit_has_order(g: u64, q: u64, ord: u64) -> bool {
    let powmod = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        base %= q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            e >>= 1;
        }
        acc
    };
    powmod(g, ord) == 1 && factor_u64(ord).iter().all(|(r, _)| powmod(g, ord / r) != 1)
}

pub fn is_generator(g: u64, p: u64) -> bool {
    if g.is_multiple_of(p) {
        return false;
    }
    let order = p - 1;
    factor_u64(order).iter().all(|(q, _)| {
        let mut acc = 1u64;
        let mut base = g % p;
        let mut e = order / q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc != 1
    })
}

/// Gauss sum `tau(mu) = sum_{i coprime to p} mu(i) e_p(i/p^f)` of a
/// primitive character of prime-power modulus `p^f`.
pub fn tau(mu: &DirichletCharacter, p: u64) -> Result<Cyclo, CharacterError> {
    let q = mu.modulus();
    let f = vp_u64(q, p);
    if q != pow_u64(p, f) || f == 0 {
        return Err(CharacterError::NotPrimePower(q, p));
    }
    if !mu.is_primitive() {
        return Err(CharacterError::NotPrimitive(q));
    }
    let mut acc = Cyclo::zero();
    for i in 1..q {
        if i % p == 0 {
            continue;
        }
        let term = mu
            .eval_u64(i)
            .mul(&e_p(&Rational::new(BigInt::from(i), BigInt::from(q)), p));
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Number of even characters mod p, i.e. (p-1)/2.
pub fn even_character_count(p: u64) -> u64 {
    (p - 1) / 2
}

#[allow(dead_code)]
fn phi_check(q: u64) -> u64 {
    euler_phi(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::sqrt_of_prime;
    use crate::numeric::rat;

    #[test]
    fn quadratic_character_values() {
        let chi2 = DirichletCharacter::chi2();
        assert_eq!(chi2.eval_u64(3), Cyclo::from_int(-1));
        let chi = DirichletCharacter::chi12();
        assert_eq!(chi.eval_u64(5), Cyclo::from_int(-1));
        assert_eq!(chi.eval_u64(6), Cyclo::zero());
        assert_eq!(chi.eval_u64(1), Cyclo::one());
        assert!(chi.is_even());
    }

    #[test]
    fn psi_family() {
        // psi_1 mod 5 with generator 2 is the quadratic character
        let psi1 = DirichletCharacter::psi_j(5, 2, 1).unwrap();
        assert_eq!(psi1.eval_u64(2), Cyclo::from_int(-1));
        assert_eq!(psi1, DirichletCharacter::quadratic_mod_p(5));
        // psi_j is always even
        for j in 0..=1 {
            let psi = DirichletCharacter::psi_j(5, 2, j).unwrap();
            assert_eq!(psi.eval_i64(-1), Cyclo::one());
        }
        let psi0 = DirichletCharacter::psi_j(5, 2, 0).unwrap();
        assert_eq!(psi0.eval_u64(3), Cyclo::one());
        assert!(DirichletCharacter::psi_j(5, 4, 1).is_err());
    }

    #[test]
    fn psi_family_exhausts_even_characters() {
        for p in [5u64, 7, 11, 13] {
            let g = default_generator(p);
            let mut seen = Vec::new();
            for j in 0..even_character_count(p) {
                let psi = DirichletCharacter::psi_j(p, g, j).unwrap();
                assert!(psi.is_even(), "psi_{j} mod {p} even");
                assert!(!seen.contains(&psi), "psi_{j} duplicate at p={p}");
                seen.push(psi);
            }
            assert_eq!(seen.len() as u64, even_character_count(p));
        }
    }

    #[test]
    fn multiplicativity_random() {
        let chars = [
            DirichletCharacter::chi12(),
            DirichletCharacter::psi_j(7, 3, 1).unwrap(),
            DirichletCharacter::quadratic_mod_p(5),
        ];
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 40) as u64
        };
        for chi in &chars {
            let q = chi.modulus();
            for _ in 0..200 {
                let m = next() % (10 * q) + 1;
                let n = next() % (10 * q) + 1;
                let lhs = chi.eval_u64(m * n % q);
                let rhs = chi.eval_u64(m).mul(&chi.eval_u64(n));
                assert_eq!(lhs, rhs, "chi({m}*{n}) mod {q}");
                assert_eq!(chi.eval_u64(m), chi.eval_u64(m + q), "periodicity");
            }
        }
    }

    #[test]
    fn local_component_decomposition() {
        let chi = DirichletCharacter::chi12();
        let comps = chi.local_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].0, 2);
        assert_eq!(comps[0].1, DirichletCharacter::chi2());
        assert_eq!(comps[1].0, 3);
        assert_eq!(comps[1].1, DirichletCharacter::chi3());
        for n in (1..100).filter(|n| gcd_u64(*n, 12) == 1) {
            let prod = comps
                .iter()
                .fold(Cyclo::one(), |acc, (_, cp)| acc.mul(&cp.eval_u64(n)));
            assert_eq!(prod, chi.eval_u64(n));
        }
        let chi5 = DirichletCharacter::quadratic_mod_p(5);
        let comps5 = chi5.local_components();
        assert_eq!(comps5.len(), 1);
        assert_eq!(comps5[0].1, chi5);
        assert!(DirichletCharacter::principal(1)
            .local_components()
            .is_empty());
    }

    #[test]
    fn gauss_sums() {
        // tau(chi3) = -i*sqrt(3)
        let t3 = tau(&DirichletCharacter::chi3(), 3).unwrap();
        let expected = Cyclo::i().neg().mul(&sqrt_of_prime(3));
        assert_eq!(t3, expected);
        // tau(chi5) = sqrt(5)
        let t5 = tau(&DirichletCharacter::quadratic_mod_p(5), 5).unwrap();
        assert_eq!(t5, sqrt_of_prime(5));
        // |tau|^2 = p for primitive characters mod p
        for p in [5u64, 7, 11] {
            let g = default_generator(p);
            for j in 1..even_character_count(p) {
                let psi = DirichletCharacter::psi_j(p, g, j).unwrap();
                let t = tau(&psi, p).unwrap();
                assert_eq!(t.abs_sq(), Cyclo::from_int(p as i64), "|tau|^2 at p={p} j={j}");
                // tau(mu) tau(conj mu) = mu(-1) p
                let tc = tau(&psi.conj(), p).unwrap();
                let expect = psi.eval_i64(-1).mul(&Cyclo::from_int(p as i64));
                assert_eq!(t.mul(&tc), expect);
            }
        }
        // imprimitive characters are rejected
        assert!(tau(&DirichletCharacter::principal(5), 5).is_err());
    }

    #[test]
    fn eval_rational_units() {
        let chi2 = DirichletCharacter::chi2();
        // 1/3 = 3 mod 4
        assert_eq!(chi2.eval_rational(&rat(1, 3)).unwrap(), Cyclo::from_int(-1));
        assert!(chi2.eval_rational(&rat(1, 2)).is_err());
    }

    #[test]
    fn conductor_detection() {
        assert_eq!(DirichletCharacter::chi12().conductor(), 12);
        assert_eq!(DirichletCharacter::principal(12).conductor(), 1);
        assert!(DirichletCharacter::chi3().is_primitive());
    }
}
