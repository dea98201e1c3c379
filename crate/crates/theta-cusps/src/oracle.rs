//! Independent numerical ground truth: evaluate the classical theta series,
//! apply the holomorphic weight-1/2 slash operator with the principal
//! branch, and extract Fourier coefficients at a cusp by sampling a
//! horocycle and inverting the discrete Fourier transform.
//!
//! All arithmetic is double precision. Near a cusp the series is summed
//! against an exact rational anchor: for `sigma z = a/c + delta` the root
//! of unity `e^{2 pi i n^2 a/c}` is taken from an exact residue table and
//! only the small offset `delta = -1/(c(cz+d))` is exponentiated in floats,
//! which keeps phase errors harmless even when `n^2` is large and the image
//! point sits very low in the upper half plane.

use crate::characters::DirichletCharacter;
use crate::metaplectic::{beta_v, Mat2Q};
use crate::numeric::{gcd_u64, lcm_u64, Place, Rational};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("sample point too low: theta truncation would need {0} terms")]
    HeightTooSmall(u64),
    #[error("slashed function is not 1-periodic (defect {0:.3e}); not a scaling matrix or nonzero cusp parameter")]
    NotPeriodic(f64),
    #[error("frequency list must be nonempty with positive denominators")]
    BadFrequencies,
    #[error("evaluation point must lie in the upper half plane")]
    NotUpperHalfPlane,
}

const TAIL_EPS: f64 = 1e-15;
const N_MAX_CAP: u64 = 50_000_000;

/// A theta series `sum_{n >= 1} chi(n) e^{2 pi i n^2 z}` prepared for fast
/// numerical evaluation.
#[derive(Clone)]
pub struct SeriesSpec {
    chi_modulus: u64,
    chi_table: Vec<Complex64>,
    tail_eps: f64,
}

impl SeriesSpec {
    pub fn new(character: &DirichletCharacter) -> Self {
        SeriesSpec {
            chi_modulus: character.modulus(),
            chi_table: character.complex_table(),
            tail_eps: TAIL_EPS,
        }
    }

    /// The first twist: theta attached to the quadratic character mod 12.
    pub fn first_twist() -> Self {
        Self::new(&DirichletCharacter::chi12())
    }

    /// The twist by an even character mod p times the character mod 12.
    pub fn higher_twist(psi: &DirichletCharacter) -> Self {
        Self::new(&DirichletCharacter::chi12().product(psi))
    }

    fn n_max_for_height(&self, y: f64) -> Result<u64, OracleError> {
        // smallest N with sum_{n > N} e^{-2 pi n^2 y} < tail_eps, using
        // the geometric bound e^{-2 pi y (N+1)^2} / (1 - e^{-4 pi y (N+1)})
        // evaluated in logs
        let two_pi_y = 2.0 * std::f64::consts::PI * y;
        let mut n = ((-self.tail_eps.ln()) / two_pi_y).sqrt() as u64 + 2;
        let log_eps = self.tail_eps.ln();
        loop {
            if n > N_MAX_CAP {
                return Err(OracleError::HeightTooSmall(n));
            }
            let m = (n + 1) as f64;
            let log_ratio_term = -(1.0 - (-2.0 * two_pi_y * m).exp()).max(1e-300).ln();
            if -two_pi_y * m * m + log_ratio_term < log_eps {
                return Ok(n);
            }
            n += n / 8 + 1;
        }
    }

    /// Truncated series at `z`, tail below `tail_eps` in absolute value.
    pub fn theta_eval(&self, z: Complex64) -> Result<Complex64, OracleError> {
        if z.im <= 0.0 {
            return Err(OracleError::NotUpperHalfPlane);
        }
        self.theta_anchored(0, 1, z)
    }

    /// `theta(u/w + delta)` with the rational part of the argument handled
    /// exactly: `e^{2 pi i n^2 (u/w)}` comes from a residue table and only
    /// `e^{2 pi i n^2 delta}` is accumulated in floating point.
    fn theta_anchored(&self, u: i64, w: u64, delta: Complex64) -> Result<Complex64, OracleError> {
        debug_assert!(w >= 1);
        let n_max = self.n_max_for_height(delta.im)?;
        let omega: Vec<Complex64> = (0..w)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64) / (w as f64);
                Complex64::new(t.cos(), t.sin())
            })
            .collect();
        let u_mod = u.rem_euclid(w as i64) as u64;
        let q1 = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * delta).exp();
        let q2 = q1 * q1;
        // t_n = q1^{n^2} via t_{n+1} = t_n * r_n, r_{n+1} = r_n * q1^2
        let mut t = q1;
        let mut r = q1 * q2;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0); // Kahan compensation
        let mut n_mod_chi = 1u64 % self.chi_modulus.max(1);
        let mut n_mod_w = 1u64 % w;
        for _ in 1..=n_max {
            let chi = self.chi_table[n_mod_chi as usize];
            if chi.norm_sqr() > 0.0 {
                let k = (n_mod_w * n_mod_w % w) * u_mod % w;
                let term = chi * omega[k as usize] * t;
                let y_ = term - comp;
                let t_ = acc + y_;
                comp = (t_ - acc) - y_;
                acc = t_;
            }
            t *= r;
            r *= q2;
            n_mod_chi = (n_mod_chi + 1) % self.chi_modulus;
            n_mod_w = (n_mod_w + 1) % w;
        }
        Ok(acc)
    }
}

fn rat_f64(x: &Rational) -> f64 {
    x.to_f64().expect("rational in f64 range")
}

fn principal_inv_sqrt(j: Complex64) -> Complex64 {
    // principal square root: argument folded into (-pi/2, pi/2]; for
    // Im z > 0 the value cz+d never hits the negative real axis unless
    // c = 0, where the convention picks +i sqrt(|d|) for d < 0.
    1.0 / j.sqrt()
}

/// `j(sigma, z)^{-1/2} theta(sigma z)` with the principal branch.
pub fn hol_slash_half(
    spec: &SeriesSpec,
    sigma: &Mat2Q,
    z: Complex64,
) -> Result<Complex64, OracleError> {
    if z.im <= 0.0 {
        return Err(OracleError::NotUpperHalfPlane);
    }
    let (a, b, c, d) = (
        rat_f64(&sigma.a),
        rat_f64(&sigma.b),
        rat_f64(&sigma.c),
        rat_f64(&sigma.d),
    );
    if sigma.c.is_zero() {
        let w = (z * a + b) / d;
        let theta = spec.theta_eval(Complex64::new(w.re.rem_euclid(1.0), w.im))?;
        return Ok(theta * principal_inv_sqrt(Complex64::new(d, 0.0)));
    }
    let j = z * c + d;
    // sigma z = a/c - 1/(c j)
    let anchor = &sigma.a / &sigma.c;
    let delta = -1.0 / (j * c);
    let theta = spec.theta_anchored(
        anchor.numer().to_i64().expect("anchor numerator fits i64"),
        anchor.denom().to_u64().expect("anchor denominator fits u64"),
        delta,
    )?;
    Ok(theta * principal_inv_sqrt(j))
}

/// One extracted Fourier coefficient of the slashed series.
#[derive(Clone, Debug)]
pub struct ExtractedCoeff {
    /// frequency nu = num/den
    pub nu_num: i64,
    pub nu_den: u64,
    pub value: Complex64,
    /// rough absolute error estimate (aliasing + roundoff)
    pub err_estimate: f64,
}

/// Tuning knobs for the horocycle extraction; `None` picks the policy
/// documented on [`fourier_extract`].
#[derive(Clone, Copy, Default)]
pub struct ExtractOptions {
    pub y_override: Option<f64>,
    pub samples_override: Option<usize>,
}

/// Extract Fourier coefficients `A(sigma, nu)` of `theta |_{1/2} sigma` at
/// the rational frequencies `nu`, by sampling the horocycle at height Y
/// over a window of length L = lcm of the frequency denominators:
///
/// `A(nu) ~ e^{2 pi nu Y} (1/K) sum_k g(x_k + iY) e^{-2 pi i nu x_k}`.
///
/// The height is driven by the largest requested frequency,
/// `Y = min(0.7/(numax+1), 1/2)`, which keeps the amplification
/// `e^{2 pi nu Y}` below e^5 at every cusp; the cusp anchor in the theta
/// evaluator keeps the low image points accurate, so Y does not need to
/// shrink with the lower-left entry. The sample count enforces both the
/// Nyquist bound `8 (numax + 1)` per period and the aliasing bound
/// `K Y >= 4 L` (the Nyquist bound dominates).
pub fn fourier_extract(
    spec: &SeriesSpec,
    sigma: &Mat2Q,
    freqs: &[(i64, u64)],
    opts: ExtractOptions,
) -> Result<Vec<ExtractedCoeff>, OracleError> {
    if freqs.is_empty() {
        return Ok(Vec::new());
    }
    if freqs.iter().any(|&(_, d)| d == 0) {
        return Err(OracleError::BadFrequencies);
    }
    let window: u64 = freqs.iter().fold(1u64, |l, &(_, d)| lcm_u64(l, d));
    let nu_max = freqs
        .iter()
        .map(|&(n, d)| n as f64 / d as f64)
        .fold(0.0f64, f64::max);
    let y = opts
        .y_override
        .unwrap_or_else(|| (0.7 / (nu_max + 1.0)).min(0.5));
    let per_period = ((8.0 * (nu_max + 1.0)).max(4.0 / y)).ceil() as usize;
    let samples = opts.samples_override.unwrap_or(per_period * window as usize);

    // sample x_t = x0 + t with t in [-L/2, L/2); x0 = -d/c centers the
    // window where the horocycle images are highest
    let (x0_num, x0_den): (i64, u64) = if sigma.c.is_zero() {
        (0, 1)
    } else {
        let x0 = -(&sigma.d / &sigma.c);
        (
            x0.numer().to_i64().expect("center numerator fits i64"),
            x0.denom().to_u64().expect("center denominator fits u64"),
        )
    };
    let l = window as f64;
    let ts: Vec<f64> = (0..samples)
        .map(|k| l * ((k as f64 + 0.5) / samples as f64) - l / 2.0)
        .collect();

    let g_vals: Vec<Complex64> = ts
        .par_iter()
        .map(|&t| slash_on_centered_horocycle(spec, sigma, x0_num, x0_den, t, y))
        .collect::<Result<Vec<_>, _>>()?;

    // periodicity check: compare two extra points one period of 1 apart
    let g_a = slash_on_centered_horocycle(spec, sigma, x0_num, x0_den, -0.37, y)?;
    let g_b = slash_on_centered_horocycle(spec, sigma, x0_num, x0_den, -0.37 + 1.0, y)?;
    let scale = g_a.norm().max(1e-3);
    let defect = (g_a - g_b).norm() / scale;
    if defect > 1e-8 {
        return Err(OracleError::NotPeriodic(defect));
    }

    let mean_abs: f64 = g_vals.iter().map(|g| g.norm()).sum::<f64>() / samples as f64;
    let mut out = Vec::with_capacity(freqs.len());
    for &(num, den) in freqs {
        let nu = num as f64 / den as f64;
        // phase at x_t = x0 + t splits as exact(nu * x0) * float(nu * t)
        let x0_phase = phase_exact(num, den, x0_num, x0_den);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for (k, &t) in ts.iter().enumerate() {
            let ph = -2.0 * std::f64::consts::PI * nu * t;
            let term = g_vals[k] * Complex64::new(ph.cos(), ph.sin());
            let y_ = term - comp;
            let t_ = acc + y_;
            comp = (t_ - acc) - y_;
            acc = t_;
        }
        let amp = (2.0 * std::f64::consts::PI * nu * y).exp();
        let value = acc / samples as f64 * x0_phase.conj() * amp;
        let alias = 2.0 * (-2.0 * std::f64::consts::PI * (samples as f64 / l) * y).exp();
        let err_estimate = amp * (alias + 5e-15 * mean_abs.max(1.0));
        out.push(ExtractedCoeff {
            nu_num: num,
            nu_den: den,
            value,
            err_estimate,
        });
    }
    Ok(out)
}

/// `e^{-2 pi i nu x0}` conjugated later; computes `e^{2 pi i (num/den)(x0n/x0d)}`
/// with the rational product reduced exactly first.
fn phase_exact(num: i64, den: u64, x0n: i64, x0d: u64) -> Complex64 {
    let d = (den as i128) * (x0d as i128);
    let n = (num as i128) * (x0n as i128);
    let r = n.rem_euclid(d);
    let g = gcd_u64(r as u64 % (d as u64), d as u64).max(1);
    let theta = 2.0 * std::f64::consts::PI * ((r / g as i128) as f64) / ((d / g as i128) as f64);
    Complex64::new(theta.cos(), theta.sin())
}

fn slash_on_centered_horocycle(
    spec: &SeriesSpec,
    sigma: &Mat2Q,
    x0n: i64,
    x0d: u64,
    t: f64,
    y: f64,
) -> Result<Complex64, OracleError> {
    if sigma.c.is_zero() {
        let z = Complex64::new(x0n as f64 / x0d as f64 + t, y);
        return hol_slash_half(spec, sigma, z);
    }
    let c = rat_f64(&sigma.c);
    // j = c (z - x0) = c (t + iY) exactly, avoiding the cancellation in cz+d
    let j = Complex64::new(c * t, c * y);
    let delta = -1.0 / (j * c);
    let anchor = &sigma.a / &sigma.c;
    let theta = spec.theta_anchored(
        anchor.numer().to_i64().expect("anchor numerator fits i64"),
        anchor.denom().to_u64().expect("anchor denominator fits u64"),
        delta,
    )?;
    Ok(theta * principal_inv_sqrt(j))
}

/// Predicted sign of the composition defect of the holomorphic slash:
/// `f |sigma1 |sigma2 = s * (f |sigma1 sigma2)` with s the archimedean
/// Kubota cocycle corrected on the branch edge. The metaplectic section
/// uses the square root with argument in `[-pi/2, pi/2)`, the slash the
/// principal one with `(-pi/2, pi/2]`; they disagree exactly on negative
/// real `j = cz + d`, which happens iff `c = 0` and `d < 0`.
pub fn slash_composition_sign(s1: &Mat2Q, s2: &Mat2Q) -> i32 {
    let on_cut = |g: &Mat2Q| g.c.is_zero() && g.d < Rational::zero();
    let mut sign = beta_v(s1, s2, Place::Infinity);
    for g in [s1, s2, &s1.mul(s2)] {
        if on_cut(g) {
            sign = -sign;
        }
    }
    sign
}

/// Result of scanning for the cusp parameter: the fractional support shift
/// `kappa = k/q` best explaining the sampled energy, with the relative
/// energy left in the other classes.
#[derive(Clone, Debug)]
pub struct KappaScan {
    pub kappa_num: u64,
    pub kappa_den: u64,
    pub residual: f64,
    pub class_energy: Vec<f64>,
}

/// Scan the cusp parameter: extract coefficients at frequencies `m/q` for
/// `m <= 3q`, group the (unamplified) energies by `m mod q`, and report the
/// best-supported class with the relative off-class residual.
pub fn cusp_parameter_scan(
    spec: &SeriesSpec,
    sigma: &Mat2Q,
    q: u64,
) -> Result<KappaScan, OracleError> {
    assert!((1..=24).contains(&q), "scan resolution limited to 24");
    let freqs: Vec<(i64, u64)> = (0..=3 * q).map(|m| (m as i64, q)).collect();
    let coeffs = fourier_extract_unchecked(spec, sigma, &freqs)?;
    let mut class_energy = vec![0.0f64; q as usize];
    for c in &coeffs {
        let nu = c.nu_num as f64 / c.nu_den as f64;
        let raw = c.value * (-2.0 * std::f64::consts::PI * nu * horocycle_height(3.0)).exp();
        class_energy[(c.nu_num as u64 % q) as usize] += raw.norm_sqr();
    }
    let total: f64 = class_energy.iter().sum();
    let (best, best_e) = class_energy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let residual = if total > 0.0 { 1.0 - best_e / total } else { 1.0 };
    Ok(KappaScan {
        kappa_num: best as u64,
        kappa_den: q,
        residual,
        class_energy,
    })
}

fn horocycle_height(nu_max: f64) -> f64 {
    (0.7 / (nu_max + 1.0)).min(0.5)
}

/// Extraction without the 1-periodicity gate, for scans that must run on
/// functions whose expansion is supported off the integers.
fn fourier_extract_unchecked(
    spec: &SeriesSpec,
    sigma: &Mat2Q,
    freqs: &[(i64, u64)],
) -> Result<Vec<ExtractedCoeff>, OracleError> {
    match fourier_extract(spec, sigma, freqs, ExtractOptions::default()) {
        Err(OracleError::NotPeriodic(_)) => {
            // fall through with the same sampler but window-based periodicity
            fourier_extract_fn(|z| hol_slash_half(spec, sigma, z), freqs)
        }
        other => other,
    }
}

/// Generic extraction from an arbitrary function on the upper half plane
/// (used for scans of synthetic signals with planted shifts).
pub fn fourier_extract_fn(
    f: impl Fn(Complex64) -> Result<Complex64, OracleError> + Sync,
    freqs: &[(i64, u64)],
) -> Result<Vec<ExtractedCoeff>, OracleError> {
    if freqs.is_empty() {
        return Ok(Vec::new());
    }
    let window: u64 = freqs.iter().fold(1u64, |l, &(_, d)| lcm_u64(l, d));
    let nu_max = freqs
        .iter()
        .map(|&(n, d)| n as f64 / d as f64)
        .fold(0.0f64, f64::max);
    let y = (0.7 / (nu_max + 1.0)).min(0.5);
    let per_period = ((8.0 * (nu_max + 1.0)).max(4.0 / y)).ceil() as usize;
    let samples = per_period * window as usize;
    let l = window as f64;
    let pts: Vec<f64> = (0..samples)
        .map(|k| l * ((k as f64 + 0.5) / samples as f64) - l / 2.0)
        .collect();
    let g_vals: Vec<Complex64> = pts
        .par_iter()
        .map(|&x| f(Complex64::new(x, y)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(freqs.len());
    for &(num, den) in freqs {
        let nu = num as f64 / den as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &x) in pts.iter().enumerate() {
            let ph = -2.0 * std::f64::consts::PI * nu * x;
            acc += g_vals[k] * Complex64::new(ph.cos(), ph.sin());
        }
        let amp = (2.0 * std::f64::consts::PI * nu * y).exp();
        out.push(ExtractedCoeff {
            nu_num: num,
            nu_den: den,
            value: acc / samples as f64 * amp,
            err_estimate: amp * 1e-12,
        });
    }
    Ok(out)
}

/// Scan a synthetic 1-or-finer-periodic function for its support shift.
pub fn cusp_parameter_scan_fn(
    f: impl Fn(Complex64) -> Result<Complex64, OracleError> + Sync,
    q: u64,
) -> Result<KappaScan, OracleError> {
    let freqs: Vec<(i64, u64)> = (0..=3 * q).map(|m| (m as i64, q)).collect();
    let coeffs = fourier_extract_fn(f, &freqs)?;
    let y = (1.0f64 / 2.0).min(0.7 / 4.0);
    let mut class_energy = vec![0.0f64; q as usize];
    for c in &coeffs {
        let nu = c.nu_num as f64 / c.nu_den as f64;
        let raw = c.value * (-2.0 * std::f64::consts::PI * nu * y).exp();
        class_energy[(c.nu_num as u64 % q) as usize] += raw.norm_sqr();
    }
    let total: f64 = class_energy.iter().sum();
    let (best, best_e) = class_energy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    Ok(KappaScan {
        kappa_num: best as u64,
        kappa_den: q,
        residual: if total > 0.0 { 1.0 - best_e / total } else { 1.0 },
        class_energy,
    })
}
