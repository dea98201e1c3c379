//! Exact Fourier coefficients of twisted weight-1/2 theta series at
//! arbitrary cusps.
//!
//! The crate computes, in exact cyclotomic arithmetic, how the theta series
//! attached to even Dirichlet characters transform under scaling matrices
//! for the cusps of `Gamma_0(576)` and `Gamma_0((24p)^2)`, and extracts the
//! resulting Fourier coefficients. The computation runs through explicit
//! local data: Hilbert symbols and Kubota 2-cocycles, generator matrices of
//! a finite-dimensional piece of the Weil representation at `p`, and scalar
//! characters `xi_2`, `xi_3` at the primes 2 and 3. An independent
//! floating-point oracle evaluates the same slashed series on a horocycle
//! and recovers coefficients by discrete Fourier inversion, cross-checking
//! every exact value numerically.
//!
//! Modules:
//! - [`numeric`]: rationals, p-adic valuations, residue and Hilbert symbols
//! - [`cyclotomic`]: exact arithmetic in `Q(zeta_N)` with a float embedding
//! - [`characters`]: Dirichlet characters with exact cyclotomic values
//! - [`metaplectic`]: SL(2,Q) matrices, Kubota cocycles, scaling matrices,
//!   generator-word decomposition, cusp enumeration
//! - [`weil`]: local Weil-representation constants and matrices
//! - [`engine`]: the coefficient formulas at every cusp, and the absolute
//!   value pattern checker for the five-twist
//! - [`oracle`]: numerical evaluation, slash operators, horocycle extraction
//! - [`table`]: JSON/CSV coefficient-table schema shared by engine and oracle

pub mod characters;
pub mod cyclotomic;
pub mod engine;
pub mod metaplectic;
pub mod numeric;
pub mod oracle;
pub mod table;
pub mod weil;
