//! Exact computational models for depth-jump towers inside root data, genericity
//! of residue functionals over finite fields, Heisenberg and Weil representations
//! of `p`-groups attached to symplectic `F_p`-spaces, and a brute-force harness
//! for a distinction identity relating cuspidal characters of `GL2(F_q)` to
//! involution orbits.
//!
//! Everything is computed over `Z`, `Q`, `F_{p^m}` or cyclotomic fields
//! `Q(zeta_N)`; there is no floating point anywhere in the computational core,
//! so every reported number is exact and every run is reproducible byte for
//! byte.
//!
//! # Layout
//!
//! - [`rootdata`]: root data, Levi subsystems, Weyl groups by Cartan
//!   classification, stabilizer orders over finite fields, fundamental group
//!   orders and torsion-prime reports via Smith normal form.
//! - [`galois`]: finite lattice actions, root orbits, ellipticity and
//!   anisotropy criteria.
//! - [`towers`]: recovery of the nested subsystem tower from orbit depth data,
//!   by the direct jump construction and by the top-down recursion, with an
//!   agreement check.
//! - [`genericity`]: residue functionals, the nonvanishing condition on
//!   coroots and the Weyl stabilizer condition, with field-doubling
//!   certification.
//! - [`heisenberg`]: symplectic spaces over `F_p`, Heisenberg groups, their
//!   irreducible representations from polarizations, induction, character
//!   pairing, and extension to symplectic subgroups by intertwiner averaging
//!   and cocycle trivialization.
//! - [`intertwining`]: fibered sums of symplectic spaces, the canonical
//!   intertwining operator between the two Heisenberg representations sharing
//!   an overlap, and its dimension certificate.
//! - [`distinction`]: `GL2(F_q)` group tables, cuspidal characters in general
//!   position, involution orbits, the adjoint sign character, and both sides
//!   of the multiplicity identity.
//!
//! Supporting modules: [`rat`] (exact rationals as `"num/den"` strings),
//! [`exact`] (integer/rational matrices and Smith normal form), [`fp`]
//! (finite fields `F_{p^m}`), [`cyclo`] (exact cyclotomic arithmetic),
//! [`groups`] (generic finite group tables and linear representations),
//! [`exec`] (sequential/parallel batch execution), [`report`] (serializable
//! report types shared with the command-line front end).

#![forbid(unsafe_code)]
#![deny(clippy::float_arithmetic)]
#![warn(missing_docs)]

pub mod cyclo;
pub mod distinction;
pub mod exact;
pub mod exec;
pub mod fp;
pub mod galois;
pub mod genericity;
pub mod groups;
pub mod heisenberg;
pub mod intertwining;
pub mod rat;
pub mod report;
pub mod rootdata;
pub mod towers;

pub use rat::Rat;

/// Default cap on group closures and enumerations.
///
/// Overridable per call site and, in the command-line front end, by the
/// `TAMEFORGE_MAX_ELEMENTS` environment variable.
pub const DEFAULT_MAX_ELEMENTS: usize = 10_000;
