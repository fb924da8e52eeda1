//! Numerical laboratory for trace profiles of compact operators at
//! double-exponential scales.
//!
//! The crate is organized bottom-up:
//!
//! * [`dd`] is a compensated double-double kernel (roughly 32 significant
//!   decimal digits) with the transcendental functions the log domain needs.
//! * [`logreal`] represents signed reals by sign and log-magnitude so that
//!   quantities like `exp(exp(40))` stay representable.
//! * [`stepfn`] holds nonincreasing step functions (singular value profiles),
//!   their integrals and distribution functions, and operator models that
//!   optionally extend a finite lattice by an analytic power tail.
//! * [`gallery`] constructs the named example operators and reference sums.
//! * [`profiles`] turns operator models into evaluable profile curves in the
//!   `t`, `v = log t`, and `u = log log t` coordinates.
//! * [`quad`] integrates profiles with piece-aware Gauss-Legendre panels.
//! * [`limits`] implements the averaging and verdict machinery: window
//!   suprema, periodic means, vanishing checks, convergence verdicts.
//! * [`lidskii`] checks spectral summation bounds on sampled spectra.
//! * [`zeta`] relates profile means to weighted power-sum residues.
//! * [`accept`] runs the fixed battery of acceptance checks used by both the
//!   CLI and the integration tests.

pub mod accept;
pub mod cli;
pub mod config;
pub mod dd;
pub mod gallery;
pub mod io;
pub mod lidskii;
pub mod limits;
pub mod logreal;
pub mod profiles;
pub mod quad;
pub mod stepfn;
pub mod zeta;
