//! Mixed-state N-representability for non-collinear spin densities.
//!
//! A spin density is a field of Hermitian 2×2 matrices
//! `R(x) = [[ρ↑, σ], [σ*, ρ↓]]` on a uniform 3D grid. This crate
//!
//! * decides the necessary-and-sufficient representability conditions on such
//!   a field ([`check`]),
//! * computes its pointwise square root and eigenvalue densities
//!   ([`sqrt`]),
//! * builds an explicit mixed state, a convex combination of at most four
//!   Slater determinants, whose spin density reproduces the input
//!   ([`harriman`], [`decompose`]),
//! * and verifies such a witness independently against the target density
//!   ([`witness`]).
//!
//! Analytic fixtures live in [`gen`]; file formats and the command-line front
//! end live in [`io`] and [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod field;
pub mod gen;
pub mod harriman;
pub mod io;
pub mod spin;
pub mod sqrt;
pub mod witness;

pub use check::{
    check, check_refined, check_spinless, CheckReport, Condition, Tolerances, Verdict,
};
pub use decompose::{construct_witness, rank1_split, ratio_split, CutoffFunction, SplitResult};
pub use error::{Error, Result};
pub use field::{Axis, ComplexField, Field, Grid3, ScalarField};
pub use harriman::{build_orbitals, build_phase, OrbitalSet, PhaseFunction, Spinor};
pub use spin::SpinDensityField;
pub use sqrt::{eigen_densities, sqrt_field, EigenDensities, SqrtField};
pub use witness::{density_of, kinetic_energy, verify, Witness};
