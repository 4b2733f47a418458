//! Sum-product set algebra, incidence counting, and the bisector geometry of
//! the plane over Z/p^3 Z, with exact brute-force oracles for every closed
//! form the fast paths rely on.
//!
//! The crate is organized by subject:
//!
//! - [`ring`] — arithmetic in Z/p^k Z: units, inverses, Legendre symbols, and
//!   the square-root counting function with its exhaustive oracle.
//! - [`setalg`] — finite sets over Z, F_p, and Z_q: sumsets, product sets,
//!   representation functions, energies of every order, dyadic pigeonholing,
//!   and family generators.
//! - [`incidence`] — exact point-line and point-plane incidence counting,
//!   rich lines, collinear-triple counts, and the classical sum-product
//!   experiment constructions.
//! - [`zqgeom`] — norms, circles, bisectors, and isometries of (Z/p^3 Z)^2
//!   for p = 3 (mod 4), the reflection census, and the N(x,y) distribution.
//! - [`spectral`] — the bisector pair graph, its A^2 decomposition, power
//!   iteration, Cayley spectra via character sums, Gershgorin bounds, and
//!   expander mixing checks.
//! - [`report`] — serializable experiment reports with exact quantities and
//!   pass/fail checks.
//! - [`cli`] — the batch experiment driver behind the `sumbis` binary.
//!
//! Run `cargo run --example conjecture_census` (or any other example) for a
//! guided tour of one capability; the acceptance suite lives in
//! `tests/acceptance.rs`.

pub mod cli;
pub mod incidence;
pub mod report;
pub mod ring;
pub mod setalg;
pub mod spectral;
pub mod zqgeom;

pub use report::{Budget, Check, ReportDocument};
pub use ring::{legendre, sqrt_count, sqrt_count_oracle, Modulus, RingElem, RingError};
pub use setalg::{FiniteSet, RepCounts, SetError, SetOp, Universe};
