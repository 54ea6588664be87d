//! Exact combinatorics for the rainbow version of the Erdős Matching Conjecture.
//!
//! The crate works with k-uniform families over `[n] = {1, .., n}` (members
//! are stored as bitmasks, so `n <= 128`) and provides:
//!
//! * exact binomials, k-set enumeration and lex/colex initial segments
//!   ([`combinatorics`]);
//! * the extremal families `A` and `B` and the gap-set bounds ([`constructions`]);
//! * shifting, lower/upper shadows, Kruskal–Katona minimisers and the
//!   Bollobás–Thomason inequality ([`transforms`]);
//! * trace decompositions, density tables and shadow inequalities ([`densities`]);
//! * matching numbers, rainbow searches and random `t`-matchings ([`matchings`]);
//! * the intersection concentration experiments ([`concentration`]);
//! * the rearrangement/rainbow procedure and the arithmetic auditor
//!   ([`procedure`], [`audit`]);
//! * exhaustive small-case checks of the classical and rainbow conjectures ([`emc`]);
//! * seeded random suites for the shadow inequalities ([`suites`]).
//!
//! Sizes use arbitrary precision integers and every density is an exact
//! rational. Floating point only appears where `e`, logarithms or square
//! roots do.

pub mod audit;
pub mod combinatorics;
pub mod concentration;
pub mod constructions;
pub mod densities;
pub mod emc;
mod error;
pub mod io;
pub mod matchings;
pub mod procedure;
pub mod ratio;
pub mod suites;
pub mod transforms;

pub use combinatorics::{binomial, choose, FamilyTuple, KSet, Params, SetFamily};
pub use error::{Error, Result};

/// Value of the `spec_version` field carried by every JSON report.
pub const REPORT_VERSION: &str = "1.0";

/// Default seed for every randomized routine (`0x5EED`).
pub const DEFAULT_SEED: u64 = 0x5EED;
