//! Exact lattice arithmetic for symplectic finite group actions on K3 surfaces.
//!
//! The crate is layered bottom-up:
//!
//! - [`intlat`]: integer matrices, Smith and Hermite normal forms, exact determinants.
//! - [`lattice`]: Gram lattices, ADE root lattices and configurations.
//! - [`discform`]: finite quadratic forms, isomorphism tests, isotropic subgroups.
//! - [`groups`]: finite groups from Cayley tables or permutations, order census, H³(G, Z).
//! - [`pipeline`]: action records, rank formulas, Xiao's formula and the discriminant chain.
//! - [`genus`]: enumeration of reduced positive-definite forms of rank at most 3.

pub mod discform;
pub mod error;
pub mod factor;
pub mod genus;
pub mod groups;
pub mod intlat;
pub mod lattice;
pub mod pipeline;

pub use discform::{are_isomorphic, disc_form, negate, FiniteQuadraticForm, Rat, Subgroup};
pub use error::{Error, Result};
pub use factor::{factor, factored};
pub use genus::{genus_class_count, is_isometric, GenusSpec, ReducedForm};

pub use groups::{FiniteGroup, GroupFile, OrderCensus};
pub use intlat::IntMatrix;
pub use lattice::{AdeConfig, GramLattice, RootComponent, RootKind};
pub use pipeline::{ActionRecord, FixedPointProfile, InvariantReport};

