//! Exact class-semigroup computations for C-monoids.
//!
//! A C-monoid is a submonoid H of a factorial monoid F = F^x × F(P) with
//! H^x = H ∩ F^x and finite reduced class semigroup. This crate builds
//! certified finite presentations of such monoids, computes their class
//! semigroups exactly, decides seminormality through the union-of-groups
//! (Clifford) property of the reduced class semigroup, decides
//! half-factoriality of seminormal presentations through a four-property
//! criterion on the labeled class semigroup, and constructs and verifies
//! transfer homomorphisms onto monoids of product-one sequences.
//!
//! Everything is exact integer arithmetic; every decision procedure is
//! paired with an independent brute-force oracle at desk scale.

pub mod abelian;
pub mod cmonoid;
pub mod criterion;
pub mod factorial;
pub mod gallery;
pub mod lengths;
pub mod productone;
pub mod semigroup;
pub mod util;

pub use abelian::{FiniteAbelianGroup, GroupHom};
pub use cmonoid::{CMonoidPresentation, Caps, ClassSemigroup};
pub use factorial::{FactorialElement, FactorialMonoid};
pub use semigroup::FinCommSemigroup;
