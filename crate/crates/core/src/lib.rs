//! Exact invariants of Fano cone singularities.
//!
//! * [`exactgeom`] — rational vectors, lattices, cones, polyhedra, volumes.
//! * [`pdiv`] — proper polyhedral divisors on P¹ and their boundaries.
//! * [`disc`] — the Q-Gorenstein system and log discrepancies.
//! * [`kollar`] — Kollár components, toric degenerations, mld witnesses.
//! * [`toricvol`] — volumes and normalized volumes of toric cones.
//! * [`hyper`] — weighted hypersurface singularities.

pub mod disc;
pub mod error;
pub mod exactgeom;
pub mod hyper;
pub mod kollar;
pub mod pdiv;
pub mod testkit;
pub mod toricvol;

pub use error::{Error, Result};
