//! Bipolar-oriented triangulations and their lattice-walk encodings.
//!
//! The crate is organized around the walk/map correspondence: [`walk`] holds
//! the three-step lattice walks and their samplers, [`kmsw`] turns walks into
//! triangulations and back, [`map`] is the planar-map structure itself, and
//! [`distance`]/[`busemann`] compute directed distances and boundary distance
//! asymmetries on top. [`enumerate`] provides exact small-instance oracles,
//! [`sampler`] the random-map models, and [`experiment`] the Monte Carlo
//! drivers with deterministic parallel seeding.

pub mod busemann;
pub mod distance;
pub mod enumerate;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kmsw;
pub mod map;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;
pub mod walk;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
