//! Enigma simulation and the cryptanalytic pipeline used against it:
//! Banburismus scoring, Scritchmus alphabet deduction and a crib bombe,
//! plus the classical ciphers and Bayesian bookkeeping they rest on.

pub mod alphabet;
pub mod banburismus;
pub mod bombe;
pub mod bayes;
pub mod classical;
pub mod enigma;
pub mod error;
pub mod keysheet;
pub mod perm;
pub mod pipeline;
pub mod rng;
pub mod scritchmus;

pub use alphabet::{Alphabet, Letter};
pub use error::{Error, Result};
pub use perm::Permutation;
