//! Exact densities of automatic sequences along the naturals, primes,
//! squares and coprime residue classes.

pub mod corpus;
pub mod density;
pub mod dfao;
pub mod error;
pub mod extremal;
pub mod mullner;
pub mod rational;
pub mod structure;
pub mod subseq;

pub use dfao::{parse_dfao, Dfao};
pub use error::{Error, ParseError, Result};
pub mod verify;
pub mod cli;
