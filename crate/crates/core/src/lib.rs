//! S-adic subshifts generated by the Cassaigne–Selmer and Brun multidimensional
//! continued fraction algorithms.
//!
//! The crate covers the whole pipeline from a point of the simplex to spectral
//! data:
//!
//! * [`words`]: finite words, occurrence counts, factor complexity.
//! * [`substitution`]: substitutions, their integer matrices, primitivity.
//! * [`mcf`]: the continued fraction maps, itineraries, projective cylinder cells.
//! * [`boshernitzan`]: word-builder detection and Boshernitzan certificates.
//! * [`coding`]: level words `w_n(a)` and potentials sampled from them.
//! * [`spectrum`]: band spectra of periodic Schrödinger approximants.
//! * [`lyapunov`]: Monte Carlo Lyapunov exponents of the matrix cocycle.

pub mod boshernitzan;
pub mod coding;
pub mod error;
pub mod matrix;
pub mod mcf;
pub mod spectrum;
pub mod substitution;
pub mod lyapunov;
pub mod words;

pub use error::{Error, Result};
pub use words::{Letter, Word};
