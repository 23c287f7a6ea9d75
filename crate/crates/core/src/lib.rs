//! Exact and asymptotic numerics for the Curie-Weiss model CW(β, N).
//!
//! The spins `X_1, …, X_N ∈ {−1, +1}` carry the Gibbs weight
//! `exp(β·S_N² / (2N))` with `S_N = Σ X_i`. Everything in this crate revolves
//! around the distribution of `S_N` and the correlations `E[X_1⋯X_ℓ]`:
//!
//! * [`model`] holds the model parameters, the exponent `F_β` of the
//!   Hubbard-Stratonovich representation, the spontaneous magnetization and
//!   the four limit laws of `S_N / N^α`.
//! * [`exact`] computes finite-N quantities exactly through the magnetization
//!   pmf, with a `2^N` brute-force oracle for small systems.
//! * [`asymptotics`] evaluates the integral representation by quadrature, the
//!   generic Laplace approximation and the large-N correlation formulas.
//! * [`combinatorics`] counts multiindices and reassembles moments of `S_N`
//!   from correlations, mirroring the method-of-moments argument.
//! * [`sampler`] draws exact and Glauber-dynamics samples with reproducible
//!   random streams.

pub mod asymptotics;
pub mod combinatorics;
mod error;
pub mod exact;
pub mod model;
pub mod quadrature;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use model::{LimitLaw, ModelParams};
