//! Asymptotic eigenvalue moments (AEM) of asynchronous CDMA crosscorrelation
//! matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`nc`]: noncrossing partitions, Kreweras complements, K-graphs and the
//!   exact class-size counting formulas that index every moment sum.
//! - [`waveform`]: chip pulses (sinc, square-root raised cosine, sampled
//!   custom spectra), their autocorrelations and the spectral moments
//!   `W^(m)` that fingerprint a pulse in chip-asynchronous systems.
//! - [`aem`]: closed-form moments for chip-synchronous and chip-asynchronous
//!   crosscorrelation matrices, faded variants, and the free-probability
//!   moment/cumulant machinery.
//! - [`simulator`]: finite random-spreading systems for Monte Carlo checks.
//! - [`quadrature`]: Gauss rules from moment sequences and the spectral
//!   efficiency / MMSE functionals evaluated with them.
//! - [`cli`]: the command implementations behind the `spectra-cdma` binary.
//!
//! All internal time quantities are in chip units (`T_c = 1`).

pub mod aem;
pub mod cli;
pub mod error;
pub mod nc;
pub mod numeric;
pub mod quadrature;
pub mod simulator;
pub mod waveform;

pub use error::{Error, Result};
