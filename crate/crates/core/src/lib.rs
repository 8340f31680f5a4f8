//! Simulation core for BB84 key distribution with two qubits carried by one
//! photon: polarization (`|H⟩`, `|V⟩`) and a transverse-mode qubit spanned by
//! the first-order Hermite-Gaussian modes.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and multi-threaded execution live in the `photonkd` crate.
//!
//! Module map:
//!
//! * [`linalg`]: states, operators and Born-rule sampling in dimension 2 and 4.
//! * [`optics`]: wave plates, mode converters, the Sagnac controlled gate, PBS.
//! * [`mub`]: the five mutually unbiased bases and their preparation and
//!   measurement circuits.
//! * [`mzem`]: the parity-sorting interferometer, its imperfections and the
//!   mode-overlap quadrature.
//! * [`protocol`]: the Monte Carlo key-distribution run and its statistics.
//! * [`postproc`]: parity reconciliation and Toeplitz privacy amplification.
#![no_std]

extern crate alloc;

mod error;
pub mod linalg;
pub mod mub;
pub mod mzem;
pub mod optics;
pub mod postproc;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{Complex, Operator, PureState2, PureState4};
pub use rng::RandomStream;
