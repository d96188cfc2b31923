//! Certified rates of private randomness for two-party Bell experiments.
//!
//! The adversary's probability of guessing the outcome pair `(a, b)` is
//! bounded from above by a semidefinite program over local-level-2 moment
//! matrices, one block per deterministic guessing strategy. The min-entropy
//! `−log₂ G` of that bound is the certified number of random bits per round.
//!
//! * [`bell`]: behaviors, Bell expressions, exact 2222 locality test
//! * [`quantum`]: noisy `|φ+⟩` states, measurement settings, Born rule
//! * [`moments`]: moment-matrix structure and linear read-outs
//! * [`sdp`]: interior-point solver and SDPA import/export
//! * [`guessing`]: the guessing-probability program and dual certificates
//! * [`oracle`]: explicit decompositions giving lower bounds
//! * [`sweep`]: noise sweeps and CSV output

pub mod bell;
pub mod error;
pub mod guessing;
pub mod moments;
pub mod oracle;
pub mod quantum;
pub mod sdp;
pub mod sweep;

pub use error::{Error, Result};
