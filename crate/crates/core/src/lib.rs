//! Joint user pairing and power control for cooperative NOMA downlinks.
//!
//! Each candidate pair gets a closed-form optimal power split and relay
//! power ([`power_control`]); pairs are then matched by the Hungarian
//! algorithm on their optimal sum rates ([`assignment`]). [`oracle`] holds
//! brute-force checks of both layers and [`experiments`] the Monte-Carlo
//! harness built on [`channel`].

pub mod assignment;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod power_control;
pub mod rates;

pub use error::InputError;
pub use power_control::{PairProblem, PairSolution, QosSpec, RelayMode};
pub use rates::{PairChannels, PowerDecision, RatePair};
