//! Core library for simulating BB84-style quantum position verification
//! protocols with a commitment phase, together with the verifier-side
//! statistics, concentration-bound verdict engine and device-level loss
//! models needed to analyze them.
//!
//! The crate is organized around the protocol data flow:
//!
//! * [`qcore`] — exact small-dimension quantum state/channel algebra
//!   (density matrices, instruments, Kraus channels, Bell states) plus the
//!   randomized verification suites for the measurement-disturbance and
//!   instrument-decomposition facts the security argument rests on.
//! * [`protocol`] — geometry/timing model, the keyed basis function `f`,
//!   and the round state machines for the plain and committing protocol
//!   variants.
//! * [`devices`] — stochastic detector and channel models: loss, dark
//!   counts, the partial Bell-measurement presence detector, and the
//!   prover-lab pipeline yielding empirical transmission figures.
//! * [`strategies`] — pluggable prover/attacker behaviors.
//! * [`verdict`] — payoff scores, Chernoff/Azuma thresholds, detection
//!   probabilities, round budgets and the accept/reject decision.
//! * [`estimate`] — closed-form engineering estimators (transmission
//!   decomposition, signal-to-noise ratio, fiber length, duration).
//! * [`rng`] — reproducible master/child random streams for parallel
//!   Monte Carlo runs.

pub mod devices;
pub mod estimate;
pub mod protocol;
pub mod qcore;
pub mod rng;
pub mod strategies;
pub mod verdict;

pub use devices::DeviceParams;
pub use protocol::{BitString, Geometry, ProtocolConfig, RoundRecord, Transcript, Verdict};
pub use strategies::Strategy;
pub use verdict::{BoundParams, Decision, SecureRegion, SecurityModel};
