//! Certification toolkit for chemical reaction networks with unknown monotone
//! kinetics: decides whether a robust piecewise-linear (in rates) Lyapunov
//! certificate exists for the network structure, synthesizes it by linear
//! programming, derives the species-coordinates dual and contraction
//! certificates, runs Petri-net/structural analyses (siphons, principal-minor
//! nonnegativity, persistence, uniqueness) and validates every certificate
//! numerically against simulated trajectories.

pub mod contraction;
pub mod dual;
pub mod exact;
pub mod kinetics;
pub mod lp;
pub mod model;
pub mod par;
pub mod partition;
pub mod pwlr;
pub mod report;
pub mod simulate;
pub mod structural;

pub use exact::{ExactMat, Rat};
pub use kinetics::{KineticsSpec, RateLaw};
pub use model::{parse_network, ReactionNetwork};
pub use partition::ConicPartition;
