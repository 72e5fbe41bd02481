//! Exact analysis of the alpha take-away game: a single pile, the first
//! player may take up to `n - 1` stones, and afterwards each player may take
//! up to `alpha` times the previous removal.
//!
//! * [`numerics`]: exact rationals and root diagnostics
//! * [`sequence`]: the losing-position sequence and its structure
//! * [`game`]: the game-tree oracle and the winning strategy
//! * [`cutoffs`]: ratio sequences, stable intervals and cutoff enumeration
//! * [`cache`]: the on-disk cutoff cache

pub mod cache;
pub mod cutoffs;
pub mod error;
pub mod game;
pub mod numerics;
pub mod sequence;

pub use cutoffs::{
    enumerate_cutoffs, next_cutoff, q_sequence, stable_interval, CutoffCensus, RatioPoint,
    StableInterval,
};
pub use error::{Result, TagError};
pub use game::{initial_state, BestMove, GameState, Outcome, Solver};
pub use numerics::{cmp_scaled, dominant_root, floor_scale, Natural, Rational, RootDiagnostics};
pub use sequence::{generate, Horizon, PSequence, RecurrenceInfo, Window, Zeckendorf};
