//! Franck-Condon factor reconstruction from nearest-neighbour photon-number
//! marginals.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`gaussian`]: a [`VibronicTransition`] (frequencies, Duschinsky rotation,
//!    displacement) becomes the final-state [`GaussianState`] by evolving the
//!    vacuum through the Doktorov Bogoliubov transformation.
//! 2. [`marginals`]: each adjacent mode pair is reduced out of the state and its
//!    photon-number table is filled with loop-hafnian probabilities
//!    ([`probability`], [`hafnian`]).
//! 3. [`pursuit`]: matching pursuit recovers the sparse joint distribution; the
//!    best column each round is found by dynamic programming along the mode
//!    chain.
//!
//! [`oracles`] holds the brute-force and closed-form references the fast paths
//! are checked against.

pub mod error;
pub mod gaussian;
pub mod hafnian;
pub mod marginals;
pub mod oracles;
pub mod pattern;
pub mod probability;
pub mod pursuit;
pub mod synthetic;

pub use error::{Error, Result};
pub use gaussian::{
    build_doktorov, evolve_vacuum, reduce_state, DoktorovParameters, GaussianState,
    VibronicTransition,
};
pub use hafnian::loop_hafnian;
pub use marginals::{
    flatten_measurement, measure_patterns, scan_pairs, PairMarginalSet, DEFAULT_CUTOFF,
};
pub use oracles::{
    analytic_singles, brute_force_loop_hafnian, enumerate_exact_spectrum, exhaustive_chain_argmax,
    EnumerationBudget, ExactSpectrum, SingleModeLaw,
};
pub use pattern::{enumerate_patterns, PhotonPattern};
pub use probability::{build_context, pattern_probability, vacuum_probability, PatternProbabilityContext};
pub use pursuit::{
    chain_argmax, l1_distance, ptmp, subtract_column, PatternDistribution, ResidueChain,
    SparseSpectrum, DEFAULT_STEP,
};
