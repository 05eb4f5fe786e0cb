//! Online behavior recognition for dynamic agents using per-behavior
//! discrete-observation hidden Markov models.
//!
//! The pipeline mirrors an observer watching another agent move:
//!
//! 1. [`simulator`] generates randomized executions of six polygonal
//!    behaviors as timed noisy position streams with ground truth.
//! 2. [`perception`] smooths positions through a constant-velocity Kalman
//!    filter and emits one discrete symbol per completed change in velocity
//!    direction, so observation spacing is event-based and irregular.
//! 3. [`hmm`] trains one model per behavior with Baum-Welch and scores
//!    symbol prefixes with a scaled forward recursion.
//! 4. [`normalizer`] precomputes, per behavior, the maximum probability any
//!    observation sequence of each length can attain.
//! 5. [`recognizer`] runs online sessions reporting, after every event, a
//!    normalized likelihood in [0, 1] per behavior, the closed-set
//!    posterior, and the argmax behavior.
//! 6. [`harness`] ties it together: simulate, train, recognize, evaluate.
//!
//! See the crate examples for one runnable program per capability.

pub mod harness;
pub mod hmm;
pub mod normalizer;
pub mod perception;
pub mod recognizer;
pub mod simulator;

pub use hmm::{
    baum_welch_train, sample_sequence, sequence_log_prob, ForwardState, HmmError, HmmModel,
    ObservationSequence, TrainConfig,
};
pub use normalizer::{build_normalizer_table, extend_normalizer_table, NormalizerTable};
pub use perception::{
    events_from_positions, symbol_for_angle, EventDetector, NoiseParams, ObservationEvent,
    QuantizerConfig, TrackState,
};
pub use recognizer::{
    exclusive_posterior, load_behavior_set, BehaviorModel, BehaviorSet, RecognitionReport,
    RecognitionSession,
};
pub use simulator::{
    build_behavior_path, simulate_behavior, simulate_run, BehaviorKind, BehaviorTemplate,
    Direction, RunConfig, SimRun,
};
