//! Discounted MDP over the discretized relative state space and the wait
//! maps extracted from it.
//!
//! Transitions step each cell center through every intruder motion, test
//! the continuous result for loss of well clear or departure, and otherwise
//! spread the probability over neighbouring cell centers by multilinear
//! interpolation.

mod config;
mod grid;
mod hitting;
mod io;
mod kernel;
mod map;
mod motion;
mod solve;

pub use config::MdpConfig;
pub use grid::{Axis, CellId, StateGrid, AXIS_NAMES};
pub use hitting::{wait_times, HittingTimes};
pub use io::{load_map, load_map_expecting, map_to_string, save_map, FORMAT_VERSION};
pub use kernel::{
    classify_step, reward, reward_value, transition_distribution, Action, StepOutcome, WaitKernel,
};
pub use map::{MapMetadata, WaitHistogram, WaitMap};
pub use motion::IntruderMotionModel;
pub use solve::{value_iterate, ValueSolution};
