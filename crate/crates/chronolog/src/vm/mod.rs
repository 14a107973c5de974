//! Program execution: a committed-choice interpreter with event counting,
//! and a wall-clock timing harness over the same engine core.
//!
//! The two configurations differ only in the event sink type parameter, so
//! the timed path carries no counting code while executing exactly the same
//! control flow as the counted path.

pub mod machine;
pub mod timing;

pub use machine::{
    compile_goal, solve, solve_with_options, CompiledGoal, CompiledProgram, CountingSink,
    EventCounts, EventSink, Machine, NullSink, Outcome, RunError, SolveOptions, SolveReport,
};
pub use timing::{builtin_time_targets, profile, time_builtin, TimingError, TimingResult};
