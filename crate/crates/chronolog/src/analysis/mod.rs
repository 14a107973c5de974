//! Static cost analysis: from a moded program to per-predicate,
//! per-metric cost functions over input sizes.

pub mod closed;
pub mod costfn;
pub mod counting;
pub mod error;
pub mod evcost;
pub mod predicate;
pub mod recurrence;
pub mod relations;
pub mod size;
pub mod system;

pub use closed::{ClosedForm, SubstVal};
pub use costfn::{eval_cost, CostEvaluator, CostFunction, Guard, PredCostSet};
pub use error::{AnalysisError, EvalError, MeasureError};
pub use evcost::ev_cost;
pub use predicate::{all_metrics, predicate_cost, setup_cost_equation, Analyzer, BoundKind};
pub use recurrence::{solve_recurrence, Recurrence};
pub use size::{measure_term, static_measure, Affine, SizeExpr};
pub use system::{build_system, SccSystem, SystemEvaluator};
