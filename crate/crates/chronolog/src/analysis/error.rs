//! Error types for cost analysis and cost-function evaluation.

use crate::lang::term::PredSig;
use crate::metric::Metric;

#[derive(Debug, Clone, thiserror::Error)]
pub enum AnalysisError {
    #[error("program has validation errors:\n{0}")]
    Invalid(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(PredSig),
    #[error("{pred}: clause {clause}, literal {lit}: size of argument {arg} cannot be resolved; add a size assertion")]
    UnresolvedSize {
        pred: PredSig,
        clause: usize,
        lit: usize,
        arg: usize,
    },
    #[error("{pred}: exact cost requested but clauses {a} and {b} are not syntactically exclusive")]
    NotExactCapable { pred: PredSig, a: usize, b: usize },
    #[error("{pred}: trust_cost({metric}) expression unsupported: {reason}")]
    TrustExpr {
        pred: PredSig,
        metric: Metric,
        reason: String,
    },
    #[error("{pred}: recursive calls do not decrease any input size; analysis would not terminate")]
    NonTerminating { pred: PredSig },
    #[error("{pred}: clause {clause}: {reason}")]
    BadArithExpr {
        pred: PredSig,
        clause: usize,
        reason: String,
    },
    #[error("{pred}: sols expression unsupported: {reason}")]
    SolsExpr { pred: PredSig, reason: String },
    #[error("recurrence for {pred} metric {metric} is outside the closed-form class: {reason}")]
    NotClosedForm {
        pred: PredSig,
        metric: Metric,
        reason: String,
    },
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("size of argument {} is required but was not supplied", pos + 1)]
    MissingSize { pos: usize },
    #[error("size expression produced a negative value ({value}) where a size was expected")]
    NegativeSize { value: i64 },
    #[error("arithmetic overflow while evaluating a size expression")]
    Overflow,
    #[error("no clause of {pred} applies at sizes {sizes:?}")]
    NoApplicableClause { pred: PredSig, sizes: Vec<Option<i64>> },
    #[error("evaluation of {pred} does not terminate (cyclic cost dependency)")]
    Cycle { pred: PredSig },
    #[error("evaluation recursion limit exceeded in {pred}")]
    DepthExceeded { pred: PredSig },
    #[error("negative exponent in size expression")]
    NegativeExponent,
    #[error("solution count evaluated to a negative number")]
    NegativeSols,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("term is not a proper list")]
    NotAList,
    #[error("term is not ground")]
    NotGround,
    #[error("term is not an integer")]
    NotAnInt,
    #[error("int-value measure of a negative integer")]
    NegativeInt,
    #[error("argument has no tracked size (void measure)")]
    Void,
}
