//! Cost functions and clause-selection guards.
//!
//! A cost function maps a tuple of input sizes to a rational cost. It is
//! either a closed form or an evaluator that resolves the defining
//! equations numerically for each requested size tuple.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::BigRational;

use crate::analysis::closed::ClosedForm;
use crate::analysis::error::EvalError;
use crate::lang::term::PredSig;
use crate::metric::Metric;

/// Inclusive interval constraint on one input size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: i64,
    pub hi: Option<i64>,
}

impl Interval {
    fn intersect(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: match (self.hi, other.hi) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, None) => a,
                (None, b) => b,
            },
        }
    }

    fn is_empty(self) -> bool {
        matches!(self.hi, Some(h) if h < self.lo)
    }

    fn disjoint(self, other: Interval) -> bool {
        self.intersect(other).is_empty()
    }
}

/// Conjunction of interval constraints a clause places on input sizes,
/// extracted from head patterns and leading comparisons. A clause can run
/// only when its guard holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Guard {
    constraints: BTreeMap<usize, Interval>,
}

impl Guard {
    pub fn always() -> Guard {
        Guard::default()
    }

    pub fn is_always(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn require(&mut self, pos: usize, lo: Option<i64>, hi: Option<i64>) {
        let iv = Interval {
            lo: lo.unwrap_or(0),
            hi,
        };
        let e = self
            .constraints
            .entry(pos)
            .or_insert(Interval { lo: 0, hi: None });
        *e = e.intersect(iv);
    }

    pub fn eq(pos: usize, k: i64) -> Guard {
        let mut g = Guard::always();
        g.require(pos, Some(k), Some(k));
        g
    }

    pub fn at_least(pos: usize, k: i64) -> Guard {
        let mut g = Guard::always();
        g.require(pos, Some(k), None);
        g
    }

    /// The exact value this guard pins `pos` to, if it pins one.
    pub fn exact_on(&self, pos: usize) -> Option<i64> {
        let iv = self.constraints.get(&pos)?;
        (iv.hi == Some(iv.lo)).then_some(iv.lo)
    }

    /// Lower bound on `pos` with no upper bound, if that is the shape.
    pub fn lower_only_on(&self, pos: usize) -> Option<i64> {
        let iv = self.constraints.get(&pos)?;
        iv.hi.is_none().then_some(iv.lo)
    }

    pub fn constrains(&self, pos: usize) -> bool {
        self.constraints.contains_key(&pos)
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.constraints.keys().copied()
    }

    pub fn holds(&self, sizes: &[Option<i64>]) -> Result<bool, EvalError> {
        for (pos, iv) in &self.constraints {
            let n = sizes
                .get(*pos)
                .copied()
                .flatten()
                .ok_or(EvalError::MissingSize { pos: *pos })?;
            if n < iv.lo || matches!(iv.hi, Some(h) if n > h) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when no size tuple satisfies both guards, by interval overlap
    /// on some common position. Guards on disjoint position sets are never
    /// provably exclusive.
    pub fn disjoint_with(&self, other: &Guard) -> bool {
        self.constraints.iter().any(|(pos, iv)| {
            other
                .constraints
                .get(pos)
                .is_some_and(|jv| iv.disjoint(*jv))
        })
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraints.is_empty() {
            return write!(f, "true");
        }
        for (i, (pos, iv)) in self.constraints.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match iv.hi {
                Some(h) if h == iv.lo => write!(f, "n{} = {}", pos + 1, iv.lo)?,
                Some(h) => write!(f, "{} =< n{} =< {}", iv.lo, pos + 1, h)?,
                None => write!(f, "n{} >= {}", pos + 1, iv.lo)?,
            }
        }
        Ok(())
    }
}

/// Evaluates a cost at concrete input sizes. Implementations resolve the
/// predicate's defining equations numerically.
pub trait CostEvaluator: Send + Sync + fmt::Debug {
    fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError>;

    /// Short human-readable tag for rendering.
    fn describe(&self) -> String {
        "<recurrence evaluation>".to_string()
    }
}

/// Cost of one predicate under one metric, as a function of input sizes.
#[derive(Debug, Clone)]
pub enum CostFunction {
    Closed(ClosedForm),
    Evaluator(Arc<dyn CostEvaluator>),
}

impl CostFunction {
    pub fn zero() -> CostFunction {
        CostFunction::Closed(ClosedForm::zero())
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, CostFunction::Closed(_))
    }

    pub fn closed(&self) -> Option<&ClosedForm> {
        match self {
            CostFunction::Closed(cf) => Some(cf),
            CostFunction::Evaluator(_) => None,
        }
    }

    pub fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
        match self {
            CostFunction::Closed(cf) => cf.eval(sizes),
            CostFunction::Evaluator(e) => e.eval(sizes),
        }
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFunction::Closed(cf) => write!(f, "{}", cf),
            CostFunction::Evaluator(e) => write!(f, "{}", e.describe()),
        }
    }
}

/// Evaluates a cost function at concrete sizes. `None` entries stand for
/// arguments whose size is untracked; using one is an error.
pub fn eval_cost(f: &CostFunction, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
    f.eval(sizes)
}

/// All cost functions of one predicate, keyed by metric. Metrics absent
/// from the map cost zero.
#[derive(Debug, Clone)]
pub struct PredCostSet {
    pub sig: PredSig,
    pub per_metric: BTreeMap<Metric, CostFunction>,
}

impl PredCostSet {
    pub fn cost(&self, m: &Metric) -> CostFunction {
        self.per_metric
            .get(m)
            .cloned()
            .unwrap_or_else(CostFunction::zero)
    }
}
