//! Cost metric identities shared by the analyzer, the interpreter, and the
//! calibration pipeline.

use crate::lang::term::PredSig;
use std::fmt;
use std::str::FromStr;

/// One countable event class. The six head metrics count work done by clause
/// resolution; `Call` metrics count builtin executions (`is/2`, comparisons)
/// and individual arithmetic-operator evaluations (`+/2`, `-/1`, ...).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Metric {
    /// One unit per clause resolution.
    Step,
    /// Head arity units per resolution.
    Nargs,
    /// Symbols inside non-variable input head arguments.
    Giunif,
    /// Symbols inside non-variable output head arguments.
    Gounif,
    /// Bare-variable input head arguments.
    Viunif,
    /// Bare-variable output head arguments.
    Vounif,
    /// Builtin or arithmetic-operator invocation, keyed by signature.
    Call(PredSig),
}

pub const HEAD_METRICS: [Metric; 6] = [
    Metric::Step,
    Metric::Nargs,
    Metric::Giunif,
    Metric::Gounif,
    Metric::Viunif,
    Metric::Vounif,
];

impl Metric {
    pub fn call(name: &str, arity: usize) -> Metric {
        Metric::Call(PredSig::new(name, arity))
    }

    pub fn is_head_metric(&self) -> bool {
        !matches!(self, Metric::Call(_))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Step => write!(f, "step"),
            Metric::Nargs => write!(f, "nargs"),
            Metric::Giunif => write!(f, "giunif"),
            Metric::Gounif => write!(f, "gounif"),
            Metric::Viunif => write!(f, "viunif"),
            Metric::Vounif => write!(f, "vounif"),
            Metric::Call(sig) => write!(f, "{sig}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown metric `{0}`; expected step|nargs|giunif|gounif|viunif|vounif or name/arity")]
pub struct MetricParseError(pub String);

impl FromStr for Metric {
    type Err = MetricParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "step" => return Ok(Metric::Step),
            "nargs" => return Ok(Metric::Nargs),
            "giunif" => return Ok(Metric::Giunif),
            "gounif" => return Ok(Metric::Gounif),
            "viunif" => return Ok(Metric::Viunif),
            "vounif" => return Ok(Metric::Vounif),
            _ => {}
        }
        if let Some((name, ar)) = s.rsplit_once('/') {
            if !name.is_empty() {
                if let Ok(arity) = ar.parse::<usize>() {
                    return Ok(Metric::call(name, arity));
                }
            }
        }
        Err(MetricParseError(s.to_string()))
    }
}

/// An ordered selection of metrics used as regression components or as the
/// component axis of a cost vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CostModel {
    pub components: Vec<Metric>,
}

impl CostModel {
    pub fn new(components: Vec<Metric>) -> Self {
        CostModel { components }
    }

    /// The six head metrics in canonical order.
    pub fn full() -> Self {
        CostModel::new(HEAD_METRICS.to_vec())
    }

    /// step + the four unification metrics: the usual best performer.
    pub fn five_component() -> Self {
        CostModel::new(vec![
            Metric::Step,
            Metric::Giunif,
            Metric::Gounif,
            Metric::Viunif,
            Metric::Vounif,
        ])
    }

    pub fn four_component() -> Self {
        CostModel::new(vec![
            Metric::Step,
            Metric::Giunif,
            Metric::Gounif,
            Metric::Vounif,
        ])
    }

    pub fn step_only() -> Self {
        CostModel::new(vec![Metric::Step])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn signature(&self) -> String {
        self.components
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_signature(s: &str) -> Result<Self, MetricParseError> {
        let mut components = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            components.push(part.parse()?);
        }
        if components.is_empty() {
            return Err(MetricParseError("empty model signature".into()));
        }
        Ok(CostModel::new(components))
    }

    pub fn index_of(&self, m: &Metric) -> Option<usize> {
        self.components.iter().position(|c| c == m)
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signature())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_roundtrip() {
        let m = CostModel::five_component();
        let back = CostModel::parse_signature(&m.signature()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn call_metric_parses() {
        let m: Metric = "is/2".parse().unwrap();
        assert_eq!(m, Metric::call("is", 2));
        assert!("bogus metric".parse::<Metric>().is_err());
    }
}
