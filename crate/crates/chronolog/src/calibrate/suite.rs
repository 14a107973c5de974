//! Calibration programs with exactly known cost functions.
//!
//! Each program is a list-driven loop around one payload predicate chosen
//! to weight a particular head metric: zero-argument chains, bare-variable
//! input and output unification, deep and flat ground input structure,
//! ground output structure, and a many-argument head. None of them calls
//! a builtin, so every nanosecond of a run is attributable to the six head
//! metrics being fitted. Clause patterns are disjoint in every program,
//! which makes the analyzed upper and lower cost bounds coincide.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{Analyzer, BoundKind, PredCostSet};
use crate::calibrate::matrix::{Householder, Mat};
use crate::calibrate::CalibrateError;
use crate::lang::parse_program;
use crate::lang::program::Program;
use crate::lang::term::{PredSig, Term};
use crate::metric::CostModel;

/// One calibration unit: a program, its entry predicate, and that
/// predicate's exact cost functions.
pub struct CalibrationProgram {
    pub id: &'static str,
    pub program: Program,
    pub entry: PredSig,
    pub costs: Arc<PredCostSet>,
}

impl CalibrationProgram {
    /// The goal for one input of size `n`. Every driver takes a single
    /// integer list, so goals differ only in their generated list.
    pub fn goal(&self, n: i64, seed: u64) -> Vec<Term> {
        vec![Term::comp(
            self.entry.name.as_str(),
            vec![gen_int_list(n, seed)],
        )]
    }

    /// Size tuple matching `goal(n, _)` for cost evaluation.
    pub fn size_args(&self, n: i64) -> Vec<Option<i64>> {
        vec![Some(n)]
    }
}

/// Deterministic list of `n` small integers.
pub fn gen_int_list(n: i64, seed: u64) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..n.max(0))
        .map(|_| Term::Int(rng.gen_range(0..100)))
        .collect();
    Term::list(items)
}

/// Default input-size grid: 25 sizes.
pub fn default_sizes() -> Vec<i64> {
    (1..=25).map(|i| 4 * i).collect()
}

fn deep_ground(depth: usize) -> String {
    format!("{}zero{}", "s(".repeat(depth), ")".repeat(depth))
}

fn flat_ground(head: &str, width: usize) -> String {
    format!("{head}({})", vec!["a"; width].join(","))
}

fn suite_sources() -> Vec<(&'static str, String)> {
    // Payload term weights below are 25 symbols each.
    let deep = deep_ground(24);
    let flat = flat_ground("k", 24);
    let out = flat_ground("r", 24);
    vec![
        (
            "walk",
            "
:- mode(walk/1, [in]).
:- measure(walk/1, [length]).
:- entry(walk/1).
walk([]).
walk([_|T]) :- walk(T).
"
            .to_string(),
        ),
        (
            "walk_back",
            "
:- mode(walk_back/1, [in]).
:- measure(walk_back/1, [length]).
:- entry(walk_back/1).
walk_back([]).
walk_back([_|T]) :- walk_back(T), tick.
:- mode(tick/0, []).
:- measure(tick/0, []).
tick.
"
            .to_string(),
        ),
        (
            "noargs",
            "
:- mode(noargs/1, [in]).
:- measure(noargs/1, [length]).
:- entry(noargs/1).
noargs([]).
noargs([_|T]) :- tick, tick, tick, tick, noargs(T).
:- mode(tick/0, []).
:- measure(tick/0, []).
tick.
"
            .to_string(),
        ),
        (
            "env",
            "
:- mode(env/1, [in]).
:- measure(env/1, [length]).
:- entry(env/1).
env([]).
env([_|T]) :- tick, tick, tick, tick, tick, tick, tick, tick, env(T).
:- mode(tick/0, []).
:- measure(tick/0, []).
tick.
"
            .to_string(),
        ),
        (
            "var_in",
            "
:- mode(var_in/1, [in]).
:- measure(var_in/1, [length]).
:- entry(var_in/1).
var_in([]).
var_in([_|T]) :- sink8(1,2,3,4,5,6,7,8), var_in(T).
:- mode(sink8/8, [in,in,in,in,in,in,in,in]).
:- measure(sink8/8, [void,void,void,void,void,void,void,void]).
sink8(_,_,_,_,_,_,_,_).
"
            .to_string(),
        ),
        (
            "var_out",
            "
:- mode(var_out/1, [in]).
:- measure(var_out/1, [length]).
:- entry(var_out/1).
var_out([]).
var_out([_|T]) :- make8(_,_,_,_,_,_,_,_), var_out(T).
:- mode(make8/8, [out,out,out,out,out,out,out,out]).
:- measure(make8/8, [void,void,void,void,void,void,void,void]).
make8(_,_,_,_,_,_,_,_).
"
            .to_string(),
        ),
        (
            "ground_in_deep",
            format!(
                "
:- mode(ground_in_deep/1, [in]).
:- measure(ground_in_deep/1, [length]).
:- entry(ground_in_deep/1).
ground_in_deep([]).
ground_in_deep([_|T]) :- eat({deep}), ground_in_deep(T).
:- mode(eat/1, [in]).
:- measure(eat/1, [void]).
eat({deep}).
"
            ),
        ),
        (
            "ground_in_flat",
            format!(
                "
:- mode(ground_in_flat/1, [in]).
:- measure(ground_in_flat/1, [length]).
:- entry(ground_in_flat/1).
ground_in_flat([]).
ground_in_flat([_|T]) :- eatw({flat}), ground_in_flat(T).
:- mode(eatw/1, [in]).
:- measure(eatw/1, [void]).
eatw({flat}).
"
            ),
        ),
        (
            "ground_out",
            format!(
                "
:- mode(ground_out/1, [in]).
:- measure(ground_out/1, [length]).
:- entry(ground_out/1).
ground_out([]).
ground_out([_|T]) :- emit(_), ground_out(T).
:- mode(emit/1, [out]).
:- measure(emit/1, [void]).
emit({out}).
"
            ),
        ),
        (
            "wide_args",
            "
:- mode(wide_args/1, [in]).
:- measure(wide_args/1, [length]).
:- entry(wide_args/1).
wide_args([]).
wide_args([_|T]) :- spread(1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16), wide_args(T).
:- mode(spread/16, [in,in,in,in,in,in,in,in,in,in,in,in,in,in,in,in]).
:- measure(spread/16, [void,void,void,void,void,void,void,void,void,void,void,void,void,void,void,void]).
spread(1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16).
"
            .to_string(),
        ),
    ]
}

/// Builds the bundled suite and proves the stacked sample matrix for the
/// full six-component model has full column rank.
pub fn builtin_calibration_suite() -> Result<Vec<CalibrationProgram>, CalibrateError> {
    let mut suite = Vec::new();
    for (id, src) in suite_sources() {
        let program = parse_program(&src).map_err(|diags| CalibrateError::Suite {
            id: id.to_string(),
            detail: diags
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        })?;
        let entry = program
            .entry_sigs()
            .into_iter()
            .next()
            .ok_or_else(|| CalibrateError::Suite {
                id: id.to_string(),
                detail: "no entry declaration".into(),
            })?;
        let mut analyzer =
            Analyzer::new(&program, BoundKind::Exact).map_err(|e| CalibrateError::Suite {
                id: id.to_string(),
                detail: e.to_string(),
            })?;
        let costs = analyzer
            .cost_set(&entry)
            .map_err(|e| CalibrateError::Suite {
                id: id.to_string(),
                detail: e.to_string(),
            })?;
        suite.push(CalibrationProgram {
            id,
            program,
            entry,
            costs,
        });
    }
    check_full_rank(&suite)?;
    Ok(suite)
}

/// Stacks probe rows for the six-component model and runs the pivot checks.
fn check_full_rank(suite: &[CalibrationProgram]) -> Result<(), CalibrateError> {
    let model = CostModel::full();
    let mut rows = Vec::new();
    for prog in suite {
        for n in [3_i64, 7, 16] {
            rows.push(cost_row(prog, &model, n)?);
        }
    }
    let c = Mat::from_rows(&rows);
    let hh = Householder::factor(&c);
    let zeros = vec![0.0; rows.len()];
    hh.solve_upper(&zeros)
        .map_err(|err| match err {
            crate::calibrate::matrix::MatrixError::RankDeficient { column, .. } => {
                CalibrateError::Redundant {
                    metric: model.components[column].to_string(),
                    detail: err.to_string(),
                }
            }
            other => CalibrateError::Matrix(other),
        })
        .map(|_| ())
}

/// One sample-matrix row: each model component evaluated at size `n`.
pub fn cost_row(
    prog: &CalibrationProgram,
    model: &CostModel,
    n: i64,
) -> Result<Vec<f64>, CalibrateError> {
    use num::ToPrimitive;
    let sizes = prog.size_args(n);
    let mut row = Vec::with_capacity(model.len());
    for comp in &model.components {
        let value = prog
            .costs
            .cost(comp)
            .eval(&sizes)
            .map_err(|e| CalibrateError::Cost {
                id: prog.id.to_string(),
                size: n,
                detail: e.to_string(),
            })?;
        let as_f64 = value.to_f64().ok_or_else(|| CalibrateError::Cost {
            id: prog.id.to_string(),
            size: n,
            detail: format!("{value} does not fit in f64"),
        })?;
        row.push(as_f64);
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::predicate_cost;
    use crate::lang::term::Term;
    use crate::metric::{Metric, HEAD_METRICS};
    use crate::vm::{solve, Outcome};
    use num::{BigRational, ToPrimitive};

    #[test]
    fn suite_builds_with_full_rank() {
        let suite = builtin_calibration_suite().unwrap();
        assert!(suite.len() >= 10);
    }

    #[test]
    fn generated_lists_are_deterministic_and_sized() {
        let a = gen_int_list(3, 99);
        let b = gen_int_list(3, 99);
        assert_eq!(a, b);
        assert_eq!(a.list_len(), Some(3));
        assert_eq!(gen_int_list(0, 7), Term::nil());
        assert_ne!(gen_int_list(3, 99), gen_int_list(3, 100));
    }

    /// The payload predicates isolate their metrics: the ground-output
    /// payload touches no other unification metric, and the zero-argument
    /// payload touches none at all.
    #[test]
    fn payloads_isolate_their_metrics() {
        let suite = builtin_calibration_suite().unwrap();

        let go = suite.iter().find(|p| p.id == "ground_out").unwrap();
        let emit =
            predicate_cost(&go.program, &PredSig::new("emit", 1), BoundKind::Exact).unwrap();
        let at = |m: &Metric| emit.cost(m).eval(&[None]).unwrap();
        assert_eq!(at(&Metric::Gounif), BigRational::from_integer(25.into()));
        assert_eq!(at(&Metric::Giunif), BigRational::from_integer(0.into()));
        assert_eq!(at(&Metric::Viunif), BigRational::from_integer(0.into()));
        assert_eq!(at(&Metric::Vounif), BigRational::from_integer(0.into()));

        let na = suite.iter().find(|p| p.id == "noargs").unwrap();
        let tick =
            predicate_cost(&na.program, &PredSig::new("tick", 0), BoundKind::Exact).unwrap();
        let at = |m: &Metric| tick.cost(m).eval(&[]).unwrap();
        assert_eq!(at(&Metric::Step), BigRational::from_integer(1.into()));
        assert_eq!(at(&Metric::Nargs), BigRational::from_integer(0.into()));
        for m in [Metric::Giunif, Metric::Gounif, Metric::Viunif, Metric::Vounif] {
            assert_eq!(at(&m), BigRational::from_integer(0.into()));
        }
    }

    /// Every suite program's declared exact costs must equal its dynamic
    /// event counts; calibration quality rests on this equality.
    #[test]
    fn suite_costs_match_dynamic_counts() {
        let suite = builtin_calibration_suite().unwrap();
        for prog in &suite {
            for n in [0_i64, 1, 5, 12] {
                let goal = prog.goal(n, 42);
                let report = solve(&prog.program, &goal).unwrap();
                assert_eq!(
                    report.outcome,
                    Outcome::Success,
                    "{} fails at size {n}",
                    prog.id
                );
                for metric in HEAD_METRICS {
                    let expected = prog
                        .costs
                        .cost(&metric)
                        .eval(&prog.size_args(n))
                        .unwrap()
                        .to_u64()
                        .unwrap();
                    let observed = report.counts.get(&metric).copied().unwrap_or(0);
                    assert_eq!(
                        expected, observed,
                        "{} at size {n} disagrees on {metric}",
                        prog.id
                    );
                }
            }
        }
    }

    #[test]
    fn cost_rows_scale_linearly_for_the_walk_program() {
        let suite = builtin_calibration_suite().unwrap();
        let walk = suite.iter().find(|p| p.id == "walk").unwrap();
        let model = CostModel::full();
        let r10 = cost_row(walk, &model, 10).unwrap();
        // step = n+1, nargs = n+1, giunif = 3n+1 (each cons cell is three
        // term nodes), rest zero.
        assert_eq!(r10, vec![11.0, 11.0, 31.0, 0.0, 0.0, 0.0]);
    }
}
