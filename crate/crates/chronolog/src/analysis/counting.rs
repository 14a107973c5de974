//! Per-clause static metric counts.
//!
//! A clause contributes fixed amounts to each metric every time it is
//! selected: one step, one head-size worth of argument passing, the
//! unification effort implied by the head patterns, and one call per
//! builtin in the body plus the operators those builtins evaluate.

use std::collections::BTreeMap;

use crate::analysis::evcost::count_arith_ops;
use crate::lang::builtins::{builtin_kind, BuiltinKind};
use crate::lang::program::Mode;
use crate::lang::term::{PredSig, Term};
use crate::metric::Metric;

pub type Counts = BTreeMap<Metric, u64>;

fn bump(c: &mut Counts, m: Metric, by: u64) {
    if by > 0 {
        *c.entry(m).or_insert(0) += by;
    }
}

/// Metric contributions of selecting a clause with this head. Variable head
/// arguments bind in one operation; non-variable arguments cost one
/// operation per symbol they contain.
pub fn head_metrics(head: &Term, modes: &[Mode]) -> Counts {
    let mut c = Counts::new();
    bump(&mut c, Metric::Step, 1);
    let args: &[Term] = match head {
        Term::Comp(_, args) => args,
        _ => &[],
    };
    bump(&mut c, Metric::Nargs, args.len() as u64);
    for (arg, mode) in args.iter().zip(modes) {
        match (arg.is_var(), mode) {
            (true, Mode::In) => bump(&mut c, Metric::Viunif, 1),
            (true, Mode::Out) => bump(&mut c, Metric::Vounif, 1),
            (false, Mode::In) => bump(&mut c, Metric::Giunif, arg.symbol_count()),
            (false, Mode::Out) => bump(&mut c, Metric::Gounif, arg.symbol_count()),
        }
    }
    c
}

/// Call-metric contributions of the builtins in a clause body. User-defined
/// literals contribute nothing here; their cost enters through the call
/// structure.
pub fn body_metrics(body: &[Term]) -> Result<Counts, String> {
    let mut c = Counts::new();
    for lit in body {
        let sig = match PredSig::of(lit) {
            Some(s) => s,
            None => continue,
        };
        match builtin_kind(&sig) {
            Some(BuiltinKind::Is) => {
                bump(&mut c, Metric::Call(sig), 1);
                if let Term::Comp(_, args) = lit {
                    add_op_counts(&args[1], &mut c)?;
                }
            }
            Some(BuiltinKind::Cmp(_)) => {
                bump(&mut c, Metric::Call(sig), 1);
                if let Term::Comp(_, args) = lit {
                    add_op_counts(&args[0], &mut c)?;
                    add_op_counts(&args[1], &mut c)?;
                }
            }
            Some(BuiltinKind::True) | None => {}
        }
    }
    Ok(c)
}

fn add_op_counts(expr: &Term, c: &mut Counts) -> Result<(), String> {
    let mut ops = BTreeMap::new();
    count_arith_ops(expr, &mut ops)?;
    for (sig, n) in ops {
        bump(c, Metric::Call(sig), n);
    }
    Ok(())
}

/// Static counts for a whole clause: head metrics plus body builtins.
pub fn clause_metrics(head: &Term, body: &[Term], modes: &[Mode]) -> Result<Counts, String> {
    let mut c = head_metrics(head, modes);
    for (m, n) in body_metrics(body)? {
        bump(&mut c, m, n);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clause(src: &str) -> (Term, Vec<Term>) {
        let program = crate::lang::parse_program(&format!(
            ":- mode(q/1, [in]).\n:- measure(q/1, [int]).\n{}",
            src
        ))
        .unwrap();
        let def = program
            .preds
            .iter()
            .find(|p| !p.clauses.is_empty())
            .unwrap();
        let cl = &def.clauses[0];
        (cl.head.clone(), cl.body.clone())
    }

    fn get(c: &Counts, m: Metric) -> u64 {
        c.get(&m).copied().unwrap_or(0)
    }

    #[test]
    fn list_base_clause() {
        let (head, _) = clause("app([], L, L).");
        let modes = [Mode::In, Mode::In, Mode::Out];
        let c = head_metrics(&head, &modes);
        assert_eq!(get(&c, Metric::Step), 1);
        assert_eq!(get(&c, Metric::Nargs), 3);
        assert_eq!(get(&c, Metric::Giunif), 1);
        assert_eq!(get(&c, Metric::Viunif), 1);
        assert_eq!(get(&c, Metric::Vounif), 1);
        assert_eq!(get(&c, Metric::Gounif), 0);
    }

    #[test]
    fn list_recursive_clause() {
        let (head, _) = clause("app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).");
        let modes = [Mode::In, Mode::In, Mode::Out];
        let c = head_metrics(&head, &modes);
        assert_eq!(get(&c, Metric::Step), 1);
        assert_eq!(get(&c, Metric::Nargs), 3);
        assert_eq!(get(&c, Metric::Giunif), 3);
        assert_eq!(get(&c, Metric::Viunif), 1);
        assert_eq!(get(&c, Metric::Gounif), 3);
        assert_eq!(get(&c, Metric::Vounif), 0);
    }

    #[test]
    fn body_builtin_counts() {
        let (_, body) = clause("q(N) :- N > 1, N1 is N - 1, M is N1 * N1 + 2, q(M).");
        let c = body_metrics(&body).unwrap();
        assert_eq!(get(&c, Metric::Call(PredSig::new("is", 2))), 2);
        assert_eq!(get(&c, Metric::Call(PredSig::new(">", 2))), 1);
        assert_eq!(get(&c, Metric::Call(PredSig::new("-", 2))), 1);
        assert_eq!(get(&c, Metric::Call(PredSig::new("*", 2))), 1);
        assert_eq!(get(&c, Metric::Call(PredSig::new("+", 2))), 1);
    }

    #[test]
    fn true_costs_nothing() {
        let (_, body) = clause("q(N) :- true.");
        assert!(body_metrics(&body).unwrap().is_empty());
    }

    #[test]
    fn comparison_evaluates_both_sides() {
        let (_, body) = clause("q(N) :- N + 1 =< N * 2.");
        let c = body_metrics(&body).unwrap();
        assert_eq!(get(&c, Metric::Call(PredSig::new("=<", 2))), 1);
        assert_eq!(get(&c, Metric::Call(PredSig::new("+", 2))), 1);
        assert_eq!(get(&c, Metric::Call(PredSig::new("*", 2))), 1);
    }
}
