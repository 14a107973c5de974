//! Semantic validation beyond what the parser can see.

use crate::lang::builtins;
use crate::lang::program::{Diagnostic, Measure, Mode, PredDef, Program};
use crate::lang::term::{PredSig, Term};
use std::collections::HashSet;

/// Checks declaration completeness, callee resolution, and assertion
/// expressions. Errors in the result make the program unusable for analysis;
/// warnings do not.
pub fn validate_program(p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let reachable = reachable_preds(p);

    for (idx, pred) in p.preds.iter().enumerate() {
        let is_reachable = reachable.contains(&idx);
        if is_reachable {
            if pred.decl.modes.is_none() {
                diags.push(Diagnostic::error(
                    pred.pos,
                    format!("{} is reachable from an entry point but has no mode declaration", pred.sig),
                ));
            }
            if pred.decl.measures.is_none() {
                diags.push(Diagnostic::error(
                    pred.pos,
                    format!("{} is reachable from an entry point but has no measure declaration", pred.sig),
                ));
            }
        }
        if pred.clauses.is_empty() && !pred.decl.is_trusted() {
            let d = if is_reachable {
                Diagnostic::error(
                    pred.pos,
                    format!("{} has no clauses and no trust_cost", pred.sig),
                )
            } else {
                Diagnostic::warning(
                    pred.pos,
                    format!("{} is declared but never defined", pred.sig),
                )
            };
            diags.push(d);
        }

        // Callees must resolve to a definition, a trusted declaration, or a
        // builtin.
        for clause in &pred.clauses {
            for lit in &clause.body {
                let Some(sig) = PredSig::of(lit) else {
                    diags.push(Diagnostic::error(clause.pos, "body literal is not callable"));
                    continue;
                };
                if builtins::builtin_kind(&sig).is_some() {
                    continue;
                }
                if builtins::is_arith_op(&sig) {
                    diags.push(Diagnostic::error(
                        clause.pos,
                        format!("arithmetic operator {sig} used as a goal; wrap it in is/2"),
                    ));
                    continue;
                }
                match p.lookup(&sig) {
                    Some(callee) if !callee.clauses.is_empty() || callee.decl.is_trusted() => {}
                    _ => diags.push(Diagnostic::error(
                        clause.pos,
                        format!("call to {sig} which is neither defined nor trusted"),
                    )),
                }
            }
        }

        check_decl_exprs(pred, &mut diags);
        check_size_asserts(pred, &mut diags);
    }

    diags
}

fn reachable_preds(p: &Program) -> HashSet<usize> {
    let mut seen: HashSet<usize> = HashSet::new();
    let mut stack: Vec<usize> = p.entries.clone();
    while let Some(i) = stack.pop() {
        if !seen.insert(i) {
            continue;
        }
        for sig in p.callees(&p.preds[i]) {
            if let Some(j) = p.lookup_idx(&sig) {
                stack.push(j);
            }
        }
    }
    seen
}

/// Positions usable as size variables: input mode and a non-void measure.
fn sized_inputs(pred: &PredDef) -> Vec<usize> {
    let modes = pred.modes();
    let measures = pred.measures();
    (0..pred.sig.arity)
        .filter(|&i| {
            modes.get(i) == Some(&Mode::In)
                && measures.get(i).is_some_and(|m| *m != Measure::Void)
        })
        .collect()
}

/// Every atom of the form n<k> in a declaration expression must name a sized
/// input position of the predicate.
fn check_size_vars(pred: &PredDef, expr: &Term, what: &str, diags: &mut Vec<Diagnostic>) {
    let allowed = sized_inputs(pred);
    expr.visit(&mut |t| {
        if let Term::Atom(a) = t {
            if let Some(k) = parse_size_var(a.as_str()) {
                if !allowed.contains(&k) {
                    diags.push(Diagnostic::error(
                        pred.decl.pos.or(Some(pred.pos)),
                        format!(
                            "{what} for {} references n{} which is not a sized input argument",
                            pred.sig,
                            k + 1
                        ),
                    ));
                }
            } else {
                diags.push(Diagnostic::error(
                    pred.decl.pos.or(Some(pred.pos)),
                    format!("{what} for {} contains unknown name `{a}`", pred.sig),
                ));
            }
        }
        if let Term::Var(_) = t {
            diags.push(Diagnostic::error(
                pred.decl.pos.or(Some(pred.pos)),
                format!("{what} for {} must use n1..nk, not logic variables", pred.sig),
            ));
        }
    });
}

/// "n3" -> position 2.
pub fn parse_size_var(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('n')?;
    if rest.is_empty() || rest.starts_with('0') {
        return None;
    }
    rest.parse::<usize>().ok().map(|k| k - 1)
}

fn check_decl_exprs(pred: &PredDef, diags: &mut Vec<Diagnostic>) {
    if let Some(sols) = &pred.decl.sols {
        check_size_vars(pred, sols, "sols expression", diags);
    }
    for (metric, expr) in &pred.decl.trust {
        check_size_vars(pred, expr, &format!("trust_cost({metric}) expression"), diags);
    }
}

fn check_size_asserts(pred: &PredDef, diags: &mut Vec<Diagnostic>) {
    for sa in &pred.size_asserts {
        let lit = &pred.clauses[sa.clause].body[sa.lit];
        let arity = PredSig::of(lit).map_or(0, |s| s.arity);
        if sa.arg >= arity {
            diags.push(Diagnostic::error(
                sa.pos,
                format!(
                    "size assertion for {} clause {} names argument {} of a literal with arity {arity}",
                    pred.sig,
                    sa.clause + 1,
                    sa.arg + 1
                ),
            ));
        }
        check_size_vars(pred, &sa.expr, "size assertion", diags);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_program;
    use crate::lang::program::has_errors;

    #[test]
    fn undefined_callee_is_an_error() {
        let p = parse_program(":- mode(p/1,[in]).\n:- measure(p/1,[int]).\np(X) :- ghost(X).")
            .unwrap();
        let diags = validate_program(&p);
        assert!(has_errors(&diags));
        assert!(diags.iter().any(|d| d.message.contains("ghost/1")));
    }

    #[test]
    fn trusted_callee_is_fine() {
        let src = "\
:- mode(p/1,[in]).
:- measure(p/1,[int]).
:- mode(q/1,[in]).
:- measure(q/1,[int]).
:- trust_cost(q/1, step, n1+1).
p(X) :- q(X).
";
        let p = parse_program(src).unwrap();
        assert!(!has_errors(&validate_program(&p)));
    }

    #[test]
    fn missing_measures_on_reachable_pred() {
        let p = parse_program(":- mode(p/1,[in]).\np(a).").unwrap();
        let diags = validate_program(&p);
        assert!(diags.iter().any(|d| d.message.contains("measure")));
    }

    #[test]
    fn sols_size_vars_must_be_sized_inputs() {
        let src = "\
:- mode(p/2,[in,out]).
:- measure(p/2,[length,length]).
:- sols(p/2, n2).
p([], []).
";
        let p = parse_program(src).unwrap();
        let diags = validate_program(&p);
        assert!(diags.iter().any(|d| d.message.contains("n2")));
    }
}
