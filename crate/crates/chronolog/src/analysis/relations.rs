//! Callee argument sizes as expressions over the caller's input sizes.
//!
//! For every user-predicate literal in a clause body, each sized callee
//! argument gets a size expression, resolved in this order: an explicit
//! size assertion, a statically measurable term, a variable traced back
//! to a head input pattern, or an arithmetic chain of `is` bindings for
//! integer measures. Anything else stays unknown and is reported; the
//! analysis fails later only if the unknown size is actually needed.

use std::collections::HashMap;

use crate::analysis::size::{static_measure, SizeExpr};
use crate::lang::builtins::{builtin_kind, BuiltinKind};
use crate::lang::program::{Clause, Measure, Mode, PredDef, Program, SizeAssert};
use crate::lang::term::{PredSig, Term, LIST_CONS};

/// Size expressions for one body literal's arguments, indexed by callee
/// argument position. `None` marks arguments with no tracked size and
/// arguments whose size could not be expressed.
#[derive(Debug, Clone)]
pub struct LitSizes {
    pub sig: PredSig,
    pub args: Vec<Option<SizeExpr>>,
}

/// Per-literal size relations for one clause. Builtin literals get `None`;
/// indices align with the clause body.
#[derive(Debug, Clone, Default)]
pub struct ClauseRelations {
    pub lits: Vec<Option<LitSizes>>,
    /// Human-readable notes about sizes that could not be expressed:
    /// (literal index, callee argument index, reason).
    pub unresolved: Vec<(usize, usize, String)>,
}

/// Where a variable sits in a head input pattern.
struct HeadOccurrence {
    pos: usize,
    measure: Measure,
    /// Number of list cells above the variable along the spine, for
    /// length measures; 0 when the variable is the whole argument.
    spine_depth: i64,
    /// Direct child of the argument root, with the combined size of its
    /// siblings, for size measures.
    sibling_size: Option<i64>,
}

pub fn size_relations(program: &Program, def: &PredDef, clause_idx: usize) -> ClauseRelations {
    let clause = &def.clauses[clause_idx];
    let modes = def.modes();
    let measures = def.measures();

    let occurrences = head_occurrences(clause, modes, measures);
    let int_env = int_bindings(clause, &occurrences);

    let mut out = ClauseRelations::default();
    for (lit_idx, lit) in clause.body.iter().enumerate() {
        let sig = match PredSig::of(lit) {
            Some(s) => s,
            None => {
                out.lits.push(None);
                continue;
            }
        };
        if builtin_kind(&sig).is_some() {
            out.lits.push(None);
            continue;
        }
        let callee = program.lookup(&sig);
        let (callee_modes, callee_measures) = match callee {
            Some(cd) if !cd.modes().is_empty() && !cd.measures().is_empty() => {
                (cd.modes(), cd.measures())
            }
            _ => {
                out.lits.push(Some(LitSizes {
                    sig: sig.clone(),
                    args: vec![None; sig.arity],
                }));
                continue;
            }
        };

        let args: &[Term] = match lit {
            Term::Comp(_, a) => a,
            _ => &[],
        };
        let mut sizes = Vec::with_capacity(sig.arity);
        for (k, arg) in args.iter().enumerate() {
            if callee_modes.get(k) != Some(&Mode::In)
                || callee_measures.get(k) == Some(&Measure::Void)
            {
                sizes.push(None);
                continue;
            }
            let m = callee_measures[k];
            if let Some(e) = asserted(&def.size_asserts, clause_idx, lit_idx, k) {
                match SizeExpr::from_term(e) {
                    Ok(se) => sizes.push(Some(se)),
                    Err(why) => {
                        out.unresolved.push((lit_idx, k, why));
                        sizes.push(None);
                    }
                }
                continue;
            }
            match infer(arg, m, &occurrences, &int_env, lit_idx) {
                Some(se) => sizes.push(Some(se)),
                None => {
                    out.unresolved.push((
                        lit_idx,
                        k,
                        format!("cannot express the {} of `{}`", m, crate::lang::term_to_string(arg)),
                    ));
                    sizes.push(None);
                }
            }
        }
        out.lits.push(Some(LitSizes { sig, args: sizes }));
    }
    out
}

fn asserted<'a>(
    asserts: &'a [SizeAssert],
    clause: usize,
    lit: usize,
    arg: usize,
) -> Option<&'a Term> {
    asserts
        .iter()
        .find(|a| a.clause == clause && a.lit == lit && a.arg == arg)
        .map(|a| &a.expr)
}

fn head_occurrences(
    clause: &Clause,
    modes: &[Mode],
    measures: &[Measure],
) -> HashMap<usize, Vec<HeadOccurrence>> {
    let mut map: HashMap<usize, Vec<HeadOccurrence>> = HashMap::new();
    let head_args: &[Term] = match &clause.head {
        Term::Comp(_, a) => a,
        _ => &[],
    };
    for (pos, pat) in head_args.iter().enumerate() {
        if modes.get(pos) != Some(&Mode::In) {
            continue;
        }
        let m = match measures.get(pos) {
            Some(Measure::Void) | None => continue,
            Some(m) => *m,
        };
        match m {
            Measure::Length | Measure::Int => {
                // Walk the spine; a variable at depth d has length n - d.
                // Depth 0 is the bare-variable case and covers Int too.
                let mut depth = 0i64;
                let mut t = pat;
                loop {
                    match t {
                        Term::Var(v) => {
                            map.entry(v.id).or_default().push(HeadOccurrence {
                                pos,
                                measure: m,
                                spine_depth: depth,
                                sibling_size: None,
                            });
                            break;
                        }
                        Term::Comp(f, args)
                            if m == Measure::Length
                                && f.as_str() == LIST_CONS
                                && args.len() == 2 =>
                        {
                            depth += 1;
                            t = &args[1];
                        }
                        _ => break,
                    }
                }
            }
            Measure::Size | Measure::Depth => {
                match pat {
                    Term::Var(v) => {
                        map.entry(v.id).or_default().push(HeadOccurrence {
                            pos,
                            measure: m,
                            spine_depth: 0,
                            sibling_size: None,
                        });
                    }
                    Term::Comp(_, args) => {
                        // For size measures a direct child is the whole
                        // minus the root and its statically sized siblings.
                        for (i, child) in args.iter().enumerate() {
                            let Term::Var(v) = child else { continue };
                            let siblings: Option<i64> = args
                                .iter()
                                .enumerate()
                                .filter(|(j, _)| *j != i)
                                .map(|(_, s)| static_measure(s, Measure::Size))
                                .sum();
                            map.entry(v.id).or_default().push(HeadOccurrence {
                                pos,
                                measure: m,
                                spine_depth: 1,
                                sibling_size: siblings,
                            });
                        }
                    }
                    _ => {}
                }
            }
            Measure::Void => {}
        }
    }
    map
}

/// Integer expressions bound by `is` literals, in terms of head sizes.
/// The map key is the variable id; the value carries the literal index
/// after which the binding exists.
fn int_bindings(
    clause: &Clause,
    occurrences: &HashMap<usize, Vec<HeadOccurrence>>,
) -> HashMap<usize, (usize, SizeExpr)> {
    let mut env: HashMap<usize, (usize, SizeExpr)> = HashMap::new();
    for (lit_idx, lit) in clause.body.iter().enumerate() {
        let sig = match PredSig::of(lit) {
            Some(s) => s,
            None => continue,
        };
        if builtin_kind(&sig) != Some(BuiltinKind::Is) {
            continue;
        }
        let Term::Comp(_, args) = lit else { continue };
        let Term::Var(lhs) = &args[0] else { continue };
        if let Some(se) = resolve_int(&args[1], occurrences, &env) {
            env.insert(lhs.id, (lit_idx, se));
        }
    }
    env
}

fn resolve_int(
    t: &Term,
    occurrences: &HashMap<usize, Vec<HeadOccurrence>>,
    env: &HashMap<usize, (usize, SizeExpr)>,
) -> Option<SizeExpr> {
    match t {
        Term::Int(i) => Some(SizeExpr::Const(*i)),
        Term::Var(v) => {
            if let Some(o) = occurrences.get(&v.id).and_then(|os| {
                os.iter()
                    .find(|o| o.measure == Measure::Int && o.spine_depth == 0)
            }) {
                return Some(SizeExpr::Var(o.pos));
            }
            env.get(&v.id).map(|(_, se)| se.clone())
        }
        Term::Comp(f, args) if args.len() == 2 => {
            let a = Box::new(resolve_int(&args[0], occurrences, env)?);
            let b = Box::new(resolve_int(&args[1], occurrences, env)?);
            match f.as_str() {
                "+" => Some(SizeExpr::Add(a, b)),
                "-" => Some(SizeExpr::Sub(a, b)),
                "*" => Some(SizeExpr::Mul(a, b)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn infer(
    arg: &Term,
    m: Measure,
    occurrences: &HashMap<usize, Vec<HeadOccurrence>>,
    int_env: &HashMap<usize, (usize, SizeExpr)>,
    lit_idx: usize,
) -> Option<SizeExpr> {
    if let Some(c) = static_measure(arg, m) {
        return Some(SizeExpr::Const(c));
    }
    match arg {
        Term::Var(v) => {
            if let Some(os) = occurrences.get(&v.id) {
                for o in os {
                    if o.measure != m {
                        continue;
                    }
                    let base = Box::new(SizeExpr::Var(o.pos));
                    return Some(match (m, o.spine_depth) {
                        (_, 0) => SizeExpr::Var(o.pos),
                        (Measure::Length, d) => {
                            SizeExpr::Sub(base, Box::new(SizeExpr::Const(d)))
                        }
                        (Measure::Size, _) => {
                            let below = 1 + o.sibling_size?;
                            SizeExpr::Sub(base, Box::new(SizeExpr::Const(below)))
                        }
                        (Measure::Depth, _) => {
                            SizeExpr::Sub(base, Box::new(SizeExpr::Const(1)))
                        }
                        _ => return None,
                    });
                }
            }
            if m == Measure::Int {
                if let Some((bound_at, se)) = int_env.get(&v.id) {
                    if *bound_at < lit_idx {
                        return Some(se.clone());
                    }
                }
            }
            None
        }
        Term::Comp(f, args)
            if m == Measure::Length && f.as_str() == LIST_CONS && args.len() == 2 =>
        {
            // A partial list [X1, ..., Xd | T]: length of T plus d.
            let (cells, end) = arg.spine();
            let tail = infer(end, Measure::Length, occurrences, int_env, lit_idx)?;
            Some(SizeExpr::Add(
                Box::new(tail),
                Box::new(SizeExpr::Const(cells as i64)),
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relations_for(src: &str, pred: &str, arity: usize, clause: usize) -> ClauseRelations {
        let program = crate::lang::parse_program(src).unwrap();
        let diags = crate::lang::validate_program(&program);
        assert!(
            !diags.iter().any(|d| d.is_error()),
            "unexpected validation errors: {:?}",
            diags
        );
        let def = program.lookup(&PredSig::new(pred, arity)).unwrap();
        size_relations(&program, def, clause)
    }

    const APP: &str = "
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(app/3).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

    #[test]
    fn spine_tail_maps_to_decrement() {
        let r = relations_for(APP, "app", 3, 1);
        let call = r.lits[0].as_ref().unwrap();
        assert_eq!(call.args[0].as_ref().unwrap().to_string(), "n1 - 1");
        assert_eq!(call.args[1].as_ref().unwrap().to_string(), "n2");
        assert!(call.args[2].is_none());
        assert!(r.unresolved.is_empty());
    }

    #[test]
    fn integer_chains_through_is() {
        let src = "
:- mode(h/1, [in]).
:- measure(h/1, [int]).
:- entry(h/1).
h(1).
h(N) :- N > 1, N1 is N - 1, h(N1), h(N1).
";
        let r = relations_for(src, "h", 1, 1);
        assert!(r.lits[0].is_none());
        assert!(r.lits[1].is_none());
        for lit in [2, 3] {
            let call = r.lits[lit].as_ref().unwrap();
            assert_eq!(call.args[0].as_ref().unwrap().to_string(), "n1 - 1");
        }
    }

    #[test]
    fn assertions_override_inference() {
        let src = "
:- mode(rev/2, [in, out]).
:- measure(rev/2, [length, void]).
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(rev/2).
:- size(rev/2, 2, 2, 1, n1 - 1).
rev([], []).
rev([X|Xs], R) :- rev(Xs, R1), app(R1, [X], R).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";
        let r = relations_for(src, "rev", 2, 1);
        let app_call = r.lits[1].as_ref().unwrap();
        assert_eq!(app_call.args[0].as_ref().unwrap().to_string(), "n1 - 1");
        assert_eq!(app_call.args[1].as_ref().unwrap().to_string(), "1");
        assert!(r.unresolved.is_empty());
    }

    #[test]
    fn unknown_sizes_are_reported_not_fatal() {
        let src = "
:- mode(p/1, [in]).
:- measure(p/1, [length]).
:- mode(q/1, [in]).
:- measure(q/1, [length]).
:- entry(p/1).
p(Xs) :- mystery(Xs, Ys), q(Ys).
q([]).
q([_|Xs]) :- q(Xs).
:- mode(mystery/2, [in, out]).
:- measure(mystery/2, [length, void]).
:- trust_cost(mystery/2, step, 1).
";
        let r = relations_for(src, "p", 1, 0);
        let q_call = r.lits[1].as_ref().unwrap();
        assert!(q_call.args[0].is_none());
        assert_eq!(r.unresolved.len(), 1);
        assert_eq!(r.unresolved[0].0, 1);
    }

    #[test]
    fn partial_list_argument_adds_cells() {
        let src = "
:- mode(p/1, [in]).
:- measure(p/1, [length]).
:- mode(q/1, [in]).
:- measure(q/1, [length]).
:- entry(p/1).
p([X|Xs]) :- q([X, X | Xs]).
q([]).
q([_|Xs]) :- q(Xs).
";
        let r = relations_for(src, "p", 1, 0);
        let q_call = r.lits[0].as_ref().unwrap();
        assert_eq!(q_call.args[0].as_ref().unwrap().to_string(), "n1 - 1 + 2");
    }
}
