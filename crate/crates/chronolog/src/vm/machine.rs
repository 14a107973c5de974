//! A committed-choice resolution interpreter.
//!
//! Clauses are tried in source order; a clause is selected when its head
//! unifies with the call and its leading comparison literals all hold.
//! Selection is final: a later failure fails the whole goal rather than
//! reconsidering the choice. Failed selection attempts are rolled back and
//! contribute nothing to the event tallies; a committed clause contributes
//! its head metrics, its guard comparisons, and whatever its body executes.
//!
//! Runtime terms share structure with the compiled program: a bound value
//! is a (term, frame base) pair, so resolution allocates frames and trail
//! entries but never copies terms.

use std::collections::HashMap;

use crate::analysis::counting::{head_metrics, Counts};
use crate::lang::builtins::{builtin_kind, is_arith_op, BuiltinKind, CmpOp};
use crate::lang::program::{Mode, Program};
use crate::lang::term::{PredSig, Term, Var};
use crate::metric::Metric;

/// Dynamic event tallies, keyed like the static cost functions.
pub type EventCounts = Counts;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("call to undefined predicate {0}")]
    UnknownPredicate(PredSig),
    #[error("body literal `{0}` is not callable")]
    NotCallable(String),
    #[error("arithmetic on an unbound variable")]
    UnboundArith,
    #[error("arithmetic error: {0}")]
    BadArith(String),
    #[error("zero divisor")]
    ZeroDivide,
    #[error("integer overflow in arithmetic")]
    Overflow,
    #[error("depth limit exceeded while calling {pred}")]
    DepthLimit { pred: PredSig },
    #[error("argument {arg} of {pred} is declared input but is unbound")]
    ModeViolation { pred: PredSig, arg: usize },
}

/// Receives runtime events. The `ENABLED` flag lets the timed path compile
/// to an engine with no counting code at all.
pub trait EventSink {
    const ENABLED: bool;
    fn add(&mut self, m: Metric, n: u64);
    fn add_counts(&mut self, c: &Counts);
}

/// Tallies every event.
#[derive(Default, Debug)]
pub struct CountingSink {
    pub counts: EventCounts,
}

impl EventSink for CountingSink {
    const ENABLED: bool = true;

    fn add(&mut self, m: Metric, n: u64) {
        *self.counts.entry(m).or_insert(0) += n;
    }

    fn add_counts(&mut self, c: &Counts) {
        for (m, n) in c {
            *self.counts.entry(m.clone()).or_insert(0) += n;
        }
    }
}

/// Discards every event; used by the timed execution path.
#[derive(Default, Debug)]
pub struct NullSink;

impl EventSink for NullSink {
    const ENABLED: bool = false;

    fn add(&mut self, _: Metric, _: u64) {}

    fn add_counts(&mut self, _: &Counts) {}
}

#[derive(Debug, Clone)]
struct CompiledClause {
    /// Head with variables renumbered to 0..nvars.
    head: Term,
    body: Vec<Term>,
    nvars: usize,
    /// Leading comparison literals; these act as the selection guard.
    guard_len: usize,
    /// Static head metrics of selecting this clause.
    head_counts: Counts,
}

#[derive(Debug, Clone)]
struct CompiledPred {
    modes: Vec<Mode>,
    clauses: Vec<CompiledClause>,
}

/// An executable program: per-predicate clause lists with clause-local
/// variable numbering and precomputed selection metrics.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    preds: HashMap<PredSig, CompiledPred>,
}

impl CompiledProgram {
    pub fn compile(p: &Program) -> CompiledProgram {
        let mut preds = HashMap::new();
        for def in &p.preds {
            if def.clauses.is_empty() {
                continue;
            }
            let modes = def.modes().to_vec();
            let mut clauses = Vec::with_capacity(def.clauses.len());
            for clause in &def.clauses {
                let mut map = HashMap::new();
                let head = renumber(&clause.head, &mut map);
                let body: Vec<Term> = clause.body.iter().map(|l| renumber(l, &mut map)).collect();
                let guard_len = body
                    .iter()
                    .take_while(|l| {
                        PredSig::of(l)
                            .and_then(|s| builtin_kind(&s))
                            .is_some_and(|k| matches!(k, BuiltinKind::Cmp(_)))
                    })
                    .count();
                let head_counts = head_metrics(&head, &modes);
                clauses.push(CompiledClause {
                    head,
                    body,
                    nvars: map.len(),
                    guard_len,
                    head_counts,
                });
            }
            preds.insert(def.sig.clone(), CompiledPred { modes, clauses });
        }
        CompiledProgram { preds }
    }
}

/// A goal conjunction with variables renumbered to 0..nvars. The renumbered
/// ids double as store slots, so bindings can be read back by name.
#[derive(Debug, Clone)]
pub struct CompiledGoal {
    pub lits: Vec<Term>,
    pub nvars: usize,
    /// (slot, display name) for each named goal variable, in first-occurrence
    /// order. Underscore-prefixed names are omitted.
    pub named_vars: Vec<(usize, String)>,
}

pub fn compile_goal(lits: &[Term]) -> CompiledGoal {
    let mut map = HashMap::new();
    let mut named = Vec::new();
    let out: Vec<Term> = lits
        .iter()
        .map(|l| {
            let before = map.len();
            let t = renumber_collect(l, &mut map, &mut named, before);
            t
        })
        .collect();
    CompiledGoal {
        lits: out,
        nvars: map.len(),
        named_vars: named,
    }
}

fn renumber(t: &Term, map: &mut HashMap<usize, usize>) -> Term {
    match t {
        Term::Var(v) => {
            let next = map.len();
            let id = *map.entry(v.id).or_insert(next);
            Term::Var(Var::new(id, &v.name))
        }
        Term::Comp(f, args) => Term::Comp(
            f.clone(),
            args.iter().map(|a| renumber(a, map)).collect(),
        ),
        other => other.clone(),
    }
}

fn renumber_collect(
    t: &Term,
    map: &mut HashMap<usize, usize>,
    named: &mut Vec<(usize, String)>,
    _before: usize,
) -> Term {
    match t {
        Term::Var(v) => {
            let next = map.len();
            let fresh = !map.contains_key(&v.id);
            let id = *map.entry(v.id).or_insert(next);
            if fresh && !v.name.starts_with('_') {
                named.push((id, v.name.to_string()));
            }
            Term::Var(Var::new(id, &v.name))
        }
        Term::Comp(f, args) => Term::Comp(
            f.clone(),
            args.iter()
                .map(|a| renumber_collect(a, map, named, _before))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// A store cell value. `Share` points into compiled program or goal
/// structure; numbers computed by `is/2` are stored directly.
#[derive(Clone, Copy, Debug)]
enum Slot<'a> {
    Link(usize),
    Share(&'a Term, usize),
    Int(i64),
    Float(f64),
}

/// A dereferenced runtime value. `T` never holds a number or a variable.
#[derive(Clone, Copy, Debug)]
enum V<'a> {
    Free(usize),
    Int(i64),
    Float(f64),
    T(&'a Term, usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Num {
    Int(i64),
    Float(f64),
}

impl Num {
    fn as_f64(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Float(f) => f,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Maximum user-predicate call nesting.
    pub max_depth: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_depth: 4096 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Success,
    Failure,
}

pub struct Machine<'a, S: EventSink> {
    prog: &'a CompiledProgram,
    store: Vec<Option<Slot<'a>>>,
    trail: Vec<usize>,
    pub sink: S,
    opts: SolveOptions,
}

impl<'a, S: EventSink> Machine<'a, S> {
    pub fn new(prog: &'a CompiledProgram, sink: S, opts: SolveOptions) -> Self {
        Machine {
            prog,
            store: Vec::new(),
            trail: Vec::new(),
            sink,
            opts,
        }
    }

    /// Runs a goal from a clean store. Bindings stay readable until the
    /// next `run` or `reset`.
    pub fn run(&mut self, goal: &'a CompiledGoal) -> Result<Outcome, RunError> {
        self.reset();
        self.store.resize(goal.nvars, None);
        for lit in &goal.lits {
            match self.solve_lit(lit, 0, 0)? {
                true => {}
                false => return Ok(Outcome::Failure),
            }
        }
        Ok(Outcome::Success)
    }

    pub fn reset(&mut self) {
        self.store.clear();
        self.trail.clear();
    }

    /// The binding of a goal variable by store slot, as a plain term.
    /// Unbound cells read back as fresh variables.
    pub fn binding(&self, slot: usize) -> Term {
        self.reify_view(self.slot_view(slot))
    }

    fn solve_lit(&mut self, lit: &'a Term, base: usize, depth: usize) -> Result<bool, RunError> {
        let sig = PredSig::of(lit)
            .ok_or_else(|| RunError::NotCallable(crate::lang::term_to_string(lit)))?;
        match builtin_kind(&sig) {
            Some(BuiltinKind::True) => Ok(true),
            Some(BuiltinKind::Is) => {
                let Term::Comp(_, args) = lit else { unreachable!("is/2 is compound") };
                let n = self.eval_arith(&args[1], base)?;
                if S::ENABLED {
                    self.sink.add(Metric::Call(sig), 1);
                    self.count_ops(&args[1], base);
                }
                Ok(self.unify_num(&args[0], base, n))
            }
            Some(BuiltinKind::Cmp(op)) => {
                let Term::Comp(_, args) = lit else { unreachable!("comparisons are compound") };
                let holds = self.do_cmp(op, &args[0], &args[1], base)?;
                if S::ENABLED {
                    self.sink.add(Metric::Call(sig), 1);
                    self.count_ops(&args[0], base);
                    self.count_ops(&args[1], base);
                }
                Ok(holds)
            }
            None => self.call_user(sig, lit, base, depth),
        }
    }

    fn call_user(
        &mut self,
        sig: PredSig,
        lit: &'a Term,
        base: usize,
        depth: usize,
    ) -> Result<bool, RunError> {
        if depth >= self.opts.max_depth {
            return Err(RunError::DepthLimit { pred: sig });
        }
        let prog = self.prog;
        let pred = prog
            .preds
            .get(&sig)
            .ok_or_else(|| RunError::UnknownPredicate(sig.clone()))?;
        let goal_args: &'a [Term] = match lit {
            Term::Comp(_, a) => a,
            _ => &[],
        };
        for (k, m) in pred.modes.iter().enumerate() {
            if *m == Mode::In {
                if let V::Free(_) = self.deref(&goal_args[k], base) {
                    return Err(RunError::ModeViolation {
                        pred: sig.clone(),
                        arg: k + 1,
                    });
                }
            }
        }

        'clauses: for clause in &pred.clauses {
            let mark = self.trail.len();
            let fbase = self.store.len();
            self.store.resize(fbase + clause.nvars, None);

            let head_args: &'a [Term] = match &clause.head {
                Term::Comp(_, a) => a,
                _ => &[],
            };
            let mut matched = true;
            for (g, h) in goal_args.iter().zip(head_args) {
                if !self.unify(g, base, h, fbase) {
                    matched = false;
                    break;
                }
            }
            if matched {
                for glit in &clause.body[..clause.guard_len] {
                    let Term::Comp(_, cargs) = glit else { unreachable!("guards are compound") };
                    let op = match PredSig::of(glit).and_then(|s| builtin_kind(&s)) {
                        Some(BuiltinKind::Cmp(op)) => op,
                        _ => unreachable!("guard literals are comparisons"),
                    };
                    if !self.do_cmp(op, &cargs[0], &cargs[1], fbase)? {
                        self.undo_to(mark);
                        self.store.truncate(fbase);
                        continue 'clauses;
                    }
                }
                if S::ENABLED {
                    self.sink.add_counts(&clause.head_counts);
                    for glit in &clause.body[..clause.guard_len] {
                        let gsig = PredSig::of(glit).expect("guard literal has a signature");
                        self.sink.add(Metric::Call(gsig), 1);
                        if let Term::Comp(_, cargs) = glit {
                            self.count_ops(&cargs[0], fbase);
                            self.count_ops(&cargs[1], fbase);
                        }
                    }
                }
                for blit in &clause.body[clause.guard_len..] {
                    if !self.solve_lit(blit, fbase, depth + 1)? {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
            self.undo_to(mark);
            self.store.truncate(fbase);
        }
        Ok(false)
    }

    // ---- bindings ----

    fn bind(&mut self, slot: usize, val: Slot<'a>) {
        self.store[slot] = Some(val);
        self.trail.push(slot);
    }

    fn undo_to(&mut self, mark: usize) {
        for &s in &self.trail[mark..] {
            self.store[s] = None;
        }
        self.trail.truncate(mark);
    }

    fn slot_view(&self, mut slot: usize) -> V<'a> {
        loop {
            match self.store[slot] {
                None => return V::Free(slot),
                Some(Slot::Link(n)) => slot = n,
                Some(Slot::Share(t, b)) => return self.deref(t, b),
                Some(Slot::Int(i)) => return V::Int(i),
                Some(Slot::Float(f)) => return V::Float(f),
            }
        }
    }

    fn deref(&self, t: &'a Term, base: usize) -> V<'a> {
        match t {
            Term::Var(v) => self.slot_view(base + v.id),
            Term::Int(i) => V::Int(*i),
            Term::Float(f) => V::Float(*f),
            _ => V::T(t, base),
        }
    }

    fn unify(&mut self, t1: &'a Term, b1: usize, t2: &'a Term, b2: usize) -> bool {
        match (self.deref(t1, b1), self.deref(t2, b2)) {
            (V::Free(s), V::Free(t)) => {
                if s != t {
                    self.bind(s, Slot::Link(t));
                }
                true
            }
            (V::Free(s), V::Int(i)) | (V::Int(i), V::Free(s)) => {
                self.bind(s, Slot::Int(i));
                true
            }
            (V::Free(s), V::Float(f)) | (V::Float(f), V::Free(s)) => {
                self.bind(s, Slot::Float(f));
                true
            }
            (V::Free(s), V::T(t, b)) | (V::T(t, b), V::Free(s)) => {
                self.bind(s, Slot::Share(t, b));
                true
            }
            (V::Int(a), V::Int(b)) => a == b,
            (V::Float(a), V::Float(b)) => a == b,
            (V::T(x, bx), V::T(y, by)) => match (x, y) {
                (Term::Atom(a), Term::Atom(b)) => a == b,
                (Term::Comp(f, xs), Term::Comp(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(xa, ya)| self.unify(xa, bx, ya, by))
                }
                _ => false,
            },
            _ => false,
        }
    }

    fn unify_num(&mut self, t: &'a Term, base: usize, n: Num) -> bool {
        match self.deref(t, base) {
            V::Free(s) => {
                let val = match n {
                    Num::Int(i) => Slot::Int(i),
                    Num::Float(f) => Slot::Float(f),
                };
                self.bind(s, val);
                true
            }
            V::Int(i) => n == Num::Int(i),
            V::Float(f) => n == Num::Float(f),
            V::T(..) => false,
        }
    }

    fn reify_view(&self, v: V<'a>) -> Term {
        match v {
            V::Free(s) => Term::Var(Var::new(s, &format!("_G{s}"))),
            V::Int(i) => Term::Int(i),
            V::Float(f) => Term::Float(f),
            V::T(Term::Atom(a), _) => Term::Atom(a.clone()),
            V::T(Term::Comp(f, args), b) => Term::Comp(
                f.clone(),
                args.iter()
                    .map(|a| self.reify_view(self.deref(a, b)))
                    .collect(),
            ),
            V::T(..) => unreachable!("deref maps numbers and variables out of T"),
        }
    }

    // ---- arithmetic ----

    fn eval_arith(&self, t: &'a Term, base: usize) -> Result<Num, RunError> {
        match self.deref(t, base) {
            V::Int(i) => Ok(Num::Int(i)),
            V::Float(f) => Ok(Num::Float(f)),
            V::Free(_) => Err(RunError::UnboundArith),
            V::T(Term::Atom(a), _) => Err(RunError::BadArith(format!("`{a}` is not evaluable"))),
            V::T(Term::Comp(f, args), b) => {
                let sig = PredSig {
                    name: f.clone(),
                    arity: args.len(),
                };
                if !is_arith_op(&sig) {
                    return Err(RunError::BadArith(format!("`{sig}` is not evaluable")));
                }
                if args.len() == 1 {
                    let x = self.eval_arith(&args[0], b)?;
                    apply_unop(f.as_str(), x)
                } else {
                    let x = self.eval_arith(&args[0], b)?;
                    let y = self.eval_arith(&args[1], b)?;
                    apply_binop(f.as_str(), x, y)
                }
            }
            V::T(..) => unreachable!("deref maps numbers and variables out of T"),
        }
    }

    fn do_cmp(
        &mut self,
        op: CmpOp,
        lhs: &'a Term,
        rhs: &'a Term,
        base: usize,
    ) -> Result<bool, RunError> {
        let a = self.eval_arith(lhs, base)?;
        let b = self.eval_arith(rhs, base)?;
        let ord = match (a, b) {
            (Num::Int(x), Num::Int(y)) => x.partial_cmp(&y),
            _ => a.as_f64().partial_cmp(&b.as_f64()),
        };
        let Some(ord) = ord else { return Ok(false) };
        Ok(match op {
            CmpOp::Eq => ord == std::cmp::Ordering::Equal,
            CmpOp::Ne => ord != std::cmp::Ordering::Equal,
            CmpOp::Lt => ord == std::cmp::Ordering::Less,
            CmpOp::Gt => ord == std::cmp::Ordering::Greater,
            CmpOp::Ge => ord != std::cmp::Ordering::Less,
            CmpOp::Le => ord != std::cmp::Ordering::Greater,
        })
    }

    /// Tallies one `Call` event per operator node in an evaluated
    /// expression, following bindings, mirroring the static operator count.
    fn count_ops(&mut self, t: &'a Term, base: usize) {
        if let V::T(Term::Comp(f, args), b) = self.deref(t, base) {
            let sig = PredSig {
                name: f.clone(),
                arity: args.len(),
            };
            if is_arith_op(&sig) {
                self.sink.add(Metric::Call(sig), 1);
                for a in args {
                    self.count_ops(a, b);
                }
            }
        }
    }
}

fn apply_unop(name: &str, x: Num) -> Result<Num, RunError> {
    match (name, x) {
        ("-", Num::Int(i)) => i.checked_neg().map(Num::Int).ok_or(RunError::Overflow),
        ("-", Num::Float(f)) => Ok(Num::Float(-f)),
        ("abs", Num::Int(i)) => i.checked_abs().map(Num::Int).ok_or(RunError::Overflow),
        ("abs", Num::Float(f)) => Ok(Num::Float(f.abs())),
        _ => Err(RunError::BadArith(format!("`{name}/1` is not evaluable"))),
    }
}

fn apply_binop(name: &str, a: Num, b: Num) -> Result<Num, RunError> {
    use Num::{Float, Int};
    match name {
        "+" => match (a, b) {
            (Int(x), Int(y)) => x.checked_add(y).map(Int).ok_or(RunError::Overflow),
            _ => Ok(Float(a.as_f64() + b.as_f64())),
        },
        "-" => match (a, b) {
            (Int(x), Int(y)) => x.checked_sub(y).map(Int).ok_or(RunError::Overflow),
            _ => Ok(Float(a.as_f64() - b.as_f64())),
        },
        "*" => match (a, b) {
            (Int(x), Int(y)) => x.checked_mul(y).map(Int).ok_or(RunError::Overflow),
            _ => Ok(Float(a.as_f64() * b.as_f64())),
        },
        // `/` is always float division; `//` is truncating integer division.
        "/" => {
            if b.as_f64() == 0.0 {
                return Err(RunError::ZeroDivide);
            }
            Ok(Float(a.as_f64() / b.as_f64()))
        }
        "//" => match (a, b) {
            (Int(_), Int(0)) => Err(RunError::ZeroDivide),
            (Int(x), Int(y)) => x.checked_div(y).map(Int).ok_or(RunError::Overflow),
            _ => Err(RunError::BadArith("`///2` needs integer operands".into())),
        },
        "mod" => match (a, b) {
            (Int(_), Int(0)) => Err(RunError::ZeroDivide),
            (Int(x), Int(y)) => floored_mod(x, y).map(Int).ok_or(RunError::Overflow),
            _ => Err(RunError::BadArith("`mod/2` needs integer operands".into())),
        },
        "^" => match (a, b) {
            (Int(_), Int(y)) if y < 0 => {
                Err(RunError::BadArith("negative integer exponent".into()))
            }
            (Int(x), Int(y)) => {
                let e = u32::try_from(y).map_err(|_| RunError::Overflow)?;
                x.checked_pow(e).map(Int).ok_or(RunError::Overflow)
            }
            _ => Ok(Float(a.as_f64().powf(b.as_f64()))),
        },
        "min" => match (a, b) {
            (Int(x), Int(y)) => Ok(Int(x.min(y))),
            _ => Ok(Float(a.as_f64().min(b.as_f64()))),
        },
        "max" => match (a, b) {
            (Int(x), Int(y)) => Ok(Int(x.max(y))),
            _ => Ok(Float(a.as_f64().max(b.as_f64()))),
        },
        _ => Err(RunError::BadArith(format!("`{name}/2` is not evaluable"))),
    }
}

/// Modulo with the sign of the divisor.
fn floored_mod(a: i64, b: i64) -> Option<i64> {
    let r = a.checked_rem(b)?;
    if r != 0 && (r < 0) != (b < 0) {
        r.checked_add(b)
    } else {
        Some(r)
    }
}

/// Result of one goal execution under the counting sink.
#[derive(Debug)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub counts: EventCounts,
    /// Named goal variables and their final values, in goal order.
    pub bindings: Vec<(String, Term)>,
}

/// Executes a goal conjunction with full event counting.
pub fn solve(program: &Program, goal: &[Term]) -> Result<SolveReport, RunError> {
    solve_with_options(program, goal, SolveOptions::default())
}

pub fn solve_with_options(
    program: &Program,
    goal: &[Term],
    opts: SolveOptions,
) -> Result<SolveReport, RunError> {
    let cp = CompiledProgram::compile(program);
    let cg = compile_goal(goal);
    let mut m = Machine::new(&cp, CountingSink::default(), opts);
    let outcome = m.run(&cg)?;
    let bindings = cg
        .named_vars
        .iter()
        .map(|(slot, name)| (name.clone(), m.binding(*slot)))
        .collect();
    Ok(SolveReport {
        outcome,
        counts: m.sink.counts,
        bindings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{all_metrics, predicate_cost, BoundKind};
    use crate::lang::{parse_goal, parse_program};
    use num::BigRational;

    fn run(src: &str, goal: &str) -> Result<SolveReport, RunError> {
        let p = parse_program(src).unwrap();
        let (lits, _) = parse_goal(goal).unwrap();
        solve(&p, &lits)
    }

    fn get(c: &EventCounts, m: Metric) -> u64 {
        c.get(&m).copied().unwrap_or(0)
    }

    const APP: &str = "
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(app/3).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

    #[test]
    fn concatenation_binds_output_and_counts_events() {
        let r = run(APP, "app([1,2], [3], Z)").unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        let (name, val) = &r.bindings[0];
        assert_eq!(name, "Z");
        assert_eq!(
            *val,
            Term::list(vec![Term::Int(1), Term::Int(2), Term::Int(3)])
        );
        assert_eq!(get(&r.counts, Metric::Step), 3);
        assert_eq!(get(&r.counts, Metric::Nargs), 9);
        assert_eq!(get(&r.counts, Metric::Giunif), 7);
        assert_eq!(get(&r.counts, Metric::Gounif), 6);
        assert_eq!(get(&r.counts, Metric::Viunif), 3);
        assert_eq!(get(&r.counts, Metric::Vounif), 1);

        let again = run(APP, "app([1,2], [3], Z)").unwrap();
        assert_eq!(r.counts, again.counts);
    }

    #[test]
    fn bare_fact_costs_one_step() {
        let src = "
:- mode(q/0, []).
:- measure(q/0, []).
:- entry(q/0).
q.
";
        let r = run(src, "q").unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(get(&r.counts, Metric::Step), 1);
        assert_eq!(get(&r.counts, Metric::Nargs), 0);
        assert_eq!(get(&r.counts, Metric::Giunif), 0);
    }

    #[test]
    fn unbound_declared_input_is_a_mode_violation() {
        let err = run(APP, "app(X, Y, Z)").unwrap_err();
        assert!(matches!(
            err,
            RunError::ModeViolation { arg: 1, .. }
        ));
    }

    #[test]
    fn unmatchable_goal_fails_without_counting() {
        let r = run(APP, "app([1], [2], [9])").unwrap();
        assert_eq!(r.outcome, Outcome::Failure);
        assert!(r.counts.values().all(|&n| n == 0));
    }

    #[test]
    fn arithmetic_evaluates_and_counts_operators() {
        let src = "
:- mode(q/0, []).
:- measure(q/0, []).
:- entry(q/0).
q.
";
        let r = run(src, "X is (1 + 2) * 2 - 1, X =:= 5").unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.bindings[0].1, Term::Int(5));
        assert_eq!(get(&r.counts, Metric::call("is", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("+", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("*", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("-", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("=:=", 2)), 1);
    }

    #[test]
    fn arithmetic_error_paths() {
        let src = "
:- mode(q/0, []).
:- measure(q/0, []).
:- entry(q/0).
q.
";
        assert!(matches!(
            run(src, "X is 9223372036854775807 + 1").unwrap_err(),
            RunError::Overflow
        ));
        assert!(matches!(
            run(src, "X is 1 // 0").unwrap_err(),
            RunError::ZeroDivide
        ));
        assert!(matches!(
            run(src, "X is Y + 1").unwrap_err(),
            RunError::UnboundArith
        ));
        assert!(matches!(
            run(src, "X is foo(1)").unwrap_err(),
            RunError::BadArith(_)
        ));
        // Float division and floored modulo.
        let r = run(src, "X is 1 / 2").unwrap();
        assert_eq!(r.bindings[0].1, Term::Float(0.5));
        let r = run(src, "X is -7 mod 2").unwrap();
        assert_eq!(r.bindings[0].1, Term::Int(1));
    }

    #[test]
    fn runaway_recursion_hits_the_depth_limit() {
        let src = "
:- mode(spin/0, []).
:- measure(spin/0, []).
:- entry(spin/0).
spin :- spin.
";
        let p = parse_program(src).unwrap();
        let (lits, _) = parse_goal("spin").unwrap();
        let err = solve_with_options(&p, &lits, SolveOptions { max_depth: 64 }).unwrap_err();
        assert!(matches!(err, RunError::DepthLimit { .. }));
    }

    #[test]
    fn guard_failure_tries_the_next_clause_without_counting() {
        let src = "
:- mode(flipsign/2, [in, out]).
:- measure(flipsign/2, [int, void]).
:- entry(flipsign/2).
flipsign(N, R) :- N > 0, R is N.
flipsign(N, R) :- N =< 0, R is 0 - N.
";
        let r = run(src, "flipsign(-3, R)").unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.bindings[0].1, Term::Int(3));
        assert_eq!(get(&r.counts, Metric::Step), 1);
        assert_eq!(get(&r.counts, Metric::call(">", 2)), 0);
        assert_eq!(get(&r.counts, Metric::call("=<", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("is", 2)), 1);
        assert_eq!(get(&r.counts, Metric::call("-", 2)), 1);
    }

    #[test]
    fn committed_choice_does_not_retry_after_commit() {
        // The first clause commits once its guard prefix holds, so a later
        // body failure is final even though the second clause would have
        // succeeded. The `is/2` ends the guard prefix.
        let src = "
:- mode(pick/1, [in]).
:- measure(pick/1, [int]).
:- entry(pick/1).
pick(N) :- N >= 0, M is N, M =:= 1.
pick(_).
";
        let r = run(src, "pick(2)").unwrap();
        assert_eq!(r.outcome, Outcome::Failure);
        assert_eq!(get(&r.counts, Metric::Step), 1);
        assert_eq!(get(&r.counts, Metric::call("=:=", 2)), 1);
    }

    const NREV: &str = "
:- mode(nrev/2, [in, out]).
:- measure(nrev/2, [length, void]).
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(nrev/2).
:- size(nrev/2, 2, 2, 1, n1 - 1).
nrev([], []).
nrev([X|Xs], R) :- nrev(Xs, R1), app(R1, [X], R).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

    const HANOI: &str = "
:- mode(hanoi/4, [in, in, in, in]).
:- measure(hanoi/4, [int, void, void, void]).
:- entry(hanoi/4).
hanoi(1, _, _, _).
hanoi(N, A, B, C) :- N > 1, N1 is N - 1, hanoi(N1, A, C, B), hanoi(N1, A, B, C).
";

    /// The static cost functions and the dynamic tallies are independent
    /// routes to the same quantities; on deterministic inputs they must
    /// agree exactly, metric by metric.
    #[test]
    fn dynamic_counts_match_static_cost_functions() {
        let cases: [(&str, &str, &str, usize, Vec<Option<i64>>); 3] = [
            (APP, "app([a,b,c,d,e], [x,y], Z)", "app", 3, vec![Some(5), Some(2), None]),
            (NREV, "nrev([1,2,3,4,5,6,7], R)", "nrev", 2, vec![Some(7), None]),
            (
                HANOI,
                "hanoi(6, left, mid, right)",
                "hanoi",
                4,
                vec![Some(6), None, None, None],
            ),
        ];
        for (src, goal, pred, arity, sizes) in cases {
            let program = parse_program(src).unwrap();
            let (lits, _) = parse_goal(goal).unwrap();
            let report = solve(&program, &lits).unwrap();
            assert_eq!(report.outcome, Outcome::Success, "{pred} goal must succeed");

            let set =
                predicate_cost(&program, &PredSig::new(pred, arity), BoundKind::Exact).unwrap();
            for metric in all_metrics(&program) {
                let expected = set.cost(&metric).eval(&sizes).unwrap();
                let observed =
                    BigRational::from_integer(get(&report.counts, metric.clone()).into());
                assert_eq!(expected, observed, "{pred} disagrees on {metric}");
            }
        }
    }

    #[test]
    fn call_chains_add_counts() {
        let src = "
:- mode(main/0, []).
:- measure(main/0, []).
:- entry(main/0).
main :- stage1, stage2.
:- mode(stage1/0, []).
:- measure(stage1/0, []).
stage1.
:- mode(stage2/0, []).
:- measure(stage2/0, []).
stage2 :- stage1, stage1.
";
        let r = run(src, "main").unwrap();
        assert_eq!(get(&r.counts, Metric::Step), 5);
    }

    /// The counting and timed configurations share the engine core; on the
    /// same goal they must produce the same outcome and the same answer.
    #[test]
    fn counting_and_timed_paths_agree() {
        let program = parse_program(NREV).unwrap();
        let (lits, _) = parse_goal("nrev([1,2,3,4], R)").unwrap();
        let cp = CompiledProgram::compile(&program);
        let cg = compile_goal(&lits);

        let mut counted = Machine::new(&cp, CountingSink::default(), SolveOptions::default());
        let out_counted = counted.run(&cg).unwrap();
        let val_counted = counted.binding(cg.named_vars[0].0);

        let mut timed = Machine::new(&cp, NullSink, SolveOptions::default());
        let out_timed = timed.run(&cg).unwrap();
        let val_timed = timed.binding(cg.named_vars[0].0);

        assert_eq!(out_counted, out_timed);
        assert_eq!(val_counted, val_timed);
        assert_eq!(
            val_counted,
            Term::list(vec![Term::Int(4), Term::Int(3), Term::Int(2), Term::Int(1)])
        );
    }
}
