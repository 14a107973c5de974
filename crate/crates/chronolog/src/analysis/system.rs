//! Clause-level cost equations for one strongly connected group of
//! predicates, and their exact numeric evaluation.
//!
//! Costs compose along a clause body as a prefix product of solution
//! counts: a literal's cost is incurred once per solution of everything
//! before it. Across clauses of one predicate, mutually exclusive groups
//! add and clauses within a group contribute their maximum.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::analysis::costfn::{CostEvaluator, Guard, PredCostSet};
use crate::analysis::counting::{clause_metrics, Counts};
use crate::analysis::error::{AnalysisError, EvalError};
use crate::analysis::relations::size_relations;
use crate::analysis::size::{measure_bound, SizeExpr};
use crate::lang::builtins::{builtin_kind, BuiltinKind, CmpOp};
use crate::lang::program::{Measure, Mode, PredDef, Program};
use crate::lang::term::{PredSig, Term};
use crate::metric::Metric;

#[derive(Debug, Clone)]
pub enum CalleeRef {
    /// Callee inside the same strongly connected group.
    Member(usize),
    /// Already-analyzed callee below this group.
    External(Arc<PredCostSet>),
}

/// One user-predicate literal in a clause body.
#[derive(Debug, Clone)]
pub struct CallSite {
    pub callee: CalleeRef,
    pub sig: PredSig,
    /// Callee argument sizes over the caller's sizes; indexed by callee
    /// argument position.
    pub arg_sizes: Vec<Option<SizeExpr>>,
    /// Callee solution count over the callee's own sizes; `None` is 1.
    pub sols: Option<SizeExpr>,
}

#[derive(Debug, Clone)]
pub struct ClauseEq {
    pub guard: Guard,
    /// Fixed metric contributions of selecting this clause.
    pub consts: Counts,
    pub calls: Vec<CallSite>,
}

#[derive(Debug, Clone)]
pub struct SysPred {
    pub sig: PredSig,
    pub arity: usize,
    /// Mutually exclusive clause groups (indices into `clauses`).
    pub groups: Vec<Vec<usize>>,
    pub clauses: Vec<ClauseEq>,
    /// Solution count of this predicate, over its own sizes.
    pub sols: Option<SizeExpr>,
}

#[derive(Debug)]
pub struct SccSystem {
    pub preds: Vec<SysPred>,
    /// Notes about unresolved callee sizes: fatal only if used.
    pub notes: Vec<String>,
}

impl SccSystem {
    pub fn member_index(&self, sig: &PredSig) -> Option<usize> {
        self.preds.iter().position(|p| &p.sig == sig)
    }
}

/// Extracts the selection guard of one clause: size constraints implied by
/// the head patterns, narrowed by the leading comparison literals.
pub fn clause_guard(def: &PredDef, clause_idx: usize) -> Guard {
    let clause = &def.clauses[clause_idx];
    let modes = def.modes();
    let measures = def.measures();
    let mut g = Guard::always();

    let head_args: &[Term] = match &clause.head {
        Term::Comp(_, a) => a,
        _ => &[],
    };
    let mut int_var_pos: HashMap<usize, usize> = HashMap::new();
    for (pos, pat) in head_args.iter().enumerate() {
        if modes.get(pos) != Some(&Mode::In) {
            continue;
        }
        let m = match measures.get(pos) {
            Some(Measure::Void) | None => continue,
            Some(m) => *m,
        };
        if m == Measure::Int {
            if let Term::Var(v) = pat {
                int_var_pos.insert(v.id, pos);
            }
        }
        if let Some((b, tight)) = measure_bound(pat, m) {
            g.require(pos, Some(b), tight.then_some(b));
        }
    }

    // Leading comparisons against constants refine integer inputs.
    for lit in &clause.body {
        let sig = match PredSig::of(lit) {
            Some(s) => s,
            None => break,
        };
        let op = match builtin_kind(&sig) {
            Some(BuiltinKind::Cmp(op)) => op,
            _ => break,
        };
        let Term::Comp(_, args) = lit else { break };
        let (pos, op, k) = match (&args[0], &args[1]) {
            (Term::Var(v), Term::Int(k)) => match int_var_pos.get(&v.id) {
                Some(pos) => (*pos, op, *k),
                None => continue,
            },
            (Term::Int(k), Term::Var(v)) => match int_var_pos.get(&v.id) {
                Some(pos) => (*pos, mirror(op), *k),
                None => continue,
            },
            _ => continue,
        };
        match op {
            CmpOp::Eq => g.require(pos, Some(k), Some(k)),
            CmpOp::Lt => g.require(pos, None, Some(k - 1)),
            CmpOp::Le => g.require(pos, None, Some(k)),
            CmpOp::Gt => g.require(pos, Some(k + 1), None),
            CmpOp::Ge => g.require(pos, Some(k), None),
            CmpOp::Ne => {}
        }
    }
    g
}

/// Rewrites `k op X` as `X op' k`.
fn mirror(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Le,
        CmpOp::Eq | CmpOp::Ne => op,
    }
}

/// Clause groups: the declared partition if one was asserted, singleton
/// groups when the extracted guards are pairwise exclusive, one joint
/// group otherwise.
pub fn clause_groups(def: &PredDef, guards: &[Guard]) -> Vec<Vec<usize>> {
    if let Some(mx) = &def.decl.mutex {
        return mx.clone();
    }
    let n = guards.len();
    let disjoint = (0..n).all(|i| (i + 1..n).all(|j| guards[i].disjoint_with(&guards[j])));
    if disjoint {
        (0..n).map(|i| vec![i]).collect()
    } else {
        vec![(0..n).collect()]
    }
}

/// Builds the equation system for the predicates of one strongly connected
/// group. `externals` must hold cost sets for every callee outside it.
pub fn build_system(
    program: &Program,
    members: &[PredSig],
    externals: &HashMap<PredSig, Arc<PredCostSet>>,
) -> Result<SccSystem, AnalysisError> {
    let mut preds = Vec::with_capacity(members.len());
    let mut notes = Vec::new();

    for sig in members {
        let def = program
            .lookup(sig)
            .ok_or_else(|| AnalysisError::UnknownPredicate(sig.clone()))?;
        let mut guards = Vec::with_capacity(def.clauses.len());
        let mut clauses = Vec::with_capacity(def.clauses.len());

        for (ci, clause) in def.clauses.iter().enumerate() {
            let guard = clause_guard(def, ci);
            let consts = clause_metrics(&clause.head, &clause.body, def.modes()).map_err(
                |reason| AnalysisError::BadArithExpr {
                    pred: sig.clone(),
                    clause: ci + 1,
                    reason,
                },
            )?;
            let rel = size_relations(program, def, ci);
            for (lit, arg, why) in &rel.unresolved {
                notes.push(format!(
                    "{} clause {}: literal {}, argument {}: {}",
                    sig,
                    ci + 1,
                    lit + 1,
                    arg + 1,
                    why
                ));
            }

            let mut calls = Vec::new();
            for (li, lit) in clause.body.iter().enumerate() {
                let Some(call_sig) = PredSig::of(lit) else { continue };
                if builtin_kind(&call_sig).is_some() {
                    continue;
                }
                let arg_sizes = match &rel.lits[li] {
                    Some(ls) => ls.args.clone(),
                    None => vec![None; call_sig.arity],
                };
                let callee = match members.iter().position(|m| m == &call_sig) {
                    Some(j) => CalleeRef::Member(j),
                    None => CalleeRef::External(
                        externals
                            .get(&call_sig)
                            .cloned()
                            .ok_or_else(|| AnalysisError::UnknownPredicate(call_sig.clone()))?,
                    ),
                };
                let sols = callee_sols(program, &call_sig)?;
                if matches!(callee, CalleeRef::Member(_)) && call_sig == *sig {
                    ensure_decreasing(sig, &arg_sizes)?;
                }
                calls.push(CallSite {
                    callee,
                    sig: call_sig,
                    arg_sizes,
                    sols,
                });
            }
            guards.push(guard.clone());
            clauses.push(ClauseEq {
                guard,
                consts,
                calls,
            });
        }

        preds.push(SysPred {
            sig: sig.clone(),
            arity: sig.arity,
            groups: clause_groups(def, &guards),
            clauses,
            sols: callee_sols(program, sig)?,
        });
    }

    Ok(SccSystem { preds, notes })
}

fn callee_sols(program: &Program, sig: &PredSig) -> Result<Option<SizeExpr>, AnalysisError> {
    let Some(def) = program.lookup(sig) else {
        return Ok(None);
    };
    match &def.decl.sols {
        None => Ok(None),
        Some(t) => SizeExpr::from_term(t)
            .map(Some)
            .map_err(|reason| AnalysisError::SolsExpr {
                pred: sig.clone(),
                reason,
            }),
    }
}

/// A direct recursive call must shrink some tracked size by a constant.
fn ensure_decreasing(sig: &PredSig, arg_sizes: &[Option<SizeExpr>]) -> Result<(), AnalysisError> {
    let shrinks = arg_sizes.iter().enumerate().any(|(pos, se)| {
        se.as_ref()
            .and_then(|e| e.to_affine())
            .and_then(|a| a.as_shift_of(pos))
            .is_some_and(|shift| shift < 0)
    });
    if shrinks {
        Ok(())
    } else {
        Err(AnalysisError::NonTerminating { pred: sig.clone() })
    }
}

/// Requires, for an exact cost, that no two clauses can both run at one
/// size tuple unless an asserted partition separates them.
pub fn check_exact(def: &PredDef, guards: &[Guard]) -> Result<(), AnalysisError> {
    let singleton_partition = def
        .decl
        .mutex
        .as_ref()
        .is_some_and(|mx| mx.iter().all(|g| g.len() == 1));
    if singleton_partition {
        return Ok(());
    }
    let n = guards.len();
    for i in 0..n {
        for j in i + 1..n {
            if !guards[i].disjoint_with(&guards[j]) {
                return Err(AnalysisError::NotExactCapable {
                    pred: def.sig.clone(),
                    a: i + 1,
                    b: j + 1,
                });
            }
        }
    }
    Ok(())
}

enum MemoState {
    Busy,
    Done(BigRational),
}

/// Evaluates one member predicate's cost under one metric by resolving
/// the group's equations at each requested size tuple.
#[derive(Debug)]
pub struct SystemEvaluator {
    pub system: Arc<SccSystem>,
    pub member: usize,
    pub metric: Metric,
    memo: Mutex<HashMap<(usize, Vec<Option<i64>>), MemoState>>,
}

impl SystemEvaluator {
    pub fn new(system: Arc<SccSystem>, member: usize, metric: Metric) -> Self {
        SystemEvaluator {
            system,
            member,
            metric,
            memo: Mutex::new(HashMap::new()),
        }
    }

    const MAX_DEPTH: usize = 10_000;

    fn eval_member(
        &self,
        member: usize,
        sizes: &[Option<i64>],
        depth: usize,
    ) -> Result<BigRational, EvalError> {
        let sp = &self.system.preds[member];
        if depth > Self::MAX_DEPTH {
            return Err(EvalError::DepthExceeded {
                pred: sp.sig.clone(),
            });
        }
        let key = (member, sizes.to_vec());
        {
            let mut memo = self.memo.lock().unwrap();
            match memo.get(&key) {
                Some(MemoState::Done(v)) => return Ok(v.clone()),
                Some(MemoState::Busy) => {
                    return Err(EvalError::Cycle {
                        pred: sp.sig.clone(),
                    })
                }
                None => {
                    memo.insert(key.clone(), MemoState::Busy);
                }
            }
        }
        let result = self.eval_member_inner(sp, sizes, depth);
        let mut memo = self.memo.lock().unwrap();
        match &result {
            Ok(v) => {
                memo.insert(key, MemoState::Done(v.clone()));
            }
            Err(_) => {
                memo.remove(&key);
            }
        }
        result
    }

    fn eval_member_inner(
        &self,
        sp: &SysPred,
        sizes: &[Option<i64>],
        depth: usize,
    ) -> Result<BigRational, EvalError> {
        let mut total = BigRational::zero();
        let mut any = false;
        for group in &sp.groups {
            let mut best: Option<BigRational> = None;
            for &ci in group {
                let clause = &sp.clauses[ci];
                if !clause.guard.holds(sizes)? {
                    continue;
                }
                let v = self.eval_clause(clause, sizes, depth)?;
                best = Some(match best {
                    Some(b) if b >= v => b,
                    _ => v,
                });
            }
            if let Some(b) = best {
                any = true;
                total += b;
            }
        }
        if !any {
            return Err(EvalError::NoApplicableClause {
                pred: sp.sig.clone(),
                sizes: sizes.to_vec(),
            });
        }
        Ok(total)
    }

    fn eval_clause(
        &self,
        clause: &ClauseEq,
        sizes: &[Option<i64>],
        depth: usize,
    ) -> Result<BigRational, EvalError> {
        let mut total = BigRational::from_integer(BigInt::from(
            clause.consts.get(&self.metric).copied().unwrap_or(0),
        ));
        let mut prefix = BigRational::one();
        for call in &clause.calls {
            let mut callee_sizes = Vec::with_capacity(call.arg_sizes.len());
            for se in &call.arg_sizes {
                callee_sizes.push(match se {
                    Some(e) => {
                        let n = e.eval(sizes)?;
                        if n < 0 {
                            return Err(EvalError::NegativeSize { value: n });
                        }
                        Some(n)
                    }
                    None => None,
                });
            }
            let cost = match &call.callee {
                CalleeRef::Member(j) => self.eval_member(*j, &callee_sizes, depth + 1)?,
                CalleeRef::External(set) => set.cost(&self.metric).eval(&callee_sizes)?,
            };
            total += &prefix * cost;
            if let Some(sols) = &call.sols {
                let s = sols.eval(&callee_sizes)?;
                if s < 0 {
                    return Err(EvalError::NegativeSols);
                }
                prefix *= BigRational::from_integer(BigInt::from(s));
            }
            if prefix.is_zero() {
                break;
            }
        }
        if prefix.is_negative() {
            return Err(EvalError::NegativeSols);
        }
        Ok(total)
    }
}

impl CostEvaluator for SystemEvaluator {
    fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
        self.eval_member(self.member, sizes, 0)
    }

    fn describe(&self) -> String {
        format!(
            "<equation evaluation for {}>",
            self.system.preds[self.member].sig
        )
    }
}

impl std::fmt::Debug for MemoState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MemoState::Busy => write!(f, "busy"),
            MemoState::Done(v) => write!(f, "{}", v),
        }
    }
}
