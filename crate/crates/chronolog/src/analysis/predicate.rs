//! Whole-program cost analysis driver.
//!
//! Predicates are processed one strongly connected group at a time, in
//! dependency order. Each group becomes an equation system; a singleton
//! group whose clauses form a solvable recurrence gets a closed form,
//! everything else gets an exact evaluator over the same equations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num::{BigInt, BigRational, Signed};

use crate::analysis::closed::{ClosedForm, SubstVal};
use crate::analysis::costfn::{CostEvaluator, CostFunction, PredCostSet};
use crate::analysis::counting::body_metrics;
use crate::analysis::error::{AnalysisError, EvalError};
use crate::analysis::recurrence::{solve_recurrence, BaseCase, RecCase, Recurrence};
use crate::analysis::size::SizeExpr;
use crate::analysis::system::{
    build_system, check_exact, clause_guard, CallSite, CalleeRef, SccSystem, SystemEvaluator,
};
use crate::lang::program::Program;
use crate::lang::term::PredSig;
use crate::lang::validate_program;
use crate::metric::{Metric, HEAD_METRICS};

/// Whether the produced cost functions are exact or upper bounds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundKind {
    Upper,
    Exact,
}

/// Every metric this program can incur: the six head metrics plus one
/// `Call` metric per builtin and arithmetic operator that appears.
pub fn all_metrics(program: &Program) -> Vec<Metric> {
    let mut set: BTreeSet<Metric> = HEAD_METRICS.iter().cloned().collect();
    for pred in &program.preds {
        for (m, _) in &pred.decl.trust {
            set.insert(m.clone());
        }
        for clause in &pred.clauses {
            if let Ok(counts) = body_metrics(&clause.body) {
                set.extend(counts.keys().cloned());
            }
        }
    }
    set.into_iter().collect()
}

pub struct Analyzer<'p> {
    program: &'p Program,
    bound: BoundKind,
    metrics: Vec<Metric>,
    cache: HashMap<PredSig, Arc<PredCostSet>>,
    scc_of: HashMap<PredSig, usize>,
    sccs: Vec<Vec<PredSig>>,
    notes: Vec<String>,
}

impl<'p> Analyzer<'p> {
    pub fn new(program: &'p Program, bound: BoundKind) -> Result<Self, AnalysisError> {
        let diags = validate_program(program);
        if crate::lang::program::has_errors(&diags) {
            let msg = diags
                .iter()
                .filter(|d| d.is_error())
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            return Err(AnalysisError::Invalid(msg));
        }
        let sccs = strongly_connected(program);
        let mut scc_of = HashMap::new();
        for (i, comp) in sccs.iter().enumerate() {
            for sig in comp {
                scc_of.insert(sig.clone(), i);
            }
        }
        Ok(Analyzer {
            program,
            bound,
            metrics: all_metrics(program),
            cache: HashMap::new(),
            scc_of,
            sccs,
            notes: Vec::new(),
        })
    }

    pub fn metrics(&self) -> &[Metric] {
        &self.metrics
    }

    /// Non-fatal observations gathered along the way, such as callee
    /// sizes that could not be expressed.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Cost functions for one predicate, computing and caching everything
    /// it depends on.
    pub fn cost_set(&mut self, sig: &PredSig) -> Result<Arc<PredCostSet>, AnalysisError> {
        if let Some(c) = self.cache.get(sig) {
            return Ok(c.clone());
        }
        let def = self
            .program
            .lookup(sig)
            .ok_or_else(|| AnalysisError::UnknownPredicate(sig.clone()))?;

        if def.decl.is_trusted() {
            let set = Arc::new(trusted_cost_set(def)?);
            self.cache.insert(sig.clone(), set.clone());
            return Ok(set);
        }

        let scc_idx = *self
            .scc_of
            .get(sig)
            .ok_or_else(|| AnalysisError::UnknownPredicate(sig.clone()))?;
        let members = self.sccs[scc_idx].clone();

        let mut externals = HashMap::new();
        for m in &members {
            let mdef = self.program.lookup(m).expect("member is a known predicate");
            for callee in self.program.callees(mdef) {
                if !members.contains(&callee) && !externals.contains_key(&callee) {
                    let set = self.cost_set(&callee)?;
                    externals.insert(callee, set);
                }
            }
        }

        if self.bound == BoundKind::Exact {
            for m in &members {
                let mdef = self.program.lookup(m).expect("member is a known predicate");
                let guards: Vec<_> = (0..mdef.clauses.len())
                    .map(|ci| clause_guard(mdef, ci))
                    .collect();
                check_exact(mdef, &guards)?;
            }
        }

        let system = Arc::new(build_system(self.program, &members, &externals)?);
        self.notes.extend(system.notes.iter().cloned());

        for (mi, m) in members.iter().enumerate() {
            let mut per_metric = BTreeMap::new();
            for metric in &self.metrics {
                let f = if members.len() == 1 {
                    match setup_from_system(&system, 0, metric) {
                        Ok(rec) => solve_recurrence(&rec),
                        Err(_) => CostFunction::Evaluator(Arc::new(SystemEvaluator::new(
                            system.clone(),
                            mi,
                            metric.clone(),
                        ))),
                    }
                } else {
                    CostFunction::Evaluator(Arc::new(SystemEvaluator::new(
                        system.clone(),
                        mi,
                        metric.clone(),
                    )))
                };
                per_metric.insert(metric.clone(), f);
            }
            self.cache.insert(
                m.clone(),
                Arc::new(PredCostSet {
                    sig: m.clone(),
                    per_metric,
                }),
            );
        }
        Ok(self.cache.get(sig).expect("just inserted").clone())
    }
}

/// Cost functions for one predicate of a validated program.
pub fn predicate_cost(
    program: &Program,
    sig: &PredSig,
    bound: BoundKind,
) -> Result<Arc<PredCostSet>, AnalysisError> {
    Analyzer::new(program, bound)?.cost_set(sig)
}

/// The defining cost equations of a directly recursive (or call-free)
/// predicate under one metric, ready for `solve_recurrence`.
pub fn setup_cost_equation(
    program: &Program,
    sig: &PredSig,
    metric: &Metric,
) -> Result<Recurrence, AnalysisError> {
    let mut az = Analyzer::new(program, BoundKind::Upper)?;
    let def = program
        .lookup(sig)
        .ok_or_else(|| AnalysisError::UnknownPredicate(sig.clone()))?;
    let members = vec![sig.clone()];
    let mut externals = HashMap::new();
    for callee in program.callees(def) {
        if callee != *sig {
            externals.insert(callee.clone(), az.cost_set(&callee)?);
        }
    }
    let system = build_system(program, &members, &externals)?;
    setup_from_system(&system, 0, metric)
}

/// Declared costs of a clauseless predicate, taken on trust.
fn trusted_cost_set(def: &crate::lang::program::PredDef) -> Result<PredCostSet, AnalysisError> {
    let mut per_metric = BTreeMap::new();
    for (metric, term) in &def.decl.trust {
        let expr = SizeExpr::from_term(term).map_err(|reason| AnalysisError::TrustExpr {
            pred: def.sig.clone(),
            metric: metric.clone(),
            reason,
        })?;
        let f = match ClosedForm::from_size_expr(&expr) {
            Some(cf) => CostFunction::Closed(cf),
            None => CostFunction::Evaluator(Arc::new(DeclaredCost { expr })),
        };
        per_metric.insert(metric.clone(), f);
    }
    Ok(PredCostSet {
        sig: def.sig.clone(),
        per_metric,
    })
}

/// A cost expression supplied by declaration rather than analysis.
#[derive(Debug)]
struct DeclaredCost {
    expr: SizeExpr,
}

impl CostEvaluator for DeclaredCost {
    fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
        let v = self.expr.eval(sizes)?;
        Ok(BigRational::from_integer(BigInt::from(v)))
    }

    fn describe(&self) -> String {
        self.expr.to_string()
    }
}

fn not_closed(sig: &PredSig, metric: &Metric, reason: impl Into<String>) -> AnalysisError {
    AnalysisError::NotClosedForm {
        pred: sig.clone(),
        metric: metric.clone(),
        reason: reason.into(),
    }
}

/// Composes a callee's closed cost with the argument-size expressions of
/// one call site.
fn compose_closed(cf: &ClosedForm, arg_sizes: &[Option<SizeExpr>]) -> Result<ClosedForm, String> {
    let substs: Vec<Option<SubstVal>> = arg_sizes
        .iter()
        .map(|o| o.as_ref().and_then(SubstVal::from_size_expr))
        .collect();
    cf.subst_all(&substs)
}

fn site_sols_closed(site: &CallSite) -> Result<ClosedForm, String> {
    match &site.sols {
        None => Ok(ClosedForm::one()),
        Some(e) => {
            let cf = ClosedForm::from_size_expr(e)
                .ok_or_else(|| format!("solution count `{}` is outside the closed class", e))?;
            compose_closed(&cf, &site.arg_sizes)
        }
    }
}

fn external_closed(
    site: &CallSite,
    metric: &Metric,
) -> Result<ClosedForm, String> {
    match &site.callee {
        CalleeRef::External(set) => match set.cost(metric) {
            CostFunction::Closed(cf) => compose_closed(&cf, &site.arg_sizes),
            CostFunction::Evaluator(_) => {
                Err(format!("cost of {} has no closed form", site.sig))
            }
        },
        CalleeRef::Member(_) => Err("recursive call handled separately".to_string()),
    }
}

/// Builds the recurrence for one member of a singleton group. Requires
/// pairwise exclusive clause guards, a single driving argument stepped
/// down by every recursive call, and closed callee costs.
fn setup_from_system(
    system: &SccSystem,
    member: usize,
    metric: &Metric,
) -> Result<Recurrence, AnalysisError> {
    let sp = &system.preds[member];
    let sig = &sp.sig;

    for i in 0..sp.clauses.len() {
        for j in i + 1..sp.clauses.len() {
            if !sp.clauses[i].guard.disjoint_with(&sp.clauses[j].guard) {
                return Err(not_closed(
                    sig,
                    metric,
                    format!("clauses {} and {} may both apply", i + 1, j + 1),
                ));
            }
        }
    }

    let is_self = |site: &CallSite| matches!(site.callee, CalleeRef::Member(_));
    let rec_clauses: Vec<usize> = (0..sp.clauses.len())
        .filter(|&ci| sp.clauses[ci].calls.iter().any(is_self))
        .collect();

    let driver = if rec_clauses.is_empty() {
        None
    } else {
        Some(find_driver(sp, &rec_clauses).ok_or_else(|| {
            not_closed(sig, metric, "no single argument drives the recursion")
        })?)
    };

    let mut bases = Vec::new();
    let mut recs = Vec::new();
    for (ci, clause) in sp.clauses.iter().enumerate() {
        if !rec_clauses.contains(&ci) {
            let mut cost = consts_closed(clause, metric);
            let mut prefix = ClosedForm::one();
            for site in &clause.calls {
                let ext = external_closed(site, metric)
                    .map_err(|r| not_closed(sig, metric, r))?;
                cost = cost.add(&prefix.mul(&ext));
                let s = site_sols_closed(site).map_err(|r| not_closed(sig, metric, r))?;
                prefix = prefix.mul(&s);
            }
            bases.push(BaseCase {
                guard: clause.guard.clone(),
                cost,
            });
            continue;
        }

        let v = driver.expect("recursive clauses imply a driver");
        let mut inhom = consts_closed(clause, metric);
        let mut factor_cf = ClosedForm::zero();
        let mut prefix = ClosedForm::one();
        let mut dec: Option<i64> = None;
        for site in &clause.calls {
            if is_self(site) {
                let d = self_call_shift(site, v)
                    .ok_or_else(|| not_closed(sig, metric, "recursive call does not step the driver"))?;
                match dec {
                    None => dec = Some(-d),
                    Some(prev) if prev == -d => {}
                    Some(_) => {
                        return Err(not_closed(
                            sig,
                            metric,
                            "recursive calls step the driver by different amounts",
                        ))
                    }
                }
                factor_cf = factor_cf.add(&prefix);
                let s = match &sp.sols {
                    None => ClosedForm::one(),
                    Some(e) => {
                        let cf = ClosedForm::from_size_expr(e).ok_or_else(|| {
                            not_closed(sig, metric, "solution count is outside the closed class")
                        })?;
                        compose_closed(&cf, &site.arg_sizes)
                            .map_err(|r| not_closed(sig, metric, r))?
                    }
                };
                prefix = prefix.mul(&s);
            } else {
                let ext = external_closed(site, metric)
                    .map_err(|r| not_closed(sig, metric, r))?;
                inhom = inhom.add(&prefix.mul(&ext));
                let s = site_sols_closed(site).map_err(|r| not_closed(sig, metric, r))?;
                prefix = prefix.mul(&s);
            }
        }
        let factor = factor_cf.as_constant().ok_or_else(|| {
            not_closed(sig, metric, "recursion multiplier varies with input sizes")
        })?;
        if !factor.is_positive() {
            return Err(not_closed(sig, metric, "recursion multiplier is not positive"));
        }
        recs.push(RecCase {
            guard: clause.guard.clone(),
            factor,
            decrement: dec.expect("recursive clause has a recursive call"),
            inhom,
        });
    }

    Ok(Recurrence {
        sig: sig.clone(),
        metric: metric.clone(),
        driver,
        bases,
        recs,
    })
}

fn consts_closed(clause: &crate::analysis::system::ClauseEq, metric: &Metric) -> ClosedForm {
    ClosedForm::from_int(clause.consts.get(metric).copied().unwrap_or(0) as i64)
}

/// The argument position every recursive call steps down by a constant
/// while passing all other tracked sizes through unchanged.
fn find_driver(sp: &crate::analysis::system::SysPred, rec_clauses: &[usize]) -> Option<usize> {
    let self_sites = || {
        rec_clauses.iter().flat_map(|&ci| {
            sp.clauses[ci]
                .calls
                .iter()
                .filter(|s| matches!(s.callee, CalleeRef::Member(_)))
        })
    };
    'cand: for v in 0..sp.arity {
        for site in self_sites() {
            match self_call_shift(site, v) {
                Some(d) if d < 0 => {}
                _ => continue 'cand,
            }
            for (u, se) in site.arg_sizes.iter().enumerate() {
                if u == v {
                    continue;
                }
                if let Some(e) = se {
                    let identity = e.to_affine().is_some_and(|a| a.is_identity_of(u));
                    if !identity {
                        continue 'cand;
                    }
                }
            }
        }
        return Some(v);
    }
    None
}

fn self_call_shift(site: &CallSite, v: usize) -> Option<i64> {
    site.arg_sizes
        .get(v)?
        .as_ref()?
        .to_affine()?
        .as_shift_of(v)
}

/// Condensation of the user-predicate call graph; every predicate lands
/// in exactly one component, components listed callees-first.
fn strongly_connected(program: &Program) -> Vec<Vec<PredSig>> {
    struct St<'a> {
        program: &'a Program,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<PredSig>>,
    }

    fn visit(st: &mut St, v: usize) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        let callees = st.program.callees(&st.program.preds[v]);
        for csig in callees {
            if let Some(w) = st.program.lookup_idx(&csig) {
                if st.index[w].is_none() {
                    visit(st, w);
                    st.low[v] = st.low[v].min(st.low[w]);
                } else if st.on_stack[w] {
                    st.low[v] = st.low[v].min(st.index[w].expect("indexed"));
                }
            }
        }
        if Some(st.low[v]) == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("stack holds the component");
                st.on_stack[w] = false;
                comp.push(st.program.preds[w].sig.clone());
                if w == v {
                    break;
                }
            }
            comp.reverse();
            st.out.push(comp);
        }
    }

    let n = program.preds.len();
    let mut st = St {
        program,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.out
}
