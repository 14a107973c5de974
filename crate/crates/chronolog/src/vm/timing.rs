//! Wall-clock measurement of goal executions and builtin calls.
//!
//! Timed runs use the uncounted engine configuration: no event code is
//! compiled into the execution path. The goal is compiled once and every
//! timed iteration re-runs it against the same input terms, so input
//! construction never lands inside a timed region. Loop overhead is
//! measured separately and subtracted; a subtraction that would go
//! negative is clamped to zero and flagged.
//!
//! Only one measurement may be active per process at a time. Samples are
//! summarized by their median: single-sample spikes from scheduling noise
//! move the mean but leave the median alone.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use crate::lang::builtins::{arith_op_sigs, builtin_kind, BuiltinKind};
use crate::lang::program::Program;
use crate::lang::term::{PredSig, Term, Var};

use super::machine::{
    compile_goal, CompiledGoal, CompiledProgram, Machine, NullSink, Outcome, RunError,
    SolveOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum TimingError {
    #[error("another timing measurement is active in this process")]
    Busy,
    #[error("{0}")]
    BadReps(String),
    #[error("goal failed during the untimed check run")]
    GoalFailed,
    #[error("no timing recipe for builtin {0}")]
    Unregistered(PredSig),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Process-wide exclusivity for timed regions. Concurrent measurements
/// would contend for cores and corrupt each other's readings.
static TIMING_ACTIVE: AtomicBool = AtomicBool::new(false);

struct TimingGate;

impl TimingGate {
    fn acquire() -> Result<TimingGate, TimingError> {
        if TIMING_ACTIVE
            .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
            .is_err()
        {
            return Err(TimingError::Busy);
        }
        Ok(TimingGate)
    }
}

impl Drop for TimingGate {
    fn drop(&mut self) {
        TIMING_ACTIVE.store(false, Ordering::SeqCst);
    }
}

/// One profiling run: `reps` samples, each timing `inner_iters` executions.
#[derive(Debug, Clone)]
pub struct TimingResult {
    /// Raw duration of each timed loop, nanoseconds.
    pub samples_ns: Vec<u64>,
    pub reps: usize,
    pub inner_iters: u64,
    /// Measured duration of an empty loop of `inner_iters`, nanoseconds.
    pub overhead_ns: f64,
    /// Per-execution durations after overhead subtraction, one per sample.
    /// Never negative: impossible readings clamp to zero and warn.
    pub per_exec_ns: Vec<f64>,
    pub median_ns: f64,
    pub mean_ns: f64,
    pub warnings: Vec<String>,
}

/// Times repeated executions of a goal against `program`.
///
/// The goal must succeed; success is checked once, untimed, before any
/// measurement. Event counting stays disabled throughout.
pub fn profile(
    program: &Program,
    goal: &[Term],
    reps: usize,
    inner_iters: u64,
) -> Result<TimingResult, TimingError> {
    let _gate = TimingGate::acquire()?;
    if reps == 0 {
        return Err(TimingError::BadReps("reps must be at least 1".into()));
    }
    if inner_iters == 0 {
        return Err(TimingError::BadReps(
            "inner_iters must be at least 1".into(),
        ));
    }

    let cp = CompiledProgram::compile(program);
    let cg = compile_goal(goal);
    let mut m = Machine::new(&cp, NullSink, SolveOptions::default());
    match m.run(&cg)? {
        Outcome::Success => {}
        Outcome::Failure => return Err(TimingError::GoalFailed),
    }

    let overhead_ns = empty_loop_ns(inner_iters);
    let mut samples_ns = Vec::with_capacity(reps);
    for _ in 0..reps {
        samples_ns.push(timed_loop(&mut m, &cg, inner_iters));
    }

    let mut warnings = Vec::new();
    let mut per_exec_ns = Vec::with_capacity(reps);
    for (i, &s) in samples_ns.iter().enumerate() {
        let net = s as f64 - overhead_ns;
        if net < 0.0 {
            warnings.push(format!(
                "sample {} ran faster than the loop overhead; clamped to zero",
                i + 1
            ));
            per_exec_ns.push(0.0);
        } else {
            per_exec_ns.push(net / inner_iters as f64);
        }
    }

    let raw_median = median_u64(&samples_ns);
    let res = clock_resolution_ns();
    if (res as f64) * 100.0 > raw_median as f64 {
        warnings.push(format!(
            "timer resolution ~{res}ns exceeds 1% of the {raw_median}ns sample; \
             increase inner_iters for stable readings"
        ));
    }

    let median_ns = median_f64(&per_exec_ns);
    let mean_ns = per_exec_ns.iter().sum::<f64>() / per_exec_ns.len() as f64;
    Ok(TimingResult {
        samples_ns,
        reps,
        inner_iters,
        overhead_ns,
        per_exec_ns,
        median_ns,
        mean_ns,
        warnings,
    })
}

fn timed_loop<'a>(
    m: &mut Machine<'a, NullSink>,
    goal: &'a CompiledGoal,
    inner_iters: u64,
) -> u64 {
    let mut ok = true;
    let t0 = Instant::now();
    for _ in 0..inner_iters {
        ok &= matches!(m.run(goal), Ok(Outcome::Success));
    }
    let dt = t0.elapsed();
    std::hint::black_box(ok);
    debug_assert!(ok, "goal became non-deterministic between iterations");
    dt.as_nanos() as u64
}

/// Duration of the measurement loop itself with no goal inside, estimated
/// as the median of several readings.
fn empty_loop_ns(inner_iters: u64) -> f64 {
    let mut readings = Vec::with_capacity(7);
    for _ in 0..7 {
        let mut ok = true;
        let t0 = Instant::now();
        for _ in 0..inner_iters {
            ok &= std::hint::black_box(true);
        }
        let dt = t0.elapsed();
        std::hint::black_box(ok);
        readings.push(dt.as_nanos() as u64);
    }
    median_u64(&readings) as f64
}

/// Smallest observable nonzero interval of the monotonic clock.
fn clock_resolution_ns() -> u64 {
    let mut best = u64::MAX;
    for _ in 0..32 {
        let t0 = Instant::now();
        let d = loop {
            let d = t0.elapsed().as_nanos() as u64;
            if d > 0 {
                break d;
            }
        };
        best = best.min(d);
    }
    best
}

fn median_u64(xs: &[u64]) -> u64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    }
}

fn median_f64(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("durations are never NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Number of chained operator applications in an arithmetic timing goal.
const CHAIN_LEN: u64 = 64;

/// Builtins with a timing recipe, in a stable presentation order.
pub fn builtin_time_targets() -> Vec<PredSig> {
    let mut out = vec![PredSig::new("is", 2)];
    for name in ["=:=", "=\\=", "<", ">", ">=", "=<"] {
        out.push(PredSig::new(name, 2));
    }
    out.extend(arith_op_sigs());
    out
}

/// A self-contained goal exercising one builtin, plus how many times each
/// execution applies it. Arithmetic operators are applied in a chain under
/// a single `is/2`, so their per-call figure amortizes the wrapper.
fn builtin_goal(sig: &PredSig) -> Option<(Vec<Term>, u64)> {
    let x = || Term::Var(Var::new(0, "X"));
    match builtin_kind(sig) {
        Some(BuiltinKind::Is) => Some((
            vec![Term::comp("is", vec![x(), Term::Int(7)])],
            1,
        )),
        Some(BuiltinKind::Cmp(_)) => {
            // Operand pairs are chosen so each comparison holds.
            let (a, b) = match sig.name.as_str() {
                "=:=" => (1, 1),
                "=\\=" => (1, 2),
                "<" => (1, 2),
                ">" => (2, 1),
                ">=" => (2, 1),
                "=<" => (1, 2),
                _ => return None,
            };
            Some((
                vec![Term::comp(sig.name.as_str(), vec![Term::Int(a), Term::Int(b)])],
                1,
            ))
        }
        Some(BuiltinKind::True) | None => {
            if !crate::lang::builtins::is_arith_op(sig) {
                return None;
            }
            // Operand 1 keeps every chain closed: no overflow, no zero
            // divisor, no negative exponent.
            let mut e = Term::Int(1);
            for _ in 0..CHAIN_LEN {
                e = if sig.arity == 1 {
                    Term::comp(sig.name.as_str(), vec![e])
                } else {
                    Term::comp(sig.name.as_str(), vec![e, Term::Int(1)])
                };
            }
            Some((vec![Term::comp("is", vec![x(), e])], CHAIN_LEN))
        }
    }
}

/// Median nanoseconds per call of one builtin, measured over `reps`
/// executions per sample with loop overhead subtracted.
pub fn time_builtin(sig: &PredSig, reps: u64) -> Result<f64, TimingError> {
    let _gate = TimingGate::acquire()?;
    if reps == 0 {
        return Err(TimingError::BadReps("reps must be at least 1".into()));
    }
    let (lits, calls_per_exec) =
        builtin_goal(sig).ok_or_else(|| TimingError::Unregistered(sig.clone()))?;

    let empty = Program::new(Vec::new(), Vec::new(), 0);
    let cp = CompiledProgram::compile(&empty);
    let cg = compile_goal(&lits);
    let mut m = Machine::new(&cp, NullSink, SolveOptions::default());
    match m.run(&cg)? {
        Outcome::Success => {}
        Outcome::Failure => return Err(TimingError::GoalFailed),
    }

    let overhead = empty_loop_ns(reps);
    let mut samples = Vec::with_capacity(5);
    for _ in 0..5 {
        samples.push(timed_loop(&mut m, &cg, reps));
    }
    let net = (median_u64(&samples) as f64 - overhead).max(0.0);
    Ok(net / (reps as f64 * calls_per_exec as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_goal, parse_program};

    const NREV: &str = "
:- mode(nrev/2, [in, out]).
:- measure(nrev/2, [length, void]).
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(nrev/2).
nrev([], []).
nrev([X|Xs], R) :- nrev(Xs, R1), app(R1, [X], R).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

    fn nrev_goal(n: usize) -> Vec<Term> {
        let items = (0..n as i64).map(Term::Int).collect();
        vec![Term::comp(
            "nrev",
            vec![Term::list(items), Term::Var(Var::new(900, "R"))],
        )]
    }

    #[test]
    fn profile_reports_every_sample() {
        let p = parse_program(NREV).unwrap();
        let r = profile(&p, &nrev_goal(8), 3, 16).unwrap();
        assert_eq!(r.samples_ns.len(), 3);
        assert_eq!(r.per_exec_ns.len(), 3);
        assert!(r.per_exec_ns.iter().all(|&x| x >= 0.0));
        assert!(r.median_ns >= 0.0);
        assert!(r.mean_ns.is_finite());
    }

    #[test]
    fn zero_reps_is_rejected() {
        let p = parse_program(NREV).unwrap();
        assert!(matches!(
            profile(&p, &nrev_goal(4), 0, 16),
            Err(TimingError::BadReps(_))
        ));
        assert!(matches!(
            profile(&p, &nrev_goal(4), 3, 0),
            Err(TimingError::BadReps(_))
        ));
    }

    #[test]
    fn failing_goal_is_rejected_before_timing() {
        let p = parse_program(NREV).unwrap();
        let (lits, _) = parse_goal("nrev([1], [2])").unwrap();
        assert!(matches!(
            profile(&p, &lits, 3, 4),
            Err(TimingError::GoalFailed)
        ));
    }

    #[test]
    fn measurements_are_exclusive_while_active() {
        let first = TimingGate::acquire().unwrap();
        assert!(matches!(TimingGate::acquire(), Err(TimingError::Busy)));
        drop(first);
        assert!(TimingGate::acquire().is_ok());
    }

    #[test]
    fn every_registered_builtin_times_cleanly() {
        for sig in builtin_time_targets() {
            let k = time_builtin(&sig, 64).unwrap();
            assert!(k.is_finite() && k >= 0.0, "{sig} gave {k}");
        }
        assert!(matches!(
            time_builtin(&PredSig::new("foo", 1), 8),
            Err(TimingError::Unregistered(_))
        ));
    }

    /// Observational, not asserted: doubling the input should not make the
    /// median faster. Scheduling noise can break this on shared runners, so
    /// a violation is flagged on stderr rather than failed.
    #[test]
    fn larger_inputs_do_not_time_faster() {
        let p = parse_program(NREV).unwrap();
        let small = profile(&p, &nrev_goal(6), 3, 32).unwrap();
        let large = profile(&p, &nrev_goal(18), 3, 32).unwrap();
        if large.median_ns < small.median_ns {
            eprintln!(
                "timing-sanity flag: nrev(18) median {}ns < nrev(6) median {}ns",
                large.median_ns, small.median_ns
            );
        }
    }
}
