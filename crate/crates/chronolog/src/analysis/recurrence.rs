//! Linear recurrences over one driving input size, and their solutions.
//!
//! The clause equations of a directly recursive predicate reduce to
//!
//! ```text
//!     f(n)  = a * f(n - d) + g(n̄)      for n in the recursive guard
//!     f(n0) = B(n̄)                      for the base guard n = n0
//! ```
//!
//! where `g` and `B` are closed forms that may mention the other input
//! sizes. `solve_recurrence` produces a closed form for the class
//! (a = 1 with polynomial-plus-exponential `g`, or integer a > 1 with
//! decrement 1) and an exact numeric evaluator otherwise.

use std::fmt;

use num::traits::Pow;
use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::analysis::closed::{ClosedForm, SubstVal, VarFactor};
use crate::analysis::costfn::{CostEvaluator, CostFunction, Guard};
use crate::analysis::error::EvalError;
use crate::analysis::size::Affine;
use crate::lang::term::PredSig;
use crate::metric::Metric;

#[derive(Debug, Clone)]
pub struct BaseCase {
    pub guard: Guard,
    pub cost: ClosedForm,
}

#[derive(Debug, Clone)]
pub struct RecCase {
    pub guard: Guard,
    /// Combined multiplier on the recursive calls.
    pub factor: BigRational,
    /// How much the driving size shrinks per call.
    pub decrement: i64,
    /// Cost of the clause beyond the recursive calls.
    pub inhom: ClosedForm,
}

/// Defining equations of one predicate under one metric, in solvable shape:
/// guards are pairwise exclusive, and every recursive case steps the same
/// driving argument down.
#[derive(Debug, Clone)]
pub struct Recurrence {
    pub sig: PredSig,
    pub metric: Metric,
    pub driver: Option<usize>,
    pub bases: Vec<BaseCase>,
    pub recs: Vec<RecCase>,
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bases {
            writeln!(f, "f = {}    when {}", b.cost, b.guard)?;
        }
        for r in &self.recs {
            let v = self.driver.map_or(0, |v| v + 1);
            writeln!(
                f,
                "f = {}*f[n{} - {}] + {}    when {}",
                r.factor, v, r.decrement, r.inhom, r.guard
            )?;
        }
        Ok(())
    }
}

/// Solves the recurrence: a closed form when it lies in the solvable
/// class, otherwise an exact evaluator over the same equations.
pub fn solve_recurrence(rec: &Recurrence) -> CostFunction {
    if rec.recs.is_empty() {
        if rec.bases.len() == 1 {
            return CostFunction::Closed(rec.bases[0].cost.clone());
        }
        if rec.bases.iter().all(|b| b.guard.is_always()) {
            let sum = rec
                .bases
                .iter()
                .fold(ClosedForm::zero(), |acc, b| acc.add(&b.cost));
            return CostFunction::Closed(sum);
        }
    } else if let Some(cf) = try_closed(rec) {
        return CostFunction::Closed(cf);
    }
    CostFunction::Evaluator(std::sync::Arc::new(RecurrenceEvaluator { rec: rec.clone() }))
}

fn rat_int(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

fn rat_pow(a: &BigRational, k: i64) -> Option<BigRational> {
    if !(0..=256).contains(&k) {
        return None;
    }
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= a;
    }
    Some(acc)
}

/// The inhomogeneous part split against the driver: `coeff_rest * n^pow *
/// base^n` where `coeff_rest` collects everything not involving the driver.
struct DriverTerm {
    pow: u32,
    base: BigUint,
    rest: ClosedForm,
}

fn split_driver(cf: &ClosedForm, v: usize) -> Vec<DriverTerm> {
    cf.terms()
        .iter()
        .map(|t| {
            let vf = t
                .factors
                .get(&v)
                .cloned()
                .unwrap_or(VarFactor { pow: 0, base: BigUint::one() });
            let mut factors = t.factors.clone();
            factors.remove(&v);
            let rest = ClosedForm::constant(t.coeff.clone()).mul(&cf_of_factors(&factors));
            DriverTerm { pow: vf.pow, base: vf.base, rest }
        })
        .collect()
}

fn cf_of_factors(factors: &std::collections::BTreeMap<usize, VarFactor>) -> ClosedForm {
    let mut acc = ClosedForm::one();
    for (u, f) in factors {
        if f.pow > 0 {
            acc = acc.mul(&ClosedForm::var(*u).pow(f.pow));
        }
        if !f.base.is_one() {
            acc = acc.mul(&ClosedForm::exp_var(*u, f.base.clone()));
        }
    }
    acc
}

fn cf_of_poly(coeffs: &[BigRational], v: usize) -> ClosedForm {
    let mut acc = ClosedForm::zero();
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc = acc.add(&ClosedForm::var(v).pow(i as u32).scale(c));
        }
    }
    acc
}

fn try_closed(rec: &Recurrence) -> Option<ClosedForm> {
    let v = rec.driver?;
    if rec.bases.len() != 1 || rec.recs.len() != 1 {
        return None;
    }
    let base = &rec.bases[0];
    let rc = &rec.recs[0];
    let n0 = base.guard.exact_on(v)?;
    let lo = rc.guard.lower_only_on(v)?;
    let d = rc.decrement;
    let a = &rc.factor;
    if d < 1 || !(n0 < lo && lo <= n0 + d) || !a.is_positive() {
        return None;
    }
    if base.cost.vars().contains(&v) {
        return None;
    }

    if a.is_one() {
        sum_closed(&base.cost, &rc.inhom, v, n0, d)
    } else if d == 1 {
        homogeneous_closed(&base.cost, &rc.inhom, a, v, n0)
    } else {
        None
    }
}

/// a = 1: `f(n) = B + sum of g(k)` over the lattice points after `n0`.
fn sum_closed(
    base: &ClosedForm,
    inhom: &ClosedForm,
    v: usize,
    n0: i64,
    d: i64,
) -> Option<ClosedForm> {
    if d > 1 {
        // Only a driver-independent inhomogeneity admits a closed sum on a
        // sparse lattice: f(n) = B + g * (n - n0)/d.
        if inhom.vars().contains(&v) {
            return None;
        }
        let steps = ClosedForm::var(v)
            .sub(&ClosedForm::from_int(n0))
            .scale(&BigRational::new(BigInt::one(), BigInt::from(d)));
        return Some(base.add(&inhom.mul(&steps)));
    }

    let mut acc = base.clone();
    for t in split_driver(inhom, v) {
        if t.base.is_one() {
            // sum of k^p for k in n0+1 ..= n, as S_p(n) - S_p(n0).
            let s = power_sum_poly(t.pow);
            let at_n0 = poly_eval(&s, &rat_int(n0));
            let part = cf_of_poly(&s, v).sub(&ClosedForm::constant(at_n0));
            acc = acc.add(&part.mul(&t.rest));
        } else if t.pow == 0 {
            // sum of b^k for k in n0+1 ..= n:  b/(b-1) * (b^n - b^n0).
            let b = BigRational::from_integer(BigInt::from(t.base.clone()));
            let scale = &b / (&b - BigRational::one());
            let bn0 = rat_pow(&b, n0)?;
            let part = ClosedForm::exp_var(v, t.base.clone())
                .sub(&ClosedForm::constant(bn0))
                .scale(&scale);
            acc = acc.add(&part.mul(&t.rest));
        } else {
            return None;
        }
    }
    Some(acc)
}

/// a != 1, d = 1: homogeneous `C * a^n` plus a particular solution.
fn homogeneous_closed(
    base: &ClosedForm,
    inhom: &ClosedForm,
    a: &BigRational,
    v: usize,
    n0: i64,
) -> Option<ClosedForm> {
    // a^n is representable only with an integer base.
    if !a.is_integer() {
        return None;
    }
    let a_base = a.to_integer().to_biguint()?;

    let mut particular = ClosedForm::zero();
    for t in split_driver(inhom, v) {
        if t.base.is_one() {
            let q = particular_poly(a, t.pow);
            particular = particular.add(&cf_of_poly(&q, v).mul(&t.rest));
        } else if t.pow == 0 {
            let b = BigRational::from_integer(BigInt::from(t.base.clone()));
            if &b == a {
                // Resonant case b = a has no solution of this shape.
                return None;
            }
            let gamma = &b / (&b - a);
            let part = ClosedForm::exp_var(v, t.base.clone()).scale(&gamma);
            particular = particular.add(&part.mul(&t.rest));
        } else {
            return None;
        }
    }

    let q_n0 = particular
        .subst_var(v, SubstVal::Affine(Affine::constant(n0)))
        .ok()?;
    let a_n0 = rat_pow(a, n0)?;
    let c_coeff = base.sub(&q_n0).scale(&a_n0.recip());
    Some(c_coeff.mul(&ClosedForm::exp_var(v, a_base)).add(&particular))
}

/// Coefficients of q with q(n) - a*q(n-1) = n^p, solved from the top
/// degree down.
fn particular_poly(a: &BigRational, p: u32) -> Vec<BigRational> {
    let one_minus_a = BigRational::one() - a;
    let mut q = vec![BigRational::zero(); p as usize + 1];
    q[p as usize] = one_minus_a.recip();
    for j in (0..p).rev() {
        let mut s = BigRational::zero();
        for i in (j + 1)..=p {
            let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
            s += q[i as usize].clone()
                * BigRational::from_integer(binom(i, j) * BigInt::from(sign));
        }
        q[j as usize] = a * s / &one_minus_a;
    }
    q
}

fn binom(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Coefficients of the polynomial S_p with S_p(m) = sum of k^p for
/// k = 1..m, found by interpolating brute-force prefix sums.
pub fn power_sum_poly(p: u32) -> Vec<BigRational> {
    let deg = p as usize + 1;
    let mut points = Vec::with_capacity(deg + 1);
    let mut sum = BigInt::zero();
    points.push((0i64, BigRational::zero()));
    for m in 1..=(deg as i64) {
        sum += BigInt::from(m).pow(p);
        points.push((m, BigRational::from_integer(sum.clone())));
    }
    lagrange(&points)
}

fn lagrange(points: &[(i64, BigRational)]) -> Vec<BigRational> {
    let mut acc = vec![BigRational::zero(); points.len()];
    for (j, (xj, yj)) in points.iter().enumerate() {
        let mut numer = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (k, (xk, _)) in points.iter().enumerate() {
            if k == j {
                continue;
            }
            numer = poly_mul_linear(&numer, -rat_int(*xk));
            denom *= rat_int(xj - xk);
        }
        let w = yj / denom;
        for (i, c) in numer.into_iter().enumerate() {
            acc[i] += c * &w;
        }
    }
    while matches!(acc.last(), Some(c) if c.is_zero()) {
        acc.pop();
    }
    acc
}

/// Multiplies a polynomial by (x + shift).
fn poly_mul_linear(p: &[BigRational], shift: BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] += c * &shift;
    }
    out
}

fn poly_eval(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Resolves the recurrence numerically: walks the driver down to an
/// applicable base case, then folds the chain back up. Linear in the
/// chain length, no recursion.
#[derive(Debug)]
pub struct RecurrenceEvaluator {
    rec: Recurrence,
}

const MAX_CHAIN: usize = 1_000_000;

impl CostEvaluator for RecurrenceEvaluator {
    fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
        let rec = &self.rec;
        let mut now: Vec<Option<i64>> = sizes.to_vec();
        let mut chain: Vec<(usize, i64)> = Vec::new();

        let mut acc = 'descend: loop {
            for b in &rec.bases {
                if b.guard.holds(&now)? {
                    break 'descend b.cost.eval(&now)?;
                }
            }
            let v = match rec.driver {
                Some(v) => v,
                None => {
                    return Err(EvalError::NoApplicableClause {
                        pred: rec.sig.clone(),
                        sizes: now,
                    })
                }
            };
            let mut stepped = false;
            for (i, rc) in rec.recs.iter().enumerate() {
                if rc.guard.holds(&now)? {
                    let n = now
                        .get(v)
                        .copied()
                        .flatten()
                        .ok_or(EvalError::MissingSize { pos: v })?;
                    chain.push((i, n));
                    now[v] = Some(n - rc.decrement);
                    stepped = true;
                    break;
                }
            }
            if !stepped {
                return Err(EvalError::NoApplicableClause {
                    pred: rec.sig.clone(),
                    sizes: now,
                });
            }
            if chain.len() > MAX_CHAIN {
                return Err(EvalError::DepthExceeded {
                    pred: rec.sig.clone(),
                });
            }
        };

        let v = rec.driver.unwrap_or(0);
        for (i, n) in chain.into_iter().rev() {
            let rc = &rec.recs[i];
            now[v] = Some(n);
            acc = &rc.factor * acc + rc.inhom.eval(&now)?;
        }
        Ok(acc)
    }

    fn describe(&self) -> String {
        format!("<recurrence evaluation for {}>", self.rec.sig)
    }
}
