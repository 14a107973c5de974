//! Static counting of arithmetic-operator evaluations.
//!
//! When `X is E` runs, the interpreter evaluates every operator node in `E`
//! exactly once. The count of `op` nodes is therefore known statically as
//! long as the variables in `E` are bound to numbers at call time, which the
//! analyzed programs guarantee.

use std::collections::BTreeMap;

use crate::lang::builtins::is_arith_op;
use crate::lang::term::{PredSig, Term};

/// Number of times `op` is applied when evaluating `expr`.
pub fn ev_cost(op: &PredSig, expr: &Term) -> Result<u64, String> {
    match expr {
        Term::Var(_) | Term::Int(_) | Term::Float(_) | Term::Atom(_) => Ok(0),
        Term::Comp(f, args) => {
            let sig = PredSig {
                name: f.clone(),
                arity: args.len(),
            };
            if !is_arith_op(&sig) {
                return Err(format!("{} is not an arithmetic operator", sig));
            }
            let mut n = if sig == *op { 1 } else { 0 };
            for a in args {
                n += ev_cost(op, a)?;
            }
            Ok(n)
        }
    }
}

/// Counts every operator in `expr` in one walk.
pub fn count_arith_ops(expr: &Term, acc: &mut BTreeMap<PredSig, u64>) -> Result<(), String> {
    match expr {
        Term::Var(_) | Term::Int(_) | Term::Float(_) | Term::Atom(_) => Ok(()),
        Term::Comp(f, args) => {
            let sig = PredSig {
                name: f.clone(),
                arity: args.len(),
            };
            if !is_arith_op(&sig) {
                return Err(format!("{} is not an arithmetic operator", sig));
            }
            *acc.entry(sig).or_insert(0) += 1;
            for a in args {
                count_arith_ops(a, acc)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn expr(src: &str) -> Term {
        let (goals, _) = crate::lang::parse_goal(&format!("q({})", src)).unwrap();
        match goals.into_iter().next().unwrap() {
            Term::Comp(_, args) => args.into_iter().next().unwrap(),
            _ => unreachable!(),
        }
    }

    fn sig(name: &str, arity: usize) -> PredSig {
        PredSig::new(name, arity)
    }

    /// Independent count: walk every subterm, count roots equal to `op`.
    fn subterm_count(op: &PredSig, t: &Term) -> u64 {
        let mut n = 0;
        t.visit(&mut |s| {
            if let Term::Comp(f, args) = s {
                if f.as_str() == op.name.as_str() && args.len() == op.arity {
                    n += 1;
                }
            }
        });
        n
    }

    #[test]
    fn known_counts() {
        assert_eq!(ev_cost(&sig("+", 2), &expr("3")).unwrap(), 0);
        assert_eq!(ev_cost(&sig("+", 2), &expr("(1 + 2) + X")).unwrap(), 2);
        assert_eq!(ev_cost(&sig("*", 2), &expr("(1 + 2) + X")).unwrap(), 0);
        assert_eq!(ev_cost(&sig("-", 2), &expr("X - Y - 1")).unwrap(), 2);
        assert!(ev_cost(&sig("+", 2), &expr("f(1, 2)")).is_err());
    }

    #[test]
    fn unary_and_binary_minus_are_distinct() {
        // -(X) - Y: one -/1, one -/2. A bare negative literal is just a
        // constant, not an application.
        let t = Term::comp(
            "-",
            vec![Term::comp("-", vec![expr("X")]), expr("Y")],
        );
        assert_eq!(ev_cost(&sig("-", 1), &t).unwrap(), 1);
        assert_eq!(ev_cost(&sig("-", 2), &t).unwrap(), 1);
        assert_eq!(ev_cost(&sig("-", 1), &expr("-3")).unwrap(), 0);
    }

    #[test]
    fn matches_subterm_walk_on_random_expressions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let ops: Vec<(&str, usize)> = crate::lang::builtins::ARITH_OPS.to_vec();
        for _ in 0..50 {
            let t = random_expr(&mut rng, 4);
            let mut all = BTreeMap::new();
            count_arith_ops(&t, &mut all).unwrap();
            for &(name, arity) in &ops {
                let op = sig(name, arity);
                let direct = ev_cost(&op, &t).unwrap();
                assert_eq!(direct, subterm_count(&op, &t));
                assert_eq!(direct, all.get(&op).copied().unwrap_or(0));
            }
        }
    }

    fn random_expr(rng: &mut impl Rng, depth: u32) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            return if rng.gen_bool(0.5) {
                Term::Int(rng.gen_range(-9..10))
            } else {
                Term::Var(crate::lang::term::Var::new(rng.gen_range(0..4), "V"))
            };
        }
        let table = crate::lang::builtins::ARITH_OPS;
        let (name, arity) = table[rng.gen_range(0..table.len())];
        let args = (0..arity).map(|_| random_expr(rng, depth - 1)).collect();
        Term::comp(name, args)
    }
}
