//! Bundled evaluation benchmarks.
//!
//! Six classic deterministic programs with analyzable costs: list
//! concatenation, naive reversal, towers of Hanoi, palindrome checking,
//! powerset construction, and polynomial evaluation. Each carries a seeded
//! input generator producing goals that are guaranteed to succeed, so they
//! can be timed as well as counted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::parse_program;
use crate::lang::program::Program;
use crate::lang::term::{PredSig, Term, Var};

pub struct Benchmark {
    pub id: &'static str,
    pub program: Program,
    pub entry: PredSig,
    /// Input size used by the evaluation protocol.
    pub default_size: i64,
    gen: fn(i64, u64) -> Vec<Term>,
    sizes: fn(i64) -> Vec<Option<i64>>,
}

impl Benchmark {
    /// A succeeding goal for one input of size `n`.
    pub fn goal(&self, n: i64, seed: u64) -> Vec<Term> {
        (self.gen)(n, seed)
    }

    /// Size tuple matching `goal(n, _)` for cost evaluation.
    pub fn size_args(&self, n: i64) -> Vec<Option<i64>> {
        (self.sizes)(n)
    }
}

fn int_list(rng: &mut ChaCha8Rng, n: i64) -> Term {
    Term::list((0..n.max(0)).map(|_| Term::Int(rng.gen_range(0..100))).collect())
}

fn out_var() -> Term {
    Term::Var(Var::new(0, "Out"))
}

fn append_goal(n: i64, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = int_list(&mut rng, n);
    let ys = int_list(&mut rng, n);
    vec![Term::comp("app", vec![xs, ys, out_var()])]
}

fn nrev_goal(n: i64, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = int_list(&mut rng, n);
    vec![Term::comp("nrev", vec![xs, out_var()])]
}

/// Hanoi's input is the disk count itself; the seed plays no part.
fn hanoi_goal(n: i64, _seed: u64) -> Vec<Term> {
    vec![Term::comp(
        "hanoi",
        vec![
            Term::Int(n.max(1)),
            Term::atom("left"),
            Term::atom("mid"),
            Term::atom("right"),
        ],
    )]
}

/// Palindromes by construction: a random half mirrored around the middle.
fn palind_goal(n: i64, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.max(0) as usize;
    let half: Vec<i64> = (0..n.div_ceil(2)).map(|_| rng.gen_range(0..100)).collect();
    let mut items: Vec<i64> = half.clone();
    items.extend(half.iter().take(n / 2).rev());
    vec![Term::comp(
        "palind",
        vec![Term::list(items.into_iter().map(Term::Int).collect())],
    )]
}

fn powset_goal(n: i64, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = int_list(&mut rng, n);
    vec![Term::comp("powset", vec![xs, out_var()])]
}

/// Coefficients stay under 100 and the point is fixed at 2, so evaluation
/// never overflows for any size this suite uses.
fn evpol_goal(n: i64, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = int_list(&mut rng, n);
    vec![Term::comp("evpol", vec![coeffs, Term::Int(2), out_var()])]
}

fn first_size(n: i64) -> Vec<Option<i64>> {
    vec![Some(n), None]
}

const APPEND_SRC: &str = "
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(app/3).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

const NREV_SRC: &str = "
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

const HANOI_SRC: &str = "
:- mode(hanoi/4, [in, in, in, in]).
:- measure(hanoi/4, [int, void, void, void]).
:- entry(hanoi/4).
hanoi(1, _, _, _).
hanoi(N, A, B, C) :- N > 1, N1 is N - 1, hanoi(N1, A, C, B), hanoi(N1, A, B, C).
";

const PALIND_SRC: &str = "
:- mode(palind/1, [in]).
:- measure(palind/1, [length]).
:- mode(nrev/2, [in, out]).
:- measure(nrev/2, [length, void]).
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- mode(eqlist/2, [in, in]).
:- measure(eqlist/2, [length, void]).
:- entry(palind/1).
:- size(nrev/2, 2, 2, 1, n1 - 1).
palind(L) :- nrev(L, R), eqlist(L, R).
nrev([], []).
nrev([X|Xs], R) :- nrev(Xs, R1), app(R1, [X], R).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
eqlist([], []).
eqlist([X|Xs], [Y|Ys]) :- X =:= Y, eqlist(Xs, Ys).
";

const POWSET_SRC: &str = "
:- mode(powset/2, [in, out]).
:- measure(powset/2, [length, void]).
:- mode(addx/3, [in, in, out]).
:- measure(addx/3, [void, length, void]).
:- mode(app/3, [in, in, out]).
:- measure(app/3, [length, length, void]).
:- entry(powset/2).
:- size(powset/2, 2, 2, 2, 2^(n1 - 1)).
:- size(powset/2, 2, 3, 1, 2^(n1 - 1)).
powset([], [[]]).
powset([X|Xs], P) :- powset(Xs, P1), addx(X, P1, P2), app(P1, P2, P).
addx(_, [], []).
addx(X, [P|Ps], [[X|P]|Rs]) :- addx(X, Ps, Rs).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

const EVPOL_SRC: &str = "
:- mode(evpol/3, [in, in, out]).
:- measure(evpol/3, [length, void, void]).
:- entry(evpol/3).
evpol([], _, 0).
evpol([C|Cs], X, R) :- evpol(Cs, X, R1), R is R1 * X + C.
";

/// The six evaluation benchmarks with their default protocol sizes.
pub fn bundled_benchmarks() -> Vec<Benchmark> {
    let build = |id: &'static str,
                 src: &str,
                 entry: PredSig,
                 default_size: i64,
                 gen: fn(i64, u64) -> Vec<Term>,
                 sizes: fn(i64) -> Vec<Option<i64>>| {
        let program = parse_program(src).unwrap_or_else(|d| {
            panic!("bundled benchmark `{id}` fails to parse: {d:?}")
        });
        Benchmark {
            id,
            program,
            entry,
            default_size,
            gen,
            sizes,
        }
    };
    vec![
        build(
            "append",
            APPEND_SRC,
            PredSig::new("app", 3),
            30,
            append_goal,
            |n| vec![Some(n), Some(n), None],
        ),
        build(
            "nrev",
            NREV_SRC,
            PredSig::new("nrev", 2),
            30,
            nrev_goal,
            first_size,
        ),
        build(
            "hanoi",
            HANOI_SRC,
            PredSig::new("hanoi", 4),
            12,
            hanoi_goal,
            |n| vec![Some(n), None, None, None],
        ),
        build(
            "palind",
            PALIND_SRC,
            PredSig::new("palind", 1),
            30,
            palind_goal,
            |n| vec![Some(n)],
        ),
        build(
            "powset",
            POWSET_SRC,
            PredSig::new("powset", 2),
            8,
            powset_goal,
            first_size,
        ),
        build(
            "evpol",
            EVPOL_SRC,
            PredSig::new("evpol", 3),
            30,
            evpol_goal,
            |n| vec![Some(n), None, None],
        ),
    ]
}

pub fn find_benchmark(id: &str) -> Option<Benchmark> {
    bundled_benchmarks().into_iter().find(|b| b.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vm::{solve, Outcome};

    #[test]
    fn all_benchmarks_build_and_succeed_at_small_sizes() {
        for b in bundled_benchmarks() {
            let n = match b.id {
                "hanoi" => 3,
                "powset" => 4,
                _ => 5,
            };
            let report = solve(&b.program, &b.goal(n, 123)).unwrap();
            assert_eq!(report.outcome, Outcome::Success, "{} fails", b.id);
        }
    }

    #[test]
    fn palindrome_inputs_are_palindromes() {
        for n in [0_i64, 1, 2, 7, 8] {
            let goal = palind_goal(n, 5);
            let Term::Comp(_, args) = &goal[0] else { panic!() };
            let mut items = Vec::new();
            let mut cur = &args[0];
            while let Term::Comp(f, cell) = cur {
                assert_eq!(f.as_str(), ".");
                items.push(cell[0].clone());
                cur = &cell[1];
            }
            let mut rev = items.clone();
            rev.reverse();
            assert_eq!(items, rev, "length {n} input is not a palindrome");
            assert_eq!(items.len() as i64, n);
        }
    }

    #[test]
    fn goals_are_deterministic_in_the_seed() {
        for b in bundled_benchmarks() {
            assert_eq!(b.goal(6, 9), b.goal(6, 9), "{} varies", b.id);
        }
    }
}
