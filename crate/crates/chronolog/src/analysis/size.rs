//! Size expressions over input-size variables, and term measures.
//!
//! A size expression denotes a natural number once every size variable it
//! mentions is bound. Variables are argument positions (0-based); `n1` in
//! source syntax is position 0.

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis::error::{EvalError, MeasureError};
use crate::lang::program::Measure;
use crate::lang::term::Term;
use crate::lang::validate::parse_size_var;

/// Affine combination of size variables with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub konst: i64,
    pub coeffs: BTreeMap<usize, i64>,
}

impl Affine {
    pub fn constant(c: i64) -> Self {
        Affine { konst: c, coeffs: BTreeMap::new() }
    }

    pub fn var(pos: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(pos, 1);
        Affine { konst: 0, coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Identity on a single position: the expression `n_pos`.
    pub fn is_identity_of(&self, pos: usize) -> bool {
        self.konst == 0 && self.coeffs.len() == 1 && self.coeffs.get(&pos) == Some(&1)
    }

    /// Writes the expression as `n_pos + c` if it has that shape.
    pub fn as_shift_of(&self, pos: usize) -> Option<i64> {
        if self.coeffs.len() == 1 && self.coeffs.get(&pos) == Some(&1) {
            Some(self.konst)
        } else {
            None
        }
    }

    fn combine(mut self, other: &Affine, sign: i64) -> Affine {
        self.konst += sign * other.konst;
        for (v, c) in &other.coeffs {
            let e = self.coeffs.entry(*v).or_insert(0);
            *e += sign * c;
            if *e == 0 {
                self.coeffs.remove(v);
            }
        }
        self
    }

    pub fn scale(mut self, k: i64) -> Affine {
        if k == 0 {
            return Affine::constant(0);
        }
        self.konst *= k;
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self
    }

    pub fn eval(&self, sizes: &[Option<i64>]) -> Result<i64, EvalError> {
        let mut acc = self.konst;
        for (v, c) in &self.coeffs {
            let n = sizes
                .get(*v)
                .copied()
                .flatten()
                .ok_or(EvalError::MissingSize { pos: *v })?;
            acc = acc
                .checked_add(c.checked_mul(n).ok_or(EvalError::Overflow)?)
                .ok_or(EvalError::Overflow)?;
        }
        Ok(acc)
    }
}

/// Size expression tree. `Var(i)` is the size of input argument `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeExpr {
    Const(i64),
    Var(usize),
    Add(Box<SizeExpr>, Box<SizeExpr>),
    Sub(Box<SizeExpr>, Box<SizeExpr>),
    Mul(Box<SizeExpr>, Box<SizeExpr>),
    Max(Box<SizeExpr>, Box<SizeExpr>),
    Pow(Box<SizeExpr>, Box<SizeExpr>),
}

impl SizeExpr {
    /// Converts a parsed term into a size expression. Accepts integers,
    /// `n1`-style size atoms, `+ - * ^` and `max/2`.
    pub fn from_term(t: &Term) -> Result<SizeExpr, String> {
        match t {
            Term::Int(i) => Ok(SizeExpr::Const(*i)),
            Term::Atom(s) => parse_size_var(s.as_str())
                .map(SizeExpr::Var)
                .ok_or_else(|| format!("`{}` is not a size variable (expected n1, n2, ...)", s)),
            Term::Comp(f, args) if args.len() == 2 => {
                let a = Box::new(SizeExpr::from_term(&args[0])?);
                let b = Box::new(SizeExpr::from_term(&args[1])?);
                match f.as_str() {
                    "+" => Ok(SizeExpr::Add(a, b)),
                    "-" => Ok(SizeExpr::Sub(a, b)),
                    "*" => Ok(SizeExpr::Mul(a, b)),
                    "^" => Ok(SizeExpr::Pow(a, b)),
                    "max" => Ok(SizeExpr::Max(a, b)),
                    other => Err(format!("operator `{}` not allowed in size expressions", other)),
                }
            }
            Term::Comp(f, args) if f.as_str() == "-" && args.len() == 1 => {
                let inner = SizeExpr::from_term(&args[0])?;
                Ok(SizeExpr::Sub(Box::new(SizeExpr::Const(0)), Box::new(inner)))
            }
            Term::Var(v) => Err(format!(
                "logic variable {} not allowed in size expressions",
                v.name
            )),
            other => Err(format!(
                "`{}` not allowed in size expressions",
                crate::lang::pretty::term_to_string(other)
            )),
        }
    }

    pub fn eval(&self, sizes: &[Option<i64>]) -> Result<i64, EvalError> {
        match self {
            SizeExpr::Const(c) => Ok(*c),
            SizeExpr::Var(v) => sizes
                .get(*v)
                .copied()
                .flatten()
                .ok_or(EvalError::MissingSize { pos: *v }),
            SizeExpr::Add(a, b) => a.eval(sizes)?.checked_add(b.eval(sizes)?).ok_or(EvalError::Overflow),
            SizeExpr::Sub(a, b) => a.eval(sizes)?.checked_sub(b.eval(sizes)?).ok_or(EvalError::Overflow),
            SizeExpr::Mul(a, b) => a.eval(sizes)?.checked_mul(b.eval(sizes)?).ok_or(EvalError::Overflow),
            SizeExpr::Max(a, b) => Ok(a.eval(sizes)?.max(b.eval(sizes)?)),
            SizeExpr::Pow(a, b) => {
                let base = a.eval(sizes)?;
                let exp = b.eval(sizes)?;
                if exp < 0 {
                    return Err(EvalError::NegativeExponent);
                }
                let exp = u32::try_from(exp).map_err(|_| EvalError::Overflow)?;
                base.checked_pow(exp).ok_or(EvalError::Overflow)
            }
        }
    }

    /// Affine view, if the expression is affine in the size variables.
    pub fn to_affine(&self) -> Option<Affine> {
        match self {
            SizeExpr::Const(c) => Some(Affine::constant(*c)),
            SizeExpr::Var(v) => Some(Affine::var(*v)),
            SizeExpr::Add(a, b) => Some(a.to_affine()?.combine(&b.to_affine()?, 1)),
            SizeExpr::Sub(a, b) => Some(a.to_affine()?.combine(&b.to_affine()?, -1)),
            SizeExpr::Mul(a, b) => match (a.to_affine(), b.to_affine()) {
                (Some(x), Some(y)) if y.is_constant() => Some(x.scale(y.konst)),
                (Some(x), Some(y)) if x.is_constant() => Some(y.scale(x.konst)),
                _ => None,
            },
            SizeExpr::Pow(_, _) | SizeExpr::Max(_, _) => None,
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            SizeExpr::Const(_) => {}
            SizeExpr::Var(v) => out.push(*v),
            SizeExpr::Add(a, b)
            | SizeExpr::Sub(a, b)
            | SizeExpr::Mul(a, b)
            | SizeExpr::Max(a, b)
            | SizeExpr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn level(&self) -> u8 {
        match self {
            SizeExpr::Add(_, _) | SizeExpr::Sub(_, _) => 1,
            SizeExpr::Mul(_, _) => 2,
            SizeExpr::Pow(_, _) => 3,
            SizeExpr::Max(_, _) | SizeExpr::Const(_) | SizeExpr::Var(_) => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let lv = self.level();
        let parens = lv < min || (matches!(self, SizeExpr::Const(c) if *c < 0) && min > 1);
        if parens {
            write!(f, "(")?;
        }
        match self {
            SizeExpr::Const(c) => write!(f, "{}", c)?,
            SizeExpr::Var(v) => write!(f, "n{}", v + 1)?,
            SizeExpr::Add(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " + ")?;
                b.fmt_at(f, 2)?;
            }
            SizeExpr::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " - ")?;
                b.fmt_at(f, 2)?;
            }
            SizeExpr::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "*")?;
                b.fmt_at(f, 3)?;
            }
            SizeExpr::Pow(a, b) => {
                a.fmt_at(f, 4)?;
                write!(f, "^")?;
                b.fmt_at(f, 4)?;
            }
            SizeExpr::Max(a, b) => {
                write!(f, "max(")?;
                a.fmt_at(f, 1)?;
                write!(f, ", ")?;
                b.fmt_at(f, 1)?;
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for SizeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Measures a concrete term under the given measure.
pub fn measure_term(t: &Term, m: Measure) -> Result<i64, MeasureError> {
    match m {
        Measure::Length => t.list_len().map(|n| n as i64).ok_or(MeasureError::NotAList),
        Measure::Size => {
            if t.is_ground() {
                Ok(t.symbol_count() as i64)
            } else {
                Err(MeasureError::NotGround)
            }
        }
        Measure::Depth => {
            if t.is_ground() {
                Ok(t.depth() as i64)
            } else {
                Err(MeasureError::NotGround)
            }
        }
        Measure::Int => match t {
            Term::Int(i) if *i >= 0 => Ok(*i),
            Term::Int(_) => Err(MeasureError::NegativeInt),
            _ => Err(MeasureError::NotAnInt),
        },
        Measure::Void => Err(MeasureError::Void),
    }
}

/// Measure of a clause-head pattern that holds for every instance of the
/// pattern, when one exists. Lists with variable elements still have a fixed
/// length; terms with variables anywhere have no fixed symbol count or depth.
pub fn static_measure(t: &Term, m: Measure) -> Option<i64> {
    match m {
        Measure::Length => t.list_len().map(|n| n as i64),
        Measure::Size if t.is_ground() => Some(t.symbol_count() as i64),
        Measure::Depth if t.is_ground() => Some(t.depth() as i64),
        Measure::Int => match t {
            Term::Int(i) if *i >= 0 => Some(*i),
            _ => None,
        },
        _ => None,
    }
}

/// Lower bound on the measure of any instance of a pattern, with a flag
/// saying whether the bound is tight. Used for clause-selection guards.
pub fn measure_bound(t: &Term, m: Measure) -> Option<(i64, bool)> {
    match m {
        Measure::Length => {
            let (len, tail) = t.spine();
            match tail {
                Term::Atom(a) if a.as_str() == crate::lang::term::LIST_NIL => {
                    Some((len as i64, true))
                }
                Term::Var(_) if len > 0 => Some((len as i64, false)),
                _ => None,
            }
        }
        Measure::Size => match t {
            Term::Var(_) => None,
            _ => Some((t.symbol_count() as i64, t.is_ground())),
        },
        Measure::Depth => match t {
            Term::Var(_) => None,
            _ => Some((t.depth() as i64, t.is_ground())),
        },
        Measure::Int => match t {
            Term::Int(i) if *i >= 0 => Some((*i, true)),
            _ => None,
        },
        Measure::Void => None,
    }
}
