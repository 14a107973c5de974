//! Closed-form cost expressions.
//!
//! A closed form is a finite sum of terms
//!
//! ```text
//!     c  *  prod over v of  n_v^p_v * b_v^n_v
//! ```
//!
//! with rational `c`, natural powers `p_v`, and integer bases `b_v >= 1`.
//! This class is closed under addition, multiplication, and substitution of
//! affine (and exponential-of-affine) size expressions, which is what the
//! recurrence solver needs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::traits::Pow;
use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::analysis::error::EvalError;
use crate::analysis::size::{Affine, SizeExpr};

/// Per-variable factor `n^pow * base^n`. Never both trivial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarFactor {
    pub pow: u32,
    pub base: BigUint,
}

impl VarFactor {
    fn is_trivial(&self) -> bool {
        self.pow == 0 && self.base.is_one()
    }
}

type Factors = BTreeMap<usize, VarFactor>;

/// One additive term of a closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct CfTerm {
    pub coeff: BigRational,
    pub factors: Factors,
}

/// Substitution value for a size variable.
#[derive(Debug, Clone, PartialEq)]
pub enum SubstVal {
    Affine(Affine),
    /// `base ^ affine` with `base >= 1`.
    Exp { base: BigUint, affine: Affine },
}

impl SubstVal {
    pub fn from_size_expr(e: &SizeExpr) -> Option<SubstVal> {
        if let Some(a) = e.to_affine() {
            return Some(SubstVal::Affine(a));
        }
        if let SizeExpr::Pow(base, exp) = e {
            if let (SizeExpr::Const(b), Some(a)) = (base.as_ref(), exp.to_affine()) {
                if *b >= 1 {
                    return Some(SubstVal::Exp {
                        base: BigUint::from(*b as u64),
                        affine: a,
                    });
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedForm {
    terms: Vec<CfTerm>,
}

fn rat_int(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

/// `base^k` for integer `k`, as a rational (negative `k` gives a fraction).
fn base_pow_i64(base: &BigUint, k: i64) -> BigRational {
    let b = BigInt::from(base.clone());
    if k >= 0 {
        BigRational::from_integer(b.pow(k as u64))
    } else {
        BigRational::new(BigInt::one(), b.pow(k.unsigned_abs()))
    }
}

impl ClosedForm {
    pub fn zero() -> Self {
        ClosedForm { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut cf = ClosedForm::zero();
        if !c.is_zero() {
            cf.terms.push(CfTerm {
                coeff: c,
                factors: Factors::new(),
            });
        }
        cf
    }

    pub fn from_int(i: i64) -> Self {
        Self::constant(rat_int(i))
    }

    /// The single variable `n_pos`.
    pub fn var(pos: usize) -> Self {
        let mut factors = Factors::new();
        factors.insert(
            pos,
            VarFactor {
                pow: 1,
                base: BigUint::one(),
            },
        );
        ClosedForm {
            terms: vec![CfTerm {
                coeff: BigRational::one(),
                factors,
            }],
        }
    }

    /// The exponential `base^(n_pos)`.
    pub fn exp_var(pos: usize, base: BigUint) -> Self {
        if base.is_one() {
            return Self::one();
        }
        let mut factors = Factors::new();
        factors.insert(pos, VarFactor { pow: 0, base });
        ClosedForm {
            terms: vec![CfTerm {
                coeff: BigRational::one(),
                factors,
            }],
        }
    }

    pub fn terms(&self) -> &[CfTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.factors.is_empty())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            Some(BigRational::zero())
        } else if self.terms.len() == 1 && self.terms[0].factors.is_empty() {
            Some(self.terms[0].coeff.clone())
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.keys().copied())
            .collect()
    }

    fn normalize(raw: Vec<CfTerm>) -> ClosedForm {
        let mut acc: BTreeMap<Factors, BigRational> = BTreeMap::new();
        for mut t in raw {
            t.factors.retain(|_, f| !f.is_trivial());
            let e = acc.entry(t.factors).or_insert_with(BigRational::zero);
            *e += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coeff)| CfTerm { coeff, factors })
            .collect();
        ClosedForm { terms }
    }

    pub fn add(&self, other: &ClosedForm) -> ClosedForm {
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().cloned());
        Self::normalize(raw)
    }

    pub fn neg(&self) -> ClosedForm {
        ClosedForm {
            terms: self
                .terms
                .iter()
                .map(|t| CfTerm {
                    coeff: -t.coeff.clone(),
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &ClosedForm) -> ClosedForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> ClosedForm {
        if k.is_zero() {
            return Self::zero();
        }
        ClosedForm {
            terms: self
                .terms
                .iter()
                .map(|t| CfTerm {
                    coeff: &t.coeff * k,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &ClosedForm) -> ClosedForm {
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                for (v, fb) in &b.factors {
                    match factors.get_mut(v) {
                        Some(fa) => {
                            fa.pow += fb.pow;
                            fa.base = &fa.base * &fb.base;
                        }
                        None => {
                            factors.insert(*v, fb.clone());
                        }
                    }
                }
                raw.push(CfTerm {
                    coeff: &a.coeff * &b.coeff,
                    factors,
                });
            }
        }
        Self::normalize(raw)
    }

    pub fn pow(&self, k: u32) -> ClosedForm {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Highest power of `n_v` across terms.
    pub fn degree_of(&self, v: usize) -> u32 {
        self.terms
            .iter()
            .filter_map(|t| t.factors.get(&v).map(|f| f.pow))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, sizes: &[Option<i64>]) -> Result<BigRational, EvalError> {
        let mut total = BigRational::zero();
        for t in &self.terms {
            let mut val = t.coeff.clone();
            for (v, f) in &t.factors {
                let n = sizes
                    .get(*v)
                    .copied()
                    .flatten()
                    .ok_or(EvalError::MissingSize { pos: *v })?;
                if f.pow > 0 {
                    val *= BigRational::from_integer(BigInt::from(n).pow(f.pow));
                }
                if !f.base.is_one() {
                    if n < 0 {
                        return Err(EvalError::NegativeExponent);
                    }
                    val *= BigRational::from_integer(BigInt::from(f.base.clone()).pow(n as u64));
                }
            }
            total += val;
        }
        Ok(total)
    }

    /// Expands `base ^ affine` into a closed form. Every variable coefficient
    /// in the affine must be nonnegative; the representation has no
    /// `1/base^n` factors.
    fn exp_of_affine(base: &BigUint, a: &Affine) -> Result<ClosedForm, String> {
        if base.is_one() {
            return Ok(Self::one());
        }
        let mut factors = Factors::new();
        for (v, c) in &a.coeffs {
            if *c < 0 {
                return Err(format!(
                    "exponential with negative coefficient on n{} is not representable",
                    v + 1
                ));
            }
            if *c == 0 {
                continue;
            }
            factors.insert(
                *v,
                VarFactor {
                    pow: 0,
                    base: Pow::pow(base, *c as u64),
                },
            );
        }
        Ok(ClosedForm {
            terms: vec![CfTerm {
                coeff: base_pow_i64(base, a.konst),
                factors,
            }],
        })
    }

    fn affine_cf(a: &Affine) -> ClosedForm {
        let mut cf = Self::from_int(a.konst);
        for (v, c) in &a.coeffs {
            cf = cf.add(&Self::var(*v).scale(&rat_int(*c)));
        }
        cf
    }

    /// Substitutes a value for every variable this form mentions. `args`
    /// is indexed by variable; a mentioned variable with no value is an
    /// error (the caller could not express that argument's size).
    pub fn subst_all(&self, args: &[Option<SubstVal>]) -> Result<ClosedForm, String> {
        let mut out = Self::zero();
        for t in &self.terms {
            let mut acc = Self::constant(t.coeff.clone());
            for (v, f) in &t.factors {
                let sub = args.get(*v).and_then(|s| s.as_ref()).ok_or_else(|| {
                    format!("size of argument {} is needed but not expressible", v + 1)
                })?;
                let expanded = match sub {
                    SubstVal::Affine(a) => {
                        let poly = Self::affine_cf(a).pow(f.pow);
                        let exp = Self::exp_of_affine(&f.base, a)?;
                        poly.mul(&exp)
                    }
                    SubstVal::Exp { base, affine } => {
                        if !f.base.is_one() {
                            return Err(
                                "doubly exponential size is not representable".to_string()
                            );
                        }
                        Self::exp_of_affine(base, &affine.clone().scale(f.pow as i64))?
                    }
                };
                acc = acc.mul(&expanded);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn subst_var(&self, v: usize, val: SubstVal) -> Result<ClosedForm, String> {
        let mut args: Vec<Option<SubstVal>> = vec![None; v + 1];
        for u in self.vars() {
            if u != v {
                if args.len() <= u {
                    args.resize(u + 1, None);
                }
                args[u] = Some(SubstVal::Affine(Affine::var(u)));
            }
        }
        args[v] = Some(val);
        self.subst_all(&args)
    }

    /// Converts a size expression when it lies in the closed-form class
    /// (no `max`, exponentials only with constant base and affine exponent).
    pub fn from_size_expr(e: &SizeExpr) -> Option<ClosedForm> {
        match e {
            SizeExpr::Const(c) => Some(Self::from_int(*c)),
            SizeExpr::Var(v) => Some(Self::var(*v)),
            SizeExpr::Add(a, b) => Some(Self::from_size_expr(a)?.add(&Self::from_size_expr(b)?)),
            SizeExpr::Sub(a, b) => Some(Self::from_size_expr(a)?.sub(&Self::from_size_expr(b)?)),
            SizeExpr::Mul(a, b) => Some(Self::from_size_expr(a)?.mul(&Self::from_size_expr(b)?)),
            SizeExpr::Pow(base, exp) => match (base.as_ref(), exp.as_ref()) {
                (_, SizeExpr::Const(k)) if *k >= 0 => {
                    Some(Self::from_size_expr(base)?.pow(*k as u32))
                }
                (SizeExpr::Const(b), _) if *b >= 1 => {
                    let a = exp.to_affine()?;
                    Self::exp_of_affine(&BigUint::from(*b as u64), &a).ok()
                }
                _ => None,
            },
            SizeExpr::Max(_, _) => None,
        }
    }
}

fn fmt_coeff(c: &BigRational, f: &mut fmt::Formatter<'_>, lead: bool) -> fmt::Result {
    let mag = c.abs();
    if lead {
        if c.is_negative() {
            write!(f, "-")?;
        }
    } else if c.is_negative() {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    write!(f, "{}", mag)
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Largest terms first: exponential bases, then polynomial degree.
        let mut order: Vec<&CfTerm> = self.terms.iter().collect();
        order.sort_by(|a, b| {
            let key = |t: &CfTerm| {
                let bases: Vec<&BigUint> = t.factors.values().map(|x| &x.base).collect();
                let degree: u32 = t.factors.values().map(|x| x.pow).sum();
                (bases.iter().map(|b| (*b).clone()).max(), degree)
            };
            key(b).cmp(&key(a)).then_with(|| b.factors.cmp(&a.factors))
        });
        for (i, t) in order.iter().enumerate() {
            let unit_coeff = t.coeff.abs().is_one() && !t.factors.is_empty();
            if unit_coeff {
                if i == 0 {
                    if t.coeff.is_negative() {
                        write!(f, "-")?;
                    }
                } else if t.coeff.is_negative() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
            } else {
                fmt_coeff(&t.coeff, f, i == 0)?;
            }
            let mut first = unit_coeff;
            for (v, fac) in &t.factors {
                if fac.pow > 0 {
                    if !first {
                        write!(f, "*")?;
                    }
                    first = false;
                    write!(f, "n{}", v + 1)?;
                    if fac.pow > 1 {
                        write!(f, "^{}", fac.pow)?;
                    }
                }
                if !fac.base.is_one() {
                    if !first {
                        write!(f, "*")?;
                    }
                    first = false;
                    write!(f, "{}^n{}", fac.base, v + 1)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: usize) -> ClosedForm {
        ClosedForm::var(v)
    }

    #[test]
    fn arithmetic_and_display() {
        // (n1 + 1)^2 = n1^2 + 2*n1 + 1
        let e = n(0).add(&ClosedForm::one()).pow(2);
        assert_eq!(e.to_string(), "n1^2 + 2*n1 + 1");
        assert_eq!(e.eval(&[Some(4)]).unwrap(), rat_int(25));

        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let tri = n(0).pow(2).add(&n(0)).scale(&half);
        assert_eq!(tri.to_string(), "1/2*n1^2 + 1/2*n1");
        assert_eq!(tri.eval(&[Some(10)]).unwrap(), rat_int(55));

        let h = ClosedForm::exp_var(0, BigUint::from(2u32)).sub(&ClosedForm::one());
        assert_eq!(h.to_string(), "2^n1 - 1");
        assert_eq!(h.eval(&[Some(12)]).unwrap(), rat_int(4095));

        assert_eq!(ClosedForm::zero().to_string(), "0");
        assert_eq!(n(0).sub(&n(0)).to_string(), "0");
    }

    #[test]
    fn multivar_products() {
        // n1 * n2 + n1
        let e = n(0).mul(&n(1)).add(&n(0));
        assert_eq!(e.eval(&[Some(3), Some(5)]).unwrap(), rat_int(18));
        assert_eq!(e.to_string(), "n1*n2 + n1");
        assert!(e.eval(&[Some(3), None]).is_err());
    }

    #[test]
    fn affine_substitution() {
        // f = n1^2 + 1, substitute n1 := n1 - 1  =>  n1^2 - 2*n1 + 2
        let e = n(0).pow(2).add(&ClosedForm::one());
        let mut a = Affine::var(0);
        a.konst = -1;
        let g = e.subst_var(0, SubstVal::Affine(a)).unwrap();
        assert_eq!(g.to_string(), "n1^2 - 2*n1 + 2");
        for k in 0..6 {
            assert_eq!(
                g.eval(&[Some(k)]).unwrap(),
                e.eval(&[Some(k - 1)]).unwrap()
            );
        }
    }

    #[test]
    fn exponential_substitution() {
        // f = 2^n1 * n2, substitute n1 := n1 + 2 gives 4*2^n1*n2.
        let e = ClosedForm::exp_var(0, BigUint::from(2u32)).mul(&n(1));
        let mut a = Affine::var(0);
        a.konst = 2;
        let mut args = vec![Some(SubstVal::Affine(a)), Some(SubstVal::Affine(Affine::var(1)))];
        let g = e.subst_all(&args).unwrap();
        assert_eq!(g.to_string(), "4*2^n1*n2");
        assert_eq!(g.eval(&[Some(3), Some(5)]).unwrap(), rat_int(160));

        // Substituting n1 := 2^(n1 - 1) into a linear form: n1 + 1.
        let lin = n(0).add(&ClosedForm::one());
        let mut am = Affine::var(0);
        am.konst = -1;
        args = vec![Some(SubstVal::Exp {
            base: BigUint::from(2u32),
            affine: am,
        })];
        let g = lin.subst_all(&args).unwrap();
        assert_eq!(g.to_string(), "1/2*2^n1 + 1");
        assert_eq!(g.eval(&[Some(4)]).unwrap(), rat_int(9));

        // 2^n1 with n1 := 2^n1 is out of class.
        let ee = ClosedForm::exp_var(0, BigUint::from(2u32));
        assert!(ee
            .subst_all(&[Some(SubstVal::Exp {
                base: BigUint::from(2u32),
                affine: Affine::var(0),
            })])
            .is_err());
    }

    #[test]
    fn size_expr_conversion() {
        let (goals, _) = crate::lang::parse_goal("q(2^(n1 - 1) + 3*n1)").unwrap();
        let arg = match &goals[0] {
            crate::lang::Term::Comp(_, args) => &args[0],
            _ => unreachable!(),
        };
        let se = SizeExpr::from_term(arg).unwrap();
        let cf = ClosedForm::from_size_expr(&se).unwrap();
        assert_eq!(cf.to_string(), "1/2*2^n1 + 3*n1");
        assert_eq!(cf.eval(&[Some(5)]).unwrap(), rat_int(31));
    }
}
