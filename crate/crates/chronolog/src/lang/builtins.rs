//! The builtin and arithmetic-operator tables shared by the analyzer and the
//! interpreter. Both sides must agree on what is a builtin, what is an
//! evaluable operator, and what counts toward which metric.

use crate::lang::term::PredSig;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Ge,
    Le,
}

impl CmpOp {
    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Eq => "=:=",
            CmpOp::Ne => "=\\=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Le => "=<",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BuiltinKind {
    /// `X is Expr`: evaluate the right side, unify with the left.
    Is,
    /// Arithmetic comparison; evaluates both sides.
    Cmp(CmpOp),
    /// `true/0`: succeeds, costs nothing.
    True,
}

/// Returns the builtin behavior for a goal signature, or `None` for user
/// predicates.
pub fn builtin_kind(sig: &PredSig) -> Option<BuiltinKind> {
    match (sig.name.as_str(), sig.arity) {
        ("is", 2) => Some(BuiltinKind::Is),
        ("true", 0) => Some(BuiltinKind::True),
        ("=:=", 2) => Some(BuiltinKind::Cmp(CmpOp::Eq)),
        ("=\\=", 2) => Some(BuiltinKind::Cmp(CmpOp::Ne)),
        ("<", 2) => Some(BuiltinKind::Cmp(CmpOp::Lt)),
        (">", 2) => Some(BuiltinKind::Cmp(CmpOp::Gt)),
        (">=", 2) => Some(BuiltinKind::Cmp(CmpOp::Ge)),
        ("=<", 2) => Some(BuiltinKind::Cmp(CmpOp::Le)),
        _ => None,
    }
}

/// Does this builtin contribute a `Call` metric? `true/0` does not.
pub fn builtin_counts(kind: BuiltinKind) -> bool {
    !matches!(kind, BuiltinKind::True)
}

/// Evaluable arithmetic operators, by (name, arity).
pub const ARITH_OPS: &[(&str, usize)] = &[
    ("+", 2),
    ("-", 2),
    ("*", 2),
    ("/", 2),
    ("//", 2),
    ("mod", 2),
    ("^", 2),
    ("min", 2),
    ("max", 2),
    ("-", 1),
    ("abs", 1),
];

pub fn is_arith_op(sig: &PredSig) -> bool {
    ARITH_OPS
        .iter()
        .any(|&(n, a)| sig.name.as_str() == n && sig.arity == a)
}

pub fn arith_op_sigs() -> impl Iterator<Item = PredSig> {
    ARITH_OPS.iter().map(|&(n, a)| PredSig::new(n, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_consistent() {
        assert!(builtin_kind(&PredSig::new("is", 2)).is_some());
        assert!(builtin_kind(&PredSig::new("is", 3)).is_none());
        assert!(is_arith_op(&PredSig::new("-", 1)));
        assert!(is_arith_op(&PredSig::new("-", 2)));
        assert!(!is_arith_op(&PredSig::new("is", 2)));
    }
}
