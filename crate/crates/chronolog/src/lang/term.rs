//! Term representation for the analyzed language.
//!
//! Variables carry a program-wide unique id assigned at parse time, so no
//! variable object is ever shared between two clauses. Display names are kept
//! only for rendering; identity is the id.

use std::fmt;
use std::sync::Arc;

/// Interned functor / atom name. Cloning is a pointer copy.
#[derive(Clone, Eq)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl std::hash::Hash for Sym {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

/// A logic variable. Equality and hashing use only the id.
#[derive(Clone)]
pub struct Var {
    pub id: usize,
    pub name: Arc<str>,
}

impl Var {
    pub fn new(id: usize, name: &str) -> Self {
        Var {
            id,
            name: Arc::from(name),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl std::hash::Hash for Var {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.id)
    }
}

/// First-order term: variable, atomic constant, or compound.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(Var),
    Atom(Sym),
    Int(i64),
    Float(f64),
    Comp(Sym, Vec<Term>),
}

pub const LIST_CONS: &str = ".";
pub const LIST_NIL: &str = "[]";

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Sym::new(name))
    }

    pub fn comp(name: &str, args: Vec<Term>) -> Term {
        Term::Comp(Sym::new(name), args)
    }

    pub fn nil() -> Term {
        Term::atom(LIST_NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::comp(LIST_CONS, vec![head, tail])
    }

    /// Builds a proper list from the given elements.
    pub fn list(items: Vec<Term>) -> Term {
        let mut t = Term::nil();
        for item in items.into_iter().rev() {
            t = Term::cons(item, t);
        }
        t
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn functor(&self) -> Option<(&Sym, usize)> {
        match self {
            Term::Comp(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    /// Number of symbols in the term: every constant, function symbol, and
    /// variable occurrence counts one.
    pub fn symbol_count(&self) -> u64 {
        match self {
            Term::Var(_) | Term::Atom(_) | Term::Int(_) | Term::Float(_) => 1,
            Term::Comp(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<u64>(),
        }
    }

    /// Depth of the term; constants and variables have depth 1.
    pub fn depth(&self) -> u64 {
        match self {
            Term::Comp(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) | Term::Float(_) => true,
            Term::Comp(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Walks a list spine. Returns the element count and the spine end
    /// (`[]`, a variable, or a non-list term).
    pub fn spine(&self) -> (u64, &Term) {
        let mut n = 0;
        let mut t = self;
        while let Term::Comp(f, args) = t {
            if f.as_str() == LIST_CONS && args.len() == 2 {
                n += 1;
                t = &args[1];
            } else {
                break;
            }
        }
        (n, t)
    }

    /// Proper-list element count, if the spine is closed by `[]`.
    pub fn list_len(&self) -> Option<u64> {
        let (n, end) = self.spine();
        match end {
            Term::Atom(a) if a.as_str() == LIST_NIL => Some(n),
            _ => None,
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::Comp(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    pub fn max_var_id(&self) -> Option<usize> {
        let mut max = None;
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                max = Some(max.map_or(v.id, |m: usize| m.max(v.id)));
            }
        });
        max
    }

    /// Structural equality modulo a consistent renaming of variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, map: &mut std::collections::HashMap<usize, usize>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => match map.get(&x.id) {
                    Some(&mapped) => mapped == y.id,
                    None => {
                        if map.values().any(|&v| v == y.id) {
                            return false;
                        }
                        map.insert(x.id, y.id);
                        true
                    }
                },
                (Term::Atom(x), Term::Atom(y)) => x == y,
                (Term::Int(x), Term::Int(y)) => x == y,
                (Term::Float(x), Term::Float(y)) => x == y,
                (Term::Comp(f, xs), Term::Comp(g, ys)) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, map))
                }
                _ => false,
            }
        }
        let mut map = std::collections::HashMap::new();
        go(self, other, &mut map)
    }
}

/// Predicate signature: functor name plus arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredSig {
    pub name: Sym,
    pub arity: usize,
}

impl PredSig {
    pub fn new(name: &str, arity: usize) -> Self {
        PredSig {
            name: Sym::new(name),
            arity,
        }
    }

    pub fn of(term: &Term) -> Option<PredSig> {
        match term {
            Term::Atom(a) => Some(PredSig {
                name: a.clone(),
                arity: 0,
            }),
            Term::Comp(f, args) => Some(PredSig {
                name: f.clone(),
                arity: args.len(),
            }),
            _ => None,
        }
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}
