//! Program representation: predicates, clauses, and assertion-supplied
//! declarations (modes, measures, solution counts, mutual exclusion, trusted
//! costs, size assertions).

use crate::lang::lexer::Pos;
use crate::lang::term::{PredSig, Term};
use crate::metric::Metric;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    In,
    Out,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Measure {
    /// Element count of a proper list.
    Length,
    /// Total symbol count of a ground term.
    Size,
    /// Nesting depth of a ground term.
    Depth,
    /// Value of a non-negative integer.
    Int,
    /// Argument carries no tracked size.
    Void,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Measure::Length => "length",
            Measure::Size => "size",
            Measure::Depth => "depth",
            Measure::Int => "int",
            Measure::Void => "void",
        };
        write!(f, "{s}")
    }
}

/// Declaration block accumulated from directives for one predicate.
#[derive(Clone, Debug)]
pub struct PredicateDecl {
    pub modes: Option<Vec<Mode>>,
    pub measures: Option<Vec<Measure>>,
    /// Solution-count expression over n1..nk; `None` means the constant 1.
    pub sols: Option<Term>,
    /// Partition of clause indices (0-based) into mutually exclusive groups.
    pub mutex: Option<Vec<Vec<usize>>>,
    /// Externally supplied cost expressions, one per metric.
    pub trust: Vec<(Metric, Term)>,
    pub pos: Option<Pos>,
}

impl PredicateDecl {
    pub fn empty() -> Self {
        PredicateDecl {
            modes: None,
            measures: None,
            sols: None,
            mutex: None,
            trust: Vec::new(),
            pos: None,
        }
    }

    pub fn is_trusted(&self) -> bool {
        !self.trust.is_empty()
    }
}

/// `:- size(p/n, Clause, Lit, Arg, Expr)` assertion, indices 0-based here.
#[derive(Clone, Debug)]
pub struct SizeAssert {
    pub clause: usize,
    pub lit: usize,
    pub arg: usize,
    pub expr: Term,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct PredDef {
    pub sig: PredSig,
    pub decl: PredicateDecl,
    pub clauses: Vec<Clause>,
    pub size_asserts: Vec<SizeAssert>,
    pub pos: Pos,
}

impl PredDef {
    pub fn modes(&self) -> &[Mode] {
        self.decl.modes.as_deref().unwrap_or(&[])
    }

    pub fn measures(&self) -> &[Measure] {
        self.decl.measures.as_deref().unwrap_or(&[])
    }

    /// Input argument positions (0-based).
    pub fn input_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.modes()
            .iter()
            .enumerate()
            .filter(|(_, m)| **m == Mode::In)
            .map(|(i, _)| i)
    }
}

/// A parsed program. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Program {
    pub preds: Vec<PredDef>,
    index: HashMap<PredSig, usize>,
    /// Indices into `preds` of the exported entry points.
    pub entries: Vec<usize>,
    /// First id not used by any variable in the program.
    pub next_var_id: usize,
}

impl Program {
    pub fn new(preds: Vec<PredDef>, entries: Vec<usize>, next_var_id: usize) -> Self {
        let index = preds
            .iter()
            .enumerate()
            .map(|(i, p)| (p.sig.clone(), i))
            .collect();
        Program {
            preds,
            index,
            entries,
            next_var_id,
        }
    }

    pub fn lookup(&self, sig: &PredSig) -> Option<&PredDef> {
        self.index.get(sig).map(|&i| &self.preds[i])
    }

    pub fn lookup_idx(&self, sig: &PredSig) -> Option<usize> {
        self.index.get(sig).copied()
    }

    pub fn entry_sigs(&self) -> Vec<PredSig> {
        self.entries.iter().map(|&i| self.preds[i].sig.clone()).collect()
    }

    /// User predicates called from the bodies of `pred`, deduplicated.
    pub fn callees(&self, pred: &PredDef) -> Vec<PredSig> {
        let mut out = Vec::new();
        for clause in &pred.clauses {
            for lit in &clause.body {
                if let Some(sig) = PredSig::of(lit) {
                    if crate::lang::builtins::builtin_kind(&sig).is_none()
                        && !out.contains(&sig)
                    {
                        out.push(sig);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message produced by parsing or validation.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: Option<Pos>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: impl Into<Option<Pos>>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            pos: pos.into(),
            message: message.into(),
        }
    }

    pub fn warning(pos: impl Into<Option<Pos>>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            pos: pos.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.pos {
            Some(p) => write!(f, "{p}: {tag}: {}", self.message),
            None => write!(f, "{tag}: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
