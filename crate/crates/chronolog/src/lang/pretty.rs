//! Pretty-printer. Output reparses to a structurally identical program
//! (variable identities up to renaming).

use crate::lang::program::{Measure, Mode, PredDef, Program};
use crate::lang::term::{Term, LIST_CONS, LIST_NIL};
use std::fmt::Write;

const LVL_CMP: u8 = 1;
const LVL_ADD: u8 = 2;
const LVL_MUL: u8 = 3;
const LVL_POW: u8 = 4;

fn op_level(name: &str, arity: usize) -> Option<(u8, bool)> {
    // (level, right-assoc)
    match (name, arity) {
        ("is" | "=:=" | "=\\=" | "<" | ">" | ">=" | "=<", 2) => Some((LVL_CMP, false)),
        ("+" | "-", 2) => Some((LVL_ADD, false)),
        ("*" | "/" | "//" | "mod", 2) => Some((LVL_MUL, false)),
        ("^", 2) => Some((LVL_POW, true)),
        _ => None,
    }
}

fn atom_needs_quotes(s: &str) -> bool {
    if s == LIST_NIL {
        return false;
    }
    let mut chars = s.chars();
    let ident = match chars.next() {
        Some(c) if c.is_lowercase() && c.is_alphabetic() => {
            chars.all(|c| c == '_' || c.is_alphanumeric())
        }
        _ => false,
    };
    !ident || matches!(s, "is" | "mod")
}

pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 0);
    s
}

fn write_atom(out: &mut String, name: &str) {
    if atom_needs_quotes(name) {
        let _ = write!(out, "'{name}'");
    } else {
        out.push_str(name);
    }
}

fn write_term(out: &mut String, t: &Term, ctx: u8) {
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::Atom(a) => write_atom(out, a.as_str()),
        Term::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Term::Float(f) => {
            if f.fract() == 0.0 && f.is_finite() {
                let _ = write!(out, "{f:.1}");
            } else {
                let _ = write!(out, "{f}");
            }
        }
        Term::Comp(f, args) if f.as_str() == LIST_CONS && args.len() == 2 => {
            write_list(out, t);
        }
        Term::Comp(f, args) => {
            if let Some((lvl, right)) = op_level(f.as_str(), args.len()) {
                let paren = lvl < ctx;
                if paren {
                    out.push('(');
                }
                let (l_ctx, r_ctx) = if right { (lvl + 1, lvl) } else { (lvl, lvl + 1) };
                write_term(out, &args[0], l_ctx);
                let _ = write!(out, " {} ", f.as_str());
                write_term(out, &args[1], r_ctx);
                if paren {
                    out.push(')');
                }
                return;
            }
            if f.as_str() == "-" && args.len() == 1 {
                out.push_str("-(");
                write_term(out, &args[0], 0);
                out.push(')');
                return;
            }
            write_atom(out, f.as_str());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(out, a, LVL_CMP);
            }
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, t: &Term) {
    out.push('[');
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Comp(f, args) if f.as_str() == LIST_CONS && args.len() == 2 => {
                if !first {
                    out.push_str(", ");
                }
                write_term(out, &args[0], LVL_CMP);
                first = false;
                cur = &args[1];
            }
            Term::Atom(a) if a.as_str() == LIST_NIL => break,
            other => {
                out.push('|');
                write_term(out, other, LVL_CMP);
                break;
            }
        }
    }
    out.push(']');
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    let entry_sigs = p.entry_sigs();
    for pred in &p.preds {
        write_decls(&mut out, pred);
    }
    for sig in &entry_sigs {
        let _ = writeln!(out, ":- entry({sig}).");
    }
    for pred in &p.preds {
        if !pred.clauses.is_empty() {
            out.push('\n');
        }
        for clause in &pred.clauses {
            out.push_str(&term_to_string(&clause.head));
            if !clause.body.is_empty() {
                out.push_str(" :-\n    ");
                let body: Vec<String> = clause.body.iter().map(term_to_string).collect();
                out.push_str(&body.join(",\n    "));
            }
            out.push_str(".\n");
        }
    }
    out
}

fn write_decls(out: &mut String, pred: &PredDef) {
    let sig = &pred.sig;
    if let Some(modes) = &pred.decl.modes {
        let ms: Vec<&str> = modes
            .iter()
            .map(|m| if *m == Mode::In { "in" } else { "out" })
            .collect();
        let _ = writeln!(out, ":- mode({sig}, [{}]).", ms.join(","));
    }
    if let Some(measures) = &pred.decl.measures {
        let ms: Vec<String> = measures.iter().map(Measure::to_string).collect();
        let _ = writeln!(out, ":- measure({sig}, [{}]).", ms.join(","));
    }
    if let Some(sols) = &pred.decl.sols {
        let _ = writeln!(out, ":- sols({sig}, {}).", term_to_string(sols));
    }
    if let Some(groups) = &pred.decl.mutex {
        let gs: Vec<String> = groups
            .iter()
            .map(|g| {
                let is: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
                format!("[{}]", is.join(","))
            })
            .collect();
        let _ = writeln!(out, ":- mutex({sig}, [{}]).", gs.join(","));
    }
    for (metric, expr) in &pred.decl.trust {
        let m = match metric {
            crate::metric::Metric::Call(s) => format!("{s}"),
            other => other.to_string(),
        };
        let _ = writeln!(out, ":- trust_cost({sig}, {m}, {}).", term_to_string(expr));
    }
    for sa in &pred.size_asserts {
        let _ = writeln!(
            out,
            ":- size({sig}, {}, {}, {}, {}).",
            sa.clause + 1,
            sa.lit + 1,
            sa.arg + 1,
            term_to_string(&sa.expr)
        );
    }
}

/// Structural program equality up to variable renaming: used to state the
/// parse/print round-trip property.
pub fn programs_equivalent(a: &Program, b: &Program) -> bool {
    if a.preds.len() != b.preds.len() {
        return false;
    }
    if a.entry_sigs() != b.entry_sigs() {
        return false;
    }
    for (pa, pb) in a.preds.iter().zip(&b.preds) {
        if pa.sig != pb.sig
            || pa.decl.modes != pb.decl.modes
            || pa.decl.measures != pb.decl.measures
            || pa.decl.mutex != pb.decl.mutex
            || pa.clauses.len() != pb.clauses.len()
            || pa.size_asserts.len() != pb.size_asserts.len()
            || pa.decl.trust.len() != pb.decl.trust.len()
        {
            return false;
        }
        match (&pa.decl.sols, &pb.decl.sols) {
            (None, None) => {}
            (Some(x), Some(y)) if x.alpha_eq(y) => {}
            _ => return false,
        }
        for ((ma, ta), (mb, tb)) in pa.decl.trust.iter().zip(&pb.decl.trust) {
            if ma != mb || !ta.alpha_eq(tb) {
                return false;
            }
        }
        for (sa, sb) in pa.size_asserts.iter().zip(&pb.size_asserts) {
            if (sa.clause, sa.lit, sa.arg) != (sb.clause, sb.lit, sb.arg)
                || !sa.expr.alpha_eq(&sb.expr)
            {
                return false;
            }
        }
        for (ca, cb) in pa.clauses.iter().zip(&pb.clauses) {
            // One renaming covers a whole clause: fold head and body into a
            // single term before comparing.
            let wrap_a = Term::comp("?clause", std::iter::once(ca.head.clone()).chain(ca.body.iter().cloned()).collect());
            let wrap_b = Term::comp("?clause", std::iter::once(cb.head.clone()).chain(cb.body.iter().cloned()).collect());
            if !wrap_a.alpha_eq(&wrap_b) {
                return false;
            }
        }
    }
    true
}
