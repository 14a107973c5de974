//! Recursive-descent parser for the clause language and its directives.
//!
//! Variables are standardized apart at parse time: every clause gets fresh
//! ids so no variable object is shared between clauses. Parse failures are
//! reported with source positions; a failed clause is skipped to the next
//! end-of-clause dot so later diagnostics are still produced.

use crate::lang::builtins;
use crate::lang::lexer::{Lexer, Pos, Token, TokenKind};
use crate::lang::program::{
    has_errors, Clause, Diagnostic, Measure, Mode, PredDef, PredicateDecl, Program, SizeAssert,
};
use crate::lang::term::{PredSig, Term, Var};
use crate::metric::Metric;
use std::collections::HashMap;

pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = match Lexer::new(src).tokenize() {
        Ok(t) => t,
        Err(e) => return Err(vec![Diagnostic::error(e.pos, e.msg)]),
    };
    let mut parser = Parser::new(tokens);
    parser.program()
}

/// Parses a comma-separated goal conjunction (no trailing dot required).
/// Returns the literals and the next unused variable id.
pub fn parse_goal(src: &str) -> Result<(Vec<Term>, usize), Vec<Diagnostic>> {
    let tokens = match Lexer::new(src).tokenize() {
        Ok(t) => t,
        Err(e) => return Err(vec![Diagnostic::error(e.pos, e.msg)]),
    };
    let mut parser = Parser::new(tokens);
    let mut scope = HashMap::new();
    let mut lits = vec![parser
        .body_literal(&mut scope)
        .map_err(|d| vec![d])?];
    while parser.eat(&TokenKind::Comma) {
        lits.push(parser.body_literal(&mut scope).map_err(|d| vec![d])?);
    }
    if parser.peek_kind() == &TokenKind::Dot {
        parser.bump();
    }
    if parser.peek_kind() != &TokenKind::Eof {
        return Err(vec![Diagnostic::error(
            parser.peek_pos(),
            "trailing input after goal",
        )]);
    }
    Ok((lits, parser.next_var_id))
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    next_var_id: usize,
    depth: usize,
}

/// Nesting bound for a single term; keeps recursive descent, term drops,
/// and every later walk over parsed terms within stack limits, including
/// the smaller stacks of spawned threads.
const MAX_TERM_DEPTH: usize = 100;

struct Builder {
    preds: Vec<RawPred>,
    index: HashMap<PredSig, usize>,
    entries: Vec<PredSig>,
    diags: Vec<Diagnostic>,
}

struct RawPred {
    sig: PredSig,
    decl: PredicateDecl,
    clauses: Vec<Clause>,
    // Raw 1-based size assertions, checked against clause counts at the end.
    sizes: Vec<(i64, i64, i64, Term, Pos)>,
    mutex_raw: Option<(Vec<Vec<i64>>, Pos)>,
    pos: Pos,
}

impl Builder {
    fn pred_mut(&mut self, sig: &PredSig, pos: Pos) -> &mut RawPred {
        if let Some(&i) = self.index.get(sig) {
            return &mut self.preds[i];
        }
        self.index.insert(sig.clone(), self.preds.len());
        self.preds.push(RawPred {
            sig: sig.clone(),
            decl: PredicateDecl::empty(),
            clauses: Vec::new(),
            sizes: Vec::new(),
            mutex_raw: None,
            pos,
        });
        self.preds.last_mut().unwrap()
    }
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            at: 0,
            next_var_id: 0,
            depth: 0,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn peek_pos(&self) -> Pos {
        self.peek().pos
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<Token> {
        if self.peek_kind() == kind {
            Ok(self.bump())
        } else {
            Err(Diagnostic::error(
                self.peek_pos(),
                format!("expected {what}, found {:?}", self.peek_kind()),
            ))
        }
    }

    fn skip_to_dot(&mut self) {
        loop {
            match self.peek_kind() {
                TokenKind::Dot => {
                    self.bump();
                    return;
                }
                TokenKind::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn program(&mut self) -> Result<Program, Vec<Diagnostic>> {
        let mut b = Builder {
            preds: Vec::new(),
            index: HashMap::new(),
            entries: Vec::new(),
            diags: Vec::new(),
        };
        while self.peek_kind() != &TokenKind::Eof {
            let start = self.peek_pos();
            let result = if self.eat(&TokenKind::Neck) {
                self.directive(&mut b)
            } else {
                self.clause(&mut b)
            };
            if let Err(d) = result {
                b.diags.push(d);
                self.skip_to_dot();
            } else if !self.eat(&TokenKind::Dot) {
                b.diags
                    .push(Diagnostic::error(start, "missing `.` at end of clause"));
                self.skip_to_dot();
            }
        }
        self.finish(b)
    }

    fn clause(&mut self, b: &mut Builder) -> PResult<()> {
        let mut scope = HashMap::new();
        let pos = self.peek_pos();
        let head = self.callable(&mut scope)?;
        let sig = PredSig::of(&head).ok_or_else(|| {
            Diagnostic::error(pos, "clause head must be an atom or compound term")
        })?;
        if builtins::builtin_kind(&sig).is_some() {
            return Err(Diagnostic::error(
                pos,
                format!("cannot define clauses for builtin {sig}"),
            ));
        }
        let mut body = Vec::new();
        if self.eat(&TokenKind::Neck) {
            body.push(self.body_literal(&mut scope)?);
            while self.eat(&TokenKind::Comma) {
                body.push(self.body_literal(&mut scope)?);
            }
        }
        b.pred_mut(&sig, pos).clauses.push(Clause { head, body, pos });
        Ok(())
    }

    // ---- expression parsing ----

    fn body_literal(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let pos = self.peek_pos();
        let t = self.expr_cmp(scope)?;
        match &t {
            Term::Atom(_) | Term::Comp(..) => Ok(t),
            _ => Err(Diagnostic::error(pos, "body literal must be callable")),
        }
    }

    /// Comparison / `is` level, non-associative.
    fn expr_cmp(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let lhs = self.expr_add(scope)?;
        if let TokenKind::Op(op) = self.peek_kind() {
            let op = op.clone();
            if matches!(op.as_str(), "is" | "=:=" | "=\\=" | "<" | ">" | ">=" | "=<") {
                self.bump();
                let rhs = self.expr_add(scope)?;
                return Ok(Term::comp(&op, vec![lhs, rhs]));
            }
        }
        Ok(lhs)
    }

    fn expr_add(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let mut lhs = self.expr_mul(scope)?;
        loop {
            match self.peek_kind() {
                TokenKind::Op(op) if op == "+" || op == "-" => {
                    let op = op.clone();
                    self.bump();
                    let rhs = self.expr_mul(scope)?;
                    lhs = Term::comp(&op, vec![lhs, rhs]);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn expr_mul(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let mut lhs = self.expr_pow(scope)?;
        loop {
            match self.peek_kind() {
                TokenKind::Op(op) if matches!(op.as_str(), "*" | "/" | "//" | "mod") => {
                    let op = op.clone();
                    self.bump();
                    let rhs = self.expr_pow(scope)?;
                    lhs = Term::comp(&op, vec![lhs, rhs]);
                }
                _ => return Ok(lhs),
            }
        }
    }

    /// `^` is right-associative.
    fn expr_pow(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let base = self.expr_unary(scope)?;
        if let TokenKind::Op(op) = self.peek_kind() {
            if op == "^" {
                self.bump();
                let exp = self.expr_pow(scope)?;
                return Ok(Term::comp("^", vec![base, exp]));
            }
        }
        Ok(base)
    }

    fn expr_unary(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        if let TokenKind::Op(op) = self.peek_kind() {
            if op == "-" {
                self.bump();
                let inner = self.expr_unary(scope)?;
                // Fold a negated literal into the constant.
                return Ok(match inner {
                    Term::Int(i) => Term::Int(-i),
                    Term::Float(f) => Term::Float(-f),
                    other => Term::comp("-", vec![other]),
                });
            }
        }
        self.primary(scope)
    }

    fn primary(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        if self.depth >= MAX_TERM_DEPTH {
            return Err(Diagnostic::error(
                self.peek_pos(),
                format!("term nesting exceeds {MAX_TERM_DEPTH} levels"),
            ));
        }
        self.depth += 1;
        let out = self.primary_nested(scope);
        self.depth -= 1;
        out
    }

    fn primary_nested(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Int(i) => Ok(Term::Int(i)),
            TokenKind::Float(f) => Ok(Term::Float(f)),
            TokenKind::Var(name) => Ok(Term::Var(self.var(&name, scope))),
            TokenKind::Atom(name) => {
                if self.peek_kind() == &TokenKind::LParen {
                    self.bump();
                    let args = self.arg_list(scope)?;
                    Ok(Term::comp(&name, args))
                } else {
                    Ok(Term::atom(&name))
                }
            }
            TokenKind::LParen => {
                let inner = self.expr_cmp(scope)?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::LBracket => self.list_tail(scope),
            other => Err(Diagnostic::error(
                tok.pos,
                format!("expected a term, found {other:?}"),
            )),
        }
    }

    /// Parses a callable term (head or directive body): atom or compound.
    fn callable(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        let pos = self.peek_pos();
        let t = self.primary(scope)?;
        match &t {
            Term::Atom(_) | Term::Comp(..) => Ok(t),
            _ => Err(Diagnostic::error(pos, "expected an atom or compound term")),
        }
    }

    fn arg_list(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Vec<Term>> {
        let mut args = vec![self.expr_cmp(scope)?];
        while self.eat(&TokenKind::Comma) {
            args.push(self.expr_cmp(scope)?);
        }
        self.expect(&TokenKind::RParen, "`)`")?;
        Ok(args)
    }

    fn list_tail(&mut self, scope: &mut HashMap<String, Var>) -> PResult<Term> {
        if self.eat(&TokenKind::RBracket) {
            return Ok(Term::nil());
        }
        let mut items = vec![self.expr_cmp(scope)?];
        while self.eat(&TokenKind::Comma) {
            items.push(self.expr_cmp(scope)?);
        }
        let tail = if self.eat(&TokenKind::Bar) {
            self.expr_cmp(scope)?
        } else {
            Term::nil()
        };
        self.expect(&TokenKind::RBracket, "`]`")?;
        let mut t = tail;
        for item in items.into_iter().rev() {
            t = Term::cons(item, t);
        }
        Ok(t)
    }

    fn var(&mut self, name: &str, scope: &mut HashMap<String, Var>) -> Var {
        // Each `_` occurrence is a distinct variable.
        if name == "_" {
            let v = Var::new(self.next_var_id, "_");
            self.next_var_id += 1;
            return v;
        }
        if let Some(v) = scope.get(name) {
            return v.clone();
        }
        let v = Var::new(self.next_var_id, name);
        self.next_var_id += 1;
        scope.insert(name.to_string(), v.clone());
        v
    }

    // ---- directives ----

    fn directive(&mut self, b: &mut Builder) -> PResult<()> {
        let pos = self.peek_pos();
        let mut scope = HashMap::new();
        let term = self.callable(&mut scope)?;
        let (name, args) = match &term {
            Term::Comp(f, args) => (f.as_str().to_string(), args.clone()),
            Term::Atom(a) => (a.as_str().to_string(), vec![]),
            _ => unreachable!(),
        };
        match (name.as_str(), args.len()) {
            ("mode", 2) => {
                let sig = expect_sig(&args[0], pos)?;
                let modes = expect_list(&args[1], pos)?
                    .iter()
                    .map(|t| match t {
                        Term::Atom(a) if a.as_str() == "in" => Ok(Mode::In),
                        Term::Atom(a) if a.as_str() == "out" => Ok(Mode::Out),
                        _ => Err(Diagnostic::error(pos, "mode must be `in` or `out`")),
                    })
                    .collect::<PResult<Vec<_>>>()?;
                check_arity(&sig, modes.len(), "mode", pos)?;
                let p = b.pred_mut(&sig, pos);
                if p.decl.modes.is_some() {
                    return Err(Diagnostic::error(
                        pos,
                        format!("duplicate mode declaration for {sig}"),
                    ));
                }
                p.decl.modes = Some(modes);
                p.decl.pos.get_or_insert(pos);
                Ok(())
            }
            ("measure", 2) => {
                let sig = expect_sig(&args[0], pos)?;
                let measures = expect_list(&args[1], pos)?
                    .iter()
                    .map(|t| match t {
                        Term::Atom(a) => match a.as_str() {
                            "length" => Ok(Measure::Length),
                            "size" => Ok(Measure::Size),
                            "depth" => Ok(Measure::Depth),
                            "int" => Ok(Measure::Int),
                            "void" => Ok(Measure::Void),
                            other => Err(Diagnostic::error(
                                pos,
                                format!("unknown measure `{other}`"),
                            )),
                        },
                        _ => Err(Diagnostic::error(pos, "measure must be an atom")),
                    })
                    .collect::<PResult<Vec<_>>>()?;
                check_arity(&sig, measures.len(), "measure", pos)?;
                let p = b.pred_mut(&sig, pos);
                if p.decl.measures.is_some() {
                    return Err(Diagnostic::error(
                        pos,
                        format!("duplicate measure declaration for {sig}"),
                    ));
                }
                p.decl.measures = Some(measures);
                Ok(())
            }
            ("sols", 2) => {
                let sig = expect_sig(&args[0], pos)?;
                let p = b.pred_mut(&sig, pos);
                if p.decl.sols.is_some() {
                    return Err(Diagnostic::error(
                        pos,
                        format!("duplicate sols declaration for {sig}"),
                    ));
                }
                p.decl.sols = Some(args[1].clone());
                Ok(())
            }
            ("mutex", 2) => {
                let sig = expect_sig(&args[0], pos)?;
                let groups = expect_list(&args[1], pos)?
                    .iter()
                    .map(|g| {
                        expect_list(g, pos)?
                            .iter()
                            .map(|i| expect_int(i, pos))
                            .collect::<PResult<Vec<i64>>>()
                    })
                    .collect::<PResult<Vec<_>>>()?;
                let p = b.pred_mut(&sig, pos);
                if p.mutex_raw.is_some() {
                    return Err(Diagnostic::error(
                        pos,
                        format!("duplicate mutex declaration for {sig}"),
                    ));
                }
                p.mutex_raw = Some((groups, pos));
                Ok(())
            }
            ("trust_cost", 3) => {
                let sig = expect_sig(&args[0], pos)?;
                let metric = expect_metric(&args[1], pos)?;
                let p = b.pred_mut(&sig, pos);
                if p.decl.trust.iter().any(|(m, _)| *m == metric) {
                    return Err(Diagnostic::error(
                        pos,
                        format!("duplicate trust_cost for {sig} metric {metric}"),
                    ));
                }
                p.decl.trust.push((metric, args[2].clone()));
                Ok(())
            }
            ("size", 5) => {
                let sig = expect_sig(&args[0], pos)?;
                let clause = expect_int(&args[1], pos)?;
                let lit = expect_int(&args[2], pos)?;
                let arg = expect_int(&args[3], pos)?;
                b.pred_mut(&sig, pos)
                    .sizes
                    .push((clause, lit, arg, args[4].clone(), pos));
                Ok(())
            }
            ("entry", 1) => {
                let sig = expect_sig(&args[0], pos)?;
                if !b.entries.contains(&sig) {
                    b.entries.push(sig);
                }
                Ok(())
            }
            (other, n) => Err(Diagnostic::error(
                pos,
                format!("unknown directive {other}/{n}"),
            )),
        }
    }

    fn finish(&mut self, mut b: Builder) -> Result<Program, Vec<Diagnostic>> {
        // Clause-head arity is part of the signature, so a head/declaration
        // arity clash shows up as a declaration on a clauseless predicate of
        // the same name; report those as mismatches.
        let mut preds = Vec::new();
        for raw in b.preds.drain(..) {
            let nclauses = raw.clauses.len();
            let mut size_asserts = Vec::new();
            for (clause, lit, arg, expr, pos) in raw.sizes {
                let ok = clause >= 1 && (clause as usize) <= nclauses && lit >= 1 && arg >= 1;
                if !ok {
                    b.diags.push(Diagnostic::error(
                        pos,
                        format!(
                            "size assertion indices out of range for {} (clause {clause}, literal {lit}, arg {arg})",
                            raw.sig
                        ),
                    ));
                    continue;
                }
                let cidx = clause as usize - 1;
                let nlits = raw.clauses[cidx].body.len();
                if (lit as usize) > nlits {
                    b.diags.push(Diagnostic::error(
                        pos,
                        format!(
                            "size assertion literal index {lit} out of range for {} clause {clause} ({nlits} body literals)",
                            raw.sig
                        ),
                    ));
                    continue;
                }
                size_asserts.push(SizeAssert {
                    clause: cidx,
                    lit: lit as usize - 1,
                    arg: arg as usize - 1,
                    expr,
                    pos,
                });
            }
            let mut decl = raw.decl;
            if let Some((groups, pos)) = raw.mutex_raw {
                let mut seen = vec![false; nclauses];
                let mut converted = Vec::new();
                let mut bad = false;
                for g in &groups {
                    let mut cg = Vec::new();
                    for &i in g {
                        if i < 1 || (i as usize) > nclauses || seen[i as usize - 1] {
                            bad = true;
                            break;
                        }
                        seen[i as usize - 1] = true;
                        cg.push(i as usize - 1);
                    }
                    converted.push(cg);
                }
                if bad || seen.iter().any(|s| !s) {
                    b.diags.push(Diagnostic::error(
                        pos,
                        format!(
                            "mutex groups for {} must partition clause indices 1..{nclauses}",
                            raw.sig
                        ),
                    ));
                } else {
                    decl.mutex = Some(converted);
                }
            }
            preds.push(PredDef {
                sig: raw.sig,
                decl,
                clauses: raw.clauses,
                size_asserts,
                pos: raw.pos,
            });
        }
        // Resolve entry points; default to every predicate with a mode
        // declaration, in source order.
        let mut entries = Vec::new();
        if b.entries.is_empty() {
            for (i, p) in preds.iter().enumerate() {
                if p.decl.modes.is_some() && !p.clauses.is_empty() {
                    entries.push(i);
                }
            }
        } else {
            for sig in &b.entries {
                match preds.iter().position(|p| &p.sig == sig) {
                    Some(i) => entries.push(i),
                    None => b
                        .diags
                        .push(Diagnostic::error(None, format!("entry {sig} is not defined"))),
                }
            }
        }
        if has_errors(&b.diags) {
            return Err(b.diags);
        }
        Ok(Program::new(preds, entries, self.next_var_id))
    }
}

fn expect_sig(t: &Term, pos: Pos) -> PResult<PredSig> {
    if let Term::Comp(f, args) = t {
        if f.as_str() == "/" && args.len() == 2 {
            if let (Term::Atom(name), Term::Int(ar)) = (&args[0], &args[1]) {
                if *ar >= 0 {
                    return Ok(PredSig::new(name.as_str(), *ar as usize));
                }
            }
        }
    }
    Err(Diagnostic::error(pos, "expected name/arity"))
}

fn expect_list(t: &Term, pos: Pos) -> PResult<Vec<Term>> {
    let mut out = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Atom(a) if a.as_str() == crate::lang::term::LIST_NIL => return Ok(out),
            Term::Comp(f, args) if f.as_str() == crate::lang::term::LIST_CONS && args.len() == 2 => {
                out.push(args[0].clone());
                cur = &args[1];
            }
            _ => return Err(Diagnostic::error(pos, "expected a proper list")),
        }
    }
}

fn expect_int(t: &Term, pos: Pos) -> PResult<i64> {
    match t {
        Term::Int(i) => Ok(*i),
        _ => Err(Diagnostic::error(pos, "expected an integer")),
    }
}

fn expect_metric(t: &Term, pos: Pos) -> PResult<Metric> {
    match t {
        Term::Atom(a) => a
            .as_str()
            .parse::<Metric>()
            .map_err(|e| Diagnostic::error(pos, e.to_string())),
        Term::Comp(f, args) if f.as_str() == "/" && args.len() == 2 => {
            let sig = expect_sig(t, pos)?;
            let _ = (f, args);
            Ok(Metric::Call(sig))
        }
        _ => Err(Diagnostic::error(pos, "expected a metric name")),
    }
}

fn check_arity(sig: &PredSig, got: usize, what: &str, pos: Pos) -> PResult<()> {
    if got == sig.arity {
        Ok(())
    } else {
        Err(Diagnostic::error(
            pos,
            format!("{what} list for {sig} has {got} entries, expected {}", sig.arity),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPEND: &str = "\
:- mode(app/3, [in,in,out]).
:- measure(app/3, [length,length,length]).
:- entry(app/3).
app([], L, L).
app([X|Xs], Ys, [X|Zs]) :- app(Xs, Ys, Zs).
";

    #[test]
    fn parses_append() {
        let p = parse_program(APPEND).unwrap();
        let app = p.lookup(&PredSig::new("app", 3)).unwrap();
        assert_eq!(app.clauses.len(), 2);
        assert_eq!(app.modes(), &[Mode::In, Mode::In, Mode::Out]);
        assert_eq!(p.entry_sigs(), vec![PredSig::new("app", 3)]);
        // Variables of the two clauses are disjoint.
        let m1 = app.clauses[0].head.max_var_id().unwrap();
        let mut min2 = usize::MAX;
        app.clauses[1].head.visit(&mut |t| {
            if let Term::Var(v) = t {
                min2 = min2.min(v.id);
            }
        });
        assert!(min2 > m1);
    }

    #[test]
    fn arithmetic_precedence() {
        let (goals, _) = parse_goal("X is 1+2*3^2").unwrap();
        let expected = Term::comp(
            "is",
            vec![
                Term::Var(Var::new(0, "X")),
                Term::comp(
                    "+",
                    vec![
                        Term::Int(1),
                        Term::comp(
                            "*",
                            vec![
                                Term::Int(2),
                                Term::comp("^", vec![Term::Int(3), Term::Int(2)]),
                            ],
                        ),
                    ],
                ),
            ],
        );
        assert!(goals[0].alpha_eq(&expected));
    }

    #[test]
    fn reports_position_on_error() {
        let err = parse_program("p(X) :- q(X)\nr.").unwrap_err();
        assert!(err[0].is_error());
        assert!(err[0].pos.is_some());
    }

    #[test]
    fn directive_errors_are_collected() {
        let err = parse_program(":- mode(p/2, [in]).\n:- bogus(1).\np(a,b).").unwrap_err();
        assert_eq!(err.iter().filter(|d| d.is_error()).count(), 2);
    }

    #[test]
    fn runaway_nesting_is_rejected_not_overflowed() {
        for (open, close) in [("f(", ")"), ("(", ")"), ("[", "]")] {
            let deep = format!(
                ":- entry(p/1).\np(X) :- X is {}1{}.",
                open.repeat(50_000),
                close.repeat(50_000)
            );
            let err = parse_program(&deep).unwrap_err();
            assert!(err[0].message.contains("nesting"), "{}", err[0].message);
        }
        let fine = format!(
            ":- mode(p/1,[in]).\n:- measure(p/1,[size]).\np({}a{}).",
            "f(".repeat(80),
            ")".repeat(80)
        );
        assert!(parse_program(&fine).is_ok());
    }

    #[test]
    fn mutex_must_partition() {
        let src = ":- mode(p/1,[in]).\n:- mutex(p/1,[[1],[1]]).\np(a).";
        assert!(parse_program(src).is_err());
        let ok = ":- mode(p/1,[in]).\n:- mutex(p/1,[[1,2]]).\np(a).\np(b).";
        let prog = parse_program(ok).unwrap();
        let p = prog.lookup(&PredSig::new("p", 1)).unwrap();
        assert_eq!(p.decl.mutex, Some(vec![vec![0, 1]]));
    }

    #[test]
    fn size_assert_indices_checked() {
        let bad = ":- mode(p/1,[in]).\n:- size(p/1, 3, 1, 1, n1-1).\np(a).";
        assert!(parse_program(bad).is_err());
    }

    #[test]
    fn negative_literals_fold() {
        let (g, _) = parse_goal("X is -3 + 2").unwrap();
        if let Term::Comp(_, args) = &g[0] {
            if let Term::Comp(_, add) = &args[1] {
                assert_eq!(add[0], Term::Int(-3));
                return;
            }
        }
        panic!("unexpected shape");
    }
}
