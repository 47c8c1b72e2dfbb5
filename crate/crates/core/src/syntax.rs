//! Surface syntax of `.4ql` programs.
//!
//! ```text
//! % comments run to the end of the line (`//` works too)
//! wait :- overloaded | rest_time.          % `|` separates disjuncts
//! -overloaded :- rest_time.                % `-` (or `¬`) negates
//! K.loc(X,Y,T) :- L.nextTime(T,S), L.house(X), L.loc(X,Y,S),
//!                 L.chLoc(X,S) in {u, f}.  % membership test on another module
//! N3.p :- M3.p = t.                        % `ℓ = v` is `ℓ in {v}`
//! overloaded.                              % fact
//! ```
//!
//! Unqualified relations live in the module `main`. Identifiers starting
//! with an upper-case letter or `_` are variables; lower-case identifiers,
//! integers and quoted strings are constants. A module qualifier must be
//! glued to its relation (`M.r`, not `M . r`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::logic::{is_bare_constant, write_constant, Name, TruthSet, TruthValue, DEFAULT_MODULE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Const(Name),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write_constant(f, c),
        }
    }
}

/// Atom possibly containing variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomTemplate {
    pub module: Name,
    pub relation: Name,
    pub args: Vec<Term>,
}

impl AtomTemplate {
    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }
}

impl fmt::Display for AtomTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bare_ok = &*self.module == DEFAULT_MODULE
            && self
                .relation
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_lowercase())
            && self.relation != "in".into();
        if !bare_ok {
            write!(f, "{}.", self.module)?;
        }
        write!(f, "{}", self.relation)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (k, t) in self.args.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiteralTemplate {
    pub negative: bool,
    pub atom: AtomTemplate,
}

impl fmt::Display for LiteralTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A literal as it may appear in a rule: plain, or a membership test
/// `ℓ in T` whose literal is read as `(¬M.R) in T` when negated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtLiteral<L> {
    Plain(L),
    In {
        literal: L,
        set: TruthSet,
        /// Written as `ℓ = v`.
        eq_sugar: bool,
    },
}

impl<L> ExtLiteral<L> {
    pub fn literal(&self) -> &L {
        match self {
            ExtLiteral::Plain(l) => l,
            ExtLiteral::In { literal, .. } => literal,
        }
    }

    pub fn is_plain(&self) -> bool {
        matches!(self, ExtLiteral::Plain(_))
    }

    pub fn map<M, F: FnOnce(&L) -> M>(&self, f: F) -> ExtLiteral<M> {
        match self {
            ExtLiteral::Plain(l) => ExtLiteral::Plain(f(l)),
            ExtLiteral::In {
                literal,
                set,
                eq_sugar,
            } => ExtLiteral::In {
                literal: f(literal),
                set: *set,
                eq_sugar: *eq_sugar,
            },
        }
    }
}

impl<L: fmt::Display> fmt::Display for ExtLiteral<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLiteral::Plain(l) => write!(f, "{l}"),
            ExtLiteral::In {
                literal,
                set,
                eq_sugar,
            } => {
                let mut values = set.iter();
                match (eq_sugar, values.next(), values.next()) {
                    (true, Some(v), None) => write!(f, "{literal} = {v}"),
                    _ => write!(f, "{literal} in {set}"),
                }
            }
        }
    }
}

pub type BodyItem = ExtLiteral<LiteralTemplate>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRule {
    /// Always plain in a valid program; kept general so that an `in` head
    /// can be reported by [`validate`] instead of failing the parse.
    pub head: BodyItem,
    /// `None` for a fact.
    pub body: Option<Vec<Vec<BodyItem>>>,
    pub span: Span,
}

impl SourceRule {
    pub fn head_literal(&self) -> &LiteralTemplate {
        self.head.literal()
    }

    pub fn module(&self) -> &Name {
        &self.head_literal().atom.module
    }

    pub fn head_vars(&self) -> BTreeSet<Name> {
        self.head_literal().atom.vars().cloned().collect()
    }

    pub fn is_ground(&self) -> bool {
        self.head_literal().atom.is_ground()
            && self
                .body
                .iter()
                .flatten()
                .flatten()
                .all(|b| b.literal().atom.is_ground())
    }

    fn same_rule(&self, other: &SourceRule) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl fmt::Display for SourceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if let Some(body) = &self.body {
            write!(f, " :- ")?;
            for (k, c) in body.iter().enumerate() {
                if k > 0 {
                    write!(f, " | ")?;
                }
                for (j, item) in c.iter().enumerate() {
                    if j > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
            }
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<SourceRule>,
}

impl Program {
    /// Rules grouped by the module of their head.
    pub fn modules(&self) -> BTreeMap<Name, Vec<&SourceRule>> {
        let mut m: BTreeMap<Name, Vec<&SourceRule>> = BTreeMap::new();
        for r in &self.rules {
            m.entry(r.module().clone()).or_default().push(r);
        }
        m
    }

    /// Every module named anywhere, including ones only referenced in bodies.
    pub fn module_names(&self) -> BTreeSet<Name> {
        let mut names = BTreeSet::new();
        for r in &self.rules {
            names.insert(r.module().clone());
            for item in r.body.iter().flatten().flatten() {
                names.insert(item.literal().atom.module.clone());
            }
        }
        names
    }

    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }

    /// Structural equality that ignores source positions.
    pub fn same_rules(&self, other: &Program) -> bool {
        self.rules.len() == other.rules.len()
            && self
                .rules
                .iter()
                .zip(&other.rules)
                .all(|(a, b)| a.same_rule(b))
    }

    fn atoms(&self) -> impl Iterator<Item = (&AtomTemplate, Span)> {
        self.rules.iter().flat_map(|r| {
            std::iter::once((&r.head_literal().atom, r.span)).chain(
                r.body
                    .iter()
                    .flatten()
                    .flatten()
                    .map(move |b| (&b.literal().atom, r.span)),
            )
        })
    }

    /// All constants occurring in the program, sorted.
    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for (a, _) in self.atoms() {
            for t in &a.args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        out
    }

    /// `module.relation` ↦ arity, first use wins.
    pub fn relation_arities(&self) -> BTreeMap<(Name, Name), usize> {
        let mut out = BTreeMap::new();
        for (a, _) in self.atoms() {
            out.entry((a.module.clone(), a.relation.clone()))
                .or_insert(a.args.len());
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            line: self.line,
            col: self.col,
            message: self.message.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    fn error(span: Span, message: String) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            line: span.line,
            col: span.col,
            message,
        }
    }

    fn warning(span: Span, message: String) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            line: span.line,
            col: span.col,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("diagnostics always serialize")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.col, self.message)
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Qualified(String, String),
    Str(String),
    Int(String),
    Minus,
    Comma,
    Pipe,
    Dot,
    If,
    Eq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Qualified(m, r) => write!(f, "`{m}.{r}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Int(s) => write!(f, "integer {s}"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::If => write!(f, "`:-`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let is_ident_start = |c: char| c.is_alphabetic() || c == '_';
    let is_ident = |c: char| c.is_alphanumeric() || c == '_';
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let err = |message: String| ParseError {
            line: span.line,
            col: span.col,
            message,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident(chars[i]) {
                i += 1;
            }
            let first: String = chars[start..i].iter().collect();
            if i + 1 < chars.len() && chars[i] == '.' && is_ident_start(chars[i + 1]) {
                i += 1;
                let rs = i;
                while i < chars.len() && is_ident(chars[i]) {
                    i += 1;
                }
                Tok::Qualified(first, chars[rs..i].iter().collect())
            } else {
                Tok::Ident(first)
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err("unterminated string".into())),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let e = chars.get(i + 1).copied();
                        s.push(match e {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some(other @ ('"' | '\\')) => other,
                            _ => return Err(err("bad escape in string".into())),
                        });
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else {
            i += 1;
            match c {
                '-' | '¬' => Tok::Minus,
                ',' | '∧' => Tok::Comma,
                '|' | '∨' => Tok::Pipe,
                '.' => Tok::Dot,
                '=' => Tok::Eq,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' if chars.get(i) == Some(&'-') => {
                    i += 1;
                    Tok::If
                }
                '←' => Tok::If,
                other => return Err(err(format!("unexpected character {other:?}"))),
            }
        };
        col += i - start;
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

pub(crate) struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let s = self.span();
        Err(ParseError {
            line: s.line,
            col: s.col,
            message: message.into(),
        })
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut rules = Vec::new();
        while !self.at_eof() {
            rules.push(self.rule()?);
        }
        Ok(Program { rules })
    }

    fn rule(&mut self) -> Result<SourceRule, ParseError> {
        let span = self.span();
        let head = self.item()?;
        let body = if *self.peek() == Tok::If {
            self.bump();
            Some(self.body()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        Ok(SourceRule { head, body, span })
    }

    fn body(&mut self) -> Result<Vec<Vec<BodyItem>>, ParseError> {
        let mut disjuncts = vec![self.conjunction()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            disjuncts.push(self.conjunction()?);
        }
        Ok(disjuncts)
    }

    fn conjunction(&mut self) -> Result<Vec<BodyItem>, ParseError> {
        let mut items = vec![self.item()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            items.push(self.item()?);
        }
        Ok(items)
    }

    fn item(&mut self) -> Result<BodyItem, ParseError> {
        let literal = self.literal()?;
        self.membership(literal)
    }

    /// Optional `in {..}` or `= v` suffix.
    pub(crate) fn membership<L>(&mut self, literal: L) -> Result<ExtLiteral<L>, ParseError> {
        match self.peek() {
            Tok::Ident(k) if k == "in" || k == "IN" => {
                self.bump();
                let set = self.truth_set()?;
                Ok(ExtLiteral::In {
                    literal,
                    set,
                    eq_sugar: false,
                })
            }
            Tok::Eq => {
                self.bump();
                let v = self.truth_value()?;
                Ok(ExtLiteral::In {
                    literal,
                    set: TruthSet::single(v),
                    eq_sugar: true,
                })
            }
            _ => Ok(ExtLiteral::Plain(literal)),
        }
    }

    pub(crate) fn literal(&mut self) -> Result<LiteralTemplate, ParseError> {
        let mut negative = false;
        while *self.peek() == Tok::Minus {
            self.bump();
            negative = !negative;
        }
        let atom = self.atom()?;
        Ok(LiteralTemplate { negative, atom })
    }

    fn atom(&mut self) -> Result<AtomTemplate, ParseError> {
        let (module, relation): (Name, Name) = match self.peek().clone() {
            Tok::Qualified(m, r) => (m.into(), r.into()),
            Tok::Ident(r) if r.starts_with(|c: char| c.is_lowercase()) && r != "in" => {
                (DEFAULT_MODULE.into(), r.into())
            }
            Tok::Ident(r) => {
                return self.error(format!(
                    "expected a relation name, found `{r}` (relations start lower-case or are module-qualified)"
                ))
            }
            other => return self.error(format!("expected a literal, found {other}")),
        };
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.term()?);
                match self.bump() {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        self.pos -= 1;
                        return self.error(format!("expected `,` or `)`, found {other}"));
                    }
                }
            }
        }
        Ok(AtomTemplate {
            module,
            relation,
            args,
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                if s.starts_with(|c: char| c.is_uppercase() || c == '_') {
                    Ok(Term::Var(s.into()))
                } else {
                    Ok(Term::Const(s.into()))
                }
            }
            Tok::Int(s) => {
                self.bump();
                Ok(Term::Const(s.into()))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Const(s.into()))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(s) = self.bump() else {
                    unreachable!()
                };
                Ok(Term::Const(format!("-{s}").into()))
            }
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    pub(crate) fn truth_value(&mut self) -> Result<TruthValue, ParseError> {
        let v = match self.peek() {
            Tok::Ident(s) if s.chars().count() == 1 => {
                TruthValue::from_symbol(s.chars().next().unwrap())
            }
            _ => None,
        };
        match v {
            Some(v) => {
                self.bump();
                Ok(v)
            }
            None => self.error(format!(
                "expected a truth value (t, f, i or u), found {}",
                self.peek()
            )),
        }
    }

    fn truth_set(&mut self) -> Result<TruthSet, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut set = TruthSet::EMPTY;
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            set.insert(self.truth_value()?);
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(set),
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected `,` or `}}`, found {other}"));
                }
            }
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

// ---------------------------------------------------------------------------
// Static checks

/// Variables of `disjunct` bound by a plain literal.
pub(crate) fn bound_vars(disjunct: &[BodyItem]) -> BTreeSet<Name> {
    disjunct
        .iter()
        .filter(|b| b.is_plain())
        .flat_map(|b| b.literal().atom.vars().cloned())
        .collect()
}

/// Safety violations of a rule as `(variable, what)` pairs: every head
/// variable and every variable of an `in` test must occur in a plain
/// literal of the same disjunct.
pub fn unsafe_variables(rule: &SourceRule) -> Vec<(Name, &'static str)> {
    let head_vars = rule.head_vars();
    let mut out = BTreeSet::new();
    match &rule.body {
        None => {
            for v in head_vars {
                out.insert((v, "head"));
            }
        }
        Some(body) => {
            for disjunct in body {
                let bound = bound_vars(disjunct);
                for v in &head_vars {
                    if !bound.contains(v) {
                        out.insert((v.clone(), "head"));
                    }
                }
                for item in disjunct.iter().filter(|b| !b.is_plain()) {
                    for v in item.literal().atom.vars() {
                        if !bound.contains(v) {
                            out.insert((v.clone(), "membership test"));
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut ground_heads: BTreeMap<&LiteralTemplate, Span> = BTreeMap::new();
    let mut arities: BTreeMap<(Name, Name), (usize, Span)> = BTreeMap::new();

    for r in &p.rules {
        if !r.head.is_plain() {
            diags.push(Diagnostic::error(
                r.span,
                format!(
                    "rule head `{}` must be a plain literal, not a membership test",
                    r.head
                ),
            ));
        }
        for item in std::iter::once(&r.head).chain(r.body.iter().flatten().flatten()) {
            if let ExtLiteral::In { literal, set, .. } = item {
                if set.is_empty() {
                    diags.push(Diagnostic::warning(
                        r.span,
                        format!("`{literal} in {{}}` is always f"),
                    ));
                }
            }
            let atom = &item.literal().atom;
            let key = (atom.module.clone(), atom.relation.clone());
            match arities.get(&key) {
                Some((n, first)) if *n != atom.args.len() => diags.push(Diagnostic::error(
                    r.span,
                    format!(
                        "{}.{} used with {} arguments here but {} at {}",
                        atom.module,
                        atom.relation,
                        atom.args.len(),
                        n,
                        first
                    ),
                )),
                Some(_) => {}
                None => {
                    arities.insert(key, (atom.args.len(), r.span));
                }
            }
        }
        for (v, what) in unsafe_variables(r) {
            diags.push(Diagnostic::error(
                r.span,
                format!(
                    "unsafe variable {v} in {what}: it must occur in a plain body literal of every disjunct"
                ),
            ));
        }
        let head = r.head_literal();
        if head.atom.is_ground() {
            if let Some(first) = ground_heads.get(head) {
                diags.push(Diagnostic::error(
                    r.span,
                    format!(
                        "second rule for head `{head}` (first at {first}); write one rule and join the bodies with `|`"
                    ),
                ));
            } else {
                ground_heads.insert(head, r.span);
            }
        }
    }
    diags
}

/// Quotes `c` when it would not lex back as a bare constant.
pub fn render_constant(c: &str) -> String {
    if is_bare_constant(c) {
        c.to_string()
    } else {
        Term::Const(c.into()).to_string()
    }
}
