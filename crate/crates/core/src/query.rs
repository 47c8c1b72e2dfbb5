//! Ground query formulas over a solved model.
//!
//! ```text
//! formula := conj ('|' conj)*
//! conj    := unary (',' unary)*
//! unary   := '-' unary | primary [('in' set | '=' value)]
//! primary := '(' formula ')' | literal
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Atom, Interpretation, Literal, Signature, TruthSet, TruthValue};
use crate::syntax::{ExtLiteral, ParseError, Parser, Term, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Literal(Literal),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    In(Box<Formula>, TruthSet),
}

impl Formula {
    pub fn eval(&self, i: &Interpretation) -> TruthValue {
        match self {
            Formula::Literal(l) => i.value(l),
            Formula::Not(f) => f.eval(i).not(),
            Formula::And(fs) => fs.iter().fold(TruthValue::True, |v, f| v.and(f.eval(i))),
            Formula::Or(fs) => fs.iter().fold(TruthValue::False, |v, f| v.or(f.eval(i))),
            Formula::In(f, set) => set.test(f.eval(i)),
        }
    }

    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Literal>) {
        match self {
            Formula::Literal(l) => out.push(l),
            Formula::Not(f) | Formula::In(f, _) => f.collect(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect(out)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str| {
            write!(f, "(")?;
            for (k, x) in fs.iter().enumerate() {
                if k > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::Literal(l) => write!(f, "{l}"),
            Formula::Not(x) => write!(f, "-{x}"),
            Formula::And(fs) => join(f, fs, ", "),
            Formula::Or(fs) => join(f, fs, " | "),
            Formula::In(x, set) => write!(f, "({x} in {set})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown relation {0}")]
    UnknownRelation(Signature),
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = disjunction(&mut p)?;
    if !p.at_eof() {
        return p.error(format!("unexpected {} after the formula", p.peek()));
    }
    Ok(f)
}

fn disjunction(p: &mut Parser) -> Result<Formula, ParseError> {
    let mut fs = vec![conjunction(p)?];
    while *p.peek() == Tok::Pipe {
        p.bump();
        fs.push(conjunction(p)?);
    }
    Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Formula::Or(fs) })
}

fn conjunction(p: &mut Parser) -> Result<Formula, ParseError> {
    let mut fs = vec![unary(p)?];
    while *p.peek() == Tok::Comma {
        p.bump();
        fs.push(unary(p)?);
    }
    Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Formula::And(fs) })
}

fn unary(p: &mut Parser) -> Result<Formula, ParseError> {
    if *p.peek() == Tok::Minus {
        p.bump();
        return Ok(Formula::Not(Box::new(unary(p)?)));
    }
    let inner = if *p.peek() == Tok::LParen {
        p.bump();
        let f = disjunction(p)?;
        p.expect(Tok::RParen)?;
        f
    } else {
        let span = p.span();
        let l = p.literal()?;
        let mut args = Vec::with_capacity(l.atom.args.len());
        for t in &l.atom.args {
            match t {
                Term::Const(c) => args.push(c.clone()),
                Term::Var(v) => {
                    return Err(ParseError {
                        line: span.line,
                        col: span.col,
                        message: format!("query formulas must be ground; found variable {v}"),
                    })
                }
            }
        }
        let atom = Atom {
            module: l.atom.module,
            relation: l.atom.relation,
            args,
        };
        Formula::Literal(Literal {
            atom,
            negative: l.negative,
        })
    };
    Ok(match p.membership(inner)? {
        ExtLiteral::Plain(f) => f,
        ExtLiteral::In { literal, set, .. } => Formula::In(Box::new(literal), set),
    })
}

/// Checks every relation of `f` against `known`, then evaluates it.
pub fn evaluate(f: &Formula, known: &BTreeSet<Signature>, model: &Interpretation) -> Result<TruthValue, QueryError> {
    for l in f.literals() {
        let s = l.atom.signature();
        if !known.contains(&s) {
            return Err(QueryError::UnknownRelation(s));
        }
    }
    Ok(f.eval(model))
}
