//! Grounding: variables are replaced by constants of the Herbrand universe.
//!
//! A head variable yields one ground rule per substitution. A variable that
//! occurs only in the body is read existentially, so each disjunct expands
//! into the disjunction of its instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::{Atom, Body, Literal, Name, Rule, RuleSet, Signature};
use crate::syntax::{
    unsafe_variables, AtomTemplate, BodyItem, ExtLiteral, LiteralTemplate, Program, SourceRule, Span,
    Term,
};

pub type GroundItem = ExtLiteral<Literal>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("{second}: head {head} is also produced by the rule at {first}; write one rule and join the bodies with `|`")]
    HeadCollision {
        head: Literal,
        first: Span,
        second: Span,
    },
    #[error("{span}: unsafe variable {variable} in rule `{rule}`")]
    Unsafe {
        rule: String,
        variable: Name,
        span: Span,
    },
    #[error("{span}: rule `{rule}` has variables but the program has no constants")]
    EmptyUniverse { rule: String, span: Span },
    #[error("{span}: rule head `{rule}` must be a plain literal")]
    MembershipHead { rule: String, span: Span },
    #[error("{span}: {signature} clashes with an earlier use of the relation with arity {arity}")]
    ArityMismatch {
        signature: Signature,
        arity: usize,
        span: Span,
    },
}

/// Ground rule that may still contain membership tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundRule {
    pub head: Literal,
    /// `None` for a fact. Otherwise a non-empty list of non-empty conjunctions.
    pub body: Option<Vec<Vec<GroundItem>>>,
    pub span: Span,
}

impl GroundRule {
    pub fn items(&self) -> impl Iterator<Item = &GroundItem> {
        self.body.iter().flatten().flatten()
    }

    pub fn is_plain(&self) -> bool {
        self.items().all(|i| i.is_plain())
    }

    /// The rule as a plain rule, or `None` if it has a membership test.
    pub fn to_plain(&self) -> Option<Rule> {
        match &self.body {
            None => Some(Rule::fact(self.head.clone())),
            Some(ds) => {
                let mut out = Vec::with_capacity(ds.len());
                for c in ds {
                    let mut conj = Vec::with_capacity(c.len());
                    for item in c {
                        match item {
                            ExtLiteral::Plain(l) => conj.push(l.clone()),
                            ExtLiteral::In { .. } => return None,
                        }
                    }
                    out.push(conj);
                }
                Some(Rule {
                    head: self.head.clone(),
                    body: Body::Or(out),
                })
            }
        }
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = SourceRule {
            head: ExtLiteral::Plain(literal_template(&self.head)),
            body: self.body.as_ref().map(|ds| {
                ds.iter()
                    .map(|c| c.iter().map(|i| i.map(literal_template)).collect())
                    .collect()
            }),
            span: self.span,
        };
        write!(f, "{r}")
    }
}

/// Ground program keyed by head literal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundRuleSet {
    rules: BTreeMap<Literal, GroundRule>,
    constants: BTreeSet<Name>,
    signatures: BTreeSet<Signature>,
}

impl GroundRuleSet {
    pub fn rules(&self) -> impl Iterator<Item = &GroundRule> {
        self.rules.values()
    }

    pub fn rule(&self, head: &Literal) -> Option<&GroundRule> {
        self.rules.get(head)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn constants(&self) -> &BTreeSet<Name> {
        &self.constants
    }

    pub fn signatures(&self) -> &BTreeSet<Signature> {
        &self.signatures
    }

    pub fn is_plain(&self) -> bool {
        self.rules.values().all(GroundRule::is_plain)
    }

    /// The rules as a [`RuleSet`], or `None` when a membership test remains.
    pub fn to_rule_set(&self) -> Option<RuleSet> {
        let mut out = RuleSet::new();
        for r in self.rules.values() {
            out.insert(r.to_plain()?)
                .expect("heads are unique by construction");
        }
        Some(out)
    }

    /// Positive and negative literals of every atom built from the
    /// program's relations and constants.
    pub fn herbrand_literal_base(&self) -> BTreeSet<Literal> {
        let universe: Vec<&Name> = self.constants.iter().collect();
        let mut out = BTreeSet::new();
        for sig in &self.signatures {
            for_each_tuple(&universe, sig.arity, &mut |args| {
                let atom = Atom {
                    module: sig.module.clone(),
                    relation: sig.relation.clone(),
                    args: args.to_vec(),
                };
                out.insert(Literal::neg(atom.clone()));
                out.insert(Literal::pos(atom));
            });
        }
        out
    }

    /// Ground rules whose head lives in `module`.
    pub fn module_rules<'a>(&'a self, module: &'a str) -> impl Iterator<Item = &'a GroundRule> {
        self.rules.values().filter(move |r| &*r.head.atom.module == module)
    }
}

impl fmt::Display for GroundRuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.rules.values() {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Surface form of a ground literal.
pub fn literal_template(l: &Literal) -> LiteralTemplate {
    LiteralTemplate {
        negative: l.negative,
        atom: AtomTemplate {
            module: l.atom.module.clone(),
            relation: l.atom.relation.clone(),
            args: l.atom.args.iter().cloned().map(Term::Const).collect(),
        },
    }
}

fn for_each_tuple(universe: &[&Name], arity: usize, f: &mut dyn FnMut(&[Name])) {
    if arity > 0 && universe.is_empty() {
        return;
    }
    let mut idx = vec![0usize; arity];
    let mut buf: Vec<Name> = vec![Name::from(""); arity];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            buf[k] = universe[i].clone();
        }
        f(&buf);
        let mut k = arity;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

type Subst = BTreeMap<Name, Name>;

/// Calls `f` for every substitution of `vars` (in order) over `universe`,
/// extending `base`; the last variable varies fastest.
fn for_each_subst(vars: &[Name], universe: &[&Name], base: &Subst, f: &mut dyn FnMut(&Subst)) {
    let mut s = base.clone();
    for_each_tuple(universe, vars.len(), &mut |vals| {
        for (v, c) in vars.iter().zip(vals) {
            s.insert(v.clone(), c.clone());
        }
        f(&s);
    });
}

fn instantiate(l: &LiteralTemplate, s: &Subst) -> Literal {
    let args = l
        .atom
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => s
                .get(v)
                .cloned()
                .expect("safety guarantees every variable is bound"),
        })
        .collect();
    Literal {
        negative: l.negative,
        atom: Atom {
            module: l.atom.module.clone(),
            relation: l.atom.relation.clone(),
            args,
        },
    }
}

fn instantiate_item(item: &BodyItem, s: &Subst) -> GroundItem {
    item.map(|l| instantiate(l, s))
}

fn ordered_vars<'a>(items: impl Iterator<Item = &'a LiteralTemplate>) -> Vec<Name> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for l in items {
        for v in l.atom.vars() {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
    }
    out
}

/// Checks shape, arity and safety, then grounds every rule.
pub fn ground(p: &Program) -> Result<GroundRuleSet, GroundError> {
    let mut arities: BTreeMap<(Name, Name), usize> = BTreeMap::new();
    for r in &p.rules {
        if !r.head.is_plain() {
            return Err(GroundError::MembershipHead {
                rule: r.to_string(),
                span: r.span,
            });
        }
        let atoms = std::iter::once(&r.head).chain(r.body.iter().flatten().flatten());
        for item in atoms {
            let a = &item.literal().atom;
            let n = *arities
                .entry((a.module.clone(), a.relation.clone()))
                .or_insert(a.args.len());
            if n != a.args.len() {
                return Err(GroundError::ArityMismatch {
                    signature: Signature {
                        module: a.module.clone(),
                        relation: a.relation.clone(),
                        arity: a.args.len(),
                    },
                    arity: n,
                    span: r.span,
                });
            }
        }
    }
    for r in &p.rules {
        if let Some((v, _)) = unsafe_variables(r).into_iter().next() {
            return Err(GroundError::Unsafe {
                rule: r.to_string(),
                variable: v,
                span: r.span,
            });
        }
    }

    let constants = p.constants();
    let universe: Vec<&Name> = constants.iter().collect();
    let signatures = arities
        .into_iter()
        .map(|((module, relation), arity)| Signature {
            module,
            relation,
            arity,
        })
        .collect();
    let mut out = GroundRuleSet {
        rules: BTreeMap::new(),
        constants: constants.clone(),
        signatures,
    };

    for r in &p.rules {
        if universe.is_empty() && !r.is_ground() {
            return Err(GroundError::EmptyUniverse {
                rule: r.to_string(),
                span: r.span,
            });
        }
        let head = r.head_literal();
        let head_vars = ordered_vars(std::iter::once(head));
        let mut result = Ok(());
        for_each_subst(&head_vars, &universe, &Subst::new(), &mut |s| {
            if result.is_err() {
                return;
            }
            let g = ground_rule(r, s, &head_vars, &universe);
            if let Some(prev) = out.rules.get(&g.head) {
                result = Err(GroundError::HeadCollision {
                    head: g.head.clone(),
                    first: prev.span,
                    second: r.span,
                });
                return;
            }
            out.rules.insert(g.head.clone(), g);
        });
        result?;
    }
    Ok(out)
}

fn ground_rule(r: &SourceRule, s: &Subst, head_vars: &[Name], universe: &[&Name]) -> GroundRule {
    let head = instantiate(r.head_literal(), s);
    let body = r.body.as_ref().map(|ds| {
        let mut seen: BTreeSet<Vec<GroundItem>> = BTreeSet::new();
        let mut out = Vec::new();
        for d in ds {
            let local: Vec<Name> = ordered_vars(d.iter().map(|i| i.literal()))
                .into_iter()
                .filter(|v| !head_vars.contains(v))
                .collect();
            for_each_subst(&local, universe, s, &mut |s2| {
                let mut conj: Vec<GroundItem> = Vec::with_capacity(d.len());
                for item in d {
                    let g = instantiate_item(item, s2);
                    if !conj.contains(&g) {
                        conj.push(g);
                    }
                }
                if seen.insert(conj.clone()) {
                    out.push(conj);
                }
            });
        }
        out
    });
    GroundRule {
        head,
        body,
        span: r.span,
    }
}
