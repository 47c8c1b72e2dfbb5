//! Stratified Datalog with negation, and its translation into modules.
//!
//! Input syntax is the rule syntax without disjunction, membership tests or
//! module qualifiers; negation (`-` or `\+`) only in bodies:
//!
//! ```text
//! p :- \+q.
//! p :- r.
//! q :- r.
//! s :- q.
//! r.
//! ```
//!
//! Stratum `i` becomes two modules: `Mi` holds its rules and `Ni` closes
//! each of its relations under the closed-world reading:
//!
//! ```text
//! Ni.R :- Mi.R = t.
//! -Ni.R :- Mi.R in {f, u}.
//! ```
//!
//! Lower strata are read through `Nj`. Relations with arguments get a guard
//! `Dom.dom(X)` per argument so the closing rules are safe.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::logic::{Name, TruthSet, TruthValue, DEFAULT_MODULE};
use crate::syntax::{
    parse_program, unsafe_variables, AtomTemplate, BodyItem, ExtLiteral, LiteralTemplate, ParseError,
    Program, SourceRule, Span, Term,
};

/// Module holding the domain facts.
pub const DOMAIN_MODULE: &str = "Dom";
pub const DOMAIN_RELATION: &str = "dom";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlRule {
    pub head: AtomTemplate,
    /// Disjunction of conjunctions; `None` for a fact. Unmerged rules have
    /// exactly one disjunct.
    pub body: Option<Vec<Vec<LiteralTemplate>>>,
    pub span: Span,
}

impl DlRule {
    fn relations(&self) -> impl Iterator<Item = (&Name, bool)> {
        self.body
            .iter()
            .flatten()
            .flatten()
            .map(|l| (&l.atom.relation, l.negative))
    }
}

impl fmt::Display for DlRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if let Some(ds) = &self.body {
            write!(f, " :- ")?;
            for (k, c) in ds.iter().enumerate() {
                if k > 0 {
                    write!(f, " | ")?;
                }
                for (j, l) in c.iter().enumerate() {
                    if j > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}")?;
                }
            }
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatalogProgram {
    pub rules: Vec<DlRule>,
}

impl DatalogProgram {
    /// Relations in order of first appearance, with their arity.
    pub fn relations(&self) -> Vec<(Name, usize)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.rules {
            let atoms = std::iter::once(&r.head).chain(r.body.iter().flatten().flatten().map(|l| &l.atom));
            for a in atoms {
                if seen.insert(a.relation.clone()) {
                    out.push((a.relation.clone(), a.args.len()));
                }
            }
        }
        out
    }

    /// Relations with at least one rule that has a body.
    pub fn idb(&self) -> BTreeSet<Name> {
        self.rules
            .iter()
            .filter(|r| r.body.is_some())
            .map(|r| r.head.relation.clone())
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            let atoms = std::iter::once(&r.head).chain(r.body.iter().flatten().flatten().map(|l| &l.atom));
            for a in atoms {
                for t in &a.args {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for DatalogProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatalogError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{span}: {message}")]
    Unsupported { span: Span, message: String },
    #[error("not stratifiable: negation on the cycle {}", .cycle.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> "))]
    NotStratifiable { cycle: Vec<Name> },
}

pub fn parse_datalog(text: &str) -> Result<DatalogProgram, DatalogError> {
    // `\+` is two characters wide, as is its replacement.
    let p = parse_program(&text.replace("\\+", "- "))?;
    let mut arities: BTreeMap<Name, usize> = BTreeMap::new();
    let mut rules = Vec::with_capacity(p.rules.len());
    for r in &p.rules {
        let unsupported = |message: String| DatalogError::Unsupported {
            span: r.span,
            message,
        };
        let ExtLiteral::Plain(head) = &r.head else {
            return Err(unsupported("a membership test cannot be a head".into()));
        };
        if head.negative {
            return Err(unsupported(format!("negated head `{head}`")));
        }
        let mut body = None;
        if let Some(ds) = &r.body {
            if ds.len() > 1 {
                return Err(unsupported("disjunction `|` is not Datalog".into()));
            }
            let mut conj = Vec::with_capacity(ds[0].len());
            for item in &ds[0] {
                match item {
                    ExtLiteral::Plain(l) => conj.push(l.clone()),
                    ExtLiteral::In { .. } => {
                        return Err(unsupported(format!("membership test `{item}` is not Datalog")))
                    }
                }
            }
            body = Some(vec![conj]);
        }
        let rule = DlRule {
            head: head.atom.clone(),
            body,
            span: r.span,
        };
        let atoms = std::iter::once(&rule.head).chain(rule.body.iter().flatten().flatten().map(|l| &l.atom));
        for a in atoms {
            if &*a.module != DEFAULT_MODULE {
                return Err(unsupported(format!("module-qualified relation {}.{}", a.module, a.relation)));
            }
            let n = *arities.entry(a.relation.clone()).or_insert(a.args.len());
            if n != a.args.len() {
                return Err(unsupported(format!(
                    "{} used with {} and {} arguments",
                    a.relation,
                    n,
                    a.args.len()
                )));
            }
        }
        if let Some((v, _)) = unsafe_variables(r).first() {
            return Err(unsupported(format!("unsafe variable {v}")));
        }
        for l in rule.body.iter().flatten().flatten().filter(|l| l.negative) {
            let bound: BTreeSet<&Name> = rule.body.iter().flatten().flatten()
                .filter(|l| !l.negative)
                .flat_map(|l| l.atom.vars())
                .collect();
            if let Some(v) = l.atom.vars().find(|v| !bound.contains(v)) {
                return Err(unsupported(format!("variable {v} of `{l}` occurs in no positive literal")));
            }
        }
        rules.push(rule);
    }
    Ok(DatalogProgram { rules })
}

/// Stratum per relation, numbered from 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stratification {
    pub strata: BTreeMap<Name, usize>,
}

impl Stratification {
    pub fn stratum(&self, relation: &str) -> usize {
        self.strata[relation]
    }

    pub fn count(&self) -> usize {
        self.strata.values().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, s) in &self.strata {
            writeln!(f, "{r}: {s}")?;
        }
        Ok(())
    }
}

/// Relations without rules form stratum 1; relations with rules take the
/// least strata above it that put negated dependencies strictly lower.
pub fn stratify(p: &DatalogProgram) -> Result<Stratification, DatalogError> {
    let idb = p.idb();
    let relations = p.relations();
    let mut graph: DiGraph<Name, bool> = DiGraph::new();
    let mut idx = HashMap::new();
    for r in &idb {
        idx.insert(r.clone(), graph.add_node(r.clone()));
    }
    let mut edges = BTreeSet::new();
    for r in &p.rules {
        for (b, negative) in r.relations() {
            if idb.contains(b) {
                edges.insert((r.head.relation.clone(), b.clone(), negative));
            }
        }
    }
    for (a, b, neg) in &edges {
        graph.add_edge(idx[a], idx[b], *neg);
    }
    let components = tarjan_scc(&graph);
    let mut comp_of = vec![0usize; graph.node_count()];
    for (c, nodes) in components.iter().enumerate() {
        for n in nodes {
            comp_of[n.index()] = c;
        }
    }
    for (a, b, neg) in &edges {
        let (ia, ib) = (idx[a], idx[b]);
        if *neg && comp_of[ia.index()] == comp_of[ib.index()] {
            return Err(DatalogError::NotStratifiable {
                cycle: negative_cycle(&graph, ia, ib, &comp_of),
            });
        }
    }
    let mut level = vec![0usize; components.len()];
    for (c, nodes) in components.iter().enumerate() {
        for n in nodes {
            for e in graph.edges(*n) {
                let t = comp_of[petgraph::visit::EdgeRef::target(&e).index()];
                if t != c {
                    level[c] = level[c].max(level[t] + *e.weight() as usize);
                }
            }
        }
    }
    let has_edb = relations.iter().any(|(r, _)| !idb.contains(r));
    let base = if has_edb { 2 } else { 1 };
    let strata = relations
        .into_iter()
        .map(|(r, _)| {
            let s = match idx.get(&r) {
                Some(n) => base + level[comp_of[n.index()]],
                None => 1,
            };
            (r, s)
        })
        .collect();
    Ok(Stratification { strata })
}

fn negative_cycle(
    graph: &DiGraph<Name, bool>,
    a: petgraph::graph::NodeIndex,
    b: petgraph::graph::NodeIndex,
    comp_of: &[usize],
) -> Vec<Name> {
    let comp = comp_of[a.index()];
    let mut prev = HashMap::new();
    let mut queue = std::collections::VecDeque::from([b]);
    let mut seen = BTreeSet::from([b]);
    while let Some(x) = queue.pop_front() {
        if x == a {
            break;
        }
        for y in graph.neighbors(x) {
            if comp_of[y.index()] == comp && seen.insert(y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    let mut back = vec![a];
    let mut cur = a;
    while cur != b {
        cur = prev[&cur];
        back.push(cur);
    }
    std::iter::once(a)
        .chain(back.into_iter().rev())
        .map(|n| graph[n].clone())
        .collect()
}

/// Head variables renamed `X1, X2, ...` by first position and body-only
/// variables `Y1, Y2, ...`.
fn canonical(rule: &DlRule) -> DlRule {
    let mut names: BTreeMap<Name, Name> = BTreeMap::new();
    for v in rule.head.vars() {
        let k = names.len() + 1;
        names.entry(v.clone()).or_insert_with(|| format!("X{k}").into());
    }
    let mut body_k = 0;
    for l in rule.body.iter().flatten().flatten() {
        for v in l.atom.vars() {
            if !names.contains_key(v) {
                body_k += 1;
                names.insert(v.clone(), format!("Y{body_k}").into());
            }
        }
    }
    let rename = |a: &AtomTemplate| AtomTemplate {
        module: a.module.clone(),
        relation: a.relation.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(names[v].clone()),
                c => c.clone(),
            })
            .collect(),
    };
    DlRule {
        head: rename(&rule.head),
        body: rule.body.as_ref().map(|ds| {
            ds.iter()
                .map(|c| {
                    c.iter()
                        .map(|l| LiteralTemplate {
                            negative: l.negative,
                            atom: rename(&l.atom),
                        })
                        .collect()
                })
                .collect()
        }),
        span: rule.span,
    }
}

fn may_overlap(a: &AtomTemplate, b: &AtomTemplate) -> bool {
    a.args.iter().zip(&b.args).all(|(x, y)| match (x, y) {
        (Term::Const(c), Term::Const(d)) => c == d,
        _ => true,
    })
}

fn substitute(rule: &DlRule, s: &BTreeMap<Name, Name>) -> DlRule {
    let sub = |a: &AtomTemplate| AtomTemplate {
        module: a.module.clone(),
        relation: a.relation.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => s.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
                c => c.clone(),
            })
            .collect(),
    };
    DlRule {
        head: sub(&rule.head),
        body: rule.body.as_ref().map(|ds| {
            ds.iter()
                .map(|c| {
                    c.iter()
                        .map(|l| LiteralTemplate {
                            negative: l.negative,
                            atom: sub(&l.atom),
                        })
                        .collect()
                })
                .collect()
        }),
        span: rule.span,
    }
}

/// Fuses rules with the same head into one rule whose body is the
/// disjunction of their bodies, keeping the order of first appearance.
/// When differently written heads of a relation could denote the same atom,
/// that relation's head variables are instantiated first.
pub fn merge_same_head(p: &DatalogProgram) -> DatalogProgram {
    let constants: Vec<Name> = p.constants().into_iter().collect();
    let mut by_relation: Vec<(Name, Vec<DlRule>)> = Vec::new();
    for r in &p.rules {
        let c = canonical(r);
        match by_relation.iter_mut().find(|(n, _)| *n == c.head.relation) {
            Some((_, v)) => v.push(c),
            None => by_relation.push((c.head.relation.clone(), vec![c])),
        }
    }
    let mut out: Vec<DlRule> = Vec::new();
    for (_, rules) in by_relation {
        let heads: Vec<&AtomTemplate> = rules.iter().map(|r| &r.head).collect();
        let clash = heads.iter().enumerate().any(|(i, a)| {
            heads[i + 1..].iter().any(|b| a != b && may_overlap(a, b))
        });
        let rules: Vec<DlRule> = if clash {
            let mut inst = Vec::new();
            for r in &rules {
                let vars: Vec<Name> = {
                    let mut seen = BTreeSet::new();
                    r.head.vars().filter(|v| seen.insert((*v).clone())).cloned().collect()
                };
                let mut idx = vec![0usize; vars.len()];
                if !vars.is_empty() && constants.is_empty() {
                    continue;
                }
                loop {
                    let s: BTreeMap<Name, Name> = vars.iter().cloned().zip(idx.iter().map(|&i| constants[i].clone())).collect();
                    inst.push(substitute(r, &s));
                    let mut k = vars.len();
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < constants.len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            inst
        } else {
            rules
        };
        let mut merged: Vec<DlRule> = Vec::new();
        for r in rules {
            match merged.iter_mut().find(|m| m.head == r.head) {
                Some(m) => match (&mut m.body, r.body) {
                    (None, _) => {}
                    (slot @ Some(_), None) => *slot = None,
                    (Some(ds), Some(more)) => {
                        for c in more {
                            if !ds.contains(&c) {
                                ds.push(c);
                            }
                        }
                    }
                },
                None => merged.push(r),
            }
        }
        out.extend(merged);
    }
    DatalogProgram { rules: out }
}

fn module_name(prefix: &str, stratum: usize) -> Name {
    format!("{prefix}{stratum}").into()
}

fn atom_in(module: &Name, a: &AtomTemplate) -> AtomTemplate {
    AtomTemplate {
        module: module.clone(),
        relation: a.relation.clone(),
        args: a.args.clone(),
    }
}

fn plain(negative: bool, atom: AtomTemplate) -> BodyItem {
    ExtLiteral::Plain(LiteralTemplate { negative, atom })
}

fn has_vars(r: &DlRule) -> bool {
    r.head.vars().next().is_some() || r.body.iter().flatten().flatten().any(|l| l.atom.vars().next().is_some())
}

/// The translated program together with the stratification it used.
#[derive(Debug, Clone)]
pub struct Translation {
    pub program: Program,
    pub strata: Stratification,
}

impl Translation {
    /// Module whose relation `r` carries the closed-world answer.
    pub fn answer_module(&self, relation: &str) -> Name {
        module_name("N", self.strata.stratum(relation))
    }
}

pub fn translate(p: &DatalogProgram) -> Result<Translation, DatalogError> {
    let strata = stratify(p)?;
    let merged = merge_same_head(p);
    let relations = p.relations();
    let needs_domain = relations.iter().any(|(_, n)| *n > 0);
    // Without constants a rule with variables has no instances.
    let no_constants = p.constants().is_empty();
    let span = Span::default();
    let mut rules: Vec<SourceRule> = Vec::new();

    for i in (1..=strata.count()).rev() {
        let m = module_name("M", i);
        let n = module_name("N", i);
        for (r, arity) in relations
            .iter()
            .filter(|(r, n)| strata.stratum(r) == i && !(no_constants && *n > 0))
        {
            let vars: Vec<Term> = (1..=*arity).map(|k| Term::Var(format!("X{k}").into())).collect();
            let inner = AtomTemplate {
                module: m.clone(),
                relation: r.clone(),
                args: vars.clone(),
            };
            let guard: Vec<BodyItem> = vars
                .iter()
                .map(|v| {
                    plain(
                        false,
                        AtomTemplate {
                            module: DOMAIN_MODULE.into(),
                            relation: DOMAIN_RELATION.into(),
                            args: vec![v.clone()],
                        },
                    )
                })
                .collect();
            let test = |set: TruthSet, eq_sugar: bool| {
                let mut c = guard.clone();
                c.push(ExtLiteral::In {
                    literal: LiteralTemplate {
                        negative: false,
                        atom: inner.clone(),
                    },
                    set,
                    eq_sugar,
                });
                Some(vec![c])
            };
            let outer = AtomTemplate {
                module: n.clone(),
                relation: r.clone(),
                args: vars.clone(),
            };
            rules.push(SourceRule {
                head: plain(false, outer.clone()),
                body: test(TruthSet::single(TruthValue::True), true),
                span,
            });
            rules.push(SourceRule {
                head: plain(true, outer),
                body: test(
                    [TruthValue::False, TruthValue::Unknown].into_iter().collect(),
                    false,
                ),
                span,
            });
        }
        for r in merged
            .rules
            .iter()
            .filter(|r| strata.stratum(&r.head.relation) == i && !(no_constants && has_vars(r)))
        {
            let body = r.body.as_ref().map(|ds| {
                ds.iter()
                    .map(|c| {
                        c.iter()
                            .map(|l| {
                                let j = strata.stratum(&l.atom.relation);
                                let module = if j == i { m.clone() } else { module_name("N", j) };
                                plain(l.negative, atom_in(&module, &l.atom))
                            })
                            .collect()
                    })
                    .collect()
            });
            rules.push(SourceRule {
                head: plain(false, atom_in(&m, &r.head)),
                body,
                span,
            });
        }
    }
    if needs_domain {
        for c in p.constants() {
            rules.push(SourceRule {
                head: plain(
                    false,
                    AtomTemplate {
                        module: DOMAIN_MODULE.into(),
                        relation: DOMAIN_RELATION.into(),
                        args: vec![Term::Const(c)],
                    },
                ),
                body: None,
                span,
            });
        }
    }
    Ok(Translation {
        program: Program { rules },
        strata,
    })
}

/// True tuples per relation under the stratified two-valued semantics;
/// everything else is false.
pub type Relations = BTreeMap<Name, BTreeSet<Vec<Name>>>;

/// Reference evaluator: naive fixpoint per stratum with closed-world
/// negation against lower strata.
pub fn run_datalog(p: &DatalogProgram) -> Result<Relations, DatalogError> {
    let strata = stratify(p)?;
    let mut facts: Relations = p
        .relations()
        .into_iter()
        .map(|(r, _)| (r, BTreeSet::new()))
        .collect();
    for i in 1..=strata.count() {
        let rules: Vec<&DlRule> = p
            .rules
            .iter()
            .filter(|r| strata.stratum(&r.head.relation) == i)
            .collect();
        loop {
            let mut new = Vec::new();
            for r in &rules {
                let conj: &[LiteralTemplate] = match &r.body {
                    None => &[],
                    Some(ds) => &ds[0],
                };
                for s in matches(conj, &facts) {
                    let t: Vec<Name> = r
                        .head
                        .args
                        .iter()
                        .map(|a| match a {
                            Term::Const(c) => c.clone(),
                            Term::Var(v) => s[v].clone(),
                        })
                        .collect();
                    if !facts[&r.head.relation].contains(&t) {
                        new.push((r.head.relation.clone(), t));
                    }
                }
            }
            if new.is_empty() {
                break;
            }
            for (r, t) in new {
                facts.get_mut(&r).unwrap().insert(t);
            }
        }
    }
    Ok(facts)
}

/// Substitutions satisfying the positive literals of `conj` whose negated
/// literals are absent from `facts`.
fn matches(conj: &[LiteralTemplate], facts: &Relations) -> Vec<BTreeMap<Name, Name>> {
    let mut subs = vec![BTreeMap::new()];
    for l in conj.iter().filter(|l| !l.negative) {
        let mut next = Vec::new();
        for s in &subs {
            for tuple in &facts[&l.atom.relation] {
                let mut s2: BTreeMap<Name, Name> = s.clone();
                let ok = l.atom.args.iter().zip(tuple).all(|(a, c)| match a {
                    Term::Const(k) => k == c,
                    Term::Var(v) => match s2.get(v) {
                        Some(bound) => bound == c,
                        None => {
                            s2.insert(v.clone(), c.clone());
                            true
                        }
                    },
                });
                if ok {
                    next.push(s2);
                }
            }
        }
        subs = next;
    }
    subs.retain(|s| {
        conj.iter().filter(|l| l.negative).all(|l| {
            let t: Vec<Name> = l
                .atom
                .args
                .iter()
                .map(|a| match a {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => s[v].clone(),
                })
                .collect();
            !facts[&l.atom.relation].contains(&t)
        })
    });
    subs
}
