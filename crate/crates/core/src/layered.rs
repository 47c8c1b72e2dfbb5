//! Modules and layer-by-layer evaluation.
//!
//! A rule belongs to the module of its head. A plain body literal of another
//! module makes the rule's module depend on it; a membership test
//! `M.r in T` makes it depend strictly, so `M` must be solved first. The
//! program is well-layered when no strict dependency lies on a cycle.
//!
//! Modules that depend on each other through plain literals are solved
//! together. Membership tests are replaced by `t` or `f` before solving, and
//! plain literals of already solved modules enter as facts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::ground::{ground, GroundError, GroundItem, GroundRuleSet};
use crate::logic::{Body, Interpretation, Literal, Name, Rule, RuleSet, TruthValue};
use crate::solver::{solve, SolveTrace};
use crate::syntax::{ExtLiteral, Program};

/// Least layer number per module, and the groups of mutually dependent
/// modules in solving order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerAssignment {
    pub kappa: BTreeMap<Name, usize>,
    pub sccs: Vec<Vec<Name>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayerError {
    #[error("program is not well-layered: the membership test of {from} on {to} lies on the cycle {}", render_cycle(.cycle))]
    NotWellLayered {
        from: Name,
        to: Name,
        cycle: Vec<Name>,
    },
}

fn render_cycle(c: &[Name]) -> String {
    c.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> ")
}

/// `(from, to, strict)` for every cross-module reference, plus strict
/// self-references.
fn module_edges(p: &Program) -> BTreeSet<(Name, Name, bool)> {
    let mut edges = BTreeSet::new();
    for r in &p.rules {
        let m = r.module();
        for item in r.body.iter().flatten().flatten() {
            let n = &item.literal().atom.module;
            let strict = !item.is_plain();
            if m != n || strict {
                edges.insert((m.clone(), n.clone(), strict));
            }
        }
    }
    edges
}

pub fn layer_check(p: &Program) -> Result<LayerAssignment, LayerError> {
    let names: Vec<Name> = p.module_names().into_iter().collect();
    let mut graph: DiGraph<Name, bool> = DiGraph::new();
    let idx: HashMap<Name, NodeIndex> = names
        .iter()
        .map(|n| (n.clone(), graph.add_node(n.clone())))
        .collect();
    let edges = module_edges(p);
    for (a, b, strict) in &edges {
        graph.add_edge(idx[a], idx[b], *strict);
    }

    // Dependencies come before dependants in tarjan's output.
    let components = tarjan_scc(&graph);
    let mut comp_of = vec![0usize; graph.node_count()];
    for (c, nodes) in components.iter().enumerate() {
        for n in nodes {
            comp_of[n.index()] = c;
        }
    }
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).unwrap();
        if graph[e] && comp_of[a.index()] == comp_of[b.index()] {
            return Err(LayerError::NotWellLayered {
                from: graph[a].clone(),
                to: graph[b].clone(),
                cycle: cycle_through(&graph, a, b, &comp_of),
            });
        }
    }

    let mut comp_kappa = vec![0usize; components.len()];
    for (c, nodes) in components.iter().enumerate() {
        let mut k = 0;
        for n in nodes {
            for e in graph.edges(*n) {
                let target = comp_of[petgraph::visit::EdgeRef::target(&e).index()];
                if target != c {
                    k = k.max(comp_kappa[target] + *e.weight() as usize);
                }
            }
        }
        comp_kappa[c] = k;
    }
    let kappa = names
        .iter()
        .map(|n| (n.clone(), comp_kappa[comp_of[idx[n].index()]]))
        .collect();

    // Topological order of components, ties broken by smallest module name.
    let mut members: Vec<Vec<Name>> = components
        .iter()
        .map(|nodes| {
            let mut v: Vec<Name> = nodes.iter().map(|n| graph[*n].clone()).collect();
            v.sort();
            v
        })
        .collect();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); components.len()];
    let mut users: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); components.len()];
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).unwrap();
        let (ca, cb) = (comp_of[a.index()], comp_of[b.index()]);
        if ca != cb {
            deps[ca].insert(cb);
            users[cb].insert(ca);
        }
    }
    let mut ready: BTreeSet<(Name, usize)> = (0..components.len())
        .filter(|c| deps[*c].is_empty())
        .map(|c| (members[c][0].clone(), c))
        .collect();
    let mut order = Vec::with_capacity(components.len());
    while let Some(first) = ready.iter().next().cloned() {
        ready.remove(&first);
        let c = first.1;
        order.push(c);
        for &u in &users[c] {
            deps[u].remove(&c);
            if deps[u].is_empty() {
                ready.insert((members[u][0].clone(), u));
            }
        }
    }
    let sccs = order.into_iter().map(|c| std::mem::take(&mut members[c])).collect();
    Ok(LayerAssignment { kappa, sccs })
}

/// Cycle `a -> b -> ... -> a` inside one component.
fn cycle_through(graph: &DiGraph<Name, bool>, a: NodeIndex, b: NodeIndex, comp_of: &[usize]) -> Vec<Name> {
    let comp = comp_of[a.index()];
    let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = std::collections::VecDeque::from([b]);
    let mut seen = BTreeSet::from([b]);
    while let Some(x) = queue.pop_front() {
        if x == a {
            break;
        }
        let mut next: Vec<NodeIndex> = graph.neighbors(x).collect();
        next.sort_by(|p, q| graph[*p].cmp(&graph[*q]));
        for y in next {
            if comp_of[y.index()] == comp && seen.insert(y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    // Walk back from `a` to `b`, then read the path forwards.
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

/// True when `kappa` meets every layering constraint of `p`.
pub fn respects_layering(p: &Program, kappa: &BTreeMap<Name, usize>) -> bool {
    module_edges(p).iter().all(|(a, b, strict)| {
        let (ka, kb) = (kappa[a], kappa[b]);
        if *strict {
            ka > kb
        } else {
            ka >= kb
        }
    })
}

/// Value of a body item against the model of its module.
pub fn eval_external(item: &GroundItem, ref_model: &Interpretation) -> TruthValue {
    match item {
        ExtLiteral::Plain(l) => ref_model.value(l),
        ExtLiteral::In { literal, set, .. } => set.test(ref_model.value(literal)),
    }
}

/// Solution of one group of mutually dependent modules.
#[derive(Debug, Clone)]
pub struct SccSolution {
    pub modules: Vec<Name>,
    /// Rules after membership tests are evaluated, including facts for the
    /// literals of lower modules.
    pub rules: RuleSet,
    pub trace: SolveTrace,
}

#[derive(Debug, Clone)]
pub struct LayeredSolution {
    pub ground: GroundRuleSet,
    pub layers: LayerAssignment,
    pub sccs: Vec<SccSolution>,
    pub modules: BTreeMap<Name, Interpretation>,
    pub global: Interpretation,
}

impl LayeredSolution {
    pub fn value(&self, l: &Literal) -> TruthValue {
        self.global.value(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Layer(#[from] LayerError),
}

/// Grounds, layer-checks and solves `p`.
pub fn solve_layered(p: &Program) -> Result<LayeredSolution, EngineError> {
    let layers = layer_check(p)?;
    let g = ground(p)?;
    solve_ground_layered(g, layers)
}

pub fn solve_ground_layered(g: GroundRuleSet, layers: LayerAssignment) -> Result<LayeredSolution, EngineError> {
    let mut global = Interpretation::new();
    let mut modules: BTreeMap<Name, Interpretation> = BTreeMap::new();
    let mut sccs = Vec::with_capacity(layers.sccs.len());
    let mut by_module: BTreeMap<&str, Vec<&crate::ground::GroundRule>> = BTreeMap::new();
    for r in g.rules() {
        by_module.entry(&r.head.atom.module).or_default().push(r);
    }

    for members in &layers.sccs {
        let inside: BTreeSet<&str> = members.iter().map(|m| &**m).collect();
        let mut rules = RuleSet::new();
        let mut lower = BTreeSet::new();
        for m in members {
            for r in by_module.get(&**m).into_iter().flatten() {
                if let Some(rule) = partially_evaluate(&r.head, r.body.as_deref(), &global, &inside, &mut lower) {
                    rules.insert(rule).expect("ground heads are unique");
                }
            }
        }
        for l in lower {
            rules
                .insert(Rule::fact(l))
                .expect("lower-module literals are never heads here");
        }
        let trace = solve(&rules);
        for m in members {
            let mine = trace.model.restrict_to_module(m);
            global = global.union(&mine);
            modules.insert(m.clone(), mine);
        }
        sccs.push(SccSolution {
            modules: members.clone(),
            rules,
            trace,
        });
    }
    Ok(LayeredSolution {
        ground: g,
        layers,
        sccs,
        modules,
        global,
    })
}

/// Replaces membership tests by their constant value and collects the
/// literals of lower modules that must be supplied as facts. `None` when
/// every disjunct is false.
fn partially_evaluate(
    head: &Literal,
    body: Option<&[Vec<GroundItem>]>,
    lower_model: &Interpretation,
    inside: &BTreeSet<&str>,
    lower: &mut BTreeSet<Literal>,
) -> Option<Rule> {
    let Some(ds) = body else {
        return Some(Rule::fact(head.clone()));
    };
    let mut out: Vec<Vec<Literal>> = Vec::with_capacity(ds.len());
    let mut needed = Vec::new();
    for c in ds {
        let mut conj = Vec::with_capacity(c.len());
        let mut dead = false;
        for item in c {
            match item {
                ExtLiteral::In { .. } => {
                    if eval_external(item, lower_model) == TruthValue::False {
                        dead = true;
                        break;
                    }
                }
                ExtLiteral::Plain(l) => {
                    if !inside.contains(&*l.atom.module) {
                        needed.push(l.clone());
                    }
                    conj.push(l.clone());
                }
            }
        }
        if dead {
            continue;
        }
        if conj.is_empty() {
            return Some(Rule::fact(head.clone()));
        }
        out.push(conj);
    }
    if out.is_empty() {
        return None;
    }
    for l in needed {
        for x in [l.clone(), l.complement()] {
            if lower_model.contains(&x) {
                lower.insert(x);
            }
        }
    }
    Some(Rule {
        head: head.clone(),
        body: Body::Or(out),
    })
}

impl fmt::Display for LayerAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, k) in &self.kappa {
            writeln!(f, "{m}: {k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Atom, TruthSet};
    use crate::syntax::parse_program;

    fn lit(m: &str, r: &str) -> Literal {
        Literal::pos(Atom::new(m, r, &[]))
    }

    #[test]
    fn membership_forces_strict_layer() {
        let p = parse_program(
            "K.loc(X,Y,T) :- L.nextTime(T,S), L.house(X), L.loc(X,Y,S), L.chLoc(X,S) in {u,f}.",
        )
        .unwrap();
        let a = layer_check(&p).unwrap();
        assert!(a.kappa[&Name::from("L")] < a.kappa[&Name::from("K")]);
        assert!(respects_layering(&p, &a.kappa));
        assert_eq!(a.sccs, vec![vec![Name::from("L")], vec![Name::from("K")]]);
    }

    #[test]
    fn single_module_has_layer_zero() {
        let p = parse_program("p :- q.\nq.").unwrap();
        let a = layer_check(&p).unwrap();
        assert_eq!(a.kappa.values().copied().collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn strict_cycle_is_rejected() {
        let p = parse_program("M.p :- N.q in {t}.\nN.q :- M.p.").unwrap();
        match layer_check(&p) {
            Err(LayerError::NotWellLayered { from, to, cycle }) => {
                assert_eq!((&*from, &*to), ("M", "N"));
                assert_eq!(cycle, ["M", "N", "M"].map(Name::from));
            }
            other => panic!("{other:?}"),
        }
        let p = parse_program("M.p :- M.q in {t}.").unwrap();
        assert!(layer_check(&p).is_err());
    }

    #[test]
    fn external_values() {
        let m = Interpretation::new();
        let chloc = Literal::pos(Atom::new("L", "chLoc", &["h1", "s"]));
        let set: TruthSet = [TruthValue::Unknown, TruthValue::False].into_iter().collect();
        let item = ExtLiteral::In {
            literal: chloc.clone(),
            set,
            eq_sugar: false,
        };
        assert_eq!(eval_external(&item, &m), TruthValue::True);
        let empty = ExtLiteral::In {
            literal: chloc,
            set: TruthSet::EMPTY,
            eq_sugar: false,
        };
        assert_eq!(eval_external(&empty, &m), TruthValue::False);
        let p = lit("M3", "p");
        let model: Interpretation = [p.clone()].into_iter().collect();
        let eq = ExtLiteral::In {
            literal: p.clone(),
            set: TruthSet::single(TruthValue::True),
            eq_sugar: true,
        };
        assert_eq!(eval_external(&eq, &model), TruthValue::True);
        assert_eq!(eval_external(&ExtLiteral::Plain(p), &model), TruthValue::True);
    }

    #[test]
    fn membership_on_empty_module() {
        let p = parse_program("A.p :- B.q in {u}.").unwrap();
        let s = solve_layered(&p).unwrap();
        assert_eq!(s.value(&lit("A", "p")), TruthValue::True);
    }

    #[test]
    fn lower_values_are_preserved() {
        let p = parse_program(
            "B.x.\n-B.x.\nB.y.\n-B.z.\nA.p :- B.x.\nA.q :- B.y.\nA.r :- B.z.\nA.s :- B.w.\n",
        )
        .unwrap();
        let s = solve_layered(&p).unwrap();
        assert_eq!(s.value(&lit("A", "p")), TruthValue::Inconsistent);
        assert_eq!(s.value(&lit("A", "q")), TruthValue::True);
        assert_eq!(s.value(&lit("A", "r")), TruthValue::Unknown);
        assert_eq!(s.value(&lit("A", "s")), TruthValue::Unknown);
        assert!(s.modules[&Name::from("A")].iter().all(|l| &*l.atom.module == "A"));
    }

    #[test]
    fn mutual_plain_references_are_solved_together() {
        let p = parse_program("A.p :- B.q.\nB.q :- A.p | B.r.\nB.r.\n-A.p :- B.r.").unwrap();
        let s = solve_layered(&p).unwrap();
        assert_eq!(s.sccs.len(), 1);
        assert_eq!(s.sccs[0].modules, ["A", "B"].map(Name::from));
        assert_eq!(s.value(&lit("A", "p")), TruthValue::Inconsistent);
    }

    #[test]
    fn false_tests_drop_disjuncts() {
        let p = parse_program("B.x.\nA.p :- B.x in {f}.\nA.q :- B.x in {f}, A.r | B.x = t.").unwrap();
        let s = solve_layered(&p).unwrap();
        assert_eq!(s.value(&lit("A", "p")), TruthValue::Unknown);
        assert_eq!(s.value(&lit("A", "q")), TruthValue::True);
        let a = &s.sccs.iter().find(|c| c.modules[0] == Name::from("A")).unwrap().rules;
        assert!(a.rule(&lit("A", "p")).is_none());
        assert!(a.rule(&lit("A", "q")).unwrap().is_empty());
    }

    #[test]
    fn single_module_matches_plain_solve() {
        let src = "overloaded.\nwait :- overloaded | rest_time.\nrest_time :- wait.\n-overloaded :- rest_time.";
        let p = parse_program(src).unwrap();
        let s = solve_layered(&p).unwrap();
        let rs = ground(&p).unwrap().to_rule_set().unwrap();
        assert_eq!(s.global, solve(&rs).model);
    }
}
