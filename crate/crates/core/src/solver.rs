//! Well-supported model computation in three phases.
//!
//! 1. `I0` is the least model of the positive program in which every
//!    negative literal `-l` is renamed to a fresh duplicate `l'`; `I1` keeps
//!    the complementary pairs of `I0`. These are inconsistent in every model.
//! 2. `S'` drops the rules whose head is in `I1`; `I2` is the least model of
//!    its positive version. No literal is inconsistent in `I2`.
//! 3. `Φ` spreads inconsistency from `I1`: the head of a rule becomes
//!    inconsistent when some disjunct is `i` under `(I2 - I) ∪ I` and no
//!    disjunct is `t` under `I2 - I`. `I3` is its least fixpoint above `I1`.
//!
//! The model is `(I2 - I3) ∪ I3`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::logic::{Atom, Body, Interpretation, Literal, RuleSet, TruthValue};

/// Symbol of the positive program: an atom or the duplicate `l'` standing
/// for its negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub atom: Atom,
    pub duplicate: bool,
}

impl Symbol {
    pub fn from_literal(l: &Literal) -> Symbol {
        Symbol {
            atom: l.atom.clone(),
            duplicate: l.negative,
        }
    }

    pub fn to_literal(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negative: self.duplicate,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)?;
        if self.duplicate {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// Negation-free program; an empty body list marks a fact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositiveProgram {
    pub rules: BTreeMap<Symbol, Vec<Vec<Symbol>>>,
}

impl PositiveProgram {
    /// Duplicate symbols mapped back to the negative literals they replace.
    pub fn duplicates(&self) -> BTreeMap<Symbol, Literal> {
        let mut out = BTreeMap::new();
        let all = self
            .rules
            .iter()
            .flat_map(|(h, b)| std::iter::once(h).chain(b.iter().flatten()));
        for s in all {
            if s.duplicate {
                out.insert(s.clone(), s.to_literal());
            }
        }
        out
    }
}

impl fmt::Display for PositiveProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (h, b) in &self.rules {
            write!(f, "{h}")?;
            if !b.is_empty() {
                write!(f, " :- ")?;
                for (k, c) in b.iter().enumerate() {
                    if k > 0 {
                        write!(f, " | ")?;
                    }
                    for (j, s) in c.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{s}")?;
                    }
                }
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

pub fn pos_transform(s: &RuleSet) -> PositiveProgram {
    PositiveProgram {
        rules: s
            .iter()
            .map(|(h, b)| {
                let body = b
                    .disjuncts()
                    .iter()
                    .map(|c| c.iter().map(Symbol::from_literal).collect())
                    .collect();
                (Symbol::from_literal(h), body)
            })
            .collect(),
    }
}

/// Least Herbrand model of a positive program.
pub fn least_herbrand_model(p: &PositiveProgram) -> BTreeSet<Symbol> {
    let mut ids: HashMap<&Symbol, u32> = HashMap::new();
    let mut syms: Vec<&Symbol> = Vec::new();
    let mut id_of = |s| {
        *ids.entry(s).or_insert_with(|| {
            syms.push(s);
            (syms.len() - 1) as u32
        })
    };
    let mut rules = Vec::with_capacity(p.rules.len());
    for (h, b) in &p.rules {
        let head = id_of(h);
        let conjs: Vec<Vec<u32>> = b
            .iter()
            .map(|c| {
                let mut v: Vec<u32> = c.iter().map(&mut id_of).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        rules.push((head, conjs));
    }
    let derived = least_model(syms.len(), &rules, &|_| true);
    syms.iter()
        .zip(derived)
        .filter(|(_, d)| *d)
        .map(|(s, _)| (*s).clone())
        .collect()
}

/// Counter-based least model over symbol ids. A rule with no conjunctions
/// is a fact. `active` filters rules by index.
fn least_model(n: usize, rules: &[(u32, Vec<Vec<u32>>)], active: &dyn Fn(usize) -> bool) -> Vec<bool> {
    let mut occ: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    let mut missing: Vec<Vec<u32>> = Vec::with_capacity(rules.len());
    let mut derived = vec![false; n];
    let mut queue = Vec::new();
    for (ri, (head, conjs)) in rules.iter().enumerate() {
        missing.push(conjs.iter().map(|c| c.len() as u32).collect());
        if !active(ri) {
            continue;
        }
        if conjs.is_empty() {
            queue.push(*head);
        }
        for (ci, c) in conjs.iter().enumerate() {
            for &s in c {
                occ[s as usize].push((ri as u32, ci as u32));
            }
        }
    }
    while let Some(s) = queue.pop() {
        if derived[s as usize] {
            continue;
        }
        derived[s as usize] = true;
        for &(ri, ci) in &occ[s as usize] {
            let m = &mut missing[ri as usize][ci as usize];
            *m -= 1;
            if *m == 0 {
                let head = rules[ri as usize].0;
                if !derived[head as usize] {
                    queue.push(head);
                }
            }
        }
    }
    derived
}

/// Everything the three phases produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveTrace {
    pub i0: Interpretation,
    pub i1: Interpretation,
    pub s_prime: RuleSet,
    pub i2: Interpretation,
    /// Literals added by each application of `Φ`, starting from `I1`.
    pub phi_deltas: Vec<Vec<Literal>>,
    pub i3: Interpretation,
    pub model: Interpretation,
}

impl SolveTrace {
    /// The increasing sequence `I1, Φ(I1), Φ(Φ(I1)), ...` up to the fixpoint.
    pub fn phi_iterates(&self) -> Vec<Interpretation> {
        let mut cur = self.i1.clone();
        let mut out = vec![cur.clone()];
        for d in &self.phi_deltas {
            for l in d {
                cur.insert(l.clone());
            }
            out.push(cur.clone());
        }
        out
    }

    pub fn phi_iterate_sizes(&self) -> Vec<usize> {
        let mut n = self.i1.len();
        let mut out = vec![n];
        for d in &self.phi_deltas {
            n += d.len();
            out.push(n);
        }
        out
    }
}

/// Rule set compiled to integer literal ids: atom `a` gives `2a` and `2a+1`.
struct Compiled {
    atoms: Vec<Atom>,
    heads: Vec<u32>,
    /// Per rule, its conjunctions as sorted, deduplicated literal ids.
    conjs: Vec<Vec<Vec<u32>>>,
}

fn lit_id(atom: u32, negative: bool) -> u32 {
    atom * 2 + negative as u32
}

impl Compiled {
    fn new(s: &RuleSet) -> Compiled {
        let mut ids: HashMap<&Atom, u32> = HashMap::new();
        let mut atoms: Vec<Atom> = Vec::new();
        fn id<'a>(ids: &mut HashMap<&'a Atom, u32>, l: &'a Literal, atoms: &mut Vec<Atom>) -> u32 {
            let a = *ids.entry(&l.atom).or_insert_with(|| {
                atoms.push(l.atom.clone());
                (atoms.len() - 1) as u32
            });
            lit_id(a, l.negative)
        }
        let mut heads = Vec::with_capacity(s.len());
        let mut conjs = Vec::with_capacity(s.len());
        for (h, b) in s.iter() {
            heads.push(id(&mut ids, h, &mut atoms));
            conjs.push(
                b.disjuncts()
                    .iter()
                    .map(|c| {
                        let mut v: Vec<u32> = c.iter().map(|l| id(&mut ids, l, &mut atoms)).collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    })
                    .collect(),
            );
        }
        Compiled {
            atoms,
            heads,
            conjs,
        }
    }

    fn n_lits(&self) -> usize {
        self.atoms.len() * 2
    }

    fn literal(&self, id: u32) -> Literal {
        Literal {
            atom: self.atoms[(id / 2) as usize].clone(),
            negative: id % 2 == 1,
        }
    }

    fn interpretation(&self, member: &[bool]) -> Interpretation {
        member
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(id, _)| self.literal(id as u32))
            .collect()
    }

    fn least_model(&self, active: &dyn Fn(usize) -> bool) -> Vec<bool> {
        let rules: Vec<(u32, Vec<Vec<u32>>)> = self
            .heads
            .iter()
            .zip(&self.conjs)
            .map(|(h, c)| (*h, c.clone()))
            .collect();
        least_model(self.n_lits(), &rules, active)
    }

    /// Rounds of `Φ` from the atoms in `start`, given `I2` as literal
    /// membership. Returns the atoms added per round.
    fn phi_rounds(&self, in_i2: &[bool], start: &[bool]) -> Vec<Vec<u32>> {
        let n_atoms = self.atoms.len();
        let mut in_i = start.to_vec();
        // (rule, conjunction) occurrences per atom.
        let mut occ: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_atoms];
        let mut missing: Vec<Vec<u32>> = Vec::with_capacity(self.heads.len());
        let mut in_count: Vec<Vec<u32>> = Vec::with_capacity(self.heads.len());
        for (ri, conjs) in self.conjs.iter().enumerate() {
            let mut m = Vec::with_capacity(conjs.len());
            let mut k = Vec::with_capacity(conjs.len());
            for (ci, c) in conjs.iter().enumerate() {
                let mut miss = 0;
                let mut inc = 0;
                for &l in c {
                    let a = (l / 2) as usize;
                    if occ[a].last() != Some(&(ri as u32, ci as u32)) {
                        occ[a].push((ri as u32, ci as u32));
                    }
                    if in_i[a] {
                        inc += 1;
                    } else if !in_i2[l as usize] {
                        miss += 1;
                    }
                }
                m.push(miss);
                k.push(inc);
            }
            missing.push(m);
            in_count.push(k);
        }
        let fires = |ri: usize, in_i: &[bool], missing: &[Vec<u32>], in_count: &[Vec<u32>]| {
            if in_i[(self.heads[ri] / 2) as usize] {
                return false;
            }
            let mut some_i = false;
            for (m, k) in missing[ri].iter().zip(&in_count[ri]) {
                if *m == 0 {
                    if *k == 0 {
                        return false;
                    }
                    some_i = true;
                }
            }
            some_i
        };

        let mut rounds = Vec::new();
        let mut candidates: Vec<usize> = (0..self.heads.len()).collect();
        loop {
            let mut added: Vec<u32> = candidates
                .iter()
                .copied()
                .filter(|&ri| fires(ri, &in_i, &missing, &in_count))
                .map(|ri| self.heads[ri] / 2)
                .collect();
            added.sort_unstable();
            added.dedup();
            if added.is_empty() {
                return rounds;
            }
            let mut touched = Vec::new();
            for &a in &added {
                in_i[a as usize] = true;
                for &(ri, ci) in &occ[a as usize] {
                    for &l in &self.conjs[ri as usize][ci as usize] {
                        if l / 2 != a {
                            continue;
                        }
                        in_count[ri as usize][ci as usize] += 1;
                        if !in_i2[l as usize] {
                            missing[ri as usize][ci as usize] -= 1;
                        }
                    }
                    touched.push(ri as usize);
                }
            }
            touched.sort_unstable();
            touched.dedup();
            candidates = touched;
            rounds.push(added);
        }
    }

    /// Checks the model relation on ids.
    fn is_model(&self, member: &[bool]) -> bool {
        let value = |l: u32| {
            let neg = l ^ 1;
            match (member[l as usize], member[neg as usize]) {
                (true, true) => TruthValue::Inconsistent,
                (true, false) => TruthValue::True,
                (false, true) => TruthValue::False,
                (false, false) => TruthValue::Unknown,
            }
        };
        self.heads.iter().zip(&self.conjs).all(|(&h, conjs)| {
            let body = if conjs.is_empty() {
                TruthValue::True
            } else {
                conjs
                    .iter()
                    .map(|c| c.iter().map(|&l| value(l)).min().unwrap())
                    .max()
                    .unwrap()
            };
            body.implies(value(h)) == TruthValue::True
        })
    }
}

/// Runs the three phases on a ground rule set.
pub fn solve(s: &RuleSet) -> SolveTrace {
    let c = Compiled::new(s);
    let n_atoms = c.atoms.len();

    let in_i0 = c.least_model(&|_| true);
    let i1_atoms: Vec<bool> = (0..n_atoms).map(|a| in_i0[2 * a] && in_i0[2 * a + 1]).collect();
    let in_i2 = c.least_model(&|ri| !i1_atoms[(c.heads[ri] / 2) as usize]);
    debug_assert!((0..n_atoms).all(|a| !(in_i2[2 * a] && in_i2[2 * a + 1])));

    let rounds = c.phi_rounds(&in_i2, &i1_atoms);
    let mut i3_atoms = i1_atoms.clone();
    for r in &rounds {
        for &a in r {
            i3_atoms[a as usize] = true;
        }
    }
    let pairs = |atoms: &[bool]| -> Vec<bool> { (0..2 * n_atoms).map(|l| atoms[l / 2]).collect() };
    let in_i1 = pairs(&i1_atoms);
    let in_i3 = pairs(&i3_atoms);
    let in_model: Vec<bool> = (0..2 * n_atoms)
        .map(|l| in_i3[l] || in_i2[l])
        .collect();
    debug_assert!(c.is_model(&in_model), "solver output is not a model");

    let i1 = c.interpretation(&in_i1);
    SolveTrace {
        i0: c.interpretation(&in_i0),
        s_prime: s.without_heads(|h| i1.contains(h)),
        i1,
        i2: c.interpretation(&in_i2),
        phi_deltas: rounds
            .iter()
            .map(|r| {
                r.iter()
                    .flat_map(|&a| [c.literal(lit_id(a, false)), c.literal(lit_id(a, true))])
                    .collect()
            })
            .collect(),
        i3: c.interpretation(&in_i3),
        model: c.interpretation(&in_model),
    }
}

/// The well-supported model of `s`.
pub fn solve_model(s: &RuleSet) -> Interpretation {
    solve(s).model
}

pub fn phase1(s: &RuleSet) -> (Interpretation, Interpretation) {
    let t = solve(s);
    (t.i0, t.i1)
}

pub fn phase2(s: &RuleSet, i1: &Interpretation) -> (RuleSet, Interpretation) {
    let s_prime = s.without_heads(|h| i1.contains(h));
    let i2 = least_model_of(&s_prime);
    (s_prime, i2)
}

pub fn phase3(s: &RuleSet, i1: &Interpretation, i2: &Interpretation) -> (Vec<Interpretation>, Interpretation) {
    let mut iterates = vec![i1.clone()];
    let mut cur = i1.clone();
    loop {
        let next = phi_step(s, i2, &cur);
        if next == cur {
            return (iterates, cur);
        }
        iterates.push(next.clone());
        cur = next;
    }
}

/// Least model of the positive version of `s`, read back as literals.
pub fn least_model_of(s: &RuleSet) -> Interpretation {
    least_herbrand_model(&pos_transform(s))
        .iter()
        .map(Symbol::to_literal)
        .collect()
}

/// One application of `Φ`, written directly from its definition.
pub fn phi_step(s: &RuleSet, i2: &Interpretation, i: &Interpretation) -> Interpretation {
    let outside = i2.difference(i);
    let j = outside.union(i);
    let mut out = i.clone();
    for (head, body) in s.iter() {
        let Body::Or(ds) = body else { continue };
        let some_i = ds
            .iter()
            .any(|c| crate::logic::eval_conjunction(c, &j) == TruthValue::Inconsistent);
        let some_t = ds
            .iter()
            .any(|c| crate::logic::eval_conjunction(c, &outside) == TruthValue::True);
        if some_i && !some_t {
            out.insert(head.clone());
            out.insert(head.complement());
        }
    }
    out
}

/// The three phases composed from the reference operations.
pub fn solve_reference(s: &RuleSet) -> Interpretation {
    let i0 = least_model_of(s);
    let i1: Interpretation = i0
        .iter()
        .filter(|l| i0.contains(&l.complement()))
        .cloned()
        .collect();
    let (_, i2) = phase2(s, &i1);
    let (_, i3) = phase3(s, &i1, &i2);
    i2.difference(&i3).union(&i3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{is_model, Rule};

    fn lits(xs: &[&str]) -> Interpretation {
        xs.iter().map(|x| Literal::prop(x)).collect()
    }

    fn rule(head: &str, body: &[&[&str]]) -> Rule {
        if body.is_empty() {
            return Rule::fact(Literal::prop(head));
        }
        Rule::new(
            Literal::prop(head),
            body.iter()
                .map(|c| c.iter().map(|l| Literal::prop(l)).collect())
                .collect(),
        )
    }

    pub(crate) fn mood() -> RuleSet {
        RuleSet::from_rules([
            rule("wait", &[&["overloaded"], &["rest_time"]]),
            rule("rest_time", &[&["wait"]]),
            rule("-overloaded", &[&["rest_time"]]),
            rule("good_mood", &[&["rested"], &["success"]]),
            rule("-rested", &[&["-rest_time"]]),
            rule("rested", &[]),
            rule("success", &[]),
            rule("overloaded", &[]),
        ])
        .unwrap()
    }

    #[test]
    fn positive_transform_renames_negations() {
        let s = RuleSet::from_rules([rule("-rested", &[&["-rest_time"]])]).unwrap();
        assert_eq!(pos_transform(&s).to_string(), "main.rested' :- main.rest_time'.\n");
        let s = RuleSet::from_rules([rule("-overloaded", &[&["rest_time"]])]).unwrap();
        assert_eq!(pos_transform(&s).to_string(), "main.overloaded' :- main.rest_time.\n");
        let s = RuleSet::from_rules([rule("q", &[&["r"]])]).unwrap();
        assert!(pos_transform(&s).duplicates().is_empty());
    }

    #[test]
    fn least_models() {
        let s = RuleSet::from_rules([rule("r", &[]), rule("q", &[&["r"]])]).unwrap();
        assert_eq!(least_model_of(&s), lits(&["r", "q"]));
        let s = RuleSet::from_rules([rule("p", &[&["q"]])]).unwrap();
        assert!(least_model_of(&s).is_empty());
        let i0 = least_model_of(&mood());
        assert!(i0.contains(&Literal::prop("overloaded")) && i0.contains(&Literal::prop("-overloaded")));
    }

    #[test]
    fn mood_trace() {
        let t = solve(&mood());
        assert_eq!(t.i1, lits(&["overloaded", "-overloaded"]));
        assert_eq!(t.s_prime.len(), 6);
        assert!(t.s_prime.rule(&Literal::prop("overloaded")).is_none());
        assert!(t.s_prime.rule(&Literal::prop("-overloaded")).is_none());
        assert_eq!(t.i2, lits(&["success", "rested", "good_mood"]));
        assert_eq!(t.phi_iterate_sizes(), [2, 4, 6, 8]);
        let it = t.phi_iterates();
        assert_eq!(it[1], lits(&["overloaded", "-overloaded", "wait", "-wait"]));
        assert!(!it[3].contains(&Literal::prop("good_mood")));
        assert_eq!(
            t.i3,
            lits(&[
                "overloaded",
                "-overloaded",
                "wait",
                "-wait",
                "rest_time",
                "-rest_time",
                "rested",
                "-rested"
            ])
        );
        let mut expected = t.i3.clone();
        expected.insert(Literal::prop("success"));
        expected.insert(Literal::prop("good_mood"));
        assert_eq!(t.model, expected);
        assert!(is_model(&mood(), &t.model));
    }

    #[test]
    fn phi_step_matches_worked_iterations() {
        let s = mood();
        let i2 = lits(&["success", "rested", "good_mood"]);
        let step = phi_step(&s, &i2, &lits(&["overloaded", "-overloaded"]));
        assert_eq!(step, lits(&["overloaded", "-overloaded", "wait", "-wait"]));
        assert!(phi_step(&s, &i2, &Interpretation::new()).is_empty());
        let (iterates, i3) = phase3(&s, &lits(&["overloaded", "-overloaded"]), &i2);
        assert_eq!(iterates.iter().map(|i| i.len()).collect::<Vec<_>>(), [2, 4, 6, 8]);
        assert_eq!(i3, solve(&s).i3);
    }

    #[test]
    fn workload_model() {
        let s = RuleSet::from_rules([
            rule("overloaded", &[]),
            rule("wait", &[&["overloaded"], &["rest_time"]]),
            rule("rest_time", &[&["wait"]]),
            rule("-overloaded", &[&["rest_time"]]),
        ])
        .unwrap();
        let m = solve_model(&s);
        assert_eq!(
            m,
            lits(&["overloaded", "-overloaded", "wait", "-wait", "rest_time", "-rest_time"])
        );
        assert_eq!(m, solve_reference(&s));
    }

    #[test]
    fn inconsistent_fact_pairs() {
        let first = RuleSet::from_rules([
            rule("rest", &[&["overloaded"]]),
            rule("-rest", &[&["overloaded"]]),
            rule("overloaded", &[]),
            rule("-overloaded", &[]),
        ])
        .unwrap();
        let t = solve(&first);
        assert_eq!(t.i1, lits(&["rest", "-rest", "overloaded", "-overloaded"]));
        assert!(t.s_prime.is_empty() && t.i2.is_empty());
        assert_eq!(t.i3, t.i1);
        assert_eq!(t.model, t.i1);
    }

    #[test]
    fn empty_program() {
        let t = solve(&RuleSet::new());
        assert!(t.model.is_empty() && t.i0.is_empty() && t.phi_deltas.is_empty());
    }

    #[test]
    fn inconsistent_body_forces_inconsistent_head() {
        let s = RuleSet::from_rules([
            rule("q", &[]),
            rule("-q", &[]),
            rule("r", &[]),
            rule("p", &[&["q", "r"]]),
        ])
        .unwrap();
        let m = solve_model(&s);
        assert_eq!(m.value(&Literal::prop("p")), TruthValue::Inconsistent);
        assert!(is_model(&s, &m));
        assert_eq!(m, solve_reference(&s));
    }

    #[test]
    fn true_disjunct_blocks_inconsistency() {
        let s = RuleSet::from_rules([
            rule("q", &[]),
            rule("-q", &[]),
            rule("r", &[]),
            rule("p", &[&["q"], &["r"]]),
        ])
        .unwrap();
        let m = solve_model(&s);
        assert_eq!(m.value(&Literal::prop("p")), TruthValue::True);
    }
}
