#![allow(dead_code)]

use std::collections::BTreeSet;

use fourql::datalog::DatalogProgram;
use fourql::{Atom, Literal, Rule, RuleSet};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn atom_name(k: usize) -> String {
    ((b'a' + k as u8) as char).to_string()
}

pub fn lit(k: usize, negative: bool) -> Literal {
    let a = Atom::prop(&atom_name(k));
    if negative {
        Literal::neg(a)
    } else {
        Literal::pos(a)
    }
}

/// Random ground propositional program over at most `max_atoms` atoms and
/// `max_rules` rules. Bodies have up to three disjuncts of up to three
/// literals.
pub fn random_program(r: &mut StdRng, max_atoms: usize, max_rules: usize) -> RuleSet {
    let atoms = r.random_range(1..=max_atoms);
    let mut heads: Vec<Literal> = (0..atoms).flat_map(|k| [lit(k, false), lit(k, true)]).collect();
    heads.shuffle(r);
    let n = r.random_range(0..=max_rules.min(heads.len()));
    let mut rules = Vec::with_capacity(n);
    for head in heads.into_iter().take(n) {
        if r.random_bool(0.3) {
            rules.push(Rule::fact(head));
            continue;
        }
        let disjuncts = (0..r.random_range(1..=3))
            .map(|_| {
                (0..r.random_range(1..=3))
                    .map(|_| lit(r.random_range(0..atoms), r.random_bool(0.4)))
                    .collect()
            })
            .collect();
        rules.push(Rule::new(head, disjuncts));
    }
    RuleSet::from_rules(rules).expect("heads are distinct")
}

/// Source text of `s` with rules, disjuncts and conjuncts in shuffled
/// order and atoms renamed through `names`.
pub fn shuffled_text(r: &mut StdRng, s: &RuleSet, names: &[String]) -> String {
    let rename = |l: &Literal| {
        let k = (l.atom.relation.as_bytes()[0] - b'a') as usize;
        format!("{}{}", if l.is_positive() { "" } else { "-" }, names[k])
    };
    let mut rules = s.to_rules();
    rules.shuffle(r);
    let mut out = String::new();
    for rule in rules {
        out.push_str(&rename(&rule.head));
        let mut ds: Vec<Vec<Literal>> = rule.body.disjuncts().to_vec();
        if !ds.is_empty() {
            ds.shuffle(r);
            let parts: Vec<String> = ds
                .iter_mut()
                .map(|c| {
                    c.shuffle(r);
                    c.iter().map(rename).collect::<Vec<_>>().join(", ")
                })
                .collect();
            out.push_str(" :- ");
            out.push_str(&parts.join(" | "));
        }
        out.push_str(".\n");
    }
    out
}

/// A random bijection of the first `n` atom names onto fresh names.
pub fn renaming(r: &mut StdRng, n: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    names.shuffle(r);
    names
}

/// Random stratified Datalog program with at most `max_strata` strata and
/// `max_relations` relations of arity up to 2 over constants a, b, c.
pub fn random_datalog(r: &mut StdRng, max_strata: usize, max_relations: usize) -> DatalogProgram {
    let consts = ["a", "b", "c"];
    let n = r.random_range(2..=max_relations);
    let strata: Vec<usize> = {
        let mut s: Vec<usize> = (0..n).map(|_| r.random_range(0..max_strata)).collect();
        s.sort();
        s
    };
    let arity: Vec<usize> = (0..n).map(|_| r.random_range(0..=2)).collect();
    let name = |k: usize| format!("r{k}");
    let term = |r: &mut StdRng, vars: &[&str]| -> String {
        if r.random_bool(0.75) {
            vars[r.random_range(0..vars.len())].to_string()
        } else {
            consts[r.random_range(0..consts.len())].to_string()
        }
    };
    let atom = |k: usize, args: Vec<String>| {
        if args.is_empty() {
            name(k)
        } else {
            format!("{}({})", name(k), args.join(", "))
        }
    };
    let mut text = String::new();
    for k in 0..n {
        if strata[k] == 0 || r.random_bool(0.3) {
            for _ in 0..r.random_range(0..=4) {
                let args = (0..arity[k]).map(|_| consts[r.random_range(0..3)].to_string()).collect();
                text.push_str(&format!("{}.\n", atom(k, args)));
            }
        }
        if strata[k] == 0 {
            continue;
        }
        let positive: Vec<usize> = (0..n).filter(|&j| strata[j] <= strata[k]).collect();
        let negative: Vec<usize> = (0..n).filter(|&j| strata[j] < strata[k]).collect();
        for _ in 0..r.random_range(1..=2) {
            let mut body = Vec::new();
            let mut bound: BTreeSet<String> = BTreeSet::new();
            for _ in 0..r.random_range(1..=2) {
                let j = positive[r.random_range(0..positive.len())];
                let args: Vec<String> = (0..arity[j]).map(|_| term(r, &["X", "Y"])).collect();
                bound.extend(args.iter().filter(|a| a.starts_with(char::is_uppercase)).cloned());
                body.push(atom(j, args));
            }
            let vars: Vec<&str> = bound.iter().map(String::as_str).collect();
            let pick = |r: &mut StdRng| {
                if vars.is_empty() {
                    consts[r.random_range(0..3)].to_string()
                } else {
                    term(r, &vars)
                }
            };
            if !negative.is_empty() && r.random_bool(0.6) {
                let j = negative[r.random_range(0..negative.len())];
                let args = (0..arity[j]).map(|_| pick(r)).collect();
                body.push(format!("\\+{}", atom(j, args)));
            }
            let head = atom(k, (0..arity[k]).map(|_| pick(r)).collect());
            text.push_str(&format!("{head} :- {}.\n", body.join(", ")));
        }
    }
    fourql::parse_datalog(&text).unwrap_or_else(|e| panic!("generated program is invalid: {e}\n{text}"))
}
