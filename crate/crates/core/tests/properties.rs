mod common;

use std::collections::BTreeSet;

use fourql::ground::ground;
use fourql::logic::{is_model, literal_value};
use fourql::solver::{phi_step, solve_reference};
use fourql::wellsupported::{brute_force_models, is_well_supported, support_order, supports_rule};
use fourql::{
    parse_datalog, parse_program, run_datalog, solve, solve_layered, translate, Atom, Interpretation, Literal,
    Rule, RuleSet, TruthValue,
};
use proptest::prelude::*;

fn lit(k: usize, negative: bool) -> Literal {
    common::lit(k, negative)
}

fn literal(atoms: usize) -> impl Strategy<Value = Literal> {
    (0..atoms, any::<bool>()).prop_map(|(k, n)| lit(k, n))
}

/// Ground programs over up to `atoms` atoms, one rule per head.
fn program(atoms: usize) -> impl Strategy<Value = RuleSet> {
    let body = prop::option::weighted(
        0.7,
        prop::collection::vec(prop::collection::btree_set(literal(atoms), 1..=3), 1..=3),
    );
    prop::collection::btree_map(literal(atoms), body, 0..=2 * atoms).prop_map(|rules| {
        RuleSet::from_rules(rules.into_iter().map(|(h, b)| match b {
            None => Rule::fact(h),
            Some(ds) => {
                let mut unique: Vec<Vec<Literal>> = Vec::new();
                for c in ds {
                    let c: Vec<Literal> = c.into_iter().collect();
                    if !unique.contains(&c) {
                        unique.push(c);
                    }
                }
                Rule::new(h, unique)
            }
        }))
        .unwrap()
    })
}

fn interpretation(atoms: usize) -> impl Strategy<Value = Interpretation> {
    prop::collection::btree_set(literal(atoms), 0..=2 * atoms).prop_map(|s| s.into_iter().collect())
}

fn truth() -> impl Strategy<Value = TruthValue> {
    prop::sample::select(TruthValue::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn connectives_are_lattice_operations(a in truth(), b in truth(), c in truth()) {
        prop_assert_eq!(a.and(b), b.and(a));
        prop_assert_eq!(a.or(b), b.or(a));
        prop_assert_eq!(a.and(b.and(c)), a.and(b).and(c));
        prop_assert_eq!(a.or(b.or(c)), a.or(b).or(c));
        prop_assert_eq!(a.and(a.or(b)), a);
        prop_assert_eq!(a.not().not(), a);
        prop_assert!(matches!(a.implies(b), TruthValue::True | TruthValue::False));
    }

    #[test]
    fn solver_output_is_a_model(s in program(5)) {
        let t = solve(&s);
        prop_assert!(is_model(&s, &t.model));
        prop_assert_eq!(&t.model, &solve_reference(&s));
        prop_assert!(t.i1.is_subset(&t.i3));
        for l in t.i2.iter() {
            prop_assert_ne!(literal_value(l, &t.i2), TruthValue::Inconsistent);
        }
        for l in t.model.iter() {
            match literal_value(l, &t.model) {
                TruthValue::True => prop_assert!(t.i2.contains(l)),
                TruthValue::Inconsistent => prop_assert!(t.i3.contains(l)),
                _ => {}
            }
        }
    }

    #[test]
    fn phi_is_monotone(s in program(4), i in interpretation(4), extra in interpretation(4)) {
        let i2 = solve(&s).i2;
        let j = i.union(&extra);
        prop_assert!(phi_step(&s, &i2, &i).is_subset(&phi_step(&s, &i2, &j)));
    }

    #[test]
    fn phi_iterates_increase(s in program(5)) {
        let t = solve(&s);
        let it = t.phi_iterates();
        for w in it.windows(2) {
            prop_assert!(w[0].is_subset(&w[1]) && w[0] != w[1]);
        }
        prop_assert_eq!(it.last().unwrap(), &t.i3);
    }

    #[test]
    fn solver_output_is_well_supported_or_searchable(s in program(4)) {
        let m = solve(&s).model;
        let by_layers = is_well_supported(&s, &m);
        let by_search = fourql::wellsupported::exists_support_order(&s, &m, 12);
        prop_assert!(by_layers || by_search == Some(true), "{}", s);
    }

    #[test]
    fn support_order_is_strict(s in program(5)) {
        prop_assert!(support_order(&s).is_strict());
    }

    #[test]
    fn supported_heads_are_designated(s in program(4), i in interpretation(4)) {
        prop_assume!(is_model(&s, &i));
        let o = support_order(&s);
        for (h, b) in s.iter() {
            if supports_rule(&i, h, b, &|a, c| o.precedes(a, c)) {
                prop_assert!(matches!(i.value(h), TruthValue::True | TruthValue::Inconsistent));
            }
        }
    }

    #[test]
    fn print_parse_round_trip(s in program(5)) {
        let text = s.to_string();
        let p = parse_program(&text).unwrap();
        let printed = p.to_string();
        prop_assert_eq!(parse_program(&printed).unwrap().to_string(), printed);
        let g = ground(&p).unwrap();
        prop_assert_eq!(g.to_rule_set().unwrap(), s);
    }

    #[test]
    fn ground_programs_ground_to_themselves(s in program(5)) {
        let p = parse_program(&s.to_string()).unwrap();
        let g = ground(&p).unwrap();
        let again = ground(&parse_program(&g.to_string()).unwrap()).unwrap();
        prop_assert_eq!(g, again);
    }

    #[test]
    fn single_module_engine_matches_solver(s in program(5)) {
        let p = parse_program(&s.to_string()).unwrap();
        let sol = solve_layered(&p).unwrap();
        prop_assert_eq!(&sol.global, &solve(&s).model);
    }

    #[test]
    fn translation_is_two_valued(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let p = common::random_datalog(&mut r, 3, 6);
        let expected = run_datalog(&p).unwrap();
        let t = translate(&p).unwrap();
        let sol = solve_layered(&t.program).unwrap();
        for (rel, tuples) in &expected {
            let m = t.answer_module(rel);
            for args in tuples {
                let atom = Atom { module: m.clone(), relation: rel.clone(), args: args.clone() };
                prop_assert_eq!(sol.value(&Literal::pos(atom)), TruthValue::True);
            }
        }
        for (m, i) in &sol.modules {
            if m.starts_with('N') {
                for l in i.iter() {
                    prop_assert!(matches!(i.value(l), TruthValue::True | TruthValue::False));
                }
            }
        }
        // The printed translation reads back to the same rules.
        prop_assert!(parse_program(&t.program.to_string()).unwrap().same_rules(&t.program));
        prop_assert_eq!(parse_datalog(&p.to_string()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Two accepted models agree on which literals are t or i.
    #[test]
    fn accepted_models_agree(s in program(3)) {
        let accepted: Vec<Interpretation> = brute_force_models(&s)
            .unwrap()
            .into_iter()
            .filter(|i| is_well_supported(&s, i))
            .collect();
        let designated = |i: &Interpretation| -> BTreeSet<Literal> {
            i.iter()
                .filter(|l| matches!(i.value(l), TruthValue::True | TruthValue::Inconsistent))
                .cloned()
                .collect()
        };
        for w in accepted.windows(2) {
            prop_assert_eq!(designated(&w[0]), designated(&w[1]));
        }
    }
}
