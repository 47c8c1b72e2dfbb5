//! The four-valued logic underneath 4QL.
//!
//! Truth values are totally ordered `f < u < i < t`. Conjunction and
//! disjunction are minimum and maximum under that order, negation swaps `t`
//! and `f` and fixes `u` and `i`, and implication only ever yields `t` or `f`.
//!
//! Interpretations are plain sets of ground literals; the value of a literal
//! is read off from whether it and its complement are present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Interned-ish name used for modules, relations and constants.
pub type Name = Arc<str>;

/// Module hosting relations written without a `M.` qualifier.
pub const DEFAULT_MODULE: &str = "main";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TruthValue {
    #[serde(rename = "f")]
    False,
    #[serde(rename = "u")]
    Unknown,
    #[serde(rename = "i")]
    Inconsistent,
    #[serde(rename = "t")]
    True,
}

impl TruthValue {
    pub const ALL: [TruthValue; 4] = [
        TruthValue::False,
        TruthValue::Unknown,
        TruthValue::Inconsistent,
        TruthValue::True,
    ];

    pub fn and(self, other: TruthValue) -> TruthValue {
        self.min(other)
    }

    pub fn or(self, other: TruthValue) -> TruthValue {
        self.max(other)
    }

    pub fn not(self) -> TruthValue {
        match self {
            TruthValue::False => TruthValue::True,
            TruthValue::True => TruthValue::False,
            v => v,
        }
    }

    /// Rule implication: `f`/`u` bodies are vacuous, an `i` body demands an
    /// `i` head, a `t` body accepts `t` or `i`.
    pub fn implies(self, head: TruthValue) -> TruthValue {
        use TruthValue::*;
        let holds = match self {
            False | Unknown => true,
            Inconsistent => head == Inconsistent,
            True => matches!(head, True | Inconsistent),
        };
        if holds {
            True
        } else {
            False
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TruthValue::False => 'f',
            TruthValue::Unknown => 'u',
            TruthValue::Inconsistent => 'i',
            TruthValue::True => 't',
        }
    }

    pub fn from_symbol(c: char) -> Option<TruthValue> {
        match c {
            'f' => Some(TruthValue::False),
            'u' => Some(TruthValue::Unknown),
            'i' => Some(TruthValue::Inconsistent),
            't' => Some(TruthValue::True),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// n-ary conjunction; the empty conjunction is `t`.
pub fn conj_all<I: IntoIterator<Item = TruthValue>>(values: I) -> TruthValue {
    values.into_iter().fold(TruthValue::True, TruthValue::and)
}

/// n-ary disjunction; the empty disjunction is `f`.
pub fn disj_all<I: IntoIterator<Item = TruthValue>>(values: I) -> TruthValue {
    values.into_iter().fold(TruthValue::False, TruthValue::or)
}

/// A subset of the four truth values, as used by `ℓ in {..}` tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TruthSet(u8);

impl TruthSet {
    pub const EMPTY: TruthSet = TruthSet(0);

    pub fn single(v: TruthValue) -> TruthSet {
        TruthSet(v.bit())
    }

    pub fn insert(&mut self, v: TruthValue) {
        self.0 |= v.bit();
    }

    pub fn contains(self, v: TruthValue) -> bool {
        self.0 & v.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TruthValue> {
        TruthValue::ALL.into_iter().filter(move |v| self.contains(*v))
    }

    /// Membership test as a two-valued truth value.
    pub fn test(self, v: TruthValue) -> TruthValue {
        if self.contains(v) {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }
}

impl FromIterator<TruthValue> for TruthSet {
    fn from_iter<I: IntoIterator<Item = TruthValue>>(iter: I) -> Self {
        let mut s = TruthSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Display for TruthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Ground atom `module.relation(c1, ..., cn)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub module: Name,
    pub relation: Name,
    pub args: Vec<Name>,
}

impl Atom {
    pub fn new(module: &str, relation: &str, args: &[&str]) -> Atom {
        Atom {
            module: module.into(),
            relation: relation.into(),
            args: args.iter().map(|a| Name::from(*a)).collect(),
        }
    }

    /// Zero-argument atom in the default module.
    pub fn prop(relation: &str) -> Atom {
        Atom::new(DEFAULT_MODULE, relation, &[])
    }

    pub fn signature(&self) -> Signature {
        Signature {
            module: self.module.clone(),
            relation: self.relation.clone(),
            arity: self.args.len(),
        }
    }
}

/// Relation symbol together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub module: Name,
    pub relation: Name,
    pub arity: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}/{}", self.module, self.relation, self.arity)
    }
}

/// True when `s` can be printed as a bare constant.
pub fn is_bare_constant(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if c.is_ascii_digit() || c == '-' => {
            let digits = if c == '-' { &s[1..] } else { s };
            !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
        }
        _ => false,
    }
}

pub(crate) fn write_constant(f: &mut fmt::Formatter<'_>, c: &str) -> fmt::Result {
    if is_bare_constant(c) {
        write!(f, "{c}")
    } else {
        write!(f, "\"")?;
        for ch in c.chars() {
            match ch {
                '"' => write!(f, "\\\"")?,
                '\\' => write!(f, "\\\\")?,
                '\n' => write!(f, "\\n")?,
                ch => write!(f, "{ch}")?,
            }
        }
        write!(f, "\"")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.module, self.relation)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (k, a) in self.args.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write_constant(f, a)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Signed ground atom. Positive literals order before their negations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negative: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal {
            atom,
            negative: false,
        }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal {
            atom,
            negative: true,
        }
    }

    /// Shorthand for a propositional literal of the default module;
    /// a leading `-` makes it negative.
    pub fn prop(text: &str) -> Literal {
        match text.strip_prefix('-') {
            Some(rest) => Literal::neg(Atom::prop(rest)),
            None => Literal::pos(Atom::prop(text)),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.negative
    }

    pub fn complement(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negative: !self.negative,
        }
    }

    pub fn module(&self) -> &Name {
        &self.atom.module
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A finite set of ground literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Interpretation {
    literals: BTreeSet<Literal>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn insert(&mut self, l: Literal) -> bool {
        self.literals.insert(l)
    }

    pub fn remove(&mut self, l: &Literal) -> bool {
        self.literals.remove(l)
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.literals.contains(l)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn as_set(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.literals.is_subset(&other.literals)
    }

    pub fn union(&self, other: &Interpretation) -> Interpretation {
        self.literals.union(&other.literals).cloned().collect()
    }

    pub fn difference(&self, other: &Interpretation) -> Interpretation {
        self.literals.difference(&other.literals).cloned().collect()
    }

    /// Four-case valuation of a literal.
    pub fn value(&self, l: &Literal) -> TruthValue {
        let has = self.literals.contains(l);
        let has_neg = self.literals.contains(&l.complement());
        match (has, has_neg) {
            (true, false) => TruthValue::True,
            (true, true) => TruthValue::Inconsistent,
            (false, false) => TruthValue::Unknown,
            (false, true) => TruthValue::False,
        }
    }

    /// Value of the positive literal over `atom`.
    pub fn atom_value(&self, atom: &Atom) -> TruthValue {
        self.value(&Literal::pos(atom.clone()))
    }

    /// Literals whose atom lives in `module`.
    pub fn restrict_to_module(&self, module: &str) -> Interpretation {
        self.literals
            .iter()
            .filter(|l| &*l.atom.module == module)
            .cloned()
            .collect()
    }
}

impl FromIterator<Literal> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Interpretation {
            literals: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Interpretation {
    type Item = &'a Literal;
    type IntoIter = std::collections::btree_set::Iter<'a, Literal>;

    fn into_iter(self) -> Self::IntoIter {
        self.literals.iter()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, l) in self.literals.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Rule body: either the designated empty body of a fact, or a disjunction
/// of non-empty conjunctions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Body {
    Empty,
    Or(Vec<Vec<Literal>>),
}

impl Body {
    /// Builds a disjunctive body. Panics if there are no disjuncts or one of
    /// them is empty; an always-true body must be written as [`Body::Empty`].
    pub fn or(disjuncts: Vec<Vec<Literal>>) -> Body {
        assert!(!disjuncts.is_empty(), "a rule body needs at least one disjunct");
        assert!(
            disjuncts.iter().all(|c| !c.is_empty()),
            "conjunctions in a rule body are non-empty"
        );
        Body::Or(disjuncts)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Body::Empty)
    }

    pub fn disjuncts(&self) -> &[Vec<Literal>] {
        match self {
            Body::Empty => &[],
            Body::Or(d) => d,
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.disjuncts().iter().flatten()
    }
}

/// Ground rule over plain literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Literal,
    pub body: Body,
}

impl Rule {
    pub fn fact(head: Literal) -> Rule {
        Rule {
            head,
            body: Body::Empty,
        }
    }

    pub fn new(head: Literal, disjuncts: Vec<Vec<Literal>>) -> Rule {
        Rule {
            head,
            body: Body::or(disjuncts),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if let Body::Or(ds) = &self.body {
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

/// Two rules were given for the same head literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("more than one rule with head {0}; combine the bodies with `|` instead")]
pub struct DuplicateHead(pub Literal);

/// A set of ground rules with at most one rule per head literal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: BTreeMap<Literal, Body>,
}

impl RuleSet {
    pub fn new() -> RuleSet {
        RuleSet::default()
    }

    pub fn from_rules<I: IntoIterator<Item = Rule>>(rules: I) -> Result<RuleSet, DuplicateHead> {
        let mut set = RuleSet::new();
        for r in rules {
            set.insert(r)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, rule: Rule) -> Result<(), DuplicateHead> {
        if self.rules.contains_key(&rule.head) {
            return Err(DuplicateHead(rule.head));
        }
        self.rules.insert(rule.head, rule.body);
        Ok(())
    }

    /// `rule(ℓ)`: the body of the rule with head `head`, if any.
    pub fn rule(&self, head: &Literal) -> Option<&Body> {
        self.rules.get(head)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules in head order.
    pub fn iter(&self) -> impl Iterator<Item = (&Literal, &Body)> {
        self.rules.iter()
    }

    pub fn heads(&self) -> impl Iterator<Item = &Literal> {
        self.rules.keys()
    }

    pub fn to_rules(&self) -> Vec<Rule> {
        self.rules
            .iter()
            .map(|(h, b)| Rule {
                head: h.clone(),
                body: b.clone(),
            })
            .collect()
    }

    /// Copy without the rules whose head satisfies `drop`.
    pub fn without_heads<F: Fn(&Literal) -> bool>(&self, drop: F) -> RuleSet {
        RuleSet {
            rules: self
                .rules
                .iter()
                .filter(|(h, _)| !drop(h))
                .map(|(h, b)| (h.clone(), b.clone()))
                .collect(),
        }
    }

    /// Every atom mentioned in a head or a body.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut atoms = BTreeSet::new();
        for (h, b) in &self.rules {
            atoms.insert(h.atom.clone());
            for l in b.literals() {
                atoms.insert(l.atom.clone());
            }
        }
        atoms
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (h, b) in &self.rules {
            let r = Rule {
                head: h.clone(),
                body: b.clone(),
            };
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn literal_value(l: &Literal, i: &Interpretation) -> TruthValue {
    i.value(l)
}

pub fn eval_conjunction(c: &[Literal], i: &Interpretation) -> TruthValue {
    conj_all(c.iter().map(|l| i.value(l)))
}

/// Value of a rule body; the empty body is `t`.
pub fn eval_body(b: &Body, i: &Interpretation) -> TruthValue {
    match b {
        Body::Empty => TruthValue::True,
        Body::Or(ds) => disj_all(ds.iter().map(|c| eval_conjunction(c, i))),
    }
}

/// Rules whose implication `body → head` is not `t` under `i`.
pub fn violated_rules<'a>(s: &'a RuleSet, i: &Interpretation) -> Vec<&'a Literal> {
    s.iter()
        .filter(|(h, b)| eval_body(b, i).implies(i.value(h)) != TruthValue::True)
        .map(|(h, _)| h)
        .collect()
}

pub fn is_model(s: &RuleSet, i: &Interpretation) -> bool {
    s.iter()
        .all(|(h, b)| eval_body(b, i).implies(i.value(h)) == TruthValue::True)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TruthValue::*;

    fn v(c: char) -> TruthValue {
        TruthValue::from_symbol(c).unwrap()
    }

    // Rows f, u, i, t; columns f, u, i, t, transcribed from the published tables.
    const AND: [&str; 4] = ["ffff", "fuuu", "fuii", "fuit"];
    const OR: [&str; 4] = ["fuit", "uuit", "iiit", "tttt"];
    const IMP: [&str; 4] = ["tttt", "tttt", "fftf", "fftt"];
    const NOT: &str = "tuif";

    #[test]
    fn connective_tables_match_transcription() {
        for (r, a) in TruthValue::ALL.into_iter().enumerate() {
            for (c, b) in TruthValue::ALL.into_iter().enumerate() {
                assert_eq!(a.and(b), v(AND[r].as_bytes()[c] as char), "{a} and {b}");
                assert_eq!(a.or(b), v(OR[r].as_bytes()[c] as char), "{a} or {b}");
                assert_eq!(a.implies(b), v(IMP[r].as_bytes()[c] as char), "{a} -> {b}");
            }
            assert_eq!(a.not(), v(NOT.as_bytes()[r] as char));
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(Inconsistent.and(True), Inconsistent);
        assert_eq!(Unknown.or(Inconsistent), Inconsistent);
        assert_eq!(Inconsistent.not(), Inconsistent);
        assert_eq!(Unknown.not(), Unknown);
        assert_eq!(True.not(), False);
        assert_eq!(Unknown.implies(False), True);
        assert_eq!(Inconsistent.implies(Inconsistent), True);
        assert_eq!(Inconsistent.implies(True), False);
        for x in TruthValue::ALL {
            assert_eq!(True.and(x), x);
            assert_eq!(False.or(x), x);
        }
        assert_eq!(conj_all([True, Inconsistent, Unknown]), Unknown);
        assert_eq!(disj_all([False, Unknown]), Unknown);
        assert_eq!(conj_all([]), True);
        assert_eq!(disj_all([]), False);
    }

    #[test]
    fn order_is_total_and_strict() {
        let all = TruthValue::ALL;
        for a in all {
            for b in all {
                assert_eq!(a == b, a.cmp(&b).is_eq());
                assert!(a <= b || b <= a);
                for c in all {
                    if a < b && b < c {
                        assert!(a < c);
                    }
                }
            }
        }
        assert!(False < Unknown && Unknown < Inconsistent && Inconsistent < True);
    }

    #[test]
    fn negation_is_involutive() {
        for a in TruthValue::ALL {
            assert_eq!(a.not().not(), a);
        }
        assert_eq!(Unknown.and(Inconsistent).not(), Unknown);
        assert_eq!(Unknown.not().or(Inconsistent.not()), Inconsistent);
    }

    #[test]
    fn implication_is_two_valued() {
        for a in TruthValue::ALL {
            for b in TruthValue::ALL {
                assert!(matches!(a.implies(b), True | False));
            }
        }
    }

    #[test]
    fn literal_values_follow_membership() {
        let o = Literal::prop("overloaded");
        let i: Interpretation = [o.clone(), o.complement()].into_iter().collect();
        assert_eq!(i.value(&o), Inconsistent);
        assert_eq!(i.value(&o.complement()), Inconsistent);
        assert_eq!(Interpretation::new().value(&o), Unknown);
        let w = Literal::prop("wait");
        let j: Interpretation = [w.clone()].into_iter().collect();
        assert_eq!(j.value(&w.complement()), False);
        assert_eq!(j.value(&w), True);
    }

    #[test]
    fn complement_is_involutive() {
        let l = Literal::pos(Atom::new("K", "loc", &["h1", "p3", "s0"]));
        assert_eq!(l.complement().complement(), l);
        assert_ne!(l.complement(), l);
        assert_eq!(l.complement().to_string(), "-K.loc(h1,p3,s0)");
    }

    #[test]
    fn bodies_evaluate_by_min_max() {
        let o = Literal::prop("overloaded");
        let rt = Literal::prop("rest_time");
        let i: Interpretation = [o.clone(), o.complement()].into_iter().collect();
        let b = Body::or(vec![vec![o.clone()], vec![rt.clone()]]);
        assert_eq!(eval_body(&b, &i), Inconsistent);
        assert_eq!(eval_body(&Body::Empty, &i), True);
        let rested = Literal::prop("rested");
        let success = Literal::prop("success");
        let j: Interpretation = [success.clone(), rested.clone()].into_iter().collect();
        assert_eq!(
            eval_body(&Body::or(vec![vec![rested], vec![success]]), &j),
            True
        );
    }

    #[test]
    fn model_relation() {
        let p = Literal::prop("p");
        let s = RuleSet::from_rules([Rule::fact(p.clone())]).unwrap();
        assert!(!is_model(&s, &Interpretation::new()));
        assert!(is_model(&s, &[p.clone()].into_iter().collect()));
        assert!(is_model(&s, &[p.clone(), p.complement()].into_iter().collect()));
        assert!(!is_model(&s, &[p.complement()].into_iter().collect()));
    }

    #[test]
    fn duplicate_heads_are_rejected() {
        let r = Literal::prop("r");
        let err = RuleSet::from_rules([Rule::fact(r.clone()), Rule::fact(r.clone())]).unwrap_err();
        assert_eq!(err, DuplicateHead(r));
    }

    #[test]
    fn truth_sets() {
        let s: TruthSet = [Unknown, False].into_iter().collect();
        assert_eq!(s.to_string(), "{f, u}");
        assert_eq!(s.test(Unknown), True);
        assert_eq!(s.test(Inconsistent), False);
        assert_eq!(TruthSet::EMPTY.test(True), False);
    }

    #[test]
    fn constants_print_quoted_when_needed() {
        let a = Atom::new("main", "name", &["bob", "Alice", "42", "two words"]);
        assert_eq!(a.to_string(), "main.name(bob,\"Alice\",42,\"two words\")");
    }
}
