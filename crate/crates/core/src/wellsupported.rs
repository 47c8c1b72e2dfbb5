//! Checking that a model is well-supported.
//!
//! A model is well-supported when some strict order on its literals lets
//! every true literal be derived from earlier literals through a true
//! disjunct of its rule, and every inconsistent literal either through a
//! true disjunct or through an inconsistent disjunct of its own rule or of
//! the rule for its complement.
//!
//! [`is_well_supported`] fixes the order to the syntactic order built from
//! the literal layers of the program. [`exists_support_order`] searches all
//! orders and is exponential.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::logic::{
    eval_body, eval_conjunction, is_model, violated_rules, Body, Interpretation, Literal, RuleSet,
    TruthValue,
};

/// Disjoint layers `L0, L1, ...`: `L0` holds the heads of facts and a
/// literal enters the first layer above a complete disjunct of its rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerFamily {
    pub layers: Vec<BTreeSet<Literal>>,
    pub assignment: BTreeMap<Literal, usize>,
}

impl LayerFamily {
    pub fn layer(&self, l: &Literal) -> Option<usize> {
        self.assignment.get(l).copied()
    }

    /// True when every literal of `c` sits in a layer strictly below `head`.
    /// This is exactly the condition that every literal of `c` precedes
    /// `head` in the support order.
    pub fn below(&self, c: &[Literal], head: &Literal) -> bool {
        let Some(h) = self.layer(head) else {
            return false;
        };
        c.iter().all(|l| self.layer(l).is_some_and(|k| k < h))
    }
}

impl fmt::Display for LayerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, layer) in self.layers.iter().enumerate() {
            write!(f, "L{k}: {{")?;
            for (j, l) in layer.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l}")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

pub fn compute_layers(s: &RuleSet) -> LayerFamily {
    let rules: Vec<(&Literal, &Body)> = s.iter().collect();
    let mut occ: HashMap<&Literal, Vec<(usize, usize)>> = HashMap::new();
    let mut missing: Vec<Vec<usize>> = Vec::with_capacity(rules.len());
    let mut current = Vec::new();
    for (ri, (h, b)) in rules.iter().enumerate() {
        if b.is_empty() {
            current.push(*h);
        }
        let mut m = Vec::new();
        for (ci, c) in b.disjuncts().iter().enumerate() {
            let distinct: BTreeSet<&Literal> = c.iter().collect();
            for l in &distinct {
                occ.entry(l).or_default().push((ri, ci));
            }
            m.push(distinct.len());
        }
        missing.push(m);
    }
    let mut family = LayerFamily::default();
    while !current.is_empty() {
        let k = family.layers.len();
        let mut layer = BTreeSet::new();
        for l in current.drain(..) {
            if !family.assignment.contains_key(l) {
                family.assignment.insert(l.clone(), k);
                layer.insert(l.clone());
            }
        }
        if layer.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for l in &layer {
            for &(ri, ci) in occ.get(l).map(Vec::as_slice).unwrap_or(&[]) {
                missing[ri][ci] -= 1;
                if missing[ri][ci] == 0 && !family.assignment.contains_key(rules[ri].0) {
                    next.push(rules[ri].0);
                }
            }
        }
        family.layers.push(layer);
        current = next;
    }
    family
}

/// The strict order on literals generated by the layers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportOrder {
    pub base: BTreeSet<(Literal, Literal)>,
    pub pairs: BTreeSet<(Literal, Literal)>,
}

impl SupportOrder {
    pub fn precedes(&self, a: &Literal, b: &Literal) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    pub fn is_strict(&self) -> bool {
        self.pairs.iter().all(|(a, b)| a != b && !self.precedes(b, a))
    }
}

pub fn support_order(s: &RuleSet) -> SupportOrder {
    let layers = compute_layers(s);
    let mut base = BTreeSet::new();
    for (h, b) in s.iter() {
        for c in b.disjuncts() {
            if layers.below(c, h) {
                for l in c {
                    base.insert((l.clone(), h.clone()));
                }
            }
        }
    }
    let mut succ: BTreeMap<&Literal, Vec<&Literal>> = BTreeMap::new();
    for (a, b) in &base {
        succ.entry(a).or_default().push(b);
    }
    let mut pairs = BTreeSet::new();
    for start in succ.keys() {
        let mut seen = BTreeSet::new();
        let mut stack = vec![*start];
        while let Some(x) = stack.pop() {
            for y in succ.get(x).into_iter().flatten() {
                if seen.insert(*y) {
                    stack.push(y);
                }
            }
        }
        for y in seen {
            pairs.insert(((*start).clone(), y.clone()));
        }
    }
    SupportOrder { base, pairs }
}

/// `i` supports the rule for `head` when its body is empty or some disjunct
/// is true with all its literals preceding `head`.
pub fn supports_rule(
    i: &Interpretation,
    head: &Literal,
    body: &Body,
    precedes: &dyn Fn(&Literal, &Literal) -> bool,
) -> bool {
    match body {
        Body::Empty => true,
        Body::Or(ds) => ds.iter().any(|c| {
            eval_conjunction(c, i) == TruthValue::True && c.iter().all(|l| precedes(l, head))
        }),
    }
}

fn inconsistent_support(
    i: &Interpretation,
    head: &Literal,
    body: &Body,
    precedes: &dyn Fn(&Literal, &Literal) -> bool,
) -> bool {
    eval_body(body, i) == TruthValue::Inconsistent
        && body.disjuncts().iter().any(|c| {
            eval_conjunction(c, i) == TruthValue::Inconsistent
                && c.iter().all(|l| precedes(l, head))
        })
}

/// Why a candidate was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    NotModel { violated: Literal },
    MissingRule { literal: Literal, value: TruthValue },
    Unsupported { literal: Literal, value: TruthValue },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NotModel { violated } => {
                write!(f, "not a model: the rule for {violated} is violated")
            }
            Rejection::MissingRule { literal, value } => {
                write!(f, "{literal} is {value} but no rule has it as head")
            }
            Rejection::Unsupported {
                literal,
                value: TruthValue::True,
            } => write!(
                f,
                "{literal} is t but no true disjunct of its rule lies entirely below it"
            ),
            Rejection::Unsupported { literal, value } => write!(
                f,
                "{literal} is {value} but neither its rule nor the rule for {} has a true or inconsistent disjunct lying entirely below the head",
                literal.complement()
            ),
        }
    }
}

fn check_with(
    s: &RuleSet,
    i: &Interpretation,
    precedes: &dyn Fn(&Literal, &Literal) -> bool,
) -> Result<(), Rejection> {
    if let Some(v) = violated_rules(s, i).first() {
        return Err(Rejection::NotModel {
            violated: (*v).clone(),
        });
    }
    for l in i.iter() {
        let value = i.value(l);
        let own = s.rule(l);
        match value {
            TruthValue::True => {
                let Some(body) = own else {
                    return Err(Rejection::MissingRule {
                        literal: l.clone(),
                        value,
                    });
                };
                if !supports_rule(i, l, body, precedes) {
                    return Err(Rejection::Unsupported {
                        literal: l.clone(),
                        value,
                    });
                }
            }
            TruthValue::Inconsistent => {
                let neg = l.complement();
                let other = s.rule(&neg);
                if own.is_none() && other.is_none() {
                    return Err(Rejection::MissingRule {
                        literal: l.clone(),
                        value,
                    });
                }
                let ok = own.is_some_and(|b| {
                    supports_rule(i, l, b, precedes) || inconsistent_support(i, l, b, precedes)
                }) || other.is_some_and(|b| inconsistent_support(i, &neg, b, precedes));
                if !ok {
                    return Err(Rejection::Unsupported {
                        literal: l.clone(),
                        value,
                    });
                }
            }
            _ => unreachable!("members of an interpretation are t or i"),
        }
    }
    Ok(())
}

/// Checks `i` against the support order of `s`, explaining a rejection.
pub fn explain_well_supported(s: &RuleSet, i: &Interpretation) -> Result<(), Rejection> {
    let layers = compute_layers(s);
    check_with(s, i, &|a, b| {
        layers.below(std::slice::from_ref(a), b)
    })
}

pub fn is_well_supported(s: &RuleSet, i: &Interpretation) -> bool {
    explain_well_supported(s, i).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{atoms} atoms exceed the brute-force limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },
    #[error("expected exactly one well-supported model, found {}", survivors.len())]
    OracleViolation { survivors: Vec<Interpretation> },
}

/// Brute-force limit on atoms, from `FOURQL_MAX_BRUTE` or 12.
pub fn max_brute_atoms() -> usize {
    std::env::var("FOURQL_MAX_BRUTE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(12)
}

/// Every model of `s` over the literals of its atoms, in a fixed order.
pub fn brute_force_models(s: &RuleSet) -> Result<Vec<Interpretation>, OracleError> {
    brute_force_models_limited(s, max_brute_atoms())
}

pub fn brute_force_models_limited(s: &RuleSet, limit: usize) -> Result<Vec<Interpretation>, OracleError> {
    let atoms: Vec<_> = s.atoms().into_iter().collect();
    if atoms.len() > limit {
        return Err(OracleError::TooLarge {
            atoms: atoms.len(),
            limit,
        });
    }
    let lits: Vec<Literal> = atoms
        .iter()
        .flat_map(|a| [Literal::pos(a.clone()), Literal::neg(a.clone())])
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << lits.len()) {
        let i: Interpretation = lits
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        if is_model(s, &i) {
            out.push(i);
        }
    }
    Ok(out)
}

/// The single model that passes [`is_well_supported`].
pub fn unique_well_supported(s: &RuleSet) -> Result<Interpretation, OracleError> {
    let mut survivors: Vec<Interpretation> = brute_force_models(s)?
        .into_iter()
        .filter(|i| is_well_supported(s, i))
        .collect();
    if survivors.len() == 1 {
        Ok(survivors.pop().unwrap())
    } else {
        Err(OracleError::OracleViolation { survivors })
    }
}

/// Searches every strict order on `i` for one that makes it well-supported.
/// Only linear orders need to be tried, since the conditions survive
/// extending an order. `None` when `i` has more than `limit` literals.
pub fn exists_support_order(s: &RuleSet, i: &Interpretation, limit: usize) -> Option<bool> {
    if i.len() > limit || i.len() > 63 {
        return None;
    }
    if !is_model(s, i) {
        return Some(false);
    }
    let lits: Vec<&Literal> = i.iter().collect();
    let index: HashMap<&Literal, usize> = lits.iter().enumerate().map(|(k, l)| (*l, k)).collect();
    let partner: Vec<Option<usize>> = lits.iter().map(|l| index.get(&l.complement()).copied()).collect();
    for l in &lits {
        let v = i.value(l);
        if v == TruthValue::True && s.rule(l).is_none() {
            return Some(false);
        }
        if v == TruthValue::Inconsistent && s.rule(l).is_none() && s.rule(&l.complement()).is_none() {
            return Some(false);
        }
    }
    let mut search = OrderSearch {
        s,
        i,
        lits,
        index,
        partner,
        failed: HashSet::new(),
    };
    Some(search.run(0, 0, 0))
}

struct OrderSearch<'a> {
    s: &'a RuleSet,
    i: &'a Interpretation,
    lits: Vec<&'a Literal>,
    index: HashMap<&'a Literal, usize>,
    partner: Vec<Option<usize>>,
    /// Failed states as (placed, good, done).
    failed: HashSet<(u64, u64, u64)>,
}

impl OrderSearch<'_> {
    fn placed_before(&self, placed: u64) -> impl Fn(&Literal, &Literal) -> bool + '_ {
        move |a, _| self.index.get(a).is_some_and(|&k| placed >> k & 1 == 1)
    }

    /// Statuses of literal `k` if placed right after `placed`:
    /// (supported through a true disjunct, supported through an
    /// inconsistent disjunct of its own rule).
    fn status(&self, k: usize, placed: u64) -> (bool, bool) {
        let l = self.lits[k];
        let before = self.placed_before(placed);
        match self.s.rule(l) {
            None => (false, false),
            Some(b) => (
                supports_rule(self.i, l, b, &before),
                self.i.value(l) == TruthValue::Inconsistent && inconsistent_support(self.i, l, b, &before),
            ),
        }
    }

    /// `good` marks placed halves of inconsistent pairs that got a
    /// true-disjunct support; `done` marks ones that justified their whole
    /// pair through an inconsistent disjunct. Both are cleared once the
    /// partner is placed.
    fn run(&mut self, placed: u64, good: u64, done: u64) -> bool {
        let n = self.lits.len();
        if placed.count_ones() as usize == n {
            return true;
        }
        if self.failed.contains(&(placed, good, done)) {
            return false;
        }
        for k in 0..n {
            if placed >> k & 1 == 1 {
                continue;
            }
            let (good7, good8) = self.status(k, placed);
            let bit = 1u64 << k;
            let (g, d) = match self.partner[k] {
                None if good7 => (good, done),
                None => continue,
                Some(p) if placed >> p & 1 == 0 => (
                    if good7 { good | bit } else { good },
                    if good8 { done | bit } else { done },
                ),
                Some(p) => {
                    let pb = 1u64 << p;
                    if good8 || done & pb != 0 || (good7 && good & pb != 0) {
                        (good & !pb, done & !pb)
                    } else {
                        continue;
                    }
                }
            };
            if self.run(placed | bit, g, d) {
                return true;
            }
        }
        self.failed.insert((placed, good, done));
        false
    }
}
