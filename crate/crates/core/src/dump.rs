//! Model output: JSON documents and plain tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::layered::{LayeredSolution, SccSolution};
use crate::logic::{Interpretation, Literal, TruthValue};

pub const SCHEMA: &str = "4ql-model/1";

#[derive(Debug, Clone, Copy, Default)]
pub struct DumpOptions<'a> {
    pub show_unknown: bool,
    pub module: Option<&'a str>,
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelDump {
    pub schema: &'static str,
    pub program: ProgramInfo,
    /// Module name to atom to value.
    pub modules: BTreeMap<String, BTreeMap<String, char>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceDump>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgramInfo {
    pub sha256: String,
    pub rules: usize,
    pub atoms: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceDump {
    pub modules: Vec<String>,
    pub i0: Vec<String>,
    pub i1: Vec<String>,
    pub s_prime_rule_ids: Vec<String>,
    pub i2: Vec<String>,
    pub phi_iterates: Vec<Vec<String>>,
    pub i3: Vec<String>,
    pub model: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn strings<'a, I: IntoIterator<Item = &'a Literal>>(ls: I) -> Vec<String> {
    let mut v: Vec<String> = ls.into_iter().map(Literal::to_string).collect();
    v.sort();
    v
}

fn interp(i: &Interpretation) -> Vec<String> {
    strings(i.iter())
}

impl TraceDump {
    pub fn new(s: &SccSolution) -> TraceDump {
        let t = &s.trace;
        TraceDump {
            modules: s.modules.iter().map(|m| m.to_string()).collect(),
            i0: interp(&t.i0),
            i1: interp(&t.i1),
            s_prime_rule_ids: strings(t.s_prime.heads()),
            i2: interp(&t.i2),
            phi_iterates: t.phi_iterates().iter().map(interp).collect(),
            i3: interp(&t.i3),
            model: interp(&t.model),
        }
    }
}

/// Values of every atom of the Herbrand base, grouped by module.
pub fn atom_table(sol: &LayeredSolution, opts: &DumpOptions) -> BTreeMap<String, BTreeMap<String, char>> {
    let mut out: BTreeMap<String, BTreeMap<String, char>> = BTreeMap::new();
    for m in sol.layers.kappa.keys() {
        if opts.module.is_none_or(|want| want == &**m) {
            out.insert(m.to_string(), BTreeMap::new());
        }
    }
    for l in sol.ground.herbrand_literal_base() {
        if !l.is_positive() {
            continue;
        }
        let Some(table) = out.get_mut(&*l.atom.module) else {
            continue;
        };
        let v = sol.global.atom_value(&l.atom);
        if v == TruthValue::Unknown && !opts.show_unknown {
            continue;
        }
        table.insert(l.atom.to_string(), v.symbol());
    }
    out
}

pub fn model_dump(source: &[u8], sol: &LayeredSolution, opts: &DumpOptions) -> ModelDump {
    let trace = opts.trace.then(|| {
        sol.sccs
            .iter()
            .filter(|s| opts.module.is_none_or(|m| s.modules.iter().any(|x| &**x == m)))
            .map(TraceDump::new)
            .collect()
    });
    ModelDump {
        schema: SCHEMA,
        program: ProgramInfo {
            sha256: sha256_hex(source),
            rules: sol.ground.len(),
            atoms: sol.ground.herbrand_literal_base().len() / 2,
        },
        modules: atom_table(sol, opts),
        trace,
    }
}

pub fn to_json(d: &ModelDump) -> String {
    let mut s = serde_json::to_string_pretty(d).expect("dump is serialisable");
    s.push('\n');
    s
}

/// One table per module: `atom  value`, atoms sorted.
pub fn human(d: &ModelDump) -> String {
    let mut out = String::new();
    for (k, (m, table)) in d.modules.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "module {m}");
        let width = table.keys().map(|a| a.chars().count()).max().unwrap_or(0);
        for (a, v) in table {
            let _ = writeln!(out, "  {a:<width$}  {v}");
        }
    }
    if let Some(trace) = &d.trace {
        for t in trace {
            let _ = writeln!(out, "\ntrace {}", t.modules.join(", "));
            let set = |v: &[String]| format!("{{{}}}", v.join(", "));
            let _ = writeln!(out, "  I0 = {}", set(&t.i0));
            let _ = writeln!(out, "  I1 = {}", set(&t.i1));
            let _ = writeln!(out, "  S' = {} rules", t.s_prime_rule_ids.len());
            let _ = writeln!(out, "  I2 = {}", set(&t.i2));
            for (k, p) in t.phi_iterates.iter().enumerate() {
                let _ = writeln!(out, "  Phi^{k} = {}", set(p));
            }
            let _ = writeln!(out, "  I3 = {}", set(&t.i3));
            let _ = writeln!(out, "  model = {}", set(&t.model));
        }
    }
    out
}
