//! Fact files: one CSV row `rel,c1,...,cn` per fact, `-rel` for a negative
//! fact.

use std::collections::BTreeMap;
use std::io::Read;

use crate::logic::Name;
use crate::syntax::{AtomTemplate, ExtLiteral, LiteralTemplate, Program, SourceRule, Span, Term};

#[derive(Debug, thiserror::Error)]
pub enum FactsError {
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("row {row}: {module}.{relation} has {found} arguments, expected {expected}")]
    ArityMismatch {
        row: usize,
        module: Name,
        relation: Name,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Reads facts for `module`. Arities are checked against `known` and
/// against earlier rows.
pub fn read_facts<R: Read>(
    reader: R,
    module: &str,
    known: &BTreeMap<(Name, Name), usize>,
) -> Result<Program, FactsError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let module: Name = module.into();
    let mut arities = known.clone();
    let mut rules = Vec::new();
    for (k, record) in csv.records().enumerate() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(k + 1);
        let malformed = |message: String| FactsError::Malformed { row, message };
        let mut fields = record.iter();
        let rel = fields.next().unwrap_or_default();
        let (negative, rel) = match rel.strip_prefix('-') {
            Some(r) => (true, r.trim_start()),
            None => (false, rel),
        };
        let valid = rel.starts_with(|c: char| c.is_lowercase())
            && rel.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !valid {
            return Err(malformed(format!("`{rel}` is not a relation name")));
        }
        let mut args = Vec::new();
        for c in fields {
            if c.is_empty() {
                return Err(malformed("empty constant".into()));
            }
            args.push(Term::Const(c.into()));
        }
        let relation: Name = rel.into();
        let expected = *arities
            .entry((module.clone(), relation.clone()))
            .or_insert(args.len());
        if expected != args.len() {
            return Err(FactsError::ArityMismatch {
                row,
                module: module.clone(),
                relation,
                expected,
                found: args.len(),
            });
        }
        rules.push(SourceRule {
            head: ExtLiteral::Plain(LiteralTemplate {
                negative,
                atom: AtomTemplate {
                    module: module.clone(),
                    relation,
                    args,
                },
            }),
            body: None,
            span: Span { line: row, col: 1 },
        });
    }
    Ok(Program { rules })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Program, FactsError> {
        read_facts(text.as_bytes(), "L", &BTreeMap::new())
    }

    #[test]
    fn rows_become_facts() {
        let p = read("loc,h1,p3,s0\n-chLoc,h1,s0\n").unwrap();
        let text: Vec<String> = p.rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(text, ["L.loc(h1, p3, s0).", "-L.chLoc(h1, s0)."]);
        assert!(read("").unwrap().rules.is_empty());
        assert_eq!(read("flag\n").unwrap().rules[0].to_string(), "L.flag.");
    }

    #[test]
    fn quoted_constants() {
        let p = read("name,\"Ann Lee\"\n").unwrap();
        assert_eq!(p.rules[0].to_string(), "L.name(\"Ann Lee\").");
    }

    #[test]
    fn bad_rows() {
        assert!(matches!(read("loc,a\nloc,a,b\n"), Err(FactsError::ArityMismatch { row: 2, .. })));
        assert!(matches!(read("Loc,a\n"), Err(FactsError::Malformed { .. })));
        assert!(matches!(read("loc,,a\n"), Err(FactsError::Malformed { .. })));
        let known = [(("L".into(), "loc".into()), 3)].into_iter().collect();
        assert!(read_facts("loc,a\n".as_bytes(), "L", &known).is_err());
    }
}
