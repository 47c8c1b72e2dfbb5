//! A four-valued rule language with negation in heads and bodies.
//!
//! Programs are parsed ([`syntax`]), grounded ([`ground`]), checked for a
//! module layering ([`layered`]) and solved module by module with the
//! three-phase algorithm of [`solver`]. [`wellsupported`] checks candidate
//! models independently and [`datalog`] translates stratified Datalog with
//! negation into layered modules.
//!
//! ```
//! use fourql::{solve_text, Literal, TruthValue};
//!
//! let sol = solve_text("a. -a. b :- a.").unwrap();
//! assert_eq!(sol.value(&Literal::prop("a")), TruthValue::Inconsistent);
//! assert_eq!(sol.value(&Literal::prop("b")), TruthValue::Inconsistent);
//! ```

pub mod cli;
pub mod datalog;
pub mod dump;
pub mod facts;
pub mod ground;
pub mod layered;
pub mod logic;
pub mod query;
pub mod solver;
pub mod syntax;
pub mod wellsupported;

pub use datalog::{parse_datalog, run_datalog, translate, DatalogError, DatalogProgram};
pub use ground::{ground, GroundError, GroundRuleSet};
pub use layered::{layer_check, solve_layered, EngineError, LayerError, LayeredSolution};
pub use logic::{Atom, Body, Interpretation, Literal, Name, Rule, RuleSet, TruthSet, TruthValue};
pub use query::{parse_formula, Formula, QueryError};
pub use solver::{solve, SolveTrace};
pub use syntax::{parse_program, Diagnostic, ParseError, Program};
pub use wellsupported::{is_well_supported, unique_well_supported};

/// Any failure of the pipeline from text to answers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Datalog(#[from] DatalogError),
    #[error(transparent)]
    Facts(#[from] facts::FactsError),
}

impl From<GroundError> for Error {
    fn from(e: GroundError) -> Error {
        Error::Engine(e.into())
    }
}

impl From<LayerError> for Error {
    fn from(e: LayerError) -> Error {
        Error::Engine(e.into())
    }
}

/// Parses, validates and solves program text.
pub fn solve_text(text: &str) -> Result<LayeredSolution, Error> {
    let p = parse_program(text)?;
    let errors: Vec<Diagnostic> = syntax::validate(&p).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(Error::Invalid(errors));
    }
    Ok(solve_layered(&p)?)
}

/// Solves `program` and evaluates the ground formula `formula` in its model.
pub fn query_text(program: &str, formula: &str) -> Result<TruthValue, Error> {
    let sol = solve_text(program)?;
    let f = parse_formula(formula)?;
    Ok(query::evaluate(&f, sol.ground.signatures(), &sol.global)?)
}
