//! The `fourql` command line.
//!
//! Exit status is 0 on success, 1 when the input is rejected (parse or
//! validation errors, layering cycles, a failed verification, a false
//! `translate --check`) and 2 on usage or I/O errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::datalog::{self, Translation};
use crate::dump::{self, DumpOptions};
use crate::facts::read_facts;
use crate::ground::ground;
use crate::layered::{layer_check, solve_layered, LayeredSolution};
use crate::logic::{Atom, Interpretation, Literal, Name, TruthValue};
use crate::query::{evaluate, parse_formula};
use crate::syntax::{parse_program, validate, Program};
use crate::wellsupported::{explain_well_supported, exists_support_order, max_brute_atoms, unique_well_supported};

#[derive(Debug, Parser)]
#[command(name = "fourql", version, about = "Four-valued rule programs: check, solve, query, verify, translate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, validate and layer-check programs.
    Check {
        #[command(flatten)]
        input: Input,
        /// Print diagnostics as JSON lines.
        #[arg(long)]
        json: bool,
    },
    /// Print the ground program.
    Ground {
        #[command(flatten)]
        input: Input,
    },
    /// Compute the well-supported model.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Include the intermediate sets of the solver.
        #[arg(long)]
        trace: bool,
        /// Write a JSON document instead of tables.
        #[arg(long)]
        json: bool,
        /// Only show this module.
        #[arg(long, value_name = "MODULE")]
        module: Option<String>,
        /// Also list atoms whose value is u.
        #[arg(long)]
        show_unknown: bool,
    },
    /// Evaluate a ground formula in the model, printing t, f, i or u.
    Query {
        /// Formula such as `main.a, -main.b | main.c in {i}`.
        #[arg(allow_hyphen_values = true)]
        formula: String,
        #[command(flatten)]
        input: Input,
    },
    /// Check that the computed model is well-supported.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Say which condition fails and for which literal.
        #[arg(long)]
        explain: bool,
        /// Also search all support orders and, for small programs, all
        /// interpretations.
        #[arg(long)]
        exhaustive: bool,
        /// Verify this candidate model (a file of ground literals, one
        /// per `.`) instead of the computed one.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Translate stratified Datalog with negation into modules.
    Translate {
        /// Datalog program (`.dl`).
        path: PathBuf,
        /// Write the translation here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Solve the translation, compare it with direct stratified
        /// evaluation and print the answers.
        #[arg(long)]
        check: bool,
        /// With --check, also print the `M` and `Dom` modules.
        #[arg(long)]
        show_internal: bool,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    /// Program files (`.4ql`); read together as one program.
    #[arg(required = true, value_name = "FILE")]
    pub paths: Vec<PathBuf>,
    /// Load CSV facts into a module, as `MODULE=path.csv`.
    #[arg(long = "facts", value_name = "MODULE=CSV")]
    pub facts: Vec<String>,
}

/// Failure of a command together with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn rejected(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::usage(format!("{}: not UTF-8", path.display())))
}

struct Loaded {
    program: Program,
    bytes: Vec<u8>,
}

/// Reads, parses and validates every file, then adds the fact files.
/// Diagnostics go to `err`.
fn load(input: &Input, json: bool, err: &mut dyn Write) -> Result<Loaded, Failure> {
    let mut program = Program::default();
    let mut bytes = Vec::new();
    let mut failed = false;
    for path in &input.paths {
        let text = read_text(path)?;
        bytes.extend_from_slice(text.as_bytes());
        let diags = match parse_program(&text) {
            Ok(p) => {
                let d = validate(&p);
                program.extend(p);
                d
            }
            Err(e) => vec![e.to_diagnostic()],
        };
        for d in &diags {
            failed |= d.is_error();
            let _ = if json {
                writeln!(err, "{}", d.to_json_line())
            } else {
                writeln!(err, "{}:{d}", path.display())
            };
        }
    }
    if failed {
        return Err(Failure::rejected(""));
    }
    for spec in &input.facts {
        let Some((module, path)) = spec.split_once('=') else {
            return Err(Failure::usage(format!("--facts expects MODULE=path.csv, got `{spec}`")));
        };
        let data = read(Path::new(path))?;
        bytes.extend_from_slice(&data);
        let facts = read_facts(data.as_slice(), module, &program.relation_arities())
            .map_err(|e| Failure::rejected(format!("{path}: {e}")))?;
        program.extend(facts);
    }
    Ok(Loaded { program, bytes })
}

fn solve_loaded(l: &Loaded) -> Result<LayeredSolution, Failure> {
    solve_layered(&l.program).map_err(|e| Failure::rejected(e.to_string()))
}

pub fn run_cli(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Check { input, json } => {
            let l = load(&input, json, err)?;
            let layers = layer_check(&l.program).map_err(|e| Failure::rejected(e.to_string()))?;
            ground(&l.program).map_err(|e| Failure::rejected(e.to_string()))?;
            let _ = write!(out, "{layers}");
            Ok(())
        }
        Command::Ground { input } => {
            let l = load(&input, false, err)?;
            let g = ground(&l.program).map_err(|e| Failure::rejected(e.to_string()))?;
            let _ = write!(out, "{g}");
            Ok(())
        }
        Command::Solve {
            input,
            trace,
            json,
            module,
            show_unknown,
        } => {
            let l = load(&input, false, err)?;
            let sol = solve_loaded(&l)?;
            if let Some(m) = &module {
                if !sol.layers.kappa.contains_key(m.as_str()) {
                    return Err(Failure::rejected(format!("no module named {m}")));
                }
            }
            let opts = DumpOptions {
                show_unknown,
                module: module.as_deref(),
                trace,
            };
            let d = dump::model_dump(&l.bytes, &sol, &opts);
            let text = if json { dump::to_json(&d) } else { dump::human(&d) };
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
        Command::Query { formula, input } => {
            let l = load(&input, false, err)?;
            let f = parse_formula(&formula).map_err(|e| Failure::rejected(format!("formula {e}")))?;
            let sol = solve_loaded(&l)?;
            let v = evaluate(&f, sol.ground.signatures(), &sol.global)
                .map_err(|e| Failure::rejected(e.to_string()))?;
            let _ = writeln!(out, "{v}");
            Ok(())
        }
        Command::Verify {
            input,
            explain,
            exhaustive,
            model,
        } => {
            let l = load(&input, false, err)?;
            verify(&l, explain, exhaustive, model.as_deref(), out)
        }
        Command::Translate {
            path,
            output,
            check,
            show_internal,
        } => {
            let text = read_text(&path)?;
            let dl = datalog::parse_datalog(&text)
                .map_err(|e| Failure::rejected(format!("{}:{e}", path.display())))?;
            let t = datalog::translate(&dl).map_err(|e| Failure::rejected(e.to_string()))?;
            let rendered = t.program.to_string();
            match &output {
                Some(o) => fs::write(o, &rendered).map_err(|e| Failure::usage(format!("{}: {e}", o.display())))?,
                None if !check => {
                    let _ = out.write_all(rendered.as_bytes());
                }
                None => {}
            }
            if check {
                check_translation(&dl, &t, show_internal, out)?;
            }
            Ok(())
        }
    }
}

fn verify(
    l: &Loaded,
    explain: bool,
    exhaustive: bool,
    candidate: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let sol = solve_loaded(l)?;
    let candidate = match candidate {
        None => None,
        Some(path) => {
            if sol.sccs.len() > 1 {
                return Err(Failure::usage(
                    "--model needs a program whose modules are solved together; this one has several layers",
                ));
            }
            let p = parse_program(&read_text(path)?).map_err(|e| Failure::rejected(format!("{}:{e}", path.display())))?;
            let g = ground(&p).map_err(|e| Failure::rejected(e.to_string()))?;
            if g.rules().any(|r| r.body.is_some()) {
                return Err(Failure::rejected(format!("{}: a model file lists literals only", path.display())));
            }
            Some(g.rules().map(|r| r.head.clone()).collect::<Interpretation>())
        }
    };
    let mut ok = true;
    for scc in &sol.sccs {
        let i = candidate.as_ref().unwrap_or(&scc.trace.model);
        let label = scc.modules.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ");
        match explain_well_supported(&scc.rules, i) {
            Ok(()) => {
                let _ = writeln!(out, "{label}: well-supported");
            }
            Err(r) => {
                ok = false;
                let _ = if explain {
                    writeln!(out, "{label}: not well-supported: {r}")
                } else {
                    writeln!(out, "{label}: not well-supported")
                };
            }
        }
        if exhaustive {
            let limit = max_brute_atoms();
            match exists_support_order(&scc.rules, i, limit) {
                Some(found) => {
                    let _ = writeln!(
                        out,
                        "{label}: exhaustive order search: {}",
                        if found { "a witnessing order exists" } else { "no order works" }
                    );
                    ok &= found;
                }
                None => {
                    let _ = writeln!(out, "{label}: exhaustive order search skipped (more than {limit} atoms)");
                }
            }
            match unique_well_supported(&scc.rules) {
                Ok(m) => {
                    let same = &m == i;
                    let _ = writeln!(
                        out,
                        "{label}: enumeration: unique well-supported model {}",
                        if same { "matches" } else { "differs" }
                    );
                    ok &= same;
                }
                Err(e) => {
                    let _ = writeln!(out, "{label}: enumeration: {e}");
                }
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::rejected(""))
    }
}

fn check_translation(
    dl: &datalog::DatalogProgram,
    t: &Translation,
    show_internal: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let expected = datalog::run_datalog(dl).map_err(|e| Failure::rejected(e.to_string()))?;
    let sol = solve_layered(&t.program).map_err(|e| Failure::rejected(e.to_string()))?;
    let universe: Vec<Name> = dl.constants().into_iter().collect();
    let mut mismatches = Vec::new();
    let mut rows: BTreeMap<String, TruthValue> = BTreeMap::new();
    for (rel, arity) in dl.relations() {
        let module = t.answer_module(&rel);
        for_each_tuple(&universe, arity, &mut |args| {
            let atom = Atom {
                module: module.clone(),
                relation: rel.clone(),
                args: args.to_vec(),
            };
            let v = sol.value(&Literal::pos(atom.clone()));
            let want = if expected[&rel].contains(args) {
                TruthValue::True
            } else {
                TruthValue::False
            };
            if v != want {
                mismatches.push(format!("{atom}: translation gives {v}, stratified evaluation gives {want}"));
            }
            rows.insert(atom.to_string(), v);
        });
    }
    if show_internal {
        for (m, i) in &sol.modules {
            if !m.starts_with('N') {
                for l in i.iter().filter(|l| l.is_positive()) {
                    rows.insert(l.atom.to_string(), i.atom_value(&l.atom));
                }
            }
        }
    }
    for (a, v) in &rows {
        let _ = writeln!(out, "{a} {v}");
    }
    if mismatches.is_empty() {
        let _ = writeln!(out, "check: translation agrees with stratified evaluation");
        Ok(())
    } else {
        Err(Failure::rejected(mismatches.join("\n")))
    }
}

fn for_each_tuple(universe: &[Name], arity: usize, f: &mut dyn FnMut(&[Name])) {
    let mut idx = vec![0usize; arity];
    let mut args: Vec<Name> = Vec::with_capacity(arity);
    if arity > 0 && universe.is_empty() {
        return;
    }
    loop {
        args.clear();
        args.extend(idx.iter().map(|&k| universe[k].clone()));
        f(&args);
        let mut k = arity;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match run_cli(cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}
