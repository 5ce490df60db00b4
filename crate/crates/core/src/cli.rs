//! The `so-lab` command line.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on usage or input
//! errors, 3 when a budget is exhausted.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula_space::{
    boolean_closure, find_separating_formula, set_distance, theory_vector, ultrametric, vector_set, Fragment, TheoryVector,
    DEFAULT_CLOSURE_LIMIT,
};
use crate::formulas::{classify, parse, prenex_so, validate_sentence, Formula};
use crate::structures::{eval_so_full_with, load_class, load_structure, Assignment, EvalOptions, FiniteStructure, Signature, DEFAULT_BUDGET};
use crate::types_omitting::{check_omission_axiomatization, omitted_by_all, property_a_check, realized_types, TypeContext};
use crate::ultra::{check_los, henkin_eval_with, henkin_model, max_so_arity, ultraproduct, DecomposableHenkinModel, Ultrafilter};
use crate::workbench::{builtin, demo, principal_insep_search, DemoParams, DemoReport};

#[derive(Parser, Debug)]
#[command(name = "so-lab", version, about = "Finite model theory workbench for second-order logic")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on enumerated relations and product tuples.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Semantics {
    Full,
    Henkin,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FormulaArg {
    /// Formula text.
    #[arg(long)]
    formula: Option<String>,
    /// Built-in formula: infinite, hamiltonian, at_least:N, colorable:K.
    #[arg(long)]
    builtin: Option<String>,
}

impl FormulaArg {
    fn get(&self) -> Result<Formula> {
        match (&self.formula, &self.builtin) {
            (Some(text), _) => parse(text),
            (_, Some(key)) => Ok(builtin(key)?.formula),
            _ => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a second-order formula and print it back.
    Parse(FormulaOnly),
    /// Place a formula in the prenex hierarchy (Delta0, Sigma(n), Pi(n)).
    Classify(FormulaOnly),
    /// Second-order prenex form, pulling relation quantifiers outward with arity raising.
    Prenex(FormulaOnly),
    /// Truth of a sentence in a structure, under full or Henkin semantics.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, value_enum, default_value_t = Semantics::Full)]
        semantics: Semantics,
        /// Largest relation arity in the Henkin relation universe.
        #[arg(long)]
        arity_bound: Option<usize>,
        /// Fail (exit 1) unless the truth value is this.
        #[arg(long)]
        expect: Option<bool>,
    },
    /// Ultraproduct of a finite family by an ultrafilter, built explicitly.
    Ultraproduct {
        #[arg(long)]
        family: PathBuf,
        /// `principal:i`, `principal:i/m` or `F x G`.
        #[arg(long)]
        ultrafilter: String,
    },
    /// Truth in the decomposable-Henkin model formed from a family by an ultrafilter.
    HenkinEval {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        ultrafilter: String,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long)]
        arity_bound: Option<usize>,
        /// Fail (exit 1) unless the truth value is this.
        #[arg(long)]
        expect: Option<bool>,
    },
    /// Verification suites for the ultraproduct and formula-space results.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Separating formula between two classes over a fragment, with their distance.
    Separate {
        /// The class K.
        #[arg(long)]
        family: PathBuf,
        /// The class L.
        #[arg(long)]
        against: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
        /// Rounds of Boolean closure applied to the fragment first.
        #[arg(long, default_value_t = 0)]
        closure_depth: usize,
    },
    /// Types realized in a structure by relations for X0, X1, ...
    Types {
        #[arg(long)]
        structure: PathBuf,
        /// JSON {"arities": [..], "fragment": [..]}.
        #[arg(long)]
        context: PathBuf,
    },
    /// Search for a principal-scale inseparability witness between two classes.
    Insep {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity_bound: usize,
    },
    /// Reproduce a worked example: np_example, infinity, los_suite, fubini_suite, separation.
    Demo {
        name: String,
        /// Size parameter (np_example: n for C_2n and D_n; infinity: largest universe).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Report wall-clock time (makes the output vary between runs).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Args, Debug)]
struct FormulaOnly {
    #[command(flatten)]
    formula: FormulaArg,
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Łoś's theorem: Henkin truth in the ultraproduct against the large-set test.
    Los {
        /// A family to check instead of the seeded random suite.
        #[arg(long, requires = "ultrafilter")]
        family: Option<PathBuf>,
        #[arg(long, requires = "family")]
        ultrafilter: Option<String>,
        #[arg(long, requires = "family", conflicts_with = "builtin")]
        formula: Option<String>,
        #[arg(long, requires = "family")]
        builtin: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Fubini property of product ultrafilters on seeded grids of structures.
    Fubini {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Ultrametric axioms on the theory vectors of a class over a fragment.
    Metric {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
        /// A second class; its set distance to the first is reported.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Axiomatizing a class within a pool by omitting types.
    Omission {
        /// The class K.
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        context: PathBuf,
    },
}

/// What a command prints, and whether its checks passed.
struct Outcome {
    text: String,
    json: Value,
    pass: bool,
}

impl Outcome {
    fn ok(text: impl Into<String>, json: Value) -> Outcome {
        Outcome {
            text: text.into(),
            json,
            pass: true,
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            let body = match format {
                Format::Text => out.text.trim_end().to_string(),
                Format::Json => serde_json::to_string_pretty(&out.json).expect("reports serialize"),
            };
            // a closed pipe is not an error of the command
            let _ = writeln!(std::io::stdout(), "{body}");
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let opts = EvalOptions::with_budget(cli.budget);
    let seed = cli.seed;
    match cli.command {
        Command::Parse(f) => {
            let f = f.formula.get()?;
            Ok(Outcome::ok(f.to_string(), json!({ "formula": f.to_string() })))
        }
        Command::Classify(f) => {
            let label = classify(&f.formula.get()?);
            Ok(Outcome::ok(label.to_string(), json!({ "classification": label })))
        }
        Command::Prenex(f) => {
            let p = prenex_so(&f.formula.get()?);
            let label = classify(&p);
            Ok(Outcome::ok(
                format!("{p}\n{label}"),
                json!({ "prenex": p.to_string(), "classification": label }),
            ))
        }
        Command::Eval {
            structure,
            formula,
            semantics,
            arity_bound,
            expect,
        } => {
            let a = load_structure(&structure)?;
            let f = formula.get()?;
            validate_sentence(&f, a.signature())?;
            let truth = match semantics {
                Semantics::Full => eval_so_full_with(&a, &f, &Assignment::new(), opts)?,
                Semantics::Henkin => {
                    let bound = arity_bound.unwrap_or_else(|| max_so_arity(&f).max(1));
                    henkin_eval_with(&DecomposableHenkinModel::full(a, bound, opts)?, &f, opts)?
                }
            };
            Ok(Outcome {
                text: truth.to_string(),
                json: json!({ "formula": f.to_string(), "truth": truth }),
                pass: expect.is_none_or(|e| e == truth),
            })
        }
        Command::Ultraproduct { family, ultrafilter } => {
            let (labels, family) = load_family(&family)?;
            let u = Ultrafilter::parse(&ultrafilter, family.len())?;
            let up = ultraproduct(&family, &u, opts)?;
            let quotient: Value = serde_json::from_str(&up.quotient.to_json())?;
            let text = format!(
                "ultraproduct of {} structures by {u}: {} elements ({})\n{}",
                labels.len(),
                up.size(),
                if up.verified { "explicit, checked" } else { "principal factor, not built explicitly" },
                up.quotient.to_json()
            );
            Ok(Outcome::ok(
                text,
                json!({
                    "family": labels,
                    "ultrafilter": u,
                    "verified": up.verified,
                    "class_representatives": up.class_representatives,
                    "quotient": quotient,
                }),
            ))
        }
        Command::HenkinEval {
            family,
            ultrafilter,
            formula,
            arity_bound,
            expect,
        } => {
            let (_, family) = load_family(&family)?;
            let u = Ultrafilter::parse(&ultrafilter, family.len())?;
            let f = formula.get()?;
            validate_sentence(&f, family[0].signature())?;
            let bound = arity_bound.unwrap_or_else(|| max_so_arity(&f).max(1));
            let m = henkin_model(&family, &u, bound, opts)?;
            let truth = henkin_eval_with(&m, &f, opts)?;
            let sizes: BTreeMap<String, usize> = (1..=bound).map(|k| (k.to_string(), m.upsilon(k).len())).collect();
            Ok(Outcome {
                text: truth.to_string(),
                json: json!({
                    "formula": f.to_string(),
                    "ultrafilter": u,
                    "arity_bound": bound,
                    "relation_universe_sizes": sizes,
                    "truth": truth,
                }),
                pass: expect.is_none_or(|e| e == truth),
            })
        }
        Command::Check(c) => check(c, seed, opts),
        Command::Separate {
            family,
            against,
            fragment,
            closure_depth,
        } => {
            let (_, k) = load_family(&family)?;
            let (_, l) = load_family(&against)?;
            let frag = load_fragment(&fragment, k[0].signature())?;
            let frag = boolean_closure(&frag, closure_depth, DEFAULT_CLOSURE_LIMIT)?;
            let d = set_distance(&vector_set(&k, &frag, opts)?, &vector_set(&l, &frag, opts)?)?;
            let sep = find_separating_formula(&k, &l, &frag, opts)?;
            let mut pass = true;
            if let Some(s) = &sep {
                for a in &k {
                    pass &= eval_so_full_with(a, s, &Assignment::new(), opts)?;
                }
                for b in &l {
                    pass &= !eval_so_full_with(b, s, &Assignment::new(), opts)?;
                }
            }
            let text = match &sep {
                Some(s) => format!("separator: {s}\ndistance: {d}"),
                None => format!("no separator: some theory vector is shared\ndistance: {d}"),
            };
            Ok(Outcome {
                text,
                json: json!({
                    "fragment_size": frag.len(),
                    "separator": sep.map(|s| s.to_string()),
                    "distance": d,
                    "separator_verified": pass,
                }),
                pass,
            })
        }
        Command::Types { structure, context } => {
            let a = load_structure(&structure)?;
            let ctx = load_context(&context, a.signature())?;
            let types = realized_types(&a, &ctx, opts)?;
            let mut text = String::new();
            let mut list = Vec::new();
            for (t, rels) in &types {
                let tuples: Vec<Vec<Vec<usize>>> = rels.iter().map(|r| r.tuples().collect()).collect();
                text.push_str(&format!("{t}  witness {tuples:?}\n"));
                list.push(json!({ "type": t, "witness": tuples }));
            }
            Ok(Outcome::ok(text, json!({ "realized": list })))
        }
        Command::Insep {
            family,
            against,
            arity_bound,
        } => {
            let (_, k) = load_family(&family)?;
            let (_, l) = load_family(&against)?;
            let report = principal_insep_search(&k, &l, arity_bound)?;
            let text = match &report.witness {
                Some(w) => format!(
                    "witness: K[{}] and L[{}] are isomorphic by {:?} ({} pairs searched)",
                    w.k_index, w.l_index, w.map, report.pairs_searched
                ),
                None => format!("no witness among {} pairs ({})", report.pairs_searched, report.scope),
            };
            Ok(Outcome::ok(text, to_value(&report)))
        }
        Command::Demo { name, n, trials, timing } => {
            let params = DemoParams {
                n,
                trials,
                seed: Some(seed),
                timing,
            };
            Ok(demo_outcome(demo(&name, &params, opts)?))
        }
    }
}

fn check(c: CheckCommand, seed: u64, opts: EvalOptions) -> Result<Outcome> {
    match c {
        CheckCommand::Los {
            family: Some(family),
            ultrafilter,
            formula,
            builtin: key,
            ..
        } => {
            let (_, family) = load_family(&family)?;
            let u = Ultrafilter::parse(ultrafilter.as_deref().expect("clap requires it"), family.len())?;
            let f = match (formula, key) {
                (Some(t), _) => parse(&t)?,
                (_, Some(k)) => builtin(&k)?.formula,
                _ => return Err(Error::InvalidParameter("--formula or --builtin is required with --family".into())),
            };
            let r = check_los(&family, &u, &f, opts)?;
            Ok(Outcome {
                text: format!(
                    "{}: Henkin truth {}, large-set truth {} (satisfied at {:?})",
                    if r.agree { "agree" } else { "DISAGREE" },
                    r.ultra_truth,
                    r.large_set_truth,
                    r.satisfied_at
                ),
                json: to_value(&r),
                pass: r.agree,
            })
        }
        CheckCommand::Los { trials, .. } => suite("los_suite", trials, seed, opts),
        CheckCommand::Fubini { trials } => suite("fubini_suite", trials, seed, opts),
        CheckCommand::Metric {
            family,
            fragment,
            against,
        } => {
            let (labels, k) = load_family(&family)?;
            let frag = load_fragment(&fragment, k[0].signature())?;
            let vectors = k
                .iter()
                .map(|a| theory_vector(a, &frag, opts))
                .collect::<Result<Vec<TheoryVector>>>()?;
            let mut violations = Vec::new();
            for (i, x) in vectors.iter().enumerate() {
                for (j, y) in vectors.iter().enumerate() {
                    let dxy = ultrametric(x, y)?;
                    if dxy.is_zero() != (x == y) || dxy != ultrametric(y, x)? {
                        violations.push(format!("{} / {}", labels[i], labels[j]));
                    }
                    for (l, z) in vectors.iter().enumerate() {
                        if ultrametric(x, z)? > dxy.max(ultrametric(y, z)?) {
                            violations.push(format!("{} / {} / {}", labels[i], labels[j], labels[l]));
                        }
                    }
                }
            }
            let mut text: String = labels.iter().zip(&vectors).map(|(s, v)| format!("{v}  {s}\n")).collect();
            let mut out = json!({
                "vectors": labels.iter().zip(&vectors).map(|(s, v)| json!({"structure": s, "vector": v})).collect::<Vec<_>>(),
                "violations": violations,
            });
            if let Some(against) = against {
                let (_, l) = load_family(&against)?;
                let d = set_distance(&vector_set(&k, &frag, opts)?, &vector_set(&l, &frag, opts)?)?;
                text.push_str(&format!("set distance: {d}\n"));
                out["set_distance"] = json!(d);
            }
            text.push_str(&format!("ultrametric violations: {}", violations.len()));
            Ok(Outcome {
                text,
                pass: violations.is_empty(),
                json: out,
            })
        }
        CheckCommand::Omission { family, pool, context } => {
            let (_, k) = load_family(&family)?;
            let (pool_labels, pool) = load_family(&pool)?;
            let ctx = load_context(&context, pool[0].signature())?;
            let pi: BTreeSet<_> = omitted_by_all(&k, &pool, &ctx, opts)?;
            let axiom = check_omission_axiomatization(&k, &pi, &pool, &ctx, opts)?;
            let prop = property_a_check(&k, &pool, &ctx, opts)?;
            let named = |ix: &[usize]| -> Vec<String> { ix.iter().map(|&i| pool_labels[i].clone()).collect() };
            // Property A is what makes the omission axiomatization possible.
            let pass = !prop.pass || axiom.pass;
            let text = format!(
                "omitted types: {}\naxiomatization: {}{}\nproperty A: {}{}\nnote: {}",
                if pi.is_empty() {
                    "none".to_string()
                } else {
                    pi.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
                },
                if axiom.pass { "pass" } else { "fail" },
                if axiom.unexcluded.is_empty() {
                    String::new()
                } else {
                    format!(" (not excluded: {})", named(&axiom.unexcluded).join(", "))
                },
                if prop.pass { "holds" } else { "fails" },
                if prop.counterexamples.is_empty() {
                    String::new()
                } else {
                    format!(" (counterexamples: {})", named(&prop.counterexamples).join(", "))
                },
                axiom.note
            );
            Ok(Outcome {
                text,
                json: json!({
                    "omitted": pi,
                    "axiomatization": axiom,
                    "unexcluded_structures": named(&axiom.unexcluded),
                    "property_a": prop,
                    "counterexample_structures": named(&prop.counterexamples),
                    "pass": pass,
                }),
                pass,
            })
        }
    }
}

fn suite(name: &str, trials: usize, seed: u64, opts: EvalOptions) -> Result<Outcome> {
    let params = DemoParams {
        n: None,
        trials: Some(trials),
        seed: Some(seed),
        timing: false,
    };
    Ok(demo_outcome(demo(name, &params, opts)?))
}

fn demo_outcome(report: DemoReport) -> Outcome {
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let mut text = String::new();
    // long suites list only their failures
    let verbose = report.checks.len() <= 40;
    for c in &report.checks {
        if verbose || !c.pass {
            text.push_str(&format!(
                "{} {}: expected {}, got {}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            ));
        }
    }
    text.push_str(&format!("{}: {passed}/{} checks passed", report.demo, report.checks.len()));
    if let Some(ms) = report.runtime_ms {
        text.push_str(&format!(" in {ms} ms"));
    }
    Outcome {
        text,
        pass: report.pass(),
        json: to_value(&report),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load_family(path: &Path) -> Result<(Vec<String>, Vec<FiniteStructure>)> {
    let class = load_class(path)?;
    if class.is_empty() {
        return Err(Error::InvalidParameter(format!("{} holds no structures", path.display())));
    }
    Ok(class.into_iter().unzip())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_fragment(path: &Path, sig: &Signature) -> Result<Fragment> {
    Fragment::from_json(sig.clone(), &read(path)?)
}

fn load_context(path: &Path, sig: &Signature) -> Result<TypeContext> {
    TypeContext::from_json(sig.clone(), &read(path)?)
}
