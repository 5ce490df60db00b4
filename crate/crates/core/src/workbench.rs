//! Built-in sentences, graph families, principal-scale inseparability search
//! and end-to-end demos.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula_space::{boolean_closure, find_separating_formula, set_distance, vector_set, Fragment};
use crate::formulas::{parse, Formula};
use crate::gen::{random_family, random_sentence, random_structure, rng, FormulaConfig};
use crate::structures::{
    eval_so_full_with, find_isomorphism, iso_classes, Assignment, EvalOptions, FiniteStructure, Signature,
};
use crate::ultra::{check_fubini, check_los, Ultrafilter};

/// A built-in sentence with the signature it is stated over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedFormula {
    pub key: String,
    pub formula: Formula,
    /// Symbols the sentence mentions; it can be evaluated in any expansion.
    pub signature: Signature,
    pub intended_class: String,
}

pub const INFINITE: &str = "EX2 R:2 ((ALL y ~R(y,y)) & (ALL y ALL z ALL w (R(y,z) & R(z,w) -> R(y,w))) \
& (ALL y ALL z (R(y,z) | R(z,y) | y = z)) & (ALL y EX z R(y,z)))";

// S is a permutation moving along edges. The diagonal of L marks one root;
// off the diagonal L is a strict order that every S-step not entering the
// root climbs, so every S-cycle passes through the root.
const HAMILTONIAN: &str = "EX2 S:2 EX2 L:2 (\
(ALL x EX y S(x,y)) \
& (ALL x ALL y ALL z (S(x,y) & S(x,z) -> y = z)) \
& (ALL x ALL y ALL z (S(x,z) & S(y,z) -> x = y)) \
& (ALL x ALL y (S(x,y) -> edge(x,y))) \
& (EX x EX y EX z (x != y & x != z & y != z)) \
& (EX x L(x,x)) \
& (ALL x ALL y (L(x,x) & L(y,y) -> x = y)) \
& (ALL x ALL y (S(x,y) & ~L(y,y) -> L(x,y))) \
& (ALL x ALL y (x != y & L(x,y) -> ~L(y,x))) \
& (ALL x ALL y ALL z (x != y & y != z & L(x,y) & L(y,z) -> L(x,z))))";

pub fn at_least(n: usize) -> Result<Formula> {
    if n == 0 {
        return Err(Error::InvalidParameter("at_least needs n >= 1".into()));
    }
    let distinct: Vec<Formula> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| Formula::neq(format!("x{i}"), format!("x{j}"))))
        .collect();
    let body = Formula::conj(distinct).unwrap_or_else(|| Formula::eq("x0", "x0"));
    Ok((0..n).rev().fold(body, |acc, i| Formula::exists(format!("x{i}"), acc)))
}

fn colorable(k: usize) -> Result<Formula> {
    if k == 0 {
        return Err(Error::InvalidParameter("colorable needs k >= 1".into()));
    }
    let c = |i: usize, v: &str| Formula::atom(format!("C{i}"), vec![v.to_string()]);
    let covered = Formula::forall("x", Formula::disj((0..k).map(|i| c(i, "x"))).expect("k >= 1"));
    let proper = Formula::forall(
        "x",
        Formula::forall(
            "y",
            Formula::implies(
                Formula::atom("edge", ["x", "y"]),
                Formula::conj((0..k).map(|i| Formula::not(Formula::and(c(i, "x"), c(i, "y"))))).expect("k >= 1"),
            ),
        ),
    );
    Ok((0..k)
        .rev()
        .fold(Formula::and(covered, proper), |acc, i| Formula::exists_so(format!("C{i}"), 1, acc)))
}

/// `infinite`, `at_least:n`, `hamiltonian` or `colorable:k`.
pub fn builtin(key: &str) -> Result<NamedFormula> {
    let graph = || Signature::new([("edge", 2)]).expect("valid");
    let param = |text: &str| {
        text.parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("`{key}`: expected a positive integer parameter")))
    };
    let (formula, signature, intended) = match key.split_once(':') {
        None if key == "infinite" => (
            parse(INFINITE)?,
            Signature::empty(),
            "infinite structures (a strict total order without a greatest element)".to_string(),
        ),
        None if key == "hamiltonian" => (
            parse(HAMILTONIAN)?,
            graph(),
            "graphs with a directed Hamiltonian cycle through at least three vertices".to_string(),
        ),
        Some(("at_least", n)) => {
            let n = param(n)?;
            (at_least(n)?, Signature::empty(), format!("universes with at least {n} elements"))
        }
        Some(("colorable", k)) => {
            let k = param(k)?;
            (colorable(k)?, graph(), format!("graphs with a proper {k}-coloring"))
        }
        _ => return Err(Error::UnknownBuiltin(key.to_string())),
    };
    Ok(NamedFormula {
        key: key.to_string(),
        formula,
        signature,
        intended_class: intended,
    })
}

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
    let sig = Signature::new([("edge", 2)]).expect("valid");
    let tuples: Vec<[usize; 2]> = edges.iter().flat_map(|&(a, b)| [[a, b], [b, a]]).collect();
    FiniteStructure::from_tuples(sig, n, [("edge", tuples)]).expect("edges inside the universe")
}

fn ring(offset: usize, n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (offset + i, offset + (i + 1) % n)).collect()
}

/// The `n`-cycle with a symmetric edge relation.
pub fn cycle_graph(n: usize) -> Result<FiniteStructure> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle_graph needs n >= 3, got {n}")));
    }
    Ok(graph_from_edges(n, &ring(0, n)))
}

/// Two disjoint `n`-cycles on `2n` vertices.
pub fn double_cycle(n: usize) -> Result<FiniteStructure> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("double_cycle needs n >= 3, got {n}")));
    }
    let mut edges = ring(0, n);
    edges.extend(ring(n, n));
    Ok(graph_from_edges(2 * n, &edges))
}

/// `D_n` as used by the demos: `double_cycle(n)` for `n >= 3`, and for
/// `n = 2` two disjoint edges, the simple-graph reading of two 2-cycles.
pub fn d_graph(n: usize) -> Result<FiniteStructure> {
    if n == 2 {
        return Ok(graph_from_edges(4, &[(0, 1), (2, 3)]));
    }
    double_cycle(n)
}

/// Backtracking search for a cycle `v0 -> v1 -> ... -> v0` through every
/// vertex along `edge` tuples; needs at least three vertices.
pub fn has_hamiltonian_cycle(g: &FiniteStructure) -> Result<bool> {
    let edge = g
        .relation("edge")
        .filter(|r| r.arity() == 2)
        .ok_or_else(|| Error::UnknownSymbol("edge".into()))?;
    let n = g.size();
    if n < 3 {
        return Ok(false);
    }
    fn extend(path: &mut Vec<usize>, used: &mut [bool], n: usize, adj: &dyn Fn(usize, usize) -> bool) -> bool {
        let last = *path.last().expect("path starts at 0");
        if path.len() == n {
            return adj(last, path[0]);
        }
        for v in 0..n {
            if !used[v] && adj(last, v) {
                used[v] = true;
                path.push(v);
                if extend(path, used, n, adj) {
                    return true;
                }
                path.pop();
                used[v] = false;
            }
        }
        false
    }
    let adj = |a: usize, b: usize| edge.contains(&[a, b]);
    let mut used = vec![false; n];
    used[0] = true;
    Ok(extend(&mut vec![0], &mut used, n, &adj))
}

/// Budget that admits a binary relation quantifier on `n` elements.
pub fn budget_for_binary(n: usize) -> u128 {
    let cells = n * n;
    if cells >= 127 {
        u128::MAX
    } else {
        1u128 << cells
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsepWitness {
    pub k_index: usize,
    pub l_index: usize,
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsepReport {
    pub scope: &'static str,
    pub arity_bound: usize,
    pub pairs_searched: usize,
    pub witness: Option<InsepWitness>,
}

const INSEP_SCOPE: &str = "principal ultrafilters and identity ultrapowers only; every relation is decomposable \
there, so the search reduces to an isomorphism between factors";

/// Looks for `A` in `ks` and `B` in `ls` that are isomorphic, the form the
/// inseparability condition takes when every ultrafilter is principal.
pub fn principal_insep_search(ks: &[FiniteStructure], ls: &[FiniteStructure], arity_bound: usize) -> Result<InsepReport> {
    let mut pairs = 0;
    for (i, a) in ks.iter().enumerate() {
        for (j, b) in ls.iter().enumerate() {
            pairs += 1;
            if a.signature() != b.signature() {
                continue;
            }
            if let Some(map) = find_isomorphism(a, b)? {
                return Ok(InsepReport {
                    scope: INSEP_SCOPE,
                    arity_bound,
                    pairs_searched: pairs,
                    witness: Some(InsepWitness {
                        k_index: i,
                        l_index: j,
                        map,
                    }),
                });
            }
        }
    }
    Ok(InsepReport {
        scope: INSEP_SCOPE,
        arity_bound,
        pairs_searched: pairs,
        witness: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl Serialize, actual: impl Serialize) -> Check {
        let expected = json!(expected);
        let actual = json!(actual);
        Check {
            name: name.into(),
            pass: expected == actual,
            expected,
            actual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub demo: String,
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Wall-clock time, present only when timing was requested.
    pub runtime_ms: Option<u64>,
}

impl DemoReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const DEMOS: [&str; 5] = ["np_example", "infinity", "los_suite", "fubini_suite", "separation"];

/// Demo parameters; unset fields take per-demo defaults.
#[derive(Clone, Debug, Default)]
pub struct DemoParams {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub timing: bool,
}

pub fn demo(name: &str, params: &DemoParams, opts: EvalOptions) -> Result<DemoReport> {
    let start = Instant::now();
    let mut p = BTreeMap::new();
    let checks = match name {
        "np_example" => {
            let n = params.n.unwrap_or(4);
            if !(2..=5).contains(&n) {
                return Err(Error::InvalidParameter(format!("np_example needs 2 <= n <= 5, got {n}")));
            }
            p.insert("n".into(), json!(n));
            np_example(n, opts, &mut p)?
        }
        "infinity" => {
            let n = params.n.unwrap_or(6);
            if !(1..=8).contains(&n) {
                return Err(Error::InvalidParameter(format!("infinity needs 1 <= n <= 8, got {n}")));
            }
            p.insert("nmax".into(), json!(n));
            infinity(n, opts, &mut p)?
        }
        "los_suite" => {
            let (trials, seed) = (params.trials.unwrap_or(1000), params.seed.unwrap_or(42));
            p.insert("trials".into(), json!(trials));
            p.insert("seed".into(), json!(seed));
            los_suite(trials, seed, opts)?
        }
        "fubini_suite" => {
            let (trials, seed) = (params.trials.unwrap_or(50), params.seed.unwrap_or(42));
            p.insert("trials".into(), json!(trials));
            p.insert("seed".into(), json!(seed));
            fubini_suite(trials, seed, opts)?
        }
        "separation" => {
            let (trials, seed) = (params.trials.unwrap_or(100), params.seed.unwrap_or(42));
            p.insert("trials".into(), json!(trials));
            p.insert("seed".into(), json!(seed));
            separation_suite(trials, seed, opts)?
        }
        other => return Err(Error::UnknownDemo(other.to_string())),
    };
    Ok(DemoReport {
        demo: name.to_string(),
        params: p,
        checks,
        runtime_ms: params.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

fn holds(a: &FiniteStructure, f: &Formula, opts: EvalOptions) -> Result<bool> {
    eval_so_full_with(a, f, &Assignment::new(), opts)
}

fn np_example(n: usize, opts: EvalOptions, p: &mut BTreeMap<String, Value>) -> Result<Vec<Check>> {
    let ham = builtin("hamiltonian")?.formula;
    let opts = EvalOptions::with_budget(opts.budget.max(budget_for_binary(2 * n)));
    p.insert("budget".into(), json!(opts.budget.to_string()));
    let mut checks = Vec::new();
    for m in 2..=n {
        let c = cycle_graph(2 * m)?;
        let d = d_graph(m)?;
        checks.push(Check::new(format!("C{} satisfies hamiltonian", 2 * m), true, holds(&c, &ham, opts)?));
        checks.push(Check::new(format!("C{} has a Hamiltonian cycle (backtracking)", 2 * m), true, has_hamiltonian_cycle(&c)?));
        checks.push(Check::new(format!("D{m} satisfies hamiltonian"), false, holds(&d, &ham, opts)?));
        checks.push(Check::new(format!("D{m} has a Hamiltonian cycle (backtracking)"), false, has_hamiltonian_cycle(&d)?));
        checks.push(Check::new(
            format!("C{} isomorphic to D{m}", 2 * m),
            false,
            find_isomorphism(&c, &d)?.is_some(),
        ));
    }
    let ks: Vec<FiniteStructure> = (2..=n).map(|m| cycle_graph(2 * m)).collect::<Result<_>>()?;
    let ls: Vec<FiniteStructure> = (2..=n).map(d_graph).collect::<Result<_>>()?;
    let report = principal_insep_search(&ks, &ls, 2)?;
    checks.push(Check::new(
        "principal-scale inseparability witness between the C and D families",
        Value::Null,
        &report.witness,
    ));
    Ok(checks)
}

fn infinity(nmax: usize, opts: EvalOptions, p: &mut BTreeMap<String, Value>) -> Result<Vec<Check>> {
    let psi = builtin("infinite")?.formula;
    let opts = EvalOptions::with_budget(opts.budget.max(budget_for_binary(nmax)));
    p.insert("budget".into(), json!(opts.budget.to_string()));
    let mut corpus: Vec<(String, FiniteStructure)> = Vec::new();
    for n in 1..=nmax {
        corpus.push((format!("set of size {n}"), FiniteStructure::new(Signature::empty(), n, BTreeMap::new())?));
    }
    let unary = Signature::new([("p", 1)])?;
    for (i, a) in iso_classes(&unary, nmax, opts)?.into_iter().enumerate() {
        corpus.push((format!("p-structure #{i} of size {}", a.size()), a));
    }
    let graph = Signature::new([("edge", 2)])?;
    for (i, a) in iso_classes(&graph, nmax.min(3), opts)?.into_iter().enumerate() {
        corpus.push((format!("digraph #{i} of size {}", a.size()), a));
    }
    for n in 3..=nmax {
        corpus.push((format!("C{n}"), cycle_graph(n)?));
    }
    for n in 3..=nmax / 2 {
        corpus.push((format!("D{n}"), double_cycle(n)?));
    }
    let mut false_on = 0;
    let mut first_true = Value::Null;
    for (label, a) in &corpus {
        if holds(a, &psi, opts)? {
            if first_true.is_null() {
                first_true = json!(label);
            }
        } else {
            false_on += 1;
        }
    }
    let mut checks = vec![
        Check::new("structures where the infinity formula is false", corpus.len(), false_on),
        Check::new("first structure satisfying the infinity formula", Value::Null, first_true),
    ];
    let mut mismatches = Vec::new();
    for n in 1..=8 {
        let phi = at_least(n)?;
        for size in 1..=8 {
            let a = FiniteStructure::new(Signature::empty(), size, BTreeMap::new())?;
            if holds(&a, &phi, opts)? != (size >= n) {
                mismatches.push(format!("at_least:{n} on size {size}"));
            }
        }
    }
    checks.push(Check::new("at_least:n disagreeing with size >= n (n, size <= 8)", Vec::<String>::new(), mismatches));
    Ok(checks)
}

/// Parameters of one Łoś trial, derived from the suite seed and trial number.
pub fn los_trial(seed: u64, trial: usize) -> Result<(Vec<FiniteStructure>, Ultrafilter, Formula)> {
    let mut r = rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64));
    let sig = Signature::new([("edge", 2), ("p", 1)])?;
    let m = rand::Rng::gen_range(&mut r, 1..=4);
    let family = random_family(&mut r, &sig, m, 3);
    let u = Ultrafilter::principal(m, rand::Rng::gen_range(&mut r, 0..m))?;
    let f = random_sentence(&mut r, &sig, &FormulaConfig::default());
    Ok((family, u, f))
}

fn los_suite(trials: usize, seed: u64, opts: EvalOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::with_capacity(trials);
    for t in 0..trials {
        let (family, u, f) = los_trial(seed, t)?;
        let report = check_los(&family, &u, &f, opts)?;
        let sizes: Vec<usize> = family.iter().map(FiniteStructure::size).collect();
        checks.push(Check::new(
            format!("trial {t}: sizes {sizes:?}, {u}, {f}"),
            report.large_set_truth,
            report.ultra_truth,
        ));
    }
    Ok(checks)
}

/// Grid and filters of one Fubini trial.
pub fn fubini_trial(seed: u64, trial: usize) -> Result<(Vec<Vec<FiniteStructure>>, Ultrafilter, Ultrafilter)> {
    use rand::Rng;
    let mut r = rng(seed.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(trial as u64));
    let sig = Signature::new([("edge", 2), ("p", 1)])?;
    let (ni, nj) = (r.gen_range(1..=3), r.gen_range(1..=2));
    let grid = (0..ni)
        .map(|_| {
            (0..nj)
                .map(|_| {
                    let n = r.gen_range(1..=3);
                    random_structure(&mut r, &sig, n)
                })
                .collect()
        })
        .collect();
    let f = Ultrafilter::principal(ni, r.gen_range(0..ni))?;
    let g = Ultrafilter::principal(nj, r.gen_range(0..nj))?;
    Ok((grid, f, g))
}

fn fubini_suite(trials: usize, seed: u64, opts: EvalOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::with_capacity(trials);
    for t in 0..trials {
        let (grid, f, g) = fubini_trial(seed, t)?;
        let report = check_fubini(&grid, &f, &g, opts)?;
        checks.push(Check::new(
            format!("trial {t}: {}x{} grid, {f} and {g}: isomorphism found", grid.len(), grid[0].len()),
            true,
            report.witness.is_some(),
        ));
    }
    Ok(checks)
}

/// Outcome of one separation trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationOutcome {
    pub fragment_size: usize,
    pub disjoint: bool,
    pub separator_found: bool,
    /// The separator holds on all of K and fails on all of L.
    pub separator_verified: bool,
    pub distance: String,
    pub distance_positive: bool,
}

impl SeparationOutcome {
    pub fn consistent(&self) -> bool {
        self.separator_found == self.disjoint
            && self.distance_positive == self.disjoint
            && (!self.separator_found || self.separator_verified)
    }
}

/// Two random first-order sentences closed under one round of Boolean
/// operations, and two random classes of small graphs.
pub fn separation_instance(seed: u64, trial: usize, opts: EvalOptions) -> Result<(Fragment, Vec<FiniteStructure>, Vec<FiniteStructure>)> {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut r = rng(seed.wrapping_mul(0xA076_1D64_78BD_642F).wrapping_add(trial as u64));
    let sig = Signature::new([("edge", 2)])?;
    let cfg = FormulaConfig {
        max_depth: 2,
        max_so_arity: 0,
        ..FormulaConfig::default()
    };
    let a = random_sentence(&mut r, &sig, &cfg);
    let mut b = random_sentence(&mut r, &sig, &cfg);
    while b == a {
        b = random_sentence(&mut r, &sig, &cfg);
    }
    let fragment = boolean_closure(&Fragment::new(sig.clone(), vec![a, b])?, 1, 12)?;
    let pool = iso_classes(&sig, 3, opts)?;
    let pick = |r: &mut crate::gen::SuiteRng| -> Vec<FiniteStructure> {
        let k = r.gen_range(1..=4);
        pool.choose_multiple(r, k).cloned().collect()
    };
    let k = pick(&mut r);
    let l = pick(&mut r);
    Ok((fragment, k, l))
}

pub fn separation_trial(seed: u64, trial: usize, opts: EvalOptions) -> Result<SeparationOutcome> {
    let (fragment, k, l) = separation_instance(seed, trial, opts)?;
    let ks = vector_set(&k, &fragment, opts)?;
    let ls = vector_set(&l, &fragment, opts)?;
    let disjoint = !ks.intersects(&ls);
    let separator = find_separating_formula(&k, &l, &fragment, opts)?;
    let separator_verified = match &separator {
        Some(s) => {
            let mut ok = true;
            for x in &k {
                ok &= holds(x, s, opts)?;
            }
            for y in &l {
                ok &= !holds(y, s, opts)?;
            }
            ok
        }
        None => false,
    };
    let d = set_distance(&ks, &ls)?;
    Ok(SeparationOutcome {
        fragment_size: fragment.len(),
        disjoint,
        separator_found: separator.is_some(),
        separator_verified,
        distance: d.to_string(),
        distance_positive: !d.is_zero(),
    })
}

fn separation_suite(trials: usize, seed: u64, opts: EvalOptions) -> Result<Vec<Check>> {
    (0..trials)
        .map(|t| {
            let o = separation_trial(seed, t, opts)?;
            Ok(Check {
                name: format!(
                    "trial {t}: fragment of {}, disjoint {}, distance {}",
                    o.fragment_size, o.disjoint, o.distance
                ),
                expected: json!({"separator_found": o.disjoint, "distance_positive": o.disjoint, "separator_verified": o.disjoint}),
                actual: json!({"separator_found": o.separator_found, "distance_positive": o.distance_positive, "separator_verified": o.separator_verified}),
                pass: o.consistent(),
            })
        })
        .collect()
}
