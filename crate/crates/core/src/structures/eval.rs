//! Tarski evaluation for first-order formulas and full second-order
//! evaluation by exhaustive search over relations.
//!
//! Formulas are compiled to slot-indexed trees. Evaluation is three-valued:
//! a relation variable under search may have undecided tuples, and Kleene
//! connectives report `Unknown` only when the answer depends on them. Since
//! deciding more tuples never turns a definite value into another one, a
//! definite answer on a partial relation holds for every completion. The
//! search for a witness relation therefore decides one tuple at a time and
//! stops a branch as soon as the body is definite. Once every tuple is
//! decided the result is exactly the value under that relation, so the
//! search visits every relation the plain enumeration would, minus the ones
//! already settled by a prefix.

use super::{cell_count, Assignment, FiniteStructure, Relation, Signature};
use crate::error::{Error, Result};
use crate::formulas::Formula;

/// Default cap on the candidate relations per second-order quantifier.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Largest admissible `2^(n^k)` for a quantified `k`-ary relation.
    pub budget: u128,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { budget: DEFAULT_BUDGET }
    }
}

impl EvalOptions {
    pub fn with_budget(budget: u128) -> Self {
        EvalOptions { budget }
    }

    pub(crate) fn check_cells(&self, what: &str, cells: usize) -> Result<()> {
        if cells >= 127 || (1u128 << cells) > self.budget {
            return Err(Error::budget(what, format!("2^{cells} candidate relations"), self.budget));
        }
        Ok(())
    }

    /// Fails when `count` (None for overflow) exceeds the budget.
    pub(crate) fn check_count(&self, what: &str, count: Option<u128>, unit: &str) -> Result<()> {
        match count {
            Some(c) if c <= self.budget => Ok(()),
            Some(c) => Err(Error::budget(what, format!("{c} {unit}"), self.budget)),
            None => Err(Error::budget(what, format!("more than 2^128 {unit}"), self.budget)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tv {
    False,
    Unknown,
    True,
}

impl Tv {
    fn from_bool(b: bool) -> Tv {
        if b {
            Tv::True
        } else {
            Tv::False
        }
    }

    fn negate(self) -> Tv {
        match self {
            Tv::False => Tv::True,
            Tv::Unknown => Tv::Unknown,
            Tv::True => Tv::False,
        }
    }

    pub(crate) fn definite(self) -> Option<bool> {
        match self {
            Tv::False => Some(false),
            Tv::True => Some(true),
            Tv::Unknown => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RelRef {
    Sig(usize),
    Slot(usize),
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Atom { rel: RelRef, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
    So {
        existential: bool,
        slot: usize,
        arity: usize,
        name: String,
        body: Box<Node>,
    },
}

impl Node {
    pub(crate) fn has_so(&self) -> bool {
        match self {
            Node::Atom { .. } | Node::Eq(..) => false,
            Node::Not(s) | Node::Exists(_, s) | Node::Forall(_, s) => s.has_so(),
            Node::And(l, r) | Node::Or(l, r) | Node::Implies(l, r) | Node::Iff(l, r) => l.has_so() || r.has_so(),
            Node::So { .. } => true,
        }
    }
}

/// A formula compiled against a signature, reusable across structures and
/// assignments.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub(crate) root: Node,
    pub(crate) fo_slots: usize,
    /// Arity of each relation slot; bound and free relation variables alike.
    pub(crate) rel_arities: Vec<usize>,
    pub(crate) free_fo: Vec<(String, usize)>,
    pub(crate) free_rel: Vec<(String, usize, usize)>,
    signature: Signature,
}

struct Compiler<'s> {
    sig: &'s Signature,
    fo_scope: Vec<(String, usize)>,
    rel_scope: Vec<(String, usize, usize)>,
    fo_slots: usize,
    rel_arities: Vec<usize>,
    free_fo: Vec<(String, usize)>,
    free_rel: Vec<(String, usize, usize)>,
}

impl Compiler<'_> {
    fn fo_slot(&mut self, v: &str) -> usize {
        if let Some((_, s)) = self.fo_scope.iter().rev().find(|(n, _)| n == v) {
            return *s;
        }
        if let Some((_, s)) = self.free_fo.iter().find(|(n, _)| n == v) {
            return *s;
        }
        let s = self.fo_slots;
        self.fo_slots += 1;
        self.free_fo.push((v.to_string(), s));
        s
    }

    fn rel_ref(&mut self, name: &str, found: usize) -> Result<RelRef> {
        let mismatch = |expected: usize| Error::ArityMismatch {
            symbol: name.to_string(),
            expected,
            found,
        };
        if let Some((_, slot, arity)) = self.rel_scope.iter().rev().find(|(n, _, _)| n == name) {
            return if *arity == found { Ok(RelRef::Slot(*slot)) } else { Err(mismatch(*arity)) };
        }
        if let Some(arity) = self.sig.arity(name) {
            return if arity == found {
                Ok(RelRef::Sig(self.sig.index_of(name).expect("symbol present")))
            } else {
                Err(mismatch(arity))
            };
        }
        if let Some((_, slot, arity)) = self.free_rel.iter().find(|(n, _, _)| n == name) {
            return if *arity == found { Ok(RelRef::Slot(*slot)) } else { Err(mismatch(*arity)) };
        }
        let slot = self.rel_arities.len();
        self.rel_arities.push(found);
        self.free_rel.push((name.to_string(), slot, found));
        Ok(RelRef::Slot(slot))
    }

    fn compile(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::Atom { rel, args } => {
                let args: Vec<usize> = args.iter().map(|a| self.fo_slot(a)).collect();
                Node::Atom {
                    rel: self.rel_ref(rel, args.len())?,
                    args,
                }
            }
            Formula::Eq(l, r) => Node::Eq(self.fo_slot(l), self.fo_slot(r)),
            Formula::Not(s) => Node::Not(Box::new(self.compile(s)?)),
            Formula::And(l, r) => Node::And(Box::new(self.compile(l)?), Box::new(self.compile(r)?)),
            Formula::Or(l, r) => Node::Or(Box::new(self.compile(l)?), Box::new(self.compile(r)?)),
            Formula::Implies(l, r) => Node::Implies(Box::new(self.compile(l)?), Box::new(self.compile(r)?)),
            Formula::Iff(l, r) => Node::Iff(Box::new(self.compile(l)?), Box::new(self.compile(r)?)),
            Formula::ExistsFo(v, s) | Formula::ForallFo(v, s) => {
                let slot = self.fo_slots;
                self.fo_slots += 1;
                self.fo_scope.push((v.clone(), slot));
                let body = self.compile(s);
                self.fo_scope.pop();
                let body = Box::new(body?);
                if matches!(f, Formula::ExistsFo(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::Forall(slot, body)
                }
            }
            Formula::ExistsSo { var, arity, body } | Formula::ForallSo { var, arity, body } => {
                if *arity == 0 {
                    return Err(Error::InvalidParameter(format!("relation variable `{var}` has arity 0")));
                }
                let slot = self.rel_arities.len();
                self.rel_arities.push(*arity);
                self.rel_scope.push((var.clone(), slot, *arity));
                let inner = self.compile(body);
                self.rel_scope.pop();
                Node::So {
                    existential: matches!(f, Formula::ExistsSo { .. }),
                    slot,
                    arity: *arity,
                    name: var.clone(),
                    body: Box::new(inner?),
                }
            }
        })
    }
}

impl Prepared {
    pub fn new(f: &Formula, sig: &Signature) -> Result<Prepared> {
        let mut c = Compiler {
            sig,
            fo_scope: Vec::new(),
            rel_scope: Vec::new(),
            fo_slots: 0,
            rel_arities: Vec::new(),
            free_fo: Vec::new(),
            free_rel: Vec::new(),
        };
        let root = c.compile(f)?;
        Ok(Prepared {
            root,
            fo_slots: c.fo_slots,
            rel_arities: c.rel_arities,
            free_fo: c.free_fo,
            free_rel: c.free_rel,
            signature: sig.clone(),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Free relation variables (names outside the signature) with arities.
    pub fn free_relation_vars(&self) -> Vec<(String, usize)> {
        self.free_rel.iter().map(|(n, _, k)| (n.clone(), *k)).collect()
    }

    pub fn free_fo_vars(&self) -> Vec<String> {
        self.free_fo.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Tarski satisfaction; second-order quantifiers are rejected.
    pub fn eval_fo(&self, a: &FiniteStructure, asg: &Assignment) -> Result<bool> {
        let mut engine = Engine::new(a, self, EvalOptions::default(), false)?;
        engine.load(self, asg)?;
        engine.decide(&self.root)
    }

    /// Truth with relation quantifiers ranging over all relations.
    pub fn eval_full(&self, a: &FiniteStructure, asg: &Assignment, opts: EvalOptions) -> Result<bool> {
        let mut engine = Engine::new(a, self, opts, true)?;
        engine.load(self, asg)?;
        engine.decide(&self.root)
    }
}

/// First-order evaluation of `f` in `a` under `asg`.
pub fn eval_fo(a: &FiniteStructure, f: &Formula, asg: &Assignment) -> Result<bool> {
    Prepared::new(f, a.signature())?.eval_fo(a, asg)
}

/// Full second-order truth of the sentence `f` in `a` with the default budget.
pub fn eval_so_full(a: &FiniteStructure, f: &Formula) -> Result<bool> {
    eval_so_full_with(a, f, &Assignment::new(), EvalOptions::default())
}

/// Full second-order truth of `f` in `a` under `asg`.
pub fn eval_so_full_with(a: &FiniteStructure, f: &Formula, asg: &Assignment, opts: EvalOptions) -> Result<bool> {
    Prepared::new(f, a.signature())?.eval_full(a, asg, opts)
}

#[derive(Clone, Debug)]
pub(crate) struct SlotRel {
    known: Vec<u64>,
    value: Vec<u64>,
    cells: usize,
    undecided: usize,
}

impl SlotRel {
    fn complete(r: &Relation) -> SlotRel {
        SlotRel {
            known: vec![u64::MAX; r.words().len()],
            value: r.words().to_vec(),
            cells: r.cells(),
            undecided: 0,
        }
    }

    fn unknown(cells: usize) -> SlotRel {
        let words = cells.div_ceil(64).max(1);
        SlotRel {
            known: vec![0; words],
            value: vec![0; words],
            cells,
            undecided: cells,
        }
    }

    fn get(&self, i: usize) -> Option<bool> {
        if self.undecided == 0 || self.known[i >> 6] >> (i & 63) & 1 == 1 {
            Some(self.value[i >> 6] >> (i & 63) & 1 == 1)
        } else {
            None
        }
    }

    fn decide(&mut self, i: usize, v: bool) {
        self.known[i >> 6] |= 1 << (i & 63);
        if v {
            self.value[i >> 6] |= 1 << (i & 63);
        }
        self.undecided -= 1;
    }

    fn undo(&mut self, i: usize) {
        self.known[i >> 6] &= !(1 << (i & 63));
        self.value[i >> 6] &= !(1 << (i & 63));
        self.undecided += 1;
    }

    fn first_undecided(&self) -> Option<usize> {
        (0..self.cells).find(|&i| self.get(i).is_none())
    }
}

/// Evaluation state: element slots, relation slots and search bookkeeping.
pub(crate) struct Engine<'a> {
    structure: &'a FiniteStructure,
    n: usize,
    pub(crate) fo: Vec<usize>,
    rels: Vec<SlotRel>,
    // relation slots with undecided tuples
    partial: usize,
    watch: Option<usize>,
    first_unknown: Option<usize>,
    // unknown atom occurrences met so far, and the last watched one
    unknown_seen: usize,
    last_unknown: Option<usize>,
    // a watched atom that alone left some quantifier instance undetermined
    unit: Option<usize>,
    opts: EvalOptions,
    allow_so: bool,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(a: &'a FiniteStructure, p: &Prepared, opts: EvalOptions, allow_so: bool) -> Result<Engine<'a>> {
        if a.signature() != p.signature() {
            return Err(Error::SignatureMismatch(format!(
                "formula compiled for {}, structure has {}",
                p.signature(),
                a.signature()
            )));
        }
        Ok(Engine {
            structure: a,
            n: a.size(),
            fo: vec![0; p.fo_slots],
            rels: p
                .rel_arities
                .iter()
                .map(|&k| SlotRel::complete(&Relation::empty(k, a.size())))
                .collect(),
            partial: 0,
            watch: None,
            first_unknown: None,
            unknown_seen: 0,
            last_unknown: None,
            unit: None,
            opts,
            allow_so,
        })
    }

    fn load(&mut self, p: &Prepared, asg: &Assignment) -> Result<()> {
        for (name, slot) in &p.free_fo {
            let e = *asg
                .elements
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            if e >= self.n {
                return Err(Error::InvalidParameter(format!(
                    "`{name}` assigned element {e} outside universe of size {}",
                    self.n
                )));
            }
            self.fo[*slot] = e;
        }
        for (name, slot, arity) in &p.free_rel {
            let r = asg
                .relations
                .get(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            self.set_relation(*slot, r, name, *arity)?;
        }
        Ok(())
    }

    pub(crate) fn set_relation(&mut self, slot: usize, r: &Relation, name: &str, arity: usize) -> Result<()> {
        if r.arity() != arity || r.universe() != self.n {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: arity,
                found: r.arity(),
            });
        }
        self.rels[slot] = SlotRel::complete(r);
        Ok(())
    }

    /// Evaluates with every relation decided; the answer is always definite.
    pub(crate) fn decide(&mut self, node: &Node) -> Result<bool> {
        Ok(self.eval(node)?.definite().expect("all relations decided"))
    }

    pub(crate) fn eval(&mut self, node: &Node) -> Result<Tv> {
        Ok(match node {
            Node::Atom { rel, args } => {
                let idx = args.iter().fold(0, |acc, &a| acc * self.n + self.fo[a]);
                match rel {
                    RelRef::Sig(i) => Tv::from_bool(self.structure.relations()[*i].bit(idx)),
                    RelRef::Slot(s) => match self.rels[*s].get(idx) {
                        Some(b) => Tv::from_bool(b),
                        None => {
                            self.unknown_seen += 1;
                            if self.watch == Some(*s) {
                                self.last_unknown = Some(idx);
                                if self.first_unknown.is_none() {
                                    self.first_unknown = Some(idx);
                                }
                            } else {
                                self.last_unknown = None;
                            }
                            Tv::Unknown
                        }
                    },
                }
            }
            Node::Eq(l, r) => Tv::from_bool(self.fo[*l] == self.fo[*r]),
            Node::Not(s) => self.eval(s)?.negate(),
            // an undetermined left side makes a bound on a nested relation
            // quantifier rarely worth its cost
            Node::And(l, r) => match self.eval(l)? {
                Tv::False => Tv::False,
                Tv::Unknown if r.has_so() => Tv::Unknown,
                lv => match (lv, self.eval(r)?) {
                    (_, Tv::False) => Tv::False,
                    (Tv::True, Tv::True) => Tv::True,
                    _ => Tv::Unknown,
                },
            },
            Node::Or(l, r) => match self.eval(l)? {
                Tv::True => Tv::True,
                Tv::Unknown if r.has_so() => Tv::Unknown,
                lv => match (lv, self.eval(r)?) {
                    (_, Tv::True) => Tv::True,
                    (Tv::False, Tv::False) => Tv::False,
                    _ => Tv::Unknown,
                },
            },
            Node::Implies(l, r) => match self.eval(l)? {
                Tv::False => Tv::True,
                Tv::Unknown if r.has_so() => Tv::Unknown,
                lv => match (lv, self.eval(r)?) {
                    (_, Tv::True) => Tv::True,
                    (Tv::True, Tv::False) => Tv::False,
                    _ => Tv::Unknown,
                },
            },
            Node::Iff(l, r) => match (self.eval(l)?, self.eval(r)?) {
                (Tv::Unknown, _) | (_, Tv::Unknown) => Tv::Unknown,
                (a, b) => Tv::from_bool(a == b),
            },
            Node::Exists(slot, body) => {
                let mut acc = Tv::False;
                for e in 0..self.n {
                    self.fo[*slot] = e;
                    match self.instance(body)? {
                        Tv::True => return Ok(Tv::True),
                        Tv::Unknown => acc = Tv::Unknown,
                        Tv::False => {}
                    }
                }
                acc
            }
            Node::Forall(slot, body) => {
                let mut acc = Tv::True;
                for e in 0..self.n {
                    self.fo[*slot] = e;
                    match self.instance(body)? {
                        Tv::False => return Ok(Tv::False),
                        Tv::Unknown => acc = Tv::Unknown,
                        Tv::True => {}
                    }
                }
                acc
            }
            Node::So {
                existential,
                slot,
                arity,
                name,
                body,
            } => self.eval_so(*existential, *slot, *arity, name, body)?,
        })
    }

    // One instance of a quantifier body, noting units for the branching order.
    fn instance(&mut self, body: &Node) -> Result<Tv> {
        let before = self.unknown_seen;
        let v = self.eval(body)?;
        if v == Tv::Unknown && self.unknown_seen == before + 1 && self.unit.is_none() {
            self.unit = self.last_unknown;
        }
        Ok(v)
    }

    fn eval_so(&mut self, existential: bool, slot: usize, arity: usize, name: &str, body: &Node) -> Result<Tv> {
        if !self.allow_so {
            return Err(Error::SecondOrderInFirstOrder { symbol: name.to_string() });
        }
        let cells = cell_count(self.n, arity);
        self.opts
            .check_cells(&format!("quantifier over `{name}` of arity {arity}"), cells)?;
        let saved = std::mem::replace(&mut self.rels[slot], SlotRel::unknown(cells));
        self.partial += 1;
        let result = if self.partial > 1 {
            // an enclosing search is still open: bound the value over all choices at once
            self.eval(body)
        } else {
            let saved_watch = (self.watch.replace(slot), self.first_unknown.take(), self.unit.take());
            let target = if existential { Tv::True } else { Tv::False };
            let found = self.search(slot, body, target);
            (self.watch, self.first_unknown, self.unit) = saved_watch;
            found.map(|hit| if hit { target } else { target.negate() })
        };
        self.partial -= 1;
        self.rels[slot] = saved;
        result
    }

    // Depth-first search for a relation in `slot` making `body` evaluate to `target`.
    fn search(&mut self, slot: usize, body: &Node, target: Tv) -> Result<bool> {
        self.first_unknown = None;
        self.unit = None;
        let v = self.eval(body)?;
        if v == target {
            return Ok(true);
        }
        if v != Tv::Unknown {
            return Ok(false);
        }
        let cell = match self.unit.take().or(self.first_unknown.take()) {
            Some(c) => c,
            None => self.rels[slot]
                .first_undecided()
                .expect("an undetermined body has an undecided tuple"),
        };
        for value in [false, true] {
            self.rels[slot].decide(cell, value);
            let closed = self.rels[slot].undecided == 0;
            if closed {
                self.partial -= 1;
            }
            let hit = self.search(slot, body, target);
            if closed {
                self.partial += 1;
            }
            self.rels[slot].undo(cell);
            if hit? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;

    fn graph(n: usize, edges: &[[usize; 2]]) -> FiniteStructure {
        let sig = Signature::new([("edge", 2)]).unwrap();
        FiniteStructure::from_tuples(sig, n, [("edge", edges.to_vec())]).unwrap()
    }

    fn at_least(n: usize) -> Formula {
        let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let mut lits = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                lits.push(Formula::neq(vars[i].clone(), vars[j].clone()));
            }
        }
        let body = Formula::conj(lits).unwrap_or_else(|| Formula::eq("x0", "x0"));
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    #[test]
    fn first_order_examples() {
        let a = graph(2, &[[0, 1]]);
        let none = Assignment::new();
        assert!(eval_fo(&a, &parse("EX x EX y edge(x,y)").unwrap(), &none).unwrap());
        assert!(!eval_fo(&a, &parse("ALL x edge(x,x)").unwrap(), &none).unwrap());
        let one = graph(1, &[]);
        assert!(!eval_fo(&one, &at_least(2), &none).unwrap());
        assert!(eval_fo(&a, &at_least(2), &none).unwrap());
    }

    #[test]
    fn free_variables_need_values() {
        let a = graph(2, &[[0, 1]]);
        let f = parse("edge(x,y)").unwrap();
        assert!(matches!(eval_fo(&a, &f, &Assignment::new()), Err(Error::UnboundVariable(v)) if v == "x"));
        let asg = Assignment::new().with_element("x", 0).with_element("y", 1);
        assert!(eval_fo(&a, &f, &asg).unwrap());
        assert!(eval_so_full(&a, &f).is_err());
    }

    #[test]
    fn first_order_evaluation_rejects_relation_quantifiers() {
        let a = graph(2, &[]);
        let f = parse("EX2 R:1 EX x R(x)").unwrap();
        assert!(matches!(
            eval_fo(&a, &f, &Assignment::new()),
            Err(Error::SecondOrderInFirstOrder { .. })
        ));
        assert!(eval_so_full(&a, &f).unwrap());
    }

    #[test]
    fn free_relation_variables_come_from_the_assignment() {
        let a = graph(3, &[]);
        let f = parse("EX x X(x)").unwrap();
        assert!(matches!(eval_fo(&a, &f, &Assignment::new()), Err(Error::UnknownSymbol(_))));
        let x = Relation::from_tuples(1, 3, [[2]]).unwrap();
        assert!(eval_fo(&a, &f, &Assignment::new().with_relation("X", x)).unwrap());
        let wrong = Relation::from_tuples(2, 3, [[2, 2]]).unwrap();
        assert!(eval_fo(&a, &f, &Assignment::new().with_relation("X", wrong)).is_err());
    }

    #[test]
    fn budget_names_the_quantifier() {
        let a = graph(5, &[]);
        let f = parse("EX2 R:2 ALL x R(x,x)").unwrap();
        match eval_so_full(&a, &f) {
            Err(Error::BudgetExceeded { what, required, .. }) => {
                assert!(what.contains("`R`"));
                assert_eq!(required, "2^25 candidate relations");
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        let opts = EvalOptions::with_budget(1 << 25);
        assert!(eval_so_full_with(&a, &f, &Assignment::new(), opts).unwrap());
    }

    #[test]
    fn universal_relation_quantifier() {
        let a = graph(2, &[]);
        assert!(eval_so_full(&a, &parse("ALL2 R:1 (EX x R(x) | ALL x ~R(x))").unwrap()).unwrap());
        assert!(!eval_so_full(&a, &parse("ALL2 R:1 EX x R(x)").unwrap()).unwrap());
        // R ranges over all subsets, including ones that split the universe
        assert!(eval_so_full(&a, &parse("EX2 R:1 (EX x R(x) & EX x ~R(x))").unwrap()).unwrap());
        assert!(!eval_so_full(&graph(1, &[]), &parse("EX2 R:1 (EX x R(x) & EX x ~R(x))").unwrap()).unwrap());
    }

    #[test]
    fn nested_relation_quantifiers() {
        // every unary relation has a complement
        let f = parse("ALL2 R:1 EX2 S:1 ALL x (R(x) <-> ~S(x))").unwrap();
        assert!(eval_so_full(&graph(3, &[]), &f).unwrap());
        // some binary relation is a bijection onto a proper subset: false on finite sets
        let g = parse(
            "EX2 F:2 (ALL x EX y F(x,y) & ALL x ALL y ALL z (F(x,y) & F(x,z) -> y = z) \
             & ALL x ALL y ALL z (F(x,z) & F(y,z) -> x = y) & EX y ALL x ~F(x,y))",
        )
        .unwrap();
        for n in 1..=3 {
            assert!(!eval_so_full(&graph(n, &[]), &g).unwrap());
        }
    }
}
