//! Second-order formulas over purely relational signatures.
//!
//! Formulas are immutable trees. Relation symbols from the signature and
//! relation variables share one namespace: an `EX2`/`ALL2` binder shadows a
//! signature symbol of the same name inside its body.

mod parse;
mod prenex;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::parse;
pub use prenex::{classify, prenex_so, universal_closure, HierarchyLabel};
pub use validate::{validate, validate_sentence, ValidationReport};

/// A second-order formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom { rel: String, args: Vec<String> },
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ExistsFo(String, Box<Formula>),
    ForallFo(String, Box<Formula>),
    ExistsSo { var: String, arity: usize, body: Box<Formula> },
    ForallSo { var: String, arity: usize, body: Box<Formula> },
}

impl Formula {
    pub fn atom<S: Into<String>>(rel: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Formula::Atom {
            rel: rel.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn eq(left: impl Into<String>, right: impl Into<String>) -> Self {
        Formula::Eq(left.into(), right.into())
    }

    pub fn neq(left: impl Into<String>, right: impl Into<String>) -> Self {
        Formula::not(Formula::eq(left, right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(sub: Formula) -> Self {
        Formula::Not(Box::new(sub))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn implies(left: Formula, right: Formula) -> Self {
        Formula::Implies(Box::new(left), Box::new(right))
    }

    pub fn iff(left: Formula, right: Formula) -> Self {
        Formula::Iff(Box::new(left), Box::new(right))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::ExistsFo(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForallFo(var.into(), Box::new(body))
    }

    pub fn exists_so(var: impl Into<String>, arity: usize, body: Formula) -> Self {
        Formula::ExistsSo {
            var: var.into(),
            arity,
            body: Box::new(body),
        }
    }

    pub fn forall_so(var: impl Into<String>, arity: usize, body: Formula) -> Self {
        Formula::ForallSo {
            var: var.into(),
            arity,
            body: Box::new(body),
        }
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// Left-nested disjunction; `None` for an empty iterator.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::or)
    }

    /// A sentence false in every structure (universes are nonempty).
    pub fn falsum() -> Formula {
        Formula::exists("x", Formula::neq("x", "x"))
    }

    /// A sentence true in every structure.
    pub fn verum() -> Formula {
        Formula::forall("x", Formula::eq("x", "x"))
    }

    pub fn is_so_quantifier(&self) -> bool {
        matches!(self, Formula::ExistsSo { .. } | Formula::ForallSo { .. })
    }

    /// Whether any second-order quantifier occurs.
    pub fn has_so(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => false,
            Formula::Not(s) | Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => s.has_so(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.has_so() || r.has_so()
            }
            Formula::ExistsSo { .. } | Formula::ForallSo { .. } => true,
        }
    }

    /// Free first-order variables in order of first occurrence.
    pub fn free_fo_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free_fo(&mut bound, &mut out);
        out
    }

    fn collect_free_fo(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let note = |v: &String, bound: &Vec<String>, out: &mut Vec<String>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(|a| note(a, bound, out)),
            Formula::Eq(l, r) => {
                note(l, bound, out);
                note(r, bound, out);
            }
            Formula::Not(s) | Formula::ExistsSo { body: s, .. } | Formula::ForallSo { body: s, .. } => {
                s.collect_free_fo(bound, out)
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.collect_free_fo(bound, out);
                r.collect_free_fo(bound, out);
            }
            Formula::ExistsFo(v, s) | Formula::ForallFo(v, s) => {
                bound.push(v.clone());
                s.collect_free_fo(bound, out);
                bound.pop();
            }
        }
    }

    /// Relation names that occur free (signature symbols or free relation
    /// variables) with the argument count of their first occurrence.
    pub fn free_relations(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        let mut bound = Vec::new();
        self.collect_free_rel(&mut bound, &mut out);
        out
    }

    fn collect_free_rel(&self, bound: &mut Vec<String>, out: &mut Vec<(String, usize)>) {
        match self {
            Formula::Atom { rel, args } => {
                if !bound.contains(rel) && !out.iter().any(|(n, _)| n == rel) {
                    out.push((rel.clone(), args.len()));
                }
            }
            Formula::Eq(..) => {}
            Formula::Not(s) | Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => s.collect_free_rel(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.collect_free_rel(bound, out);
                r.collect_free_rel(bound, out);
            }
            Formula::ExistsSo { var, body, .. } | Formula::ForallSo { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free_rel(bound, out);
                bound.pop();
            }
        }
    }

    /// Every identifier used anywhere in the formula, in either namespace.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { rel, args } => {
                out.insert(rel.clone());
                out.extend(args.iter().cloned());
            }
            Formula::Eq(l, r) => {
                out.insert(l.clone());
                out.insert(r.clone());
            }
            Formula::Not(s) => s.collect_names(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Formula::ExistsFo(v, s) | Formula::ForallFo(v, s) => {
                out.insert(v.clone());
                s.collect_names(out);
            }
            Formula::ExistsSo { var, body, .. } | Formula::ForallSo { var, body, .. } => {
                out.insert(var.clone());
                body.collect_names(out);
            }
        }
    }

    /// Nesting depth of quantifiers of either order.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(s) => s.quantifier_depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.quantifier_depth().max(r.quantifier_depth())
            }
            Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => 1 + s.quantifier_depth(),
            Formula::ExistsSo { body, .. } | Formula::ForallSo { body, .. } => 1 + body.quantifier_depth(),
        }
    }

    /// Replaces every second-order `EX2` by `ALL2` and vice versa.
    pub fn swap_so_quantifiers(&self) -> Formula {
        self.map_children(&|f| f.swap_so_quantifiers(), true)
    }

    fn map_children(&self, g: &dyn Fn(&Formula) -> Formula, swap: bool) -> Formula {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => self.clone(),
            Formula::Not(s) => Formula::not(g(s)),
            Formula::And(l, r) => Formula::and(g(l), g(r)),
            Formula::Or(l, r) => Formula::or(g(l), g(r)),
            Formula::Implies(l, r) => Formula::implies(g(l), g(r)),
            Formula::Iff(l, r) => Formula::iff(g(l), g(r)),
            Formula::ExistsFo(v, s) => Formula::exists(v.clone(), g(s)),
            Formula::ForallFo(v, s) => Formula::forall(v.clone(), g(s)),
            Formula::ExistsSo { var, arity, body } if swap => Formula::forall_so(var.clone(), *arity, g(body)),
            Formula::ForallSo { var, arity, body } if swap => Formula::exists_so(var.clone(), *arity, g(body)),
            Formula::ExistsSo { var, arity, body } => Formula::exists_so(var.clone(), *arity, g(body)),
            Formula::ForallSo { var, arity, body } => Formula::forall_so(var.clone(), *arity, g(body)),
        }
    }

    /// Renames free occurrences of the first-order variable `from`.
    /// The caller guarantees `to` is not captured.
    pub(crate) fn rename_fo(&self, from: &str, to: &str) -> Formula {
        let swap = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(swap).collect(),
            },
            Formula::Eq(l, r) => Formula::Eq(swap(l), swap(r)),
            Formula::ExistsFo(v, _) | Formula::ForallFo(v, _) if v == from => self.clone(),
            _ => self.map_children(&|f| f.rename_fo(from, to), false),
        }
    }

    /// Renames free occurrences of the relation name `from`.
    pub(crate) fn rename_rel(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Atom { rel, args } if rel == from => Formula::Atom {
                rel: to.to_string(),
                args: args.clone(),
            },
            Formula::ExistsSo { var, .. } | Formula::ForallSo { var, .. } if var == from => self.clone(),
            _ => self.map_children(&|f| f.rename_rel(from, to), false),
        }
    }

    /// Replaces every free atom `rel(t..)` by `rel(extra, t..)`.
    pub(crate) fn prepend_arg(&self, rel: &str, extra: &str) -> Formula {
        match self {
            Formula::Atom { rel: r, args } if r == rel => {
                let mut a = Vec::with_capacity(args.len() + 1);
                a.push(extra.to_string());
                a.extend(args.iter().cloned());
                Formula::Atom { rel: r.clone(), args: a }
            }
            Formula::ExistsSo { var, .. } | Formula::ForallSo { var, .. } if var == rel => self.clone(),
            _ => self.map_children(&|f| f.prepend_arg(rel, extra), false),
        }
    }

    // Precedence used by the printer: quantifiers bind loosest, atoms tightest.
    fn level(&self) -> u8 {
        match self {
            Formula::ExistsFo(..) | Formula::ForallFo(..) | Formula::ExistsSo { .. } | Formula::ForallSo { .. } => 0,
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Atom { .. } | Formula::Eq(..) | Formula::Not(_) => 5,
        }
    }

    fn write_at(&self, out: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        // a quantifier anywhere below the top would swallow what follows it
        let needs_parens = self.level() < min_level;
        if needs_parens {
            out.write_str("(")?;
        }
        match self {
            Formula::Atom { rel, args } => write!(out, "{}({})", rel, args.join(","))?,
            Formula::Eq(l, r) => write!(out, "{l} = {r}")?,
            Formula::Not(s) => match s.as_ref() {
                Formula::Eq(l, r) => write!(out, "{l} != {r}")?,
                _ => {
                    out.write_str("~")?;
                    s.write_at(out, 5)?;
                }
            },
            Formula::And(l, r) => binary(out, l, " & ", r, 4, 5)?,
            Formula::Or(l, r) => binary(out, l, " | ", r, 3, 4)?,
            Formula::Implies(l, r) => binary(out, l, " -> ", r, 3, 2)?,
            Formula::Iff(l, r) => binary(out, l, " <-> ", r, 1, 2)?,
            Formula::ExistsFo(v, s) => {
                write!(out, "EX {v} ")?;
                s.write_at(out, 0)?;
            }
            Formula::ForallFo(v, s) => {
                write!(out, "ALL {v} ")?;
                s.write_at(out, 0)?;
            }
            Formula::ExistsSo { var, arity, body } => {
                write!(out, "EX2 {var}:{arity} ")?;
                body.write_at(out, 0)?;
            }
            Formula::ForallSo { var, arity, body } => {
                write!(out, "ALL2 {var}:{arity} ")?;
                body.write_at(out, 0)?;
            }
        }
        if needs_parens {
            out.write_str(")")?;
        }
        Ok(())
    }
}

fn binary(
    out: &mut fmt::Formatter<'_>,
    left: &Formula,
    op: &str,
    right: &Formula,
    left_level: u8,
    right_level: u8,
) -> fmt::Result {
    // quantifiers inside a binary operator are always parenthesized
    left.write_at(out, left_level.max(1))?;
    out.write_str(op)?;
    right.write_at(out, right_level.max(1))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for Formula {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
