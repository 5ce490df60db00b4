//! Prefix classification and second-order prenex normalization.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use super::Formula;

/// Position of a formula in the second-order prenex hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HierarchyLabel {
    /// No second-order quantifier at all.
    Delta0,
    Sigma(usize),
    Pi(usize),
    /// Some second-order quantifier sits below a connective or a first-order quantifier.
    NonPrenex,
}

impl fmt::Display for HierarchyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HierarchyLabel::Delta0 => f.write_str("Delta0"),
            HierarchyLabel::Sigma(n) => write!(f, "Sigma({n})"),
            HierarchyLabel::Pi(n) => write!(f, "Pi({n})"),
            HierarchyLabel::NonPrenex => f.write_str("NonPrenex"),
        }
    }
}

impl Serialize for HierarchyLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Counts the homogeneous blocks of a leading second-order prefix.
pub fn classify(f: &Formula) -> HierarchyLabel {
    if !f.has_so() {
        return HierarchyLabel::Delta0;
    }
    let mut kinds = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::ExistsSo { body, .. } => {
                kinds.push(false);
                cur = body;
            }
            Formula::ForallSo { body, .. } => {
                kinds.push(true);
                cur = body;
            }
            _ => break,
        }
    }
    if kinds.is_empty() || cur.has_so() {
        return HierarchyLabel::NonPrenex;
    }
    let blocks = 1 + kinds.windows(2).filter(|w| w[0] != w[1]).count();
    if kinds[0] {
        HierarchyLabel::Pi(blocks)
    } else {
        HierarchyLabel::Sigma(blocks)
    }
}

/// Binds every free first-order variable with `ALL`, first occurrence outermost.
pub fn universal_closure(f: &Formula) -> Formula {
    f.free_fo_vars()
        .into_iter()
        .rev()
        .fold(f.clone(), |acc, v| Formula::forall(v, acc))
}

#[derive(Clone, Debug)]
struct Quant {
    universal: bool,
    var: String,
    arity: usize,
}

struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    fn make(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
        let stem = if stem.is_empty() { base } else { stem };
        (1..)
            .map(|i| format!("{stem}_{i}"))
            .find(|c| self.used.insert(c.clone()))
            .expect("unbounded supply of names")
    }
}

/// Moves every second-order quantifier into a leading prefix.
///
/// Free first-order variables are universally closed first. Formulas that
/// already have a second-order prefix are returned as they are. Otherwise the
/// parts containing second-order quantifiers are put in negation normal form,
/// binders are renamed apart, and a relation quantifier is moved outward past
/// a first-order quantifier of the opposite kind by adding that variable as a
/// leading argument: `ALL x EX2 X:k phi` becomes `EX2 X:k+1 ALL x phi'` with
/// every `X(t..)` in `phi` replaced by `X(x,t..)`.
pub fn prenex_so(f: &Formula) -> Formula {
    let closed = universal_closure(f);
    if classify(&closed) != HierarchyLabel::NonPrenex {
        return closed;
    }
    let mut fresh = Fresh { used: closed.names() };
    let free: BTreeSet<String> = closed.free_relations().into_iter().map(|(n, _)| n).collect();
    let mut seen = BTreeSet::new();
    let standardized = standardize(&closed, &free, &mut seen, &mut fresh);
    let (prefix, matrix) = pull(standardized, &mut fresh);
    prefix.into_iter().rev().fold(matrix, |acc, q| {
        if q.universal {
            Formula::forall_so(q.var, q.arity, acc)
        } else {
            Formula::exists_so(q.var, q.arity, acc)
        }
    })
}

// Renames binders so that no two binders share a name and no binder reuses a
// free relation name.
fn standardize(f: &Formula, free: &BTreeSet<String>, seen: &mut BTreeSet<String>, fresh: &mut Fresh) -> Formula {
    let mut rebind = |v: &String, body: &Formula, so: bool, seen: &mut BTreeSet<String>| {
        let name = if seen.contains(v) || free.contains(v) {
            fresh.make(v)
        } else {
            v.clone()
        };
        seen.insert(name.clone());
        let body = if &name == v {
            body.clone()
        } else if so {
            body.rename_rel(v, &name)
        } else {
            body.rename_fo(v, &name)
        };
        (name, body)
    };
    match f {
        Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(s) => Formula::not(standardize(s, free, seen, fresh)),
        Formula::And(l, r) => Formula::and(standardize(l, free, seen, fresh), standardize(r, free, seen, fresh)),
        Formula::Or(l, r) => Formula::or(standardize(l, free, seen, fresh), standardize(r, free, seen, fresh)),
        Formula::Implies(l, r) => {
            Formula::implies(standardize(l, free, seen, fresh), standardize(r, free, seen, fresh))
        }
        Formula::Iff(l, r) => Formula::iff(standardize(l, free, seen, fresh), standardize(r, free, seen, fresh)),
        Formula::ExistsFo(v, s) => {
            let (v, s) = rebind(v, s, false, seen);
            Formula::exists(v, standardize(&s, free, seen, fresh))
        }
        Formula::ForallFo(v, s) => {
            let (v, s) = rebind(v, s, false, seen);
            Formula::forall(v, standardize(&s, free, seen, fresh))
        }
        Formula::ExistsSo { var, arity, body } => {
            let (v, s) = rebind(var, body, true, seen);
            Formula::exists_so(v, *arity, standardize(&s, free, seen, fresh))
        }
        Formula::ForallSo { var, arity, body } => {
            let (v, s) = rebind(var, body, true, seen);
            Formula::forall_so(v, *arity, standardize(&s, free, seen, fresh))
        }
    }
}

// Gives every binder in `f` a brand-new name; used on duplicated subformulas.
fn refresh(f: &Formula, fresh: &mut Fresh) -> Formula {
    match f {
        Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(s) => Formula::not(refresh(s, fresh)),
        Formula::And(l, r) => Formula::and(refresh(l, fresh), refresh(r, fresh)),
        Formula::Or(l, r) => Formula::or(refresh(l, fresh), refresh(r, fresh)),
        Formula::Implies(l, r) => Formula::implies(refresh(l, fresh), refresh(r, fresh)),
        Formula::Iff(l, r) => Formula::iff(refresh(l, fresh), refresh(r, fresh)),
        Formula::ExistsFo(v, s) => {
            let n = fresh.make(v);
            Formula::exists(n.clone(), refresh(&s.rename_fo(v, &n), fresh))
        }
        Formula::ForallFo(v, s) => {
            let n = fresh.make(v);
            Formula::forall(n.clone(), refresh(&s.rename_fo(v, &n), fresh))
        }
        Formula::ExistsSo { var, arity, body } => {
            let n = fresh.make(var);
            Formula::exists_so(n.clone(), *arity, refresh(&body.rename_rel(var, &n), fresh))
        }
        Formula::ForallSo { var, arity, body } => {
            let n = fresh.make(var);
            Formula::forall_so(n.clone(), *arity, refresh(&body.rename_rel(var, &n), fresh))
        }
    }
}

fn pull(f: Formula, fresh: &mut Fresh) -> (Vec<Quant>, Formula) {
    if !f.has_so() {
        return (Vec::new(), f);
    }
    match f {
        Formula::Not(inner) => pull(push_negation(*inner, fresh), fresh),
        Formula::Implies(l, r) => pull(Formula::or(Formula::not(*l), *r), fresh),
        Formula::Iff(l, r) => {
            let (l2, r2) = (refresh(&l, fresh), refresh(&r, fresh));
            let f = Formula::and(Formula::or(Formula::not(*l), *r), Formula::or(Formula::not(r2), l2));
            pull(f, fresh)
        }
        Formula::And(l, r) => {
            let ((pl, ml), (pr, mr)) = (pull(*l, fresh), pull(*r, fresh));
            (merge_prefixes(pl, pr), Formula::and(ml, mr))
        }
        Formula::Or(l, r) => {
            let ((pl, ml), (pr, mr)) = (pull(*l, fresh), pull(*r, fresh));
            (merge_prefixes(pl, pr), Formula::or(ml, mr))
        }
        Formula::ExistsSo { var, arity, body } => prepend(false, var, arity, *body, fresh),
        Formula::ForallSo { var, arity, body } => prepend(true, var, arity, *body, fresh),
        Formula::ExistsFo(x, body) => pull_past_fo(false, x, *body, fresh),
        Formula::ForallFo(x, body) => pull_past_fo(true, x, *body, fresh),
        Formula::Atom { .. } | Formula::Eq(..) => unreachable!("atoms contain no quantifier"),
    }
}

fn prepend(universal: bool, var: String, arity: usize, body: Formula, fresh: &mut Fresh) -> (Vec<Quant>, Formula) {
    let (mut prefix, matrix) = pull(body, fresh);
    prefix.insert(0, Quant { universal, var, arity });
    (prefix, matrix)
}

fn pull_past_fo(universal: bool, x: String, body: Formula, fresh: &mut Fresh) -> (Vec<Quant>, Formula) {
    let (prefix, mut matrix) = pull(body, fresh);
    let mut moved = Vec::with_capacity(prefix.len());
    for q in prefix {
        if q.universal == universal {
            moved.push(q);
        } else {
            // choice: one relation of arity k+1 collects a k-ary witness per element
            matrix = matrix.prepend_arg(&q.var, &x);
            moved.push(Quant {
                arity: q.arity + 1,
                ..q
            });
        }
    }
    let matrix = if universal {
        Formula::forall(x, matrix)
    } else {
        Formula::exists(x, matrix)
    };
    (moved, matrix)
}

fn push_negation(f: Formula, fresh: &mut Fresh) -> Formula {
    match f {
        Formula::Not(g) => *g,
        Formula::And(l, r) => Formula::or(Formula::not(*l), Formula::not(*r)),
        Formula::Or(l, r) => Formula::and(Formula::not(*l), Formula::not(*r)),
        Formula::Implies(l, r) => Formula::and(*l, Formula::not(*r)),
        Formula::Iff(l, r) => {
            let (l2, r2) = (refresh(&l, fresh), refresh(&r, fresh));
            Formula::or(Formula::and(*l, Formula::not(*r)), Formula::and(Formula::not(l2), r2))
        }
        Formula::ExistsFo(v, s) => Formula::forall(v, Formula::not(*s)),
        Formula::ForallFo(v, s) => Formula::exists(v, Formula::not(*s)),
        Formula::ExistsSo { var, arity, body } => Formula::forall_so(var, arity, Formula::not(*body)),
        Formula::ForallSo { var, arity, body } => Formula::exists_so(var, arity, Formula::not(*body)),
        atom => Formula::not(atom),
    }
}

// Interleaves two independent prefixes, fusing equal-kind blocks greedily.
fn merge_prefixes(a: Vec<Quant>, b: Vec<Quant>) -> Vec<Quant> {
    fn blocks(qs: Vec<Quant>) -> Vec<Vec<Quant>> {
        let mut out: Vec<Vec<Quant>> = Vec::new();
        for q in qs {
            match out.last_mut() {
                Some(block) if block[0].universal == q.universal => block.push(q),
                _ => out.push(vec![q]),
            }
        }
        out
    }
    let (mut a, mut b) = (blocks(a), blocks(b));
    a.reverse();
    b.reverse();
    let mut out = Vec::new();
    loop {
        match (a.last(), b.last()) {
            (None, None) => break,
            (Some(_), None) => out.extend(a.pop().unwrap()),
            (None, Some(_)) => out.extend(b.pop().unwrap()),
            (Some(x), Some(y)) if x[0].universal == y[0].universal => {
                out.extend(a.pop().unwrap());
                out.extend(b.pop().unwrap());
            }
            (Some(_), Some(_)) => {
                if a.len() >= b.len() {
                    out.extend(a.pop().unwrap());
                } else {
                    out.extend(b.pop().unwrap());
                }
            }
        }
    }
    out
}
