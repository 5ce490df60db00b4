//! Decomposable-Henkin models and truth with relation quantifiers ranging
//! over a designated relation universe.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::product::{recompose, ultraproduct, UltraproductResult};
use super::Ultrafilter;
use crate::error::{Error, Result};
use crate::formulas::Formula;
use crate::structures::{cell_count, Engine, EvalOptions, FiniteStructure, Node, Prepared, Relation};

pub const DEFAULT_ARITY_BOUND: usize = 2;

/// Largest number of factor choices enumerated literally; beyond it only the
/// principal factor is varied.
pub const LITERAL_CHOICES_LIMIT: usize = 1 << 12;

/// How the relation universe of one arity was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonSource {
    /// Every choice of factor relations was recomposed.
    AllFactorChoices,
    /// Only the factor at the principal index was varied; the rest are empty.
    PrincipalFactor,
    Given,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub family: Vec<FiniteStructure>,
    pub ultrafilter: Ultrafilter,
}

/// A structure with the relations its second-order quantifiers may range over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposableHenkinModel {
    base: FiniteStructure,
    upsilon: BTreeMap<usize, Vec<Relation>>,
    sources: BTreeMap<usize, UpsilonSource>,
    provenance: Option<Provenance>,
}

impl DecomposableHenkinModel {
    /// A model with an explicitly given relation universe for arities `1..=bound`.
    pub fn with_upsilon(base: FiniteStructure, upsilon: BTreeMap<usize, Vec<Relation>>) -> Result<Self> {
        let bound = upsilon.keys().max().copied().unwrap_or(0);
        for k in 1..=bound {
            let rels = upsilon
                .get(&k)
                .ok_or_else(|| Error::InvalidParameter(format!("relation universe has no entry for arity {k}")))?;
            if let Some(r) = rels.iter().find(|r| r.arity() != k || r.universe() != base.size()) {
                return Err(Error::InvalidParameter(format!(
                    "arity-{k} universe holds a {}-ary relation on {} elements",
                    r.arity(),
                    r.universe()
                )));
            }
        }
        let sources = upsilon.keys().map(|&k| (k, UpsilonSource::Given)).collect();
        Ok(DecomposableHenkinModel {
            base,
            upsilon,
            sources,
            provenance: None,
        })
    }

    /// Every relation of arity at most `bound`, i.e. the standard model.
    pub fn full(base: FiniteStructure, bound: usize, opts: EvalOptions) -> Result<Self> {
        let up = ultraproduct(std::slice::from_ref(&base), &Ultrafilter::principal(1, 0)?, opts)?;
        from_ultraproduct(&up, bound, opts)
    }

    pub fn base(&self) -> &FiniteStructure {
        &self.base
    }

    pub fn arity_bound(&self) -> usize {
        self.upsilon.keys().max().copied().unwrap_or(0)
    }

    pub fn upsilon(&self, k: usize) -> &[Relation] {
        self.upsilon.get(&k).map_or(&[], Vec::as_slice)
    }

    pub fn source(&self, k: usize) -> Option<UpsilonSource> {
        self.sources.get(&k).copied()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// True when every arity up to the bound has all `2^(n^k)` relations.
    pub fn is_full(&self) -> bool {
        (1..=self.arity_bound()).all(|k| {
            let cells = cell_count(self.base.size(), k);
            cells < 64 && self.upsilon(k).len() as u128 == 1u128 << cells
        })
    }

    /// The same model carried along the bijection `h` onto `target`.
    pub(crate) fn transport(&self, h: &[usize], target: FiniteStructure) -> Self {
        let size = target.size();
        DecomposableHenkinModel {
            base: target,
            upsilon: self
                .upsilon
                .iter()
                .map(|(&k, rels)| (k, rels.iter().map(|r| r.map(h, size)).collect()))
                .collect(),
            sources: self.sources.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

/// The decomposable-Henkin model formed from `family` by `u`, with relation
/// universes for arities `1..=arity_bound`.
pub fn henkin_model(
    family: &[FiniteStructure],
    u: &Ultrafilter,
    arity_bound: usize,
    opts: EvalOptions,
) -> Result<DecomposableHenkinModel> {
    from_ultraproduct(&ultraproduct(family, u, opts)?, arity_bound, opts)
}

/// Collects `prod R_i / U` over all factor choices when their number fits the
/// budget and `LITERAL_CHOICES_LIMIT`; otherwise varies only the factor at the principal index, which
/// yields the same set because the other factors do not affect the quotient.
pub(crate) fn from_ultraproduct(up: &UltraproductResult, arity_bound: usize, opts: EvalOptions) -> Result<DecomposableHenkinModel> {
    let mut upsilon = BTreeMap::new();
    let mut sources = BTreeMap::new();
    for k in 1..=arity_bound {
        let cells: Vec<usize> = up.family.iter().map(|a| cell_count(a.size(), k)).collect();
        let total_bits: usize = cells.iter().sum();
        let literal = cells.iter().all(|&c| c <= 64)
            && 1usize << total_bits.min(63) <= LITERAL_CHOICES_LIMIT
            && opts.check_cells("factor choices", total_bits).is_ok();
        let mut seen = HashSet::new();
        let mut rels = Vec::new();
        if literal {
            let mut masks = vec![0u64; cells.len()];
            loop {
                let factors: Vec<Relation> = masks
                    .iter()
                    .zip(&up.family)
                    .map(|(&m, a)| Relation::from_mask(k, a.size(), m))
                    .collect();
                let r = recompose(&factors, up)?;
                if seen.insert(r.clone()) {
                    rels.push(r);
                }
                if !next_masks(&mut masks, &cells) {
                    break;
                }
            }
            sources.insert(k, UpsilonSource::AllFactorChoices);
        } else {
            let i0 = up.ultrafilter.principal_index();
            let c0 = cells[i0];
            opts.check_cells(&format!("arity-{k} relations on the principal factor"), c0)?;
            let mut factors: Vec<Relation> = up.family.iter().map(|a| Relation::empty(k, a.size())).collect();
            for m in 0..(1u128 << c0) {
                factors[i0] = Relation::from_mask(k, up.family[i0].size(), m as u64);
                let r = recompose(&factors, up)?;
                if seen.insert(r.clone()) {
                    rels.push(r);
                }
            }
            sources.insert(k, UpsilonSource::PrincipalFactor);
        }
        upsilon.insert(k, rels);
    }
    Ok(DecomposableHenkinModel {
        base: up.quotient.clone(),
        upsilon,
        sources,
        provenance: Some(Provenance {
            family: up.family.clone(),
            ultrafilter: up.ultrafilter.clone(),
        }),
    })
}

fn next_masks(masks: &mut [u64], cells: &[usize]) -> bool {
    for (m, &c) in masks.iter_mut().zip(cells).rev() {
        if c < 64 && *m + 1 < 1u64 << c || c == 64 && *m < u64::MAX {
            *m += 1;
            return true;
        }
        *m = 0;
    }
    false
}

/// Truth of `f` in `m`: relation quantifiers range over `m.upsilon`, and
/// subformulas without relation quantifiers are evaluated first-order in the
/// base expanded by the current relation values. Free relation variables are
/// read universally over the relation universe.
pub fn henkin_eval(m: &DecomposableHenkinModel, f: &Formula) -> Result<bool> {
    henkin_eval_with(m, f, EvalOptions::default())
}

/// As `henkin_eval`, refusing when the relation-universe iterations the
/// formula may need exceed the budget.
pub fn henkin_eval_with(m: &DecomposableHenkinModel, f: &Formula, opts: EvalOptions) -> Result<bool> {
    let p = Prepared::new(f, m.base.signature())?;
    if let Some(v) = p.free_fo_vars().into_iter().next() {
        return Err(Error::UnboundVariable(v));
    }
    let bound = m.arity_bound();
    check_bound(&p.root, bound)?;
    let free: Vec<(String, usize, usize)> = p.free_rel.clone();
    if let Some((name, _, k)) = free.iter().find(|(_, _, k)| *k > bound) {
        return Err(Error::ArityExceedsBound {
            symbol: name.clone(),
            arity: *k,
            bound,
        });
    }
    let count = iterations(&p.root, m).and_then(|c| {
        free.iter()
            .try_fold(c, |acc, (_, _, k)| acc.checked_mul(m.upsilon(*k).len() as u128))
    });
    opts.check_count("Henkin evaluation", count, "relation-universe iterations")?;
    let mut engine = Engine::new(&m.base, &p, EvalOptions::default(), false)?;
    for_all_free(&mut engine, m, &p.root, &free)
}

fn for_all_free(engine: &mut Engine<'_>, m: &DecomposableHenkinModel, root: &Node, free: &[(String, usize, usize)]) -> Result<bool> {
    let Some(((name, slot, k), rest)) = free.split_first() else {
        return holds(engine, m, root);
    };
    for r in m.upsilon(*k) {
        engine.set_relation(*slot, r, name, *k)?;
        if !for_all_free(engine, m, root, rest)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// Relation choices visited in the worst case: products along nested relation
// quantifiers, sums across siblings. None on overflow.
fn iterations(node: &Node, m: &DecomposableHenkinModel) -> Option<u128> {
    match node {
        Node::Atom { .. } | Node::Eq(..) => Some(1),
        Node::Not(s) | Node::Exists(_, s) | Node::Forall(_, s) => iterations(s, m),
        Node::And(l, r) | Node::Or(l, r) | Node::Implies(l, r) | Node::Iff(l, r) => iterations(l, m)?.checked_add(iterations(r, m)?),
        Node::So { arity, body, .. } => (m.upsilon(*arity).len() as u128).max(1).checked_mul(iterations(body, m)?),
    }
}

fn check_bound(node: &Node, bound: usize) -> Result<()> {
    match node {
        Node::Atom { .. } | Node::Eq(..) => Ok(()),
        Node::Not(s) | Node::Exists(_, s) | Node::Forall(_, s) => check_bound(s, bound),
        Node::And(l, r) | Node::Or(l, r) | Node::Implies(l, r) | Node::Iff(l, r) => {
            check_bound(l, bound)?;
            check_bound(r, bound)
        }
        Node::So { arity, name, body, .. } => {
            if *arity > bound {
                return Err(Error::ArityExceedsBound {
                    symbol: name.clone(),
                    arity: *arity,
                    bound,
                });
            }
            check_bound(body, bound)
        }
    }
}

fn holds(engine: &mut Engine<'_>, m: &DecomposableHenkinModel, node: &Node) -> Result<bool> {
    if !node.has_so() {
        return engine.decide(node);
    }
    Ok(match node {
        Node::Atom { .. } | Node::Eq(..) => unreachable!("atoms contain no relation quantifier"),
        Node::Not(s) => !holds(engine, m, s)?,
        Node::And(l, r) => holds(engine, m, l)? && holds(engine, m, r)?,
        Node::Or(l, r) => holds(engine, m, l)? || holds(engine, m, r)?,
        Node::Implies(l, r) => !holds(engine, m, l)? || holds(engine, m, r)?,
        Node::Iff(l, r) => holds(engine, m, l)? == holds(engine, m, r)?,
        Node::Exists(slot, body) | Node::Forall(slot, body) => {
            let existential = matches!(node, Node::Exists(..));
            for e in 0..m.base.size() {
                engine.fo[*slot] = e;
                if holds(engine, m, body)? == existential {
                    return Ok(existential);
                }
            }
            !existential
        }
        Node::So {
            existential,
            slot,
            arity,
            name,
            body,
        } => {
            for r in m.upsilon(*arity) {
                engine.set_relation(*slot, r, name, *arity)?;
                if holds(engine, m, body)? == *existential {
                    return Ok(*existential);
                }
            }
            !*existential
        }
    })
}
