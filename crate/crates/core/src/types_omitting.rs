//! Types in designated relation variables, computed relative to a finite pool
//! of structures.
//!
//! Every set of types here is the set realized by some explicitly given
//! structure; types realized only outside the pool are invisible.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula_space::TheoryVector;
use crate::formulas::{parse, validate_sentence, Formula};
use crate::structures::{cell_count, find_isomorphism, fingerprint, Assignment, EvalOptions, FiniteStructure, Prepared, Relation, Signature};

/// A complete type: bit `j` says whether the `j`-th context formula holds.
pub type TwoType = TheoryVector;

/// Relation variables `X0..X{m-1}` with arities and a list of formulas in them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeContext {
    signature: Signature,
    arities: Vec<usize>,
    formulas: Vec<Formula>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    arities: Vec<usize>,
    fragment: Vec<String>,
}

impl TypeContext {
    pub fn new(signature: Signature, arities: Vec<usize>, formulas: Vec<Formula>) -> Result<Self> {
        let names = (0..arities.len()).map(|i| (format!("X{i}"), arities[i]));
        let expanded = signature.extended(names).map_err(|e| match e {
            Error::InvalidSignature(m) => Error::InvalidFragment(format!("relation variables clash with the signature: {m}")),
            other => other,
        })?;
        let mut seen = HashSet::new();
        for f in &formulas {
            validate_sentence(f, &expanded)?;
            if !seen.insert(f) {
                return Err(Error::InvalidFragment(format!("`{f}` occurs twice")));
            }
        }
        Ok(TypeContext {
            signature,
            arities,
            formulas,
        })
    }

    pub fn parse_all<S: AsRef<str>>(signature: Signature, arities: Vec<usize>, texts: &[S]) -> Result<Self> {
        let formulas = texts.iter().map(|t| parse(t.as_ref())).collect::<Result<Vec<_>>>()?;
        TypeContext::new(signature, arities, formulas)
    }

    /// Reads `{"arities": [..], "fragment": [..]}`.
    pub fn from_json(signature: Signature, text: &str) -> Result<Self> {
        let file: ContextFile = serde_json::from_str(text)?;
        TypeContext::parse_all(signature, file.arities, &file.fragment)
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }
}

/// Realized types of one structure, each with the first relation tuple found.
pub type RealizedTypes = BTreeMap<TwoType, Vec<Relation>>;

/// The type of every choice of relations for `X0..` on `a`.
pub fn realized_types(a: &FiniteStructure, ctx: &TypeContext, opts: EvalOptions) -> Result<RealizedTypes> {
    let n = a.size();
    let cells: Vec<usize> = ctx.arities.iter().map(|&k| cell_count(n, k)).collect();
    let total: usize = cells.iter().sum();
    opts.check_cells("relation tuples of the type context", total)?;
    let prepared = ctx
        .formulas
        .iter()
        .map(|f| Prepared::new(f, a.signature()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = RealizedTypes::new();
    for code in 0..(1u128 << total) {
        let mut rest = code;
        let mut rels = Vec::with_capacity(cells.len());
        let mut asg = Assignment::new();
        for (i, (&c, &k)) in cells.iter().zip(&ctx.arities).enumerate() {
            let r = Relation::from_mask(k, n, (rest & ((1u128 << c) - 1)) as u64);
            rest >>= c;
            asg = asg.with_relation(format!("X{i}"), r.clone());
            rels.push(r);
        }
        let bits = prepared
            .iter()
            .map(|p| p.eval_full(a, &asg, opts))
            .collect::<Result<Vec<_>>>()?;
        out.entry(TheoryVector(bits)).or_insert(rels);
    }
    Ok(out)
}

pub fn omits(a: &FiniteStructure, p: &TwoType, ctx: &TypeContext, opts: EvalOptions) -> Result<bool> {
    if p.len() != ctx.formulas.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: ctx.formulas.len(),
        });
    }
    Ok(!realized_types(a, ctx, opts)?.contains_key(p))
}

fn realized_union(structures: &[FiniteStructure], ctx: &TypeContext, opts: EvalOptions) -> Result<BTreeSet<TwoType>> {
    let mut all = BTreeSet::new();
    for a in structures {
        all.extend(realized_types(a, ctx, opts)?.into_keys());
    }
    Ok(all)
}

/// Types realized in some pool member and omitted by every member of `k`.
pub fn omitted_by_all(k: &[FiniteStructure], pool: &[FiniteStructure], ctx: &TypeContext, opts: EvalOptions) -> Result<BTreeSet<TwoType>> {
    let in_k = realized_union(k, ctx, opts)?;
    Ok(realized_union(pool, ctx, opts)?
        .into_iter()
        .filter(|p| !in_k.contains(p))
        .collect())
}

// Positions of pool members isomorphic to no member of `k`.
fn outside(k: &[FiniteStructure], pool: &[FiniteStructure]) -> Result<Vec<usize>> {
    let mut buckets: BTreeMap<Vec<u32>, Vec<&FiniteStructure>> = BTreeMap::new();
    for a in k {
        buckets.entry(fingerprint(a)).or_default().push(a);
    }
    let mut out = Vec::new();
    for (i, b) in pool.iter().enumerate() {
        let mut found = false;
        for a in buckets.get(&fingerprint(b)).into_iter().flatten() {
            if a.signature() == b.signature() && find_isomorphism(a, b)?.is_some() {
                found = true;
                break;
            }
        }
        if !found {
            out.push(i);
        }
    }
    Ok(out)
}

const POOL_NOTE: &str = "types are relative to the given pool; types realized only outside it are not seen";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmissionReport {
    pub note: &'static str,
    /// Members of the proposed set that some member of K realizes or that no
    /// pool member realizes.
    pub not_omitted: Vec<TwoType>,
    /// Pool members outside K (up to isomorphism) realizing no proposed type.
    pub unexcluded: Vec<usize>,
    pub pass: bool,
}

/// Checks that omitting every type of `pi` cuts the pool down to `k`.
pub fn check_omission_axiomatization(
    k: &[FiniteStructure],
    pi: &BTreeSet<TwoType>,
    pool: &[FiniteStructure],
    ctx: &TypeContext,
    opts: EvalOptions,
) -> Result<OmissionReport> {
    let omitted = omitted_by_all(k, pool, ctx, opts)?;
    let not_omitted: Vec<TwoType> = pi.iter().filter(|p| !omitted.contains(p)).cloned().collect();
    let mut unexcluded = Vec::new();
    for i in outside(k, pool)? {
        let realized = realized_types(&pool[i], ctx, opts)?;
        if !pi.iter().any(|p| realized.contains_key(p)) {
            unexcluded.push(i);
        }
    }
    Ok(OmissionReport {
        note: POOL_NOTE,
        pass: not_omitted.is_empty() && unexcluded.is_empty(),
        not_omitted,
        unexcluded,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyAReport {
    pub note: &'static str,
    /// Pool members outside K whose realized types all occur in K.
    pub counterexamples: Vec<usize>,
    pub pass: bool,
}

const PROPERTY_A_NOTE: &str = "isomorphic ultrapowers are replaced by equality of realized type sets; \
types are relative to the given pool";

/// Pool members outside `k` that no type separates from `k`.
pub fn property_a_check(k: &[FiniteStructure], pool: &[FiniteStructure], ctx: &TypeContext, opts: EvalOptions) -> Result<PropertyAReport> {
    let in_k = realized_union(k, ctx, opts)?;
    let mut counterexamples = Vec::new();
    for i in outside(k, pool)? {
        if realized_types(&pool[i], ctx, opts)?.keys().all(|p| in_k.contains(p)) {
            counterexamples.push(i);
        }
    }
    Ok(PropertyAReport {
        note: PROPERTY_A_NOTE,
        pass: counterexamples.is_empty(),
        counterexamples,
    })
}
