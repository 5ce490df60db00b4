//! Transfer, Fubini and ultrachain constructions over finite families.

use serde::Serialize;

use super::henkin::{from_ultraproduct, henkin_eval_with, DecomposableHenkinModel};
use super::product::{ultrapower, ultraproduct, UltraproductResult};
use super::Ultrafilter;
use crate::error::{Error, Result};
use crate::formulas::{validate_sentence, Formula};
use crate::structures::{eval_so_full_with, find_isomorphism, Assignment, EvalOptions, FiniteStructure};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LosReport {
    /// Henkin truth in the decomposable-Henkin model over the ultraproduct.
    pub ultra_truth: bool,
    /// Whether `{i : A_i |= f}` belongs to the ultrafilter.
    pub large_set_truth: bool,
    pub agree: bool,
    /// The indices whose factor satisfies the sentence.
    pub satisfied_at: Vec<usize>,
    pub ultrafilter: Ultrafilter,
    pub explicit_quotient: bool,
}

/// Largest arity of a relation quantifier in `f`.
pub(crate) fn max_so_arity(f: &Formula) -> usize {
    match f {
        Formula::Atom { .. } | Formula::Eq(..) => 0,
        Formula::Not(s) | Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => max_so_arity(s),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
            max_so_arity(l).max(max_so_arity(r))
        }
        Formula::ExistsSo { arity, body, .. } | Formula::ForallSo { arity, body, .. } => (*arity).max(max_so_arity(body)),
    }
}

/// Compares Henkin truth of the sentence `f` in the model formed from `family`
/// by `u` with membership of its truth set in `u`.
pub fn check_los(family: &[FiniteStructure], u: &Ultrafilter, f: &Formula, opts: EvalOptions) -> Result<LosReport> {
    let up = ultraproduct(family, u, opts)?;
    validate_sentence(f, up.quotient.signature())?;
    let model = from_ultraproduct(&up, max_so_arity(f).max(1), opts)?;
    let ultra_truth = henkin_eval_with(&model, f, opts)?;
    let mut satisfied_at = Vec::new();
    for (i, a) in family.iter().enumerate() {
        if eval_so_full_with(a, f, &Assignment::new(), opts)? {
            satisfied_at.push(i);
        }
    }
    let large_set_truth = u.contains_set(satisfied_at.iter().copied());
    Ok(LosReport {
        ultra_truth,
        large_set_truth,
        agree: ultra_truth == large_set_truth,
        satisfied_at,
        ultrafilter: u.clone(),
        explicit_quotient: up.verified,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FubiniReport {
    /// `prod_{I x J} A_ij / (F x G)`.
    pub product_side: UltraproductResult,
    /// `prod_I A_ij / F` for each `j`.
    pub inner: Vec<UltraproductResult>,
    /// `prod_J (prod_I A_ij / F) / G`.
    pub iterated_side: UltraproductResult,
    /// Least isomorphism from the product side onto the iterated side.
    pub witness: Option<Vec<usize>>,
}

/// Builds both sides of the Fubini isomorphism for `grid[i][j]`.
pub fn check_fubini(grid: &[Vec<FiniteStructure>], f: &Ultrafilter, g: &Ultrafilter, opts: EvalOptions) -> Result<FubiniReport> {
    if grid.len() != f.size() || grid.iter().any(|row| row.len() != g.size()) {
        return Err(Error::SizeMismatch(format!(
            "grid must be {} x {} to match {f} and {g}",
            f.size(),
            g.size()
        )));
    }
    let flat: Vec<FiniteStructure> = grid.iter().flatten().cloned().collect();
    let product_side = ultraproduct(&flat, &Ultrafilter::product(f, g)?, opts)?;
    let inner = (0..g.size())
        .map(|j| {
            let column: Vec<FiniteStructure> = grid.iter().map(|row| row[j].clone()).collect();
            ultraproduct(&column, f, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let quotients: Vec<FiniteStructure> = inner.iter().map(|r| r.quotient.clone()).collect();
    let iterated_side = ultraproduct(&quotients, g, opts)?;
    let witness = find_isomorphism(&product_side.quotient, &iterated_side.quotient)?;
    Ok(FubiniReport {
        product_side,
        inner,
        iterated_side,
        witness,
    })
}

/// Iterated ultrapowers `A_{k+1} = A_k^{I_k} / F_k` with diagonal embeddings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ultrachain {
    pub stages: Vec<FiniteStructure>,
    pub filters: Vec<Ultrafilter>,
    /// `embeddings[k]` sends each element of stage `k` to the class of its
    /// constant tuple in stage `k + 1`.
    pub embeddings: Vec<Vec<usize>>,
    pub limit: FiniteStructure,
}

impl Ultrachain {
    /// The composite of all embeddings, from the first stage into the limit.
    pub fn limit_embedding(&self) -> Vec<usize> {
        let start: Vec<usize> = (0..self.stages[0].size()).collect();
        self.embeddings
            .iter()
            .fold(start, |acc, e| acc.iter().map(|&x| e[x]).collect())
    }
}

pub fn build_ultrachain(a0: &FiniteStructure, filters: &[Ultrafilter], opts: EvalOptions) -> Result<Ultrachain> {
    let mut stages = vec![a0.clone()];
    let mut embeddings = Vec::new();
    for u in filters {
        let prev = stages.last().expect("chain starts with a0");
        let power = ultrapower(prev, u, opts)?;
        let diagonal = (0..prev.size())
            .map(|x| {
                power
                    .class_of(&vec![x; u.size()])
                    .ok_or_else(|| Error::InvalidStructure(format!("constant tuple of {x} has no class")))
            })
            .collect::<Result<Vec<_>>>()?;
        embeddings.push(diagonal);
        stages.push(power.quotient);
    }
    Ok(Ultrachain {
        limit: stages.last().expect("nonempty").clone(),
        stages,
        filters: filters.to_vec(),
        embeddings,
    })
}

/// The Henkin model on the chain's limit whose relation universe is the set of
/// relations decomposable over copies of the first stage by the composed
/// filter `F_0 x F_1 x ...` (a single principal index for the empty chain).
pub fn limit_henkin_model(chain: &Ultrachain, arity_bound: usize, opts: EvalOptions) -> Result<DecomposableHenkinModel> {
    let composed = match chain.filters.split_first() {
        None => Ultrafilter::principal(1, 0)?,
        Some((first, rest)) => rest
            .iter()
            .try_fold(first.clone(), |acc, u| Ultrafilter::product(&acc, u))?,
    };
    let up = ultraproduct(&vec![chain.stages[0].clone(); composed.size()], &composed, opts)?;
    let model = from_ultraproduct(&up, arity_bound, opts)?;
    let h = find_isomorphism(&up.quotient, &chain.limit)?
        .ok_or_else(|| Error::InvalidStructure("composed ultrapower differs from the chain limit".into()))?;
    Ok(model.transport(&h, chain.limit.clone()))
}
