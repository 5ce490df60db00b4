//! Explicit ultraproducts over finite families.

use serde::Serialize;

use super::Ultrafilter;
use crate::error::{Error, Result};
use crate::structures::{find_isomorphism, EvalOptions, FiniteStructure, Relation};

/// The quotient `prod A_i / U` together with how it was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UltraproductResult {
    #[serde(skip)]
    pub quotient: FiniteStructure,
    /// For each quotient element, the lexicographically least tuple of its class.
    pub class_representatives: Vec<Vec<usize>>,
    #[serde(skip)]
    pub family: Vec<FiniteStructure>,
    pub ultrafilter: Ultrafilter,
    /// True when the quotient was built from the full product and checked
    /// against the factor at the principal index.
    pub verified: bool,
}

impl UltraproductResult {
    pub fn size(&self) -> usize {
        self.quotient.size()
    }

    /// The quotient element whose class contains `tuple`.
    pub fn class_of(&self, tuple: &[usize]) -> Option<usize> {
        self.class_representatives
            .iter()
            .position(|rep| agree_on_large_set(&self.ultrafilter, rep, tuple))
    }
}

fn agree_on_large_set(u: &Ultrafilter, a: &[usize], b: &[usize]) -> bool {
    u.contains(a.iter().zip(b).enumerate().filter(|(_, (x, y))| x == y).fold(0, |m, (i, _)| m | 1 << i))
}

fn check_family(family: &[FiniteStructure], u: &Ultrafilter) -> Result<()> {
    if family.len() != u.size() {
        return Err(Error::SizeMismatch(format!(
            "family has {} members, ultrafilter {u} lives on {} indices",
            family.len(),
            u.size()
        )));
    }
    let sig = family[0].signature();
    if let Some(b) = family.iter().find(|b| b.signature() != sig) {
        return Err(Error::SignatureMismatch(format!("{} vs {}", sig, b.signature())));
    }
    Ok(())
}

/// Reads the ultraproduct off the factor at the principal index.
pub fn ultraproduct_fast(family: &[FiniteStructure], u: &Ultrafilter) -> Result<UltraproductResult> {
    check_family(family, u)?;
    let i0 = u.principal_index();
    let quotient = family[i0].clone();
    let class_representatives = (0..quotient.size())
        .map(|e| {
            let mut t = vec![0; family.len()];
            t[i0] = e;
            t
        })
        .collect();
    Ok(UltraproductResult {
        quotient,
        class_representatives,
        family: family.to_vec(),
        ultrafilter: u.clone(),
        verified: false,
    })
}

/// Builds the quotient from every tuple of the full product, identifying
/// tuples that agree on a set in `u`; relations hold on a class tuple iff they
/// hold componentwise on a set in `u`.
pub fn ultraproduct_explicit(family: &[FiniteStructure], u: &Ultrafilter, opts: EvalOptions) -> Result<UltraproductResult> {
    check_family(family, u)?;
    let total = family
        .iter()
        .try_fold(1u128, |acc, a| acc.checked_mul(a.size() as u128));
    opts.check_count("ultraproduct of the family", total, "product tuples")?;
    let sizes: Vec<usize> = family.iter().map(FiniteStructure::size).collect();

    let mut reps: Vec<Vec<usize>> = Vec::new();
    let mut tuple = vec![0usize; family.len()];
    loop {
        if !reps.iter().any(|r| agree_on_large_set(u, r, &tuple)) {
            reps.push(tuple.clone());
        }
        if !advance(&mut tuple, &sizes) {
            break;
        }
    }
    let i0 = u.principal_index();
    reps.sort_by_key(|r| r[i0]);

    let n = reps.len();
    let sig = family[0].signature().clone();
    let relations = (0..sig.len())
        .map(|s| {
            let k = family[0].relations()[s].arity();
            let mut r = Relation::empty(k, n);
            for idx in 0..r.cells() {
                let classes = r.tuple_at(idx);
                let holds = (0..family.len()).filter(|&i| {
                    let t: Vec<usize> = classes.iter().map(|&c| reps[c][i]).collect();
                    family[i].relations()[s].contains(&t)
                });
                if u.contains(holds.fold(0, |m, i| m | 1 << i)) {
                    r.set_bit(idx, true);
                }
            }
            r
        })
        .collect();
    let quotient = FiniteStructure::from_parts(sig, n, relations);
    let verified = find_isomorphism(&quotient, &family[i0])?.is_some();
    if !verified {
        return Err(Error::InvalidStructure(format!(
            "explicit ultraproduct by {u} is not isomorphic to factor {i0}"
        )));
    }
    Ok(UltraproductResult {
        quotient,
        class_representatives: reps,
        family: family.to_vec(),
        ultrafilter: u.clone(),
        verified,
    })
}

/// The explicit construction when the product fits the budget, otherwise the
/// principal-index shortcut.
pub fn ultraproduct(family: &[FiniteStructure], u: &Ultrafilter, opts: EvalOptions) -> Result<UltraproductResult> {
    match ultraproduct_explicit(family, u, opts) {
        Err(e) if e.is_budget() => ultraproduct_fast(family, u),
        other => other,
    }
}

/// `A^I / U`.
pub fn ultrapower(a: &FiniteStructure, u: &Ultrafilter, opts: EvalOptions) -> Result<UltraproductResult> {
    ultraproduct(&vec![a.clone(); u.size()], u, opts)
}

// Next tuple in lexicographic order; false after the last one.
pub(crate) fn advance(t: &mut [usize], sizes: &[usize]) -> bool {
    for pos in (0..t.len()).rev() {
        t[pos] += 1;
        if t[pos] < sizes[pos] {
            return true;
        }
        t[pos] = 0;
    }
    false
}

/// `prod R_i / U` as a relation on the quotient.
pub fn recompose(factors: &[Relation], up: &UltraproductResult) -> Result<Relation> {
    if factors.len() != up.family.len() {
        return Err(Error::SizeMismatch(format!(
            "{} factor relations for a family of {}",
            factors.len(),
            up.family.len()
        )));
    }
    let k = factors.first().map_or(1, Relation::arity);
    for (i, r) in factors.iter().enumerate() {
        if r.arity() != k || r.universe() != up.family[i].size() {
            return Err(Error::InvalidParameter(format!(
                "factor relation {i} must be {k}-ary on a universe of {}",
                up.family[i].size()
            )));
        }
    }
    let mut out = Relation::empty(k, up.size());
    for idx in 0..out.cells() {
        let classes = out.tuple_at(idx);
        let holds = (0..factors.len()).filter(|&i| {
            let t: Vec<usize> = classes.iter().map(|&c| up.class_representatives[c][i]).collect();
            factors[i].contains(&t)
        });
        if up.ultrafilter.contains(holds.fold(0, |m, i| m | 1 << i)) {
            out.set_bit(idx, true);
        }
    }
    Ok(out)
}

/// Factor relations `R_i` with `prod R_i / U = r`, or `None`.
///
/// The factor at the principal index is the pullback of `r` along the
/// representatives; the others are empty.
pub fn is_decomposable(r: &Relation, up: &UltraproductResult) -> Result<Option<Vec<Relation>>> {
    if r.universe() != up.size() {
        return Err(Error::SizeMismatch(format!(
            "relation on {} elements, quotient has {}",
            r.universe(),
            up.size()
        )));
    }
    let i0 = up.ultrafilter.principal_index();
    let mut factors: Vec<Relation> = up.family.iter().map(|a| Relation::empty(r.arity(), a.size())).collect();
    for t in r.tuples() {
        let image: Vec<usize> = t.iter().map(|&c| up.class_representatives[c][i0]).collect();
        factors[i0].insert(&image)?;
    }
    Ok((recompose(&factors, up)? == *r).then_some(factors))
}
