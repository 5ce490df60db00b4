use std::collections::HashMap;

use super::{cell_count, find_isomorphism, fingerprint, EvalOptions, FiniteStructure, Prepared, Relation, Signature};
use crate::error::Result;
use crate::formulas::{validate_sentence, Formula};
use crate::structures::Assignment;

/// Total number of tuple cells a structure of size `n` over `sig` has.
pub fn structure_count(sig: &Signature, n: usize) -> usize {
    sig.iter().map(|(_, k)| cell_count(n, k)).sum()
}

/// Every structure of size `n` over `sig`, in counter order: the structure
/// with code `c` puts tuple cells of the first symbol in the low bits of `c`.
pub fn all_structures(sig: &Signature, n: usize, opts: EvalOptions) -> Result<impl Iterator<Item = FiniteStructure> + '_> {
    let bits = structure_count(sig, n);
    opts.check_cells(&format!("structures of size {n} over {sig}"), bits)?;
    let widths: Vec<(usize, usize)> = sig.iter().map(|(_, k)| (k, cell_count(n, k))).collect();
    Ok((0..1u64 << bits).map(move |mut code| {
        let mut rels = Vec::with_capacity(widths.len());
        for &(k, cells) in &widths {
            let mask = if cells == 64 { code } else { code & ((1u64 << cells) - 1) };
            rels.push(Relation::from_mask(k, n, mask));
            code = if cells >= 64 { 0 } else { code >> cells };
        }
        FiniteStructure::from_parts(sig.clone(), n, rels)
    }))
}

#[derive(Default)]
struct Classes {
    reps: Vec<FiniteStructure>,
    buckets: HashMap<Vec<u32>, Vec<usize>>,
}

impl Classes {
    fn offer(&mut self, a: FiniteStructure) -> Result<()> {
        let key = fingerprint(&a);
        let bucket = self.buckets.entry(key).or_default();
        for &i in bucket.iter() {
            if find_isomorphism(&self.reps[i], &a)?.is_some() {
                return Ok(());
            }
        }
        bucket.push(self.reps.len());
        self.reps.push(a);
        Ok(())
    }
}

/// One representative per isomorphism class of structures with `1..=nmax`
/// elements, by size and then by first appearance in counter order.
pub fn iso_classes(sig: &Signature, nmax: usize, opts: EvalOptions) -> Result<Vec<FiniteStructure>> {
    let mut classes = Classes::default();
    for n in 1..=nmax {
        for a in all_structures(sig, n, opts)? {
            classes.offer(a)?;
        }
    }
    Ok(classes.reps)
}

/// Models of the sentence `f` with at most `nmax` elements, one per
/// isomorphism class, in the order of [`iso_classes`].
pub fn models_up_to(f: &Formula, sig: &Signature, nmax: usize, opts: EvalOptions) -> Result<Vec<FiniteStructure>> {
    validate_sentence(f, sig)?;
    let prepared = Prepared::new(f, sig)?;
    let none = Assignment::new();
    let mut classes = Classes::default();
    for n in 1..=nmax {
        for a in all_structures(sig, n, opts)? {
            if prepared.eval_full(&a, &none, opts)? {
                classes.offer(a)?;
            }
        }
    }
    Ok(classes.reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;
    use crate::structures::eval_fo;

    #[test]
    fn counts_of_small_classes() {
        let graph = Signature::new([("edge", 2)]).unwrap();
        assert_eq!(all_structures(&graph, 2, EvalOptions::default()).unwrap().count(), 16);
        // digraphs with loops allowed: 2, 10 classes on one and two vertices
        assert_eq!(iso_classes(&graph, 2, EvalOptions::default()).unwrap().len(), 2 + 10);
        let unary = Signature::new([("p", 1)]).unwrap();
        // a unary predicate on n points is determined by its size: n + 1 classes
        assert_eq!(iso_classes(&unary, 4, EvalOptions::default()).unwrap().len(), 2 + 3 + 4 + 5);
    }

    #[test]
    fn cardinality_models_over_empty_signature() {
        let f = parse("EX x EX y EX z (x != y & x != z & y != z)").unwrap();
        let ms = models_up_to(&f, &Signature::empty(), 4, EvalOptions::default()).unwrap();
        assert_eq!(ms.iter().map(|m| m.size()).collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn reflexive_graphs_up_to_two() {
        let graph = Signature::new([("edge", 2)]).unwrap();
        let f = parse("ALL x edge(x,x)").unwrap();
        let ms = models_up_to(&f, &graph, 2, EvalOptions::default()).unwrap();
        // cross-check against direct enumeration filtered by first-order evaluation
        let direct = iso_classes(&graph, 2, EvalOptions::default())
            .unwrap()
            .into_iter()
            .filter(|a| eval_fo(a, &f, &Assignment::new()).unwrap())
            .collect::<Vec<_>>();
        assert_eq!(ms, direct);
        // one vertex with a loop; two looped vertices with none, one or both cross edges
        assert_eq!(ms.len(), 1 + 3);
        for m in &ms {
            let e = m.relation("edge").unwrap();
            assert!((0..m.size()).all(|v| e.contains(&[v, v])));
        }
    }

    #[test]
    fn unsatisfiable_sentence_has_no_models() {
        let f = parse("EX x x != x").unwrap();
        assert!(models_up_to(&f, &Signature::empty(), 5, EvalOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn enumeration_respects_budget() {
        let graph = Signature::new([("edge", 2)]).unwrap();
        assert!(all_structures(&graph, 5, EvalOptions::default()).is_err());
    }
}
