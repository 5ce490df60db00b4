//! Seeded random structures and sentences for the randomized suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::formulas::Formula;
use crate::structures::{cell_count, FiniteStructure, Relation, Signature};

pub use rand::SeedableRng;

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each tuple present with probability one half.
pub fn random_structure(rng: &mut impl Rng, sig: &Signature, n: usize) -> FiniteStructure {
    let relations = sig
        .iter()
        .map(|(_, k)| {
            let mut r = Relation::empty(k, n);
            for i in 0..cell_count(n, k) {
                if rng.gen_bool(0.5) {
                    r.set_bit(i, true);
                }
            }
            r
        })
        .collect();
    FiniteStructure::from_parts(sig.clone(), n, relations)
}

/// `m` structures with universes drawn from `1..=max_size`.
pub fn random_family(rng: &mut impl Rng, sig: &Signature, m: usize, max_size: usize) -> Vec<FiniteStructure> {
    (0..m)
        .map(|_| {
            let n = rng.gen_range(1..=max_size);
            random_structure(rng, sig, n)
        })
        .collect()
}

/// Shape of generated sentences.
#[derive(Clone, Debug)]
pub struct FormulaConfig {
    /// Bound on nested quantifiers of either order.
    pub max_depth: usize,
    /// Largest relation-quantifier arity; 0 gives first-order sentences.
    pub max_so_arity: usize,
    /// Bound on the sum of `base^k` over nested relation quantifiers of arity
    /// `k`, which caps `2^(n^k)` products on universes of size `base`.
    pub so_cells: usize,
    pub cells_base: usize,
    /// Bound on connective nodes.
    pub max_connectives: usize,
}

impl Default for FormulaConfig {
    fn default() -> Self {
        FormulaConfig {
            max_depth: 3,
            max_so_arity: 2,
            so_cells: 9,
            cells_base: 3,
            max_connectives: 4,
        }
    }
}

struct Builder<'a, R> {
    rng: &'a mut R,
    cfg: &'a FormulaConfig,
    sig: Vec<(String, usize)>,
    connectives: usize,
}

/// A random sentence over `sig`; every atom uses bound variables only.
pub fn random_sentence(rng: &mut impl Rng, sig: &Signature, cfg: &FormulaConfig) -> Formula {
    let mut b = Builder {
        rng,
        cfg,
        sig: sig.iter().map(|(s, k)| (s.to_string(), k)).collect(),
        connectives: 0,
    };
    let mut rels = Vec::new();
    let depth = cfg.max_depth.max(1);
    b.quantifier(depth, &mut Vec::new(), &mut rels, 0)
}

impl<R: Rng> Builder<'_, R> {
    fn node(&mut self, depth: usize, fo: &mut Vec<String>, rels: &mut Vec<(String, usize)>, cells: usize) -> Formula {
        if fo.is_empty() {
            return self.quantifier(depth, fo, rels, cells);
        }
        let roll = self.rng.gen_range(0..10);
        match roll {
            0..=3 => self.atom(fo, rels),
            4 | 5 if depth > 0 => self.quantifier(depth, fo, rels, cells),
            _ if self.connectives < self.cfg.max_connectives => {
                self.connectives += 1;
                match self.rng.gen_range(0..5) {
                    0 => Formula::not(self.node(depth, fo, rels, cells)),
                    c => {
                        let l = self.node(depth, fo, rels, cells);
                        let r = self.node(depth, fo, rels, cells);
                        match c {
                            1 => Formula::and(l, r),
                            2 => Formula::or(l, r),
                            3 => Formula::implies(l, r),
                            _ => Formula::iff(l, r),
                        }
                    }
                }
            }
            _ => self.atom(fo, rels),
        }
    }

    fn quantifier(&mut self, depth: usize, fo: &mut Vec<String>, rels: &mut Vec<(String, usize)>, cells: usize) -> Formula {
        let arities: Vec<usize> = (1..=self.cfg.max_so_arity)
            .filter(|&k| cells + self.cfg.cells_base.pow(k as u32) <= self.cfg.so_cells)
            .collect();
        // keep one level for a first-order quantifier when none is in scope yet
        let so_ok = !arities.is_empty() && (depth > 1 || !fo.is_empty());
        if so_ok && self.rng.gen_bool(0.35) {
            let k = *arities.choose(self.rng).expect("nonempty");
            let name = self.fresh_relation(rels);
            rels.push((name.clone(), k));
            let body = self.node(depth - 1, fo, rels, cells + self.cfg.cells_base.pow(k as u32));
            rels.pop();
            return if self.rng.gen_bool(0.5) {
                Formula::exists_so(name, k, body)
            } else {
                Formula::forall_so(name, k, body)
            };
        }
        let v = format!("x{}", fo.len());
        fo.push(v.clone());
        let body = self.node(depth - 1, fo, rels, cells);
        fo.pop();
        if self.rng.gen_bool(0.5) {
            Formula::exists(v, body)
        } else {
            Formula::forall(v, body)
        }
    }

    fn fresh_relation(&self, rels: &[(String, usize)]) -> String {
        (0..)
            .map(|i| format!("R{i}"))
            .find(|c| !rels.iter().any(|(n, _)| n == c) && !self.sig.iter().any(|(n, _)| n == c))
            .expect("unbounded names")
    }

    fn atom(&mut self, fo: &[String], rels: &[(String, usize)]) -> Formula {
        let choices: Vec<(String, usize)> = self.sig.iter().chain(rels).cloned().collect();
        if choices.is_empty() || self.rng.gen_bool(0.2) {
            let a = fo.choose(self.rng).expect("scope nonempty").clone();
            let b = fo.choose(self.rng).expect("scope nonempty").clone();
            return Formula::eq(a, b);
        }
        // prefer the innermost relation variable so quantifiers are used
        let (name, k) = if !rels.is_empty() && self.rng.gen_bool(0.5) {
            rels.last().expect("nonempty").clone()
        } else {
            choices.choose(self.rng).expect("nonempty").clone()
        };
        let args: Vec<String> = (0..k).map(|_| fo.choose(self.rng).expect("scope nonempty").clone()).collect();
        Formula::atom(name, args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::validate_sentence;

    #[test]
    fn sentences_are_closed_and_within_bounds() {
        let sig = Signature::new([("edge", 2), ("p", 1)]).unwrap();
        let cfg = FormulaConfig::default();
        let mut r = rng(7);
        for _ in 0..500 {
            let f = random_sentence(&mut r, &sig, &cfg);
            validate_sentence(&f, &sig).unwrap();
            assert!(f.quantifier_depth() <= 3);
        }
    }

    #[test]
    fn seeds_replay() {
        let sig = Signature::new([("edge", 2)]).unwrap();
        let cfg = FormulaConfig::default();
        let a: Vec<Formula> = (0..20).map(|_| random_sentence(&mut rng(3), &sig, &cfg)).collect();
        let b: Vec<Formula> = (0..20).map(|_| random_sentence(&mut rng(3), &sig, &cfg)).collect();
        assert_eq!(a, b);
        assert_eq!(random_family(&mut rng(9), &sig, 3, 3), random_family(&mut rng(9), &sig, 3, 3));
    }
}
