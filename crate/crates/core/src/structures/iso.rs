//! Isomorphism search by backtracking with degree pruning.

use super::FiniteStructure;
use crate::error::{Error, Result};

// Per-element counts: for each relation and argument position, how many
// tuples carry the element there, plus how many tuples are constant on it.
fn element_profiles(a: &FiniteStructure) -> Vec<Vec<u32>> {
    let mut prof = vec![Vec::new(); a.size()];
    for r in a.relations() {
        let k = r.arity();
        let base: Vec<usize> = prof.iter().map(Vec::len).collect();
        for (e, p) in prof.iter_mut().enumerate() {
            debug_assert_eq!(p.len(), base[e]);
            p.extend(std::iter::repeat_n(0, k + 1));
        }
        for t in r.tuples() {
            for (pos, &e) in t.iter().enumerate() {
                prof[e][base[e] + pos] += 1;
            }
            if t.iter().all(|&e| e == t[0]) {
                prof[t[0]][base[t[0]] + k] += 1;
            }
        }
    }
    prof
}

/// Isomorphism-invariant summary used to bucket structures before search.
pub fn fingerprint(a: &FiniteStructure) -> Vec<u32> {
    let mut profiles = element_profiles(a);
    profiles.sort();
    let mut out = vec![a.size() as u32];
    out.extend(a.relations().iter().map(|r| r.len() as u32));
    out.extend(profiles.into_iter().flatten());
    out
}

/// The lexicographically least bijection `h` with `h(R^A) = R^B` for every
/// symbol, or `None` when the structures are not isomorphic.
pub fn find_isomorphism(a: &FiniteStructure, b: &FiniteStructure) -> Result<Option<Vec<usize>>> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(format!("{} vs {}", a.signature(), b.signature())));
    }
    if a.size() != b.size() || a.relations().iter().zip(b.relations()).any(|(r, s)| r.len() != s.len()) {
        return Ok(None);
    }
    let (pa, pb) = (element_profiles(a), element_profiles(b));
    let mut sorted_a = pa.clone();
    let mut sorted_b = pb.clone();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Ok(None);
    }
    let n = a.size();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| pa[u] == pb[v]).collect())
        .collect();
    let mut search = Search {
        a,
        b,
        map: Vec::with_capacity(n),
        used: vec![false; n],
        candidates,
    };
    Ok(if search.extend() { Some(search.map) } else { None })
}

pub fn is_isomorphic(a: &FiniteStructure, b: &FiniteStructure) -> Result<bool> {
    Ok(find_isomorphism(a, b)?.is_some())
}

struct Search<'a> {
    a: &'a FiniteStructure,
    b: &'a FiniteStructure,
    map: Vec<usize>,
    used: Vec<bool>,
    candidates: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn extend(&mut self) -> bool {
        let u = self.map.len();
        if u == self.a.size() {
            return true;
        }
        for i in 0..self.candidates[u].len() {
            let v = self.candidates[u][i];
            if self.used[v] {
                continue;
            }
            self.map.push(v);
            self.used[v] = true;
            if self.consistent(u) && self.extend() {
                return true;
            }
            self.used[v] = false;
            self.map.pop();
        }
        false
    }

    // Checks every tuple over the mapped prefix `0..=u` that mentions `u`.
    fn consistent(&self, u: usize) -> bool {
        let m = u + 1;
        for (ra, rb) in self.a.relations().iter().zip(self.b.relations()) {
            let k = ra.arity();
            let mut t = vec![0usize; k];
            let total = m.pow(k as u32);
            for code in 0..total {
                let mut c = code;
                for slot in t.iter_mut().rev() {
                    *slot = c % m;
                    c /= m;
                }
                if !t.contains(&u) {
                    continue;
                }
                let image: Vec<usize> = t.iter().map(|&e| self.map[e]).collect();
                if ra.contains(&t) != rb.contains(&image) {
                    return false;
                }
            }
        }
        true
    }
}
