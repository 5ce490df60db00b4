//! Finite relational structures and their semantics.
//!
//! A structure lives on the universe `{0..n-1}` with `n >= 1`. Each relation
//! is stored as a bitset over all `n^k` tuples in lexicographic order, so a
//! binary relation on a three-element universe is a nine-bit word.

mod enumerate;
mod eval;
mod iso;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{all_structures, iso_classes, models_up_to, structure_count};
pub use eval::{eval_fo, eval_so_full, eval_so_full_with, EvalOptions, Prepared, DEFAULT_BUDGET};
pub(crate) use eval::{Engine, Node};
pub use iso::{find_isomorphism, fingerprint, is_isomorphic};
pub use json::{load_class, load_structure, StructureFile};

/// Relation names with their arities, kept in name order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, usize>", into = "BTreeMap<String, usize>")]
pub struct Signature {
    symbols: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return Err(Error::InvalidSignature(format!("`{name}` has arity 0")));
            }
            if !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
                return Err(Error::InvalidSignature(format!("`{name}` is not an identifier")));
            }
            if map.insert(name.clone(), arity).is_some() {
                return Err(Error::InvalidSignature(format!("`{name}` declared twice")));
            }
        }
        Ok(Signature { symbols: map })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    /// Position of `name` in the name order.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.keys().position(|k| k == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.symbols.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The signature with extra symbols added; existing names are rejected.
    pub fn extended<S: Into<String>>(&self, extra: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let all: Vec<(String, usize)> = self
            .symbols
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .chain(extra.into_iter().map(|(k, v)| (k.into(), v)))
            .collect();
        Signature::new(all)
    }
}

impl TryFrom<BTreeMap<String, usize>> for Signature {
    type Error = Error;

    fn try_from(map: BTreeMap<String, usize>) -> Result<Self> {
        Signature::new(map)
    }
}

impl From<Signature> for BTreeMap<String, usize> {
    fn from(s: Signature) -> Self {
        s.symbols
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        f.write_str("}")
    }
}

/// A `k`-ary relation on `{0..n-1}` as a bitset over the `n^k` tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    size: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(arity: usize, size: usize) -> Self {
        let cells = cell_count(size, arity);
        Relation {
            arity,
            size,
            bits: vec![0; cells.div_ceil(64).max(1)],
        }
    }

    /// The relation whose tuple `t` is present iff bit `index(t)` of `mask` is set.
    pub fn from_mask(arity: usize, size: usize, mask: u64) -> Self {
        let mut r = Relation::empty(arity, size);
        let cells = r.cells();
        debug_assert!(cells <= 64);
        r.bits[0] = if cells == 64 { mask } else { mask & ((1u64 << cells) - 1) };
        r
    }

    pub fn from_tuples<T: AsRef<[usize]>>(arity: usize, size: usize, tuples: impl IntoIterator<Item = T>) -> Result<Self> {
        let mut r = Relation::empty(arity, size);
        for t in tuples {
            r.insert(t.as_ref())?;
        }
        Ok(r)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe(&self) -> usize {
        self.size
    }

    /// Number of tuples of the right arity, `n^k`.
    pub fn cells(&self) -> usize {
        cell_count(self.size, self.arity)
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &e| acc * self.size + e)
    }

    pub fn tuple_at(&self, mut index: usize) -> Vec<usize> {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = index % self.size;
            index /= self.size;
        }
        t
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.arity && tuple.iter().all(|&e| e < self.size) && self.bit(self.index(tuple))
    }

    pub(crate) fn bit(&self, index: usize) -> bool {
        self.bits[index >> 6] >> (index & 63) & 1 == 1
    }

    pub(crate) fn set_bit(&mut self, index: usize, value: bool) {
        if value {
            self.bits[index >> 6] |= 1 << (index & 63);
        } else {
            self.bits[index >> 6] &= !(1 << (index & 63));
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn insert(&mut self, tuple: &[usize]) -> Result<()> {
        if tuple.len() != self.arity {
            return Err(Error::InvalidStructure(format!(
                "tuple {tuple:?} has length {}, expected {}",
                tuple.len(),
                self.arity
            )));
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.size) {
            return Err(Error::InvalidStructure(format!(
                "element {e} outside universe of size {}",
                self.size
            )));
        }
        let i = self.index(tuple);
        self.set_bit(i, true);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Member tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.cells()).filter(|&i| self.bit(i)).map(|i| self.tuple_at(i))
    }

    /// Image under an element map `h` into a universe of size `size`.
    pub fn map(&self, h: &[usize], size: usize) -> Relation {
        let mut out = Relation::empty(self.arity, size);
        for t in self.tuples() {
            let image: Vec<usize> = t.iter().map(|&e| h[e]).collect();
            let i = out.index(&image);
            out.set_bit(i, true);
        }
        out
    }
}

pub(crate) fn cell_count(size: usize, arity: usize) -> usize {
    size.checked_pow(arity as u32).unwrap_or(usize::MAX)
}

/// A finite relational structure on `{0..n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    relations: Vec<Relation>,
}

impl FiniteStructure {
    /// Builds a structure; every signature symbol must be interpreted.
    pub fn new(signature: Signature, size: usize, relations: BTreeMap<String, Relation>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidStructure("universe must be nonempty".into()));
        }
        if let Some(extra) = relations.keys().find(|k| signature.arity(k).is_none()) {
            return Err(Error::InvalidStructure(format!("`{extra}` is not in the signature")));
        }
        let mut rels = Vec::with_capacity(signature.len());
        for (name, arity) in signature.iter() {
            let r = relations
                .get(name)
                .ok_or_else(|| Error::InvalidStructure(format!("`{name}` is not interpreted")))?;
            if r.arity() != arity || r.universe() != size {
                return Err(Error::InvalidStructure(format!(
                    "`{name}` interpreted with arity {} on {} elements, expected arity {arity} on {size}",
                    r.arity(),
                    r.universe()
                )));
            }
            rels.push(r.clone());
        }
        Ok(FiniteStructure {
            signature,
            size,
            relations: rels,
        })
    }

    /// Builds a structure from tuple lists; symbols not listed are empty.
    pub fn from_tuples<S, T>(signature: Signature, size: usize, relations: impl IntoIterator<Item = (S, Vec<T>)>) -> Result<Self>
    where
        S: Into<String>,
        T: AsRef<[usize]>,
    {
        if size == 0 {
            return Err(Error::InvalidStructure("universe must be nonempty".into()));
        }
        let mut map: BTreeMap<String, Relation> = signature
            .iter()
            .map(|(n, k)| (n.to_string(), Relation::empty(k, size)))
            .collect();
        for (name, tuples) in relations {
            let name = name.into();
            let arity = signature
                .arity(&name)
                .ok_or_else(|| Error::InvalidStructure(format!("`{name}` is not in the signature")))?;
            map.insert(name, Relation::from_tuples(arity, size, tuples)?);
        }
        FiniteStructure::new(signature, size, map)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    /// Relations in signature order.
    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub(crate) fn from_parts(signature: Signature, size: usize, relations: Vec<Relation>) -> Self {
        debug_assert_eq!(signature.len(), relations.len());
        FiniteStructure {
            signature,
            size,
            relations,
        }
    }

    /// The isomorphic copy along the bijection `h`.
    pub fn relabel(&self, h: &[usize]) -> Result<FiniteStructure> {
        let mut seen = vec![false; self.size];
        if h.len() != self.size || h.iter().any(|&v| v >= self.size || std::mem::replace(&mut seen[v], true)) {
            return Err(Error::InvalidParameter(format!("{h:?} is not a permutation of 0..{}", self.size)));
        }
        Ok(FiniteStructure::from_parts(
            self.signature.clone(),
            self.size,
            self.relations.iter().map(|r| r.map(h, self.size)).collect(),
        ))
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.size)?;
        for ((name, _), r) in self.signature.iter().zip(&self.relations) {
            let tuples: Vec<String> = r
                .tuples()
                .map(|t| format!("({})", t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            write!(f, " {name}={{{}}}", tuples.join(","))?;
        }
        Ok(())
    }
}

/// Values for free first-order variables and free relation variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub elements: BTreeMap<String, usize>,
    pub relations: BTreeMap<String, Relation>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn with_element(mut self, var: impl Into<String>, element: usize) -> Self {
        self.elements.insert(var.into(), element);
        self
    }

    pub fn with_relation(mut self, var: impl Into<String>, relation: Relation) -> Self {
        self.relations.insert(var.into(), relation);
        self
    }
}
