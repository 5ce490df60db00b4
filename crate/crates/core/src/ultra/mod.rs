//! Ultrafilters on finite index sets, ultraproducts, decomposable relations
//! and Henkin semantics over the resulting relation universes.

mod checks;
mod henkin;
mod product;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub(crate) use checks::max_so_arity;
pub use checks::{build_ultrachain, check_fubini, check_los, limit_henkin_model, FubiniReport, LosReport, Ultrachain};
pub use henkin::{henkin_eval, henkin_eval_with, henkin_model, DecomposableHenkinModel, DEFAULT_ARITY_BOUND};
pub use product::{
    is_decomposable, recompose, ultrapower, ultraproduct, ultraproduct_explicit, ultraproduct_fast, UltraproductResult,
};

/// Largest index set an ultrafilter may live on; subsets are `u64` masks.
pub const MAX_INDEX: usize = 64;

/// An ultrafilter on `{0..m-1}`.
///
/// Every ultrafilter on a finite set is principal, but products keep their
/// factors so that membership is decided by the iterated-largeness formula
/// rather than by looking up the generating index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ultrafilter {
    Principal { size: usize, index: usize },
    /// `F x G` on `I x J`; the pair `(i, j)` is index `i * |J| + j`.
    Product(Box<Ultrafilter>, Box<Ultrafilter>),
}

impl Ultrafilter {
    pub fn principal(size: usize, index: usize) -> Result<Self> {
        if size == 0 || size > MAX_INDEX {
            return Err(Error::InvalidUltrafilter(format!("index set size {size} outside 1..={MAX_INDEX}")));
        }
        if index >= size {
            return Err(Error::InvalidUltrafilter(format!("principal index {index} outside 0..{size}")));
        }
        Ok(Ultrafilter::Principal { size, index })
    }

    pub fn product(f: &Ultrafilter, g: &Ultrafilter) -> Result<Self> {
        let size = f.size() * g.size();
        if size > MAX_INDEX {
            return Err(Error::InvalidUltrafilter(format!(
                "product index set of size {size} exceeds {MAX_INDEX}"
            )));
        }
        Ok(Ultrafilter::Product(Box::new(f.clone()), Box::new(g.clone())))
    }

    pub fn size(&self) -> usize {
        match self {
            Ultrafilter::Principal { size, .. } => *size,
            Ultrafilter::Product(f, g) => f.size() * g.size(),
        }
    }

    /// Membership of the index set encoded by `mask` (bit `i` for index `i`).
    pub fn contains(&self, mask: u64) -> bool {
        match self {
            Ultrafilter::Principal { index, .. } => mask >> index & 1 == 1,
            Ultrafilter::Product(f, g) => {
                let (ni, nj) = (f.size(), g.size());
                let mut cols = 0u64;
                for j in 0..nj {
                    let row: u64 = (0..ni).filter(|i| mask >> (i * nj + j) & 1 == 1).map(|i| 1 << i).sum();
                    if f.contains(row) {
                        cols |= 1 << j;
                    }
                }
                g.contains(cols)
            }
        }
    }

    pub fn contains_set(&self, indices: impl IntoIterator<Item = usize>) -> bool {
        self.contains(indices.into_iter().filter(|&i| i < self.size()).fold(0, |m, i| m | 1 << i))
    }

    /// The index `i` with `{i}` in the filter.
    pub fn principal_index(&self) -> usize {
        match self {
            Ultrafilter::Principal { index, .. } => *index,
            Ultrafilter::Product(f, g) => f.principal_index() * g.size() + g.principal_index(),
        }
    }

    /// The mask of the whole index set.
    pub fn full_mask(&self) -> u64 {
        if self.size() == 64 {
            u64::MAX
        } else {
            (1u64 << self.size()) - 1
        }
    }

    /// Parses `principal:i`, `principal:i/m` or `F x G`. A factor without an
    /// explicit size takes `size` (single filter) or the remaining factor of
    /// `size` (the right side of a product).
    pub fn parse(spec: &str, size: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.split(" x ").map(str::trim).collect();
        let mut parsed = parts.iter().map(|p| parse_principal(p)).collect::<Result<Vec<_>>>()?;
        let known: usize = parsed.iter().filter_map(|(_, m)| *m).product();
        let missing = parsed.iter().filter(|(_, m)| m.is_none()).count();
        if missing > 1 {
            return Err(Error::InvalidUltrafilter(format!(
                "`{spec}`: at most one factor may omit its size (write principal:i/m)"
            )));
        }
        if missing == 1 {
            if known == 0 || size % known != 0 {
                return Err(Error::InvalidUltrafilter(format!("`{spec}` does not fit an index set of size {size}")));
            }
            for p in parsed.iter_mut().filter(|(_, m)| m.is_none()) {
                p.1 = Some(size / known);
            }
        }
        let mut filters = parsed
            .into_iter()
            .map(|(i, m)| Ultrafilter::principal(m.expect("filled"), i))
            .collect::<Result<Vec<_>>>()?
            .into_iter();
        let first = filters.next().expect("split yields one part");
        let u = filters.try_fold(first, |acc, g| Ultrafilter::product(&acc, &g))?;
        if u.size() != size {
            return Err(Error::SizeMismatch(format!(
                "ultrafilter `{spec}` lives on {} indices, family has {size}",
                u.size()
            )));
        }
        Ok(u)
    }
}

fn parse_principal(text: &str) -> Result<(usize, Option<usize>)> {
    let bad = || Error::InvalidUltrafilter(format!("expected principal:i or principal:i/m, found `{text}`"));
    let rest = text.strip_prefix("principal:").ok_or_else(bad)?;
    let (i, m) = match rest.split_once('/') {
        Some((i, m)) => (i, Some(m.parse().map_err(|_| bad())?)),
        None => (rest, None),
    };
    Ok((i.parse().map_err(|_| bad())?, m))
}

impl fmt::Display for Ultrafilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ultrafilter::Principal { size, index } => write!(f, "principal:{index}/{size}"),
            Ultrafilter::Product(a, b) => write!(f, "{a} x {b}"),
        }
    }
}

impl FromStr for Ultrafilter {
    type Err = Error;

    /// Every factor must carry its size.
    fn from_str(s: &str) -> Result<Self> {
        let size = s
            .split(" x ")
            .map(|p| parse_principal(p.trim()).map(|(_, m)| m))
            .collect::<Result<Option<Vec<usize>>>>()?
            .ok_or_else(|| Error::InvalidUltrafilter(format!("`{s}` needs explicit sizes")))?
            .iter()
            .product();
        Ultrafilter::parse(s, size)
    }
}

impl Serialize for Ultrafilter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
