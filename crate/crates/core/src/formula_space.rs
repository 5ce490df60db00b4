//! Finite fragments, theory vectors and the ultrametric between them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formulas::{parse, validate_sentence, Formula};
use crate::structures::{Assignment, EvalOptions, FiniteStructure, Prepared, Signature};
use crate::ultra::{henkin_eval, DecomposableHenkinModel};

/// Default cap on the size of a Boolean closure.
pub const DEFAULT_CLOSURE_LIMIT: usize = 1 << 12;

/// An ordered list of distinct sentences over one signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    signature: Signature,
    formulas: Vec<Formula>,
}

impl Fragment {
    pub fn new(signature: Signature, formulas: Vec<Formula>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &formulas {
            validate_sentence(f, &signature)?;
            if !seen.insert(f) {
                return Err(Error::InvalidFragment(format!("`{f}` occurs twice")));
            }
        }
        Ok(Fragment { signature, formulas })
    }

    pub fn parse_all<S: AsRef<str>>(signature: Signature, texts: &[S]) -> Result<Self> {
        let formulas = texts.iter().map(|t| parse(t.as_ref())).collect::<Result<Vec<_>>>()?;
        Fragment::new(signature, formulas)
    }

    /// Reads a JSON array of formula strings.
    pub fn from_json(signature: Signature, text: &str) -> Result<Self> {
        let texts: Vec<String> = serde_json::from_str(text)?;
        Fragment::parse_all(signature, &texts)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

/// A point of the Cantor space over a fragment: bit `i` is the truth of `gamma_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TheoryVector(pub Vec<bool>);

impl TheoryVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }
}

impl fmt::Display for TheoryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

impl FromStr for TheoryVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameter(format!("`{s}` is not a bitstring"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(TheoryVector)
    }
}

impl Serialize for TheoryVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn theory_vector(a: &FiniteStructure, fragment: &Fragment, opts: EvalOptions) -> Result<TheoryVector> {
    fragment
        .formulas
        .iter()
        .map(|f| Prepared::new(f, a.signature())?.eval_full(a, &Assignment::new(), opts))
        .collect::<Result<Vec<_>>>()
        .map(TheoryVector)
}

/// The vector of a Henkin model, with relation quantifiers read over its universe.
pub fn henkin_theory_vector(m: &DecomposableHenkinModel, fragment: &Fragment) -> Result<TheoryVector> {
    fragment
        .formulas
        .iter()
        .map(|f| henkin_eval(m, f))
        .collect::<Result<Vec<_>>>()
        .map(TheoryVector)
}

/// A value `2^-i`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    Zero,
    /// `2^-i`.
    PowerOfHalf(u32),
}

impl Distance {
    pub fn is_zero(self) -> bool {
        self == Distance::Zero
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Distance::Zero => 0.0,
            Distance::PowerOfHalf(i) => 0.5f64.powi(i as i32),
        }
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Zero, Distance::Zero) => Ordering::Equal,
            (Distance::Zero, _) => Ordering::Less,
            (_, Distance::Zero) => Ordering::Greater,
            (Distance::PowerOfHalf(a), Distance::PowerOfHalf(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Zero => f.write_str("0"),
            Distance::PowerOfHalf(0) => f.write_str("1"),
            Distance::PowerOfHalf(i) if *i < 128 => write!(f, "1/{}", 1u128 << i),
            Distance::PowerOfHalf(i) => write!(f, "2^-{i}"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `2^-i` for the least index `i` where the vectors differ.
pub fn ultrametric(x: &TheoryVector, y: &TheoryVector) -> Result<Distance> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.0
        .iter()
        .zip(&y.0)
        .position(|(a, b)| a != b)
        .map_or(Distance::Zero, |i| Distance::PowerOfHalf(i as u32)))
}

/// Distinct theory vectors of a list of structures, each with the positions
/// of the structures that produce it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VectorSet {
    pub vectors: BTreeMap<TheoryVector, Vec<usize>>,
}

impl VectorSet {
    pub fn contains(&self, v: &TheoryVector) -> bool {
        self.vectors.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TheoryVector> {
        self.vectors.keys()
    }

    pub fn intersects(&self, other: &VectorSet) -> bool {
        self.iter().any(|v| other.contains(v))
    }
}

impl FromIterator<TheoryVector> for VectorSet {
    fn from_iter<I: IntoIterator<Item = TheoryVector>>(iter: I) -> Self {
        let mut s = VectorSet::default();
        for (i, v) in iter.into_iter().enumerate() {
            s.vectors.entry(v).or_default().push(i);
        }
        s
    }
}

pub fn vector_set(structures: &[FiniteStructure], fragment: &Fragment, opts: EvalOptions) -> Result<VectorSet> {
    structures
        .iter()
        .map(|a| theory_vector(a, fragment, opts))
        .collect::<Result<VectorSet>>()
}

/// The least pairwise distance; undefined (an error) when either set is empty.
pub fn set_distance(s: &VectorSet, t: &VectorSet) -> Result<Distance> {
    let mut best: Option<Distance> = None;
    for x in s.iter() {
        for y in t.iter() {
            let d = ultrametric(x, y)?;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best.ok_or(Error::EmptySet)
}

/// A Boolean combination of fragment members true on all of `k` and false on
/// all of `l`, in disjunctive normal form over the vectors of `k`; `None` when
/// some vector is shared, since then no such combination exists.
pub fn find_separating_formula(
    k: &[FiniteStructure],
    l: &[FiniteStructure],
    fragment: &Fragment,
    opts: EvalOptions,
) -> Result<Option<Formula>> {
    let ks = vector_set(k, fragment, opts)?;
    let ls = vector_set(l, fragment, opts)?;
    Ok((!ks.intersects(&ls)).then(|| separator(&ks, fragment)))
}

pub(crate) fn separator(ks: &VectorSet, fragment: &Fragment) -> Formula {
    let disjuncts = ks.iter().map(|v| {
        let literals = fragment.formulas.iter().zip(&v.0).map(|(g, &bit)| {
            if bit {
                g.clone()
            } else {
                Formula::not(g.clone())
            }
        });
        Formula::conj(literals).unwrap_or_else(Formula::verum)
    });
    Formula::disj(disjuncts).unwrap_or_else(Formula::falsum)
}

/// Adds negations and pairwise conjunctions and disjunctions `depth` times,
/// keeping the original fragment as a prefix and dropping repeats.
pub fn boolean_closure(fragment: &Fragment, depth: usize, limit: usize) -> Result<Fragment> {
    let mut out = fragment.formulas.clone();
    let mut seen: HashSet<Formula> = out.iter().cloned().collect();
    for _ in 0..depth {
        let level = out.clone();
        let mut push = |f: Formula, out: &mut Vec<Formula>| -> Result<()> {
            if seen.insert(f.clone()) {
                out.push(f);
                if out.len() > limit {
                    return Err(Error::budget("boolean closure", format!("more than {limit} formulas"), limit as u128));
                }
            }
            Ok(())
        };
        for a in &level {
            push(Formula::not(a.clone()), &mut out)?;
        }
        for a in &level {
            for b in &level {
                push(Formula::and(a.clone(), b.clone()), &mut out)?;
                push(Formula::or(a.clone(), b.clone()), &mut out)?;
            }
        }
    }
    Ok(Fragment {
        signature: fragment.signature.clone(),
        formulas: out,
    })
}
