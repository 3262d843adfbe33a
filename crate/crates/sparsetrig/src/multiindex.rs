//! Multi-dimensional frequency indices and finite index sets.
//!
//! A [`MultiIndex`] is a frequency k in Z^d; an [`IndexSet`] is a finite,
//! duplicate-free, lexicographically sorted set of them. Full cubes
//! [-m, m]^d are stored lazily as (d, m), so membership, enumeration rank and
//! cardinality are O(d) arithmetic and plans over astronomically large cubes
//! never materialize anything. Every materialization path (enumeration,
//! serialization) is guarded by a cardinality cap.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on index-set cardinality for materializing constructors.
pub const DEFAULT_INDEX_CAP: u128 = 10_000_000;

/// A frequency k in Z^d. Ordered lexicographically, so enumeration of index
/// sets is deterministic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    /// Builds an index from its entries. The ambient dimension d = entries.len()
    /// must be at least 1.
    pub fn new(entries: Vec<i64>) -> Self {
        assert!(!entries.is_empty(), "MultiIndex requires dimension >= 1");
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// max_i |k_i| (the radius of the smallest centered cube containing k).
    pub fn linf_norm(&self) -> u64 {
        self.0.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    /// Euclidean norm of the integer vector.
    pub fn l2_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{:?}", self.0)
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(entries: &[i64]) -> Self {
        MultiIndex::new(entries.to_vec())
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// [-radius, radius]^d, enumerated lexicographically.
    Cube { radius: u64 },
    /// Sorted, duplicate-free.
    Explicit { indices: Vec<MultiIndex> },
}

/// A finite set of frequencies in Z^d with deterministic (lexicographic)
/// enumeration. Immutable after construction.
#[derive(Clone, Debug)]
pub struct IndexSet {
    d: usize,
    repr: Repr,
}

impl IndexSet {
    /// The cube [-m, m]^d with (2m+1)^d elements, under the default
    /// cardinality cap.
    pub fn cube(d: usize, m: u64) -> Result<Self> {
        Self::cube_with_cap(d, m, DEFAULT_INDEX_CAP)
    }

    /// The cube [-m, m]^d under an explicit cardinality cap. The set itself is
    /// stored lazily; the cap bounds what any consumer may later materialize.
    pub fn cube_with_cap(d: usize, m: u64, cap: u128) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let needed = cube_cardinality(d, m)
            .ok_or(Error::CapExceeded {
                what: "index set",
                needed: u128::MAX,
                cap,
            })?;
        if needed > cap {
            return Err(Error::CapExceeded {
                what: "index set",
                needed,
                cap,
            });
        }
        Ok(IndexSet {
            d,
            repr: Repr::Cube { radius: m },
        })
    }

    /// Builds an explicit set: sorts, removes duplicates, validates dimensions.
    pub fn from_indices(d: usize, mut indices: Vec<MultiIndex>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        for k in &indices {
            if k.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.dim(),
                });
            }
        }
        indices.sort();
        indices.dedup();
        Ok(IndexSet {
            d,
            repr: Repr::Explicit { indices },
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Exact cardinality, which may exceed usize for lazily stored cubes.
    pub fn cardinality(&self) -> u128 {
        match &self.repr {
            Repr::Cube { radius } => cube_cardinality(self.d, *radius).expect("checked at build"),
            Repr::Explicit { indices } => indices.len() as u128,
        }
    }

    /// Cardinality as usize; panics if it does not fit (materialized use
    /// sites are always behind a cap that keeps this in range).
    pub fn len(&self) -> usize {
        usize::try_from(self.cardinality()).expect("index set too large to materialize")
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// ln(#Λ), computed without overflow for lazy cubes.
    pub fn log_cardinality(&self) -> f64 {
        match &self.repr {
            Repr::Cube { radius } => (self.d as f64) * ((2.0 * *radius as f64) + 1.0).ln(),
            Repr::Explicit { indices } => (indices.len() as f64).ln(),
        }
    }

    /// The cube radius if this set is a lazily stored cube.
    pub fn cube_radius(&self) -> Option<u64> {
        match &self.repr {
            Repr::Cube { radius } => Some(*radius),
            Repr::Explicit { .. } => None,
        }
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        if k.dim() != self.d {
            return false;
        }
        match &self.repr {
            Repr::Cube { radius } => k.linf_norm() <= *radius,
            Repr::Explicit { indices } => indices.binary_search(k).is_ok(),
        }
    }

    /// 0-based position of k in the sorted enumeration, or None if absent.
    /// Errors on dimension mismatch.
    pub fn position_of(&self, k: &MultiIndex) -> Result<Option<usize>> {
        if k.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: k.dim(),
            });
        }
        match &self.repr {
            Repr::Cube { radius } => {
                let m = *radius;
                if k.linf_norm() > m {
                    return Ok(None);
                }
                // Lexicographic rank = mixed-radix value of (k_i + m) in base 2m+1.
                let base = 2u128 * m as u128 + 1;
                let mut pos: u128 = 0;
                for &v in k.entries() {
                    pos = pos * base + (v + m as i64) as u128;
                }
                Ok(Some(
                    usize::try_from(pos).expect("position exceeds usize; set too large"),
                ))
            }
            Repr::Explicit { indices } => Ok(indices.binary_search(k).ok()),
        }
    }

    /// The index at enumeration position `pos`, or None when out of range.
    pub fn get(&self, pos: usize) -> Option<MultiIndex> {
        match &self.repr {
            Repr::Cube { radius } => {
                let m = *radius;
                let base = 2u128 * m as u128 + 1;
                if pos as u128 >= self.cardinality() {
                    return None;
                }
                let mut rem = pos as u128;
                let mut entries = vec![0i64; self.d];
                for slot in entries.iter_mut().rev() {
                    *slot = (rem % base) as i64 - m as i64;
                    rem /= base;
                }
                Some(MultiIndex::new(entries))
            }
            Repr::Explicit { indices } => indices.get(pos).cloned(),
        }
    }

    /// Iterates the set in sorted order.
    pub fn iter(&self) -> IndexIter<'_> {
        IndexIter {
            set: self,
            next: 0,
            len: self.len(),
        }
    }
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        if self.d != other.d || self.cardinality() != other.cardinality() {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Cube { radius: a }, Repr::Cube { radius: b }) => a == b,
            _ => self.iter().zip(other.iter()).all(|(a, b)| a == b),
        }
    }
}

impl Eq for IndexSet {}

pub struct IndexIter<'a> {
    set: &'a IndexSet,
    next: usize,
    len: usize,
}

impl Iterator for IndexIter<'_> {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        if self.next >= self.len {
            return None;
        }
        let item = self.set.get(self.next);
        self.next += 1;
        item
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = self.len - self.next;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for IndexIter<'_> {}

fn cube_cardinality(d: usize, m: u64) -> Option<u128> {
    let side = 2u128.checked_mul(m as u128)?.checked_add(1)?;
    let mut card: u128 = 1;
    for _ in 0..d {
        card = card.checked_mul(side)?;
    }
    Some(card)
}

// JSON form: {"kind":"cube","d":..,"radius":..} for lazy cubes (no
// materialization at any size), {"kind":"explicit","d":..,"indices":[[..]]}
// otherwise.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum IndexSetJson {
    Cube { d: usize, radius: u64 },
    Explicit { d: usize, indices: Vec<Vec<i64>> },
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match &self.repr {
            Repr::Cube { radius } => IndexSetJson::Cube {
                d: self.d,
                radius: *radius,
            },
            Repr::Explicit { indices } => IndexSetJson::Explicit {
                d: self.d,
                indices: indices.iter().map(|k| k.entries().to_vec()).collect(),
            },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match IndexSetJson::deserialize(deserializer)? {
            IndexSetJson::Cube { d, radius } => {
                IndexSet::cube_with_cap(d, radius, u128::MAX).map_err(D::Error::custom)
            }
            IndexSetJson::Explicit { d, indices } => {
                if indices.iter().any(|e| e.len() != d) {
                    return Err(D::Error::custom("inconsistent index dimensions"));
                }
                if d == 0 {
                    return Err(D::Error::custom("index entries must have dimension >= 1"));
                }
                IndexSet::from_indices(d, indices.into_iter().map(MultiIndex::new).collect())
                    .map_err(D::Error::custom)
            }
        }
    }
}
