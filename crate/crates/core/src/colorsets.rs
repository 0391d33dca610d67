//! Weight vectors indexed by color sets and the three functionals of the
//! optimization problem.
//!
//! A [`WeightVector`] assigns a weight `α_A` to nonempty subsets `A ⊆ [q]`.
//! The objective is `Σ α_A ln|A|`, the mass is `Σ α_A` and the edge
//! functional sums `α_A α_B` over unordered pairs of disjoint sets.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Weights at or below this magnitude do not count as support.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Default tolerance for constraint verification.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A subset of the colors `1..=q`, stored as a sorted list.
///
/// Sets order like their bitmasks `Σ 2^(c-1)`: the set with the larger
/// maximum color is larger, ties broken by the next largest color.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColorSet {
    colors: Vec<u32>,
}

impl ColorSet {
    /// Builds a set from 1-based colors; duplicates are merged and color 0
    /// is rejected.
    pub fn new(colors: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut colors: Vec<u32> = colors.into_iter().collect();
        if colors.contains(&0) {
            return Err(Error::BadColorSet(colors, 0));
        }
        colors.sort_unstable();
        colors.dedup();
        Ok(ColorSet { colors })
    }

    /// Contiguous run `start..start+len` (1-based).
    pub fn range(start: u32, len: u32) -> Self {
        assert!(start >= 1, "colors are 1-based");
        ColorSet { colors: (start..start + len).collect() }
    }

    /// Decodes a bitmask where bit `i` stands for color `i + 1`.
    pub fn from_mask(mask: u64) -> Self {
        ColorSet { colors: (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect() }
    }

    /// Bitmask encoding, if every color is at most 64.
    pub fn mask(&self) -> Option<u64> {
        if self.max_color() > 64 {
            return None;
        }
        Some(self.colors.iter().fold(0u64, |m, &c| m | 1 << (c - 1)))
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn max_color(&self) -> u32 {
        self.colors.last().copied().unwrap_or(0)
    }

    pub fn min_color(&self) -> u32 {
        self.colors.first().copied().unwrap_or(0)
    }

    pub fn is_disjoint(&self, other: &ColorSet) -> bool {
        if self.is_empty() || other.is_empty() {
            return true;
        }
        if self.max_color() < other.min_color() || other.max_color() < self.min_color() {
            return true;
        }
        let (mut i, mut j) = (0, 0);
        while i < self.colors.len() && j < other.colors.len() {
            match self.colors[i].cmp(&other.colors[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &ColorSet) -> ColorSet {
        let mut colors = self.colors.clone();
        colors.extend_from_slice(&other.colors);
        colors.sort_unstable();
        colors.dedup();
        ColorSet { colors }
    }

    pub fn is_subset_of(&self, q: u32) -> bool {
        self.max_color() <= q
    }
}

impl Ord for ColorSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.colors.iter().rev().cmp(other.colors.iter().rev())
    }
}

impl PartialOrd for ColorSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.colors).finish()
    }
}

/// Weights `α_A` over color sets of `[q]`. Zero entries may be omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    q: u32,
    entries: BTreeMap<ColorSet, f64>,
}

impl WeightVector {
    pub fn new(q: u32) -> Self {
        assert!(q >= 1, "q must be positive");
        WeightVector { q, entries: BTreeMap::new() }
    }

    /// Builds a vector from `(set, weight)` pairs; repeated sets accumulate.
    pub fn from_entries(q: u32, entries: impl IntoIterator<Item = (ColorSet, f64)>) -> Result<Self> {
        if q == 0 {
            return Err(invalid("q must be positive"));
        }
        let mut v = WeightVector::new(q);
        for (set, w) in entries {
            v.add(set, w)?;
        }
        Ok(v)
    }

    /// Adds `weight` to the coordinate of `set`.
    pub fn add(&mut self, set: ColorSet, weight: f64) -> Result<()> {
        if !set.is_subset_of(self.q) {
            return Err(Error::BadColorSet(set.colors, self.q));
        }
        if !weight.is_finite() {
            return Err(invalid(format!("non-finite weight {weight}")));
        }
        *self.entries.entry(set).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn get(&self, set: &ColorSet) -> f64 {
        self.entries.get(set).copied().unwrap_or(0.0)
    }

    /// All stored entries in canonical (bitmask) order.
    pub fn iter(&self) -> impl Iterator<Item = (&ColorSet, f64)> {
        self.entries.iter().map(|(s, &w)| (s, w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets carrying weight above [`ZERO_WEIGHT`], in canonical order.
    pub fn support(&self) -> Vec<(ColorSet, f64)> {
        self.entries
            .iter()
            .filter(|(_, &w)| w > ZERO_WEIGHT)
            .map(|(s, &w)| (s.clone(), w))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector {
            q: self.q,
            entries: self.entries.iter().map(|(s, &w)| (s.clone(), w * factor)).collect(),
        }
    }

    /// Coordinate-wise sum; both vectors must share `q`.
    pub fn merged(&self, other: &WeightVector) -> Result<WeightVector> {
        if self.q != other.q {
            return Err(invalid(format!("q mismatch: {} vs {}", self.q, other.q)));
        }
        let mut out = self.clone();
        for (s, w) in other.iter() {
            out.add(s.clone(), w)?;
        }
        Ok(out)
    }

    /// Drops the coordinate of `set`, returning its weight.
    pub fn remove(&mut self, set: &ColorSet) -> f64 {
        self.entries.remove(set).unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight vectors always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    set: Vec<u32>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    q: u32,
    entries: Vec<EntryRepr>,
}

impl Serialize for WeightVector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        VectorRepr {
            q: self.q,
            entries: self
                .entries
                .iter()
                .map(|(s, &w)| EntryRepr { set: s.colors.clone(), weight: crate::fmt::round_sig(w) })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = VectorRepr::deserialize(de)?;
        let entries = repr
            .entries
            .into_iter()
            .map(|e| ColorSet::new(e.set).map(|s| (s, e.weight)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        WeightVector::from_entries(repr.q, entries).map_err(D::Error::custom)
    }
}

/// `Σ α_A ln|A|` (natural log).
///
/// Fails if the empty set carries positive weight.
pub fn obj(v: &WeightVector) -> Result<f64> {
    let mut total = 0.0;
    for (set, w) in v.iter() {
        if set.is_empty() {
            if w > 0.0 {
                return Err(Error::BadColorSet(vec![], v.q));
            }
            continue;
        }
        total += w * (set.len() as f64).ln();
    }
    Ok(total)
}

/// `Σ α_A`.
pub fn vsum(v: &WeightVector) -> f64 {
    v.iter().map(|(_, w)| w).sum()
}

/// `Σ α_A α_B` over unordered pairs of disjoint sets.
pub fn esum(v: &WeightVector) -> f64 {
    let items: Vec<(&ColorSet, f64)> = v.iter().filter(|(s, w)| *w != 0.0 && !s.is_empty()).collect();
    let mut total = 0.0;
    for (i, (a, wa)) in items.iter().enumerate() {
        let mut row = 0.0;
        for (b, wb) in &items[i + 1..] {
            if a.is_disjoint(b) {
                row += wb;
            }
        }
        total += wa * row;
    }
    total
}

/// Outcome of a feasibility check, with the residuals that decided it.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub feasible: bool,
    pub min_weight: f64,
    /// `|Σα - 1|`.
    pub vsum_residual: f64,
    /// `esum - (s-1)/(2s)`; negative means the edge constraint is violated.
    pub esum_slack: f64,
}

/// Membership in the feasible set for parameter `s`, up to `tol`.
pub fn feasible(v: &WeightVector, s: f64, tol: f64) -> Result<Verdict> {
    if !(s > 1.0) {
        return Err(invalid(format!("s must exceed 1, got {s}")));
    }
    if !(tol >= 0.0) {
        return Err(invalid(format!("tolerance must be nonnegative, got {tol}")));
    }
    let min_weight = v.iter().map(|(_, w)| w).fold(f64::INFINITY, f64::min);
    let min_weight = if min_weight.is_finite() { min_weight } else { 0.0 };
    let vsum_residual = (vsum(v) - 1.0).abs();
    let esum_slack = esum(v) - (s - 1.0) / (2.0 * s);
    let empty_ok = v.iter().all(|(set, w)| !set.is_empty() || w <= tol);
    Ok(Verdict {
        feasible: empty_ok && min_weight >= -tol && vsum_residual <= tol && esum_slack >= -tol,
        min_weight,
        vsum_residual,
        esum_slack,
    })
}

/// Graph on the positively weighted sets, adjacent iff disjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportGraph {
    pub q: u32,
    pub vertices: Vec<ColorSet>,
    pub adjacency: Vec<Vec<bool>>,
}

impl SupportGraph {
    pub fn from_sets(q: u32, mut vertices: Vec<ColorSet>) -> Self {
        vertices.sort();
        vertices.dedup();
        let n = vertices.len();
        let mut adjacency = vec![vec![false; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = vertices[i].is_disjoint(&vertices[j]);
                adjacency[i][j] = d;
                adjacency[j][i] = d;
            }
        }
        SupportGraph { q, vertices, adjacency }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.iter().filter(|&&b| b).count()).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() * 2 == self.len() * self.len().saturating_sub(1)
    }
}

pub fn support_graph(v: &WeightVector) -> SupportGraph {
    SupportGraph::from_sets(v.q(), v.support().into_iter().map(|(s, _)| s).collect())
}

/// Shape of a support family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupportClass {
    /// A `k`-partition of `[q]`.
    Partition(usize),
    /// A `k`-partition plus the union of two of its parts.
    NearPartition(usize),
    Other,
}

fn tiles(q: u32, sets: &[&ColorSet]) -> bool {
    if sets.iter().any(|s| s.is_empty()) {
        return false;
    }
    let total: usize = sets.iter().map(|s| s.len()).sum();
    if total != q as usize {
        return false;
    }
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !sets[i].is_disjoint(sets[j]) {
                return false;
            }
        }
    }
    sets.iter().all(|s| s.is_subset_of(q))
}

/// Classifies the support by the actual sets, not just the adjacency.
pub fn classify_support(g: &SupportGraph) -> SupportClass {
    let all: Vec<&ColorSet> = g.vertices.iter().collect();
    if !all.is_empty() && tiles(g.q, &all) {
        return SupportClass::Partition(all.len());
    }
    if all.len() < 3 {
        return SupportClass::Other;
    }
    for (u, extra) in all.iter().enumerate() {
        let rest: Vec<&ColorSet> =
            all.iter().enumerate().filter(|&(i, _)| i != u).map(|(_, s)| *s).collect();
        if !tiles(g.q, &rest) {
            continue;
        }
        // the extra set must be the union of exactly two parts
        let inside: Vec<&&ColorSet> = rest.iter().filter(|p| !p.is_disjoint(extra)).collect();
        if inside.len() == 2 && inside[0].union(inside[1]) == **extra {
            return SupportClass::NearPartition(rest.len());
        }
    }
    SupportClass::Other
}
