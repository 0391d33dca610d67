//! Candidate support shapes and the small-graph machinery used to check
//! the structure of optimal supports.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::colorsets::{ColorSet, SupportGraph, WeightVector};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Support is a partition of `[q]`.
    P,
    /// Partition plus the union of two of its parts.
    Q,
}

/// A support shape described only by its class sizes.
///
/// For kind `P` the sizes are nonincreasing. For kind `Q` the two merged
/// parts come first (larger of the two first), followed by the rest in
/// nonincreasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SizedCandidate {
    pub kind: CandidateKind,
    pub sizes: Vec<u32>,
}

impl SizedCandidate {
    pub fn partition(mut sizes: Vec<u32>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(invalid("partition sizes must be positive"));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(SizedCandidate { kind: CandidateKind::P, sizes })
    }

    /// `merged` are the sizes of the two parts whose union is the extra set.
    pub fn near_partition(merged: (u32, u32), mut rest: Vec<u32>) -> Result<Self> {
        if merged.0 == 0 || merged.1 == 0 || rest.contains(&0) {
            return Err(invalid("near-partition sizes must be positive"));
        }
        rest.sort_unstable_by(|a, b| b.cmp(a));
        let mut sizes = vec![merged.0.max(merged.1), merged.0.min(merged.1)];
        sizes.extend(rest);
        Ok(SizedCandidate { kind: CandidateKind::Q, sizes })
    }

    /// Number of parts `k` of the underlying partition.
    pub fn parts(&self) -> usize {
        self.sizes.len()
    }

    pub fn q(&self) -> u32 {
        self.sizes.iter().sum()
    }

    /// 1-based positions of the merged parts, for kind `Q`.
    pub fn merged(&self) -> Option<[usize; 2]> {
        match self.kind {
            CandidateKind::P => None,
            CandidateKind::Q => Some([1, 2]),
        }
    }

    /// Color sets realizing the shape: part `i` is a contiguous run of
    /// colors, and for kind `Q` the union of parts 1 and 2 comes last.
    pub fn color_sets(&self) -> Vec<ColorSet> {
        let mut start = 1;
        let mut sets = Vec::with_capacity(self.sizes.len() + 1);
        for &size in &self.sizes {
            sets.push(ColorSet::range(start, size));
            start += size;
        }
        if self.kind == CandidateKind::Q {
            sets.push(sets[0].union(&sets[1]));
        }
        sets
    }

    /// Expands per-set weights (ordered like [`color_sets`](Self::color_sets))
    /// into a full weight vector.
    pub fn to_weight_vector(&self, weights: &[f64]) -> Result<WeightVector> {
        let sets = self.color_sets();
        if sets.len() != weights.len() {
            return Err(invalid(format!("expected {} weights, got {}", sets.len(), weights.len())));
        }
        WeightVector::from_entries(self.q(), sets.into_iter().zip(weights.iter().copied()))
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.kind {
            CandidateKind::P => "P",
            CandidateKind::Q => "Q",
        };
        match self.merged() {
            Some(m) => json!({"kind": kind, "sizes": self.sizes, "merged": m}),
            None => json!({"kind": kind, "sizes": self.sizes}),
        }
    }
}

fn partitions_into(q: u32, k: u32) -> Vec<Vec<u32>> {
    fn rec(rem: u32, parts: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if rem < parts {
            return;
        }
        let hi = max.min(rem - (parts - 1));
        // the remaining parts - 1 entries can hold at most hi each
        for v in (1..=hi).rev() {
            if v * parts < rem {
                break;
            }
            cur.push(v);
            rec(rem - v, parts - 1, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, k, q, &mut Vec::new(), &mut out);
    out
}

/// Every multiset of `k` positive sizes summing to `q`, once each, in
/// reverse lexicographic order.
pub fn enum_p_candidates(q: u32, k: u32) -> Result<Vec<SizedCandidate>> {
    if k < 1 || k > q {
        return Err(invalid(format!("need 1 <= k <= q, got k={k}, q={q}")));
    }
    Ok(partitions_into(q, k)
        .into_iter()
        .map(|sizes| SizedCandidate { kind: CandidateKind::P, sizes })
        .collect())
}

/// Every `(k-partition sizes, merged pair)` shape up to relabeling.
pub fn enum_q_candidates(q: u32, k: u32) -> Result<Vec<SizedCandidate>> {
    if k < 2 || k > q {
        return Err(invalid(format!("need 2 <= k <= q, got k={k}, q={q}")));
    }
    let mut out = Vec::new();
    for sizes in partitions_into(q, k) {
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..sizes.len() {
            for j in i + 1..sizes.len() {
                if !seen.insert((sizes[i], sizes[j])) {
                    continue;
                }
                let rest: Vec<u32> =
                    sizes.iter().enumerate().filter(|&(x, _)| x != i && x != j).map(|(_, &v)| v).collect();
                out.push(SizedCandidate::near_partition((sizes[i], sizes[j]), rest)?);
            }
        }
    }
    Ok(out)
}

/// Symmetric 0/1 adjacency matrix on at most 12 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl SmallGraph {
    pub const MAX_N: usize = 12;

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || n > Self::MAX_N {
            return Err(invalid(format!("small graphs have 1..={} vertices, got {n}", Self::MAX_N)));
        }
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(invalid(format!("bad edge ({u}, {v})")));
            }
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Ok(SmallGraph { n, adj })
    }

    pub fn from_adjacency(adj: Vec<Vec<bool>>) -> Result<Self> {
        let n = adj.len();
        if n == 0 || n > Self::MAX_N {
            return Err(invalid(format!("small graphs have 1..={} vertices, got {n}", Self::MAX_N)));
        }
        for i in 0..n {
            if adj[i].len() != n || adj[i][i] {
                return Err(invalid("adjacency must be square with zero diagonal"));
            }
            for j in 0..n {
                if adj[i][j] != adj[j][i] {
                    return Err(invalid("adjacency must be symmetric"));
                }
            }
        }
        Ok(SmallGraph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.iter().filter(|&&b| b).count()).sum::<usize>() / 2
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[]).expect("valid size")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::from_edges(n, &edges).expect("valid size")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("valid size")
    }

    pub fn three_k1() -> Self {
        Self::empty(3)
    }

    pub fn c4() -> Self {
        Self::cycle(4)
    }

    pub fn c5() -> Self {
        Self::cycle(5)
    }

    /// `C5` plus one chord. Vertex order `A, B, C, D, E` with edges
    /// `AB, AD, AE, BC, BE, CD`.
    pub fn c5_plus() -> Self {
        Self::from_edges(5, &[(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)]).expect("valid size")
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.adj.iter().map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).collect()
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// sorted descending.
pub(crate) fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Adjacency spectrum, descending.
pub fn eigenvalues(g: &SmallGraph) -> Vec<f64> {
    symmetric_eigenvalues(g.matrix())
}

/// Number of eigenvalues `>= -eps`.
pub fn count_nonneg_eigenvalues(g: &SmallGraph, eps: f64) -> usize {
    eigenvalues(g).into_iter().filter(|&l| l >= -eps).count()
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Whether some vertex subset of the adjacency matrix induces `pattern`.
pub fn has_induced_in(pattern: &SmallGraph, adjacency: &[Vec<bool>]) -> Result<bool> {
    let k = pattern.n();
    if k > 6 {
        return Err(invalid(format!("patterns have at most 6 vertices, got {k}")));
    }
    let n = adjacency.len();
    if k > n {
        return Ok(false);
    }
    let pattern_edges = pattern.edge_count();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let edges = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .filter(|&(i, j)| adjacency[subset[i]][subset[j]])
            .count();
        if edges == pattern_edges {
            let mut perm: Vec<usize> = (0..k).collect();
            loop {
                let matches = (0..k).all(|i| {
                    (i + 1..k).all(|j| pattern.adjacent(i, j) == adjacency[subset[perm[i]]][subset[perm[j]]])
                });
                if matches {
                    return Ok(true);
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        if !next_combination(&mut subset, n) {
            return Ok(false);
        }
    }
}

/// Induced-subgraph search in a support graph. A pattern with more
/// vertices than the graph is never induced.
pub fn has_induced(pattern: &SmallGraph, g: &SupportGraph) -> Result<bool> {
    has_induced_in(pattern, &g.adjacency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorsets::{classify_support, support_graph, SupportClass};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn brute_partition_count(q: u32, k: u32) -> usize {
        // count nonincreasing sequences by enumerating all compositions
        fn rec(rem: u32, k: u32, acc: &mut Vec<u32>, out: &mut std::collections::BTreeSet<Vec<u32>>) {
            if k == 0 {
                if rem == 0 {
                    let mut s = acc.clone();
                    s.sort_unstable();
                    out.insert(s);
                }
                return;
            }
            for v in 1..=rem {
                acc.push(v);
                rec(rem - v, k - 1, acc, out);
                acc.pop();
            }
        }
        let mut out = std::collections::BTreeSet::new();
        rec(q, k, &mut Vec::new(), &mut out);
        out.len()
    }

    fn partition_count(q: u32, k: u32) -> usize {
        // p(q, k) = p(q - 1, k - 1) + p(q - k, k)
        if k == 0 {
            return usize::from(q == 0);
        }
        if q < k {
            return 0;
        }
        partition_count(q - 1, k - 1) + partition_count(q - k, k)
    }

    #[test]
    fn p_candidates_examples() {
        let c: Vec<Vec<u32>> = enum_p_candidates(4, 2).unwrap().into_iter().map(|c| c.sizes).collect();
        assert_eq!(c, vec![vec![3, 1], vec![2, 2]]);
        assert_eq!(enum_p_candidates(5, 5).unwrap()[0].sizes, vec![1; 5]);
        // brute force: 13 into 11 parts leaves 2 to distribute, so (3,1,..) and (2,2,1,..)
        assert_eq!(brute_partition_count(13, 11), 2);
        assert_eq!(enum_p_candidates(13, 11).unwrap().len(), 2);
        assert!(enum_p_candidates(3, 4).is_err());
        assert!(enum_p_candidates(3, 0).is_err());
    }

    #[test]
    fn p_candidates_match_partition_counts() {
        for q in 1..=12 {
            for k in 1..=q {
                assert_eq!(brute_partition_count(q, k), partition_count(q, k));
            }
        }
        for q in 1..=20 {
            for k in 1..=q {
                let c = enum_p_candidates(q, k).unwrap();
                assert_eq!(c.len(), partition_count(q, k), "q={q} k={k}");
                let uniq: std::collections::BTreeSet<_> = c.iter().collect();
                assert_eq!(uniq.len(), c.len());
                assert!(c.iter().all(|c| c.q() == q && c.sizes.windows(2).all(|w| w[0] >= w[1])));
            }
        }
    }

    fn brute_q_shapes(q: u32, k: u32) -> std::collections::BTreeSet<(Vec<u32>, Vec<u32>)> {
        // every composition with every ordered pair, reduced to its key
        let mut out = std::collections::BTreeSet::new();
        fn rec(rem: u32, k: u32, acc: &mut Vec<u32>, all: &mut Vec<Vec<u32>>) {
            if k == 0 {
                if rem == 0 {
                    all.push(acc.clone());
                }
                return;
            }
            for v in 1..=rem {
                acc.push(v);
                rec(rem - v, k - 1, acc, all);
                acc.pop();
            }
        }
        let mut all = Vec::new();
        rec(q, k, &mut Vec::new(), &mut all);
        for comp in all {
            for i in 0..comp.len() {
                for j in 0..comp.len() {
                    if i == j {
                        continue;
                    }
                    let mut pair = vec![comp[i], comp[j]];
                    pair.sort_unstable();
                    let mut rest: Vec<u32> =
                        comp.iter().enumerate().filter(|&(x, _)| x != i && x != j).map(|(_, &v)| v).collect();
                    rest.sort_unstable();
                    out.insert((pair, rest));
                }
            }
        }
        out
    }

    #[test]
    fn q_candidates_examples() {
        let c = enum_q_candidates(3, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].sizes, vec![2, 1]);
        assert_eq!(c[0].merged(), Some([1, 2]));
        assert_eq!(brute_q_shapes(3, 2).len(), 1);

        let c = enum_q_candidates(4, 2).unwrap();
        assert_eq!(c.len(), 2);

        let c = enum_q_candidates(4, 3).unwrap();
        assert_eq!(brute_q_shapes(4, 3).len(), 2);
        let sizes: Vec<Vec<u32>> = c.into_iter().map(|c| c.sizes).collect();
        assert_eq!(sizes, vec![vec![2, 1, 1], vec![1, 1, 2]]);

        assert!(enum_q_candidates(4, 1).is_err());
    }

    #[test]
    fn q_candidates_match_brute_force() {
        for q in 2..=9 {
            for k in 2..=q {
                let got: std::collections::BTreeSet<(Vec<u32>, Vec<u32>)> = enum_q_candidates(q, k)
                    .unwrap()
                    .into_iter()
                    .map(|c| {
                        let mut pair = c.sizes[..2].to_vec();
                        pair.sort_unstable();
                        let mut rest = c.sizes[2..].to_vec();
                        rest.sort_unstable();
                        (pair, rest)
                    })
                    .collect();
                assert_eq!(got, brute_q_shapes(q, k), "q={q} k={k}");
                assert_eq!(got.len(), enum_q_candidates(q, k).unwrap().len());
            }
        }
    }

    #[test]
    fn candidate_supports_classify() {
        for q in 2..=7 {
            for k in 1..=q {
                for c in enum_p_candidates(q, k).unwrap() {
                    let w = vec![1.0 / k as f64; k as usize];
                    let g = support_graph(&c.to_weight_vector(&w).unwrap());
                    assert_eq!(classify_support(&g), SupportClass::Partition(k as usize));
                }
                if k >= 2 {
                    for c in enum_q_candidates(q, k).unwrap() {
                        let w = vec![1.0 / (k + 1) as f64; k as usize + 1];
                        let g = support_graph(&c.to_weight_vector(&w).unwrap());
                        assert_eq!(classify_support(&g), SupportClass::NearPartition(k as usize));
                    }
                }
            }
        }
    }

    #[test]
    fn candidate_json() {
        let c = SizedCandidate::near_partition((1, 2), vec![1, 3]).unwrap();
        assert_eq!(c.to_json().to_string(), r#"{"kind":"Q","merged":[1,2],"sizes":[2,1,3,1]}"#);
        let p = SizedCandidate::partition(vec![1, 3]).unwrap();
        assert_eq!(p.to_json().to_string(), r#"{"kind":"P","sizes":[3,1]}"#);
    }

    #[test]
    fn spectra_of_small_patterns() {
        let c5 = eigenvalues(&SmallGraph::c5());
        let a = 2.0 * (2.0 * PI / 5.0).cos();
        let b = 2.0 * (4.0 * PI / 5.0).cos();
        for (x, y) in c5.iter().zip([2.0, a, a, b, b]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
        for (x, y) in eigenvalues(&SmallGraph::c4()).iter().zip([2.0, 0.0, 0.0, -2.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
        let plus = eigenvalues(&SmallGraph::c5_plus());
        assert_abs_diff_eq!(plus[2], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(plus[4], -2.0, epsilon = 1e-9);
        for &l in &[plus[0], plus[1], plus[3]] {
            assert_abs_diff_eq!(l * l * l - 2.0 * l * l - 2.0 * l + 2.0, 0.0, epsilon = 1e-9);
        }
        assert!((plus[0] - 2.48).abs() < 0.01 && (plus[1] - 0.69).abs() < 0.01 && (plus[3] + 1.17).abs() < 0.01);
    }

    #[test]
    fn nonneg_counts() {
        assert_eq!(count_nonneg_eigenvalues(&SmallGraph::three_k1(), 1e-9), 3);
        assert_eq!(count_nonneg_eigenvalues(&SmallGraph::complete(3), 1e-9), 1);
        assert_eq!(count_nonneg_eigenvalues(&SmallGraph::c4(), 1e-9), 3);
        assert_eq!(count_nonneg_eigenvalues(&SmallGraph::c5_plus(), 1e-9), 3);
    }

    #[test]
    fn trace_identities() {
        let graphs = [SmallGraph::c5_plus(), SmallGraph::complete(7), SmallGraph::cycle(9), SmallGraph::three_k1()];
        for g in graphs {
            let ev = eigenvalues(&g);
            assert!(ev.windows(2).all(|w| w[0] >= w[1]));
            assert_abs_diff_eq!(ev.iter().sum::<f64>(), 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(ev.iter().map(|l| l * l).sum::<f64>(), 2.0 * g.edge_count() as f64, epsilon = 1e-8);
        }
    }

    #[test]
    fn induced_search() {
        let tri = WeightVector::from_entries(
            3,
            [(ColorSet::new([1, 2]).unwrap(), 0.3), (ColorSet::new([2, 3]).unwrap(), 0.3), (ColorSet::new([1, 3]).unwrap(), 0.4)],
        )
        .unwrap();
        assert!(has_induced(&SmallGraph::three_k1(), &support_graph(&tri)).unwrap());
        let k5 = SmallGraph::complete(5);
        let k5_adj: Vec<Vec<bool>> = (0..5).map(|i| (0..5).map(|j| k5.adjacent(i, j)).collect()).collect();
        assert!(!has_induced_in(&SmallGraph::c4(), &k5_adj).unwrap());
        let q3 = SizedCandidate::near_partition((1, 1), vec![1]).unwrap();
        let g = support_graph(&q3.to_weight_vector(&[0.25; 4]).unwrap());
        assert!(!has_induced(&SmallGraph::c5(), &g).unwrap());
        assert!(has_induced_in(&SmallGraph::empty(7), &k5_adj).is_err());
    }

    #[test]
    fn induced_matches_pattern_not_subgraph() {
        // C4 contains a path on 3 vertices but not an induced triangle
        let c4 = SmallGraph::c4();
        let adj: Vec<Vec<bool>> = (0..4).map(|i| (0..4).map(|j| c4.adjacent(i, j)).collect()).collect();
        let p3 = SmallGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(has_induced_in(&p3, &adj).unwrap());
        assert!(!has_induced_in(&SmallGraph::complete(3), &adj).unwrap());
        assert!(has_induced_in(&SmallGraph::c4(), &adj).unwrap());
    }
}
