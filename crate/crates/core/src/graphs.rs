//! Graphs on the other side of the optimization: Turán graphs, cluster
//! graphs `G_α(n)`, exact proper-coloring counts and edit distances.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::colorsets::{vsum, ColorSet, WeightVector, ZERO_WEIGHT};
use crate::error::{invalid, Error, Result};
use crate::fmt::json_f64;

/// Simple undirected graph on `0..n` with a sorted edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl ColoredGraph {
    /// Edges may be given in either orientation; loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(invalid(format!("loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) leaves 0..{n}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(invalid(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(ColoredGraph { n, edges: set.into_iter().collect() })
    }

    pub fn empty(n: usize) -> Self {
        ColoredGraph { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        Self::complete_multipartite(&vec![1; n])
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("a cycle needs 3 vertices, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("paths are simple")
    }

    /// Complete multipartite graph with contiguous vertex blocks.
    pub fn complete_multipartite(parts: &[usize]) -> Self {
        let mut block = Vec::new();
        for (i, &p) in parts.iter().enumerate() {
            block.extend(std::iter::repeat_n(i, p));
        }
        let n = block.len();
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| block[u] != block[v])
            .collect();
        ColoredGraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Copy with one more edge.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        Self::new(self.n, self.edges.iter().copied().chain([(u, v)]))
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.edges {
            a[u][v] = true;
            a[v][u] = true;
        }
        a
    }

    /// Neighbor bitmasks; needs `n <= 64`.
    fn masks(&self) -> Vec<u64> {
        assert!(self.n <= 64);
        let mut m = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            m[u] |= 1 << v;
            m[v] |= 1 << u;
        }
        m
    }

    /// Reads the text format: a line `n m`, then `m` lines `u v` with
    /// 0-based endpoints. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(Error::Parse(format!("header promises {m} edges, found {}", edges.len())));
        }
        Self::new(n, edges).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let nums: Vec<&str> = line.split_whitespace().collect();
    if nums.len() != 2 {
        return Err(Error::Parse(format!("expected two integers, got {line:?}")));
    }
    let p = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    Ok((p(nums[0])?, p(nums[1])?))
}

impl fmt::Display for ColoredGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Part sizes of `T_s(n)`, larger parts first.
pub fn turan_parts(n: usize, s: usize) -> Result<Vec<usize>> {
    if s == 0 || s > n {
        return Err(invalid(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    let (t, r) = (n / s, n % s);
    Ok((0..s).map(|i| if i < r { t + 1 } else { t }).collect())
}

/// The Turán graph `T_s(n)`.
pub fn build_turan(n: usize, s: usize) -> Result<ColoredGraph> {
    Ok(ColoredGraph::complete_multipartite(&turan_parts(n, s)?))
}

/// Cluster sizes of `G_α(n)`: `α_A n` rounded by largest remainder, ties to
/// the smaller set mask. Sets are listed in mask order.
pub fn g_alpha_clusters(v: &WeightVector, n: usize) -> Result<Vec<(ColorSet, usize)>> {
    if (vsum(v) - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("weights must sum to 1, got {}", vsum(v))));
    }
    let support = v.support();
    if n < support.len() {
        return Err(invalid(format!("n={n} is below the support size {}", support.len())));
    }
    if let Some((set, w)) = v.iter().find(|(_, w)| *w < -ZERO_WEIGHT) {
        return Err(Error::NegativeWeight { set: set.colors().to_vec(), weight: w });
    }
    let exact: Vec<f64> = support.iter().map(|(_, w)| w * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..support.len()).collect();
    // stable sort keeps mask order among equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite weights")
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    Ok(support.into_iter().map(|(s, _)| s).zip(sizes).collect())
}

/// `G_α(n)`: a cluster of about `α_A n` vertices per support set, with
/// complete joins between clusters of disjoint sets.
pub fn build_g_alpha(v: &WeightVector, n: usize) -> Result<ColoredGraph> {
    let clusters = g_alpha_clusters(v, n)?;
    let mut owner = Vec::with_capacity(n);
    for (i, (_, size)) in clusters.iter().enumerate() {
        owner.extend(std::iter::repeat_n(i, *size));
    }
    let k = clusters.len();
    let disjoint: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| i != j && clusters[i].0.is_disjoint(&clusters[j].0)).collect())
        .collect();
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |w| (u, w)))
        .filter(|&(u, w)| disjoint[owner[u]][owner[w]])
        .collect();
    Ok(ColoredGraph { n, edges })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountMethod {
    Brute,
    DeletionContraction,
    Multipartite,
}

impl CountMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMethod::Brute => "brute",
            CountMethod::DeletionContraction => "deletion_contraction",
            CountMethod::Multipartite => "multipartite",
        }
    }
}

/// Exact number of proper `q`-colorings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub count: BigUint,
    pub q: u32,
    pub method: CountMethod,
}

impl CountResult {
    pub fn to_json(&self, n: usize) -> Value {
        json!({
            "n": n,
            "q": self.q,
            "method": self.method.as_str(),
            "count": self.count.to_string(),
            "count_bits": self.count.bits(),
            "log_rate": json_f64(rate(&self.count, n)),
        })
    }
}

/// Largest instance size the brute-force counter accepts.
pub const BRUTE_LIMIT: f64 = 1e8;

/// Counts proper colorings by enumerating every assignment, vertex by
/// vertex, pruning at the first conflict with an earlier neighbor.
pub fn count_colorings_brute(g: &ColoredGraph, q: u32) -> Result<CountResult> {
    if (q as f64).powi(g.n as i32) > BRUTE_LIMIT {
        return Err(Error::TooLarge(format!("{q}^{} assignments", g.n)));
    }
    let earlier: Vec<Vec<usize>> = {
        let adj = g.adjacency();
        (0..g.n).map(|v| (0..v).filter(|&u| adj[u][v]).collect()).collect()
    };
    fn rec(v: usize, colors: &mut Vec<u32>, earlier: &[Vec<usize>], q: u32) -> u64 {
        if v == earlier.len() {
            return 1;
        }
        let mut total = 0;
        for c in 0..q {
            if earlier[v].iter().all(|&u| colors[u] != c) {
                colors[v] = c;
                total += rec(v + 1, colors, earlier, q);
            }
        }
        total
    }
    let mut colors = vec![0; g.n];
    let count = rec(0, &mut colors, &earlier, q);
    Ok(CountResult { count: BigUint::from(count), q, method: CountMethod::Brute })
}

/// Size limits of the deletion–contraction counter.
pub const DC_MAX_N: usize = 18;
pub const DC_MAX_M: usize = 60;
/// Default cap on nontrivial recursive calls.
pub const DC_BUDGET: u64 = 2_000_000;

fn falling(q: u32, k: usize) -> BigUint {
    (0..k as u32).fold(BigUint::one(), |acc, i| if i >= q { BigUint::zero() } else { acc * (q - i) })
}

/// Drops vertex `v` and renumbers the rest.
fn remove_vertex(adj: &[u32], v: usize) -> Vec<u32> {
    let low = (1u32 << v) - 1;
    adj.iter()
        .enumerate()
        .filter(|&(i, _)| i != v)
        .map(|(_, &m)| (m & low) | ((m >> 1) & !low))
        .collect()
}

/// Relabeling by degree refinement; equal keys mean isomorphic graphs.
fn canonical_key(adj: &[u32]) -> Vec<u32> {
    let n = adj.len();
    let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let sig: Vec<(u32, Vec<u32>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<u32> = (0..n).filter(|&u| adj[v] >> u & 1 == 1).map(|u| deg[u]).collect();
            nd.sort_unstable();
            (deg[v], nd)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sig[a].cmp(&sig[b]).then(a.cmp(&b)));
    let mut pos = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    order
        .iter()
        .map(|&old| (0..n).filter(|&u| adj[old] >> u & 1 == 1).fold(0u32, |m, u| m | 1 << pos[u]))
        .collect()
}

struct Dc {
    q: u32,
    memo: HashMap<Vec<u32>, BigUint>,
    calls: u64,
    budget: u64,
}

impl Dc {
    fn count(&mut self, adj: Vec<u32>) -> Result<BigUint> {
        let n = adj.len();
        if n == 0 {
            return Ok(BigUint::one());
        }
        let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
        // isolated vertices and leaves peel off with a constant factor
        if let Some(v) = (0..n).find(|&v| deg[v] <= 1) {
            let factor = if deg[v] == 0 { self.q } else { self.q - 1 };
            return Ok(self.count(remove_vertex(&adj, v))? * factor);
        }
        if deg.iter().all(|&d| d as usize == n - 1) {
            return Ok(falling(self.q, n));
        }
        let key = canonical_key(&adj);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        self.calls += 1;
        if self.calls > self.budget {
            return Err(Error::BudgetExhausted(self.budget));
        }
        let u = (0..n).max_by_key(|&v| (deg[v], std::cmp::Reverse(v))).expect("n > 0");
        let v = adj[u].trailing_zeros() as usize;
        let mut deleted = adj.clone();
        deleted[u] &= !(1 << v);
        deleted[v] &= !(1 << u);
        let mut merged = deleted.clone();
        merged[u] |= merged[v];
        for w in 0..n {
            if merged[v] >> w & 1 == 1 {
                merged[w] |= 1 << u;
            }
        }
        let contracted = remove_vertex(&merged, v);
        let a = self.count(deleted)?;
        let b = self.count(contracted)?;
        // P(G - e) = P(G) + P(G / e) >= P(G / e)
        let out = a - b;
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Counts proper colorings by deletion–contraction with a memo on relabeled
/// graphs, using the default budget.
pub fn count_colorings_dc(g: &ColoredGraph, q: u32) -> Result<CountResult> {
    count_colorings_dc_budget(g, q, DC_BUDGET)
}

/// [`count_colorings_dc`] with an explicit cap on recursive calls.
pub fn count_colorings_dc_budget(g: &ColoredGraph, q: u32, budget: u64) -> Result<CountResult> {
    if g.n > DC_MAX_N || g.edge_count() > DC_MAX_M {
        return Err(Error::TooLarge(format!(
            "deletion–contraction handles n <= {DC_MAX_N}, m <= {DC_MAX_M}; got n={}, m={}",
            g.n,
            g.edge_count()
        )));
    }
    let count = if q == 0 {
        if g.n == 0 { BigUint::one() } else { BigUint::zero() }
    } else {
        let adj: Vec<u32> = g.masks().into_iter().map(|m| m as u32).collect();
        Dc { q, memo: HashMap::new(), calls: 0, budget }.count(adj)?
    };
    Ok(CountResult { count, q, method: CountMethod::DeletionContraction })
}

pub const MULTIPARTITE_MAX_N: usize = 400;
pub const MULTIPARTITE_MAX_Q: u32 = 64;

/// Rows `S(m, 0..=cap)` of the Stirling numbers of the second kind for
/// `m = 0..=n`.
fn stirling2_table(n: usize, cap: usize) -> Vec<Vec<BigUint>> {
    let mut rows = vec![vec![BigUint::zero(); cap + 1]; n + 1];
    rows[0][0] = BigUint::one();
    for m in 1..=n {
        for k in 1..=cap.min(m) {
            rows[m][k] = &rows[m - 1][k] * BigUint::from(k) + &rows[m - 1][k - 1];
        }
    }
    rows
}

/// Exact count for the complete multipartite graph with these parts: each
/// part uses its own set of colors, so the count is
/// `Σ Π S(n_i, t_i) · q(q-1)…(q-T+1)` over `t_i >= 1`, `T = Σ t_i`.
pub fn count_colorings_multipartite(parts: &[usize], q: u32) -> Result<CountResult> {
    let total: usize = parts.iter().sum();
    if total > MULTIPARTITE_MAX_N || q > MULTIPARTITE_MAX_Q {
        return Err(Error::TooLarge(format!(
            "multipartite counter handles Σn <= {MULTIPARTITE_MAX_N}, q <= {MULTIPARTITE_MAX_Q}; got {total}, {q}"
        )));
    }
    let cap = q as usize;
    let largest = parts.iter().copied().max().unwrap_or(0);
    let stirling = stirling2_table(largest, cap);
    // ways[T]: Σ Π S(n_i, t_i) over choices with Σ t_i = T
    let mut ways = vec![BigUint::zero(); cap + 1];
    ways[0] = BigUint::one();
    for &p in parts.iter().filter(|&&p| p > 0) {
        let mut next = vec![BigUint::zero(); cap + 1];
        for (used, w) in ways.iter().enumerate().filter(|(_, w)| !w.is_zero()) {
            for t in 1..=p.min(cap - used) {
                next[used + t] += w * &stirling[p][t];
            }
        }
        ways = next;
    }
    let count = ways.iter().enumerate().map(|(t, w)| w * falling(q, t)).sum();
    Ok(CountResult { count, q, method: CountMethod::Multipartite })
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit head converts");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn rate(count: &BigUint, n: usize) -> f64 {
    if n == 0 {
        return if count.is_zero() { f64::NEG_INFINITY } else { 0.0 };
    }
    ln_big(count) / n as f64
}

/// `ln P(q) / n` for the complete multipartite graph with these parts.
pub fn log_rate(parts: &[usize], q: u32) -> Result<f64> {
    let n: usize = parts.iter().sum();
    let c = count_colorings_multipartite(parts, q)?;
    Ok(rate(&c.count, n))
}

/// Size of the symmetric difference of the edge sets.
pub fn edit_distance_labeled(g: &ColoredGraph, h: &ColoredGraph) -> Result<usize> {
    if g.n != h.n {
        return Err(invalid(format!("vertex counts differ: {} vs {}", g.n, h.n)));
    }
    let a: BTreeSet<_> = g.edges.iter().collect();
    let b: BTreeSet<_> = h.edges.iter().collect();
    Ok(a.symmetric_difference(&b).count())
}

pub const ISO_MAX_N: usize = 8;

/// Fewest edge edits turning `g` into a graph isomorphic to `h`.
pub fn edit_distance_iso(g: &ColoredGraph, h: &ColoredGraph) -> Result<usize> {
    if g.n != h.n {
        return Err(invalid(format!("vertex counts differ: {} vs {}", g.n, h.n)));
    }
    if g.n > ISO_MAX_N {
        return Err(Error::TooLarge(format!("isomorphism search needs n <= {ISO_MAX_N}, got {}", g.n)));
    }
    let n = g.n;
    let (ga, hm) = (g.masks(), h.masks());
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    // Heap's algorithm over all n! relabelings of g
    let mut c = vec![0usize; n];
    let mut eval = |perm: &[usize]| {
        let mut d = 0;
        for u in 0..n {
            let mut m = 0u64;
            for v in 0..n {
                if ga[u] >> v & 1 == 1 {
                    m |= 1 << perm[v];
                }
            }
            d += (m ^ hm[perm[u]]).count_ones() as usize;
        }
        best = best.min(d / 2);
    };
    eval(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            eval(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}
