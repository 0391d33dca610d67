//! Self-check suites behind `chromopt verify`.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chromopt::supports::SmallGraph;
use chromopt::{
    balanced_lower_bound, balanced_vector, brute_opt, classify_support, count_colorings_brute, count_colorings_dc,
    count_colorings_multipartite, eigenvalues, embed_counterexample, global_solve, has_induced, obj, q13_vector,
    relaxed_bound, relaxed_solve, support_graph, ColoredGraph, SolveOptions, SupportClass,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracle,
    Monotonic,
    Spectra,
    Structure,
    Counting,
    Relaxation,
    Counterexamples,
    All,
}

pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, name: &'static str) -> SuiteResult {
        SuiteResult { name, passed: self.failures.is_empty(), checks: self.checks, failures: self.failures }
    }
}

pub fn run(suite: Suite, seed: u64) -> Vec<SuiteResult> {
    let all = [
        Suite::Oracle,
        Suite::Monotonic,
        Suite::Spectra,
        Suite::Structure,
        Suite::Counting,
        Suite::Relaxation,
        Suite::Counterexamples,
    ];
    let chosen: Vec<Suite> = if suite == Suite::All { all.to_vec() } else { vec![suite] };
    chosen.into_iter().map(|s| run_one(s, seed)).collect()
}

fn run_one(suite: Suite, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let name = match suite {
        Suite::Oracle => {
            oracle(&mut t, &mut rng);
            "oracle"
        }
        Suite::Monotonic => {
            monotonic(&mut t);
            "monotonic"
        }
        Suite::Spectra => {
            spectra(&mut t);
            "spectra"
        }
        Suite::Structure => {
            structure(&mut t, &mut rng);
            "structure"
        }
        Suite::Counting => {
            counting(&mut t, &mut rng);
            "counting"
        }
        Suite::Relaxation => {
            relaxation(&mut t, &mut rng);
            "relaxation"
        }
        Suite::Counterexamples => {
            counterexamples(&mut t);
            "counterexamples"
        }
        Suite::All => unreachable!("expanded by run"),
    };
    t.finish(name)
}

/// Structure-guided solver against the structure-blind numeric optimizer.
fn oracle(t: &mut Tally, rng: &mut ChaCha8Rng) {
    for q in 2..=4u32 {
        for _ in 0..4 {
            let s = 1.0 + rng.gen_range(0.02..1.0) * (q as f64 - 1.0);
            let g = global_solve(q, s, SolveOptions::default()).map(|r| r.opt_value);
            let b = brute_opt(q, s, 32, 3000, rng.gen());
            match (g, b) {
                (Ok(g), Ok(b)) => t.check((g - b).abs() <= 1e-6, || format!("q={q} s={s}: global {g} vs numeric {b}")),
                (g, b) => t.check(false, || format!("q={q} s={s}: {g:?} / {b:?}")),
            }
        }
    }
}

/// OPT_q(s) strictly decreases in s and does not decrease in q.
fn monotonic(t: &mut Tally) {
    for q in 2..=10u32 {
        let mut prev = f64::INFINITY;
        for j in 1..=20 {
            let s = 1.0 + (q as f64 - 1.0) * j as f64 / 20.0;
            let opt = global_solve(q, s, SolveOptions::default()).map(|r| r.opt_value).unwrap_or(f64::NAN);
            t.check(opt < prev, || format!("q={q}: OPT({s}) = {opt} not below {prev}"));
            prev = opt;
        }
    }
    for j in 1..=12 {
        let s = 1.0 + 0.25 * j as f64;
        let mut prev = f64::NEG_INFINITY;
        for q in (s.ceil() as u32)..=12 {
            let opt = global_solve(q, s, SolveOptions::default()).map(|r| r.opt_value).unwrap_or(f64::NAN);
            t.check(opt >= prev - 1e-12, || format!("s={s}: OPT_{q} = {opt} below OPT_{} = {prev}", q - 1));
            prev = opt;
        }
    }
}

fn spectra(t: &mut Tally) {
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
    let a = 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
    let b = 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
    let k1 = eigenvalues(&SmallGraph::three_k1());
    t.check(close(&k1, &[0.0; 3]), || format!("3K1: {k1:?}"));
    let c4 = eigenvalues(&SmallGraph::c4());
    t.check(close(&c4, &[2.0, 0.0, 0.0, -2.0]), || format!("C4: {c4:?}"));
    let c5 = eigenvalues(&SmallGraph::c5());
    t.check(close(&c5, &[2.0, a, a, b, b]), || format!("C5: {c5:?}"));
    let plus = eigenvalues(&SmallGraph::c5_plus());
    let cubic = |l: f64| l * l * l - 2.0 * l * l - 2.0 * l + 2.0;
    t.check(plus[2].abs() <= 1e-9 && (plus[4] + 2.0).abs() <= 1e-9, || format!("C5+: {plus:?}"));
    for l in [plus[0], plus[1], plus[3]] {
        t.check(cubic(l).abs() <= 1e-9, || format!("C5+ eigenvalue {l} is not a root of the cubic"));
    }
}

/// Optimal supports are partitions or near-partitions with no induced C5.
fn structure(t: &mut Tally, rng: &mut ChaCha8Rng) {
    let c5 = SmallGraph::c5();
    for q in 2..=10u32 {
        for _ in 0..10 {
            let s: f64 = rng.gen_range(1.0..q as f64).max(1.0 + 1e-9);
            let rep = match global_solve(q, s, SolveOptions::default()) {
                Ok(r) => r,
                Err(e) => {
                    t.check(false, || format!("q={q} s={s}: {e}"));
                    continue;
                }
            };
            let g = support_graph(&rep.best.weight_vector());
            let cs = s.ceil() as usize;
            let ok = match classify_support(&g) {
                SupportClass::Partition(k) => cs <= k && (k < q as usize || cs == q as usize),
                SupportClass::NearPartition(k) => k == cs && s.fract() != 0.0,
                SupportClass::Other => false,
            };
            t.check(ok, || format!("q={q} s={s}: support {:?}", classify_support(&g)));
            t.check(!has_induced(&c5, &g).unwrap_or(true), || format!("q={q} s={s}: induced C5"));
        }
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> ColoredGraph {
    let p: f64 = rng.gen_range(0.0..1.0);
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect::<Vec<_>>().into_iter().filter(|_| rng.gen_bool(p)).collect();
    ColoredGraph::new(n, edges).expect("generated edges are simple")
}

/// Brute force, deletion–contraction and the multipartite closed form agree.
fn counting(t: &mut Tally, rng: &mut ChaCha8Rng) {
    for _ in 0..60 {
        let n = rng.gen_range(1..=7);
        let q = rng.gen_range(1..=5);
        let g = random_graph(rng, n);
        let a = count_colorings_brute(&g, q).map(|c| c.count);
        let b = count_colorings_dc(&g, q).map(|c| c.count);
        t.check(a.is_ok() && a == b, || format!("n={n} q={q} edges={:?}: {a:?} vs {b:?}", g.edges()));
    }
    for _ in 0..20 {
        let parts: Vec<usize> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(1..=3)).collect();
        let q = rng.gen_range(1..=5);
        let g = ColoredGraph::complete_multipartite(&parts);
        let a = count_colorings_brute(&g, q).map(|c| c.count);
        let c = count_colorings_multipartite(&parts, q).map(|c| c.count);
        t.check(a.is_ok() && a == c, || format!("parts {parts:?} q={q}: {a:?} vs {c:?}"));
    }
}

/// Relaxed optima: two values above the floor, below -ln s and the pinned bound.
fn relaxation(t: &mut Tally, rng: &mut ChaCha8Rng) {
    for _ in 0..200 {
        let s: f64 = rng.gen_range(1.01..8.0);
        let k = s.ceil() as usize + rng.gen_range(0..4);
        let delta = rng.gen_range(0.0..0.5) / k as f64;
        let Ok(sol) = relaxed_solve(s, k, delta) else { continue };
        let sum: f64 = sol.alphas.iter().sum();
        let sq: f64 = sol.alphas.iter().map(|a| a * a).sum();
        let mut free = sol.alphas[..k - sol.ell].to_vec();
        free.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let bound = relaxed_bound(s, delta, sol.ell).unwrap_or(f64::NAN);
        t.check(
            (sum - 1.0).abs() <= 1e-9 && (sq - 1.0 / s).abs() <= 1e-9 && free.len() <= 2,
            || format!("s={s} k={k} δ={delta}: structure {:?}", sol.alphas),
        );
        t.check(sol.f <= -s.ln() + 1e-12 && sol.f <= bound + 1e-12, || format!("s={s} k={k} δ={delta}: F={} bound={bound}", sol.f));
    }
}

fn counterexamples(t: &mut Tally) {
    let bal = obj(&balanced_vector(13, 10).expect("valid")).unwrap_or(f64::NAN);
    let beta = obj(&q13_vector()).unwrap_or(f64::NAN);
    t.check(beta > bal + 2e-3, || format!("q13 {beta} vs balanced {bal}"));
    for s in 10..=30u32 {
        for q in s + 3..=2 * s - 7 {
            let ok = match embed_counterexample(s, q) {
                Ok(Some(v)) => obj(&v).unwrap_or(f64::NAN) > obj(&balanced_vector(q, s).expect("valid")).unwrap_or(f64::NAN),
                _ => false,
            };
            t.check(ok, || format!("embedding at s={s}, q={q} does not beat the balanced vector"));
        }
    }
    for q in 1..=60u32 {
        for s in 1..=q {
            let o = obj(&balanced_vector(q, s).expect("valid")).unwrap_or(f64::NAN);
            let lo = balanced_lower_bound(q, s).unwrap_or(f64::NAN);
            let hi = (q as f64).ln() - (s as f64).ln();
            t.check(o >= lo - 1e-12 && o <= hi + 1e-12, || format!("balanced chain fails at q={q}, s={s}"));
        }
    }
}
