//! Closed-form stationary points for fixed support shapes, the global
//! solver built on them, and a shape-agnostic numeric oracle for tiny `q`.
//!
//! For a partition with sizes `A_1..A_k` the restricted problem maximizes
//! `Σ α_i ln A_i` subject to `Σ α_i = 1` and `Σ α_i² = 1/s`; its interior
//! stationary point has `λ' α_i = ln A_i - μ'`. For a partition plus the
//! union of parts 1 and 2 (weight `β`) the quadratic constraint becomes
//! `Σ α_i² + β² + 2β(α_1 + α_2) = 1/s` and the stationary point is again
//! explicit. Optimal supports are always one of these two shapes, so the
//! global optimum is a maximum over finitely many closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::colorsets::{WeightVector, ZERO_WEIGHT};
use crate::error::{invalid, Error, Result};
use crate::fmt::json_f64;
use crate::supports::{enum_p_candidates, enum_q_candidates, CandidateKind, SizedCandidate};

/// Coordinates this far below zero still count as nonnegative.
pub const NEG_TOL: f64 = 1e-12;
/// Residual bound for a stationary point to be reported feasible.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Objectives within this distance of the best are ties.
pub const TIE_TOL: f64 = 1e-9;
/// Largest `q` the global solver accepts.
pub const MAX_Q: u32 = 30;

/// A fully evaluated candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPoint {
    pub candidate: SizedCandidate,
    /// `α_1..α_k`, then `β` for kind `Q`.
    pub alphas: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub objective: f64,
    pub feasible: bool,
}

impl StationaryPoint {
    pub fn weight_vector(&self) -> WeightVector {
        self.candidate.to_weight_vector(&self.alphas).expect("alphas match the candidate shape")
    }

    /// `|Σ weights - 1|` and `|quadratic form - 1/s|`.
    pub fn residuals(&self, s: f64) -> (f64, f64) {
        residuals(&self.candidate, &self.alphas, s)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.candidate.to_json();
        let obj = v.as_object_mut().expect("candidate json is an object");
        obj.insert("alphas".into(), Value::Array(self.alphas.iter().map(|&a| json_f64(a)).collect()));
        obj.insert("lambda".into(), json_f64(self.lambda));
        obj.insert("mu".into(), json_f64(self.mu));
        obj.insert("objective".into(), json_f64(self.objective));
        v
    }
}

fn quadratic_form(c: &SizedCandidate, alphas: &[f64]) -> f64 {
    let k = c.parts();
    let mut total: f64 = alphas[..k].iter().map(|a| a * a).sum();
    if c.kind == CandidateKind::Q {
        let beta = alphas[k];
        total += beta * beta + 2.0 * beta * (alphas[0] + alphas[1]);
    }
    total
}

fn residuals(c: &SizedCandidate, alphas: &[f64], s: f64) -> (f64, f64) {
    let sum: f64 = alphas.iter().sum();
    ((sum - 1.0).abs(), (quadratic_form(c, alphas) - 1.0 / s).abs())
}

fn finish(candidate: SizedCandidate, alphas: Vec<f64>, lambda: f64, mu: f64, objective: f64, s: f64) -> StationaryPoint {
    let (r1, r2) = residuals(&candidate, &alphas, s);
    let feasible = alphas.iter().all(|&a| a >= -NEG_TOL) && r1 <= RESIDUAL_TOL && r2 <= RESIDUAL_TOL;
    StationaryPoint { candidate, alphas, lambda, mu, objective, feasible }
}

fn ceil_s(s: f64) -> u32 {
    s.ceil() as u32
}

fn is_integer(s: f64) -> bool {
    s.fract() == 0.0
}

/// Weights for `k` parts of equal size: any point of the sphere works
/// since the objective is constant there. Uses `x` on `k-1` parts and a
/// smaller `y` on the last when that keeps `y > 0`, else one large weight
/// and `k-1` equal small ones.
pub(crate) fn equal_size_witness(k: usize, s: f64) -> Vec<f64> {
    let kf = k as f64;
    if k == 1 {
        return vec![1.0];
    }
    let m = kf - 1.0;
    let disc = 1.0 - kf * (1.0 - 1.0 / s) / m;
    if disc >= 0.0 {
        let x = (1.0 + disc.sqrt()) / kf;
        let y = 1.0 - m * x;
        if y > ZERO_WEIGHT {
            let mut w = vec![x; k - 1];
            w.push(y);
            return w;
        }
    }
    let big = (1.0 + (m * (kf / s - 1.0)).max(0.0).sqrt()) / kf;
    let small = (1.0 - big) / m;
    let mut w = vec![big];
    w.extend(std::iter::repeat_n(small, k - 1));
    w
}

/// Interior stationary point of the partition problem with the given sizes.
///
/// Returns `Ok(None)` when the stationary point has a negative coordinate.
/// Fails when `k < ⌈s⌉`, since no `k`-part vector meets the edge constraint.
pub fn solve_pk(c: &SizedCandidate, s: f64) -> Result<Option<StationaryPoint>> {
    if c.kind != CandidateKind::P {
        return Err(invalid("solve_pk needs a partition candidate"));
    }
    if !(s > 1.0) {
        return Err(invalid(format!("s must exceed 1, got {s}")));
    }
    let k = c.parts();
    if (k as u32) < ceil_s(s) {
        return Err(invalid(format!("{k} parts cannot reach density (s-1)/(2s) for s={s}")));
    }
    let kf = k as f64;
    let logs: Vec<f64> = c.sizes.iter().map(|&a| (a as f64).ln()).collect();
    let s1 = logs.iter().sum::<f64>() / kf;

    if kf == s {
        let alphas = vec![1.0 / kf; k];
        return Ok(Some(finish(c.clone(), alphas, 0.0, s1, s1, s)));
    }
    if c.sizes.iter().all(|&a| a == c.sizes[0]) {
        let alphas = equal_size_witness(k, s);
        return Ok(Some(finish(c.clone(), alphas, 0.0, s1, s1, s)));
    }
    let var = logs.iter().map(|l| (l - s1).powi(2)).sum::<f64>() / kf;
    let lambda = kf * (s / (kf - s) * var).sqrt();
    let mu = s1 - lambda / kf;
    let alphas: Vec<f64> = logs.iter().map(|l| (l - mu) / lambda).collect();
    if alphas.iter().any(|&a| a < -NEG_TOL) {
        return Ok(None);
    }
    Ok(Some(finish(c.clone(), alphas, lambda, mu, mu + lambda / s, s)))
}

/// Interior stationary point of the near-partition problem.
///
/// Returns `Ok(None)` when the multiplier is not real or the point leaves
/// the nonnegative orthant. Fails when `k - 1 = s`, where no interior
/// stationary point exists.
pub fn solve_qk(c: &SizedCandidate, s: f64) -> Result<Option<StationaryPoint>> {
    if c.kind != CandidateKind::Q {
        return Err(invalid("solve_qk needs a near-partition candidate"));
    }
    if !(s > 1.0) {
        return Err(invalid(format!("s must exceed 1, got {s}")));
    }
    let k = c.parts();
    let m = (k - 1) as f64;
    if m == s {
        return Err(invalid(format!("k - 1 = s = {s} admits no interior stationary point")));
    }
    let a1 = c.sizes[0] as f64;
    let a2 = c.sizes[1] as f64;
    let logs: Vec<f64> = c.sizes.iter().map(|&a| (a as f64).ln()).collect();
    let l12 = (a1 + a2).ln();
    let lprod = (a1 * a2 / (a1 + a2)).ln();

    let s1 = (l12 + logs[2..].iter().sum::<f64>()) / m;
    let s2 = (-lprod * lprod + logs.iter().map(|l| l * l).sum::<f64>()) / m;
    let d = s / (m - s) * (s2 - s1 * s1);
    if !(d > 0.0) {
        return Ok(None);
    }
    let lambda = m * d.sqrt();
    let mu = s1 - lambda / m;

    let mut alphas = Vec::with_capacity(k + 1);
    alphas.push(((a1 + a2) / a2).ln() / lambda);
    alphas.push(((a1 + a2) / a1).ln() / lambda);
    alphas.extend(logs[2..].iter().map(|l| (l - mu) / lambda));
    let beta = (lprod - mu) / lambda;
    alphas.push(beta);
    if alphas.iter().any(|&a| a < -NEG_TOL) || beta <= ZERO_WEIGHT {
        return Ok(None);
    }
    Ok(Some(finish(c.clone(), alphas, lambda, mu, mu + lambda / s, s)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Also evaluate near-partitions of every size, not only `⌈s⌉`.
    pub paranoid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub q: u32,
    pub s: f64,
    pub best: StationaryPoint,
    /// Other feasible points within [`TIE_TOL`] of the best.
    pub ties: Vec<StationaryPoint>,
    pub candidates_evaluated: usize,
    pub opt_value: f64,
}

impl SolveReport {
    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "s": json_f64(self.s),
            "opt": json_f64(self.opt_value),
            "best": self.best.to_json(),
            "ties": self.ties.iter().map(StationaryPoint::to_json).collect::<Vec<_>>(),
            "evaluated": self.candidates_evaluated,
        })
    }
}

fn report_order(a: &StationaryPoint, b: &StationaryPoint) -> std::cmp::Ordering {
    (a.candidate.kind, a.candidate.parts(), &a.candidate.sizes)
        .cmp(&(b.candidate.kind, b.candidate.parts(), &b.candidate.sizes))
}

/// `OPT_q(s)` by exhaustive evaluation of the admissible support shapes:
/// partitions into `⌈s⌉..=q` parts (dropping `q` parts unless `⌈s⌉ = q`)
/// and, for non-integer `s`, near-partitions of `⌈s⌉` parts.
pub fn global_solve(q: u32, s: f64, opts: SolveOptions) -> Result<SolveReport> {
    if !(s > 1.0) || s > q as f64 {
        return Err(invalid(format!("need 1 < s <= q, got s={s}, q={q}")));
    }
    if q > MAX_Q {
        return Err(Error::TooLarge(format!("q={q} exceeds {MAX_Q}")));
    }
    let lo = ceil_s(s);
    let hi = if lo < q { q - 1 } else { q };
    let mut candidates = Vec::new();
    for k in lo..=hi {
        candidates.extend(enum_p_candidates(q, k)?);
    }
    let q_sizes: Vec<u32> = if opts.paranoid {
        (2..=q).filter(|&k| (k - 1) as f64 != s).collect()
    } else if !is_integer(s) && lo >= 2 {
        vec![lo]
    } else {
        vec![]
    };
    for k in q_sizes {
        candidates.extend(enum_q_candidates(q, k)?);
    }

    let evaluated: Vec<Option<StationaryPoint>> = candidates
        .par_iter()
        .map(|c| match c.kind {
            CandidateKind::P => solve_pk(c, s),
            CandidateKind::Q => solve_qk(c, s),
        })
        .collect::<Result<_>>()?;
    let mut points: Vec<StationaryPoint> = evaluated.into_iter().flatten().filter(|p| p.feasible).collect();
    points.sort_by(report_order);

    let best_idx = points
        .iter()
        .enumerate()
        .fold(None::<usize>, |acc, (i, p)| match acc {
            Some(j) if points[j].objective >= p.objective => Some(j),
            _ => Some(i),
        })
        .ok_or_else(|| Error::NoSolution(format!("no feasible candidate for q={q}, s={s}")))?;
    let best = points[best_idx].clone();
    let ties = points
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != best_idx && p.objective >= best.objective - TIE_TOL)
        .map(|(_, p)| p.clone())
        .collect();
    Ok(SolveReport { q, s, opt_value: best.objective, best, ties, candidates_evaluated: candidates.len() })
}

/// Largest `q` accepted by [`brute_opt`].
pub const BRUTE_MAX_Q: u32 = 5;

struct DenseProblem {
    gains: Vec<f64>,
    /// For each coordinate, the coordinates of sets disjoint from it.
    disjoint: Vec<Vec<usize>>,
    target: f64,
}

impl DenseProblem {
    fn new(q: u32, s: f64) -> Self {
        let n = (1usize << q) - 1;
        let mask = |i: usize| i + 1;
        let gains = (0..n).map(|i| (mask(i).count_ones() as f64).ln()).collect();
        let disjoint = (0..n).map(|i| (0..n).filter(|&j| mask(i) & mask(j) == 0).collect()).collect();
        DenseProblem { gains, disjoint, target: (s - 1.0) / (2.0 * s) }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.gains).map(|(a, g)| a * g).sum()
    }

    /// Per-coordinate `Σ_{B disjoint A} x_B`; the edge functional is half
    /// the dot product with `x`.
    fn edge_gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, nbrs) in out.iter_mut().zip(&self.disjoint) {
            *o = nbrs.iter().map(|&j| x[j]).sum();
        }
    }

    fn slack(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.edge_gradient(x, grad);
        0.5 * x.iter().zip(grad.iter()).map(|(a, g)| a * g).sum::<f64>() - self.target
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(y: &mut [f64]) {
    let mut u: Vec<f64> = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Augmented Lagrangian merit (to be minimized) for `max gains·x` subject
/// to `slack(x) >= 0` on the simplex.
fn merit(p: &DenseProblem, x: &[f64], lambda: f64, rho: f64, scratch: &mut [f64]) -> f64 {
    let g = p.slack(x, scratch);
    let shifted = (lambda - rho * g).max(0.0);
    -p.objective(x) + (shifted * shifted - lambda * lambda) / (2.0 * rho)
}

fn merit_gradient(p: &DenseProblem, x: &[f64], lambda: f64, rho: f64, grad: &mut [f64]) {
    let g = p.slack(x, grad);
    let shifted = (lambda - rho * g).max(0.0);
    for (gi, gain) in grad.iter_mut().zip(&p.gains) {
        *gi = -gain - shifted * *gi;
    }
}

fn local_ascent(p: &DenseProblem, mut x: Vec<f64>, iters: usize, rho0: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut lambda = 0.0;
    let mut rho = rho0;
    let mut grad = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let block = 100;
    let mut step: f64 = 1.0;
    let mut done = 0;
    while done < iters {
        for _ in 0..block.min(iters - done) {
            done += 1;
            merit_gradient(p, &x, lambda, rho, &mut grad);
            let f0 = merit(p, &x, lambda, rho, &mut scratch);
            step = (step * 2.0).min(1e3);
            let mut moved = false;
            while step > 1e-14 {
                for i in 0..n {
                    trial[i] = x[i] - step * grad[i];
                }
                project_simplex(&mut trial);
                let decrease: f64 = grad.iter().zip(trial.iter().zip(&x)).map(|(g, (t, xi))| g * (t - xi)).sum();
                let f1 = merit(p, &trial, lambda, rho, &mut scratch);
                if f1 <= f0 + 1e-4 * decrease {
                    moved = trial.iter().zip(&x).any(|(a, b)| a != b);
                    std::mem::swap(&mut x, &mut trial);
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let g = p.slack(&x, &mut scratch);
        lambda = (lambda - rho * g).max(0.0);
        rho = (rho * 10.0).min(1e4);
    }
    (x, lambda)
}

/// Gauss–Newton projection onto `Σ x = 1`, `x·Ax/2 = target` within the
/// coordinates the ascent left positive. Handles the degenerate points where
/// the two constraint gradients are parallel and no multiplier exists.
fn project_face(p: &DenseProblem, x: &[f64]) -> Option<Vec<f64>> {
    let n = x.len();
    let face: Vec<usize> = (0..n).filter(|&i| x[i] > 1e-7).collect();
    let mut z: Vec<f64> = (0..n).map(|i| if x[i] > 1e-7 { x[i] } else { 0.0 }).collect();
    let mut grad = vec![0.0; n];
    for _ in 0..200 {
        let g = p.slack(&z, &mut grad);
        let v = z.iter().sum::<f64>() - 1.0;
        if g.abs() < 1e-15 && v.abs() < 1e-15 {
            break;
        }
        // rows (1, ..., 1) and (Ax)_face; solve the 2x2 normal equations
        let k = face.len() as f64;
        let gs: f64 = face.iter().map(|&i| grad[i]).sum();
        let gg: f64 = face.iter().map(|&i| grad[i] * grad[i]).sum();
        let det = k * gg - gs * gs;
        if det.abs() < 1e-300 {
            return None;
        }
        let (c1, c2) = ((-v * gg + g * gs) / det, (v * gs - g * k) / det);
        for &i in &face {
            z[i] += c1 + c2 * grad[i];
        }
    }
    z.iter().all(|&a| a >= 0.0).then_some(z)
}

/// Solves `m z = rhs` by Gaussian elimination with partial pivoting;
/// `None` if `m` is numerically singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * z[k]).sum();
        z[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(z)
}

/// Newton refinement of the KKT system `g + λ A x = μ 1`, `Σ x = 1`,
/// `x·Ax/2 = target` restricted to the coordinates the ascent left
/// positive. A coordinate that Newton drives negative is dropped from the
/// face and the solve repeated. Returns `None` if no face works.
fn polish(p: &DenseProblem, x: &[f64], lambda0: f64) -> Option<Vec<f64>> {
    let mut face: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 1e-7).collect();
    let mut start = x.to_vec();
    let mut lambda0 = lambda0;
    for _ in 0..12 {
        if face.len() < 2 {
            return None;
        }
        match newton_on_face(p, &face, &start, lambda0) {
            FaceSolve::Done(z, lambda, mu) => {
                // a zero coordinate with positive reduced gain means z is not
                // a KKT point of the full problem; move onto the larger face
                let mut grad = vec![0.0; z.len()];
                p.edge_gradient(&z, &mut grad);
                let entering = (0..z.len())
                    .filter(|i| !face.contains(i))
                    .map(|i| (i, p.gains[i] + lambda * grad[i] - mu))
                    .filter(|&(_, r)| r > 1e-9)
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                let Some((i, _)) = entering else { return Some(z) };
                face.push(i);
                start = z;
                start[i] = 1e-3;
                lambda0 = lambda;
            }
            FaceSolve::Drop(a) => {
                face.remove(a);
            }
            FaceSolve::Failed => return None,
        }
    }
    None
}

/// Stationary point on a face whose disjointness matrix `A` is invertible.
///
/// With `c = 1/λ` and `m = μ/λ` stationarity reads `x = m A⁻¹1 − c A⁻¹g`;
/// the mass constraint fixes `m` in terms of `c` and the edge constraint
/// then leaves a single positive root for `c`.
fn solve_face_exact(p: &DenseProblem, face: &[usize]) -> Option<Vec<f64>> {
    let k = face.len();
    let m: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| if p.disjoint[face[a]].binary_search(&face[b]).is_ok() { 1.0 } else { 0.0 }).collect())
        .collect();
    let u = solve_dense(m.clone(), vec![1.0; k])?;
    let w = solve_dense(m, face.iter().map(|&i| p.gains[i]).collect())?;
    let a: f64 = u.iter().sum();
    let b: f64 = w.iter().sum();
    let d: f64 = w.iter().zip(face).map(|(wi, &i)| wi * p.gains[i]).sum();
    if a.abs() < 1e-12 {
        return None;
    }
    let c2 = (2.0 * p.target - 1.0 / a) / (d - b * b / a);
    if !(c2 > 0.0) || !c2.is_finite() {
        return None;
    }
    let c = c2.sqrt();
    let mm = (1.0 + c * b) / a;
    let xs: Vec<f64> = (0..k).map(|i| mm * u[i] - c * w[i]).collect();
    if xs.iter().any(|&v| v < -1e-12) {
        return None;
    }
    let mut out = vec![0.0; p.gains.len()];
    for (&i, &v) in face.iter().zip(&xs) {
        out[i] = v.max(0.0);
    }
    Some(out)
}

/// Stationary points on every face obtained from the support of `x` by
/// adding one or two coordinates. Limits of the ascent tend to sit on
/// corners where the optimum needs a couple of very light extra sets, which
/// no first-order step sees.
fn enlarged_faces(p: &DenseProblem, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let face: Vec<usize> = (0..n).filter(|&i| x[i] > 1e-7).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| x[i] <= 1e-7).collect();
    let mut out = Vec::new();
    for (a, &i) in outside.iter().enumerate() {
        for j in std::iter::once(None).chain(outside[a + 1..].iter().copied().map(Some)) {
            let mut f = face.clone();
            f.push(i);
            f.extend(j);
            match solve_face_exact(p, &f) {
                Some(z) => out.push(z),
                None => {
                    let mut start: Vec<f64> = x.iter().map(|&v| if v > 1e-7 { v } else { 0.0 }).collect();
                    for &e in &f[face.len()..] {
                        start[e] = 1e-2;
                    }
                    out.extend(polish(p, &start, 1.0));
                }
            }
        }
    }
    out
}

enum FaceSolve {
    /// Point with its multipliers for the edge and mass constraints.
    Done(Vec<f64>, f64, f64),
    /// Position in the face of the coordinate to discard.
    Drop(usize),
    Failed,
}

fn newton_on_face(p: &DenseProblem, face: &[usize], x: &[f64], lambda0: f64) -> FaceSolve {
    let k = face.len();
    let mut pos = vec![None; x.len()];
    for (a, &i) in face.iter().enumerate() {
        pos[i] = Some(a);
    }
    let adj = |a: usize, b: usize| p.disjoint[face[a]].binary_search(&face[b]).is_ok();
    let total: f64 = face.iter().map(|&i| x[i]).sum();
    let mut xs: Vec<f64> = face.iter().map(|&i| x[i] / total).collect();
    let mut lambda = lambda0.max(1e-3);
    let ax = |xs: &[f64]| -> Vec<f64> {
        (0..k).map(|a| p.disjoint[face[a]].iter().filter_map(|&j| pos[j].map(|b| xs[b])).sum()).collect()
    };
    let mut mu = {
        let v = ax(&xs);
        (0..k).map(|a| p.gains[face[a]] + lambda * v[a]).sum::<f64>() / k as f64
    };
    let mut converged = false;
    for _ in 0..60 {
        let v = ax(&xs);
        let mut f: Vec<f64> = (0..k).map(|a| p.gains[face[a]] + lambda * v[a] - mu).collect();
        f.push(xs.iter().sum::<f64>() - 1.0);
        f.push(0.5 * xs.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() - p.target);
        let norm = f.iter().map(|e| e.abs()).fold(0.0, f64::max);
        if !norm.is_finite() {
            return FaceSolve::Failed;
        }
        if norm < 1e-14 {
            converged = true;
            break;
        }
        let mut jac = vec![vec![0.0; k + 2]; k + 2];
        for a in 0..k {
            for b in 0..k {
                if adj(a, b) {
                    jac[a][b] = lambda;
                }
            }
            jac[a][k] = v[a];
            jac[a][k + 1] = -1.0;
            jac[k][a] = 1.0;
            jac[k + 1][a] = v[a];
        }
        let Some(step) = solve_dense(jac, f.iter().map(|e| -e).collect()) else {
            // singular on this face: shed its lightest coordinate
            let lightest = (0..k).min_by(|&a, &b| xs[a].total_cmp(&xs[b])).expect("k >= 2");
            return FaceSolve::Drop(lightest);
        };
        for a in 0..k {
            xs[a] += step[a];
        }
        lambda += step[k];
        mu += step[k + 1];
    }
    if !converged || lambda < 0.0 {
        return FaceSolve::Failed;
    }
    let most_negative = (0..k).min_by(|&a, &b| xs[a].total_cmp(&xs[b])).expect("k >= 2");
    if xs[most_negative] < 0.0 {
        return FaceSolve::Drop(most_negative);
    }
    let mut out = vec![0.0; x.len()];
    for (a, &i) in face.iter().enumerate() {
        out[i] = xs[a];
    }
    FaceSolve::Done(out, lambda, mu)
}

/// Pulls `x` toward the uniform vector on singletons, which is feasible
/// whenever `s <= q`, until the edge constraint holds. The objective moves
/// by at most the mixing fraction times `obj(x)`.
fn repair(p: &DenseProblem, q: u32, x: &[f64]) -> (f64, f64) {
    let mut scratch = vec![0.0; x.len()];
    let mut anchor = vec![0.0; x.len()];
    for c in 0..q {
        anchor[(1usize << c) - 1] = 1.0 / q as f64;
    }
    let mix = |t: f64| -> Vec<f64> { x.iter().zip(&anchor).map(|(a, b)| (1.0 - t) * a + t * b).collect() };
    if p.slack(x, &mut scratch) >= 0.0 {
        return (p.objective(x), p.slack(x, &mut scratch));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if p.slack(&mix(mid), &mut scratch) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let y = mix(hi);
    (p.objective(&y), p.slack(&y, &mut scratch))
}

/// Best objective found by multistart augmented-Lagrangian ascent over all
/// `2^q - 1` coordinates. Knows nothing about support shapes; used as an
/// independent check of [`global_solve`]. Reliable for `q <= 4`; at `q = 5`
/// a few restarts per call are not always enough to find the best face.
///
/// Each restart ends with a short repair step that restores the edge
/// constraint exactly; restarts still violating it by more than `1e-12`
/// are discarded. Deterministic for a fixed `seed`.
pub fn brute_opt(q: u32, s: f64, restarts: usize, iters: usize, seed: u64) -> Result<f64> {
    if q > BRUTE_MAX_Q || q == 0 {
        return Err(Error::TooLarge(format!("brute_opt supports 1 <= q <= {BRUTE_MAX_Q}, got {q}")));
    }
    if !(s > 1.0) || s > q as f64 {
        return Err(invalid(format!("need 1 < s <= q, got s={s}, q={q}")));
    }
    if restarts == 0 {
        return Err(invalid("need at least one restart"));
    }
    let p = DenseProblem::new(q, s);
    let n = p.gains.len();
    let results: Vec<(f64, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            // sparse Dirichlet-like starts so different faces get explored;
            // odd restarts spread over only a handful of sets
            let mut x = vec![0.0; n];
            if r % 2 == 0 {
                for v in x.iter_mut() {
                    if rng.gen_bool(0.5) {
                        *v = -rng.gen::<f64>().ln();
                    }
                }
            } else {
                for _ in 0..rng.gen_range(2..=q as usize + 2) {
                    x[rng.gen_range(0..n)] = -rng.gen::<f64>().ln();
                }
            }
            if x.iter().all(|&v| v == 0.0) {
                x[rng.gen_range(0..n)] = 1.0;
            }
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            // the initial penalty decides which basin the early iterates fall into
            let rho0 = 10f64.powf(rng.gen_range(-1.0..3.0));
            let (y, lambda) = local_ascent(&p, x, iters, rho0);
            [Some(y.clone()), polish(&p, &y, lambda), project_face(&p, &y)]
                .into_iter()
                .flatten()
                .chain(enlarged_faces(&p, &y))
                .map(|z| repair(&p, q, &z))
                .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    results
        .into_iter()
        .filter(|&(_, slack)| slack >= -1e-12)
        .map(|(o, _)| o)
        .fold(None, |acc: Option<f64>, o| Some(acc.map_or(o, |a| a.max(o))))
        .ok_or_else(|| Error::NoSolution(format!("no restart reached feasibility for q={q}, s={s}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorsets::{classify_support, esum, feasible, obj, support_graph, vsum, SupportClass};
    use approx::assert_abs_diff_eq;

    fn p(sizes: &[u32]) -> SizedCandidate {
        SizedCandidate::partition(sizes.to_vec()).unwrap()
    }

    #[test]
    fn pk_one_doubled_class() {
        let ln2 = 2f64.ln();
        for s in 2..=12u32 {
            let mut sizes = vec![2];
            sizes.extend(vec![1; s as usize]);
            let pt = solve_pk(&p(&sizes), s as f64).unwrap().unwrap();
            let sf = s as f64;
            assert_abs_diff_eq!(pt.lambda, sf * ln2, epsilon = 1e-12);
            assert_abs_diff_eq!(pt.mu, -(sf - 1.0) / (sf + 1.0) * ln2, epsilon = 1e-12);
            assert_abs_diff_eq!(pt.objective, 2.0 / (sf + 1.0) * ln2, epsilon = 1e-12);
            assert!(pt.feasible);
        }
    }

    #[test]
    fn pk_balanced() {
        let pt = solve_pk(&p(&[3, 3, 3, 3]), 4.0).unwrap().unwrap();
        assert_abs_diff_eq!(pt.objective, 3f64.ln(), epsilon = 1e-15);
        assert!(pt.alphas.iter().all(|&a| (a - 0.25).abs() < 1e-15));
    }

    #[test]
    fn pk_thirteen_colors_eleven_parts() {
        let mut sizes = vec![2, 2];
        sizes.extend(vec![1; 9]);
        let pt = solve_pk(&p(&sizes), 10.0).unwrap().unwrap();
        // the closed form reproduces the explicit 11-class vector
        let b1 = 1.0 / 11.0 + 3.0 * 5f64.sqrt() / 110.0;
        let b3 = 1.0 / 11.0 - 5f64.sqrt() / 165.0;
        assert_abs_diff_eq!(pt.alphas[0], b1, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.alphas[10], b3, epsilon = 1e-12);
        assert!(pt.objective > 0.3 * 2f64.ln());
        assert_abs_diff_eq!(obj(&pt.weight_vector()).unwrap(), pt.objective, epsilon = 1e-12);
    }

    #[test]
    fn pk_errors_and_rejections() {
        assert!(solve_pk(&p(&[2, 1]), 2.5).is_err());
        assert!(solve_pk(&p(&[2, 1]), 1.0).is_err());
        let qc = SizedCandidate::near_partition((1, 1), vec![1]).unwrap();
        assert!(solve_pk(&qc, 2.0).is_err());
        // sizes (10, 10, 10, 1) at s = 1.5: μ' ≈ 0.955 > ln 1, so α_4 < 0
        assert_eq!(solve_pk(&p(&[10, 10, 10, 1]), 1.5).unwrap(), None);
    }

    #[test]
    fn pk_equal_sizes_degenerate() {
        for (sizes, s) in [(vec![2, 2, 2], 2.5), (vec![1, 1, 1, 1], 2.0), (vec![3, 3, 3, 3, 3], 1.2)] {
            let pt = solve_pk(&p(&sizes), s).unwrap().unwrap();
            assert!(pt.feasible, "{sizes:?} {s}");
            assert!(pt.alphas.iter().all(|&a| a > 0.0));
            assert_abs_diff_eq!(pt.objective, (sizes[0] as f64).ln(), epsilon = 1e-15);
        }
    }

    #[test]
    fn qk_examples() {
        let c = SizedCandidate::near_partition((2, 1), vec![]).unwrap();
        let pt = solve_qk(&c, 1.2).unwrap().unwrap();
        let (r1, r2) = pt.residuals(1.2);
        assert!(r1 <= 1e-9 && r2 <= 1e-9);
        assert!(pt.feasible);
        let v = pt.weight_vector();
        assert_abs_diff_eq!(vsum(&v), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(esum(&v), (1.2 - 1.0) / 2.4, epsilon = 1e-12);
        assert_abs_diff_eq!(obj(&v).unwrap(), pt.objective, epsilon = 1e-12);
        assert_eq!(classify_support(&support_graph(&v)), SupportClass::NearPartition(2));

        let c11 = SizedCandidate::near_partition((1, 1), vec![]).unwrap();
        let pt = solve_qk(&c11, 1.5).unwrap().unwrap();
        assert!(pt.feasible);
        assert!(feasible(&pt.weight_vector(), 1.5, 1e-9).unwrap().feasible);

        assert!(solve_qk(&SizedCandidate::near_partition((1, 1), vec![1]).unwrap(), 2.0).is_err());
        assert!(solve_qk(&p(&[1, 1]), 1.5).is_err());
    }

    #[test]
    fn qk_negative_beta_is_rejected() {
        // three parts with a large merged pair at s well below k - 1
        let c = SizedCandidate::near_partition((1, 1), vec![5]).unwrap();
        let lambda_branch = solve_qk(&c, 1.5).unwrap();
        if let Some(pt) = lambda_branch {
            assert!(*pt.alphas.last().unwrap() > 0.0);
        }
        for q in 3..=8 {
            for k in 2..=q {
                for c in enum_q_candidates(q, k).unwrap() {
                    for s in [1.1, 1.7, 2.3, 3.6, 5.5] {
                        if (k - 1) as f64 == s {
                            continue;
                        }
                        if let Some(pt) = solve_qk(&c, s).unwrap() {
                            assert!(*pt.alphas.last().unwrap() > 0.0);
                            assert!(pt.alphas.iter().all(|&a| a >= -NEG_TOL));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn global_examples() {
        let r = global_solve(5, 5.0, SolveOptions::default()).unwrap();
        assert_eq!(r.opt_value, 0.0);
        assert_eq!(r.best.candidate.sizes, vec![1; 5]);

        let r = global_solve(13, 10.0, SolveOptions::default()).unwrap();
        let claimed = (2.0 / 11.0 + 3.0 * 5f64.sqrt() / 55.0) * 2f64.ln();
        assert!(r.opt_value >= claimed - 1e-12);
        assert!(r.opt_value > 0.3 * 2f64.ln());

        assert!(global_solve(3, 1.0, SolveOptions::default()).is_err());
        assert!(global_solve(3, 3.5, SolveOptions::default()).is_err());
        assert!(global_solve(31, 3.0, SolveOptions::default()).is_err());
    }

    #[test]
    fn s_plus_one_is_balanced_and_unique() {
        for s in 2..=10u32 {
            let r = global_solve(s + 1, s as f64, SolveOptions::default()).unwrap();
            assert!(r.ties.is_empty());
            let mut want = vec![2];
            want.extend(vec![1; s as usize - 1]);
            assert_eq!(r.best.candidate.sizes, want);
            assert!(r.best.alphas.iter().all(|&a| (a - 1.0 / s as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn reported_points_are_feasible_and_tight() {
        for q in 2..=9 {
            for i in 1..=7 {
                let s = 1.0 + (q as f64 - 1.0) * i as f64 / 7.0;
                let r = global_solve(q, s, SolveOptions { paranoid: true }).unwrap();
                for pt in std::iter::once(&r.best).chain(&r.ties) {
                    let v = pt.weight_vector();
                    assert_abs_diff_eq!(vsum(&v), 1.0, epsilon = 1e-9);
                    assert_abs_diff_eq!(esum(&v), (s - 1.0) / (2.0 * s), epsilon = 1e-9);
                    assert_abs_diff_eq!(obj(&v).unwrap(), pt.objective, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn paranoid_sweep_agrees() {
        for q in 2..=9 {
            for i in 1..=11 {
                let s = 1.0 + (q as f64 - 1.0) * i as f64 / 11.0;
                let a = global_solve(q, s, SolveOptions::default()).unwrap();
                let b = global_solve(q, s, SolveOptions { paranoid: true }).unwrap();
                assert!(b.candidates_evaluated >= a.candidates_evaluated);
                assert_abs_diff_eq!(a.opt_value, b.opt_value, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn opt_decreases_in_s() {
        for q in 2..=10 {
            let grid: Vec<f64> = (1..=20).map(|i| 1.0 + (q as f64 - 1.0) * i as f64 / 20.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&s| global_solve(q, s, SolveOptions::default()).unwrap().opt_value).collect();
            for w in vals.windows(2) {
                assert!(w[0] > w[1], "q={q}: {vals:?}");
            }
            for (&s, &v) in grid.iter().zip(&vals) {
                assert!(v <= (q as f64).ln() - s.ln() + 1e-12);
            }
        }
    }

    #[test]
    fn integer_s_optimum_is_a_partition() {
        for q in 2..=10u32 {
            for s in 2..=q {
                let r = global_solve(q, s as f64, SolveOptions::default()).unwrap();
                assert_eq!(r.best.candidate.kind, CandidateKind::P);
                assert!(r.ties.iter().all(|t| t.candidate.kind == CandidateKind::P));
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let r = global_solve(3, 1.5, SolveOptions::default()).unwrap();
        let v = r.to_json();
        for key in ["q", "s", "opt", "best", "ties", "evaluated"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["best"]["kind"], "Q");
        assert_eq!(v["best"]["merged"], json!([1, 2]));
    }

    #[test]
    fn simplex_projection() {
        let mut y = vec![0.5, 0.5, 0.5];
        project_simplex(&mut y);
        assert!(y.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let mut y = vec![2.0, -1.0, 0.0];
        project_simplex(&mut y);
        assert_eq!(y, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn brute_small_cases() {
        assert_abs_diff_eq!(brute_opt(2, 2.0, 16, 3000, 1).unwrap(), 0.0, epsilon = 1e-9);
        let g = global_solve(3, 2.0, SolveOptions::default()).unwrap().opt_value;
        assert_abs_diff_eq!(brute_opt(3, 2.0, 64, 4000, 3).unwrap(), g, epsilon = 1e-6);
        let g = global_solve(2, 1.5, SolveOptions::default()).unwrap().opt_value;
        assert_abs_diff_eq!(brute_opt(2, 1.5, 64, 4000, 5).unwrap(), g, epsilon = 1e-6);
        assert!(brute_opt(6, 2.0, 1, 10, 0).is_err());
        assert_eq!(brute_opt(3, 2.5, 8, 500, 9).unwrap(), brute_opt(3, 2.5, 8, 500, 9).unwrap());
    }

    #[test]
    fn brute_matches_q4() {
        let g = global_solve(4, 2.5, SolveOptions::default()).unwrap().opt_value;
        assert_abs_diff_eq!(brute_opt(4, 2.5, 64, 4000, 11).unwrap(), g, epsilon = 1e-6);
    }
}
