//! Balanced vectors and the weight vectors that beat them.
//!
//! The `s`-balanced vector for `q` puts weight `1/s` on each class of a
//! balanced `s`-partition of `[q]`; it is what the Turán graph realizes.
//! Everything else here is a partition-supported vector whose objective is
//! strictly larger.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::colorsets::{ColorSet, WeightVector};
use crate::error::{invalid, Result};
use crate::fmt::json_f64;

/// Strict inequalities closer than this are reported as inconclusive.
pub const MARGIN_TOL: f64 = 1e-12;

/// Class sizes of a balanced `s`-partition of `[q]`, larger classes first.
pub fn balanced_sizes(q: u32, s: u32) -> Result<Vec<u32>> {
    if s == 0 || s > q {
        return Err(invalid(format!("need 1 <= s <= q, got s={s}, q={q}")));
    }
    let (t, r) = (q / s, q % s);
    Ok((0..s).map(|i| if i < r { t + 1 } else { t }).collect())
}

/// Weight vector with weight `w_i` on the `i`-th run of `sizes` consecutive
/// colors.
pub(crate) fn runs_vector(sizes: &[u32], weights: &[f64]) -> Result<WeightVector> {
    let q: u32 = sizes.iter().sum();
    let mut v = WeightVector::new(q.max(1));
    let mut start = 1;
    for (&len, &w) in sizes.iter().zip(weights) {
        v.add(ColorSet::range(start, len), w)?;
        start += len;
    }
    Ok(v)
}

/// The `s`-balanced vector for `q`, classes laid out as ascending runs.
pub fn balanced_vector(q: u32, s: u32) -> Result<WeightVector> {
    let sizes = balanced_sizes(q, s)?;
    runs_vector(&sizes, &vec![1.0 / s as f64; sizes.len()])
}

/// `ln q - ln s - s²/(2q²)`, a lower bound on the balanced objective.
pub fn balanced_lower_bound(q: u32, s: u32) -> Result<f64> {
    if s == 0 || s > q {
        return Err(invalid(format!("need 1 <= s <= q, got s={s}, q={q}")));
    }
    let (q, s) = (q as f64, s as f64);
    Ok(q.ln() - s.ln() - s * s / (2.0 * q * q))
}

/// Weight on each of the two doubled classes of the 13-color vector.
pub fn beta_pair() -> f64 {
    1.0 / 11.0 + 3.0 * 5f64.sqrt() / 110.0
}

/// Weight on each of the nine singleton classes of the 13-color vector.
pub fn beta_single() -> f64 {
    1.0 / 11.0 - 5f64.sqrt() / 165.0
}

/// The 11-class vector over 13 colors that beats the 10-balanced one:
/// `{1,2}` and `{3,4}` carry [`beta_pair`], colors 5 through 13 carry
/// [`beta_single`].
pub fn q13_vector() -> WeightVector {
    let mut sizes = vec![2, 2];
    sizes.extend([1; 9]);
    let mut w = vec![beta_pair(); 2];
    w.extend([beta_single(); 9]);
    runs_vector(&sizes, &w).expect("fixed layout is valid")
}

/// Replaces three doubled and seven singleton classes of the `s`-balanced
/// vector for `q` by a copy of [`q13_vector`] scaled by `10/s`.
///
/// Needs `s >= 10` and `s + 3 <= q <= 2s - 7`. Returns `None` when the
/// balanced vector lacks the ten classes to replace, which cannot happen
/// inside that band.
pub fn embed_counterexample(s: u32, q: u32) -> Result<Option<WeightVector>> {
    if s < 10 || q < s + 3 || q + 7 > 2 * s {
        return Err(invalid(format!("need s >= 10 and s+3 <= q <= 2s-7, got s={s}, q={q}")));
    }
    let sizes = balanced_sizes(q, s)?;
    let doubles: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] == 2).collect();
    let singles: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] == 1).collect();
    if doubles.len() < 3 || singles.len() < 7 {
        return Ok(None);
    }
    let balanced = balanced_vector(q, s)?;
    let mut runs = Vec::with_capacity(s as usize);
    let mut start = 1;
    for &len in &sizes {
        runs.push(ColorSet::range(start, len));
        start += len;
    }

    // the 13 colors of the replaced block
    let mut block: Vec<u32> = Vec::with_capacity(13);
    for &i in &doubles[..3] {
        block.extend(runs[i].colors());
    }
    for &i in &singles[..7] {
        block.extend(runs[i].colors());
    }
    let mut out = balanced;
    for &i in doubles[..3].iter().chain(&singles[..7]) {
        out.remove(&runs[i]);
    }
    let scale = 10.0 / s as f64;
    for (set, w) in q13_vector().iter() {
        let mapped = ColorSet::new(set.colors().iter().map(|&c| block[c as usize - 1]))?;
        out.add(mapped, w * scale)?;
    }
    Ok(Some(out))
}

/// `50 t ln t <= r <= min(s/2, (3/2) t² ln² t)`.
pub fn family_hypothesis(s: u64, t: u64, r: u64) -> bool {
    let (s, t, r) = (s as f64, t as f64, r as f64);
    let lt = t.ln();
    50.0 * t * lt <= r && r <= (s / 2.0).min(1.5 * t * t * lt * lt)
}

/// Summary statistics of the family member `(s, t, r)`, without building
/// the weights.
#[derive(Clone, Copy, Debug)]
struct FamilyStats {
    s1: f64,
    x: f64,
    y: f64,
    /// Denominator `(s+1) sqrt(s var)` of the weights.
    denom: f64,
}

impl FamilyStats {
    fn new(s: u64, t: u64, r: u64) -> Self {
        let (sf, tf, rf) = (s as f64, t as f64, r as f64);
        let n = sf + 1.0;
        let (big, small) = ((tf + 1.0).ln(), tf.ln());
        let (c_big, c_small) = (rf - 1.0, sf - rf + 1.0);
        let s1 = (c_big * big + c_small * small) / n;
        // centered second moment; the size-1 class contributes (0 - s1)²
        let var = (c_big * (big - s1).powi(2) + c_small * (small - s1).powi(2) + s1 * s1) / n;
        let x = rf / sf * big + (sf - rf) / sf * small;
        let y = s1 + (var / sf).sqrt();
        FamilyStats { s1, x, y, denom: n * (sf * var).sqrt() }
    }

    fn alpha(&self, s: u64, size: u64) -> f64 {
        ((size as f64).ln() - self.s1) / self.denom + 1.0 / (s as f64 + 1.0)
    }
}

/// One member of the `(s, t, r)` family: `s + 1` classes of sizes
/// `t+1` (`r-1` times), `t` (`s-r+1` times) and `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleReport {
    pub s: u64,
    pub t: u64,
    pub r: u64,
    pub q: u64,
    /// Balanced objective `(r/s) ln(t+1) + ((s-r)/s) ln t`.
    pub x: f64,
    /// Objective of the constructed vector.
    pub y: f64,
    /// `y - x`.
    pub margin: f64,
    pub sizes: Vec<u64>,
    pub alphas: Vec<f64>,
    /// The range conditions under which `y > x` is proven.
    pub hypothesis: bool,
    /// `y > x` with at least [`MARGIN_TOL`] to spare.
    pub beats_balanced: bool,
    /// `|y - x| < MARGIN_TOL`: too close to call in double precision.
    pub margin_too_small: bool,
    pub nonnegative: bool,
    /// `|Σα - 1|`.
    pub vsum_residual: f64,
    /// `|Σα² - 1/s|`.
    pub square_residual: f64,
    pub valid: bool,
}

impl CounterexampleReport {
    /// The weights as a partition-supported vector over `[q]`.
    pub fn weight_vector(&self) -> Result<WeightVector> {
        let q = u32::try_from(self.q).map_err(|_| invalid(format!("q={} does not fit in u32", self.q)))?;
        let sizes: Vec<u32> = self.sizes.iter().map(|&x| x as u32).collect();
        let v = runs_vector(&sizes, &self.alphas)?;
        debug_assert_eq!(v.q(), q);
        Ok(v)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s,
            "t": self.t,
            "r": self.r,
            "q": self.q,
            "X": json_f64(self.x),
            "Y": json_f64(self.y),
            "margin": json_f64(self.margin),
            "sizes": self.sizes,
            "alphas": self.alphas.iter().map(|&a| json_f64(a)).collect::<Vec<_>>(),
            "hypothesis": self.hypothesis,
            "beats_balanced": self.beats_balanced,
            "margin_too_small": self.margin_too_small,
            "nonnegative": self.nonnegative,
            "vsum_residual": json_f64(self.vsum_residual),
            "square_residual": json_f64(self.square_residual),
            "valid": self.valid,
        })
    }
}

fn check_family(s: u64, t: u64, r: u64) -> Result<()> {
    if t < 2 {
        return Err(invalid(format!("t must be at least 2, got {t}")));
    }
    if s < 1 || r == 0 || r >= s {
        return Err(invalid(format!("need 0 < r < s, got s={s}, r={r}")));
    }
    Ok(())
}

/// Builds the family member `(s, t, r)` and compares it with the balanced
/// vector for `q = st + r`.
pub fn construct_counterexample(s: u64, t: u64, r: u64) -> Result<CounterexampleReport> {
    check_family(s, t, r)?;
    let st = FamilyStats::new(s, t, r);
    let mut sizes = vec![t + 1; (r - 1) as usize];
    sizes.extend(std::iter::repeat_n(t, (s - r + 1) as usize));
    sizes.push(1);
    let alphas: Vec<f64> = sizes.iter().map(|&a| st.alpha(s, a)).collect();
    let sum: f64 = alphas.iter().sum();
    let sq: f64 = alphas.iter().map(|a| a * a).sum();
    let margin = st.y - st.x;
    let hypothesis = family_hypothesis(s, t, r);
    let beats = margin >= MARGIN_TOL;
    let nonnegative = alphas.iter().all(|&a| a >= 0.0);
    Ok(CounterexampleReport {
        s,
        t,
        r,
        q: s * t + r,
        x: st.x,
        y: st.y,
        margin,
        sizes,
        alphas,
        hypothesis,
        beats_balanced: beats,
        margin_too_small: margin.abs() < MARGIN_TOL,
        nonnegative,
        vsum_residual: (sum - 1.0).abs(),
        square_residual: (sq - 1.0 / s as f64).abs(),
        valid: hypothesis && beats && nonnegative,
    })
}

fn window(s: u64, q0: u64) -> std::ops::RangeInclusive<u64> {
    q0.saturating_sub(s).max(1)..=q0.saturating_add(s)
}

/// Every `q` within distance `s` of `q0` whose decomposition `q = st + r`
/// (`0 < r < s`) satisfies the family's range conditions.
pub fn scan_counterexamples(s: u64, q0: u64) -> Vec<u64> {
    if s < 2 {
        return Vec::new();
    }
    window(s, q0)
        .filter(|&q| {
            let (t, r) = (q / s, q % s);
            t >= 2 && r > 0 && family_hypothesis(s, t, r)
        })
        .collect()
}

/// Like [`scan_counterexamples`] but keeps every `q` whose family member
/// beats the balanced vector numerically with nonnegative weights, proven
/// range or not.
pub fn scan_counterexamples_numeric(s: u64, q0: u64) -> Vec<u64> {
    if s < 2 {
        return Vec::new();
    }
    window(s, q0)
        .into_par_iter()
        .filter(|&q| {
            let (t, r) = (q / s, q % s);
            if t < 2 || r == 0 {
                return false;
            }
            let st = FamilyStats::new(s, t, r);
            st.y - st.x >= MARGIN_TOL && st.alpha(s, 1) >= 0.0
        })
        .collect()
}
