//! Continuous relaxation: class sizes become real and equal to the weights,
//! leaving `max F(α) = Σ α_i ln α_i` subject to `Σ α_i = 1`,
//! `Σ α_i² = 1/s` and `α_i >= δ`.
//!
//! Optimal points pin `ℓ` coordinates at the floor `δ` and take at most two
//! distinct values on the rest, so the solver below only has to search `ℓ`.

use std::f64::consts::{FRAC_PI_3, PI};

use crate::error::{invalid, Error, Result};
use crate::fmt::fmt_f64;

/// `x ln y` with `0 ln 0 = 0` and `x ln 0 = -inf` for `x != 0`.
pub fn xlogy(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        x * y.ln()
    }
}

/// `Σ α ln α`, or `-inf` if some coordinate is negative.
pub fn entropy_like(alphas: &[f64]) -> f64 {
    if alphas.iter().any(|&a| a < 0.0) {
        return f64::NEG_INFINITY;
    }
    alphas.iter().map(|&a| xlogy(a, a)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSolution {
    pub k: usize,
    pub delta: f64,
    /// Number of coordinates pinned at `delta`.
    pub ell: usize,
    /// `s (1 - ℓδ)² / (1 - ℓ s δ²)`.
    pub s_star: f64,
    /// Nonincreasing.
    pub alphas: Vec<f64>,
    pub f: f64,
}

fn s_star(s: f64, delta: f64, ell: usize) -> Option<f64> {
    let l = ell as f64;
    let denom = 1.0 - l * s * delta * delta;
    if denom <= 0.0 || 1.0 - l * delta <= 0.0 {
        return None;
    }
    Some(s * (1.0 - l * delta).powi(2) / denom)
}

/// `(x, y)` with `x >= y`, `(m-1)x + y = 1` and `(m-1)x² + y² = 1/t`.
pub(crate) fn two_values(m: usize, t: f64) -> Option<(f64, f64)> {
    if m == 1 {
        return ((t - 1.0).abs() < 1e-12).then_some((1.0, 1.0));
    }
    let mf = m as f64;
    let disc = 1.0 - mf * (1.0 - 1.0 / t) / (mf - 1.0);
    if disc < -1e-14 {
        return None;
    }
    let x = (1.0 + disc.max(0.0).sqrt()) / mf;
    Some((x, 1.0 - (mf - 1.0) * x))
}

/// Best local maximum of the relaxation with `k` coordinates and floor
/// `delta`, searching every pin count `ℓ`.
pub fn relaxed_solve(s: f64, k: usize, delta: f64) -> Result<RelaxedSolution> {
    if !(s > 1.0) {
        return Err(invalid(format!("s must exceed 1, got {s}")));
    }
    let lo = s.ceil() as usize;
    if k < lo {
        return Err(invalid(format!("k={k} is below ceil(s)={lo}")));
    }
    if !(delta >= 0.0) || delta >= 1.0 / k as f64 {
        return Err(invalid(format!("need 0 <= delta < 1/k, got {delta}")));
    }
    let mut best: Option<RelaxedSolution> = None;
    for ell in 0..=k - lo {
        let Some(t) = s_star(s, delta, ell) else { continue };
        let m = k - ell;
        // free block size must equal ceil(s*), up to rounding of s*
        let ceil_t = if (t - t.round()).abs() < 1e-12 { t.round() } else { t.ceil() };
        if ceil_t as usize != m {
            continue;
        }
        let Some((x, y)) = two_values(m, t) else { continue };
        let scale = 1.0 - ell as f64 * delta;
        let (x, y) = (x * scale, y * scale);
        if !(y > delta) && !(m == 1 && y >= delta) {
            continue;
        }
        let mut alphas = vec![x; m - 1];
        alphas.push(y);
        alphas.extend(std::iter::repeat_n(delta, ell));
        let f = entropy_like(&alphas);
        if best.as_ref().is_none_or(|b| f > b.f) {
            best = Some(RelaxedSolution { k, delta, ell, s_star: t, alphas, f });
        }
    }
    best.ok_or_else(|| Error::NoSolution(format!("no pin count fits s={s}, k={k}, delta={delta}")))
}

/// Upper bound on `F` when `ℓ` coordinates sit at `delta`:
/// `(1 - ℓδ)[ln(1 - ℓδ) - ln s*] + ℓδ ln δ`.
pub fn relaxed_bound(s: f64, delta: f64, ell: usize) -> Result<f64> {
    if !(s > 1.0) || !(delta >= 0.0) {
        return Err(invalid(format!("need s > 1 and delta >= 0, got s={s}, delta={delta}")));
    }
    let t = s_star(s, delta, ell)
        .ok_or_else(|| invalid(format!("1 - ℓsδ² must be positive (s={s}, delta={delta}, ell={ell})")))?;
    let pinned = ell as f64 * delta;
    Ok((1.0 - pinned) * ((1.0 - pinned).ln() - t.ln()) + xlogy(pinned, delta))
}

fn rho(s: f64) -> f64 {
    ((3.0 - s) / (3.0 * s)).sqrt()
}

fn check_s3(s: f64) -> Result<()> {
    if !(s > 1.0 && s <= 3.0) {
        return Err(invalid(format!("the three-coordinate form needs 1 < s <= 3, got {s}")));
    }
    Ok(())
}

/// Three coordinates on the circle `Σ α = 1`, `Σ α² = 1/s`.
pub fn theta_param(s: f64, theta: f64) -> Result<[f64; 3]> {
    check_s3(s)?;
    if !(0.0..=2.0 * PI).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0, 2π], got {theta}")));
    }
    let r = rho(s);
    let c = r / 6f64.sqrt() * theta.cos();
    let d = r / 2f64.sqrt() * theta.sin();
    Ok([1.0 / 3.0 + c + d, 1.0 / 3.0 + c - d, 1.0 / 3.0 - 2.0 * c])
}

fn theta_derivs(s: f64, theta: f64) -> [f64; 3] {
    let r = rho(s);
    let c = -r / 6f64.sqrt() * theta.sin();
    let d = r / 2f64.sqrt() * theta.cos();
    [c + d, c - d, -2.0 * c]
}

/// `F(θ)`; `-inf` where a coordinate is negative.
pub fn f_theta(s: f64, theta: f64) -> Result<f64> {
    Ok(entropy_like(&theta_param(s, theta)?))
}

/// Exact `F''(θ) = Σ (α')²/α + α'' ln α`, using `α'' = 1/3 - α`.
pub fn f_theta_second(s: f64, theta: f64) -> Result<f64> {
    let a = theta_param(s, theta)?;
    let da = theta_derivs(s, theta);
    Ok((0..3).map(|i| da[i] * da[i] / a[i] + (1.0 / 3.0 - a[i]) * a[i].ln()).sum())
}

/// Exact `F'(θ) = Σ α' ln α`.
pub fn f_theta_first(s: f64, theta: f64) -> Result<f64> {
    let a = theta_param(s, theta)?;
    let da = theta_derivs(s, theta);
    Ok((0..3).map(|i| da[i] * a[i].ln()).sum())
}

/// Left end of the admissible `θ` range: where the smallest coordinate
/// reaches `delta`, or 0 when it never drops that low.
pub fn theta0(s: f64, delta: f64) -> Result<f64> {
    check_s3(s)?;
    let r = rho(s);
    let lowest = 1.0 / 3.0 - 2.0 * r / 6f64.sqrt();
    if lowest >= delta || r == 0.0 {
        return Ok(0.0);
    }
    let c = ((1.0 / 3.0 - delta) * 6f64.sqrt() / (2.0 * r)).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// Finite-difference step for the derivatives at `π/3`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaProfile {
    pub s: f64,
    /// `(θ, F(θ))` on `[0, π/3]`, skipping points with a nonpositive
    /// coordinate.
    pub points: Vec<(f64, f64)>,
    /// Central-difference `F'(π/3)`.
    pub d1_fd: f64,
    /// Central-difference `F''(π/3)`.
    pub d2_fd: f64,
    /// Exact `F''(π/3)`.
    pub d2_exact: f64,
}

impl ThetaProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,F\n");
        for (t, f) in &self.points {
            out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*f)));
        }
        out
    }
}

/// Samples `F(θ)` on `grid` equally spaced points of `[0, π/3]`.
pub fn f_theta_profile(s: f64, grid: usize) -> Result<ThetaProfile> {
    check_s3(s)?;
    if grid < 3 {
        return Err(invalid(format!("grid must have at least 3 points, got {grid}")));
    }
    let points = (0..grid)
        .map(|j| FRAC_PI_3 * j as f64 / (grid - 1) as f64)
        .filter_map(|t| {
            let a = theta_param(s, t).ok()?;
            a.iter().all(|&x| x > 0.0).then(|| (t, entropy_like(&a)))
        })
        .collect();
    let h = FD_STEP;
    let f = |t: f64| entropy_like(&theta_param(s, t).expect("θ near π/3 is in range"));
    let (fp, f0, fm) = (f(FRAC_PI_3 + h), f(FRAC_PI_3), f(FRAC_PI_3 - h));
    Ok(ThetaProfile {
        s,
        points,
        d1_fd: (fp - fm) / (2.0 * h),
        d2_fd: (fp - 2.0 * f0 + fm) / (h * h),
        d2_exact: f_theta_second(s, FRAC_PI_3)?,
    })
}
