//! Closed-form isometry variance and the Monte-Carlo estimators used to
//! check it, plus the distortion statistics the experiments report.
//!
//! Every estimator takes a map factory `Fn(&SeedSpec) -> Result<P>` and a
//! root seed; trial `i` draws its map from `seed.derive(i)`. Trials run in
//! fixed-size chunks on the rayon pool and chunk statistics merge in chunk
//! order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::dist::SeedSpec;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm4_pow4, norm_sq, Vector};
use crate::projection::Projection;

const CHUNK: usize = 1024;

/// `Var ‖f(x)‖²` of a TRP(T) with i.i.d. unit-variance factor entries:
///
/// ```text
/// (1/(T·k))·(∏Δᵢ − 3)·‖x‖₄⁴ + (2/k)·‖x‖₂⁴
/// ```
///
/// `fourth_moments` holds one `Δᵢ` per factor; with a common `Δ` the product
/// is `Δᴺ`. The expression is exact for `N = 1`. For `N ≥ 2` it is exact when
/// `x` is a standard basis vector; for general `x` the true excess term also
/// depends on cross products of entries of `x`.
pub fn theoretical_variance(x: &[f64], fourth_moments: &[f64], k: usize, replicates: usize) -> f64 {
    let delta: f64 = fourth_moments.iter().product();
    let n2 = norm_sq(x);
    (delta - 3.0) * norm4_pow4(x) / (replicates as f64 * k as f64) + 2.0 * n2 * n2 / k as f64
}

/// Streaming mean/variance (Welford) with an order-fixed merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / n;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two values).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for RunningMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Self::new();
        iter.into_iter().for_each(|v| m.push(v));
        m
    }
}

/// Runs `trial(i)` for `i in 0..trials` in parallel chunks and merges the
/// per-chunk moments in order.
fn chunked_moments<F>(trials: usize, trial: F) -> Result<RunningMoments>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = RunningMoments::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                m.push(trial(i)?);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold(RunningMoments::new(), |mut acc, m| {
        acc.merge(m);
        acc
    }))
}

/// Summary of `‖f(x)‖²` over independent map draws.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryStats {
    /// Mean of `‖f(x)‖²`.
    pub mean_sq_norm: f64,
    /// Mean of `‖f(x)‖² / ‖x‖²`; `None` when `x = 0`.
    pub mean_sq_norm_ratio: Option<f64>,
    /// Unbiased sample variance of `‖f(x)‖²`.
    pub var_sq_norm: f64,
    /// Standard error of the mean ratio (of the raw mean when `x = 0`).
    pub std_error_mean: f64,
    pub trials: usize,
}

impl IsometryStats {
    pub fn is_degenerate(&self) -> bool {
        self.mean_sq_norm_ratio.is_none()
    }
}

/// Draws `trials` independent maps and summarizes `‖f(x)‖²`.
pub fn empirical_isometry<P, F>(factory: F, x: &[f64], trials: usize, seed: &SeedSpec) -> Result<IsometryStats>
where
    P: Projection,
    F: Fn(&SeedSpec) -> Result<P> + Sync,
{
    if trials < 2 {
        return Err(Error::Argument(format!("need at least 2 trials, got {trials}")));
    }
    let m = chunked_moments(trials, |i| {
        let map = factory(&seed.derive(i as u64))?;
        Ok(map.apply(x)?.norm_sq())
    })?;
    let x2 = norm_sq(x);
    let (ratio, se) = if x2 > 0.0 {
        (Some(m.mean() / x2), m.std_error() / x2)
    } else {
        (None, m.std_error())
    };
    Ok(IsometryStats {
        mean_sq_norm: m.mean(),
        mean_sq_norm_ratio: ratio,
        var_sq_norm: m.variance(),
        std_error_mean: se,
        trials,
    })
}

/// Pairwise distance distortion of one map over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    /// Mean of `‖f(xᵢ) − f(xⱼ)‖ / ‖xᵢ − xⱼ‖` over pairs `i ≠ j`.
    pub avg_ratio: f64,
    /// Sample standard deviation of the pair ratios.
    pub std_ratio: f64,
    /// One ratio per unordered pair `i < j` (ordered pairs repeat them).
    pub ratios: Vec<f64>,
    /// Pairs skipped because the points coincide.
    pub skipped_pairs: usize,
}

pub fn pairwise_distance_ratio<P>(points: &[Vector], map: &P) -> Result<DistortionReport>
where
    P: Projection + ?Sized,
{
    if points.len() < 2 {
        return Err(Error::Argument("need at least two points".into()));
    }
    let projected = points
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    let mut skipped_pairs = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let orig = dist_sq(&points[i], &points[j]);
            if orig == 0.0 {
                skipped_pairs += 1;
                continue;
            }
            ratios.push((dist_sq(&projected[i], &projected[j]) / orig).sqrt());
        }
    }
    if ratios.is_empty() {
        return Err(Error::Input("all points coincide".into()));
    }
    let m: RunningMoments = ratios.iter().copied().collect();
    Ok(DistortionReport {
        avg_ratio: m.mean(),
        std_ratio: m.std_dev(),
        ratios,
        skipped_pairs,
    })
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cosine-similarity RMSE across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineRmse {
    pub mean_rmse: f64,
    /// Standard deviation of the per-replication RMSE.
    pub std_dev: f64,
    /// `std_dev / √replications`.
    pub std_error: f64,
    pub per_replication: Vec<f64>,
}

/// Pairwise cosine similarities of a point set (`i < j` order).
pub fn pairwise_cosines(points: &[Vector]) -> Result<Vec<f64>> {
    let norms: Vec<f64> = points.iter().map(|p| p.norm()).collect();
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::Input(format!("point {i} has zero norm")));
    }
    let mut out = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(dot(&points[i], &points[j]) / (norms[i] * norms[j]));
        }
    }
    Ok(out)
}

/// RMSE of projected cosine similarities against `truth` for one map. A
/// point projected to zero contributes an estimated similarity of 0.
pub fn cosine_rmse_once<P>(points: &[Vector], truth: &[f64], map: &P) -> Result<f64>
where
    P: Projection + ?Sized,
{
    let projected = points
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = projected.iter().map(|p| p.norm()).collect();
    let mut sq = 0.0;
    let mut idx = 0;
    for i in 0..projected.len() {
        for j in i + 1..projected.len() {
            let den = norms[i] * norms[j];
            let est = if den > 0.0 {
                dot(&projected[i], &projected[j]) / den
            } else {
                0.0
            };
            let e = est - truth[idx];
            sq += e * e;
            idx += 1;
        }
    }
    Ok((sq / idx as f64).sqrt())
}

/// Draws a fresh map per replication and reports the RMSE of projected
/// pairwise cosine similarities.
pub fn cosine_similarity_rmse<P, F>(
    points: &[Vector],
    factory: F,
    replications: usize,
    seed: &SeedSpec,
) -> Result<CosineRmse>
where
    P: Projection,
    F: Fn(&SeedSpec) -> Result<P> + Sync,
{
    if points.len() < 2 {
        return Err(Error::Argument("need at least two points".into()));
    }
    if replications == 0 {
        return Err(Error::Argument("need at least one replication".into()));
    }
    let truth = pairwise_cosines(points)?;
    let per_replication = (0..replications)
        .into_par_iter()
        .map(|r| {
            let map = factory(&seed.derive(r as u64))?;
            cosine_rmse_once(points, &truth, &map)
        })
        .collect::<Result<Vec<_>>>()?;
    let m: RunningMoments = per_replication.iter().copied().collect();
    Ok(CosineRmse {
        mean_rmse: m.mean(),
        std_dev: m.std_dev(),
        std_error: m.std_error(),
        per_replication,
    })
}

/// Fraction of map draws with `|‖f(x)‖² − ‖x‖²| ≥ ε‖x‖²`.
pub fn tail_exceedance<P, F>(factory: F, x: &[f64], eps: f64, trials: usize, seed: &SeedSpec) -> Result<f64>
where
    P: Projection,
    F: Fn(&SeedSpec) -> Result<P> + Sync,
{
    if trials == 0 {
        return Err(Error::Argument("need at least one trial".into()));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
            reason: "threshold must be non-negative",
        });
    }
    let x2 = norm_sq(x);
    let m = chunked_moments(trials, |i| {
        let y2 = factory(&seed.derive(i as u64))?.apply(x)?.norm_sq();
        Ok(if (y2 - x2).abs() >= eps * x2 { 1.0 } else { 0.0 })
    })?;
    Ok(m.mean())
}

/// `|4⟨f(x), f(y)⟩ − (‖f(x+y)‖² − ‖f(x−y)‖²)|`; zero up to rounding for
/// any linear `f`.
pub fn polarization_check<P>(map: &P, x: &[f64], y: &[f64]) -> Result<f64>
where
    P: Projection + ?Sized,
{
    if x.len() != y.len() {
        return Err(Error::Dimension {
            op: "polarization_check",
            expected: x.len(),
            got: y.len(),
        });
    }
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let fx = map.apply(x)?;
    let fy = map.apply(y)?;
    let lhs = 4.0 * dot(&fx, &fy);
    let rhs = map.apply(&sum)?.norm_sq() - map.apply(&diff)?.norm_sq();
    Ok((lhs - rhs).abs())
}
