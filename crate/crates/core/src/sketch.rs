//! Randomized low-rank approximation with random-projection sketches.
//!
//! The range finder forms `Z = XΩ`, orthonormalizes it (`Z = QR`) and returns
//! `X̂ = QQᵀX`. [`ssvr`] repeats that with `T` independent TRP sketches and
//! averages the `T` approximations with weight `1/T`. That is a plain average
//! of matrices, unlike the `1/√T` map average of [`crate::TrpEnsemble`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{sample_matrix, DistFamily, EntryDistribution, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{mode_n_product, qr_orthonormal, DenseMatrix, DenseTensor};
use crate::projection::{Projection, TensorRandomProjection};

/// Inputs of [`ssvr`].
#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    /// Factorization of the column dimension of the target matrix.
    pub dims: Vec<usize>,
    /// Sketch size.
    pub k: usize,
    /// Number of averaged replicates `T`.
    pub replicates: usize,
    pub family: DistFamily,
    pub seed: SeedSpec,
}

impl SketchConfig {
    fn validate(&self, x: &DenseMatrix) -> Result<()> {
        let d: usize = self.dims.iter().product();
        if d != x.cols() {
            return Err(Error::Dimension {
                op: "SketchConfig (product of dims vs matrix columns)",
                expected: x.cols(),
                got: d,
            });
        }
        if self.replicates == 0 {
            return Err(Error::Argument("need at least one replicate".into()));
        }
        check_sketch_size(self.k, x.rows())
    }
}

fn check_sketch_size(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::Argument(format!(
            "sketch size k = {k} must lie in 1..={m} (row count)"
        )));
    }
    Ok(())
}

/// A low-rank approximation and the rank actually captured.
#[derive(Debug, Clone)]
pub struct LowRankApprox {
    pub approx: DenseMatrix,
    /// Effective rank of the sketch (largest over replicates for [`ssvr`]).
    pub rank: usize,
    /// Set when some sketch had fewer than `k` independent columns.
    pub rank_deficient: bool,
}

/// `Z = XΩ`, computed by applying `omega` to each row of `X`.
pub fn sketch<P: Projection + ?Sized>(x: &DenseMatrix, omega: &P) -> Result<DenseMatrix> {
    if omega.input_dim() != x.cols() {
        return Err(Error::Dimension {
            op: "sketch",
            expected: x.cols(),
            got: omega.input_dim(),
        });
    }
    let k = omega.output_dim();
    let mut data = Vec::with_capacity(x.rows() * k);
    for i in 0..x.rows() {
        data.extend_from_slice(&omega.apply(x.row(i))?);
    }
    Ok(DenseMatrix::from_parts(x.rows(), k, data))
}

/// Range-finder approximation `QQᵀX` with `Q` from the sketch `XΩ`.
pub fn low_rank_approx<P: Projection + ?Sized>(x: &DenseMatrix, omega: &P) -> Result<LowRankApprox> {
    check_sketch_size(omega.output_dim(), x.rows())?;
    let z = sketch(x, omega)?;
    let qr = qr_orthonormal(&z)?;
    let coeffs = qr.q.t_matmul(x)?;
    Ok(LowRankApprox {
        approx: qr.q.matmul(&coeffs)?,
        rank: qr.rank,
        rank_deficient: !qr.is_full_rank(),
    })
}

/// Averages `replicates` range-finder approximations, replicate `t` sketching
/// with the map `factory(seed.derive(t))`.
pub fn averaged_approx<P, F>(x: &DenseMatrix, replicates: usize, factory: F, seed: &SeedSpec) -> Result<LowRankApprox>
where
    P: Projection,
    F: Fn(&SeedSpec) -> Result<P>,
{
    if replicates == 0 {
        return Err(Error::Argument("need at least one replicate".into()));
    }
    let mut sum = DenseMatrix::zeros(x.rows(), x.cols());
    let mut rank = 0;
    let mut rank_deficient = false;
    for t in 0..replicates {
        let omega = factory(&seed.derive(t as u64))?;
        let part = low_rank_approx(x, &omega)?;
        sum.add_assign(&part.approx);
        rank = rank.max(part.rank);
        rank_deficient |= part.rank_deficient;
    }
    if replicates > 1 {
        sum.scale_in_place(1.0 / replicates as f64);
    }
    Ok(LowRankApprox {
        approx: sum,
        rank,
        rank_deficient,
    })
}

/// Tensor sketching with variance reduction: `T` independent TRP sketches
/// (replicate `t` from `cfg.seed.derive(t)`, its factor `i` one level
/// deeper), averaged with weight `1/T`.
pub fn ssvr(x: &DenseMatrix, cfg: &SketchConfig) -> Result<LowRankApprox> {
    cfg.validate(x)?;
    averaged_approx(
        x,
        cfg.replicates,
        |s| TensorRandomProjection::build_family(&cfg.dims, cfg.k, cfg.family, s),
        &cfg.seed,
    )
}

/// `‖X − X̂‖_F / ‖X‖_F`
pub fn relative_error(x: &DenseMatrix, approx: &DenseMatrix) -> Result<f64> {
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::Input("relative error of a zero matrix is undefined".into()));
    }
    Ok(x.frobenius_distance(approx)? / norm)
}

/// Synthetic Tucker-form tensor and its noiseless part.
#[derive(Debug, Clone)]
pub struct TuckerSample {
    /// `𝒞 ×₁ Q₁ ⋯ ×_N Q_N`
    pub clean: DenseTensor,
    /// `clean` plus i.i.d. normal noise of variance `0.01·‖clean‖_F² / Iᴺ`.
    pub noisy: DenseTensor,
}

/// Noisy `I × ⋯ × I` (order `N`) tensor with an `r × ⋯ × r` core of
/// `Unif[0, 1]` entries.
pub fn tucker_synthetic(side: usize, order: usize, rank: usize, seed: &SeedSpec) -> Result<DenseTensor> {
    Ok(tucker_sample(side, order, rank, seed)?.noisy)
}

pub fn tucker_sample(side: usize, order: usize, rank: usize, seed: &SeedSpec) -> Result<TuckerSample> {
    if order == 0 || rank == 0 {
        return Err(Error::Argument("order and core rank must be at least 1".into()));
    }
    if rank > side {
        return Err(Error::Argument(format!(
            "core rank {rank} exceeds side length {side}"
        )));
    }
    let len = rank.pow(order as u32);
    let mut rng = seed.derive(0).rng();
    let core = DenseTensor::new(vec![rank; order], (0..len).map(|_| rng.gen::<f64>()).collect())?;
    tucker_from_core(&core, side, seed)
}

/// Tucker construction around a given core. Arm `n` is the `Q` factor of a
/// standard normal `I × r` matrix; noise scales with the clean tensor, so a
/// zero core yields the zero tensor.
pub fn tucker_from_core(core: &DenseTensor, side: usize, seed: &SeedSpec) -> Result<TuckerSample> {
    let mut clean = core.clone();
    for (n, &r) in core.dims().iter().enumerate() {
        if r > side {
            return Err(Error::Argument(format!("core extent {r} exceeds side length {side}")));
        }
        let a = sample_matrix(&EntryDistribution::Gaussian, side, r, &seed.derive(1).derive(n as u64))?;
        let arm = qr_orthonormal(&a)?;
        if !arm.is_full_rank() {
            return Err(Error::Input(format!("arm matrix {n} is rank deficient")));
        }
        clean = mode_n_product(&clean, n + 1, &arm.q)?;
    }
    let total = clean.len() as f64;
    let sigma = (0.01 * clean.frobenius_norm().powi(2) / total).sqrt();
    let mut rng = seed.derive(2).rng();
    let noisy_data = clean
        .data()
        .iter()
        .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let noisy = DenseTensor::new(clean.dims().to_vec(), noisy_data)?;
    Ok(TuckerSample { clean, noisy })
}
