//! Entry laws for random projection matrices and seeded sample streams.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// The generator behind every [`SeedSpec`].
pub type StreamRng = Xoshiro256PlusPlus;

/// A base seed plus a path of child indices (replicate, factor, ...).
///
/// Equal specs give identical streams. The path is folded through a 64-bit
/// mixing finalizer, so `(a, b)` and `(b, a)` name different streams.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_path: Vec<u64>,
}

impl SeedSpec {
    pub fn new(base_seed: u64) -> Self {
        Self {
            base_seed,
            stream_path: Vec::new(),
        }
    }

    /// Child spec with `child_index` appended to the path.
    pub fn derive(&self, child_index: u64) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.push(child_index);
        Self {
            base_seed: self.base_seed,
            stream_path,
        }
    }

    /// Child spec with several indices appended.
    pub fn derive_path(&self, indices: &[u64]) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.extend_from_slice(indices);
        Self {
            base_seed: self.base_seed,
            stream_path,
        }
    }

    /// 64-bit key of the stream.
    pub fn key(&self) -> u64 {
        let mut h = mix64(self.base_seed ^ 0x6a09_e667_f3bc_c908);
        for (depth, &idx) in self.stream_path.iter().enumerate() {
            h = mix64(h ^ mix64(idx.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN))));
        }
        h
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::seed_from_u64(self.key())
    }
}

/// Free-function form of [`SeedSpec::derive`].
pub fn derive_seed(seed: &SeedSpec, child_index: u64) -> SeedSpec {
    seed.derive(child_index)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mean-zero, unit-variance law of a single matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryDistribution {
    /// Standard normal.
    Gaussian,
    /// `±1/√δ` with probability `δ/2` each, `0` otherwise.
    SparseSign { delta: f64 },
}

impl EntryDistribution {
    pub fn sparse_sign(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Parameter {
                name: "delta",
                value: delta,
                reason: "sparsity must lie in (0, 1]",
            });
        }
        Ok(Self::SparseSign { delta })
    }

    /// Sparse sign law with `δ = 1/√d`.
    pub fn very_sparse(d: usize) -> Result<Self> {
        Self::sparse_sign(very_sparse_delta(d))
    }

    /// Probability that an entry is nonzero; 1 for Gaussian.
    pub fn delta(&self) -> f64 {
        match *self {
            Self::Gaussian => 1.0,
            Self::SparseSign { delta } => delta,
        }
    }

    /// `E X⁴` of the unit-variance law: 3 for Gaussian, `1/δ` for sparse sign.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Self::Gaussian => 3.0,
            Self::SparseSign { delta } => 1.0 / delta,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::SparseSign { .. })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian => Ok(()),
            Self::SparseSign { delta } => Self::sparse_sign(delta).map(|_| ()),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::SparseSign { delta } => {
                let u: f64 = rng.gen();
                if u >= delta {
                    0.0
                } else if u < 0.5 * delta {
                    -1.0 / delta.sqrt()
                } else {
                    1.0 / delta.sqrt()
                }
            }
        }
    }
}

/// How entries of a whole map are drawn.
///
/// [`DistFamily::VerySparse`] resolves per factor: a factor with `dᵢ` rows
/// uses `δᵢ = 1/√dᵢ`, so a TRP over `d = ∏dᵢ` ends up `1/√d` sparse overall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistFamily {
    Gaussian,
    Sparse { delta: f64 },
    VerySparse,
}

impl DistFamily {
    /// Entry law for a factor (or a conventional map) with `rows` rows.
    pub fn entry_for(&self, rows: usize) -> Result<EntryDistribution> {
        match *self {
            Self::Gaussian => Ok(EntryDistribution::Gaussian),
            Self::Sparse { delta } => EntryDistribution::sparse_sign(delta),
            Self::VerySparse => EntryDistribution::very_sparse(rows),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Sparse { .. } => "sparse",
            Self::VerySparse => "very_sparse",
        }
    }
}

/// Free-function form of [`EntryDistribution::fourth_moment`].
pub fn fourth_moment(dist: &EntryDistribution) -> f64 {
    dist.fourth_moment()
}

/// `1/√d`, the very sparse density for a `d`-dimensional input.
pub fn very_sparse_delta(d: usize) -> f64 {
    1.0 / (d.max(1) as f64).sqrt()
}

/// A `rows × cols` matrix of independent draws from `dist`, filled in
/// row-major order from the stream named by `seed`.
pub fn sample_matrix(
    dist: &EntryDistribution,
    rows: usize,
    cols: usize,
    seed: &SeedSpec,
) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Argument(format!("cannot sample a {rows}x{cols} matrix")));
    }
    dist.validate()?;
    let mut rng = seed.rng();
    let data = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
    Ok(DenseMatrix::from_parts(rows, cols, data))
}
