//! Run configuration and command-line parsing.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use trp_core::{DistFamily, MapKind};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Experiment {
    Distance,
    Cosine,
    Variance,
    Sketch,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Distance => "distance",
            Self::Cosine => "cosine",
            Self::Variance => "variance",
            Self::Sketch => "sketch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum MapChoice {
    Rp,
    Trp,
    #[value(name = "trp_t")]
    TrpT,
    /// Identity map (`k = d`); for debugging the pipeline.
    Identity,
}

impl MapChoice {
    pub fn kind(&self, replicates: usize) -> MapKind {
        match self {
            Self::Rp => MapKind::Rp,
            Self::Trp => MapKind::Trp,
            Self::TrpT => MapKind::TrpEnsemble { replicates },
            Self::Identity => MapKind::Identity,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rp => "rp",
            Self::Trp => "trp",
            Self::TrpT => "trp_t",
            Self::Identity => "identity",
        }
    }

    pub(crate) fn stream_id(&self) -> u64 {
        match self {
            Self::Rp => 0,
            Self::Trp => 1,
            Self::TrpT => 2,
            Self::Identity => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum DistChoice {
    Gaussian,
    /// Sparse sign entries with `δ = 1/3`.
    Sparse,
    /// Sparse sign entries with `δ = 1/√d` (per factor for TRPs).
    #[value(name = "very_sparse")]
    VerySparse,
}

/// Density of the `sparse` family.
pub const SPARSE_DELTA: f64 = 1.0 / 3.0;

impl DistChoice {
    pub fn family(&self) -> DistFamily {
        match self {
            Self::Gaussian => DistFamily::Gaussian,
            Self::Sparse => DistFamily::Sparse { delta: SPARSE_DELTA },
            Self::VerySparse => DistFamily::VerySparse,
        }
    }

    pub fn name(&self) -> &'static str {
        self.family().name()
    }

    pub(crate) fn stream_id(&self) -> u64 {
        match self {
            Self::Gaussian => 0,
            Self::Sparse => 1,
            Self::VerySparse => 2,
        }
    }
}

/// Test vector for the variance experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputVector {
    /// First standard basis vector.
    E1,
    /// Gaussian direction scaled to unit norm.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    Synthetic,
    Mnist(PathBuf),
}

/// A fully resolved experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub maps: Vec<MapChoice>,
    pub dists: Vec<DistChoice>,
    /// Input dimension (column dimension of the unfolding for `sketch`).
    pub d: usize,
    pub dims: Vec<usize>,
    pub k_sweep: Vec<usize>,
    /// Ensemble size `T` for `trp_t`.
    pub replicates: usize,
    pub n_points: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub data: DataSource,
    pub output: Option<PathBuf>,
    /// Map draws per replication (variance experiment).
    pub trials: usize,
    pub input: InputVector,
    /// Tensor side length, order and core rank (sketch experiment).
    pub side: usize,
    pub order: usize,
    pub rank: usize,
}

/// Default factorization of an input dimension into equal factors.
pub fn default_dims(d: usize) -> Option<Vec<usize>> {
    match d {
        2500 => return Some(vec![50, 50]),
        10_000 => return Some(vec![100, 100]),
        40_000 => return Some(vec![200, 200]),
        125_000 => return Some(vec![50, 50, 50]),
        784 => return Some(vec![28, 28]),
        _ => {}
    }
    let sq = (d as f64).sqrt().round() as usize;
    if sq * sq == d {
        return Some(vec![sq, sq]);
    }
    let cb = (d as f64).cbrt().round() as usize;
    if cb * cb * cb == d {
        return Some(vec![cb, cb, cb]);
    }
    None
}

/// Command-line flags.
#[derive(Debug, Parser)]
#[command(name = "trp", about = "Tensor random projection experiments", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Maps to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MapChoice::Rp, MapChoice::Trp, MapChoice::TrpT])]
    pub map: Vec<MapChoice>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [DistChoice::Gaussian])]
    pub dist: Vec<DistChoice>,
    /// Input dimension (ignored with --mnist, which fixes d = 784).
    #[arg(long)]
    pub d: Option<usize>,
    /// Factor dimensions, e.g. 50,50 (defaults to an equal split of d).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Range dimensions to sweep.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Replicates in the trp_t ensemble.
    #[arg(long = "T", default_value_t = 5)]
    pub t: usize,
    /// Number of data points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Independent map draws per sweep cell.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Local MNIST IDX image file.
    #[arg(long)]
    pub mnist: Option<PathBuf>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Map draws per replication for the variance experiment.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Test vector for the variance experiment.
    #[arg(long, value_enum, default_value_t = InputVector::E1)]
    pub input: InputVector,
    /// Tensor side length for the sketch experiment.
    #[arg(long, default_value_t = 900)]
    pub side: usize,
    /// Tensor order for the sketch experiment.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Tucker core rank for the sketch experiment.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
}

impl Args {
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let data = match (&self.mnist, self.experiment) {
            (Some(p), Experiment::Distance | Experiment::Cosine) => DataSource::Mnist(p.clone()),
            (Some(_), _) => {
                return Err(CliError::Config(format!(
                    "--mnist applies only to the distance and cosine experiments, not {}",
                    self.experiment.name()
                )))
            }
            (None, _) => DataSource::Synthetic,
        };
        let d = match (&data, self.experiment) {
            (DataSource::Mnist(_), _) => {
                if let Some(d) = self.d.filter(|&d| d != crate::data::MNIST_DIM) {
                    return Err(CliError::Config(format!("MNIST vectors have d = 784, not {d}")));
                }
                crate::data::MNIST_DIM
            }
            (_, Experiment::Sketch) => {
                if self.order < 2 {
                    return Err(CliError::Config("sketch experiment needs --order >= 2".into()));
                }
                let d = self
                    .side
                    .checked_pow(self.order as u32 - 1)
                    .ok_or_else(|| CliError::Config("tensor too large".into()))?;
                if self.d.is_some_and(|given| given != d) {
                    return Err(CliError::Config(format!(
                        "sketch column dimension is side^(order-1) = {d}; drop --d or make it match"
                    )));
                }
                d
            }
            (_, Experiment::Distance) => self.d.unwrap_or(2500),
            (_, Experiment::Cosine) => self.d.unwrap_or(10_000),
            (_, Experiment::Variance) => self.d.unwrap_or(2500),
        };
        let dims = match self.dims {
            Some(dims) => dims,
            None => default_dims(d).ok_or_else(|| {
                CliError::Config(format!("no default factorization for d = {d}; pass --dims"))
            })?,
        };
        let k_sweep = self.k.unwrap_or_else(|| match self.experiment {
            Experiment::Distance => vec![5, 10, 25, 50, 100],
            Experiment::Cosine => vec![50],
            Experiment::Variance => vec![10],
            Experiment::Sketch => vec![5, 10, 15, 20, 25],
        });
        let n_points = self.n.unwrap_or(match data {
            DataSource::Mnist(_) => 50,
            DataSource::Synthetic => 20,
        });
        let cfg = ExperimentConfig {
            experiment: self.experiment,
            maps: self.map,
            dists: self.dist,
            d,
            dims,
            k_sweep,
            replicates: self.t,
            n_points,
            replications: self.reps,
            base_seed: self.seed,
            data,
            output: self.out,
            trials: self.trials,
            input: self.input,
            side: self.side,
            order: self.order,
            rank: self.rank,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return fail(format!("invalid dims {:?}", self.dims));
        }
        let prod: usize = self.dims.iter().product();
        if prod != self.d {
            return fail(format!(
                "dims {} multiply to {prod}, not d = {}",
                dims_label(&self.dims),
                self.d
            ));
        }
        if self.k_sweep.is_empty() || self.k_sweep.contains(&0) {
            return fail("every k must be at least 1".into());
        }
        if self.replications == 0 {
            return fail("--reps must be at least 1".into());
        }
        if self.replicates == 0 {
            return fail("--T must be at least 1".into());
        }
        if self.maps.is_empty() || self.dists.is_empty() {
            return fail("need at least one map and one distribution".into());
        }
        if self.maps.contains(&MapChoice::Identity) && self.k_sweep.iter().any(|&k| k != self.d) {
            return fail(format!("identity map needs every k equal to d = {}", self.d));
        }
        match self.experiment {
            Experiment::Distance | Experiment::Cosine if self.n_points < 2 => {
                return fail("need at least two points".into())
            }
            Experiment::Variance if self.trials < 2 => return fail("--trials must be at least 2".into()),
            Experiment::Sketch => {
                if self.rank == 0 || self.rank > self.side {
                    return fail(format!("core rank {} must lie in 1..={}", self.rank, self.side));
                }
                if let Some(&k) = self.k_sweep.iter().find(|&&k| k > self.side) {
                    return fail(format!("k = {k} exceeds the {} rows of the unfolding", self.side));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// `d1xd2x...`
pub fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}
