//! Sweep orchestration: one record per (map, dist, k, replication, metric).

use rayon::prelude::*;
use trp_core::projection::{ConventionalRp, MapSpec, Projection};
use trp_core::sketch::{averaged_approx, low_rank_approx, relative_error, tucker_synthetic};
use trp_core::theory::{
    empirical_isometry, pairwise_cosines, pairwise_distance_ratio, cosine_rmse_once, theoretical_variance,
};
use trp_core::{mode_n_unfold, DenseMatrix, SeedSpec, TensorRandomProjection, Vector};

use crate::config::{DataSource, DistChoice, Experiment, ExperimentConfig, InputVector, MapChoice};
use crate::data::{gen_synthetic, load_mnist};
use crate::error::{CliError, Result};
use crate::records::{write_csv, ExperimentRecord};

const DATA_STREAM: u64 = 0;
const MAP_STREAM: u64 = 1;

/// One sweep cell.
#[derive(Debug, Clone, Copy)]
struct Cell {
    map: MapChoice,
    dist: DistChoice,
    k: usize,
}

impl Cell {
    fn seed(&self, root: &SeedSpec, rep: usize) -> SeedSpec {
        root.derive(MAP_STREAM).derive_path(&[
            self.map.stream_id(),
            self.dist.stream_id(),
            self.k as u64,
            rep as u64,
        ])
    }

    fn spec(&self, cfg: &ExperimentConfig) -> MapSpec {
        MapSpec::new(self.map.kind(cfg.replicates), cfg.dims.clone(), self.k, self.dist.family())
    }

    fn t(&self, cfg: &ExperimentConfig) -> usize {
        self.map.kind(cfg.replicates).replicates()
    }

    fn record(&self, cfg: &ExperimentConfig, rep: usize, metric: &str, value: f64, stderr: Option<f64>) -> ExperimentRecord {
        ExperimentRecord {
            experiment: cfg.experiment.name().to_string(),
            map: self.map.name().to_string(),
            dist: self.dist.name().to_string(),
            d: cfg.d,
            dims: cfg.dims.clone(),
            k: self.k,
            t: self.t(cfg),
            rep,
            metric: metric.to_string(),
            value,
            stderr,
        }
    }
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &map in &cfg.maps {
        for &dist in &cfg.dists {
            for &k in &cfg.k_sweep {
                out.push(Cell { map, dist, k });
            }
        }
    }
    out
}

/// Runs every (cell, replication) job in parallel and concatenates the
/// records in job order.
fn sweep<F>(cfg: &ExperimentConfig, job: F) -> Result<Vec<ExperimentRecord>>
where
    F: Fn(Cell, usize) -> Result<Vec<ExperimentRecord>> + Sync,
{
    let jobs: Vec<(Cell, usize)> = cells(cfg)
        .into_iter()
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let parts = jobs
        .into_par_iter()
        .map(|(c, r)| job(c, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn load_points(cfg: &ExperimentConfig, root: &SeedSpec) -> Result<Vec<Vector>> {
    match &cfg.data {
        DataSource::Synthetic => gen_synthetic(cfg.d, cfg.n_points, &root.derive(DATA_STREAM)),
        DataSource::Mnist(path) => load_mnist(path, cfg.n_points),
    }
}

/// Runs the configured experiment and returns its (unsorted) records.
pub fn run_records(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let root = SeedSpec::new(cfg.base_seed);
    match cfg.experiment {
        Experiment::Distance => distance(cfg, &root),
        Experiment::Cosine => cosine(cfg, &root),
        Experiment::Variance => variance(cfg, &root),
        Experiment::Sketch => sketch(cfg, &root),
    }
}

/// Runs the experiment and writes the CSV to `cfg.output` when set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let records = run_records(cfg)?;
    if let Some(path) = &cfg.output {
        write_csv(&records, path)?;
    }
    Ok(records)
}

fn distance(cfg: &ExperimentConfig, root: &SeedSpec) -> Result<Vec<ExperimentRecord>> {
    let points = load_points(cfg, root)?;
    sweep(cfg, |cell, rep| {
        let map = cell.spec(cfg).build(&cell.seed(root, rep))?;
        let report = pairwise_distance_ratio(&points, &map)?;
        let pairs = report.ratios.len() as f64;
        Ok(vec![
            cell.record(cfg, rep, "avg_ratio", report.avg_ratio, Some(report.std_ratio / pairs.sqrt())),
            cell.record(cfg, rep, "pair_std", report.std_ratio, None),
        ])
    })
}

fn cosine(cfg: &ExperimentConfig, root: &SeedSpec) -> Result<Vec<ExperimentRecord>> {
    let points = load_points(cfg, root)?;
    let truth = pairwise_cosines(&points)?;
    sweep(cfg, |cell, rep| {
        let map = cell.spec(cfg).build(&cell.seed(root, rep))?;
        let rmse = cosine_rmse_once(&points, &truth, &map)?;
        Ok(vec![cell.record(cfg, rep, "rmse", rmse, None)])
    })
}

fn variance(cfg: &ExperimentConfig, root: &SeedSpec) -> Result<Vec<ExperimentRecord>> {
    let x = match cfg.input {
        InputVector::E1 => Vector::basis(cfg.d, 0),
        InputVector::Random => {
            let g = gen_synthetic(cfg.d, 1, &root.derive(DATA_STREAM))?.remove(0);
            let n = g.norm();
            g.scaled(1.0 / n)
        }
    };
    sweep(cfg, |cell, rep| {
        let spec = cell.spec(cfg);
        let stats = empirical_isometry(|s| spec.build(s), &x, cfg.trials, &cell.seed(root, rep))?;
        let fourth: Vec<f64> = match cell.map {
            MapChoice::Rp => vec![cell.dist.family().entry_for(cfg.d)?.fourth_moment()],
            MapChoice::Identity => vec![3.0],
            MapChoice::Trp | MapChoice::TrpT => cfg
                .dims
                .iter()
                .map(|&di| cell.dist.family().entry_for(di).map(|e| e.fourth_moment()))
                .collect::<trp_core::Result<_>>()?,
        };
        let theory = theoretical_variance(&x, &fourth, cell.k, cell.t(cfg));
        Ok(vec![
            cell.record(cfg, rep, "mean_sq_norm", stats.mean_sq_norm, Some(stats.std_error_mean)),
            cell.record(cfg, rep, "var_sq_norm", stats.var_sq_norm, None),
            cell.record(cfg, rep, "theory_var", theory, None),
        ])
    })
}

fn sketch(cfg: &ExperimentConfig, root: &SeedSpec) -> Result<Vec<ExperimentRecord>> {
    let tensor = tucker_synthetic(cfg.side, cfg.order, cfg.rank, &root.derive(DATA_STREAM))?;
    let x: DenseMatrix = mode_n_unfold(&tensor, 1)?;
    if x.cols() != cfg.d {
        return Err(CliError::Config(format!(
            "unfolding has {} columns, expected {}",
            x.cols(),
            cfg.d
        )));
    }
    sweep(cfg, |cell, rep| {
        let seed = cell.seed(root, rep);
        let family = cell.dist.family();
        let approx = match cell.map {
            MapChoice::Rp => {
                let omega = ConventionalRp::build(cfg.d, cell.k, family.entry_for(cfg.d)?, &seed)?;
                low_rank_approx(&x, &omega)?
            }
            MapChoice::Identity => {
                let omega = cell.spec(cfg).build(&seed)?;
                low_rank_approx(&x, &omega as &dyn Projection)?
            }
            MapChoice::Trp | MapChoice::TrpT => averaged_approx(
                &x,
                cell.t(cfg),
                |s| TensorRandomProjection::build_family(&cfg.dims, cell.k, family, s),
                &seed,
            )?,
        };
        let err = relative_error(&x, &approx.approx)?;
        Ok(vec![cell.record(cfg, rep, "relative_error", err, None)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::summarize;

    fn base(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            maps: vec![MapChoice::Rp, MapChoice::Trp, MapChoice::TrpT],
            dists: vec![DistChoice::Gaussian],
            d: 36,
            dims: vec![6, 6],
            k_sweep: vec![3, 6],
            replicates: 3,
            n_points: 5,
            replications: 4,
            base_seed: 1,
            data: DataSource::Synthetic,
            output: None,
            trials: 50,
            input: InputVector::E1,
            side: 12,
            order: 2,
            rank: 2,
        }
    }

    #[test]
    fn record_counts_per_cell() {
        for exp in [Experiment::Distance, Experiment::Cosine, Experiment::Variance, Experiment::Sketch] {
            let mut cfg = base(exp);
            if exp == Experiment::Sketch {
                cfg.d = 12;
                cfg.dims = vec![3, 4];
            }
            let records = run_records(&cfg).unwrap();
            let metrics: std::collections::BTreeSet<_> = records.iter().map(|r| r.metric.clone()).collect();
            for metric in &metrics {
                let s = summarize(&records, metric);
                assert_eq!(s.len(), cfg.maps.len() * cfg.k_sweep.len());
                assert!(s.values().all(|m| m.count() == cfg.replications), "{exp:?} {metric}");
            }
        }
    }

    #[test]
    fn identity_distance_is_exactly_one() {
        let mut cfg = base(Experiment::Distance);
        cfg.maps = vec![MapChoice::Identity];
        cfg.k_sweep = vec![36];
        let records = run_records(&cfg).unwrap();
        assert!(records
            .iter()
            .filter(|r| r.metric == "avg_ratio")
            .all(|r| r.value == 1.0));
    }

    #[test]
    fn missing_mnist_is_io_error() {
        let mut cfg = base(Experiment::Cosine);
        cfg.data = DataSource::Mnist("/nonexistent/train-images-idx3-ubyte".into());
        assert_eq!(run_records(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn bad_dims_is_config_error() {
        let mut cfg = base(Experiment::Distance);
        cfg.dims = vec![5, 6];
        assert_eq!(run_records(&cfg).unwrap_err().exit_code(), 1);
    }
}
