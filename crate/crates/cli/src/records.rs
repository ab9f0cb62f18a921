//! Experiment output rows and their CSV form.
//!
//! Header: `experiment,map,dist,d,dims,k,T,rep,metric,value,stderr`. Dims are
//! written as `d1xd2x...`, floats in scientific notation with 17 significant
//! digits (exact round trip), and a missing standard error as an empty field.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use trp_core::theory::RunningMoments;

use crate::config::dims_label;
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 11] = [
    "experiment", "map", "dist", "d", "dims", "k", "T", "rep", "metric", "value", "stderr",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub map: String,
    pub dist: String,
    pub d: usize,
    pub dims: Vec<usize>,
    pub k: usize,
    pub t: usize,
    pub rep: usize,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl ExperimentRecord {
    fn sort_key(&self) -> (&str, &str, usize, usize, &str, &str) {
        (&self.experiment, &self.map, self.k, self.rep, &self.dist, &self.metric)
    }
}

/// Sorts by (experiment, map, k, rep), then dist and metric.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Csv(e.to_string())
}

/// Writes records (sorted) as CSV to any writer.
pub fn write_records<W: Write>(records: &[ExperimentRecord], writer: W) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &sorted {
        w.write_record([
            r.experiment.clone(),
            r.map.clone(),
            r.dist.clone(),
            r.d.to_string(),
            dims_label(&r.dims),
            r.k.to_string(),
            r.t.to_string(),
            r.rep.to_string(),
            r.metric.clone(),
            fmt_float(r.value),
            r.stderr.map(fmt_float).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Csv(e.to_string()))
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|e| match e {
        CliError::Csv(msg) => CliError::Csv(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_records(file)
}

pub fn read_records<R: std::io::Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::Csv(format!("unexpected header {header:?}")));
    }
    let bad = |field: &str, v: &str| CliError::Csv(format!("bad {field} field {v:?}"));
    let int = |field: &str, v: &str| v.parse::<usize>().map_err(|_| bad(field, v));
    let float = |field: &str, v: &str| v.parse::<f64>().map_err(|_| bad(field, v));
    rdr.records()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            let f = |i: usize| row.get(i).unwrap_or("");
            let dims = f(4)
                .split('x')
                .map(|s| int("dims", s))
                .collect::<Result<Vec<_>>>()?;
            Ok(ExperimentRecord {
                experiment: f(0).to_string(),
                map: f(1).to_string(),
                dist: f(2).to_string(),
                d: int("d", f(3))?,
                dims,
                k: int("k", f(5))?,
                t: int("T", f(6))?,
                rep: int("rep", f(7))?,
                metric: f(8).to_string(),
                value: float("value", f(9))?,
                stderr: match f(10) {
                    "" => None,
                    s => Some(float("stderr", s)?),
                },
            })
        })
        .collect()
}

/// Cell key used by [`summarize`]: (map, dist, k).
pub type CellKey = (String, String, usize);

/// Mean and spread of `metric` over replications, per (map, dist, k).
pub fn summarize(records: &[ExperimentRecord], metric: &str) -> BTreeMap<CellKey, RunningMoments> {
    let mut out: BTreeMap<CellKey, RunningMoments> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric) {
        out.entry((r.map.clone(), r.dist.clone(), r.k))
            .or_default()
            .push(r.value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(map: &str, k: usize, rep: usize, value: f64, stderr: Option<f64>) -> ExperimentRecord {
        ExperimentRecord {
            experiment: "distance".into(),
            map: map.into(),
            dist: "gaussian".into(),
            d: 2500,
            dims: vec![50, 50],
            k,
            t: 1,
            rep,
            metric: "avg_ratio".into(),
            value,
            stderr,
        }
    }

    fn to_string(records: &[ExperimentRecord]) -> String {
        let mut buf = Vec::new();
        write_records(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(to_string(&[]), "experiment,map,dist,d,dims,k,T,rep,metric,value,stderr\n");
    }

    #[test]
    fn row_format() {
        let s = to_string(&[rec("trp", 5, 0, 1.0, None)]);
        let row = s.lines().nth(1).unwrap();
        assert_eq!(row, "distance,trp,gaussian,2500,50x50,5,1,0,avg_ratio,1.0000000000000000e0,");
    }

    #[test]
    fn rows_are_sorted() {
        let s = to_string(&[
            rec("trp", 10, 1, 0.5, None),
            rec("rp", 10, 0, 0.5, None),
            rec("trp", 5, 3, 0.5, None),
            rec("trp", 10, 0, 0.5, None),
        ]);
        let keys: Vec<(String, String, String)> = s
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[1].to_string(), f[5].to_string(), f[7].to_string())
            })
            .collect();
        let want = [("rp", "10", "0"), ("trp", "5", "3"), ("trp", "10", "0"), ("trp", "10", "1")];
        for (got, want) in keys.iter().zip(want) {
            assert_eq!((got.0.as_str(), got.1.as_str(), got.2.as_str()), want);
        }
    }

    #[test]
    fn file_roundtrip_and_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records = vec![rec("rp", 5, 0, 0.123_456_789_012_345_67, Some(1e-300))];
        write_csv(&records, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), records);
        let err = write_csv(&records, &dir.path().join("missing/out.csv")).unwrap_err();
        assert!(err.to_string().contains("missing"));
        assert_eq!(err.exit_code(), 2);
    }

    proptest! {
        #[test]
        fn parse_back_reproduces_records(
            rows in proptest::collection::vec(
                (0usize..3, 1usize..200, 0usize..50, any::<f64>().prop_filter("finite", |v| v.is_finite()),
                 proptest::option::of(0.0f64..1e6), proptest::collection::vec(1usize..60, 1..4)),
                0..20)
        ) {
            let maps = ["rp", "trp", "trp_t"];
            let mut records: Vec<ExperimentRecord> = rows
                .into_iter()
                .map(|(m, k, rep, value, stderr, dims)| ExperimentRecord {
                    experiment: "cosine".into(),
                    map: maps[m].into(),
                    dist: "sparse".into(),
                    d: dims.iter().product(),
                    dims,
                    k,
                    t: 5,
                    rep,
                    metric: "rmse".into(),
                    value,
                    stderr,
                })
                .collect();
            let mut buf = Vec::new();
            write_records(&records, &mut buf).unwrap();
            let back = read_records(buf.as_slice()).unwrap();
            sort_records(&mut records);
            prop_assert_eq!(back, records);
        }
    }
}
