//! Curve and label CSV files, and partition JSON.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Raw curves sampled on a common grid, as read from or written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub grid: Vec<f64>,
    pub curves: Vec<(usize, Vec<f64>)>,
}

impl CurveSet {
    pub fn new(grid: Vec<f64>, curves: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if grid.len() < 4 {
            return Err(Error::Input(format!("need at least 4 time points, got {}", grid.len())));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("time points must be finite and strictly increasing".into()));
        }
        let mut ids = BTreeSet::new();
        for (id, v) in &curves {
            if !ids.insert(*id) {
                return Err(Error::Input(format!("duplicate curve id {id}")));
            }
            if v.len() != grid.len() {
                return Err(Error::Input(format!(
                    "curve {id} has {} values for {} time points",
                    v.len(),
                    grid.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("curve {id} has non-finite values")));
            }
        }
        Ok(Self { grid, curves })
    }

    /// The grid mapped linearly onto [0, 1].
    pub fn unit_grid(&self) -> Vec<f64> {
        let (a, b) = (self.grid[0], self.grid[self.grid.len() - 1]);
        let mut g: Vec<f64> = self.grid.iter().map(|t| (t - a) / (b - a)).collect();
        g[0] = 0.0;
        let last = g.len() - 1;
        g[last] = 1.0;
        g
    }

    pub fn ids(&self) -> Vec<usize> {
        self.curves.iter().map(|c| c.0).collect()
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("cannot parse {what} '{s}'")))
}

fn parse_id(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Input(format!("curve id '{s}' is not a nonnegative integer")))
}

/// Reads `id,t_1,...,t_n` followed by one row per curve.
pub fn read_curves(path: &Path) -> Result<CurveSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.get(0).map(str::trim) != Some("id") {
        return Err(Error::Input("first header column must be 'id'".into()));
    }
    let grid = header.iter().skip(1).map(|s| parse_f64(s, "time point")).collect::<Result<Vec<_>>>()?;
    let mut curves = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = parse_id(&rec[0])?;
        let values = rec.iter().skip(1).map(|s| parse_f64(s, "value")).collect::<Result<Vec<_>>>()?;
        curves.push((id, values));
    }
    CurveSet::new(grid, curves)
}

pub fn write_curves(path: &Path, set: &CurveSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string()];
    header.extend(set.grid.iter().map(|t| t.to_string()));
    w.write_record(&header)?;
    for (id, v) in &set.curves {
        let mut row = vec![id.to_string()];
        row.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct LabelRow {
    id: String,
    label: String,
}

pub fn read_labels(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<LabelRow>() {
        let row = row?;
        out.push((parse_id(&row.id)?, row.label.trim().to_string()));
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[(usize, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "label"])?;
    for (id, l) in labels {
        w.write_record([id.to_string(), l.clone()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PartitionFile {
    Result { partition: Partition },
    Bare(Partition),
}

/// Reads a partition from a result JSON (its `partition` field) or from a
/// bare array of id arrays.
pub fn read_partition(path: &Path) -> Result<Partition> {
    let text = std::fs::read_to_string(path)?;
    let parsed: PartitionFile =
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: not a partition: {e}", path.display())))?;
    Ok(match parsed {
        PartitionFile::Result { partition } | PartitionFile::Bare(partition) => partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let set = CurveSet::new(vec![0.0, 0.25, 0.5, 1.0], vec![(3, vec![1.0, -2.5, 0.1, 1e-7]), (1, vec![0.0; 4])]).unwrap();
        write_curves(&p, &set).unwrap();
        assert_eq!(read_curves(&p).unwrap(), set);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        for body in [
            "x,0,1,2,3\n1,1,2,3,4\n",
            "id,0,1,1,3\n1,1,2,3,4\n",
            "id,0,1,2,3\n1,1,2,3\n",
            "id,0,1,2,3\n1,1,2,3,nan\n",
            "id,0,1,2,3\n1,1,2,3,4\n1,1,2,3,4\n",
            "id,0,1,2,3\n-1,1,2,3,4\n",
            "id,0,1,2\n1,1,2,3\n",
        ] {
            std::fs::write(&p, body).unwrap();
            assert!(read_curves(&p).is_err(), "accepted {body:?}");
        }
    }

    #[test]
    fn unit_grid_rescales() {
        let set = CurveSet::new(vec![2.0, 3.0, 4.0, 6.0], vec![]).unwrap();
        assert_eq!(set.unit_grid(), vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn labels_and_partitions() {
        let dir = tempfile::tempdir().unwrap();
        let l = dir.path().join("l.csv");
        write_labels(&l, &[(0, "G1".into()), (1, "G2".into())]).unwrap();
        assert_eq!(read_labels(&l).unwrap(), vec![(0, "G1".to_string()), (1, "G2".to_string())]);
        let j = dir.path().join("p.json");
        std::fs::write(&j, r#"{"partition": [[1], [0, 2]], "threshold": 0.5}"#).unwrap();
        assert_eq!(read_partition(&j).unwrap().groups(), &[vec![0, 2], vec![1]]);
        std::fs::write(&j, "[[0],[1]]").unwrap();
        assert_eq!(read_partition(&j).unwrap().n_groups(), 2);
        std::fs::write(&j, "[[0],[0]]").unwrap();
        assert!(read_partition(&j).is_err());
    }
}
