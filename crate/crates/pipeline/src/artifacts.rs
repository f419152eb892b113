//! Plain-text output artifacts, and readers for the ones the staged
//! subcommands consume.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Writer, WriterBuilder};
use rankjoint_core::coding::{CodedMatrix, DropReport, MatrixKind};
use rankjoint_core::distance::{histogram, DistanceVector};
use rankjoint_core::joint::{AnomalyReport, JointRankDensity};
use rankjoint_core::linalg::DenseMatrix;
use rankjoint_core::ordination::{scree, Ordination};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

fn writer(path: &Path) -> Result<Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(WriterBuilder::new().from_writer(BufWriter::with_capacity(1 << 16, file)))
}

fn csv_err(path: &Path, e: csv::Error) -> PipelineError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => PipelineError::io(path, io),
        other => PipelineError::Format {
            path: path.to_owned(),
            line: None,
            message: format!("{other:?}"),
        },
    }
}

/// Writes rows produced by `rows` under `header`.
fn write_csv<I, R>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn write_report(path: &Path, report: &AnomalyReport) -> Result<()> {
    write_json(path, report)
}

pub fn write_drops(path: &Path, drops: &[(&str, &DropReport)]) -> Result<()> {
    let map: std::collections::BTreeMap<&str, &DropReport> = drops.iter().copied().collect();
    write_json(path, &map)
}

pub fn write_scree(path: &Path, ord: &Ordination) -> Result<()> {
    write_csv(
        path,
        &strings(&["component", "eigenvalue", "cumulative_fraction"]),
        scree(ord).into_iter().map(|p| {
            [
                p.component.to_string(),
                p.eigenvalue.to_string(),
                p.cumulative_fraction.to_string(),
            ]
        }),
    )
}

pub fn write_distances(path: &Path, d: &DistanceVector) -> Result<()> {
    write_csv(
        path,
        &strings(&["case_id", "distance"]),
        d.case_ids
            .iter()
            .zip(&d.distances)
            .map(|(id, x)| [id.clone(), x.to_string()]),
    )
}

pub fn write_histogram(path: &Path, values: &[f64], bins: usize) -> Result<()> {
    let h = histogram(values, bins).map_err(|source| PipelineError::Stage {
        stage: crate::error::Stage::S3,
        source,
    })?;
    write_csv(
        path,
        &strings(&["lower", "upper", "count"]),
        h.into_iter()
            .map(|b| [b.lower.to_string(), b.upper.to_string(), b.count.to_string()]),
    )
}

fn dim_header(first: &str, dims: usize) -> Vec<String> {
    std::iter::once(first.to_owned())
        .chain((1..=dims).map(|d| format!("dim{d}")))
        .collect()
}

/// Labelled leading columns of `m`.
pub fn write_coordinates(
    path: &Path,
    label: &str,
    names: &[String],
    m: &DenseMatrix,
    dims: usize,
) -> Result<()> {
    let dims = dims.min(m.cols());
    write_csv(
        path,
        &dim_header(label, dims),
        names.iter().enumerate().map(|(i, name)| {
            std::iter::once(name.clone())
                .chain(m.row(i)[..dims].iter().map(f64::to_string))
                .collect::<Vec<_>>()
        }),
    )
}

/// Row and column biplot coordinates.
pub fn write_biplot(dir: &Path, prefix: &str, ord: &Ordination, dims: usize) -> Result<()> {
    write_coordinates(
        &dir.join(format!("biplot_{prefix}_rows.csv")),
        "case_id",
        &ord.case_ids,
        &ord.f,
        dims,
    )?;
    write_coordinates(
        &dir.join(format!("biplot_{prefix}_columns.csv")),
        "variable",
        &ord.variable_names,
        &ord.v,
        dims,
    )
}

pub fn write_joint(path: &Path, jrd: &JointRankDensity) -> Result<()> {
    write_csv(
        path,
        &strings(&["case_id", "rank_a", "rank_b", "density", "z"]),
        (0..jrd.len()).map(|i| {
            [
                jrd.case_ids[i].clone(),
                jrd.rank_a[i].to_string(),
                jrd.rank_b[i].to_string(),
                jrd.density[i].to_string(),
                jrd.z_score[i].to_string(),
            ]
        }),
    )
}

/// `G` lines of `G` z-scaled densities; line `r` is the `r`-th grid step
/// along partition b, column `c` along partition a.
pub fn write_grid(path: &Path, jrd: &JointRankDensity) -> Result<()> {
    let g = jrd.grid_size;
    let z = jrd.grid_z();
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| PipelineError::io(path, e);
    for row in z.chunks(g) {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_grid_axis(path: &Path, jrd: &JointRankDensity) -> Result<()> {
    write_csv(
        path,
        &strings(&["index", "rank"]),
        jrd.grid_axis()
            .into_iter()
            .enumerate()
            .map(|(k, r)| [k.to_string(), r.to_string()]),
    )
}

/// Density settings the `detect` subcommand needs alongside `joint.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMeta {
    pub bandwidth: f64,
    pub grid_size: usize,
    pub density_mean: f64,
    pub density_std: f64,
}

impl From<&JointRankDensity> for JointMeta {
    fn from(j: &JointRankDensity) -> Self {
        Self {
            bandwidth: j.bandwidth,
            grid_size: j.grid_size,
            density_mean: j.density_mean,
            density_std: j.density_std,
        }
    }
}

/// All artifacts of one joint density: per-case table, grid, axis, meta.
pub fn write_joint_artifacts(dir: &Path, jrd: &JointRankDensity) -> Result<()> {
    write_joint(&dir.join("joint.csv"), jrd)?;
    write_grid(&dir.join("density_grid.csv"), jrd)?;
    write_grid_axis(&dir.join("grid_axis.csv"), jrd)?;
    write_json(&dir.join("joint_meta.json"), &JointMeta::from(jrd))
}

pub fn write_coded(path: &Path, coded: &CodedMatrix) -> Result<()> {
    let header: Vec<String> = std::iter::once("case_id".to_owned())
        .chain(coded.variable_names().iter().cloned())
        .collect();
    write_csv(
        path,
        &header,
        coded.case_ids().iter().enumerate().map(|(i, id)| {
            std::iter::once(id.clone())
                .chain(coded.matrix().row(i).iter().map(f64::to_string))
                .collect::<Vec<_>>()
        }),
    )
}

/// A labelled numeric table: first column ids, the rest numbers.
pub struct Table {
    pub header: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let format = |line: Option<u64>, message: String| PipelineError::Format {
        path: path.to_owned(),
        line,
        message,
    };
    let mut rec = StringRecord::new();
    if !rdr.read_record(&mut rec).map_err(|e| csv_err(path, e))? || rec.len() < 2 {
        return Err(format(Some(1), "missing header".into()));
    }
    let header: Vec<String> = rec.iter().map(str::to_owned).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    while rdr.read_record(&mut rec).map_err(|e| csv_err(path, e))? {
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(format(Some(line), format!("expected {} columns", header.len())));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| PipelineError::Parse {
                    path: path.to_owned(),
                    line,
                    message: format!("bad number `{v}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        ids.push(rec[0].to_owned());
        rows.push(row);
    }
    Ok(Table { header, ids, rows })
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j - 1]).collect())
    }

    pub fn into_matrix(self) -> std::result::Result<(Vec<String>, Vec<String>, DenseMatrix), String> {
        let cols = self.header.len() - 1;
        if self.rows.is_empty() {
            return Err("table has no rows".into());
        }
        let values: Vec<f64> = self.rows.into_iter().flatten().collect();
        let m = DenseMatrix::new(self.ids.len(), cols, values).map_err(|e| e.to_string())?;
        Ok((self.ids, self.header[1..].to_vec(), m))
    }
}

pub fn read_coded(path: &Path, kind: MatrixKind) -> Result<CodedMatrix> {
    let (ids, names, m) = read_table(path)?.into_matrix().map_err(|message| {
        PipelineError::Format {
            path: path.to_owned(),
            line: None,
            message,
        }
    })?;
    CodedMatrix::new(m, ids, names, kind).map_err(|e| PipelineError::Format {
        path: path.to_owned(),
        line: None,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coded_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let coded = CodedMatrix::new(
            DenseMatrix::from_rows(&[[1.0, 0.5], [2.0, 0.25]]).unwrap(),
            vec!["a".into(), "b,c".into()],
            vec!["x".into(), "y".into()],
            MatrixKind::Generic,
        )
        .unwrap();
        let path = dir.path().join("coded.csv");
        write_coded(&path, &coded).unwrap();
        assert_eq!(read_coded(&path, MatrixKind::Generic).unwrap(), coded);
    }

    #[test]
    fn table_column_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "case_id,distance\nm1,1.5\nm2,0\n").unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.column("distance").unwrap(), vec![1.5, 0.0]);
        assert!(t.column("nope").is_none());
    }
}
