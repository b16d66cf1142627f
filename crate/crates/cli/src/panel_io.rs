//! Long-format panel files.
//!
//! One observation per row with header `series_id,replicate_index,grid_point,value`.
//! Columns may appear in any order. Series keep their order of first
//! appearance; replicates are ordered by index, which must run `1..=N` for
//! every series. The observed grid is mapped affinely onto `[0, 1]` using its
//! minimum and maximum.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fpanel_core::{FunctionalPanel, Grid};
use nalgebra::DMatrix;
use thiserror::Error;

pub const HEADER: [&str; 4] = ["series_id", "replicate_index", "grid_point", "value"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header lacks the `{0}` column")]
    MissingColumn(&'static str),
    #[error("line {line}: cannot parse {field} from `{value}`")]
    Parse {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: replicate_index must be a positive integer, got {value}")]
    BadReplicate { line: u64, value: i64 },
    #[error("file contains no observations")]
    Empty,
    #[error("duplicate observation for series `{series}`, replicate {replicate}, grid point {t}")]
    DuplicateKey {
        series: String,
        replicate: u64,
        t: f64,
    },
    #[error("series `{series}`, replicate {replicate}: grid point {t} is not shared by the other curves (ragged grid)")]
    RaggedGrid {
        series: String,
        replicate: u64,
        t: f64,
    },
    #[error("series `{series}`, replicate {replicate}: no value at grid point {t}")]
    MissingCell {
        series: String,
        replicate: u64,
        t: f64,
    },
    #[error("series `{series}`: replicate {replicate} is missing (indices must run 1..={n})")]
    MissingReplicate {
        series: String,
        replicate: u64,
        n: u64,
    },
    #[error("grid has {0} distinct point(s); at least 2 are needed")]
    ShortGrid(usize),
    #[error(transparent)]
    Panel(#[from] fpanel_core::Error),
}

/// Grid points are keyed by bit pattern, with `-0.0` folded into `0.0`.
fn key(t: f64) -> u64 {
    if t == 0.0 {
        0
    } else {
        t.to_bits()
    }
}

struct Cell {
    replicate: u64,
    values: HashMap<u64, f64>,
}

struct Series {
    id: String,
    cells: Vec<Cell>,
    by_replicate: HashMap<u64, usize>,
}

pub fn ingest(path: impl AsRef<Path>) -> Result<FunctionalPanel, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_reader(file)
}

pub fn ingest_reader(reader: impl Read) -> Result<FunctionalPanel, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(IngestError::MissingColumn(name))
    };
    let (c_series, c_rep, c_t, c_val) = (
        col(HEADER[0])?,
        col(HEADER[1])?,
        col(HEADER[2])?,
        col(HEADER[3])?,
    );

    let mut series: Vec<Series> = Vec::new();
    let mut series_index: HashMap<String, usize> = HashMap::new();
    let mut originals: HashMap<u64, f64> = HashMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_f64 = |i: usize, name: &'static str| -> Result<f64, IngestError> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::Parse {
                    line,
                    field: name,
                    value: field(i).to_string(),
                })
        };
        let rep: i64 = field(c_rep).parse().map_err(|_| IngestError::Parse {
            line,
            field: "replicate_index",
            value: field(c_rep).to_string(),
        })?;
        if rep < 1 {
            return Err(IngestError::BadReplicate { line, value: rep });
        }
        let rep = rep as u64;
        let t = parse_f64(c_t, "grid_point")?;
        let value = parse_f64(c_val, "value")?;
        let id = field(c_series);

        let si = *series_index.entry(id.to_string()).or_insert_with(|| {
            series.push(Series {
                id: id.to_string(),
                cells: Vec::new(),
                by_replicate: HashMap::new(),
            });
            series.len() - 1
        });
        let s = &mut series[si];
        let ci = *s.by_replicate.entry(rep).or_insert_with(|| {
            s.cells.push(Cell {
                replicate: rep,
                values: HashMap::new(),
            });
            s.cells.len() - 1
        });
        let k = key(t);
        originals.entry(k).or_insert(t);
        if s.cells[ci].values.insert(k, value).is_some() {
            return Err(IngestError::DuplicateKey {
                series: s.id.clone(),
                replicate: rep,
                t,
            });
        }
    }
    if series.is_empty() {
        return Err(IngestError::Empty);
    }
    for s in &mut series {
        s.cells.sort_by_key(|c| c.replicate);
    }

    // A point carried by fewer than half of the curves marks the curves
    // carrying it as off-grid; any other absence is a missing cell.
    let total_cells: usize = series.iter().map(|s| s.cells.len()).sum();
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for s in &series {
        for c in &s.cells {
            for k in c.values.keys() {
                *counts.entry(*k).or_default() += 1;
            }
        }
    }
    let mut common: Vec<f64> = counts
        .iter()
        .filter(|(_, &n)| 2 * n >= total_cells)
        .map(|(k, _)| originals[k])
        .collect();
    common.sort_by(f64::total_cmp);

    for s in &series {
        for c in &s.cells {
            let mut rare: Vec<f64> = c
                .values
                .keys()
                .filter(|k| 2 * counts[*k] < total_cells)
                .map(|k| originals[k])
                .collect();
            rare.sort_by(f64::total_cmp);
            if let Some(&t) = rare.first() {
                return Err(IngestError::RaggedGrid {
                    series: s.id.clone(),
                    replicate: c.replicate,
                    t,
                });
            }
            if let Some(&t) = common.iter().find(|&&t| !c.values.contains_key(&key(t))) {
                return Err(IngestError::MissingCell {
                    series: s.id.clone(),
                    replicate: c.replicate,
                    t,
                });
            }
        }
    }

    let n = series
        .iter()
        .flat_map(|s| s.cells.iter().map(|c| c.replicate))
        .max()
        .unwrap_or(0);
    for s in &series {
        if let Some(missing) = (1..=n).find(|r| !s.by_replicate.contains_key(r)) {
            return Err(IngestError::MissingReplicate {
                series: s.id.clone(),
                replicate: missing,
                n,
            });
        }
    }

    if common.len() < 2 {
        return Err(IngestError::ShortGrid(common.len()));
    }
    let (lo, hi) = (common[0], common[common.len() - 1]);
    let points: Vec<f64> = common.iter().map(|&t| (t - lo) / (hi - lo)).collect();
    let grid = Arc::new(Grid::new(points)?);

    let matrices = series
        .iter()
        .map(|s| {
            DMatrix::from_fn(n as usize, common.len(), |r, j| {
                s.cells[r].values[&key(common[j])]
            })
        })
        .collect();
    let labels = series.iter().map(|s| s.id.clone()).collect();
    Ok(FunctionalPanel::new(grid, matrices)?.with_labels(labels)?)
}

/// Writes `panel` in long format. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn emit(panel: &FunctionalPanel, writer: impl Write) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    let points = panel.grid().points();
    for i in 0..panel.n_series() {
        let label = panel.label(i);
        let x = panel.series(i);
        for n in 0..panel.n_replicates() {
            let rep = (n + 1).to_string();
            for (t, point) in points.iter().enumerate() {
                wtr.write_record([
                    label.as_str(),
                    rep.as_str(),
                    &format!("{point:?}"),
                    &format!("{:?}", x[(n, t)]),
                ])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_panel(panel: &FunctionalPanel, path: impl AsRef<Path>) -> anyhow::Result<()> {
    let file = File::create(path.as_ref())?;
    emit(panel, std::io::BufWriter::new(file))?;
    Ok(())
}
