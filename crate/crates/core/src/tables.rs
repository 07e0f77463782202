//! CSV tables exchanged between pipeline stages.
//!
//! All tables carry a header row, use `.` decimals, UTF-8 and LF line
//! endings. Floats are written with six significant digits.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cascade::NodeFeatures;
use crate::infectivity::Quadrant;
use crate::model::{CascadeMetrics, TweetId, UserId};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: header {found:?} does not match expected schema {expected:?}")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: {message}")]
    Field {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

/// `%g`-style formatting at six significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, TableError> {
        let file = File::create(path).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        let mut out = Self {
            path: path.to_path_buf(),
            writer,
        };
        out.row(header)?;
        Ok(out)
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<(), TableError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|source| TableError::Csv {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<(), TableError> {
        self.writer.flush().map_err(|source| TableError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

pub struct CsvIn {
    path: PathBuf,
    reader: csv::Reader<File>,
}

impl CsvIn {
    /// Opens a table whose header must start with `expected`.
    pub fn open(path: &Path, expected: &[&str]) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|source| TableError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
        let header = reader
            .headers()
            .map_err(|source| TableError::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .clone();
        let found: Vec<&str> = header.iter().collect();
        if found.len() < expected.len() || found[..expected.len()] != *expected {
            return Err(TableError::Schema {
                path: path.to_path_buf(),
                expected: expected.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            reader,
        })
    }

    pub fn records(&mut self) -> Result<Vec<(u64, csv::StringRecord)>, TableError> {
        let mut out = Vec::new();
        for rec in self.reader.records() {
            let rec = rec.map_err(|source| TableError::Csv {
                path: self.path.clone(),
                source,
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            out.push((line, rec));
        }
        Ok(out)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, i: usize) -> Result<T, TableError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| TableError::Field {
        path: path.to_path_buf(),
        line,
        message: format!("column {i}: cannot parse {raw:?}"),
    })
}

pub const METRICS_HEADER: [&str; 16] = [
    "cascade_id", "s", "s_prime", "s_sparse", "s_c", "s_n", "m", "m_cc", "m_cn", "m_nn", "h_prime",
    "incidence", "c_ir", "ctnc_ir", "quadrant", "flags",
];

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub metrics: CascadeMetrics,
    pub quadrant: Quadrant,
    pub replicate: Option<usize>,
}

fn flags(m: &CascadeMetrics) -> String {
    let mut f = Vec::new();
    if m.c_ir_undefined {
        f.push("c_ir_undefined");
    }
    if m.ctnc_ir_undefined {
        f.push("ctnc_ir_undefined");
    }
    f.join(";")
}

/// Writes `metrics.csv`, or `null_metrics.csv` when rows carry replicates.
pub fn write_metrics(path: &Path, rows: &[MetricsRow], with_replicate: bool) -> Result<(), TableError> {
    let mut header: Vec<&str> = METRICS_HEADER.to_vec();
    if with_replicate {
        header.push("replicate");
    }
    let mut out = CsvOut::create(path, &header)?;
    for r in rows {
        let m = &r.metrics;
        let mut rec = vec![
            m.cascade_id.to_string(),
            m.s.to_string(),
            m.s_prime.to_string(),
            m.s_sparse.to_string(),
            m.s_c.to_string(),
            m.s_n.to_string(),
            m.m.to_string(),
            m.m_cc.to_string(),
            m.m_cn.to_string(),
            m.m_nn.to_string(),
            m.h_prime.to_string(),
            fmt_g(m.incidence),
            fmt_g(m.c_ir),
            fmt_g(m.ctnc_ir),
            r.quadrant.to_string(),
            flags(m),
        ];
        if with_replicate {
            rec.push(r.replicate.unwrap_or(0).to_string());
        }
        out.row(&rec)?;
    }
    out.finish()
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, TableError> {
    let mut input = CsvIn::open(path, &METRICS_HEADER)?;
    let records = input.records()?;
    let p = input.path().to_path_buf();
    records
        .into_iter()
        .map(|(line, rec)| {
            let count = |i| field::<usize>(&p, line, &rec, i);
            let real = |i| field::<f64>(&p, line, &rec, i);
            let flags: Vec<&str> = rec.get(15).unwrap_or("").split(';').collect();
            let metrics = CascadeMetrics {
                cascade_id: TweetId::new(rec.get(0).unwrap_or("")).map_err(|e| TableError::Field {
                    path: p.clone(),
                    line,
                    message: e.to_string(),
                })?,
                s: count(1)?,
                s_prime: count(2)?,
                s_sparse: count(3)?,
                s_c: count(4)?,
                s_n: count(5)?,
                m: count(6)?,
                m_cc: count(7)?,
                m_cn: count(8)?,
                m_nn: count(9)?,
                h_prime: field(&p, line, &rec, 10)?,
                incidence: real(11)?,
                c_ir: real(12)?,
                ctnc_ir: real(13)?,
                c_ir_undefined: flags.contains(&"c_ir_undefined"),
                ctnc_ir_undefined: flags.contains(&"ctnc_ir_undefined"),
            };
            let quadrant = rec.get(14).unwrap_or("").parse().map_err(|message| TableError::Field {
                path: p.clone(),
                line,
                message,
            })?;
            let replicate = match rec.get(16) {
                Some(_) => Some(field(&p, line, &rec, 16)?),
                None => None,
            };
            Ok(MetricsRow {
                metrics,
                quadrant,
                replicate,
            })
        })
        .collect()
}

pub const COORDINATION_HEADER: [&str; 3] = ["user_id", "coordinated", "max_similarity"];

pub fn write_coordination(
    path: &Path,
    users: &[UserId],
    coordinated: &BTreeSet<UserId>,
    max_similarity: impl Fn(&UserId) -> f64,
) -> Result<(), TableError> {
    let mut out = CsvOut::create(path, &COORDINATION_HEADER)?;
    for u in users {
        let flag = if coordinated.contains(u) { "1" } else { "0" };
        out.row([u.as_str(), flag, &fmt_g(max_similarity(u))])?;
    }
    out.finish()
}

/// The coordinated users listed in `coordination.csv`.
pub fn read_coordination(path: &Path) -> Result<BTreeSet<UserId>, TableError> {
    let mut input = CsvIn::open(path, &COORDINATION_HEADER)?;
    let p = input.path().to_path_buf();
    let mut out = BTreeSet::new();
    for (line, rec) in input.records()? {
        let bad = |message: String| TableError::Field {
            path: p.clone(),
            line,
            message,
        };
        let user = UserId::new(rec.get(0).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
        match rec.get(1) {
            Some("1") => {
                out.insert(user);
            }
            Some("0") => {}
            other => return Err(bad(format!("coordinated must be 0 or 1, got {other:?}"))),
        }
    }
    Ok(out)
}

pub const NODES_HEADER: [&str; 6] = [
    "cascade_id", "user_id", "level", "action_delay_min", "out_degree", "coordinated",
];

pub fn write_nodes(path: &Path, rows: &[(TweetId, Vec<NodeFeatures>)]) -> Result<(), TableError> {
    let mut out = CsvOut::create(path, &NODES_HEADER)?;
    for (cid, feats) in rows {
        for f in feats {
            out.row([
                cid.as_str(),
                f.user.as_str(),
                &f.level.to_string(),
                &fmt_g(f.action_delay_min),
                &f.out_degree.to_string(),
                if f.coordinated { "1" } else { "0" },
            ])?;
        }
    }
    out.finish()
}

/// Node rows as (level, action delay, out-degree, coordinated).
pub fn read_nodes(path: &Path) -> Result<Vec<(f64, f64, f64, bool)>, TableError> {
    let mut input = CsvIn::open(path, &NODES_HEADER)?;
    let p = input.path().to_path_buf();
    input
        .records()?
        .into_iter()
        .map(|(line, rec)| {
            Ok((
                field(&p, line, &rec, 2)?,
                field(&p, line, &rec, 3)?,
                field(&p, line, &rec, 4)?,
                field::<u8>(&p, line, &rec, 5)? == 1,
            ))
        })
        .collect()
}

/// Reads an `x,y` table.
pub fn read_points(path: &Path) -> Result<(Vec<f64>, Vec<f64>), TableError> {
    let mut input = CsvIn::open(path, &["x", "y"])?;
    let p = input.path().to_path_buf();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in input.records()? {
        xs.push(field(&p, line, &rec, 0)?);
        ys.push(field(&p, line, &rec, 1)?);
    }
    Ok((xs, ys))
}

pub fn write_points(path: &Path, x: &[f64], y: &[f64]) -> Result<(), TableError> {
    let mut out = CsvOut::create(path, &["x", "y"])?;
    for (a, b) in x.iter().zip(y) {
        // full precision so fixtures stay exact
        out.row([format!("{a:?}"), format!("{b:?}")])?;
    }
    out.finish()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), TableError> {
    let mut f = File::create(path).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })
}
