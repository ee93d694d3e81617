//! CSV tables and metadata sidecars for sweep records.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::AnalysisKind;
use super::sweep::{InfoMetrics, Outcome, SweepRecord};
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Twelve significant digits, or `NaN`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.11e}")
    }
}

/// Header and formatted rows for `records`, one row per sweep point.
pub fn csv_table(records: &[SweepRecord]) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let first = records.first().ok_or(Error::Empty("sweep records"))?;
    let mut header = vec![first.parameter.name().to_string(), "status".into(), "realizations".into()];
    match first.analysis {
        AnalysisKind::Pid => {
            for n in InfoMetrics::NAMES {
                header.push(format!("{n}_mean"));
                header.push(format!("{n}_se"));
            }
            for n in &InfoMetrics::NAMES[..10] {
                header.push(format!("pooled_{n}"));
            }
            header.push("max_leakage".into());
        }
        AnalysisKind::Memory => {
            header.extend(["mc_total", "gamma_fit", "intercept"].map(String::from));
            header.extend((1..=first.max_delay).map(|n| format!("mc_{n}")));
            header.extend((1..=first.max_delay).map(|n| format!("mc_se_{n}")));
        }
    }
    let width = header.len();

    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![format_value(r.value)];
            match &r.outcome {
                Outcome::Failed(msg) => {
                    row.push(format!("failed: {msg}"));
                    row.push("0".into());
                    row.resize(width, "NaN".into());
                }
                Outcome::Pid(s) => {
                    row.push("ok".into());
                    row.push(s.per_realization.len().to_string());
                    for (m, e) in s.mean.to_array().iter().zip(s.stderr.to_array()) {
                        row.push(format_value(*m));
                        row.push(format_value(e));
                    }
                    row.extend(s.pooled.to_array()[..10].iter().map(|&v| format_value(v)));
                    row.push(format_value(s.max_leakage.unwrap_or(f64::NAN)));
                }
                Outcome::Memory(c) => {
                    row.push("ok".into());
                    row.push(c.realizations.to_string());
                    row.push(format_value(c.total()));
                    row.push(format_value(c.gamma_fit.unwrap_or(f64::NAN)));
                    row.push(format_value(c.intercept.unwrap_or(f64::NAN)));
                    row.extend(c.mc.iter().map(|&v| format_value(v)));
                    row.extend(c.stderr.iter().map(|&v| format_value(v)));
                }
            }
            if row.len() != width {
                return Err(Error::LengthMismatch { left: row.len(), right: width });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn csv_string(records: &[SweepRecord]) -> Result<String> {
    let (header, rows) = csv_table(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Csv { path: "<memory>".into(), line: 0, message: e.to_string() };
    w.write_record(&header).map_err(to_err)?;
    for row in &rows {
        w.write_record(row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv { path: "<memory>".into(), line: 0, message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub artifact_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub parameter: String,
    pub seeds: Vec<u64>,
    pub failed: Vec<f64>,
}

impl Metadata {
    pub fn from_records(records: &[SweepRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::Empty("sweep records"))?;
        Ok(Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            config_hash: first.config_hash.clone(),
            master_seed: first.master_seed,
            parameter: first.parameter.name().to_string(),
            seeds: first.seeds.clone(),
            failed: records.iter().filter(|r| matches!(r.outcome, Outcome::Failed(_))).map(|r| r.value).collect(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })
    }
}

/// `<path>.meta.toml`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

/// Writes the CSV table and its metadata sidecar.
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let text = csv_string(records)?;
    let meta = Metadata::from_records(records)?;
    let meta_text = toml::to_string(&meta).expect("metadata serializes");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    std::fs::write(&side, meta_text).map_err(|e| Error::io(&side, e))
}

/// A parsed CSV table with string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Csv { path: origin.to_string(), line, message: e.to_string() }
        };
        let header = r.headers().map_err(err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(err))
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
            path: String::new(),
            line: 1,
            message: format!("no column `{name}`"),
        })?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[k].parse::<f64>().map_err(|e| Error::Csv {
                    path: String::new(),
                    line: i + 2,
                    message: format!("column `{name}`: {e}"),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expctl::config::parse_config;
    use crate::expctl::sweep::run_sweep;

    fn records() -> Vec<SweepRecord> {
        let cfg = parse_config(
            "regime = \"meanfield\"\n[sweep]\nparameter = \"j\"\nvalues = [1.0, 2.0]\n[sampling]\nintervals = 300\nrealizations = 2\nseed = 17\n",
        )
        .unwrap();
        run_sweep(&cfg)
    }

    #[test]
    fn formatting_keeps_twelve_digits() {
        assert_eq!(format_value(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_value(f64::NAN), "NaN");
        let v = -123.456789012345;
        let back: f64 = format_value(v).parse().unwrap();
        assert!(((back - v) / v).abs() < 5e-12);
    }

    #[test]
    fn two_records_make_three_lines() {
        let text = csv_string(&records()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("j,status,realizations,mi_joint_mean,mi_joint_se,"));
    }

    #[test]
    fn emitted_csv_round_trips() {
        let recs = records();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_csv(&recs, &path).unwrap();
        let table = CsvTable::read(&path).unwrap();
        assert_eq!(table.rows.len(), 2);
        let syn = table.column("syn_norm_mean").unwrap();
        for (r, s) in recs.iter().zip(&syn) {
            let want = r.pid().unwrap().mean.syn_norm;
            assert!((s - want).abs() <= 5e-12 * want.abs().max(1e-300));
            assert_eq!(format_value(*s), format_value(want));
        }
        let meta = Metadata::read(&sidecar_path(&path)).unwrap();
        assert_eq!(meta.master_seed, 17);
        assert_eq!(meta.seeds, recs[0].seeds);
        assert_eq!(meta.config_hash, recs[0].config_hash);
        assert_eq!(meta.artifact_version, ARTIFACT_VERSION);
    }

    #[test]
    fn failed_points_keep_their_row() {
        let mut recs = records();
        recs[1].outcome = Outcome::Failed("diverged".into());
        let table = CsvTable::parse(&csv_string(&recs).unwrap(), "t").unwrap();
        assert_eq!(table.rows[1][1], "failed: diverged");
        assert!(table.column("syn_mean").unwrap()[1].is_nan());
        assert_eq!(Metadata::from_records(&recs).unwrap().failed, vec![2.0]);
    }

    #[test]
    fn empty_records_are_rejected() {
        assert!(matches!(csv_string(&[]), Err(Error::Empty(_))));
    }
}
