//! Result tables as CSV or newline-delimited JSON.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{PointEstimate, SystemConfig};
use crate::error::{Error, Result};

/// Fixed CSV header.
pub const CSV_HEADER: &str = "variant,Ka,M,S,J,np,nc,G,V,ebn0_db,pe,pmd,pfa,ci_lo,ci_hi,trials,source,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Simulated,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Analytic => "analytic",
            Source::Simulated => "simulated",
        })
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub variant: String,
    #[serde(rename = "Ka")]
    pub ka: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub np: usize,
    pub nc: usize,
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "V")]
    pub v: usize,
    pub ebn0_db: f64,
    pub pe: f64,
    pub pmd: f64,
    pub pfa: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub source: Source,
    pub seed: u64,
}

impl ResultRow {
    fn base(cfg: &SystemConfig, ebn0_db: f64, source: Source) -> Self {
        Self {
            variant: cfg.variant.to_string(),
            ka: cfg.active_users,
            m: cfg.antennas,
            s: cfg.slots,
            j: cfg.pilot_parts,
            np: cfg.n_p,
            nc: cfg.n_c,
            g: cfg.groups,
            v: cfg.subframes,
            ebn0_db,
            pe: 0.0,
            pmd: 0.0,
            pfa: 0.0,
            ci_lo: 0.0,
            ci_hi: 0.0,
            trials: 0,
            source,
            seed: cfg.seed,
        }
    }

    pub fn simulated(cfg: &SystemConfig, ebn0_db: f64, est: PointEstimate) -> Self {
        Self {
            pe: est.pe,
            pmd: est.pmd,
            pfa: est.pfa,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            trials: est.trials,
            ..Self::base(cfg, ebn0_db, Source::Simulated)
        }
    }

    /// Analytic rows carry the prediction as `pe = pmd = ci_lo = ci_hi`.
    pub fn analytic(cfg: &SystemConfig, ebn0_db: f64, pe: f64) -> Self {
        Self { pe, pmd: pe, ci_lo: pe, ci_hi: pe, ..Self::base(cfg, ebn0_db, Source::Analytic) }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.variant,
            self.ka,
            self.m,
            self.s,
            self.j,
            self.np,
            self.nc,
            self.g,
            self.v,
            self.ebn0_db,
            self.pe,
            self.pmd,
            self.pfa,
            self.ci_lo,
            self.ci_hi,
            self.trials,
            self.source,
            self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Ndtext,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "ndtext" => Ok(OutputFormat::Ndtext),
            _ => Err(Error::Config(format!("unknown format '{s}' (csv|ndtext)"))),
        }
    }
}

pub fn write_csv<W: Write>(out: &mut W, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// First line is the resolved configuration, then one JSON object per row.
pub fn write_ndtext<W: Write>(out: &mut W, cfg: &SystemConfig, rows: &[ResultRow]) -> Result<()> {
    let pairs: serde_json::Map<String, serde_json::Value> =
        cfg.to_pairs().into_iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v))).collect();
    let head = serde_json::json!({ "config": pairs });
    writeln!(out, "{head}")?;
    for r in rows {
        writeln!(out, "{}", serde_json::to_string(r).map_err(|e| Error::Io(e.into()))?)?;
    }
    Ok(())
}

/// Writes `rows` to `path`. CSV output gets a `<path>.cfg` sidecar with
/// the resolved configuration.
pub fn emit_results(rows: &[ResultRow], cfg: &SystemConfig, path: &Path, format: OutputFormat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => {
            write_csv(&mut out, rows)?;
            let mut side = path.as_os_str().to_owned();
            side.push(".cfg");
            std::fs::write(side, cfg.render())?;
        }
        OutputFormat::Ndtext => write_ndtext(&mut out, cfg, rows)?,
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(source: Source) -> ResultRow {
        let cfg = SystemConfig::default();
        match source {
            Source::Analytic => ResultRow::analytic(&cfg, -2.5, 0.125),
            Source::Simulated => ResultRow::simulated(
                &cfg,
                -2.5,
                PointEstimate { pe: 0.1, pmd: 0.08, pfa: 0.02, ci_lo: 0.05, ci_hi: 0.15, trials: 200 },
            ),
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_share_the_schema() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row(Source::Simulated), row(Source::Analytic)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "MS-MRA,12,16,2,2,32,128,1,1,-2.5,0.1,0.08,0.02,0.05,0.15,200,simulated,1");
        assert!(lines[2].ends_with(",0,analytic,1"));
        let n = CSV_HEADER.split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == n));
    }

    #[test]
    fn emit_is_reproducible_and_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        let cfg = SystemConfig::default();
        let rows = vec![row(Source::Simulated)];
        emit_results(&rows, &cfg, &p, OutputFormat::Csv).unwrap();
        let first = std::fs::read(&p).unwrap();
        emit_results(&rows, &cfg, &p, OutputFormat::Csv).unwrap();
        assert_eq!(first, std::fs::read(&p).unwrap());
        let side = std::fs::read_to_string(dir.path().join("out.csv.cfg")).unwrap();
        assert_eq!(SystemConfig::parse(&side).unwrap(), cfg);
    }

    #[test]
    fn ndtext_starts_with_config() {
        let mut buf = Vec::new();
        write_ndtext(&mut buf, &SystemConfig::default(), &[row(Source::Analytic)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let head: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(head["config"]["variant"], "MS-MRA");
        let r: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(r["source"], "analytic");
        assert_eq!(r["Ka"], 12);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let r = emit_results(&[], &SystemConfig::default(), Path::new("/nonexistent/dir/x.csv"), OutputFormat::Csv);
        assert!(matches!(r, Err(Error::Io(_))));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
