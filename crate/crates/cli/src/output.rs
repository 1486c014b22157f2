//! Result files. Every file starts with a header naming the tool version and
//! the SHA-256 of the configuration bytes; nothing else varies between runs.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "subpressure";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn new(command: &str, config_bytes: &[u8], seed: u64) -> Self {
        Header {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
        }
    }
}

/// Column names plus stringly rows, written through the `csv` crate.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn fmt_ext(v: subpressure::ExtReal<f64>) -> String {
    v.as_finite().map_or_else(|| "-inf".into(), fmt_f64)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, header: &Header, result: &T) -> io::Result<PathBuf> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        result: &'a T,
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(&Doc { header, result }).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, header: &Header, table: &Table) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    let mut file = io::BufWriter::new(fs::File::create(&path)?);
    writeln!(file, "# {} {}", header.tool, header.version)?;
    writeln!(file, "# command={}", header.command)?;
    writeln!(file, "# config_sha256={}", header.config_sha256)?;
    writeln!(file, "# seed={}", header.seed)?;
    {
        let mut w = csv::Writer::from_writer(&mut file);
        w.write_record(&table.columns)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    file.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_extremes() {
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(std::f64::consts::LN_2), "0.6931471805599453");
        assert_eq!(fmt_ext(subpressure::ExtReal::neg_inf()), "-inf");
    }

    #[test]
    fn header_hashes_config() {
        let h = Header::new("pressure", b"{}", 0);
        assert_eq!(h.config_sha256, "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
    }

    #[test]
    fn csv_has_header_block() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["n", "value"]);
        t.push(vec!["1".into(), fmt_f64(0.5)]);
        let p = write_csv(dir.path(), "x", &Header::new("pressure", b"{}", 3), &t).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# subpressure "));
        assert!(text.ends_with("n,value\n1,0.5\n"));
    }
}
