//! CSV and key-value writers. Every file opens with `#` header lines that
//! carry the tool version, subcommand, config hash and seed; bodies contain
//! no timestamps so reruns are byte-identical.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunInfo {
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl RunInfo {
    fn header(&self) -> String {
        format!(
            "# rydfm {VERSION} {}\n# config_sha256: {}\n# seed: {}\n",
            self.subcommand, self.config_sha256, self.seed
        )
    }
}

/// Shortest round-trip representation in exponent form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// One output file, rendered in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Column table with free-form `# key: value` notes.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub notes: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, info: &RunInfo) -> Vec<u8> {
        let mut out = info.header().into_bytes();
        for (k, v) in &self.notes {
            out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        // writing to a Vec cannot fail
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// `key = value` report with the same header block.
pub fn render_kv(info: &RunInfo, notes: &[(String, String)], pairs: &[(String, String)]) -> Vec<u8> {
    let mut s = info.header();
    for (k, v) in notes {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    for (k, v) in pairs {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s.into_bytes()
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let file_name =
        path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Record of one invocation. Timestamps live here and nowhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub info: RunInfo,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = format!(
            "tool = rydfm\nversion = {VERSION}\nsubcommand = {}\nconfig = {}\nconfig_sha256 = {}\nseed = {}\nout_dir = {}\nstarted_unix = {:.3}\nfinished_unix = {:.3}\n",
            self.info.subcommand,
            self.config_path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "(defaults)".into()),
            self.info.config_sha256,
            self.info.seed,
            self.out_dir.display(),
            self.started_unix,
            self.finished_unix,
        );
        for f in &self.files {
            s.push_str(&format!("file = {}\n", f.display()));
        }
        s
    }
}

/// Parsed numeric CSV: header names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericCsv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericCsv {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Read a CSV with `#` comments and a header row; every field must be a number.
pub fn read_numeric_csv(path: &Path) -> Result<NumericCsv, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let columns: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| format!("data row {}: '{f}' is not a number", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(NumericCsv { columns, rows })
}
