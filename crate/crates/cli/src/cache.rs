//! On-disk height tables, one text file per map.
//!
//! ```text
//! elated-height-cache 1
//! base 10
//! exponent 2
//! kind elated
//! records 65535
//! 1 0
//! 2 -
//! ...
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use elated::heights::HeightTable;
use elated::{DigitMap, MapKind};
use tempfile::NamedTempFile;

use crate::CliError;

pub const MAGIC: &str = "elated-height-cache";
pub const VERSION: u32 = 1;
pub const ENV_VAR: &str = "ELATED_CACHE_DIR";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// `flag` wins over the environment variable; with neither, nothing is cached.
    pub fn new(flag: Option<PathBuf>) -> Self {
        let dir = flag.or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from));
        Cache { dir }
    }

    pub fn path(&self, map: DigitMap) -> Option<PathBuf> {
        let kind = match map.kind {
            MapKind::Elated => "elated",
            MapKind::Happy => "happy",
        };
        let name = format!("heights-b{}-e{}-{kind}.txt", map.base.get(), map.exponent.get());
        self.dir.as_ref().map(|d| d.join(name))
    }

    /// Loads the table for `map`, building and storing it when absent.
    pub fn table(&self, map: DigitMap) -> Result<HeightTable, CliError> {
        let Some(path) = self.path(map) else {
            return Ok(HeightTable::new(map)?);
        };
        if path.exists() {
            return load(&path, map);
        }
        let table = HeightTable::new(map)?;
        store(&path, map, &table)?;
        Ok(table)
    }
}

fn corrupt(path: &Path, why: impl Into<String>) -> CliError {
    CliError::Cache { path: path.to_path_buf(), reason: why.into() }
}

fn header(map: DigitMap, records: usize) -> [String; 5] {
    [
        format!("{MAGIC} {VERSION}"),
        format!("base {}", map.base.get()),
        format!("exponent {}", map.exponent.get()),
        format!("kind {}", map.kind.name()),
        format!("records {records}"),
    ]
}

pub fn load(path: &Path, map: DigitMap) -> Result<HeightTable, CliError> {
    let file = fs::File::open(path).map_err(|e| corrupt(path, e.to_string()))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> Result<String, CliError> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(corrupt(path, e.to_string())),
            None => Err(corrupt(path, "unexpected end of file")),
        }
    };

    let mut head = Vec::with_capacity(5);
    for _ in 0..5 {
        head.push(next()?);
    }
    let count: usize = head[4]
        .strip_prefix("records ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| corrupt(path, "malformed record count"))?;
    let expected = header(map, count);
    for (got, want) in head.iter().zip(&expected) {
        if got != want {
            return Err(corrupt(path, format!("header line {got:?}, expected {want:?}")));
        }
    }

    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let line = next()?;
        let bad = || corrupt(path, format!("malformed record {:?} on line {}", line, i + 6));
        let (n, h) = line.split_once(' ').ok_or_else(bad)?;
        let n: u64 = n.parse().map_err(|_| bad())?;
        let h = match h {
            "-" => None,
            h => Some(h.parse::<u32>().map_err(|_| bad())?),
        };
        records.push((n, h));
    }
    if let Some(Ok(extra)) = lines.next() {
        return Err(corrupt(path, format!("trailing data {extra:?}")));
    }
    HeightTable::from_records(map, &records).map_err(|e| corrupt(path, e.to_string()))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn store(path: &Path, map: DigitMap, table: &HeightTable) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.to_path_buf(), reason: e.to_string() };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        let records: Vec<(u64, Option<u32>)> = table.records().collect();
        for line in header(map, records.len()) {
            writeln!(w, "{line}").map_err(io)?;
        }
        for (n, h) in records {
            match h {
                Some(h) => writeln!(w, "{n} {h}"),
                None => writeln!(w, "{n} -"),
            }
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
