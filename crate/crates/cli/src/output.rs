use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// What a command produced, before formatting.
pub struct Output {
    pub status: &'static str,
    pub results: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub text: Vec<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    parameters: &'a Map<String, Value>,
    status: &'a str,
    results: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

pub fn write(
    w: &mut impl Write,
    format: Format,
    command: &str,
    parameters: &Map<String, Value>,
    out: &Output,
    timing_ms: Option<u128>,
) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let doc = Document { command, parameters, status: out.status, results: &out.results, timing_ms };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut *w);
            csv.write_record(&out.columns)?;
            for row in &out.rows {
                csv.write_record(row)?;
            }
            csv.flush()
        }
        Format::Text => {
            for line in &out.text {
                writeln!(w, "{line}")?;
            }
            if let Some(ms) = timing_ms {
                writeln!(w, "time: {ms} ms")?;
            }
            Ok(())
        }
    }
}
