//! Problem files: CSV (one vector per line) or JSON lines (`{"y": [...], "mu": .., "a": ..}`).

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl`, `.ndjson` and `.json` are JSON lines; anything else is CSV.
    pub fn infer(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jsonl" | "ndjson" | "json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub y: Vec<f64>,
    pub mu: Option<f64>,
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 0-based record index (blank lines are not records).
    pub record: usize,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {} (line {}): {}", self.record, self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    y: Vec<f64>,
    mu: Option<f64>,
    a: Option<f64>,
}

fn parse_csv_line(line: &str) -> Result<Record, String> {
    let y = line
        .split(',')
        .map(|field| {
            let field = field.trim();
            f64::from_str(field).map_err(|_| format!("`{field}` is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Record { y, mu: None, a: None })
}

fn parse_json_line(line: &str) -> Result<Record, String> {
    let r: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(Record { y: r.y, mu: r.mu, a: r.a })
}

/// Parses every non-blank line; `#` starts a comment line in CSV.
pub fn parse(text: &str, format: Format) -> Result<Vec<Record>, ParseError> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (format == Format::Csv && line.starts_with('#')) {
            continue;
        }
        let parsed = match format {
            Format::Csv => parse_csv_line(line),
            Format::Jsonl => parse_json_line(line),
        };
        let record = parsed.map_err(|message| ParseError { record: records.len(), line: i + 1, message })?;
        if record.y.is_empty() {
            return Err(ParseError { record: records.len(), line: i + 1, message: "empty vector".into() });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(ParseError { record: 0, line: 0, message: "input has no records".into() });
    }
    Ok(records)
}

/// Reads `path` (or stdin for `-`), inferring the format unless given.
pub fn read(path: &Path, format: Option<Format>) -> anyhow::Result<Vec<Record>> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
    };
    let format = format.unwrap_or_else(|| Format::infer(path));
    Ok(parse(&text, format)?)
}
