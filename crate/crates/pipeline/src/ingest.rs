//! CSV readers for the two raw meter streams.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use csv::{ReaderBuilder, StringRecord};
use rankjoint_core::coding::{ConsumptionRecord, EventRecord, BINS_PER_DAY};

use crate::error::{PipelineError, Result};

pub const EVENT_HEADER: [&str; 3] = ["case_id", "timestamp", "code"];

/// `case_id,date,b01..b48`
pub fn consumption_header() -> Vec<String> {
    let mut h = vec!["case_id".to_owned(), "date".to_owned()];
    h.extend((1..=BINS_PER_DAY).map(|b| format!("b{b:02}")));
    h
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|e| PipelineError::io(path, e))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input)
}

struct Source {
    path: PathBuf,
}

impl Source {
    fn format(&self, line: Option<u64>, message: impl Into<String>) -> PipelineError {
        PipelineError::Format {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn parse(&self, line: u64, message: impl Into<String>) -> PipelineError {
        PipelineError::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn value(&self, line: u64, message: impl Into<String>) -> PipelineError {
        PipelineError::Value {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn csv(&self, e: csv::Error) -> PipelineError {
        let line = e.position().map(|p| p.line());
        self.format(line, e.to_string())
    }

    /// Reads the first record and checks it against `expected`.
    fn header<R: Read, S: AsRef<str>>(
        &self,
        rdr: &mut csv::Reader<R>,
        expected: &[S],
    ) -> Result<()> {
        let mut rec = StringRecord::new();
        let found = rdr.read_record(&mut rec).map_err(|e| self.csv(e))?;
        let matches = found
            && rec.len() == expected.len()
            && rec
                .iter()
                .zip(expected)
                .all(|(got, want)| got.trim() == want.as_ref());
        if matches {
            Ok(())
        } else {
            let want: Vec<&str> = expected.iter().map(AsRef::as_ref).collect();
            Err(self.format(Some(1), format!("missing header `{}`", want.join(","))))
        }
    }
}

/// Parses an ISO-8601 timestamp. Offsets are honoured; naive times and
/// bare dates are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
}

pub fn parse_events_csv(path: impl AsRef<Path>) -> Result<Vec<EventRecord>> {
    let path = path.as_ref();
    read_events(open(path)?, path)
}

/// Reads `case_id,timestamp,code` rows in file order.
pub fn read_events<R: Read>(input: R, label: impl Into<PathBuf>) -> Result<Vec<EventRecord>> {
    let src = Source { path: label.into() };
    let mut rdr = reader(input);
    src.header(&mut rdr, &EVENT_HEADER)?;
    let mut out = Vec::new();
    let mut rec = StringRecord::new();
    while rdr.read_record(&mut rec).map_err(|e| src.csv(e))? {
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != EVENT_HEADER.len() {
            return Err(src.format(
                Some(line),
                format!("expected 3 columns, found {}", rec.len()),
            ));
        }
        let timestamp = parse_timestamp(&rec[1])
            .ok_or_else(|| src.parse(line, format!("bad timestamp `{}`", &rec[1])))?;
        let record = EventRecord::new(rec[0].trim(), timestamp, rec[2].trim())
            .map_err(|e| src.value(line, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn parse_consumption_csv(path: impl AsRef<Path>) -> Result<Vec<ConsumptionRecord>> {
    let path = path.as_ref();
    read_consumption(open(path)?, path)
}

/// Reads `case_id,date,b01..b48` rows in file order.
pub fn read_consumption<R: Read>(
    input: R,
    label: impl Into<PathBuf>,
) -> Result<Vec<ConsumptionRecord>> {
    let src = Source { path: label.into() };
    let header = consumption_header();
    let mut rdr = reader(input);
    src.header(&mut rdr, &header)?;
    let mut out = Vec::new();
    let mut rec = StringRecord::new();
    let mut bins = [0.0; BINS_PER_DAY];
    while rdr.read_record(&mut rec).map_err(|e| src.csv(e))? {
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(src.format(
                Some(line),
                format!("expected {} columns, found {}", header.len(), rec.len()),
            ));
        }
        let date = NaiveDate::parse_from_str(rec[1].trim(), "%Y-%m-%d")
            .map_err(|_| src.parse(line, format!("bad date `{}`", &rec[1])))?;
        for (b, field) in bins.iter_mut().zip(rec.iter().skip(2)) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| src.parse(line, format!("bad reading `{field}`")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(src.value(line, format!("reading {v} is not a non-negative number")));
            }
            *b = v;
        }
        let record = ConsumptionRecord::new(rec[0].trim(), date, &bins)
            .map_err(|e| src.value(line, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}
