//! Accident-record parsing and aggregation into the per-year cause matrix
//! that feeds regression.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five modelled cause categories plus a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cause {
    Collision,
    StormyWeather,
    ExcessiveCurrent,
    Grounding,
    Overloading,
    Other,
}

/// Canonical predictor column labels, in model order.
pub const CAUSE_LABELS: [&str; 5] = [
    "collision",
    "stormy_weather",
    "excessive_current",
    "grounding",
    "overloading",
];

/// Short codes used when printing equations (`C`, `SW`, ...).
pub fn short_label(label: &str) -> &str {
    match label {
        "collision" => "C",
        "stormy_weather" => "SW",
        "excessive_current" => "EC",
        "grounding" => "G",
        "overloading" => "O",
        other => other,
    }
}

impl Cause {
    pub fn label(self) -> &'static str {
        match self {
            Cause::Collision => "collision",
            Cause::StormyWeather => "stormy_weather",
            Cause::ExcessiveCurrent => "excessive_current",
            Cause::Grounding => "grounding",
            Cause::Overloading => "overloading",
            Cause::Other => "other",
        }
    }

    /// Parse a canonical label, case-insensitively; spaces and hyphens are
    /// treated as underscores. Unmapped text is an error, never `Other`.
    pub fn parse(text: &str) -> Option<Cause> {
        let norm = text.trim().to_lowercase().replace([' ', '-'], "_");
        match norm.as_str() {
            "collision" => Some(Cause::Collision),
            "stormy_weather" | "stormyweather" => Some(Cause::StormyWeather),
            "excessive_current" | "excessivecurrent" => Some(Cause::ExcessiveCurrent),
            "grounding" => Some(Cause::Grounding),
            "overloading" => Some(Cause::Overloading),
            "other" => Some(Cause::Other),
            _ => None,
        }
    }

    fn predictor_index(self) -> Option<usize> {
        match self {
            Cause::Collision => Some(0),
            Cause::StormyWeather => Some(1),
            Cause::ExcessiveCurrent => Some(2),
            Cause::Grounding => Some(3),
            Cause::Overloading => Some(4),
            Cause::Other => None,
        }
    }
}

/// Mapping from user-defined alias text to a canonical cause.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    map: HashMap<String, Cause>,
}

impl AliasMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Read an `alias,canonical` CSV.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        {
            let headers = rdr.headers().map_err(csv_to_parse)?;
            if headers.len() != 2 || headers[0].trim() != "alias" || headers[1].trim() != "canonical" {
                return Err(Error::Parse {
                    line: 1,
                    message: "alias file header must be `alias,canonical`".into(),
                });
            }
        }
        let mut map = HashMap::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx as u64 + 2;
            let record = record.map_err(csv_to_parse)?;
            let alias = record[0].trim().to_lowercase().replace([' ', '-'], "_");
            let canonical = Cause::parse(&record[1]).ok_or_else(|| Error::Parse {
                line,
                message: format!("unrecognized canonical cause `{}`", &record[1]),
            })?;
            map.insert(alias, canonical);
        }
        Ok(AliasMap { map })
    }

    fn resolve(&self, text: &str) -> Option<Cause> {
        Cause::parse(text).or_else(|| {
            let norm = text.trim().to_lowercase().replace([' ', '-'], "_");
            self.map.get(&norm).copied()
        })
    }
}

/// One accident event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccidentRecord {
    pub year: u16,
    pub district: String,
    pub hour: Option<u8>,
    pub cause: Cause,
    pub casualties: Option<u32>,
}

const RECORD_HEADER: [&str; 5] = ["year", "district", "hour", "cause", "casualties"];

fn csv_to_parse(err: csv::Error) -> Error {
    let line = err
        .position()
        .map(|p| p.line())
        .unwrap_or(0);
    Error::Parse { line, message: err.to_string() }
}

fn is_unknown(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t.eq_ignore_ascii_case("unknown")
}

/// Parse a `year,district,hour,cause,casualties` CSV into records.
pub fn parse_records<R: Read>(reader: R, aliases: &AliasMap) -> Result<Vec<AccidentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    {
        let headers = rdr.headers().map_err(csv_to_parse)?;
        if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
            return Err(Error::EmptyInput);
        }
        let got: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
        if got != RECORD_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `{}`, got `{}`",
                    RECORD_HEADER.join(","),
                    got.join(",")
                ),
            });
        }
    }

    let mut records = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(csv_to_parse)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 fields, got {}", record.len()),
            });
        }

        let year: u16 = record[0].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-integer year `{}`", &record[0]),
        })?;
        if !(1995..=2099).contains(&year) {
            return Err(Error::Parse {
                line,
                message: format!("year {year} outside 1995..=2099"),
            });
        }

        let district = record[1].trim().to_lowercase();
        if district.is_empty() {
            return Err(Error::Parse { line, message: "empty district".into() });
        }

        let hour = if is_unknown(&record[2]) {
            None
        } else {
            let h: i64 = record[2].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-integer hour `{}`", &record[2]),
            })?;
            if !(0..=23).contains(&h) {
                return Err(Error::Parse {
                    line,
                    message: format!("hour out of range at line {line}: {h}"),
                });
            }
            Some(h as u8)
        };

        let cause = aliases.resolve(&record[3]).ok_or_else(|| Error::Parse {
            line,
            message: format!("unrecognized cause label `{}`", &record[3]),
        })?;

        let casualties = if is_unknown(&record[4]) {
            None
        } else {
            let v: u32 = record[4].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid casualty count `{}`", &record[4]),
            })?;
            Some(v)
        };

        records.push(AccidentRecord { year, district, hour, cause, casualties });
    }

    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records)
}

/// Per-year cause counts (predictors) and total accidents (response).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseYearMatrix {
    labels: Vec<String>,
    years: Vec<u16>,
    counts: Vec<Vec<u32>>,
    response: Vec<u32>,
}

impl CauseYearMatrix {
    /// Build from raw per-year cause counts, validating every invariant,
    /// including that no cause count exceeds that year's total.
    pub fn from_counts(
        labels: Vec<String>,
        years: Vec<u16>,
        counts: Vec<Vec<u32>>,
        response: Vec<u32>,
    ) -> Result<Self> {
        let m = Self::from_design(labels, years, counts, response)?;
        for (i, row) in m.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > m.response[i] {
                    return Err(Error::Shape(format!(
                        "predictor `{}` exceeds response in year {}",
                        m.labels[j], m.years[i]
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Build from arbitrary regression columns (synthetic design studies);
    /// shape and ordering are validated but counts need not be bounded by
    /// the response.
    pub fn from_design(
        labels: Vec<String>,
        years: Vec<u16>,
        counts: Vec<Vec<u32>>,
        response: Vec<u32>,
    ) -> Result<Self> {
        if labels.is_empty() || years.is_empty() {
            return Err(Error::EmptyInput);
        }
        if labels.len() > 16 {
            return Err(Error::TooManyPredictors(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Shape(format!("duplicate column label `{l}`")));
            }
        }
        for w in years.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Shape("years must be strictly ascending".into()));
            }
        }
        if counts.len() != years.len() || response.len() != years.len() {
            return Err(Error::Shape("row count mismatch".into()));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(Error::Shape(format!("row {i} has wrong arity")));
            }
        }
        Ok(CauseYearMatrix { labels, years, counts, response })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn years(&self) -> &[u16] {
        &self.years
    }

    pub fn response(&self) -> &[u32] {
        &self.response
    }

    /// Number of sample rows (years).
    pub fn n(&self) -> usize {
        self.years.len()
    }

    /// Number of predictor columns.
    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn predictor_column(&self, label: &str) -> Result<Vec<u32>> {
        let j = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        Ok(self.counts.iter().map(|row| row[j]).collect())
    }

    pub fn year_index(&self, year: u16) -> Result<usize> {
        self.years
            .iter()
            .position(|&y| y == year)
            .ok_or(Error::UnknownYear(year))
    }

    /// Restrict the matrix to a subset of its years (order preserved).
    pub fn restrict_years(&self, keep: &[u16]) -> Result<CauseYearMatrix> {
        let mut years = Vec::new();
        let mut counts = Vec::new();
        let mut response = Vec::new();
        for &y in keep {
            let i = self.year_index(y)?;
            years.push(y);
            counts.push(self.counts[i].clone());
            response.push(self.response[i]);
        }
        CauseYearMatrix::from_design(self.labels.clone(), years, counts, response)
    }

    /// Write the matrix as `year,<labels...>,total` CSV.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "year,{},total", self.labels.join(","))?;
        for (i, &year) in self.years.iter().enumerate() {
            let cells: Vec<String> = self.counts[i].iter().map(|v| v.to_string()).collect();
            writeln!(w, "{year},{},{}", cells.join(","), self.response[i])?;
        }
        Ok(())
    }

    /// Read back a matrix written by [`to_csv`](Self::to_csv).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let labels: Vec<String>;
        {
            let headers = rdr.headers().map_err(csv_to_parse)?;
            let cols: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
            if cols.len() < 3 || cols[0] != "year" || cols[cols.len() - 1] != "total" {
                return Err(Error::Parse {
                    line: 1,
                    message: "matrix header must be `year,<causes...>,total`".into(),
                });
            }
            labels = cols[1..cols.len() - 1].to_vec();
        }
        let mut years = Vec::new();
        let mut counts = Vec::new();
        let mut response = Vec::new();
        for result in rdr.records() {
            let record = result.map_err(csv_to_parse)?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let parse_cell = |s: &str| -> Result<u32> {
                s.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid count `{s}`"),
                })
            };
            let year: u16 = record[0].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-integer year `{}`", &record[0]),
            })?;
            years.push(year);
            let mut row = Vec::with_capacity(labels.len());
            for j in 0..labels.len() {
                row.push(parse_cell(&record[j + 1])?);
            }
            counts.push(row);
            response.push(parse_cell(&record[labels.len() + 1])?);
        }
        CauseYearMatrix::from_design(labels, years, counts, response)
    }
}

/// Aggregate records over `[from, to]` into the five-cause matrix.
///
/// Years without records appear as all-zero rows. `Other` contributes to
/// the response only.
pub fn aggregate(records: &[AccidentRecord], from: u16, to: u16) -> Result<CauseYearMatrix> {
    let k = CAUSE_LABELS.len();
    if from > to {
        return Err(Error::Domain(format!("window start {from} after end {to}")));
    }
    let span = (to - from) as usize + 1;
    if span < k + 2 {
        return Err(Error::InsufficientWindow { from, to, got: span, need: k + 2 });
    }
    let in_window: Vec<&AccidentRecord> =
        records.iter().filter(|r| (from..=to).contains(&r.year)).collect();
    if in_window.is_empty() {
        return Err(Error::EmptyInput);
    }

    let years: Vec<u16> = (from..=to).collect();
    let mut counts = vec![vec![0u32; k]; span];
    let mut response = vec![0u32; span];
    for r in &in_window {
        let i = (r.year - from) as usize;
        response[i] += 1;
        if let Some(j) = r.cause.predictor_index() {
            counts[i][j] += 1;
        }
    }
    CauseYearMatrix::from_counts(
        CAUSE_LABELS.iter().map(|s| s.to_string()).collect(),
        years,
        counts,
        response,
    )
}
