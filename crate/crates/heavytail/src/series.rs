//! CSV ingestion of return/price series and log-return construction.
//!
//! Two input layouts are accepted, distinguished by the required header row:
//! a single `return` column, or `date,price` with ISO-8601 dates. Errors name
//! the offending row by its 1-based line number in the file (the header is
//! line 1).

use crate::{Error, Result};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Daily,
    Weekly,
    Monthly,
}

impl std::str::FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "daily" => Ok(Self::Daily),
            "weekly" => Ok(Self::Weekly),
            "monthly" => Ok(Self::Monthly),
            other => Err(Error::Domain(format!(
                "unknown frequency {other:?}; expected daily, weekly, or monthly"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Prices,
    Returns,
}

/// A loaded input series. Price series keep their date column so weekly and
/// monthly log-returns can group on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesInput {
    pub id: String,
    pub values: Vec<f64>,
    pub kind: SeriesKind,
    pub frequency: Frequency,
    dates: Option<Vec<NaiveDate>>,
}

impl SeriesInput {
    /// Wraps already-computed returns (no grouping column, so `Daily`).
    pub fn from_returns(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Ingestion("return series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Ingestion(format!(
                "return series has a non-finite value at position {}",
                i + 1
            )));
        }
        Ok(Self {
            id: id.into(),
            values,
            kind: SeriesKind::Returns,
            frequency: Frequency::Daily,
            dates: None,
        })
    }

    /// Wraps a dated price series; prices must be strictly positive and dates
    /// strictly increasing.
    pub fn from_prices(
        id: impl Into<String>,
        values: Vec<f64>,
        dates: Vec<NaiveDate>,
        frequency: Frequency,
    ) -> Result<Self> {
        if values.len() != dates.len() {
            return Err(Error::Ingestion(format!(
                "{} prices but {} dates",
                values.len(),
                dates.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::Ingestion(
                "price series needs at least 2 observations".into(),
            ));
        }
        if let Some(i) = values.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::Ingestion(format!(
                "price must be positive and finite, got {} at position {}",
                values[i],
                i + 1
            )));
        }
        if let Some(i) = (1..dates.len()).find(|&i| dates[i] <= dates[i - 1]) {
            return Err(Error::Ingestion(format!(
                "dates must be strictly increasing, got {} after {} at position {}",
                dates[i],
                dates[i - 1],
                i + 1
            )));
        }
        Ok(Self {
            id: id.into(),
            values,
            kind: SeriesKind::Prices,
            frequency,
            dates: Some(dates),
        })
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }
}

/// Parses CSV text into a series. The header decides the layout: `return`
/// for a plain return column, `date,price` for a dated price series.
pub fn parse_series(text: &str, id: &str, frequency: Frequency) -> Result<SeriesInput> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Ingestion(format!("unreadable header row: {e}")))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();

    match headers.as_slice() {
        [h] if h == "return" => {
            let mut values = Vec::new();
            for record in reader.records() {
                let (record, row) = checked_record(record, 1)?;
                values.push(parse_number(&record[0], row, "return")?);
            }
            if values.is_empty() {
                return Err(Error::Ingestion("no data rows after the header".into()));
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Ingestion(format!(
                    "row {}: return is not finite",
                    i + 2
                )));
            }
            let mut series = SeriesInput::from_returns(id, values)?;
            series.frequency = frequency;
            Ok(series)
        }
        [d, p] if d == "date" && p == "price" => {
            let mut values = Vec::new();
            let mut dates = Vec::new();
            for record in reader.records() {
                let (record, row) = checked_record(record, 2)?;
                let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
                    Error::Ingestion(format!(
                        "row {row}: invalid ISO-8601 date {:?} ({e})",
                        &record[0]
                    ))
                })?;
                let price = parse_number(&record[1], row, "price")?;
                if !(price > 0.0) || !price.is_finite() {
                    return Err(Error::Ingestion(format!(
                        "row {row}: price must be positive, got {price}"
                    )));
                }
                if let Some(&prev) = dates.last() {
                    if date <= prev {
                        return Err(Error::Ingestion(format!(
                            "row {row}: dates must be strictly increasing, got {date} after {prev}"
                        )));
                    }
                }
                dates.push(date);
                values.push(price);
            }
            SeriesInput::from_prices(id, values, dates, frequency)
        }
        other => Err(Error::Ingestion(format!(
            "header must be `return` or `date,price`, got {:?}",
            other.join(",")
        ))),
    }
}

/// Loads a series file; the file stem becomes the series id.
pub fn load_series(path: &Path, frequency: Frequency) -> Result<SeriesInput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Ingestion(format!("cannot read {}: {e}", path.display())))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_series(&text, &id, frequency)
}

fn checked_record(
    record: std::result::Result<csv::StringRecord, csv::Error>,
    want_fields: usize,
) -> Result<(csv::StringRecord, u64)> {
    let record = record.map_err(|e| {
        let row = e
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        Error::Ingestion(format!("row {row}: {e}"))
    })?;
    let row = record.position().map(|p| p.line()).unwrap_or(0);
    if record.len() != want_fields {
        return Err(Error::Ingestion(format!(
            "row {row}: expected {want_fields} field(s), got {}",
            record.len()
        )));
    }
    Ok((record, row))
}

fn parse_number(field: &str, row: u64, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Ingestion(format!("row {row}: invalid {what} {field:?}")))
}

/// Log-returns of a series at the requested sampling frequency.
///
/// Price series yield `r_i = ln(p_{i+1}/p_i)` over consecutive prices after
/// resampling to the last observation of each ISO week / calendar month
/// (daily keeps every row). Return series pass through unchanged and cannot
/// be resampled, since they carry no grouping column.
pub fn log_returns(series: &SeriesInput, frequency: Frequency) -> Result<Vec<f64>> {
    match series.kind {
        SeriesKind::Returns => {
            if frequency != Frequency::Daily {
                return Err(Error::Ingestion(
                    "return series carry no dates to regroup; supply date,price input \
                     for weekly or monthly returns"
                        .into(),
                ));
            }
            Ok(series.values.clone())
        }
        SeriesKind::Prices => {
            let dates = series.dates.as_ref().expect("price series carry dates");
            let sampled = resample_last(&series.values, dates, frequency);
            if sampled.len() < 2 {
                return Err(Error::InsufficientData {
                    needed: 2,
                    got: sampled.len(),
                });
            }
            Ok(sampled.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
        }
    }
}

/// Last observation of each period; dates are already strictly increasing,
/// so period runs are contiguous.
fn resample_last(values: &[f64], dates: &[NaiveDate], frequency: Frequency) -> Vec<f64> {
    if frequency == Frequency::Daily {
        return values.to_vec();
    }
    let key = |d: &NaiveDate| -> (i32, u32) {
        match frequency {
            Frequency::Weekly => (d.iso_week().year(), d.iso_week().week()),
            Frequency::Monthly => (d.year(), d.month()),
            Frequency::Daily => unreachable!(),
        }
    };
    let mut out = Vec::new();
    for i in 0..values.len() {
        if i + 1 == values.len() || key(&dates[i + 1]) != key(&dates[i]) {
            out.push(values[i]);
        }
    }
    out
}
