//! CSV ingestion and output of series.
//!
//! Accepted inputs have a header row and either a single `value` column or
//! `date,value` columns. Dates are kept as text and must increase strictly
//! under lexicographic order, which matches chronological order for
//! ISO-8601 dates.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Shortest decimal text that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_series_csv(text: &str) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    let dated = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["value"] => false,
        ["date", "value"] => true,
        _ => {
            return Err(parse_err(
                1,
                format!("expected header `value` or `date,value`, got `{}`", header.join(",")),
            ))
        }
    };
    let mut values = Vec::new();
    let mut dates: Vec<String> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let raw = rec.get(if dated { 1 } else { 0 }).unwrap_or("");
        if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
            return Err(parse_err(line, "missing value (imputation is not supported)"));
        }
        let v: f64 = raw.parse().map_err(|_| parse_err(line, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("`{raw}` is not finite")));
        }
        if dated {
            let d = rec.get(0).unwrap_or("").to_string();
            if d.is_empty() {
                return Err(parse_err(line, "missing date"));
            }
            if let Some(prev) = dates.last() {
                if d.as_str() <= prev.as_str() {
                    return Err(parse_err(line, format!("date `{d}` does not follow `{prev}`")));
                }
            }
            dates.push(d);
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(parse_err(1, "no observations"));
    }
    if dated {
        TimeSeries::with_dates(values, dates)
    } else {
        TimeSeries::new(values)
    }
}

/// Renders a series as CSV in the format read by [`parse_series_csv`].
pub fn series_to_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    match series.dates() {
        Some(dates) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["date", "value"]).expect("in-memory write");
            for (d, v) in dates.iter().zip(series.values()) {
                w.write_record([d.as_str(), &format_f64(*v)]).expect("in-memory write");
            }
            let bytes = w.into_inner().expect("in-memory flush");
            out.push_str(&String::from_utf8(bytes).expect("input was utf-8"));
        }
        None => {
            out.push_str("value\n");
            for v in series.values() {
                out.push_str(&format_f64(*v));
                out.push('\n');
            }
        }
    }
    out
}
