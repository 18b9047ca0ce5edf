//! Price CSV ingestion into a uniformly indexed log-price series.

use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// What to do when consecutive timestamps are further apart than the sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    /// Reject the file.
    #[default]
    Error,
    /// Repeat the last price for every missing interval.
    ForwardFill,
    /// Concatenate across the gap and count it.
    Ignore,
}

impl std::str::FromStr for GapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Self::Error),
            "forward-fill" | "ffill" => Ok(Self::ForwardFill),
            "ignore" => Ok(Self::Ignore),
            other => Err(Error::Config(format!("unknown gap policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    /// Column holding prices, by header name or zero-based index.
    pub price_column: String,
    /// Column holding timestamps; `None` treats rows as already uniform.
    pub timestamp_column: Option<String>,
    /// Sampling interval in seconds.
    pub interval_secs: i64,
    pub gap_policy: GapPolicy,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            price_column: "price".into(),
            timestamp_column: Some("timestamp".into()),
            interval_secs: 60,
            gap_policy: GapPolicy::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    /// Samples inserted by forward filling.
    pub filled: usize,
    /// Gaps found (each may span several intervals).
    pub gaps: usize,
    pub first_price: f64,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    /// `log(P_t / P_0)`.
    pub log_prices: TimeSeries,
    pub report: IngestReport,
}

/// Parse a timestamp as epoch seconds, RFC 3339, or a naive UTC date-time.
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v.floor() as i64);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
    .map(|dt| dt.and_utc().timestamp())
}

fn column_index(headers: &csv::StringRecord, selector: &str) -> Result<usize> {
    if let Some(i) = headers.iter().position(|h| h.trim() == selector) {
        return Ok(i);
    }
    match selector.parse::<usize>() {
        Ok(i) if i < headers.len() => Ok(i),
        _ => Err(Error::Config(format!(
            "column '{selector}' not found in header {:?}",
            headers.iter().collect::<Vec<_>>()
        ))),
    }
}

pub fn ingest_csv(path: &Path, options: &IngestOptions) -> Result<Ingested> {
    let file = std::fs::File::open(path)?;
    ingest_reader(file, options)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, options: &IngestOptions) -> Result<Ingested> {
    if options.interval_secs <= 0 {
        return Err(Error::Config(format!(
            "sampling interval must be positive, got {}",
            options.interval_secs
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let price_col = column_index(&headers, &options.price_column)?;
    let time_col = options
        .timestamp_column
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;

    let mut prices: Vec<f64> = Vec::new();
    let mut last_time: Option<i64> = None;
    let mut filled = 0;
    let mut gaps = 0;
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        // Row numbers are 1-based and count the header line.
        let row = i + 2;
        let record = record?;
        rows += 1;
        let field = record.get(price_col).ok_or_else(|| Error::Data {
            row,
            message: "missing price field".into(),
        })?;
        let price: f64 = field.parse().map_err(|_| Error::Data {
            row,
            message: format!("unparseable price '{field}'"),
        })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::Data {
                row,
                message: format!("price must be positive, got {price}"),
            });
        }
        if let Some(tc) = time_col {
            let raw = record.get(tc).unwrap_or("");
            let t = parse_timestamp(raw).ok_or_else(|| Error::Data {
                row,
                message: format!("unparseable timestamp '{raw}'"),
            })?;
            if let Some(prev) = last_time {
                if t <= prev {
                    return Err(Error::Data {
                        row,
                        message: format!("timestamp {raw} does not increase"),
                    });
                }
                let steps = (t - prev) / options.interval_secs;
                if steps > 1 {
                    let missing = (steps - 1) as usize;
                    gaps += 1;
                    match options.gap_policy {
                        GapPolicy::Error => {
                            return Err(Error::Data {
                                row,
                                message: format!("{missing} missing interval(s) before {raw}"),
                            })
                        }
                        GapPolicy::ForwardFill => {
                            let last = *prices.last().expect("previous row exists");
                            prices.extend(std::iter::repeat_n(last, missing));
                            filled += missing;
                        }
                        GapPolicy::Ignore => {}
                    }
                }
            }
            last_time = Some(t);
        }
        prices.push(price);
    }
    let first_price = *prices
        .first()
        .ok_or_else(|| Error::Input("price file has no data rows".into()))?;
    let log_prices = prices.iter().map(|p| (p / first_price).ln()).collect();
    if filled > 0 {
        log::info!("forward-filled {filled} missing samples across {gaps} gap(s)");
    }
    Ok(Ingested {
        log_prices: TimeSeries::with_dt(log_prices, options.interval_secs as f64),
        report: IngestReport {
            rows,
            filled,
            gaps,
            first_price,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str, options: &IngestOptions) -> Result<Ingested> {
        ingest_reader(text.as_bytes(), options)
    }

    #[test]
    fn two_rows() {
        let out = ingest(
            "timestamp,price\n0,100\n60,101\n",
            &IngestOptions::default(),
        )
        .unwrap();
        assert_eq!(out.log_prices.values, vec![0.0, (1.01f64).ln()]);
        assert_eq!(out.report.rows, 2);
    }

    #[test]
    fn constant_prices_give_zero_path() {
        let text = "timestamp,price\n2000-01-03T09:30:00Z,50\n2000-01-03T09:31:00Z,50\n2000-01-03T09:32:00Z,50\n";
        let out = ingest(text, &IngestOptions::default()).unwrap();
        assert!(out.log_prices.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn forward_fill_reports_count() {
        let text = "timestamp,price\n0,10\n60,11\n180,12\n240,13\n";
        let opts = IngestOptions {
            gap_policy: GapPolicy::ForwardFill,
            ..Default::default()
        };
        let out = ingest(text, &opts).unwrap();
        assert_eq!(out.log_prices.len(), 5);
        assert_eq!(out.report.filled, 1);
        assert_eq!(out.log_prices.values[2], out.log_prices.values[1]);

        let err = ingest(text, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 4, .. }), "{err}");

        let ignore = IngestOptions {
            gap_policy: GapPolicy::Ignore,
            ..Default::default()
        };
        let out = ingest(text, &ignore).unwrap();
        assert_eq!((out.log_prices.len(), out.report.gaps), (4, 1));
    }

    #[test]
    fn bad_rows_name_their_row() {
        let err = ingest("timestamp,price\n0,10\n60,-1\n", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 3, .. }));
        let err = ingest("timestamp,price\n0,10\n0,11\n", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 3, .. }));
        let err = ingest("timestamp,price\n0,abc\n", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data { row: 2, .. }));
    }

    #[test]
    fn column_selection() {
        let text = "time,open,close\n0,1,2\n60,1,4\n";
        let opts = IngestOptions {
            price_column: "2".into(),
            timestamp_column: Some("time".into()),
            ..Default::default()
        };
        let out = ingest(text, &opts).unwrap();
        assert_eq!(out.log_prices.values[1], 2f64.ln());
        let missing = IngestOptions {
            price_column: "volume".into(),
            ..opts
        };
        assert!(matches!(ingest(text, &missing), Err(Error::Config(_))));
    }

    #[test]
    fn timestamp_formats() {
        assert_eq!(parse_timestamp("1700000000"), Some(1_700_000_000));
        assert_eq!(parse_timestamp("1970-01-01T00:01:00Z"), Some(60));
        assert_eq!(parse_timestamp("1970-01-01 00:02:00"), Some(120));
        assert_eq!(parse_timestamp("yesterday"), None);
    }
}
