use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed spot price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    /// UTC seconds since the epoch
    pub timestamp: i64,
    /// $/hour
    pub price: f64,
    pub instance_type: String,
    pub zone: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryFormat {
    /// header `timestamp,price`
    TwoColumn,
    /// `describe-spot-price-history` export: `Timestamp`, `InstanceType`,
    /// `ProductDescription`, `AvailabilityZone`, `SpotPrice`
    AwsDescribe,
}

impl std::str::FromStr for HistoryFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_column" => Ok(HistoryFormat::TwoColumn),
            "aws_describe" => Ok(HistoryFormat::AwsDescribe),
            _ => Err(Error::invalid(format!("unknown history format '{s}'"))),
        }
    }
}

/// Epoch seconds, RFC 3339, or `YYYY-MM-DD[ T]HH:MM:SS` read as UTC.
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
    for fmt in [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S%.f",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp())
}

fn parse_price(raw: &str, line: usize) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("price '{raw}' is not a number"),
    })?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Parse {
            line,
            msg: format!("price {v} must be positive"),
        });
    }
    Ok(v)
}

/// Reads a price history from any reader.
pub fn parse_history<R: Read>(input: R, format: HistoryFormat) -> Result<Vec<PricePoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyData("history has no header".into()));
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (ts_col, price_col, type_col, zone_col) = match format {
        HistoryFormat::TwoColumn => {
            let (Some(t), Some(p)) = (col("timestamp"), col("price")) else {
                return Err(Error::Format(format!(
                    "expected header 'timestamp,price', got '{}'",
                    join(&headers)
                )));
            };
            (t, p, None, None)
        }
        HistoryFormat::AwsDescribe => {
            let required = [
                "Timestamp",
                "InstanceType",
                "ProductDescription",
                "AvailabilityZone",
                "SpotPrice",
            ];
            let missing: Vec<&str> = required
                .iter()
                .copied()
                .filter(|c| col(c).is_none())
                .collect();
            if !missing.is_empty() {
                return Err(Error::Format(format!(
                    "missing columns: {}",
                    missing.join(", ")
                )));
            }
            (
                col("Timestamp").unwrap(),
                col("SpotPrice").unwrap(),
                col("InstanceType"),
                col("AvailabilityZone"),
            )
        }
    };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |c: usize| rec.get(c).unwrap_or("");
        let timestamp = parse_timestamp(field(ts_col)).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad timestamp '{}'", field(ts_col)),
        })?;
        let price = parse_price(field(price_col), line)?;
        out.push(PricePoint {
            timestamp,
            price,
            instance_type: type_col.map(|c| field(c).to_string()).unwrap_or_default(),
            zone: zone_col
                .map(|c| field(c).to_string())
                .filter(|z| !z.is_empty()),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyData("history has no rows".into()));
    }
    Ok(out)
}

fn join(h: &csv::StringRecord) -> String {
    h.iter().collect::<Vec<_>>().join(",")
}

/// Reads a price history file.
pub fn parse_history_path(path: &Path, format: HistoryFormat) -> Result<Vec<PricePoint>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_history(file, format)
}

/// Forward-fills the price series onto a grid with spacing `t_k` seconds,
/// turning change events into evenly spaced samples.
pub fn resample_to_slots(points: &[PricePoint], t_k: f64) -> Result<Vec<PricePoint>> {
    if !(t_k >= 1.0) {
        return Err(Error::invalid("slot spacing must be at least one second"));
    }
    if points.is_empty() {
        return Err(Error::EmptyData("nothing to resample".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.timestamp);
    let step = t_k.round() as i64;
    let start = sorted[0].timestamp;
    let end = sorted[sorted.len() - 1].timestamp;
    let mut out = Vec::new();
    let mut j = 0;
    let mut t = start;
    while t <= end {
        while j + 1 < sorted.len() && sorted[j + 1].timestamp <= t {
            j += 1;
        }
        out.push(PricePoint {
            timestamp: t,
            ..sorted[j].clone()
        });
        t += step;
    }
    Ok(out)
}
