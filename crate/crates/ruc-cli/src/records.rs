//! Trial-record CSV with the fixed column order
//! `experiment,seed,dA,dB,dE,epsilon,statistic,threshold,exceeded,wallTimeMs`
//! and 17-significant-digit reals, so files are byte-reproducible and
//! parse back exactly.

use std::path::Path;

use ruc_core::certify::TrialRecord;
use ruc_core::io::f64_repr;
use ruc_core::{Error, Result};

pub const CSV_HEADER: &str = "experiment,seed,dA,dB,dE,epsilon,statistic,threshold,exceeded,wallTimeMs";

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(r.experiment);
        out.push(',');
        out.push_str(&r.seed.to_string());
        out.push(',');
        out.push_str(&r.d_a.to_string());
        out.push(',');
        out.push_str(&r.d_b.to_string());
        out.push(',');
        out.push_str(&r.d_e.to_string());
        out.push(',');
        out.push_str(&f64_repr(r.epsilon));
        out.push(',');
        out.push_str(&f64_repr(r.statistic));
        out.push(',');
        out.push_str(&f64_repr(r.threshold));
        out.push(',');
        out.push_str(if r.exceeded { "true" } else { "false" });
        out.push(',');
        out.push_str(&r.wall_time_ms.to_string());
        out.push('\n');
    }
    out
}

pub fn write_records(records: &[TrialRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}

/// Strict parser for the exact schema written by `write_records`.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("bad CSV header {other:?}"))),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse(format!(
                "record {i}: expected 10 fields, got {}",
                fields.len()
            )));
        }
        let experiment = match fields[0] {
            "certify" => "certify",
            "net-build" => "net-build",
            "net-verify" => "net-verify",
            "lde" => "lde",
            "cramer" => "cramer",
            "concentration" => "concentration",
            "entanglement" => "entanglement",
            "scaling" => "scaling",
            "chernoff" => "chernoff",
            "shatter-search" => "shatter-search",
            other => return Err(Error::Parse(format!("record {i}: unknown experiment '{other}'"))),
        };
        let parse_num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("record {i}: bad {what} '{s}'")))
        };
        let exceeded = match fields[8] {
            "true" => true,
            "false" => false,
            other => return Err(Error::Parse(format!("record {i}: bad exceeded '{other}'"))),
        };
        records.push(TrialRecord {
            experiment,
            seed: fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("record {i}: bad seed")))?,
            d_a: fields[2]
                .parse()
                .map_err(|_| Error::Parse(format!("record {i}: bad dA")))?,
            d_b: fields[3]
                .parse()
                .map_err(|_| Error::Parse(format!("record {i}: bad dB")))?,
            d_e: fields[4]
                .parse()
                .map_err(|_| Error::Parse(format!("record {i}: bad dE")))?,
            epsilon: parse_num(fields[5], "epsilon")?,
            statistic: parse_num(fields[6], "statistic")?,
            threshold: parse_num(fields[7], "threshold")?,
            exceeded,
            wall_time_ms: fields[9]
                .parse()
                .map_err(|_| Error::Parse(format!("record {i}: bad wallTimeMs")))?,
        });
    }
    Ok(records)
}
