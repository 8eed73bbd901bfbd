//! CSV/JSON writers. CSV: header row, comma separator, `\n` line endings,
//! floats in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use seqalloc::policies::Policy;
use seqalloc::sim::{AggregateReport, TrialRecord};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn allocation_csv(prices: &[f64], alloc: &[f64], expected: &[f64]) -> String {
    let mut s = String::from("period,price,alloc,expected_min_revenue\n");
    for t in 0..prices.len() {
        writeln!(s, "{},{},{},{}", t + 1, prices[t], alloc[t], expected[t]).unwrap();
    }
    s
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("trial,policy,revenue\n");
    for rec in records {
        for p in Policy::ALL {
            writeln!(s, "{},{},{}", rec.trial_index, p, rec.revenue(p)).unwrap();
        }
    }
    s
}

pub fn aggregate_csv(report: &AggregateReport) -> String {
    let mut s = String::from("policy,mean,std,min,max\n");
    for st in &report.stats {
        writeln!(
            s,
            "{},{},{},{},{}",
            st.policy, st.mean, st.std, st.min, st.max
        )
        .unwrap();
    }
    s
}

pub fn traces_csv(report: &AggregateReport) -> String {
    let mut s = String::from("period,policy,mean_cum_revenue,std_cum_revenue\n");
    let horizon = report.traces.first().map_or(0, |t| t.mean.len());
    for t in 0..horizon {
        for tr in &report.traces {
            writeln!(s, "{},{},{},{}", t + 1, tr.policy, tr.mean[t], tr.std[t]).unwrap();
        }
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            write!(acc, "{b:02x}").unwrap();
            acc
        })
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut body =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    body.push('\n');
    write_text(dir, name, &body)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
