//! CSV serialization of result rows and their aggregation.
//!
//! Raw schema (one row per run per budget):
//! `policy,budget,run,seed,regret,total_reward,total_cost,stopping_time,pulls_optimal,pulls_arm_1..K`
//!
//! Aggregated schema (one row per policy-budget cell):
//! `policy,budget,mean_regret,std_regret,runs`
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always serialize to equal bytes.

use std::io::{Read, Write};

use super::run::ResultRow;
use super::HarnessError;

/// Mean and sample standard deviation of regret over one (policy, budget)
/// group.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub policy: String,
    pub budget: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub runs: u64,
    /// Set when the group had a single run, where the deviation is reported
    /// as zero by convention.
    pub single_run: bool,
}

pub fn write_rows_csv<W: Write>(writer: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let k = rows.first().map_or(0, |r| r.pulls.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = [
        "policy",
        "budget",
        "run",
        "seed",
        "regret",
        "total_reward",
        "total_cost",
        "stopping_time",
        "pulls_optimal",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=k).map(|i| format!("pulls_arm_{i}")));
    w.write_record(&header)?;
    for row in rows {
        let mut record: Vec<String> = vec![
            row.policy.clone(),
            row.budget.to_string(),
            row.run.to_string(),
            row.seed.to_string(),
            row.regret.to_string(),
            row.total_reward.to_string(),
            row.total_cost.to_string(),
            row.stopping_time.to_string(),
            row.pulls_optimal.to_string(),
        ];
        record.extend(row.pulls.iter().map(|p| p.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// The raw CSV as a string; handy for byte-identity checks.
pub fn rows_to_csv_string(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_rows_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| HarnessError::MalformedCsv(e.to_string()))
}

pub fn read_rows_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    const FIXED: usize = 9;
    if header.len() < FIXED
        || header.iter().take(FIXED).ne([
            "policy",
            "budget",
            "run",
            "seed",
            "regret",
            "total_reward",
            "total_cost",
            "stopping_time",
            "pulls_optimal",
        ])
    {
        return Err(HarnessError::MalformedCsv(
            "unexpected header; not a results file".into(),
        ));
    }
    let k = header.len() - FIXED;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != FIXED + k {
            return Err(HarnessError::MalformedCsv(format!(
                "row has {} fields, expected {}",
                record.len(),
                FIXED + k
            )));
        }
        let field = |i: usize| record.get(i).unwrap_or_default();
        let parse_u64 = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|e| HarnessError::MalformedCsv(format!("field {i}: {e}")))
        };
        let parse_f64 = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| HarnessError::MalformedCsv(format!("field {i}: {e}")))
        };
        rows.push(ResultRow {
            policy: field(0).to_string(),
            budget: parse_u64(1)?,
            run: parse_u64(2)?,
            seed: parse_u64(3)?,
            regret: parse_f64(4)?,
            total_reward: parse_f64(5)?,
            total_cost: parse_f64(6)?,
            stopping_time: parse_u64(7)?,
            pulls_optimal: parse_u64(8)?,
            pulls: (FIXED..FIXED + k)
                .map(parse_u64)
                .collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

/// Groups rows by (policy, budget) in first-appearance order and reduces
/// each group to mean and sample (n-1) standard deviation of regret.
pub fn aggregate(rows: &[ResultRow]) -> Result<Vec<AggregateRow>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyAggregation);
    }
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut stats: Vec<Welford> = Vec::new();
    for row in rows {
        let key = (row.policy.clone(), row.budget);
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                stats.push(Welford::default());
                order.len() - 1
            }
        };
        stats[idx].push(row.regret);
    }
    Ok(order
        .into_iter()
        .zip(stats)
        .map(|((policy, budget), w)| AggregateRow {
            policy,
            budget,
            mean_regret: w.mean(),
            std_regret: w.sample_std(),
            runs: w.count(),
            single_run: w.count() == 1,
        })
        .collect())
}

pub fn write_aggregate_csv<W: Write>(writer: W, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["policy", "budget", "mean_regret", "std_regret", "runs"])?;
    for row in rows {
        w.write_record(&[
            row.policy.clone(),
            row.budget.to_string(),
            row.mean_regret.to_string(),
            row.std_regret.to_string(),
            row.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming mean and variance.
#[derive(Clone, Debug, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn count(&self) -> u64 {
        self.count
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sample_std(&self) -> f64 {
        if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).sqrt()
        } else {
            0.0
        }
    }
}
