use std::io::Write;

use anyhow::Result;
use optbeam::{ScoringModel, Strategy};
use serde::Serialize;

use crate::fmt6;
use crate::records::{decode_all, DecodeRecord};
use crate::runspec::{RunSpec, Source};

pub const COMPARE_HEADER: [&str; 9] = [
    "strategy",
    "b",
    "r",
    "mean_score",
    "mean_revised",
    "mean_stop_step",
    "mean_items_expanded",
    "mean_len_ratio",
    "frac_completed",
];

/// Means over all sources for one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub strategy: Strategy,
    pub b: usize,
    pub r: f64,
    pub mean_score: f64,
    pub mean_revised: f64,
    pub mean_stop_step: f64,
    pub mean_items_expanded: f64,
    /// Mean of `|y| / |x|` over sources with at least one token.
    pub mean_len_ratio: f64,
    pub frac_completed: f64,
    pub count: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

impl CompareRow {
    pub fn aggregate(strategy: Strategy, b: usize, r: f64, records: &[DecodeRecord]) -> Self {
        Self {
            strategy,
            b,
            r,
            mean_score: mean(records.iter().map(|x| x.score)),
            mean_revised: mean(records.iter().map(|x| x.revised_score)),
            mean_stop_step: mean(records.iter().map(|x| x.stop_step as f64)),
            mean_items_expanded: mean(records.iter().map(|x| x.items_expanded as f64)),
            mean_len_ratio: mean(records.iter().filter_map(DecodeRecord::len_ratio)),
            frac_completed: mean(records.iter().map(|x| f64::from(u8::from(x.completed)))),
            count: records.len(),
        }
    }

    pub fn csv_record(&self) -> [String; 9] {
        [
            self.strategy.name().to_string(),
            self.b.to_string(),
            fmt6(self.r),
            fmt6(self.mean_score),
            fmt6(self.mean_revised),
            fmt6(self.mean_stop_step),
            fmt6(self.mean_items_expanded),
            fmt6(self.mean_len_ratio),
            fmt6(self.frac_completed),
        ]
    }
}

/// One row per grid cell, with the per-line records that produced it.
pub fn cmd_compare(
    model: &dyn ScoringModel,
    sources: &[Source],
    spec: &RunSpec,
) -> Result<Vec<(CompareRow, Vec<DecodeRecord>)>> {
    spec.grid()
        .into_iter()
        .map(|(s, b, r)| {
            let records = decode_all(model, sources, &spec.config(s, b, r))?;
            Ok((CompareRow::aggregate(s, b, r, &records), records))
        })
        .collect()
}

pub fn write_compare_csv(out: &mut dyn Write, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}
