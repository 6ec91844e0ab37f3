use std::io::Write;

use anyhow::{ensure, Result};
use optbeam::ScoringModel;

use crate::fmt6;
use crate::records::decode_all;
use crate::runspec::{RunSpec, Source};

pub const TUNE_HEADER: [&str; 7] = [
    "kind",
    "r",
    "b",
    "mean_score",
    "mean_revised",
    "mean_len_ratio",
    "mean_stop_step",
];

#[derive(Clone, Debug, PartialEq)]
pub struct TuneRow {
    /// `cell` for a grid point, `best` for the per-reward best beam size.
    pub kind: &'static str,
    pub r: f64,
    pub b: usize,
    pub mean_score: f64,
    pub mean_revised: f64,
    pub mean_len_ratio: f64,
    pub mean_stop_step: f64,
}

impl TuneRow {
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.kind.to_string(),
            fmt6(self.r),
            self.b.to_string(),
            fmt6(self.mean_score),
            fmt6(self.mean_revised),
            fmt6(self.mean_len_ratio),
            fmt6(self.mean_stop_step),
        ]
    }
}

/// Reward x beam-size sweep of one bounded-reward strategy. Cells come
/// first (by r, then b), then one `best` row per r: the beam size with the
/// highest mean revised score, smallest b on ties.
pub fn cmd_tune(
    model: &dyn ScoringModel,
    sources: &[Source],
    spec: &RunSpec,
) -> Result<Vec<TuneRow>> {
    ensure!(
        spec.strategies.len() == 1,
        "tune takes exactly one strategy"
    );
    let strategy = spec.strategies[0];
    ensure!(
        strategy.is_bounded(),
        "tune needs a bounded-reward strategy, got {strategy}"
    );
    let mut bs = spec.beam_sizes.clone();
    bs.sort_unstable();
    bs.dedup();
    let mut rs = spec.rewards.clone();
    rs.sort_by(f64::total_cmp);
    rs.dedup();

    let mut cells = Vec::new();
    for &r in &rs {
        for &b in &bs {
            let records = decode_all(model, sources, &spec.config(strategy, b, r))?;
            let row = crate::compare::CompareRow::aggregate(strategy, b, r, &records);
            cells.push(TuneRow {
                kind: "cell",
                r,
                b,
                mean_score: row.mean_score,
                mean_revised: row.mean_revised,
                mean_len_ratio: row.mean_len_ratio,
                mean_stop_step: row.mean_stop_step,
            });
        }
    }
    let mut best = Vec::new();
    for &r in &rs {
        let top = cells
            .iter()
            .filter(|c| c.r == r)
            .fold(None::<&TuneRow>, |acc, c| match acc {
                Some(a) if a.mean_revised >= c.mean_revised => Some(a),
                _ => Some(c),
            });
        if let Some(t) = top {
            best.push(TuneRow {
                kind: "best",
                ..t.clone()
            });
        }
    }
    cells.extend(best);
    Ok(cells)
}

pub fn write_tune_csv(out: &mut dyn Write, rows: &[TuneRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TUNE_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}
