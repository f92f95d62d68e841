//! CSV encodings of trajectories, trades and sweep summaries.
//!
//! Reals are written in shortest round-trip form, so parsing a file back
//! yields bit-identical values.

use std::io::{Read, Write};

use fiat_market::experiment::SweepReport;
use fiat_market::{SnapshotRow, TradeRecord};
use serde::{Deserialize, Serialize};

pub const TRAJECTORY_HEADER: &str =
    "iteration,avg_price,min_price,max_price,total_money,total_stock_for_sale,total_consumable,trades,discarded_production";
pub const SUMMARY_HEADER: &str =
    "start_price,seed,converged,settled_value,settle_iteration,trailing_cv";

/// One line of the sweep summary. Fields are empty for runs that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub start_price: f64,
    pub seed: u64,
    pub converged: bool,
    pub settled_value: Option<f64>,
    pub settle_iteration: Option<usize>,
    pub trailing_cv: Option<f64>,
}

pub fn summary_rows(report: &SweepReport) -> Vec<SummaryRow> {
    report
        .runs
        .iter()
        .map(|run| {
            let c = run.convergence();
            SummaryRow {
                start_price: run.start_price,
                seed: run.seed,
                converged: c.is_some_and(|c| c.converged),
                settled_value: c.and_then(|c| c.settled_value),
                settle_iteration: c.map(|c| c.settle_iteration),
                trailing_cv: c.map(|c| c.trailing_cv),
            }
        })
        .collect()
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    // written by hand so that an empty table still carries its header
    wtr.write_record(header)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(out: W, rows: &[SnapshotRow]) -> csv::Result<()> {
    write_rows(out, rows, &TRAJECTORY_HEADER.split(',').collect::<Vec<_>>())
}

pub fn write_trades<W: Write>(out: W, trades: &[TradeRecord]) -> csv::Result<()> {
    write_rows(
        out,
        trades,
        &[
            "iteration",
            "buyer_id",
            "seller_id",
            "price_paid",
            "units",
            "price_level",
            "buyer_savings_before",
            "buyer_consumable_before",
        ],
    )
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    write_rows(out, rows, &SUMMARY_HEADER.split(',').collect::<Vec<_>>())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn read_trajectory<R: Read>(input: R) -> csv::Result<Vec<SnapshotRow>> {
    read_rows(input)
}

pub fn read_trades<R: Read>(input: R) -> csv::Result<Vec<TradeRecord>> {
    read_rows(input)
}

pub fn read_summary<R: Read>(input: R) -> csv::Result<Vec<SummaryRow>> {
    read_rows(input)
}

pub fn trajectory_bytes(rows: &[SnapshotRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, rows).expect("writing to memory cannot fail");
    buf
}

pub fn trades_bytes(trades: &[TradeRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trades(&mut buf, trades).expect("writing to memory cannot fail");
    buf
}
