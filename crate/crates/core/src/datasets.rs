//! Bundled classical regression datasets.

use std::io::Read;

use crate::error::{Error, Result};
use crate::model::{validate_dataset, Dataset, RawTable};

pub const STACKLOSS_CSV: &str = include_str!("../../../fixtures/stackloss.csv");
pub const HILLS_CSV: &str = include_str!("../../../fixtures/hills.csv");

/// Reads an RFC 4180 table with a header row. Cells are trimmed; every
/// record must have as many fields as the header.
pub fn read_table(reader: impl Read) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let bad = |e: csv::Error| Error::InvalidInput(format!("malformed CSV: {e}"));
    let headers: Vec<String> = rdr.headers().map_err(bad)?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::InvalidInput("CSV has no header row".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(bad)?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(RawTable { headers, rows })
}

fn bundled(text: &str, response: &str) -> Dataset {
    read_table(text.as_bytes())
        .and_then(|t| validate_dataset(&t, response, true))
        .expect("bundled fixture is valid")
}

/// Brownlee's stack-loss plant data: 21 runs, response `stack.loss`,
/// covariates `Air.Flow`, `Water.Temp`, `Acid.Conc`, with intercept.
pub fn stackloss() -> Dataset {
    bundled(STACKLOSS_CSV, "stack.loss")
}

/// Scottish hill races: 35 races, response `time` (hours), covariates
/// `dist` (miles) and `climb` (feet), with intercept.
pub fn hills() -> Dataset {
    bundled(HILLS_CSV, "time")
}
