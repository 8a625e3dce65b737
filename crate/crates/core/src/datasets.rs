//! Logs bundled with the crate.

use crate::log::{parse_csv, CsvMapping, EventLog};

const HOUSEHOLD_CSV: &[u8] = include_bytes!("../data/household.csv");

/// Thirty synthetic days of a smart-home sensor log, one trace per day, with
/// a `room` attribute on every event.
pub fn household() -> EventLog {
    parse_csv(HOUSEHOLD_CSV, &CsvMapping::default()).expect("bundled log parses")
}

pub fn household_csv() -> &'static [u8] {
    HOUSEHOLD_CSV
}
