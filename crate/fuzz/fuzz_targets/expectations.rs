#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::classify::{parse_expectations, verify_table1_edges, GraphSummary};

fuzz_target!(|data: &str| {
    if let Ok(rows) = parse_expectations(data) {
        let _ = verify_table1_edges(&GraphSummary::default(), &rows);
    }
});
