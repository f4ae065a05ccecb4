#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::classify::GraphSummary;

fuzz_target!(|data: &str| {
    if let Ok(g) = GraphSummary::parse(data) {
        let _ = g.to_dot();
        assert_eq!(GraphSummary::parse(&g.to_lines()).unwrap(), g);
    }
});
