#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::format::{parse_fan, write_fan, FanDocument};

fuzz_target!(|data: &str| {
    if let Ok(doc) = FanDocument::parse(data) {
        let _ = doc.validate();
    }
    // Anything that parses must survive a write/parse round trip unchanged.
    if let Ok(fan) = parse_fan(data) {
        let text = write_fan(&fan);
        assert_eq!(parse_fan(&text).expect("written fan parses"), fan);
    }
});
