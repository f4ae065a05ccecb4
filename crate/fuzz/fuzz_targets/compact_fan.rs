#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::format::{decode_compact, encode_compact};

fuzz_target!(|data: &str| {
    if let Ok(fan) = decode_compact(data) {
        assert_eq!(decode_compact(&encode_compact(&fan)).unwrap(), fan);
    }
});
