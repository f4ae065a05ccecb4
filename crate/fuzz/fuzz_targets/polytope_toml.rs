#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::format::{parse_polytope, write_polytope};

fuzz_target!(|data: &str| {
    if let Ok(p) = parse_polytope(data) {
        let again = parse_polytope(&write_polytope(&p)).expect("written polytope parses");
        assert_eq!(again, p);
    }
});
