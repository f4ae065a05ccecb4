#![no_main]
use libfuzzer_sys::fuzz_target;
use toric_fano::classify::load_checkpoint;

fuzz_target!(|data: &str| {
    let _ = load_checkpoint(data);
});
