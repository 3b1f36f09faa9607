#![no_main]

use libfuzzer_sys::fuzz_target;
use poisson_verify_core::catalog::parse_system;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_system(text);
    }
});
