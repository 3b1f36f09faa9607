#![no_main]

use libfuzzer_sys::fuzz_target;
use poisson_verify_core::catalog::parse_system;

// Anything that parses must come back unchanged through `serialize`.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = parse_system(text) {
        let out = sys.serialize();
        let again = parse_system(&out).expect("serialized system must reparse");
        assert_eq!(again, sys);
    }
});
