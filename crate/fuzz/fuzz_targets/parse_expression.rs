#![no_main]

use libfuzzer_sys::fuzz_target;
use poisson_verify_core::catalog::parse_expression;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_expression(text) {
        let shown = f.to_string();
        let again = parse_expression(&shown).expect("displayed expression must reparse");
        assert_eq!(again, f, "{shown}");
    }
});
