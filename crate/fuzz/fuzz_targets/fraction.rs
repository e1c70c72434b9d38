#![no_main]
use btlab_core::rational::{format_fraction, parse_fraction};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_fraction(s) {
        assert_eq!(parse_fraction(&format_fraction(&r)).unwrap(), r);
    }
});
