#![no_main]
use btlab_core::Weight;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = Weight::parse_decimal(s) {
        // Only canonical spellings are accepted.
        assert_eq!(w.to_string(), s);
    }
});
