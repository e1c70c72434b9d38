#![no_main]
use btlab_core::record::ConstructionRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rec) = ConstructionRecord::from_json(s) {
        // Errors are expected for most records; panics are not.
        let _ = rec.check();
    }
});
