#![no_main]
use btlab_core::Instance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = Instance::from_json(s) {
        assert!(!inst.capacity().is_zero());
        let again = Instance::from_json(&inst.to_json()).expect("serialized instance must parse");
        assert_eq!(again, inst);
    }
});
