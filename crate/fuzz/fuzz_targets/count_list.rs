#![no_main]
use btlab_core::rational::parse_count_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_count_list(s) {
        let joined: Vec<String> = list.iter().map(|c| c.to_string()).collect();
        assert_eq!(parse_count_list(&joined.join(",")).unwrap(), list);
    }
});
