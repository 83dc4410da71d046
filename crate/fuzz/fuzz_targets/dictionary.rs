#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::repattern::PatternDictionary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(dict) = PatternDictionary::from_json(text) {
        let back = PatternDictionary::from_json(&dict.to_json()).expect("written dictionary reads back");
        assert_eq!(back, dict);
    }
});
