#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::repattern::Pattern;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<Pattern>() {
        let shown = p.to_string();
        let back: Pattern = shown.parse().expect("displayed pattern parses");
        assert_eq!(back, p);
    }
});
