#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::conllu::{parse_str, serialize_conllu, ParseMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_str(text, ParseMode::Strict);
    // whatever survives lenient parsing must serialize and parse back unchanged
    if let Ok(bank) = parse_str(text, ParseMode::Lenient) {
        let out = serialize_conllu(&bank.sentences);
        let again = parse_str(&out, ParseMode::Strict).expect("serialized output parses");
        assert_eq!(again.sentences, bank.sentences);
    }
});
