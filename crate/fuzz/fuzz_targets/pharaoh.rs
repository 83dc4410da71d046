#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::stability::{parse_pharaoh_line, IndexBase};

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        for base in [IndexBase::Zero, IndexBase::One] {
            if let Ok(links) = parse_pharaoh_line(line, base) {
                assert!(links.iter().all(|l| l.src_id >= 1 && l.tgt_id >= 1));
            }
        }
    }
});
