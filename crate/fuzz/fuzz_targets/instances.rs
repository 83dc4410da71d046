#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::repattern::{read_instances, write_instances};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(instances) = read_instances(text, None) {
        let out = write_instances(&instances, true);
        let back = read_instances(&out, None).expect("written instances read back");
        assert_eq!(back, instances);
    }
});
