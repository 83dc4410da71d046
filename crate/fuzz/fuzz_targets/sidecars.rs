#![no_main]

use libfuzzer_sys::fuzz_target;
use udstab::transforms::{read_process_sidecar, read_snacs_sidecar};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(processes) = read_process_sidecar(text) {
            assert!(processes.values().flatten().all(|&id| id > 0));
        }
        if let Ok(tags) = read_snacs_sidecar(text) {
            assert!(tags.values().flat_map(|m| m.keys()).all(|&id| id > 0));
        }
    }
});
