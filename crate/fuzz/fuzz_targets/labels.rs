#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(labels) = agw_cli::io::parse_labels(text) {
            assert!(!labels.is_empty());
            assert!(labels.iter().all(|&l| l >= -1));
        }
    }
});
