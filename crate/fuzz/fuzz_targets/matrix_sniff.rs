#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // format-sniffing entry point used by every file-reading command
    let _ = agw_cli::io::parse_matrix_bytes(data, false);
    let _ = agw_cli::io::parse_matrix_bytes(data, true);
});
