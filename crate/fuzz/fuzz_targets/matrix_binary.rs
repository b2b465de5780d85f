#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = agw_cli::io::parse_binary_matrix(data) {
        // accepted payloads must re-encode to the same bytes
        let bytes = agw_cli::io::matrix_to_binary(&m);
        assert_eq!(bytes, data);
    }
});
