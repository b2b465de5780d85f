#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = agw_cli::io::parse_text_matrix(text, false) {
            // accepted matrices must round-trip value-exactly
            let back = agw_cli::io::parse_text_matrix(&agw_cli::io::matrix_to_text(&m), false)
                .expect("serialized matrix reparses");
            assert_eq!(m, back);
        }
    }
});
