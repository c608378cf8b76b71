#![no_main]

use libfuzzer_sys::fuzz_target;
use ssrbell_cli::family::parse_custom_state;

fuzz_target!(|data: &str| {
    if let Ok(state) = parse_custom_state(data) {
        assert!((state.norm() - 1.0).abs() < 1e-9);
    }
});
