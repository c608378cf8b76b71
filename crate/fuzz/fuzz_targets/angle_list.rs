#![no_main]

use libfuzzer_sys::fuzz_target;
use ssrbell_cli::config::parse_angle_list;

fuzz_target!(|data: &str| {
    if let Ok(angles) = parse_angle_list(data) {
        assert!(angles.iter().all(|a| a.is_finite()));
    }
});
