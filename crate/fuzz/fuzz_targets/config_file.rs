#![no_main]

use libfuzzer_sys::fuzz_target;
use ssrbell_cli::config::PartialConfig;

fuzz_target!(|data: &str| {
    // parsing and family validation must reject bad input without panicking
    if let Ok(cfg) = PartialConfig::from_text(data) {
        let _ = cfg.validate();
    }
});
