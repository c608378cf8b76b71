#![no_main]

use libfuzzer_sys::fuzz_target;
use ssrbell_cli::config::ReproduceItem;

fuzz_target!(|data: &str| {
    let _ = data.parse::<ReproduceItem>();
});
