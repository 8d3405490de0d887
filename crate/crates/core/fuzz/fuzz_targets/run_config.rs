#![no_main]

use cogrowth::cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(config) = RunConfig::from_json(text) {
        assert_eq!(RunConfig::from_json(&config.to_json()).unwrap(), config);
    }
});
