#![no_main]

use cogrowth::flatperm::FlatPermRun;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(run) = FlatPermRun::from_json(text) {
        let again = FlatPermRun::from_json(&run.to_json()).expect("written state must load");
        assert_eq!(run.tours_done(), again.tours_done());
        let _ = run.merged();
    }
});
