#![no_main]

use cogrowth::GroupId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(g) = text.parse::<GroupId>() {
        let again: GroupId = g.to_string().parse().expect("display output must parse");
        assert_eq!(g, again);
    }
});
