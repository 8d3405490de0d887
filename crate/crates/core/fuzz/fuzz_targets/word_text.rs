#![no_main]

use cogrowth::GroupId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: (u8, &str)| {
    let (pick, text) = data;
    let names = ["f2", "z2", "bs:1:2", "bs:2:3", "thompson", "zwrz", "zwrf2", "zwrzwrz"];
    let g: GroupId = names[pick as usize % names.len()].parse().unwrap();
    let alphabet = g.alphabet();
    if let Ok(w) = alphabet.parse_word(text) {
        let printed = alphabet.format_word(&w);
        assert_eq!(alphabet.parse_word(&printed).unwrap(), w);
        if w.len() <= 64 {
            let _ = g.evaluate(&w);
        }
    }
});
