#![no_main]

use cogrowth::series::{Series, SeriesKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: (bool, u8, &str)| {
    let (returns, rank, text) = data;
    let kind = if returns { SeriesKind::Returns } else { SeriesKind::Cogrowth };
    let rank = 1 + rank as usize % 4;
    if let Ok(s) = Series::from_csv(text, kind, rank) {
        let again = Series::from_csv(&s.to_csv(), kind, rank).expect("written series must parse");
        assert_eq!(s.coefficients, again.coefficients);
    }
});
