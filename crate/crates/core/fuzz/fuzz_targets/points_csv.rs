#![no_main]

use cogrowth::extrapolate::{default_delta_grid, parse_points_csv, scan_delta, DEFAULT_BAND_FRACTION};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(points) = parse_points_csv(text, None) {
        if points.len() <= 64 {
            let _ = scan_delta(&points, &default_delta_grid(), DEFAULT_BAND_FRACTION);
        }
    }
});
