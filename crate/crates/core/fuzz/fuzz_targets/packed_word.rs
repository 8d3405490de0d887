#![no_main]

use cogrowth::words::Word;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: (u8, u16, &[u8])| {
    let (size, len, bytes) = data;
    if let Ok(w) = Word::from_packed_bytes(bytes, len as usize, size as usize) {
        assert_eq!(w.len(), len as usize);
        let packed = w.to_packed_bytes();
        assert_eq!(Word::from_packed_bytes(&packed, w.len(), size as usize).unwrap(), w);
    }
});
