#![no_main]

use evasilab::scanner::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = Checkpoint::parse(text) {
        assert_eq!(Checkpoint::parse(&c.to_json()).unwrap(), c);
    }
});
