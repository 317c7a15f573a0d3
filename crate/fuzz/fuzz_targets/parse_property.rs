#![no_main]

use evasilab::parse_property;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_property(text) {
        // Whatever parses must survive a write and re-read unchanged.
        let again = serde_json::to_string(&p.to_doc()).unwrap();
        assert_eq!(parse_property(&again).unwrap(), p);
    }
});
