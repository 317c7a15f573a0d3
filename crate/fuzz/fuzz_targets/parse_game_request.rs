#![no_main]

use evasilab::game::{parse_answer_request, parse_ask_request, parse_create_request};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((p, _role)) = parse_create_request(data) {
        assert!(p.n() >= 2 && p.n() <= 6);
    }
    for n in 2..=6 {
        if let Ok(e) = parse_ask_request(data, n) {
            assert!(e < n * (n - 1) / 2);
        }
    }
    let _ = parse_answer_request(data);
});
