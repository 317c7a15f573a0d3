#![no_main]

use evasilab::formats::{parse_strategy, strategy_to_dot, strategy_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&first, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = 2 + usize::from(first % 5);
    if let Ok(tree) = parse_strategy(text, n) {
        assert_eq!(parse_strategy(&strategy_to_json(&tree), n).unwrap(), tree);
        let _ = strategy_to_dot(&tree);
    }
});
