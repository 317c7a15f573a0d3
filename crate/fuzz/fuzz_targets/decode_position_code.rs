#![no_main]

use evasilab::graph::edge_count;
use evasilab::{canonical_position, PositionCode, PositionTable};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (u8, u32)| {
    let n = 2 + usize::from(input.0 % 4);
    let limit = 3u32.pow(edge_count(n) as u32);
    let code = PositionCode(input.1 % limit);
    let p = code.decode(n);
    assert_eq!(p.code(), code);
    let table = PositionTable::shared(n).unwrap();
    let id = table.id_of(&p);
    assert_eq!(table.code(id), canonical_position(&p));
});
