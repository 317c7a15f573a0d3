#![no_main]

use evasilab::formats::PropertySpec;
use evasilab::game::Role;
use evasilab::scanner::ScanMode;
use evasilab::Answer;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(PropertySpec::Builtin(name)) = PropertySpec::parse(text) {
        for n in 2..=6 {
            let _ = PropertySpec::Builtin(name.clone()).load(n);
        }
    }
    if let Ok(mode) = text.parse::<ScanMode>() {
        assert_eq!(mode.as_str(), text);
    }
    let _ = text.parse::<Answer>();
    let _ = text.parse::<Role>();
});
