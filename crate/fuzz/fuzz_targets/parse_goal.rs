//! Arbitrary bytes must never panic the goal parser.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let _ = chronolog::lang::parse_goal(src);
});
