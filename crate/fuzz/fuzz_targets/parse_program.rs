//! Arbitrary bytes must never panic the program parser; accepted programs
//! must survive the accessors the rest of the pipeline relies on.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(program) = chronolog::lang::parse_program(src) {
        let _ = program.entry_sigs();
        for pred in &program.preds {
            let _ = pred.modes();
            let _ = pred.measures();
            let _ = program.callees(pred);
        }
    }
});
