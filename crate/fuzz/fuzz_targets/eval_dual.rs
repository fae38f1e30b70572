#![no_main]

mod dual_input;

use libfuzzer_sys::fuzz_target;
use dual_input::decode_dual_input;

fuzz_target!(|data: &[u8]| {
    if let Some(input) = decode_dual_input(data) {
        input.check();
    }
});
