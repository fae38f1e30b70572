#![no_main]

use libfuzzer_sys::fuzz_target;
use ratmin::cli::{verify_record, OutputRecord};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = OutputRecord::from_json(text) {
        if rec.problem.m <= 64 && rec.trace.len() <= 64 && rec.problem.n1 + rec.problem.n2 <= 16 {
            let _ = verify_record(&rec);
        }
    }
});
