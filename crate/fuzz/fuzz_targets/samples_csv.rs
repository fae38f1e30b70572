#![no_main]

use libfuzzer_sys::fuzz_target;
use ratmin::problem::parse_samples;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(samples) = parse_samples(text) {
        let again = parse_samples(&samples.to_csv()).expect("serialized samples reparse");
        assert_eq!(samples.nodes(), again.nodes());
        assert_eq!(samples.values(), again.values());
    }
});
