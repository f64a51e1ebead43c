#![no_main]

use facekit::Gallery;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = Gallery::from_json_bytes(data) {
        let again = Gallery::from_json_bytes(g.to_json().as_bytes()).expect("re-parse");
        assert_eq!(again, g);
    }
});
