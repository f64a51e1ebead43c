#![no_main]

use facekit::LandmarkSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ls) = LandmarkSet::parse(data) {
        assert!(ls.validate().is_ok());
        let again = LandmarkSet::parse(ls.to_json().as_bytes()).expect("re-parse");
        assert_eq!(again, ls);
    }
});
