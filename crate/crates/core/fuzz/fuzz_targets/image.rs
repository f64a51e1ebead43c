#![no_main]

use facekit::image::decode_gray;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_gray(data) {
        assert_eq!(img.pixels().len(), img.width() * img.height());
    }
});
