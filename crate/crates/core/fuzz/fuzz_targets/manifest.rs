#![no_main]

use std::path::Path;

use facekit::eval::ProbeManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = ProbeManifest::parse(data, Path::new("/data"));
});
