#![no_main]

use facekit::{Config, PoseBucket};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = Config::from_json_bytes(data) {
        assert!(cfg.preprocess.check().is_ok());
        for bucket in PoseBucket::ALL {
            assert!(cfg.weights(bucket).check_for(bucket).is_ok());
        }
        let _ = cfg.fingerprint();
    }
});
