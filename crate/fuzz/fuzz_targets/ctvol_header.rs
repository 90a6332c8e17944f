#![no_main]

use ctseg::io::CtvolHeader;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(h) = CtvolHeader::parse(data) {
        if h.validate().is_ok() {
            let _ = h.volume_dims();
            let _ = h.spacing();
            let _ = h.blob_len();
        }
    }
});
