#![no_main]

use ctseg::io::{decode_blob, CtvolHeader, Dtype};
use ctseg::{Dims, Spacing};
use libfuzzer_sys::fuzz_target;

// First 4 bytes pick the shape and dtype, the rest is the blob.
fuzz_target!(|data: &[u8]| {
    if data.len() < 4 {
        return;
    }
    let dims = match Dims::new(1 + data[0] as usize % 8, 1 + data[1] as usize % 8, 1 + data[2] as usize % 8) {
        Ok(d) => d,
        Err(_) => return,
    };
    let dtype = [Dtype::U8, Dtype::I16, Dtype::F32][data[3] as usize % 3];
    let header = CtvolHeader::new(dims, Spacing::unit(), dtype);
    if let Ok(v) = decode_blob(&header, &data[4..]) {
        assert_eq!(v.dims(), dims);
    }
});
