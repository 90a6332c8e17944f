#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = ctseg::io::parse_nifti(data) {
        assert_eq!(v.data().len(), v.dims().len());
        assert!(v.data().iter().all(|x| x.is_finite()));
    }
});
