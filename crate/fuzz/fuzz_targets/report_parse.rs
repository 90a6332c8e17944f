#![no_main]

use ctseg::io::{parse_reports, render_report, ReportFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(reports) = parse_reports(data) {
        let json = render_report(&reports, ReportFormat::Json).expect("render parsed reports");
        assert_eq!(parse_reports(json.as_bytes()).expect("reparse").len(), reports.len());
    }
});
