#![no_main]
use libfuzzer_sys::fuzz_target;
use qie_cli::args::parse_tau_fb_list;

fuzz_target!(|data: &str| {
    if let Ok(list) = parse_tau_fb_list(data) {
        assert!(!list.is_empty());
        assert!(list.iter().all(|r| r.is_finite() && *r >= 0.0));
    }
});
