#![no_main]
use libfuzzer_sys::fuzz_target;
use qie_cli::config::ScenarioConfig;

fuzz_target!(|data: &str| {
    // Anything that parses must satisfy the documented ranges.
    if let Ok(cfg) = ScenarioConfig::parse(data) {
        assert!(cfg.omega3 > cfg.omega4 && cfg.omega4 > 0.0);
        assert!(cfg.q > -1.0 && cfg.q < 0.0);
        assert!(cfg.a > 0.0 && cfg.beta_h > 0.0 && cfg.tau_fb >= 0.0);
    }
});
