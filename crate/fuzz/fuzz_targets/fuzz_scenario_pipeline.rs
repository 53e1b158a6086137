#![no_main]
use libfuzzer_sys::fuzz_target;
use qie_cli::config::ScenarioConfig;
use qie_core::cycle::run_cycle_analytic;
use qie_core::optimizer::eta_star_microscopic;

// Parse, then push the result through the closed-form cycle and optimum. The
// simulated mode is left out: it is too slow per input to be useful here.
fuzz_target!(|data: &str| {
    let Ok(cfg) = ScenarioConfig::parse(data) else {
        return;
    };
    if let Ok(cycle) = cfg.cycle() {
        if let Ok(r) = run_cycle_analytic(&cycle) {
            assert!(r.eta >= 0.0 && r.eta <= 1.0, "eta = {}", r.eta);
        }
    }
    if let Ok(eta) = eta_star_microscopic(cfg.a, cfg.tau_fb, cfg.omega3, cfg.omega4) {
        assert!((0.5..=1.0).contains(&eta), "eta* = {eta}");
    }
});
