#![no_main]
use libfuzzer_sys::fuzz_target;
use qie_cli::args::parse_grid;

fuzz_target!(|data: &str| {
    if let Ok(grid) = parse_grid(data) {
        assert!(grid.lo > 0.0 && grid.lo < grid.hi && grid.n >= 2);
        if grid.n <= 4096 {
            let pts = grid.points();
            assert_eq!(pts.len(), grid.n);
            assert!(pts.iter().all(|x| x.is_finite()));
        }
    }
});
