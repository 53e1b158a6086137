//! Parsers for the sweep flags `--grid lo:hi:n` and `--tau-fb-list a,b,c`.

use qie_core::optimizer::GridSpec;

use crate::error::CliError;

/// Largest accepted `n` in `--grid`.
pub const MAX_GRID_POINTS: usize = 1_000_000;
/// Largest accepted length of `--tau-fb-list`.
pub const MAX_TAU_FB_VALUES: usize = 1_000;

fn arg_error(what: &'static str, input: &str, msg: impl Into<String>) -> CliError {
    CliError::Argument {
        what,
        input: input.to_string(),
        msg: msg.into(),
    }
}

fn finite(what: &'static str, input: &str, field: &str) -> Result<f64, CliError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| arg_error(what, input, format!("`{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(arg_error(what, input, format!("`{field}` is not finite")));
    }
    Ok(v)
}

/// `lo:hi:n`, an inclusive linear grid of `τ_h/τ_h°` values.
pub fn parse_grid(input: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = input.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(arg_error("grid", input, "expected lo:hi:n"));
    };
    let lo = finite("grid", input, lo)?;
    let hi = finite("grid", input, hi)?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| arg_error("grid", input, format!("`{n}` is not a point count")))?;
    if n > MAX_GRID_POINTS {
        return Err(arg_error(
            "grid",
            input,
            format!("at most {MAX_GRID_POINTS} points"),
        ));
    }
    GridSpec::new(lo, hi, n).map_err(|e| arg_error("grid", input, e.to_string()))
}

/// Comma-separated nonnegative `τ_fb/τ_h°` ratios.
pub fn parse_tau_fb_list(input: &str) -> Result<Vec<f64>, CliError> {
    if input.trim().is_empty() {
        return Err(arg_error("tau_fb list", input, "empty list"));
    }
    let values = input
        .split(',')
        .map(|field| finite("tau_fb list", input, field))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() > MAX_TAU_FB_VALUES {
        return Err(arg_error(
            "tau_fb list",
            input,
            format!("at most {MAX_TAU_FB_VALUES} values"),
        ));
    }
    if let Some(v) = values.iter().find(|v| **v < 0.0) {
        return Err(arg_error("tau_fb list", input, format!("{v} is negative")));
    }
    Ok(values)
}
