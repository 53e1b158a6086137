//! Scenario files: flat `key = value` lines, `#` starts a comment.
//!
//! ```text
//! omega_fb = 0.003
//! omega3   = 0.01
//! omega4   = 0.0036787944117144234
//! beta_h   = 1
//! a        = 0.25
//! q        = -0.3
//! tau_fb   = 1
//! tau_h    = 201      # or beta_prime, not both
//! mode     = numeric  # optional, analytic by default
//! steps    = 400      # optional schedule resolution
//! output   = run.csv  # optional, stdout by default
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use qie_core::cycle::{derive_cycle, derive_cycle_from_beta_prime, CycleConfig, CycleMode};
use qie_core::isotherm::{BathCoupling, DEFAULT_SCHEDULE_INTERVALS, MIN_STEPS};
use thiserror::Error;

use crate::error::CliError;

/// Upper bound on `steps`; keeps a single cycle bounded in time and memory.
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{msg}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ConfigError {
    fn at(line: usize, msg: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            msg: msg.into(),
        }
    }

    fn whole(msg: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            msg: msg.into(),
        }
    }
}

/// How the hot isotherm is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HotSpec {
    TauH(f64),
    BetaPrime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub omega_fb: f64,
    pub omega3: f64,
    pub omega4: f64,
    pub beta_h: f64,
    pub a: f64,
    pub q: f64,
    pub tau_fb: f64,
    pub hot: HotSpec,
    pub mode: CycleMode,
    pub steps: usize,
    pub output: Option<PathBuf>,
}

const KEYS: [&str; 12] = [
    "omega_fb",
    "omega3",
    "omega4",
    "beta_h",
    "a",
    "q",
    "tau_fb",
    "tau_h",
    "beta_prime",
    "mode",
    "steps",
    "output",
];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn number(entry: &Entry, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = entry.value.parse().map_err(|_| {
        ConfigError::at(
            entry.line,
            format!("`{key}` is not a number: `{}`", entry.value),
        )
    })?;
    if !v.is_finite() {
        return Err(ConfigError::at(
            entry.line,
            format!("`{key}` must be finite"),
        ));
    }
    Ok(v)
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: HashMap<&str, Entry> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::at(line, "missing key"));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, format!("missing value for `{key}`")));
            }
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| ConfigError::at(line, format!("unknown key `{key}`")))?;
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::at(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            entries.insert(key, Entry { line, value });
        }

        let required = |key: &str| {
            entries
                .get(key)
                .ok_or_else(|| ConfigError::whole(format!("missing required key `{key}`")))
        };
        let positive = |key: &str| -> Result<f64, ConfigError> {
            let e = required(key)?;
            let v = number(e, key)?;
            if v <= 0.0 {
                return Err(ConfigError::at(
                    e.line,
                    format!("`{key}` must be positive, got {v}"),
                ));
            }
            Ok(v)
        };

        let omega_fb = positive("omega_fb")?;
        let omega3 = positive("omega3")?;
        let omega4 = positive("omega4")?;
        if omega3 <= omega4 {
            let line = entries["omega3"].line.max(entries["omega4"].line);
            return Err(ConfigError::at(line, "`omega3` must exceed `omega4`"));
        }
        let beta_h = positive("beta_h")?;
        let a = positive("a")?;

        let q_entry = required("q")?;
        let q = number(q_entry, "q")?;
        if !(q > -1.0 && q < 0.0) {
            return Err(ConfigError::at(
                q_entry.line,
                format!("`q` must lie in (-1, 0), got {q}"),
            ));
        }

        let fb_entry = required("tau_fb")?;
        let tau_fb = number(fb_entry, "tau_fb")?;
        if tau_fb < 0.0 {
            return Err(ConfigError::at(
                fb_entry.line,
                format!("`tau_fb` must be >= 0, got {tau_fb}"),
            ));
        }

        let hot = match (entries.get("tau_h"), entries.get("beta_prime")) {
            (Some(t), Some(b)) => {
                return Err(ConfigError::at(
                    t.line.max(b.line),
                    "give exactly one of `tau_h` and `beta_prime`",
                ))
            }
            (Some(_), None) => HotSpec::TauH(positive("tau_h")?),
            (None, Some(_)) => HotSpec::BetaPrime(positive("beta_prime")?),
            (None, None) => {
                return Err(ConfigError::whole(
                    "one of `tau_h` or `beta_prime` is required",
                ))
            }
        };

        let mode = match entries.get("mode") {
            None => CycleMode::Analytic,
            Some(e) => match e.value {
                "analytic" => CycleMode::Analytic,
                "numeric" => CycleMode::Numeric,
                other => {
                    return Err(ConfigError::at(
                        e.line,
                        format!("`mode` must be `analytic` or `numeric`, got `{other}`"),
                    ))
                }
            },
        };

        let steps = match entries.get("steps") {
            None => DEFAULT_SCHEDULE_INTERVALS,
            Some(e) => {
                let n: usize = e.value.parse().map_err(|_| {
                    ConfigError::at(e.line, format!("`steps` is not an integer: `{}`", e.value))
                })?;
                if !(MIN_STEPS..=MAX_STEPS).contains(&n) {
                    return Err(ConfigError::at(
                        e.line,
                        format!("`steps` must lie in [{MIN_STEPS}, {MAX_STEPS}], got {n}"),
                    ));
                }
                n
            }
        };

        Ok(ScenarioConfig {
            omega_fb,
            omega3,
            omega4,
            beta_h,
            a,
            q,
            tau_fb,
            hot,
            mode,
            steps,
            output: entries.get("output").map(|e| PathBuf::from(e.value)),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: e.line,
            msg: e.msg,
        })
    }

    pub fn bath(&self) -> qie_core::Result<BathCoupling> {
        BathCoupling::new(self.a, self.q, self.beta_h)
    }

    /// The cycle described by the file.
    pub fn cycle(&self) -> qie_core::Result<CycleConfig> {
        let bath = self.bath()?;
        match self.hot {
            HotSpec::TauH(tau_h) => derive_cycle(
                self.omega_fb,
                self.omega3,
                self.omega4,
                bath,
                self.tau_fb,
                tau_h,
            ),
            HotSpec::BetaPrime(bp) => derive_cycle_from_beta_prime(
                self.omega_fb,
                self.omega3,
                self.omega4,
                bath,
                self.tau_fb,
                bp,
            ),
        }
    }

    /// The cycle with the configured frequencies run at `tau_h`, whatever the
    /// file says about the isotherm.
    pub fn cycle_at(&self, tau_h: f64) -> qie_core::Result<CycleConfig> {
        derive_cycle(
            self.omega_fb,
            self.omega3,
            self.omega4,
            self.bath()?,
            self.tau_fb,
            tau_h,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str =
        "omega_fb = 0.5\nomega3 = 2\nomega4 = 1\nbeta_h = 1\na = 0.25\nq = -0.3\ntau_fb = 1\n";

    #[test]
    fn parses_minimal_file() {
        let cfg = ScenarioConfig::parse(&format!("{BASE}tau_h = 5 # hot\n")).unwrap();
        assert_eq!(cfg.hot, HotSpec::TauH(5.0));
        assert_eq!(cfg.mode, CycleMode::Analytic);
        assert_eq!(cfg.steps, DEFAULT_SCHEDULE_INTERVALS);
        assert_eq!(cfg.output, None);
        assert!(cfg.cycle().is_ok());
    }

    #[test]
    fn optional_keys() {
        let text = format!(
            "# scenario\n\n{BASE}beta_prime = 2\nmode = numeric\nsteps = 150\noutput = out.csv\n"
        );
        let cfg = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg.hot, HotSpec::BetaPrime(2.0));
        assert_eq!(cfg.mode, CycleMode::Numeric);
        assert_eq!(cfg.steps, 150);
        assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
    }

    fn line_of(text: &str) -> Option<usize> {
        ScenarioConfig::parse(text).unwrap_err().line
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            line_of(&format!("{BASE}tau_h = 5\ncolour = red\n")),
            Some(9)
        );
        assert_eq!(line_of(&format!("{BASE}tau_h = 5\na = 1\n")), Some(9));
        assert_eq!(
            line_of(&format!("{BASE}tau_h = 5\nbeta_prime = 2\n")),
            Some(9)
        );
        assert_eq!(line_of(&format!("{BASE}tau_h = five\n")), Some(8));
        assert_eq!(line_of(&format!("{BASE}tau_h = inf\n")), Some(8));
        assert_eq!(line_of(&format!("{BASE}tau_h = -1\n")), Some(8));
        assert_eq!(line_of(&format!("{BASE}tau_h = 5\nmode = fast\n")), Some(9));
        assert_eq!(line_of(&format!("{BASE}tau_h = 5\nsteps = 3\n")), Some(9));
        assert_eq!(line_of(&format!("{BASE}tau_h\n")), Some(8));
        assert_eq!(line_of(&format!("{BASE}tau_h =\n")), Some(8));
        assert_eq!(line_of(&BASE.replace("q = -0.3", "q = 0.3")), Some(6));
        assert_eq!(line_of(&BASE.replace("omega4 = 1", "omega4 = 3")), Some(3));
    }

    #[test]
    fn missing_keys() {
        assert_eq!(line_of(BASE), None);
        assert_eq!(line_of(&BASE.replace("a = 0.25\n", "tau_h = 3\n")), None);
    }

    #[test]
    fn infeasible_duration_is_a_physics_error() {
        let cfg = ScenarioConfig::parse(&format!("{BASE}tau_h = 0.5\n")).unwrap();
        assert!(matches!(
            cfg.cycle(),
            Err(qie_core::Error::InfeasibleDuration { .. })
        ));
    }
}
