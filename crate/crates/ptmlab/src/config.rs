//! Resource caps and conventions shared across the pipeline.

/// Caps for evaluation, execution and object construction. All caps must
/// be positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Fuel for formula evaluation.
    pub eval_fuel: u64,
    /// Upper bound on n^c when building a tableau.
    pub tableau_cap: u64,
    /// Step cap for machine execution, applied on top of Size(w)^c.
    pub exec_step_cap: u64,
    /// Node cap for generated formulas.
    pub formula_node_cap: u64,
    /// Tableau column whose halting lights decide acceptance.
    pub output_cell: usize,
    /// When set, hinted unique existentials also scan for a second witness.
    pub uniqueness_scan: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            eval_fuel: 10_000_000,
            tableau_cap: 4096,
            exec_step_cap: 1 << 22,
            formula_node_cap: 8_000_000,
            output_cell: 1,
            uniqueness_scan: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {0}: unknown key {1:?}")]
    UnknownKey(usize, String),
    #[error("line {0}: bad value: {1}")]
    BadValue(usize, String),
}

impl Config {
    /// Parses a `key = value` configuration file. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::BadValue(line_no, "expected key = value".into()));
            };
            let key = key.trim();
            let value = value.trim();
            let parse_u64 = |v: &str| -> Result<u64, ConfigError> {
                let n: u64 = v
                    .parse()
                    .map_err(|_| ConfigError::BadValue(line_no, format!("not a number: {v:?}")))?;
                if n == 0 {
                    return Err(ConfigError::BadValue(line_no, "caps must be positive".into()));
                }
                Ok(n)
            };
            match key {
                "eval_fuel" => cfg.eval_fuel = parse_u64(value)?,
                "tableau_cap" => cfg.tableau_cap = parse_u64(value)?,
                "exec_step_cap" => cfg.exec_step_cap = parse_u64(value)?,
                "formula_node_cap" => cfg.formula_node_cap = parse_u64(value)?,
                "output_cell" => {
                    cfg.output_cell = value.parse().map_err(|_| {
                        ConfigError::BadValue(line_no, format!("not a cell index: {value:?}"))
                    })?
                }
                "uniqueness_scan" => {
                    cfg.uniqueness_scan = match value {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(ConfigError::BadValue(
                                line_no,
                                format!("expected true/false, got {other:?}"),
                            ))
                        }
                    }
                }
                other => return Err(ConfigError::UnknownKey(line_no, other.to_string())),
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let cfg = Config::parse("eval_fuel = 500\noutput_cell = 2\nuniqueness_scan = true\n")
            .unwrap();
        assert_eq!(cfg.eval_fuel, 500);
        assert_eq!(cfg.output_cell, 2);
        assert!(cfg.uniqueness_scan);
    }

    #[test]
    fn rejects_unknown_keys_and_zero_caps() {
        assert!(Config::parse("nope = 1").is_err());
        assert!(Config::parse("eval_fuel = 0").is_err());
    }
}
