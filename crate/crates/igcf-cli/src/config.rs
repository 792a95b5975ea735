//! TOML run configuration: sectioned key-value file with defaults, full
//! validation (every invalid field reported, not just the first) and warnings
//! for unknown keys.

use igcf::{build_cap, FlowConfig, FlowMode, HyperbolicCap, InitialData};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub n: u32,
    pub r_max: f64,
    pub nr: usize,
    pub ntheta: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub out_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Strictness floor for admissibility: eigmin ι and 1 − |Dφ| must exceed it.
    pub admissible_floor: f64,
    /// Multiplies (Δr² + dt) to form the additive estimate slack δ.
    pub monitor_slack_factor: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub initial: InitialData,
    pub flow: FlowConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                n: 2,
                r_max: 1.0,
                nr: 32,
                ntheta: 64,
            },
            initial: InitialData::default(),
            flow: FlowConfig::default(),
            output: OutputConfig {
                out_dir: PathBuf::from("out"),
                snapshot_times: Vec::new(),
            },
            tolerances: Tolerances {
                admissible_floor: 1e-10,
                monitor_slack_factor: 10.0,
            },
        }
    }
}

impl RunConfig {
    pub fn build_cap(&self) -> igcf::Result<Arc<HyperbolicCap>> {
        build_cap(self.grid.n, self.grid.r_max, self.grid.nr, self.grid.ntheta).map(Arc::new)
    }

    /// Additive estimate slack δ = slack_factor · (Δr² + dt).
    pub fn delta(&self, dr: f64, dt: f64) -> f64 {
        self.tolerances.monitor_slack_factor * (dr * dr + dt)
    }

    /// Boundary-residual tolerance: the one-sided fit errs at O(Δr²) on
    /// compatible data (the residual is a radial derivative, so Δθ plays
    /// no role).
    pub fn nbc_tol(&self, dr: f64) -> f64 {
        self.tolerances.monitor_slack_factor * dr * dr
    }
}

#[derive(Debug)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.flow.mode {
            FlowMode::Raw => "raw",
            FlowMode::Rescaled => "rescaled",
        };
        writeln!(
            f,
            "grid: n={} r_max={} nr={} ntheta={}",
            self.grid.n, self.grid.r_max, self.grid.nr, self.grid.ntheta
        )?;
        writeln!(
            f,
            "initial: c={} eps_r={} eps_theta={} k={} ramp={}",
            self.initial.c, self.initial.eps_r, self.initial.eps_theta, self.initial.k, self.initial.ramp
        )?;
        writeln!(
            f,
            "flow: mode={} t_final={} dt_safety={} dt_max={} monitor_stride={}",
            mode, self.flow.t_final, self.flow.dt_safety, self.flow.dt_max, self.flow.monitor_stride
        )?;
        writeln!(
            f,
            "output: out_dir={} snapshot_times={:?}",
            self.output.out_dir.display(),
            self.output.snapshot_times
        )?;
        write!(
            f,
            "tolerances: admissible_floor={} monitor_slack_factor={}",
            self.tolerances.admissible_floor, self.tolerances.monitor_slack_factor
        )
    }
}

struct Walker<'a> {
    table: &'a toml::Table,
    errors: Vec<String>,
    warnings: Vec<String>,
}

impl<'a> Walker<'a> {
    fn section(&mut self, name: &str) -> Option<&'a toml::Table> {
        match self.table.get(name) {
            None => None,
            Some(toml::Value::Table(t)) => Some(t),
            Some(_) => {
                self.errors.push(format!("{name}: expected a [{name}] section"));
                None
            }
        }
    }

    fn float(&mut self, section: Option<&toml::Table>, sec: &str, key: &str, default: f64) -> f64 {
        match section.and_then(|t| t.get(key)) {
            None => default,
            Some(toml::Value::Float(v)) => *v,
            Some(toml::Value::Integer(v)) => *v as f64,
            Some(other) => {
                self.errors
                    .push(format!("{sec}.{key}: expected a number, got {other}"));
                default
            }
        }
    }

    fn integer(&mut self, section: Option<&toml::Table>, sec: &str, key: &str, default: i64) -> i64 {
        match section.and_then(|t| t.get(key)) {
            None => default,
            Some(toml::Value::Integer(v)) => *v,
            Some(other) => {
                self.errors
                    .push(format!("{sec}.{key}: expected an integer, got {other}"));
                default
            }
        }
    }

    fn string(
        &mut self,
        section: Option<&toml::Table>,
        sec: &str,
        key: &str,
        default: &str,
    ) -> String {
        match section.and_then(|t| t.get(key)) {
            None => default.to_string(),
            Some(toml::Value::String(v)) => v.clone(),
            Some(other) => {
                self.errors
                    .push(format!("{sec}.{key}: expected a string, got {other}"));
                default.to_string()
            }
        }
    }

    fn float_list(&mut self, section: Option<&toml::Table>, sec: &str, key: &str) -> Vec<f64> {
        match section.and_then(|t| t.get(key)) {
            None => Vec::new(),
            Some(toml::Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        toml::Value::Float(v) => out.push(*v),
                        toml::Value::Integer(v) => out.push(*v as f64),
                        other => {
                            self.errors
                                .push(format!("{sec}.{key}: expected numbers, got {other}"));
                        }
                    }
                }
                out
            }
            Some(other) => {
                self.errors
                    .push(format!("{sec}.{key}: expected an array, got {other}"));
                Vec::new()
            }
        }
    }

    fn check(&mut self, field: &str, ok: bool, rule: &str) {
        if !ok {
            self.errors.push(format!("{field}: {rule}"));
        }
    }

    fn warn_unknown(&mut self, known: &[(&str, &[&str])]) {
        for (name, value) in self.table {
            let Some((_, keys)) = known.iter().find(|(sec, _)| sec == name) else {
                self.warnings.push(format!("unknown section [{name}] ignored"));
                continue;
            };
            if let toml::Value::Table(t) = value {
                for key in t.keys() {
                    if !keys.contains(&key.as_str()) {
                        self.warnings
                            .push(format!("unknown key {name}.{key} ignored"));
                    }
                }
            }
        }
    }
}

/// Parse and fully validate a config file. On failure the error carries
/// every offending field.
pub fn parse_config(path: &std::path::Path) -> Result<ParsedConfig, Vec<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ParsedConfig, Vec<String>> {
    let table: toml::Table = text.parse().map_err(|e| vec![format!("config: {e}")])?;
    let mut w = Walker {
        table: &table,
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    let defaults = RunConfig::default();

    let grid = w.section("grid");
    let n = w.integer(grid, "grid", "n", defaults.grid.n as i64);
    let r_max = w.float(grid, "grid", "r_max", defaults.grid.r_max);
    let nr = w.integer(grid, "grid", "nr", defaults.grid.nr as i64);
    let ntheta = w.integer(grid, "grid", "ntheta", defaults.grid.ntheta as i64);
    w.check("grid.n", n >= 2, "dimension n must be at least 2");
    w.check("grid.r_max", r_max > 0.0, "cap radius must be positive");
    w.check("grid.nr", nr >= 4, "need at least 4 radial rings");
    w.check(
        "grid.ntheta",
        ntheta >= 8 && ntheta % 2 == 0,
        "angular count must be even (antipodal pole ghost) and at least 8",
    );

    let initial = w.section("initial");
    let c = w.float(initial, "initial", "c", defaults.initial.c);
    let eps_r = w.float(initial, "initial", "eps_r", defaults.initial.eps_r);
    let eps_theta = w.float(initial, "initial", "eps_theta", defaults.initial.eps_theta);
    let k = w.integer(initial, "initial", "k", defaults.initial.k as i64);
    let ramp = w.float(initial, "initial", "ramp", defaults.initial.ramp);
    w.check("initial.c", c > 0.0, "radius scale must be positive");
    w.check("initial.k", k >= 1, "angular wavenumber must be at least 1");

    let flow = w.section("flow");
    let mode_str = w.string(flow, "flow", "mode", "raw");
    let mode = match mode_str.as_str() {
        "raw" => FlowMode::Raw,
        "rescaled" => FlowMode::Rescaled,
        other => {
            w.errors
                .push(format!("flow.mode: expected \"raw\" or \"rescaled\", got \"{other}\""));
            FlowMode::Raw
        }
    };
    let t_final = w.float(flow, "flow", "t_final", defaults.flow.t_final);
    let dt_safety = w.float(flow, "flow", "dt_safety", defaults.flow.dt_safety);
    let dt_max = w.float(flow, "flow", "dt_max", defaults.flow.dt_max);
    let monitor_stride = w.integer(
        flow,
        "flow",
        "monitor_stride",
        defaults.flow.monitor_stride as i64,
    );
    w.check("flow.t_final", t_final > 0.0, "final time must be positive");
    w.check("flow.dt_safety", dt_safety > 0.0, "safety factor must be positive");
    w.check("flow.dt_max", dt_max > 0.0, "step cap must be positive");
    w.check(
        "flow.monitor_stride",
        monitor_stride >= 1,
        "stride must be at least 1",
    );
    if dt_safety > 1.0 {
        w.warnings.push(format!(
            "flow.dt_safety = {dt_safety} exceeds 1: the step runs outside the stable region"
        ));
    }

    let output = w.section("output");
    let out_dir = w.string(output, "output", "out_dir", "out");
    let snapshot_times = w.float_list(output, "output", "snapshot_times");

    let tolerances = w.section("tolerances");
    let admissible_floor = w.float(
        tolerances,
        "tolerances",
        "admissible_floor",
        defaults.tolerances.admissible_floor,
    );
    let monitor_slack_factor = w.float(
        tolerances,
        "tolerances",
        "monitor_slack_factor",
        defaults.tolerances.monitor_slack_factor,
    );
    w.check(
        "tolerances.admissible_floor",
        admissible_floor >= 0.0,
        "floor must be nonnegative",
    );
    w.check(
        "tolerances.monitor_slack_factor",
        monitor_slack_factor > 0.0,
        "slack factor must be positive",
    );

    w.warn_unknown(&[
        ("grid", &["n", "r_max", "nr", "ntheta"]),
        ("initial", &["c", "eps_r", "eps_theta", "k", "ramp"]),
        (
            "flow",
            &["mode", "t_final", "dt_safety", "dt_max", "monitor_stride"],
        ),
        ("output", &["out_dir", "snapshot_times"]),
        (
            "tolerances",
            &["admissible_floor", "monitor_slack_factor"],
        ),
    ]);

    if !w.errors.is_empty() {
        return Err(w.errors);
    }
    Ok(ParsedConfig {
        config: RunConfig {
            grid: GridConfig {
                n: n as u32,
                r_max,
                nr: nr as usize,
                ntheta: ntheta as usize,
            },
            initial: InitialData {
                c,
                eps_r,
                eps_theta,
                k: k as u32,
                ramp,
            },
            flow: FlowConfig {
                mode,
                t_final,
                dt_safety,
                dt_max,
                monitor_stride: monitor_stride as usize,
                snapshot_times: snapshot_times.clone(),
            },
            output: OutputConfig {
                out_dir: PathBuf::from(out_dir),
                snapshot_times,
            },
            tolerances: Tolerances {
                admissible_floor,
                monitor_slack_factor,
            },
        },
        warnings: w.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let parsed = parse_config_str("[grid]\nnr = 16\n[flow]\nt_final = 0.5\n").unwrap();
        assert_eq!(parsed.config.grid.nr, 16);
        assert_eq!(parsed.config.grid.ntheta, 64);
        assert_eq!(parsed.config.flow.t_final, 0.5);
        assert_eq!(parsed.config.initial.c, 1.0);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn zero_safety_names_the_field() {
        let err = parse_config_str("[flow]\ndt_safety = 0.0\n").unwrap_err();
        assert!(err.iter().any(|e| e.contains("flow.dt_safety")), "{err:?}");
    }

    #[test]
    fn odd_ntheta_cites_even_rule() {
        let err = parse_config_str("[grid]\nntheta = 127\n").unwrap_err();
        assert!(
            err.iter().any(|e| e.contains("grid.ntheta") && e.contains("even")),
            "{err:?}"
        );
    }

    #[test]
    fn all_invalid_fields_are_reported() {
        let err =
            parse_config_str("[grid]\nnr = 1\nntheta = 5\n[flow]\ndt_max = -1.0\n").unwrap_err();
        assert!(err.len() >= 3, "{err:?}");
    }

    #[test]
    fn unknown_keys_warn_but_parse() {
        let parsed = parse_config_str("[grid]\nnr = 16\nfoo = 1\n[bar]\nbaz = 2\n").unwrap();
        assert_eq!(parsed.warnings.len(), 2, "{:?}", parsed.warnings);
    }

    #[test]
    fn oversized_safety_warns() {
        let parsed = parse_config_str("[flow]\ndt_safety = 5.0\n").unwrap();
        assert!(parsed.warnings.iter().any(|m| m.contains("dt_safety")));
    }

    #[test]
    fn bad_mode_is_an_error() {
        let err = parse_config_str("[flow]\nmode = \"sideways\"\n").unwrap_err();
        assert!(err.iter().any(|e| e.contains("flow.mode")));
    }
}
