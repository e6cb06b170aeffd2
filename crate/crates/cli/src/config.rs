//! Run configuration: a flat UTF-8 text file of `key = value` lines.
//!
//! Blank lines and everything after `#` are ignored. Keys are
//! case-sensitive, may appear at most once, and unknown keys are rejected.
//! Only `L`, `h` and `tau` are required; every other key has the default
//! listed in [`KEYS`].

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gpflow_core::{
    Config, Field, Grid, KrylovConfig, Params, Potential, Preconditioner, Safeguard,
};

use crate::error::{CliError, CliResult};

/// Every accepted key with its default (`None` for required keys) and meaning.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("L", None, "half width of the square domain [-L, L]^2"),
    ("h", None, "mesh size; 2L/h must be an integer"),
    ("tau", None, "time step"),
    ("k11", Some("0"), "intra-species interaction of component 1"),
    ("k12", Some("0"), "inter-species interaction"),
    ("k22", Some("0"), "intra-species interaction of component 2"),
    ("beta", Some("0"), "Josephson coupling strength"),
    ("omega1", Some("0"), "rotation frequency of component 1"),
    ("omega2", Some("0"), "rotation frequency of component 2"),
    ("gamma", Some("1"), "harmonic trap scale in gamma |x|^2 / 2"),
    ("add_abs_beta", Some("true"), "add |beta| to the trap"),
    ("potential_offset", Some("0"), "constant added to the trap"),
    ("max_steps", Some("100000"), "step limit"),
    ("stop_tol", Some("1e-7"), "stop once |psi_next - psi|_inf / tau < stop_tol"),
    ("krylov_rel_tol", Some("1e-10"), "relative residual tolerance of the inner solve"),
    ("krylov_abs_tol", Some("1e-14"), "absolute residual tolerance of the inner solve"),
    ("krylov_max_iters", Some("auto"), "inner iteration cap; auto = 10 x unknowns"),
    ("preconditioner", Some("none"), "none | diagonal"),
    ("safeguard", Some("none"), "none | backtrack"),
    ("backtrack_shrink", Some("0.5"), "step factor applied on an energy increase"),
    ("backtrack_max_halvings", Some("20"), "retries per step before giving up"),
    ("record_h1_increments", Some("true"), "record H1 increments for the dissipation audit"),
    ("initial_data", Some("gaussian"), "gaussian | vortex_gaussian | file"),
    ("initial_file", Some(""), "field.csv to start from when initial_data = file"),
    ("output_dir", Some("."), "directory for CSV output"),
    ("emit_fields", Some("false"), "write field.csv with the final state"),
    ("allow_indefinite", Some("false"), "fall back to MINRES on an indefinite shifted operator"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Gaussian,
    VortexGaussian,
    FromFile(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub half_width: f64,
    pub mesh: f64,
    pub params: Params,
    pub solver: Config,
    pub initial_data: InitialData,
    pub output_dir: PathBuf,
    pub emit_fields: bool,
}

struct Entries {
    values: HashMap<String, (usize, String)>,
}

impl Entries {
    fn take<T: FromStr>(&mut self, key: &str) -> CliResult<T> {
        let (line, raw) = match self.values.remove(key) {
            Some((line, raw)) => (Some(line), raw),
            None => {
                let default = KEYS
                    .iter()
                    .find(|(k, _, _)| *k == key)
                    .and_then(|(_, d, _)| *d)
                    .ok_or_else(|| CliError::config(key, "missing required key"))?;
                (None, default.to_string())
            }
        };
        raw.parse().map_err(|_| {
            let at = line.map_or(String::from("default"), |l| format!("line {l}"));
            CliError::config(key, format!("cannot parse `{raw}` ({at})"))
        })
    }

    fn take_raw(&mut self, key: &str) -> CliResult<String> {
        self.take::<String>(key)
    }
}

fn parse_bool(key: &str, raw: &str) -> CliResult<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(key, format!("expected true or false, got `{raw}`"))),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative `initial_file` paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Syntax(format!("line {}: expected `key = value`, got `{content}`", i + 1)))?;
            let key = key.trim();
            if !KEYS.iter().any(|(k, _, _)| *k == key) {
                return Err(CliError::config(key, format!("unknown key (line {})", i + 1)));
            }
            if values.insert(key.to_string(), (i + 1, value.trim().to_string())).is_some() {
                return Err(CliError::config(key, format!("duplicate key (line {})", i + 1)));
            }
        }
        let mut e = Entries { values };

        let half_width: f64 = e.take("L")?;
        let mesh: f64 = e.take("h")?;
        let tau: f64 = e.take("tau")?;

        let mut params = Params::new(e.take("k11")?, e.take("k12")?, e.take("k22")?, e.take("beta")?)
            .with_rotation(e.take("omega1")?, e.take("omega2")?);
        let gamma: f64 = e.take("gamma")?;
        let add_abs_beta = parse_bool("add_abs_beta", &e.take_raw("add_abs_beta")?)?;
        let offset: f64 = e.take("potential_offset")?;
        params.potential = Potential::Harmonic { gamma, add_abs_beta, offset };

        let max_iters = match e.take_raw("krylov_max_iters")?.as_str() {
            "auto" => None,
            raw => Some(raw.parse().map_err(|_| CliError::config("krylov_max_iters", format!("cannot parse `{raw}`")))?),
        };
        let preconditioner = match e.take_raw("preconditioner")?.as_str() {
            "none" => Preconditioner::None,
            "diagonal" => Preconditioner::Diagonal,
            other => return Err(CliError::config("preconditioner", format!("expected none or diagonal, got `{other}`"))),
        };
        let krylov = KrylovConfig {
            rel_tol: e.take("krylov_rel_tol")?,
            abs_tol: e.take("krylov_abs_tol")?,
            max_iters,
            preconditioner,
            allow_indefinite: parse_bool("allow_indefinite", &e.take_raw("allow_indefinite")?)?,
        };
        let shrink: f64 = e.take("backtrack_shrink")?;
        let max_halvings: usize = e.take("backtrack_max_halvings")?;
        let safeguard = match e.take_raw("safeguard")?.as_str() {
            "none" => Safeguard::None,
            "backtrack" => Safeguard::Backtrack { shrink, max_halvings },
            other => return Err(CliError::config("safeguard", format!("expected none or backtrack, got `{other}`"))),
        };
        let solver = Config {
            tau,
            max_steps: e.take("max_steps")?,
            stop_tol: e.take("stop_tol")?,
            krylov,
            safeguard,
            record_h1_increments: parse_bool("record_h1_increments", &e.take_raw("record_h1_increments")?)?,
        };

        let file = e.take_raw("initial_file")?;
        let initial_data = match e.take_raw("initial_data")?.as_str() {
            "gaussian" => InitialData::Gaussian,
            "vortex_gaussian" => InitialData::VortexGaussian,
            "file" if file.is_empty() => {
                return Err(CliError::config("initial_file", "required when initial_data = file"));
            }
            "file" => InitialData::FromFile(base_dir.join(file)),
            other => {
                return Err(CliError::config(
                    "initial_data",
                    format!("expected gaussian, vortex_gaussian or file, got `{other}`"),
                ))
            }
        };
        let output_dir = PathBuf::from(e.take_raw("output_dir")?);
        let emit_fields = parse_bool("emit_fields", &e.take_raw("emit_fields")?)?;

        let cfg = Self { half_width, mesh, params, solver, initial_data, output_dir, emit_fields };
        cfg.grid()?;
        cfg.params.validate().map_err(|err| CliError::config("k11..omega2", err.to_string()))?;
        cfg.solver.validate().map_err(|err| CliError::config("tau/stop_tol/krylov_*", err.to_string()))?;
        Ok(cfg)
    }

    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.half_width, self.mesh).map_err(|err| CliError::config("L/h", err.to_string()))
    }

    /// Initial state, normalized to machine precision on the grid.
    pub fn initial_state(&self) -> CliResult<Field> {
        let grid = self.grid()?;
        let raw = match &self.initial_data {
            InitialData::Gaussian => gpflow_core::gaussian_initial(grid),
            InitialData::VortexGaussian => gpflow_core::vortex_initial(grid),
            InitialData::FromFile(path) => crate::output::read_field(path, grid)?,
        };
        Ok(raw.normalized()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        RunConfig::parse(text, Path::new("/base"))
    }

    #[test]
    fn empty_config_names_half_width() {
        let err = parse("").unwrap_err();
        assert!(err.to_string().contains("`L`"), "{err}");
    }

    #[test]
    fn missing_tau_is_named() {
        let err = parse("L = 4\nh = 0.25\n").unwrap_err();
        assert!(err.to_string().contains("`tau`"));
    }

    #[test]
    fn defaults_apply() {
        let c = parse("L = 4\nh = 0.25 # comment\ntau=1\n").unwrap();
        assert_eq!(c.solver.max_steps, 100_000);
        assert_eq!(c.solver.stop_tol, 1e-7);
        assert_eq!(c.solver.krylov.max_iters, None);
        assert_eq!(c.initial_data, InitialData::Gaussian);
        assert_eq!(c.params.potential, Potential::Harmonic { gamma: 1.0, add_abs_beta: true, offset: 0.0 });
        assert!(!c.emit_fields);
        assert_eq!(c.output_dir, PathBuf::from("."));
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(parse("L = 4\nh = 0.25\ntau = 1\nfoo = 2\n").unwrap_err().to_string().contains("`foo`"));
        assert!(parse("L = 4\nL = 4\nh = 0.25\ntau = 1\n").unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn bad_values_name_the_key() {
        let err = parse("L = 4\nh = 0.25\ntau = 1\nk11 = lots\n").unwrap_err();
        assert!(err.to_string().contains("`k11`"));
        let err = parse("L = 4\nh = 0.3\ntau = 1\n").unwrap_err();
        assert!(err.to_string().contains("L/h"));
        let err = parse("L = 4\nh = 0.25\ntau = 0\n").unwrap_err();
        assert!(err.to_string().contains("tau"));
    }

    #[test]
    fn file_initial_data_resolves_relative_paths() {
        let c = parse("L = 4\nh = 0.25\ntau = 1\ninitial_data = file\ninitial_file = f.csv\n").unwrap();
        assert_eq!(c.initial_data, InitialData::FromFile(PathBuf::from("/base/f.csv")));
        assert!(parse("L = 4\nh = 0.25\ntau = 1\ninitial_data = file\n").is_err());
    }

    #[test]
    fn full_case_parses() {
        let text = "L = 4\nh = 0.0625\ntau = 0.5\nk11 = 100\nk12 = 94\nk22 = 97\nbeta = -5\nomega1 = 0.5\nomega2 = 0.5\n\
                    safeguard = backtrack\nbacktrack_shrink = 0.25\npreconditioner = diagonal\nkrylov_max_iters = 50\n";
        let c = parse(text).unwrap();
        assert_eq!(c.params.k12, 94.0);
        assert_eq!(c.solver.safeguard, Safeguard::Backtrack { shrink: 0.25, max_halvings: 20 });
        assert_eq!(c.solver.krylov.preconditioner, Preconditioner::Diagonal);
        assert_eq!(c.solver.krylov.max_iters, Some(50));
    }
}
