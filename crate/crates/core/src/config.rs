//! Plain `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown and repeated keys are
//! rejected. `beta`, `omega` and `xi` are required; everything else has a
//! default. `c_e` is required when `scheme = generalized`.

use std::collections::HashSet;
use std::path::PathBuf;

use crate::bath::BathSpec;
use crate::engine::{PairSampling, RunConfig};
use crate::error::ConfigError;
use crate::hopping::{FilterMode, SchemeConfig, SchemeKind};
use crate::model::SubsystemParams;

pub const KEYS: &[&str] = &[
    "beta",
    "omega",
    "xi",
    "omega_c",
    "omega_max",
    "n_modes",
    "dt",
    "t_max",
    "n_traj",
    "record_stride",
    "seed",
    "scheme",
    "c_e",
    "filter_mode",
    "n_max",
    "threads",
    "output",
    "mass",
    "pair_sampling",
    "stderr_threshold",
    "probe_times",
];

/// Parsed configuration file: the physics run plus driver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FileConfig {
    pub run: RunConfig,
    /// Output path stem; `.csv` and `.meta` are appended.
    pub output: PathBuf,
    /// Whether `c_e` was given explicitly.
    pub c_e_given: bool,
    /// Stderr level whose first crossing `compare` reports.
    pub stderr_threshold: f64,
    /// Times at which `sweep` summarizes the stderr.
    pub probe_times: Vec<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen = HashSet::new();
        let mut run = RunConfig::default();
        let mut output = PathBuf::from("sstp_out");
        let mut c_e = None;
        let mut scheme = SchemeKind::Generalized;
        let mut filter_mode = FilterMode::Literal;
        let mut n_max = 2;
        let mut stderr_threshold = 0.1;
        let mut probe_times = vec![5.0, 10.0, 15.0, 20.0];

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey(key.to_string()));
            }
            match key {
                "beta" => run.bath.beta = parse(key, value)?,
                "omega" => run.sub.omega = parse(key, value)?,
                "xi" => run.bath.xi = parse(key, value)?,
                "omega_c" => run.bath.omega_c = parse(key, value)?,
                "omega_max" => run.bath.omega_max = parse(key, value)?,
                "n_modes" => run.bath.n_modes = parse(key, value)?,
                "dt" => run.dt = parse(key, value)?,
                "t_max" => run.t_max = parse(key, value)?,
                "n_traj" => run.n_traj = parse(key, value)?,
                "record_stride" => run.record_stride = parse(key, value)?,
                "seed" => run.seed = parse(key, value)?,
                "mass" => run.mass = parse(key, value)?,
                "threads" => run.threads = parse(key, value)?,
                "n_max" => n_max = parse(key, value)?,
                "c_e" => c_e = Some(parse::<f64>(key, value)?),
                "scheme" => {
                    scheme = match value {
                        "primitive" => SchemeKind::Primitive,
                        "generalized" => SchemeKind::Generalized,
                        _ => return Err(ConfigError::invalid(key, "expected primitive|generalized")),
                    }
                }
                "filter_mode" => {
                    filter_mode = match value {
                        "literal" => FilterMode::Literal,
                        "residual" => FilterMode::Residual,
                        _ => return Err(ConfigError::invalid(key, "expected literal|residual")),
                    }
                }
                "pair_sampling" => {
                    run.pair_sampling = match value {
                        "stratified" => PairSampling::Stratified,
                        "uniform" => PairSampling::Uniform,
                        _ => return Err(ConfigError::invalid(key, "expected stratified|uniform")),
                    }
                }
                "output" => {
                    if value.is_empty() {
                        return Err(ConfigError::invalid(key, "empty path"));
                    }
                    output = PathBuf::from(value)
                }
                "stderr_threshold" => stderr_threshold = parse(key, value)?,
                "probe_times" => {
                    probe_times = value
                        .split(',')
                        .map(|v| parse::<f64>(key, v.trim()))
                        .collect::<Result<_, _>>()?
                }
                _ => unreachable!("key list and match arms disagree"),
            }
        }
        for required in ["beta", "omega", "xi"] {
            if !seen.contains(required) {
                return Err(ConfigError::Missing(required));
            }
        }
        if scheme == SchemeKind::Generalized && c_e.is_none() {
            return Err(ConfigError::Missing("c_e"));
        }
        let c_e_value = c_e.unwrap_or(f64::INFINITY);
        if c_e_value.is_nan() {
            return Err(ConfigError::invalid("c_e", "must not be NaN"));
        }
        run.scheme = SchemeConfig {
            kind: scheme,
            c_e: c_e_value,
            filter_mode,
            n_max,
        };
        run.validate()?;
        Ok(Self {
            run,
            output,
            c_e_given: c_e.is_some(),
            stderr_threshold,
            probe_times,
        })
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| ConfigError::invalid(key, format!("`{value}`: {e}")))
}

/// `key = value` echo of every parameter that determines a run's numbers.
pub fn echo(cfg: &RunConfig) -> Vec<(String, String)> {
    let BathSpec {
        n_modes,
        xi,
        omega_c,
        omega_max,
        beta,
    } = cfg.bath;
    let scheme = match cfg.scheme.kind {
        SchemeKind::Primitive => "primitive",
        SchemeKind::Generalized => "generalized",
    };
    let filter_mode = match cfg.scheme.filter_mode {
        FilterMode::Literal => "literal",
        FilterMode::Residual => "residual",
    };
    let pair_sampling = match cfg.pair_sampling {
        PairSampling::Stratified => "stratified",
        PairSampling::Uniform => "uniform",
    };
    let SubsystemParams { omega } = cfg.sub;
    [
        ("beta", beta.to_string()),
        ("omega", omega.to_string()),
        ("xi", xi.to_string()),
        ("omega_c", omega_c.to_string()),
        ("omega_max", omega_max.to_string()),
        ("n_modes", n_modes.to_string()),
        ("mass", cfg.mass.to_string()),
        ("dt", cfg.dt.to_string()),
        ("t_max", cfg.t_max.to_string()),
        ("n_traj", cfg.n_traj.to_string()),
        ("record_stride", cfg.record_stride.to_string()),
        ("seed", cfg.seed.to_string()),
        ("scheme", scheme.to_string()),
        ("c_e", cfg.scheme.c_e.to_string()),
        ("filter_mode", filter_mode.to_string()),
        ("n_max", cfg.scheme.n_max.to_string()),
        ("pair_sampling", pair_sampling.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "\
# low friction
beta = 3
omega = 0.3333333333
xi = 0.1
scheme = generalized
c_e = 0.05
n_max = 2
dt = 0.01
";

    #[test]
    fn parses_and_defaults() {
        let cfg = FileConfig::parse(FIG1).unwrap();
        assert_eq!(cfg.run.bath.beta, 3.0);
        assert_eq!(cfg.run.sub.omega, 0.3333333333);
        assert_eq!(cfg.run.scheme.c_e, 0.05);
        assert_eq!(cfg.run.scheme.kind, SchemeKind::Generalized);
        assert_eq!(cfg.run.bath.n_modes, 200);
        assert_eq!(cfg.run.record_stride, 10);
        assert_eq!(cfg.run.mass, 1.0);
        assert!(cfg.c_e_given);
    }

    #[test]
    fn infinite_threshold() {
        let cfg = FileConfig::parse("beta=1\nomega=0.4\nxi=0.13\nc_e=+inf\n").unwrap();
        assert_eq!(cfg.run.scheme.c_e, f64::INFINITY);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            FileConfig::parse("beta=1\nomega=1\nxi=0\nc_e=1\ncolour=red\n"),
            Err(ConfigError::UnknownKey("colour".into()))
        );
        assert_eq!(
            FileConfig::parse("beta=1\nbeta=2\n"),
            Err(ConfigError::DuplicateKey("beta".into()))
        );
        assert_eq!(FileConfig::parse("omega=1\nxi=0\nc_e=1\n"), Err(ConfigError::Missing("beta")));
        assert_eq!(FileConfig::parse("beta=1\nomega=1\nxi=0\n"), Err(ConfigError::Missing("c_e")));
        assert!(matches!(FileConfig::parse("beta 1\n"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(
            FileConfig::parse("beta=1\nomega=1\nxi=0\nscheme=primitive\ndt=-1\n"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(
            FileConfig::parse("beta=1\nomega=x\nxi=0\nscheme=primitive\n"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = FileConfig::parse(FIG1).unwrap();
        let text: String = echo(&cfg.run)
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let again = FileConfig::parse(&text).unwrap();
        assert_eq!(again.run, cfg.run);
    }
}
