use std::path::{Path, PathBuf};

use crate::liouville::DephasingGenerator;
use crate::protocol::ProtocolConfig;
use crate::qstate::Hamiltonian;

use super::CliError;

/// Experiment settings read from a `key = value` file.
///
/// Keys are case-sensitive: `omega` is the σz bias and `Omega` the σx
/// (Rabi) amplitude of `H₀ = Ωσx + ωσz`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega: f64,
    pub rabi: f64,
    pub gamma: f64,
    pub t_star: f64,
    pub tau: f64,
    pub t_fin: f64,
    pub beta: f64,
    pub h: f64,
    pub realizations: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            rabi: 3.0,
            gamma: 2.0 / 3.0,
            t_star: 0.33,
            tau: 0.0662,
            t_fin: 10.0,
            beta: 1.0,
            h: 1e-3,
            realizations: 1000,
            seed: 42,
            out_dir: PathBuf::from("."),
        }
    }
}

pub const KEYS: [&str; 11] = [
    "omega", "Omega", "gamma", "t_star", "tau", "t_fin", "beta", "h", "realizations", "seed",
    "out_dir",
];

fn parse_float(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Config(format!("line {line}: {key} = {value:?} is not a number")))?;
    if v.is_nan() {
        return Err(CliError::Config(format!("line {line}: {key} is NaN")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("line {line}: {key} = {value:?} is not an integer")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown and repeated keys are rejected, missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("line {line}: unknown key {key:?}")));
            }
            if seen.contains(&key) {
                return Err(CliError::Config(format!("line {line}: duplicate key {key:?}")));
            }
            seen.push(key);
            match key {
                "omega" => cfg.omega = parse_float(key, value, line)?,
                "Omega" => cfg.rabi = parse_float(key, value, line)?,
                "gamma" => cfg.gamma = parse_float(key, value, line)?,
                "t_star" => cfg.t_star = parse_float(key, value, line)?,
                "tau" => cfg.tau = parse_float(key, value, line)?,
                "t_fin" => cfg.t_fin = parse_float(key, value, line)?,
                "beta" => cfg.beta = parse_float(key, value, line)?,
                "h" => cfg.h = parse_float(key, value, line)?,
                "realizations" => cfg.realizations = parse_int(key, value, line)?,
                "seed" => cfg.seed = parse_int(key, value, line)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Renders the config in the file format, every key present.
    pub fn to_text(&self) -> String {
        format!(
            "omega = {}\nOmega = {}\ngamma = {}\nt_star = {}\ntau = {}\nt_fin = {}\nbeta = {}\nh = {}\nrealizations = {}\nseed = {}\nout_dir = {}\n",
            self.omega,
            self.rabi,
            self.gamma,
            self.t_star,
            self.tau,
            self.t_fin,
            self.beta,
            self.h,
            self.realizations,
            self.seed,
            self.out_dir.display()
        )
    }

    pub fn protocol(&self) -> Result<ProtocolConfig, CliError> {
        let hamiltonian = Hamiltonian::qubit(self.rabi, self.omega).map_err(CliError::from_input)?;
        let dephasing = DephasingGenerator::computational(self.gamma).map_err(CliError::from_input)?;
        let cfg = ProtocolConfig {
            hamiltonian,
            dephasing,
            initial_state: None,
            t_star: self.t_star,
            tau: self.tau,
            t_fin: self.t_fin,
            beta: self.beta,
            step: self.h,
            realizations: self.realizations,
            master_seed: self.seed,
        };
        cfg.validate().map_err(CliError::from_input)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::parse("# comment\n\ntau = 0.1 # trailing\nOmega=2\nrealizations = 5\n").unwrap();
        assert_eq!(cfg.tau, 0.1);
        assert_eq!(cfg.rabi, 2.0);
        assert_eq!(cfg.omega, 1.0);
        assert_eq!(cfg.realizations, 5);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse("Tau = 1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("tau 1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("tau = x"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("tau = 1\ntau = 2"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("seed = -3"), Err(CliError::Config(_))));
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            gamma: 0.25,
            out_dir: PathBuf::from("out/run"),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn invalid_physics_is_a_config_error() {
        let mut cfg = RunConfig {
            tau: 1.0,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.protocol(), Err(CliError::Config(_))));
        cfg = RunConfig::default();
        cfg.rabi = 0.0;
        cfg.omega = 0.0;
        assert!(matches!(cfg.protocol(), Err(CliError::Config(_))));
    }
}
