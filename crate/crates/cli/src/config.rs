//! Flat sectioned key=value configuration files.
//!
//! Grammar: `[section]` headers (dots allowed, e.g. `[bath.1]`),
//! `key = value` pairs, `#` comments, blank lines. Every key must be
//! consumed by the command that loads the file; leftovers are rejected so
//! typos cannot silently fall back to defaults.

use quasim::bath::{BathSpec, NoiseKind, SpectralDensity};
use quasim::engine::{InitialState, Integrator, SimConfig};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    used: RefCell<BTreeSet<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {}: unterminated section", lineno + 1)))?
                    .trim();
                if name.is_empty() {
                    return Err(ConfigError(format!("line {}: empty section name", lineno + 1)));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
            } else if let Some((key, value)) = line.split_once('=') {
                if current.is_empty() {
                    return Err(ConfigError(format!(
                        "line {}: key outside any section",
                        lineno + 1
                    )));
                }
                let key = key.trim().to_string();
                let prev = sections
                    .get_mut(&current)
                    .unwrap()
                    .insert(key.clone(), value.trim().to_string());
                if prev.is_some() {
                    return Err(ConfigError(format!(
                        "line {}: duplicate key '{key}' in [{current}]",
                        lineno + 1
                    )));
                }
            } else {
                return Err(ConfigError(format!(
                    "line {}: expected 'key = value' or '[section]', got '{line}'",
                    lineno + 1
                )));
            }
        }
        Ok(Config {
            sections,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn load(path: &std::path::Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn section_names(&self) -> Vec<String> {
        self.sections.keys().cloned().collect()
    }

    fn raw(&self, section: &str, key: &str) -> Option<String> {
        let v = self.sections.get(section)?.get(key)?.clone();
        self.used
            .borrow_mut()
            .insert((section.to_string(), key.to_string()));
        Some(v)
    }

    pub fn get(&self, section: &str, key: &str) -> ConfigResult<String> {
        self.raw(section, key)
            .ok_or_else(|| ConfigError(format!("missing key '{key}' in [{section}]")))
    }

    pub fn get_opt(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key)
    }

    pub fn get_f64(&self, section: &str, key: &str) -> ConfigResult<f64> {
        parse_f64(section, key, &self.get(section, key)?)
    }

    pub fn get_f64_or(&self, section: &str, key: &str, default: f64) -> ConfigResult<f64> {
        match self.raw(section, key) {
            Some(v) => parse_f64(section, key, &v),
            None => Ok(default),
        }
    }

    pub fn get_u64_opt(&self, section: &str, key: &str) -> ConfigResult<Option<u64>> {
        match self.raw(section, key) {
            Some(v) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("[{section}] {key} = '{v}' is not a u64"))),
            None => Ok(None),
        }
    }

    pub fn get_usize_or(&self, section: &str, key: &str, default: usize) -> ConfigResult<usize> {
        match self.raw(section, key) {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| ConfigError(format!("[{section}] {key} = '{v}' is not an integer"))),
            None => Ok(default),
        }
    }

    pub fn get_bool_or(&self, section: &str, key: &str, default: bool) -> ConfigResult<bool> {
        match self.raw(section, key) {
            Some(v) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(ConfigError(format!(
                    "[{section}] {key} = '{other}' is not a boolean"
                ))),
            },
            None => Ok(default),
        }
    }

    pub fn get_f64_list(&self, section: &str, key: &str) -> ConfigResult<Vec<f64>> {
        let raw = self.get(section, key)?;
        raw.split(',')
            .map(|piece| parse_f64(section, key, piece.trim()))
            .collect()
    }

    pub fn get_f64_list_or(
        &self,
        section: &str,
        key: &str,
        default: &[f64],
    ) -> ConfigResult<Vec<f64>> {
        match self.raw(section, key) {
            Some(raw) => raw
                .split(',')
                .map(|piece| parse_f64(section, key, piece.trim()))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn get_usize_list(&self, section: &str, key: &str) -> ConfigResult<Vec<usize>> {
        let raw = self.get(section, key)?;
        raw.split(',')
            .map(|piece| {
                piece.trim().parse::<usize>().map_err(|_| {
                    ConfigError(format!("[{section}] {key}: '{piece}' is not an integer"))
                })
            })
            .collect()
    }

    /// Every `(section, key, value)` triple, for provenance echoes.
    pub fn entries(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for (section, keys) in &self.sections {
            for (key, value) in keys {
                out.push((section.clone(), key.clone(), value.clone()));
            }
        }
        out
    }

    /// Reject any key that no extractor consumed.
    pub fn ensure_fully_consumed(&self) -> ConfigResult<()> {
        let used = self.used.borrow();
        let mut unknown = Vec::new();
        for (section, keys) in &self.sections {
            for key in keys.keys() {
                if !used.contains(&(section.clone(), key.clone())) {
                    unknown.push(format!("[{section}] {key}"));
                }
            }
        }
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

fn parse_f64(section: &str, key: &str, v: &str) -> ConfigResult<f64> {
    v.parse::<f64>()
        .map_err(|_| ConfigError(format!("[{section}] {key} = '{v}' is not a number")))
}

/// `[oscillator]` section.
pub fn oscillator_params(cfg: &Config) -> ConfigResult<quasim::OscillatorParams> {
    let p = quasim::OscillatorParams {
        mass: cfg.get_f64_or("oscillator", "mass", 1.0)?,
        frequency: cfg.get_f64_or("oscillator", "frequency", 1.0)?,
        counter_term: cfg.get_bool_or("oscillator", "counter_term", true)?,
    };
    p.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(p)
}

/// A bath section (`[bath]` or `[bath.N]`).
pub fn bath_spec(cfg: &Config, section: &str) -> ConfigResult<BathSpec> {
    let spectral = match cfg
        .get_opt(section, "spectral")
        .unwrap_or_else(|| "lorentzian".into())
        .as_str()
    {
        "lorentzian" => SpectralDensity::lorentzian(
            cfg.get_f64(section, "coupling")?,
            cfg.get_f64(section, "resonance")?,
            cfg.get_f64(section, "width")?,
        ),
        "ohmic" => SpectralDensity::ohmic_exp_cutoff(
            cfg.get_f64(section, "damping")?,
            cfg.get_f64(section, "cutoff")?,
        ),
        other => {
            return Err(ConfigError(format!(
                "[{section}] spectral = '{other}' (expected lorentzian or ohmic)"
            )))
        }
    }
    .map_err(|e| ConfigError(e.to_string()))?;

    let kind = match cfg
        .get_opt(section, "noise")
        .unwrap_or_else(|| "quantum".into())
        .as_str()
    {
        "quantum" => NoiseKind::Quantum,
        "classical" => NoiseKind::Classical,
        other => {
            return Err(ConfigError(format!(
                "[{section}] noise = '{other}' (expected quantum or classical)"
            )))
        }
    };
    BathSpec::new(spectral, cfg.get_f64(section, "temperature")?, kind)
        .map_err(|e| ConfigError(e.to_string()))
}

/// `[simulation]` section; the master seed may be absent (drawn later).
pub fn sim_config(cfg: &Config) -> ConfigResult<(SimConfig, Option<u64>)> {
    let integrator = match cfg
        .get_opt("simulation", "integrator")
        .unwrap_or_else(|| "embedded".into())
        .as_str()
    {
        "embedded" => Integrator::Embedded,
        "convolution" => Integrator::Convolution,
        other => {
            return Err(ConfigError(format!(
                "[simulation] integrator = '{other}' (expected embedded or convolution)"
            )))
        }
    };
    let initial = InitialState {
        mean_x: cfg.get_f64_or("simulation", "mean_x0", 0.0)?,
        mean_p: cfg.get_f64_or("simulation", "mean_p0", 0.0)?,
        cov_xx: cfg.get_f64_or("simulation", "sxx0", 0.5)?,
        cov_xp: cfg.get_f64_or("simulation", "sxp0", 0.0)?,
        cov_pp: cfg.get_f64_or("simulation", "spp0", 0.5)?,
    };
    let seed = cfg.get_u64_opt("simulation", "master_seed")?;
    let sim = SimConfig {
        dt: cfg.get_f64_or("simulation", "dt", 0.05)?,
        t_final: cfg.get_f64_or("simulation", "t_final", 100.0)?,
        n_traj: cfg.get_usize_or("simulation", "n_traj", 2000)?,
        master_seed: seed.unwrap_or(0),
        initial,
        integrator,
        sample_every: cfg.get_usize_or("simulation", "sample_every", 50)?,
    };
    Ok((sim, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg = Config::parse(
            "[oscillator]\nmass = 2.0\n# comment\n\n[bath]\ncoupling = 0.3\nresonance = 0.5\nwidth = 0.1\ntemperature = 0.1\n",
        )
        .unwrap();
        let p = oscillator_params(&cfg).unwrap();
        assert_eq!(p.mass, 2.0);
        let b = bath_spec(&cfg, "bath").unwrap();
        assert_eq!(b.temperature, 0.1);
        cfg.ensure_fully_consumed().unwrap();

        let cfg = Config::parse("[oscillator]\nmass = 1.0\nmas = 1.0\n").unwrap();
        let _ = oscillator_params(&cfg).unwrap();
        let err = cfg.ensure_fully_consumed().unwrap_err();
        assert!(err.0.contains("mas"), "{err}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("[osc\n").is_err());
        assert!(Config::parse("key = 1\n").is_err());
        assert!(Config::parse("[a]\nnonsense line\n").is_err());
        assert!(Config::parse("[a]\nk = 1\nk = 2\n").is_err());
    }

    #[test]
    fn sim_defaults_and_seed() {
        let cfg = Config::parse("[simulation]\ndt = 0.1\nmaster_seed = 9\n").unwrap();
        let (sim, seed) = sim_config(&cfg).unwrap();
        assert_eq!(sim.dt, 0.1);
        assert_eq!(seed, Some(9));
        let cfg = Config::parse("[simulation]\ndt = 0.1\n").unwrap();
        let (_, seed) = sim_config(&cfg).unwrap();
        assert_eq!(seed, None);
    }
}
