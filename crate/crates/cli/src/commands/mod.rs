//! Command implementations shared between the binary and the tests.

pub mod dynamics;
pub mod network;
pub mod noise;
pub mod steady;
pub mod verify;

use crate::config::Config;
use crate::CliError;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Options common to the config-driven subcommands.
#[derive(Debug, Clone)]
pub struct CommonOpts {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub traj: Option<usize>,
}

/// Resolve the master seed: flag beats config; absent everywhere, one is
/// drawn from the wall clock and reported so the run can be replayed.
pub fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> (u64, bool) {
    if let Some(s) = flag {
        return (s, false);
    }
    if let Some(s) = from_config {
        return (s, false);
    }
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0xdead_beef);
    (quasim::seed::mix(nanos), true)
}

pub(crate) fn create_out_file(out_dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(out_dir)?;
    Ok(BufWriter::new(File::create(out_dir.join(name))?))
}

pub(crate) fn header_meta(cfg_echo: &[(String, String)], seed: u64, drawn: bool) -> Vec<(String, String)> {
    let mut meta = vec![(
        "master_seed".to_string(),
        format!("{seed}{}", if drawn { " (drawn)" } else { "" }),
    )];
    meta.extend(cfg_echo.iter().cloned());
    meta
}

pub(crate) fn write_meta<W: Write>(
    w: &mut W,
    meta: &[(String, String)],
) -> Result<(), CliError> {
    let pairs: Vec<(&str, String)> = meta.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    quasim::export::write_header(w, &pairs)?;
    Ok(())
}

/// Echo every configuration key into `# section.key = value` header lines.
pub(crate) fn config_echo(cfg: &Config) -> Vec<(String, String)> {
    cfg.entries()
        .into_iter()
        .map(|(section, key, value)| (format!("{section}.{key}"), value))
        .collect()
}
