//! Plot-ready CSV emission.
//!
//! Every file starts with `#`-prefixed metadata lines (configuration echo,
//! seed, crate version) followed by a column-name row and plain numeric
//! rows. Floats print with Rust's shortest round-trip formatting, so a
//! rerun with the same inputs yields byte-identical bodies.

use crate::engine::{EnsembleStats, HeatCurrentTrace};
use crate::noise::{NoiseTrace, PsdEstimate};
use crate::oracle::SteadyCovariances;
use crate::{BathSpec, Result};
use std::io::Write;

/// `#`-prefixed provenance block; `meta` entries are `(key, value)` pairs.
pub fn write_header<W: Write>(w: &mut W, meta: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# quasim {}", env!("CARGO_PKG_VERSION")).map_err(io_err)?;
    for (k, v) in meta {
        writeln!(w, "# {k} = {v}").map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> crate::Error {
    crate::Error::InvalidConfig(format!("I/O error: {e}"))
}

/// Columns `t,F`.
pub fn write_trace<W: Write>(w: &mut W, trace: &NoiseTrace) -> Result<()> {
    writeln!(w, "t,F").map_err(io_err)?;
    for (k, s) in trace.samples.iter().enumerate() {
        writeln!(w, "{},{}", k as f64 * trace.dt, s).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `omega,P_F,P_target`.
pub fn write_psd<W: Write>(w: &mut W, est: &PsdEstimate, bath: &BathSpec) -> Result<()> {
    writeln!(w, "omega,P_F,P_target").map_err(io_err)?;
    for (f, p) in est.freq.iter().zip(&est.psd) {
        writeln!(w, "{},{},{}", f, p, bath.force_psd(*f)?).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `lag,tau,acf,acf_target`.
pub fn write_autocorrelation<W: Write>(
    w: &mut W,
    dt: f64,
    acf: &[f64],
    target: &[f64],
) -> Result<()> {
    writeln!(w, "lag,tau,acf,acf_target").map_err(io_err)?;
    for (lag, (a, t)) in acf.iter().zip(target).enumerate() {
        writeln!(w, "{},{},{},{}", lag, lag as f64 * dt, a, t).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `t,mu_x,mu_p,sigma_xx,sigma_xp,sigma_pp,se_xx,se_xp,se_pp`.
pub fn write_ensemble<W: Write>(w: &mut W, stats: &EnsembleStats) -> Result<()> {
    writeln!(w, "t,mu_x,mu_p,sigma_xx,sigma_xp,sigma_pp,se_xx,se_xp,se_pp").map_err(io_err)?;
    for k in 0..stats.times.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            stats.times[k],
            stats.mean_x[k],
            stats.mean_p[k],
            stats.cov_xx[k],
            stats.cov_xp[k],
            stats.cov_pp[k],
            stats.se_cov_xx[k],
            stats.se_cov_xp[k],
            stats.se_cov_pp[k],
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Columns `t,sigma_xx,sigma_xp,sigma_pp` for analytic moment curves.
pub fn write_oracle_dynamics<W: Write>(
    w: &mut W,
    times: &[f64],
    covs: &[(f64, f64, f64)],
) -> Result<()> {
    writeln!(w, "t,sigma_xx,sigma_xp,sigma_pp").map_err(io_err)?;
    for (t, (xx, xp, pp)) in times.iter().zip(covs) {
        writeln!(w, "{},{},{},{}", t, xx, xp, pp).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `T,sigma_xx,sigma_pp,method`, one row per sweep entry.
pub fn write_steady_sweep<W: Write>(
    w: &mut W,
    rows: &[(f64, SteadyCovariances)],
) -> Result<()> {
    writeln!(w, "T,sigma_xx,sigma_pp,method").map_err(io_err)?;
    for (t, s) in rows {
        writeln!(w, "{},{},{},{}", t, s.sigma_xx, s.sigma_pp, s.method.label()).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `t,Qdot,se`.
pub fn write_heat_current<W: Write>(w: &mut W, trace: &HeatCurrentTrace) -> Result<()> {
    writeln!(w, "t,Qdot,se").map_err(io_err)?;
    for k in 0..trace.times.len() {
        writeln!(w, "{},{},{}", trace.times[k], trace.mean[k], trace.se[k]).map_err(io_err)?;
    }
    Ok(())
}

/// Columns `T,Qdot_H,Qdot_C,se_H,se_C,method` for two-bath current sweeps.
pub fn write_network_sweep<W: Write>(
    w: &mut W,
    rows: &[(f64, f64, f64, f64, f64, &str)],
) -> Result<()> {
    writeln!(w, "T,Qdot_H,Qdot_C,se_H,se_C,method").map_err(io_err)?;
    for (t, qh, qc, seh, sec, method) in rows {
        writeln!(w, "{},{},{},{},{},{}", t, qh, qc, seh, sec, method).map_err(io_err)?;
    }
    Ok(())
}
