//! `quasim dynamics`: ensemble moment curves overlaid with the analytic
//! moments, for quantum and classical noise, plus the uncertainty product.

use super::{config_echo, create_out_file, header_meta, resolve_seed, write_meta, CommonOpts};
use crate::config::{bath_spec, oscillator_params, sim_config, Config};
use crate::report::{CheckResult, Report};
use crate::CommandOutcome;
use quasim::bath::{BathSpec, NoiseKind};
use quasim::engine::{self, EnsembleStats};
use quasim::export;
use quasim::oracle;
use std::io::Write;

pub fn run(opts: &CommonOpts) -> CommandOutcome {
    let cfg = Config::load(&opts.config)?;
    let params = oscillator_params(&cfg)?;
    let bath_template = bath_spec(&cfg, "bath")?;
    let (mut sim, cfg_seed) = sim_config(&cfg)?;
    let (master, drawn) = resolve_seed(opts.seed, cfg_seed);
    sim.master_seed = master;
    if let Some(n) = opts.traj {
        sim.n_traj = n;
    }
    cfg.ensure_fully_consumed()?;
    let meta = header_meta(&config_echo(&cfg), master, drawn);

    // degenerate run: report the initial moments only
    if sim.t_final == 0.0 {
        let mut f = create_out_file(&opts.out, "ensemble_initial.csv")?;
        write_meta(&mut f, &meta)?;
        writeln!(f, "t,mu_x,mu_p,sigma_xx,sigma_xp,sigma_pp,se_xx,se_xp,se_pp")
            .map_err(crate::CliError::from)?;
        writeln!(
            f,
            "0,{},{},{},{},{},0,0,0",
            sim.initial.mean_x,
            sim.initial.mean_p,
            sim.initial.cov_xx,
            sim.initial.cov_xp,
            sim.initial.cov_pp
        )
        .map_err(crate::CliError::from)?;
        return Ok(true);
    }

    let mut report = Report::default();
    for kind in [NoiseKind::Quantum, NoiseKind::Classical] {
        let bath = BathSpec::new(bath_template.spectral.clone(), bath_template.temperature, kind)?;
        let label = kind.describe();
        let stats = engine::run_ensemble(&sim, &params, &bath)?;

        let g = oracle::g_functions(&params, &bath.spectral)?;
        let sigma0 = (sim.initial.cov_xx, sim.initial.cov_xp, sim.initial.cov_pp);
        let oracle_curve: Vec<(f64, f64, f64)> = stats
            .times
            .iter()
            .map(|&t| oracle::covariance_evolution(&g, &bath, sigma0, t))
            .collect::<Result<_, _>>()?;

        let mut f = create_out_file(&opts.out, &format!("ensemble_{label}.csv"))?;
        write_meta(&mut f, &meta)?;
        export::write_ensemble(&mut f, &stats)?;

        let mut f = create_out_file(&opts.out, &format!("oracle_{label}.csv"))?;
        write_meta(&mut f, &meta)?;
        export::write_oracle_dynamics(&mut f, &stats.times, &oracle_curve)?;

        let mut f = create_out_file(&opts.out, &format!("uncertainty_{label}.csv"))?;
        write_meta(&mut f, &meta)?;
        writeln!(f, "t,product,se,bound").map_err(crate::CliError::from)?;
        for k in 0..stats.times.len() {
            let (product, se) = uncertainty_product(&stats, k);
            writeln!(f, "{},{},{},0.25", stats.times[k], product, se)
                .map_err(crate::CliError::from)?;
        }

        // ensemble-vs-analytic agreement over the checkpoints
        let mut within = 0usize;
        let mut total = 0usize;
        for (k, &t) in stats.times.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let (oxx, oxp, opp) = oracle_curve[k];
            let worst = [
                (stats.cov_xx[k] - oxx).abs() / stats.se_cov_xx[k].max(1e-300),
                (stats.cov_xp[k] - oxp).abs() / stats.se_cov_xp[k].max(1e-300),
                (stats.cov_pp[k] - opp).abs() / stats.se_cov_pp[k].max(1e-300),
            ]
            .into_iter()
            .fold(0.0_f64, f64::max);
            total += 1;
            if worst <= 3.0 {
                within += 1;
            }
        }
        report.push(CheckResult::new(
            &format!("{label}-oracle-agreement"),
            "fraction of checkpoints outside 3 standard errors of the analytic moments",
            "frequency-quadrature moment evolution",
            1.0 - within as f64 / total.max(1) as f64,
            0.2,
        ));
    }

    let mut f = create_out_file(&opts.out, "checks.json")?;
    report.write_json(&mut f)?;
    report.write_table(&mut std::io::stdout())?;
    Ok(report.all_pass())
}

fn uncertainty_product(stats: &EnsembleStats, k: usize) -> (f64, f64) {
    let product = stats.cov_xx[k] * stats.cov_pp[k] - stats.cov_xp[k] * stats.cov_xp[k];
    let se = ((stats.cov_pp[k] * stats.se_cov_xx[k]).powi(2)
        + (stats.cov_xx[k] * stats.se_cov_pp[k]).powi(2)
        + (2.0 * stats.cov_xp[k] * stats.se_cov_xp[k]).powi(2))
    .sqrt();
    (product, se)
}
