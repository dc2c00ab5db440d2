//! `quasim network`: heat-current sweeps over a two-bath oscillator
//! network, comparing the trace-formula route with trajectory ensembles.

use super::{config_echo, create_out_file, header_meta, resolve_seed, write_meta, CommonOpts};
use crate::config::{bath_spec, sim_config, Config};
use crate::report::{CheckResult, Report};
use crate::CommandOutcome;
use nalgebra::DMatrix;
use quasim::bath::BathSpec;
use quasim::export;
use quasim::network::{self, Attachment, NetworkSpec};

fn parse_matrix(cfg: &Config, key: &str, n: usize) -> Result<DMatrix<f64>, crate::CliError> {
    let flat = cfg.get_f64_list("network", key)?;
    if flat.len() != n * n {
        return Err(crate::CliError(format!(
            "[network] {key} needs {} entries (row-major), got {}",
            n * n,
            flat.len()
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

pub fn run(opts: &CommonOpts) -> CommandOutcome {
    let cfg = Config::load(&opts.config)?;
    let n_osc = cfg.get_usize_or("network", "n_osc", 2)?;
    let masses = parse_matrix(&cfg, "masses", n_osc)?;
    let potential = parse_matrix(&cfg, "potential", n_osc)?;
    let counter_term = cfg.get_bool_or("network", "counter_term", true)?;

    let mut attachments = Vec::new();
    let mut idx = 1;
    while cfg.has_section(&format!("bath.{idx}")) {
        let section = format!("bath.{idx}");
        let bath = bath_spec(&cfg, &section)?;
        let oscillators = cfg.get_usize_list(&section, "attach")?;
        attachments.push(Attachment { oscillators, bath });
        idx += 1;
    }
    if attachments.is_empty() || attachments.len() > 2 {
        return Err(crate::CliError(format!(
            "network command expects one or two [bath.N] sections, found {}",
            attachments.len()
        )));
    }

    let (mut sim, cfg_seed) = sim_config(&cfg)?;
    let (master, drawn) = resolve_seed(opts.seed, cfg_seed);
    sim.master_seed = master;
    if let Some(n) = opts.traj {
        sim.n_traj = n;
    }
    let window = cfg.get_f64_or("simulation", "window_fraction", 0.25)?;

    // sweep: cold-bath temperatures with a fixed hot/cold ratio; without a
    // sweep section the configured temperatures run as a single point
    let (t_cold_list, ratio) = if cfg.has_section("sweep") {
        (
            cfg.get_f64_list("sweep", "t_cold")?,
            cfg.get_f64_or("sweep", "hot_over_cold", 10.0)?,
        )
    } else {
        (vec![f64::NAN], f64::NAN)
    };
    cfg.ensure_fully_consumed()?;
    let meta = header_meta(&config_echo(&cfg), master, drawn);

    let mut report = Report::default();
    let mut rows: Vec<(f64, f64, f64, f64, f64, &str)> = Vec::new();
    for &t_cold in &t_cold_list {
        let mut atts = attachments.clone();
        let t_label = if t_cold.is_nan() {
            atts.last().unwrap().bath.temperature
        } else {
            if atts.len() != 2 {
                return Err(crate::CliError(
                    "temperature sweeps need exactly two baths".into(),
                ));
            }
            atts[0].bath = BathSpec::new(
                atts[0].bath.spectral.clone(),
                ratio * t_cold,
                atts[0].bath.kind,
            )?;
            atts[1].bath =
                BathSpec::new(atts[1].bath.spectral.clone(), t_cold, atts[1].bath.kind)?;
            t_cold
        };

        let spec = NetworkSpec {
            masses: masses.clone(),
            potential: potential.clone(),
            attachments: atts,
            counter_term,
        };
        let net = network::build_network(&spec)?;
        let steady = network::network_steady_covariances(&net)?;
        let q_open = network::heat_currents_opensystems(&net, &steady);
        let out = network::run_network_ensemble(&net, &sim, window)?;

        let (qh_o, qc_o) = (q_open[0], *q_open.get(1).unwrap_or(&0.0));
        let (qh, seh) = out.steady_currents[0];
        let (qc, sec) = out
            .steady_currents
            .get(1)
            .copied()
            .unwrap_or((0.0, 0.0));
        rows.push((t_label, qh_o, qc_o, 0.0, 0.0, "open_systems"));
        rows.push((t_label, qh, qc, seh, sec, "stochastic"));

        report.push(CheckResult::new(
            &format!("current-hot[T={t_label}]"),
            "stochastic hot-bath current against the trace formula, in standard errors",
            "steady-covariance trace formula",
            (qh - qh_o) / seh.max(1e-300),
            3.0,
        ));
        if out.steady_currents.len() > 1 {
            report.push(CheckResult::new(
                &format!("current-cold[T={t_label}]"),
                "stochastic cold-bath current against the trace formula, in standard errors",
                "steady-covariance trace formula",
                (qc - qc_o) / sec.max(1e-300),
                3.0,
            ));
            let balance_limit =
                (3.0 * (seh * seh + sec * sec).sqrt()).max(1e-3 * qh.abs()).max(1e-300);
            report.push(CheckResult::new(
                &format!("energy-balance[T={t_label}]"),
                "sum of steady currents relative to its allowance",
                "stationarity of the network energy",
                (qh + qc) / balance_limit,
                1.0,
            ));
            let hot_temp = ratio.is_nan() || ratio > 1.0;
            if hot_temp && !t_cold.is_nan() {
                report.push(CheckResult::new(
                    &format!("second-law[T={t_label}]"),
                    "sign of the hot-bath current (positive = into the network)",
                    "heat flows from hot to cold",
                    if qh > 0.0 { 0.0 } else { 1.0 },
                    0.5,
                ));
            }
        } else {
            // a single bath equilibrates: no net current
            report.push(CheckResult::new(
                &format!("equilibrium[T={t_label}]"),
                "single-bath steady current, in standard errors",
                "equilibrium exchanges no net heat",
                qh / seh.max(1e-300),
                3.5,
            ));
        }
    }

    let mut f = create_out_file(&opts.out, "heat_currents.csv")?;
    write_meta(&mut f, &meta)?;
    export::write_network_sweep(&mut f, &rows)?;

    let mut f = create_out_file(&opts.out, "checks.json")?;
    report.write_json(&mut f)?;
    report.write_table(&mut std::io::stdout())?;
    Ok(report.all_pass())
}
