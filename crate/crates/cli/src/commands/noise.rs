//! `quasim noise`: one realization, ensemble PSD against the target
//! spectrum, autocorrelation against its cosine-transform, and pooled
//! Gaussianity statistics.

use super::{config_echo, create_out_file, header_meta, resolve_seed, write_meta, CommonOpts};
use crate::config::{bath_spec, sim_config, Config};
use crate::report::{CheckResult, Report};
use crate::CommandOutcome;
use quasim::bath::SpectralDensity;
use quasim::export;
use quasim::noise;
use quasim::quad::{self, QuadOptions};
use quasim::seed;

pub fn run(opts: &CommonOpts) -> CommandOutcome {
    let cfg = Config::load(&opts.config)?;
    let bath = bath_spec(&cfg, "bath")?;
    let (_, cfg_seed) = if cfg.has_section("simulation") {
        sim_config(&cfg)?
    } else {
        (Default::default(), None)
    };

    let dt = cfg.get_f64_or("noise", "dt", 0.1)?;
    let trace_len = cfg.get_usize_or("noise", "trace_len", 1 << 14)?;
    let n_traces = cfg.get_usize_or("noise", "n_traces", 40)?;
    let segment_len = cfg.get_usize_or("noise", "segment_len", 4096.min(trace_len))?;
    let max_lag = cfg.get_usize_or("noise", "max_lag", 50)?;
    let band = match &bath.spectral {
        SpectralDensity::Lorentzian {
            resonance, width, ..
        } => cfg.get_f64_list_or(
            "noise",
            "psd_band",
            &[(resonance - 3.0 * width).max(0.01), resonance + 3.0 * width],
        )?,
        _ => cfg.get_f64_list_or("noise", "psd_band", &[0.2, 0.8])?,
    };
    let psd_tol = cfg.get_f64_or("noise", "psd_tolerance", 0.05)?;
    let skew_tol = cfg.get_f64_or("noise", "skew_tolerance", 0.05)?;
    let kurt_tol = cfg.get_f64_or("noise", "kurtosis_tolerance", 0.1)?;
    let (master, drawn) = resolve_seed(opts.seed, cfg_seed);
    cfg.ensure_fully_consumed()?;

    let meta = header_meta(&config_echo(&cfg), master, drawn);

    // one realization
    let first = noise::synthesize_trace(&bath, dt, trace_len, seed::derive(master, seed::noise_stream(0), 0))?;
    for w in &first.warnings {
        eprintln!("warning: {w}");
    }
    let mut f = create_out_file(&opts.out, "trace.csv")?;
    write_meta(&mut f, &meta)?;
    export::write_trace(&mut f, &first)?;

    // ensemble of traces for spectral and moment estimates
    let traces: Vec<noise::NoiseTrace> = (0..n_traces)
        .map(|k| {
            noise::synthesize_trace(
                &bath,
                dt,
                trace_len,
                seed::derive(master, seed::noise_stream(0), k as u64),
            )
        })
        .collect::<Result<_, _>>()?;

    let est = noise::estimate_psd(&traces, Some(segment_len))?;
    let mut f = create_out_file(&opts.out, "psd.csv")?;
    write_meta(&mut f, &meta)?;
    export::write_psd(&mut f, &est, &bath)?;

    // mean autocorrelation over the ensemble, with its spread
    let acfs: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| noise::autocorrelation(t, max_lag))
        .collect::<Result<_, _>>()?;
    let n = acfs.len() as f64;
    let acf_mean: Vec<f64> = (0..=max_lag)
        .map(|l| acfs.iter().map(|a| a[l]).sum::<f64>() / n)
        .collect();
    let acf_se: Vec<f64> = (0..=max_lag)
        .map(|l| {
            let m = acf_mean[l];
            let var = acfs.iter().map(|a| (a[l] - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (var / n).sqrt()
        })
        .collect();
    let quad_opts = QuadOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        max_intervals: 20_000,
    };
    let acf_target: Vec<f64> = (0..=max_lag)
        .map(|l| {
            let tau = l as f64 * dt;
            quad::integrate_half_line(
                |w| {
                    bath.spectral.over_omega(w).unwrap_or(0.0)
                        * bath.kind.spectrum(w, bath.temperature).unwrap_or(0.0)
                        * (w * tau).cos()
                },
                &[bath.spectral.frequency_scale()],
                8.0 * bath.spectral.frequency_scale().max(1.0),
                &quad_opts,
            )
            .map(|q| q.value)
        })
        .collect::<Result<_, _>>()?;
    let mut f = create_out_file(&opts.out, "acf.csv")?;
    write_meta(&mut f, &meta)?;
    export::write_autocorrelation(&mut f, dt, &acf_mean, &acf_target)?;

    let gauss = noise::gaussianity_stats(&traces)?;

    // checks
    let mut report = Report::default();
    let zero_coupling = match &bath.spectral {
        SpectralDensity::Lorentzian { coupling, .. } => *coupling == 0.0,
        _ => false,
    };
    if zero_coupling || bath.force_psd(band[0])? == 0.0 {
        // a zero-power bath trivially passes: nothing to measure
        report.push(CheckResult::new(
            "psd-band",
            "zero-coupling bath produces a zero trace",
            "all-zero target spectrum",
            first.samples.iter().map(|s| s.abs()).sum(),
            1e-300,
        ));
    } else {
        let (mut est_sum, mut target_sum) = (0.0, 0.0);
        for (fq, p) in est.freq.iter().zip(&est.psd) {
            if *fq >= band[0] && *fq <= band[1] {
                est_sum += p;
                target_sum += bath.force_psd(*fq)?;
            }
        }
        report.push(CheckResult::new(
            "psd-band",
            "band-averaged periodogram against the target force spectrum",
            "pi J(w)/w N(w,T) on the periodogram grid",
            est_sum / target_sum - 1.0,
            psd_tol,
        ));
        for l in [0, max_lag / 2, max_lag] {
            report.push(CheckResult::new(
                &format!("acf-lag-{l}"),
                "ensemble autocorrelation at a fixed lag, in standard errors",
                "cosine transform of the force spectrum",
                (acf_mean[l] - acf_target[l]) / acf_se[l].max(1e-300),
                3.5,
            ));
        }
        report.push(CheckResult::new(
            "skewness",
            "pooled skewness of all samples",
            "Gaussian law (zero odd moments)",
            gauss.skewness.unwrap_or(0.0),
            skew_tol,
        ));
        report.push(CheckResult::new(
            "kurtosis",
            "pooled excess kurtosis of all samples",
            "Gaussian law (zero excess kurtosis)",
            gauss.excess_kurtosis.unwrap_or(0.0),
            kurt_tol,
        ));
    }

    let mut f = create_out_file(&opts.out, "checks.json")?;
    report.write_json(&mut f)?;
    report.write_table(&mut std::io::stdout())?;
    Ok(report.all_pass())
}
