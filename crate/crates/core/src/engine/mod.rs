//! Trajectory integration of the memory Langevin equation and ensemble
//! reduction to moment time series.
//!
//! Each trajectory is an independent work item: its noise trace and its
//! initial condition come from RNG substreams derived from the master seed
//! and the trajectory index, so ensembles are reproducible bit-for-bit
//! regardless of execution order or thread count. Trajectories are
//! integrated with the Markovian embedding of the Lorentzian kernel
//! (see [`system`]); a direct-convolution integrator with a trapezoid
//! memory sum is kept as a slower cross-check.

pub(crate) mod accum;
pub(crate) mod system;

use crate::bath::{BathSpec, OscillatorParams, SpectralDensity};
use crate::noise;
use crate::seed;
use crate::{Error, Result};
use accum::{tree_merge, Mergeable, PairAccumulator, ScalarAccumulator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use system::{LinearSystem, Rk4Workspace, SlotParams};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which trajectory integrator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Markovian embedding + RK4; the default.
    Embedded,
    /// Direct trapezoid evaluation of the memory integral (quadratic cost);
    /// second-order accurate, retained as an independent cross-check.
    Convolution,
}

/// Gaussian initial phase-space distribution, uncorrelated with the bath.
#[derive(Debug, Clone, Copy)]
pub struct InitialState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub cov_xx: f64,
    pub cov_xp: f64,
    pub cov_pp: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            mean_x: 0.0,
            mean_p: 0.0,
            cov_xx: 0.5,
            cov_xp: 0.0,
            cov_pp: 0.5,
        }
    }
}

impl InitialState {
    pub fn validate(&self) -> Result<()> {
        let scale = self.cov_xx.abs().max(self.cov_pp.abs()).max(1e-300);
        if self.cov_xx < 0.0
            || self.cov_pp < 0.0
            || self.cov_xx * self.cov_pp - self.cov_xp * self.cov_xp < -1e-12 * scale * scale
        {
            return Err(Error::InvalidConfig(format!(
                "initial covariance matrix [[{}, {}], [{}, {}]] is not positive semidefinite",
                self.cov_xx, self.cov_xp, self.cov_xp, self.cov_pp
            )));
        }
        Ok(())
    }

    /// Cholesky factors for sampling; degenerate directions collapse to zero.
    fn cholesky(&self) -> (f64, f64, f64) {
        let a = self.cov_xx.max(0.0).sqrt();
        let b = if a > 0.0 { self.cov_xp / a } else { 0.0 };
        let c = (self.cov_pp - b * b).max(0.0).sqrt();
        (a, b, c)
    }

    /// Draw `(x0, p0)`; always consumes exactly two normals.
    fn sample(&self, rng: &mut ChaCha12Rng) -> (f64, f64) {
        let (a, b, c) = self.cholesky();
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (self.mean_x + a * z1, self.mean_p + b * z1 + c * z2)
    }
}

/// Full configuration of a stochastic run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub n_traj: usize,
    pub master_seed: u64,
    pub initial: InitialState,
    pub integrator: Integrator,
    /// Output stride: statistics are recorded every this many steps.
    pub sample_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.05,
            t_final: 100.0,
            n_traj: 1000,
            master_seed: 1,
            initial: InitialState::default(),
            integrator: Integrator::Embedded,
            sample_every: 10,
        }
    }
}

impl SimConfig {
    /// Validate against the fastest angular frequency in the problem.
    pub fn validate(&self, max_angular_frequency: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::InvalidConfig(format!(
                "t_final = {} must be at least one step dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidConfig("n_traj must be >= 1".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample_every must be >= 1".into()));
        }
        self.initial.validate()?;
        let dt_max = 0.1 * 2.0 * std::f64::consts::PI / max_angular_frequency;
        if self.dt > dt_max {
            return Err(Error::InvalidConfig(format!(
                "dt = {} cannot resolve the fastest frequency {:.4}; use dt <= {:.4}",
                self.dt, max_angular_frequency, dt_max
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Step indices at which output is recorded (always includes both ends).
    pub fn output_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut steps: Vec<usize> = (0..=n).step_by(self.sample_every).collect();
        if *steps.last().unwrap() != n {
            steps.push(n);
        }
        steps
    }
}

/// Ensemble moment time series with standard errors.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub cov_xx: Vec<f64>,
    pub cov_xp: Vec<f64>,
    pub cov_pp: Vec<f64>,
    pub se_mean_x: Vec<f64>,
    pub se_mean_p: Vec<f64>,
    pub se_cov_xx: Vec<f64>,
    pub se_cov_xp: Vec<f64>,
    pub se_cov_pp: Vec<f64>,
    pub n_traj: usize,
    /// Set when the ensemble is too small to estimate covariances.
    pub degenerate: bool,
}

/// One sampled trajectory of the single-oscillator problem.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Sampled stochastic force on the step grid.
    pub force: Vec<f64>,
    /// Memory term `u(t) = int_0^t K(t-t') x(t') dt'` along the trajectory.
    pub memory: Vec<f64>,
    pub mass: f64,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        (0..self.x.len()).map(|k| k as f64 * self.dt).collect()
    }
}

/// Build the embedded ODE for a single oscillator against a Lorentzian bath:
/// `x' = p/m`, `p' = -m Obar^2 x + u + F(t)`,
/// `u'' + width u' + w0^2 u = coupling^2 x`, `u(0) = u'(0) = 0`.
pub fn build_embedding(params: &OscillatorParams, j: &SpectralDensity) -> Result<LinearSystem> {
    params.validate()?;
    let (coupling, resonance, width) = match j {
        SpectralDensity::Lorentzian {
            coupling,
            resonance,
            width,
        } => (*coupling, *resonance, *width),
        other => {
            return Err(Error::InvalidParameter(format!(
                "the embedded integrator needs a Lorentzian spectral density, got {}; \
                 use the convolution integrator instead",
                other.describe()
            )))
        }
    };
    let obar2 = params.renormalized_frequency_sq(j);
    Ok(LinearSystem {
        n: 1,
        m_inv: vec![1.0 / params.mass],
        v_bar: vec![params.mass * obar2],
        slots: vec![SlotParams {
            coord: 0,
            coupling_sq: coupling * coupling,
            omega0_sq: resonance * resonance,
            width,
        }],
    })
}

fn max_angular_frequency(params: &OscillatorParams, bath: &BathSpec) -> f64 {
    params
        .renormalized_frequency_sq(&bath.spectral)
        .sqrt()
        .max(bath.spectral.frequency_scale())
}

/// Integrate a single trajectory and record everything on the step grid.
pub fn integrate_trajectory(
    cfg: &SimConfig,
    params: &OscillatorParams,
    bath: &BathSpec,
    traj_index: u64,
) -> Result<TrajectoryRecord> {
    cfg.validate(max_angular_frequency(params, bath))?;
    let n_steps = cfg.n_steps();
    let trace = noise::synthesize_trace(
        bath,
        cfg.dt,
        n_steps + 1,
        seed::derive(cfg.master_seed, seed::noise_stream(0), traj_index),
    )?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(
        cfg.master_seed,
        seed::initial_stream(0),
        traj_index,
    ));
    let (x0, p0) = cfg.initial.sample(&mut rng);

    match cfg.integrator {
        Integrator::Embedded => {
            let sys = build_embedding(params, &bath.spectral)?;
            let mut ws = Rk4Workspace::new(&sys);
            let mut state = vec![x0, p0, 0.0, 0.0];
            let mut rec = TrajectoryRecord {
                dt: cfg.dt,
                x: Vec::with_capacity(n_steps + 1),
                p: Vec::with_capacity(n_steps + 1),
                force: trace.samples.clone(),
                memory: Vec::with_capacity(n_steps + 1),
                mass: params.mass,
            };
            system::integrate_rk4(
                &sys,
                &mut ws,
                &mut state,
                std::slice::from_ref(&trace.samples),
                cfg.dt,
                n_steps,
                |_, s, _| {
                    rec.x.push(s[0]);
                    rec.p.push(s[1]);
                    rec.memory.push(s[2]);
                },
            );
            Ok(rec)
        }
        Integrator::Convolution => {
            integrate_convolution(cfg, params, bath, &trace.samples, x0, p0)
        }
    }
}

/// Heun scheme with the memory integral evaluated as a trapezoid sum over
/// the stored position history (`K(0) = 0` keeps it explicit).
fn integrate_convolution(
    cfg: &SimConfig,
    params: &OscillatorParams,
    bath: &BathSpec,
    force: &[f64],
    x0: f64,
    p0: f64,
) -> Result<TrajectoryRecord> {
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;
    let m = params.mass;
    let obar2 = params.renormalized_frequency_sq(&bath.spectral);
    let kernel: Vec<f64> = (0..=n_steps)
        .map(|j| bath.spectral.memory_kernel(j as f64 * dt))
        .collect::<Result<_>>()?;

    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut ps = Vec::with_capacity(n_steps + 1);
    let mut us = Vec::with_capacity(n_steps + 1);
    xs.push(x0);
    ps.push(p0);
    us.push(0.0);

    // trapezoid memory sum; K(0) = 0 drops the current-step term, so the
    // scheme stays explicit
    let memory_at = |step: usize, xs: &[f64]| -> f64 {
        if step == 0 {
            return 0.0;
        }
        let mut acc = 0.5 * kernel[step] * xs[0];
        for j in 1..step {
            acc += kernel[step - j] * xs[j];
        }
        acc * dt
    };

    for k in 0..n_steps {
        let (x, p, u) = (xs[k], ps[k], us[k]);
        let dx1 = p / m;
        let dp1 = -m * obar2 * x + u + force[k];
        let x_pred = x + dt * dx1;
        let p_pred = p + dt * dp1;
        let u_next = memory_at(k + 1, &xs);
        let dx2 = p_pred / m;
        let dp2 = -m * obar2 * x_pred + u_next + force[k + 1];
        xs.push(x + 0.5 * dt * (dx1 + dx2));
        ps.push(p + 0.5 * dt * (dp1 + dp2));
        us.push(u_next);
    }

    Ok(TrajectoryRecord {
        dt,
        x: xs,
        p: ps,
        force: force.to_vec(),
        memory: us,
        mass: m,
    })
}

// ---------------------------------------------------------------------------
// generic ensemble runner, shared with the network module
// ---------------------------------------------------------------------------

/// Per-ensemble description handed to the shared runner.
pub(crate) struct EnsembleSetup<'a> {
    pub system: &'a LinearSystem,
    pub baths: Vec<BathSpec>,
    /// Bath index of every attachment slot (several slots may share a bath).
    pub bath_of_slot: Vec<usize>,
    pub n_baths: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub out_steps: &'a [usize],
    pub master_seed: u64,
    pub n_traj: usize,
    pub initial: InitialState,
    /// First step of the steady-state averaging window for heat currents.
    pub window_start: usize,
}

/// Raw reduced ensemble: per-coordinate moment accumulators, cross-moment
/// sums, and per-bath heat-current statistics.
pub(crate) struct RawEnsemble {
    /// `[coord][output index]`
    pub pairs: Vec<Vec<PairAccumulator>>,
    /// `[bath][output index]` instantaneous heat current
    pub currents: Vec<Vec<ScalarAccumulator>>,
    /// `[bath]` per-trajectory window-averaged currents
    pub steady_currents: Vec<ScalarAccumulator>,
    /// `[output index][i*n + j]` raw sums of `x_i x_j`, `x_i p_j`, `p_i p_j`
    pub cross_xx: Vec<Vec<f64>>,
    pub cross_xp: Vec<Vec<f64>>,
    pub cross_pp: Vec<Vec<f64>>,
}

impl RawEnsemble {
    fn new(n_coords: usize, n_out: usize, n_baths: usize, n2: usize) -> Self {
        RawEnsemble {
            pairs: vec![vec![PairAccumulator::default(); n_out]; n_coords],
            currents: vec![vec![ScalarAccumulator::default(); n_out]; n_baths],
            steady_currents: vec![ScalarAccumulator::default(); n_baths],
            cross_xx: vec![vec![0.0; n2]; n_out],
            cross_xp: vec![vec![0.0; n2]; n_out],
            cross_pp: vec![vec![0.0; n2]; n_out],
        }
    }
}

impl Mergeable for RawEnsemble {
    fn merge(&mut self, o: &Self) {
        for (a, b) in self.pairs.iter_mut().zip(&o.pairs) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (a, b) in self.currents.iter_mut().zip(&o.currents) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (x, y) in self.steady_currents.iter_mut().zip(&o.steady_currents) {
            x.merge(y);
        }
        for (a, b) in [
            (&mut self.cross_xx, &o.cross_xx),
            (&mut self.cross_xp, &o.cross_xp),
            (&mut self.cross_pp, &o.cross_pp),
        ] {
            for (row, orow) in a.iter_mut().zip(b) {
                for (v, w) in row.iter_mut().zip(orow) {
                    *v += w;
                }
            }
        }
    }
}

/// Trajectories per reduction chunk; fixed so the reduction tree (and with
/// it every last bit of the output) does not depend on the thread count.
const CHUNK: usize = 64;

pub(crate) fn run_system_ensemble(setup: &EnsembleSetup) -> Result<RawEnsemble> {
    let n_chunks = setup.n_traj.div_ceil(CHUNK);
    let run_chunk = |chunk: usize| -> Result<RawEnsemble> {
        let lo = chunk * CHUNK;
        let hi = ((chunk + 1) * CHUNK).min(setup.n_traj);
        let mut acc = RawEnsemble::new(
            setup.system.n,
            setup.out_steps.len(),
            setup.n_baths,
            setup.system.n * setup.system.n,
        );
        let mut ws = Rk4Workspace::new(setup.system);
        let mut state = vec![0.0; setup.system.state_len()];
        let mut noise_bufs: Vec<Vec<f64>> = Vec::new();
        for traj in lo..hi {
            run_one_trajectory(setup, traj as u64, &mut ws, &mut state, &mut noise_bufs, &mut acc)?;
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let chunks: Vec<RawEnsemble> = (0..n_chunks)
        .into_par_iter()
        .map(run_chunk)
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<RawEnsemble> = (0..n_chunks).map(run_chunk).collect::<Result<_>>()?;

    tree_merge(chunks).ok_or(Error::EmptyInput("ensemble with zero trajectories"))
}

fn run_one_trajectory(
    setup: &EnsembleSetup,
    traj: u64,
    ws: &mut Rk4Workspace,
    state: &mut [f64],
    noise_bufs: &mut Vec<Vec<f64>>,
    acc: &mut RawEnsemble,
) -> Result<()> {
    let n = setup.system.n;
    let n_slots = setup.system.slots.len();

    noise_bufs.clear();
    for slot in 0..n_slots {
        let bath = &setup.baths[setup.bath_of_slot[slot]];
        let trace = noise::synthesize_trace(
            bath,
            setup.dt,
            setup.n_steps + 1,
            seed::derive(setup.master_seed, seed::noise_stream(slot as u32), traj),
        )?;
        noise_bufs.push(trace.samples);
    }

    state.fill(0.0);
    for coord in 0..n {
        let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(
            setup.master_seed,
            seed::initial_stream(coord as u32),
            traj,
        ));
        let (x0, p0) = setup.initial.sample(&mut rng);
        state[coord] = x0;
        state[n + coord] = p0;
    }

    let mut out_ptr = 0usize;
    let mut window_sums = vec![0.0; setup.n_baths];
    let mut window_count = 0u64;
    let window_start = setup.window_start.min(setup.n_steps);
    let mut qdot = vec![0.0; setup.n_baths];

    system::integrate_rk4(
        setup.system,
        ws,
        state,
        noise_bufs,
        setup.dt,
        setup.n_steps,
        |step, s, forces| {
            // per-bath current: sum over its slots of (F + u) * xdot(coord)
            qdot.fill(0.0);
            for (slot_idx, slot) in setup.system.slots.iter().enumerate() {
                let mut xdot = 0.0;
                for j in 0..n {
                    xdot += setup.system.m_inv[slot.coord * n + j] * s[n + j];
                }
                let u = s[2 * n + slot_idx];
                qdot[setup.bath_of_slot[slot_idx]] += (forces[slot_idx] + u) * xdot;
            }
            if step >= window_start {
                for (wsum, q) in window_sums.iter_mut().zip(&*qdot) {
                    *wsum += q;
                }
                window_count += 1;
            }
            if out_ptr < setup.out_steps.len() && setup.out_steps[out_ptr] == step {
                for coord in 0..n {
                    acc.pairs[coord][out_ptr].push(s[coord], s[n + coord]);
                }
                for (b, q) in qdot.iter().enumerate() {
                    acc.currents[b][out_ptr].push(*q);
                }
                let xx = &mut acc.cross_xx[out_ptr];
                let xp = &mut acc.cross_xp[out_ptr];
                let pp = &mut acc.cross_pp[out_ptr];
                for i in 0..n {
                    for j in 0..n {
                        xx[i * n + j] += s[i] * s[j];
                        xp[i * n + j] += s[i] * s[n + j];
                        pp[i * n + j] += s[n + i] * s[n + j];
                    }
                }
                out_ptr += 1;
            }
        },
    );

    for (b, wsum) in window_sums.iter().enumerate() {
        acc.steady_currents[b].push(wsum / window_count.max(1) as f64);
    }
    Ok(())
}

/// Run an ensemble of single-oscillator trajectories and reduce to moments.
pub fn run_ensemble(
    cfg: &SimConfig,
    params: &OscillatorParams,
    bath: &BathSpec,
) -> Result<EnsembleStats> {
    cfg.validate(max_angular_frequency(params, bath))?;
    if cfg.integrator == Integrator::Convolution {
        return run_ensemble_convolution(cfg, params, bath);
    }
    let sys = build_embedding(params, &bath.spectral)?;
    let out_steps = cfg.output_steps();
    let setup = EnsembleSetup {
        system: &sys,
        baths: vec![bath.clone()],
        bath_of_slot: vec![0],
        n_baths: 1,
        dt: cfg.dt,
        n_steps: cfg.n_steps(),
        out_steps: &out_steps,
        master_seed: cfg.master_seed,
        n_traj: cfg.n_traj,
        initial: cfg.initial,
        window_start: (cfg.n_steps() * 3) / 4,
    };
    let raw = run_system_ensemble(&setup)?;
    Ok(stats_from_pairs(&raw.pairs[0], &out_steps, cfg))
}

/// Convolution-integrator ensemble; sequential, meant for cross-checks.
fn run_ensemble_convolution(
    cfg: &SimConfig,
    params: &OscillatorParams,
    bath: &BathSpec,
) -> Result<EnsembleStats> {
    let out_steps = cfg.output_steps();
    let mut pairs = vec![PairAccumulator::default(); out_steps.len()];
    for traj in 0..cfg.n_traj {
        let rec = integrate_trajectory(cfg, params, bath, traj as u64)?;
        for (k, &step) in out_steps.iter().enumerate() {
            pairs[k].push(rec.x[step], rec.p[step]);
        }
    }
    Ok(stats_from_pairs(&pairs, &out_steps, cfg))
}

fn stats_from_pairs(pairs: &[PairAccumulator], out_steps: &[usize], cfg: &SimConfig) -> EnsembleStats {
    let n_out = out_steps.len();
    let degenerate = pairs
        .first()
        .map(|p| p.summary().degenerate)
        .unwrap_or(true);
    let mut stats = EnsembleStats {
        times: out_steps.iter().map(|&s| s as f64 * cfg.dt).collect(),
        mean_x: Vec::with_capacity(n_out),
        mean_p: Vec::with_capacity(n_out),
        cov_xx: Vec::with_capacity(n_out),
        cov_xp: Vec::with_capacity(n_out),
        cov_pp: Vec::with_capacity(n_out),
        se_mean_x: Vec::with_capacity(n_out),
        se_mean_p: Vec::with_capacity(n_out),
        se_cov_xx: Vec::with_capacity(n_out),
        se_cov_xp: Vec::with_capacity(n_out),
        se_cov_pp: Vec::with_capacity(n_out),
        n_traj: cfg.n_traj,
        degenerate,
    };
    for acc in pairs {
        let s = acc.summary();
        debug_assert_eq!(s.n as usize, cfg.n_traj);
        stats.mean_x.push(s.mean_x);
        stats.mean_p.push(s.mean_p);
        stats.cov_xx.push(s.cov_xx);
        stats.cov_xp.push(s.cov_xp);
        stats.cov_pp.push(s.cov_pp);
        stats.se_mean_x.push(s.se_mean_x);
        stats.se_mean_p.push(s.se_mean_p);
        stats.se_cov_xx.push(s.se_cov_xx);
        stats.se_cov_xp.push(s.se_cov_xp);
        stats.se_cov_pp.push(s.se_cov_pp);
    }
    stats
}

/// Ensemble heat-current trace computed from explicit trajectory records.
#[derive(Debug, Clone)]
pub struct HeatCurrentTrace {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Time average over the trailing window, with the across-trajectory
    /// standard error of the per-trajectory window means.
    pub steady_value: f64,
    pub steady_se: f64,
    pub window_start_time: f64,
}

/// Heat current `Qdot(t) = <(F(t) + u(t)) xdot(t)>` from trajectory records.
///
/// `window_fraction` selects the trailing fraction of the run used for the
/// steady-state average; per-trajectory window means make the quoted error
/// bar insensitive to correlation along the trajectory.
pub fn heat_current_trace(
    records: &[TrajectoryRecord],
    window_fraction: f64,
) -> Result<HeatCurrentTrace> {
    let first = records.first().ok_or(Error::EmptyInput("heat_current_trace"))?;
    let n = first.x.len();
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "window fraction {window_fraction} must lie in (0, 1]"
        )));
    }
    if records.iter().any(|r| r.x.len() != n || r.dt != first.dt) {
        return Err(Error::InvalidParameter(
            "all records must share dt and length".into(),
        ));
    }
    let window_start = ((n as f64) * (1.0 - window_fraction)) as usize;
    let mut per_time = vec![ScalarAccumulator::default(); n];
    let mut windows = ScalarAccumulator::default();
    for rec in records {
        let mut wsum = 0.0;
        let mut wcount = 0u64;
        for k in 0..n {
            let q = (rec.force[k] + rec.memory[k]) * rec.p[k] / rec.mass;
            per_time[k].push(q);
            if k >= window_start {
                wsum += q;
                wcount += 1;
            }
        }
        windows.push(wsum / wcount.max(1) as f64);
    }
    Ok(HeatCurrentTrace {
        times: first.times(),
        mean: per_time.iter().map(|a| a.mean()).collect(),
        se: per_time.iter().map(|a| a.standard_error()).collect(),
        steady_value: windows.mean(),
        steady_se: windows.standard_error(),
        window_start_time: window_start as f64 * first.dt,
    })
}
