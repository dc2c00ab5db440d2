//! Harmonic oscillator networks with independent baths at different
//! temperatures: steady-state covariance matrices, open-systems heat
//! currents, and trajectory-ensemble heat currents.
//!
//! The network state obeys `X' = M^-1 P`,
//! `P' = -Vbar X + int K(t-t') X dt' + F(t)` with a block kernel that acts
//! diagonally on the attached coordinates. In frequency space the stationary
//! covariance is
//!
//! ```text
//! C = (1/pi) int_0^inf  Re[ G(iw) S(w) G(iw)^H ] dw,
//! G(s) = (s I + [[0, -M^-1], [Vbar, 0]] - [[0,0],[Khat(s),0]])^-1,
//! ```
//!
//! with `S` carrying the per-bath force spectra `pi J_a(w)/w N(w, T_a)` on
//! the momentum block. Heat currents follow from the trace formula
//! `Qdot_a = tr[Pi_a Vbar C_xp M^-1]`; the stochastic route instead averages
//! `(F_a + u_a) . Xdot` along trajectories, reusing the engine's embedded
//! integrator and its deterministic seed layout (a one-oscillator network
//! reproduces the single-oscillator engine bit for bit).

use crate::bath::{BathSpec, SpectralDensity};
use crate::engine::accum::PairAccumulator;
use crate::engine::system::{LinearSystem, SlotParams};
use crate::engine::{self, EnsembleStats, SimConfig};
use crate::quad::{self, QuadOptions};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// One bath and the set of coordinates it drives.
///
/// Each attached coordinate receives an independent force realization with
/// the bath's spectrum (the kernel and spectral-density matrices of the
/// bath act diagonally on its coordinates).
#[derive(Debug, Clone)]
pub struct Attachment {
    pub oscillators: Vec<usize>,
    pub bath: BathSpec,
}

/// User-facing network description.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    /// Positive symmetric mass matrix.
    pub masses: DMatrix<f64>,
    /// Symmetric potential matrix (before counter-terms).
    pub potential: DMatrix<f64>,
    pub attachments: Vec<Attachment>,
    /// Apply the per-bath counter-term shift on attached diagonals.
    pub counter_term: bool,
}

/// Validated network with assembled matrices.
#[derive(Debug, Clone)]
pub struct Network {
    n: usize,
    m_inv: DMatrix<f64>,
    v_bar: DMatrix<f64>,
    attachments: Vec<Attachment>,
}

impl Network {
    pub fn n_oscillators(&self) -> usize {
        self.n
    }

    pub fn n_baths(&self) -> usize {
        self.attachments.len()
    }

    pub fn attachments(&self) -> &[Attachment] {
        &self.attachments
    }

    pub fn v_bar(&self) -> &DMatrix<f64> {
        &self.v_bar
    }

    pub fn m_inv(&self) -> &DMatrix<f64> {
        &self.m_inv
    }

    /// Normal-mode angular frequencies of the memoryless network.
    pub fn mode_frequencies(&self) -> Vec<f64> {
        // eigenvalues of M^-1 Vbar via the symmetric form L^-1 Vbar L^-T
        let m = self
            .m_inv
            .clone()
            .try_inverse()
            .expect("mass matrix was validated invertible");
        let chol = Cholesky::new(m).expect("mass matrix was validated positive definite");
        let l = chol.l();
        let a = l
            .solve_lower_triangular(&self.v_bar)
            .expect("triangular solve");
        let b = l
            .solve_lower_triangular(&a.transpose())
            .expect("triangular solve");
        let sym = 0.5 * (&b + b.transpose());
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .map(|&e| e.max(0.0).sqrt())
            .collect()
    }

    fn max_angular_frequency(&self) -> f64 {
        let modes = self.mode_frequencies().into_iter().fold(0.0_f64, f64::max);
        self.attachments
            .iter()
            .map(|a| a.bath.spectral.frequency_scale())
            .fold(modes, f64::max)
    }

    /// Attachment slots in deterministic order: attachment-major, then the
    /// attachment's own coordinate order. Requires Lorentzian baths.
    fn slots(&self) -> Result<(Vec<SlotParams>, Vec<usize>)> {
        let mut slots = Vec::new();
        let mut bath_of_slot = Vec::new();
        for (alpha, att) in self.attachments.iter().enumerate() {
            let (coupling, resonance, width) = match &att.bath.spectral {
                SpectralDensity::Lorentzian {
                    coupling,
                    resonance,
                    width,
                } => (*coupling, *resonance, *width),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "network trajectories need Lorentzian baths, got {}",
                        other.describe()
                    )))
                }
            };
            for &coord in &att.oscillators {
                slots.push(SlotParams {
                    coord,
                    coupling_sq: coupling * coupling,
                    omega0_sq: resonance * resonance,
                    width,
                });
                bath_of_slot.push(alpha);
            }
        }
        Ok((slots, bath_of_slot))
    }
}

fn check_symmetric(name: &str, a: &DMatrix<f64>) -> Result<()> {
    let scale = a.amax().max(1e-300);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::InvalidParameter(format!(
                    "{name} matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Validate a network description and assemble `Vbar` and `M^-1`.
pub fn build_network(spec: &NetworkSpec) -> Result<Network> {
    let n = spec.masses.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("empty network".into()));
    }
    if spec.masses.ncols() != n || spec.potential.nrows() != n || spec.potential.ncols() != n {
        return Err(Error::InvalidParameter(
            "mass and potential matrices must be square and same-sized".into(),
        ));
    }
    check_symmetric("mass", &spec.masses)?;
    check_symmetric("potential", &spec.potential)?;
    if Cholesky::new(spec.masses.clone()).is_none() {
        return Err(Error::InvalidParameter(
            "mass matrix must be positive definite".into(),
        ));
    }

    let mut attached = vec![false; n];
    for att in &spec.attachments {
        if att.oscillators.is_empty() {
            return Err(Error::InvalidParameter(
                "attachment with no oscillators".into(),
            ));
        }
        for &i in &att.oscillators {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "attachment references oscillator {i} of {n}"
                )));
            }
            if attached[i] {
                return Err(Error::InvalidParameter(format!(
                    "oscillator {i} is attached to more than one bath"
                )));
            }
            attached[i] = true;
        }
    }

    let mut v_bar = spec.potential.clone();
    if spec.counter_term {
        for att in &spec.attachments {
            let shift = att.bath.spectral.renormalization_shift();
            for &i in &att.oscillators {
                v_bar[(i, i)] += shift;
            }
        }
    }
    if Cholesky::new(v_bar.clone()).is_none() {
        return Err(Error::Unstable(
            "effective potential (with counter-terms) is not positive definite".into(),
        ));
    }
    let m_inv = spec
        .masses
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("mass matrix is singular".into()))?;

    Ok(Network {
        n,
        m_inv,
        v_bar,
        attachments: spec.attachments.clone(),
    })
}

/// Stationary covariance blocks of a network.
#[derive(Debug, Clone)]
pub struct NetworkSteadyState {
    pub c_xx: DMatrix<f64>,
    pub c_xp: DMatrix<f64>,
    pub c_pp: DMatrix<f64>,
}

/// Steady-state covariance matrices by resolvent quadrature.
pub fn network_steady_covariances(net: &Network) -> Result<NetworkSteadyState> {
    let n = net.n;
    let dim = 2 * n;
    let d2 = dim * dim;

    let mut breaks = net.mode_frequencies();
    for att in &net.attachments {
        breaks.push(att.bath.spectral.frequency_scale());
        if let SpectralDensity::Lorentzian { resonance, .. } = att.bath.spectral {
            breaks.push(resonance);
        }
    }
    let cut = 4.0 * breaks.iter().cloned().fold(1.0_f64, f64::max);

    let integrand = |w: f64, out: &mut [f64]| {
        let mut a = DMatrix::<Complex64>::zeros(dim, dim);
        let iw = Complex64::new(0.0, w);
        for i in 0..n {
            a[(i, i)] = iw;
            a[(n + i, n + i)] = iw;
            for j in 0..n {
                a[(i, n + j)] = Complex64::new(-net.m_inv[(i, j)], 0.0);
                a[(n + i, j)] = Complex64::new(net.v_bar[(i, j)], 0.0);
            }
        }
        for att in &net.attachments {
            let k = att
                .bath
                .spectral
                .kernel_laplace(iw)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            for &c in &att.oscillators {
                a[(n + c, c)] -= k;
            }
        }
        // right half-columns of the resolvent: A X = [0; I]
        let mut rhs = DMatrix::<Complex64>::zeros(dim, n);
        for i in 0..n {
            rhs[(n + i, i)] = Complex64::new(1.0, 0.0);
        }
        let lu = a.lu();
        let x = match lu.solve(&rhs) {
            Some(x) => x,
            None => {
                out.fill(f64::NAN);
                return;
            }
        };
        // per-coordinate force spectra on the momentum block
        let mut psd = vec![0.0; n];
        for att in &net.attachments {
            for &c in &att.oscillators {
                psd[c] += att.bath.force_psd(w).unwrap_or(0.0);
            }
        }
        for r in 0..dim {
            for cidx in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += x[(r, k)] * psd[k] * x[(cidx, k)].conj();
                }
                out[r * dim + cidx] = acc.re;
            }
        }
    };

    let opts = QuadOptions {
        rel_tol: 1e-9,
        abs_tol: 1e-13,
        max_intervals: 40_000,
    };
    let segments = quad::split_segments(0.0, cut, &breaks);
    let (head, _) = quad::integrate_multi(integrand, d2, &segments, &opts)?;
    let (tail, _) = quad::integrate_multi(
        |u, out| {
            let wgt = 1.0 / ((1.0 - u) * (1.0 - u));
            integrand(cut + u / (1.0 - u), out);
            for v in out.iter_mut() {
                *v *= wgt;
            }
        },
        d2,
        &[(0.0, 1.0)],
        &opts,
    )?;

    let full = DMatrix::from_fn(dim, dim, |r, c| {
        (head[r * dim + c] + tail[r * dim + c]) / std::f64::consts::PI
    });
    if full.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unstable(
            "resolvent became singular on the frequency axis".into(),
        ));
    }
    Ok(NetworkSteadyState {
        c_xx: full.view((0, 0), (n, n)).into(),
        c_xp: full.view((0, n), (n, n)).into(),
        c_pp: full.view((n, n), (n, n)).into(),
    })
}

/// Steady heat currents from the trace formula
/// `Qdot_a = tr[Pi_a Vbar C_xp M^-1]` (positive into the network).
pub fn heat_currents_opensystems(net: &Network, steady: &NetworkSteadyState) -> Vec<f64> {
    let prod = &net.v_bar * &steady.c_xp * &net.m_inv;
    net.attachments
        .iter()
        .map(|att| att.oscillators.iter().map(|&i| prod[(i, i)]).sum())
        .collect()
}

/// Trajectory-ensemble output for a network.
#[derive(Debug, Clone)]
pub struct NetworkEnsemble {
    pub times: Vec<f64>,
    /// Per-coordinate moment series (same reduction as the scalar engine).
    pub coords: Vec<EnsembleStats>,
    /// Sample covariance matrices at every output time.
    pub c_xx: Vec<DMatrix<f64>>,
    pub c_xp: Vec<DMatrix<f64>>,
    pub c_pp: Vec<DMatrix<f64>>,
    /// `[bath][output index]` ensemble-mean heat current and standard error.
    pub currents_mean: Vec<Vec<f64>>,
    pub currents_se: Vec<Vec<f64>>,
    /// Per-bath steady current: window average with standard error.
    pub steady_currents: Vec<(f64, f64)>,
    pub n_traj: usize,
}

/// Integrate a trajectory ensemble for the network.
///
/// `cfg.initial` applies to every oscillator independently;
/// `window_fraction` is the trailing fraction of the run averaged for the
/// steady heat currents.
pub fn run_network_ensemble(
    net: &Network,
    cfg: &SimConfig,
    window_fraction: f64,
) -> Result<NetworkEnsemble> {
    cfg.validate(net.max_angular_frequency())?;
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "window fraction {window_fraction} must lie in (0, 1]"
        )));
    }
    let (slots, bath_of_slot) = net.slots()?;
    let sys = LinearSystem {
        n: net.n,
        m_inv: net.m_inv.transpose().as_slice().to_vec(), // row-major
        v_bar: net.v_bar.transpose().as_slice().to_vec(),
        slots,
    };
    let out_steps = cfg.output_steps();
    let n_steps = cfg.n_steps();
    let setup = engine::EnsembleSetup {
        system: &sys,
        baths: net.attachments.iter().map(|a| a.bath.clone()).collect(),
        bath_of_slot,
        n_baths: net.attachments.len(),
        dt: cfg.dt,
        n_steps,
        out_steps: &out_steps,
        master_seed: cfg.master_seed,
        n_traj: cfg.n_traj,
        initial: cfg.initial,
        window_start: ((n_steps as f64) * (1.0 - window_fraction)) as usize,
    };
    let raw = engine::run_system_ensemble(&setup)?;

    let times: Vec<f64> = out_steps.iter().map(|&s| s as f64 * cfg.dt).collect();
    let coords: Vec<EnsembleStats> = raw
        .pairs
        .iter()
        .map(|accs| stats_from_accs(accs, &times, cfg.n_traj))
        .collect();

    let n = net.n;
    let nf = cfg.n_traj as f64;
    let bessel = if cfg.n_traj > 1 { nf / (nf - 1.0) } else { 0.0 };
    let mean_x: Vec<Vec<f64>> = coords.iter().map(|c| c.mean_x.clone()).collect();
    let mean_p: Vec<Vec<f64>> = coords.iter().map(|c| c.mean_p.clone()).collect();
    let cov = |sums: &[Vec<f64>], ma: &[Vec<f64>], mb: &[Vec<f64>]| -> Vec<DMatrix<f64>> {
        sums.iter()
            .enumerate()
            .map(|(k, flat)| {
                DMatrix::from_fn(n, n, |i, j| {
                    (flat[i * n + j] / nf - ma[i][k] * mb[j][k]) * bessel
                })
            })
            .collect()
    };

    Ok(NetworkEnsemble {
        c_xx: cov(&raw.cross_xx, &mean_x, &mean_x),
        c_xp: cov(&raw.cross_xp, &mean_x, &mean_p),
        c_pp: cov(&raw.cross_pp, &mean_p, &mean_p),
        coords,
        currents_mean: raw
            .currents
            .iter()
            .map(|row| row.iter().map(|a| a.mean()).collect())
            .collect(),
        currents_se: raw
            .currents
            .iter()
            .map(|row| row.iter().map(|a| a.standard_error()).collect())
            .collect(),
        steady_currents: raw
            .steady_currents
            .iter()
            .map(|a| (a.mean(), a.standard_error()))
            .collect(),
        times,
        n_traj: cfg.n_traj,
    })
}

fn stats_from_accs(accs: &[PairAccumulator], times: &[f64], n_traj: usize) -> EnsembleStats {
    let mut st = EnsembleStats {
        times: times.to_vec(),
        mean_x: Vec::new(),
        mean_p: Vec::new(),
        cov_xx: Vec::new(),
        cov_xp: Vec::new(),
        cov_pp: Vec::new(),
        se_mean_x: Vec::new(),
        se_mean_p: Vec::new(),
        se_cov_xx: Vec::new(),
        se_cov_xp: Vec::new(),
        se_cov_pp: Vec::new(),
        n_traj,
        degenerate: n_traj < 2,
    };
    for acc in accs {
        let s = acc.summary();
        st.mean_x.push(s.mean_x);
        st.mean_p.push(s.mean_p);
        st.cov_xx.push(s.cov_xx);
        st.cov_xp.push(s.cov_xp);
        st.cov_pp.push(s.cov_pp);
        st.se_mean_x.push(s.se_mean_x);
        st.se_mean_p.push(s.se_mean_p);
        st.se_cov_xx.push(s.se_cov_xx);
        st.se_cov_xp.push(s.se_cov_xp);
        st.se_cov_pp.push(s.se_cov_pp);
    }
    st
}

/// Two identical oscillators with nearest-neighbour spring coupling
/// `kappa`, one bath each; the standard two-terminal transport setup.
pub fn two_oscillator_chain(
    mass: f64,
    frequency: f64,
    kappa: f64,
    bath_hot: BathSpec,
    bath_cold: BathSpec,
    counter_term: bool,
) -> NetworkSpec {
    let m_om2 = mass * frequency * frequency;
    NetworkSpec {
        masses: DMatrix::from_diagonal_element(2, 2, mass),
        potential: DMatrix::from_row_slice(2, 2, &[m_om2, -kappa, -kappa, m_om2]),
        attachments: vec![
            Attachment {
                oscillators: vec![0],
                bath: bath_hot,
            },
            Attachment {
                oscillators: vec![1],
                bath: bath_cold,
            },
        ],
        counter_term,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::NoiseKind;
    use approx::assert_relative_eq;

    fn lor(coupling: f64) -> SpectralDensity {
        SpectralDensity::lorentzian(coupling, 0.5, 0.8).unwrap()
    }

    fn bath(t: f64) -> BathSpec {
        BathSpec::new(lor(0.3), t, NoiseKind::Quantum).unwrap()
    }

    #[test]
    fn validation_rejects_bad_networks() {
        let good = two_oscillator_chain(1.0, 1.0, 0.1, bath(1.0), bath(0.1), true);
        assert!(build_network(&good).is_ok());

        let mut bad = good.clone();
        bad.potential[(0, 1)] = 0.3; // asymmetric
        assert!(build_network(&bad).is_err());

        let mut bad = good.clone();
        bad.potential = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!(build_network(&bad).is_err());

        let mut bad = good.clone();
        bad.attachments[1].oscillators = vec![0]; // overlap
        assert!(build_network(&bad).is_err());

        let mut bad = good.clone();
        bad.attachments[1].oscillators = vec![7]; // out of range
        assert!(build_network(&bad).is_err());

        let mut bad = good;
        bad.masses[(0, 0)] = -1.0;
        assert!(build_network(&bad).is_err());
    }

    #[test]
    fn fig4_network_is_stable() {
        let spec = two_oscillator_chain(1.0, 1.0, 0.1, bath(1.0), bath(0.1), true);
        let net = build_network(&spec).unwrap();
        assert_eq!(net.n_oscillators(), 2);
        let modes = net.mode_frequencies();
        assert!(modes.iter().all(|&f| f > 0.0));
    }

    #[test]
    fn counter_term_shifts_diagonal() {
        let spec = two_oscillator_chain(1.0, 1.0, 0.1, bath(1.0), bath(0.1), true);
        let net = build_network(&spec).unwrap();
        // shift = coupling^2 / resonance^2 = 0.09/0.25
        assert_relative_eq!(net.v_bar()[(0, 0)], 1.0 + 0.36, max_relative = 1e-14);
        assert_relative_eq!(net.v_bar()[(0, 1)], -0.1, max_relative = 1e-14);
    }

    #[test]
    fn equal_temperature_covariance_is_swap_symmetric() {
        let spec = two_oscillator_chain(1.0, 1.0, 0.1, bath(0.5), bath(0.5), true);
        let net = build_network(&spec).unwrap();
        let ss = network_steady_covariances(&net).unwrap();
        assert_relative_eq!(ss.c_xx[(0, 0)], ss.c_xx[(1, 1)], max_relative = 1e-9);
        assert_relative_eq!(ss.c_pp[(0, 0)], ss.c_pp[(1, 1)], max_relative = 1e-9);
        // no gradient, no current
        let q = heat_currents_opensystems(&net, &ss);
        assert!(q[0].abs() < 1e-10 && q[1].abs() < 1e-10, "{q:?}");
        // stationarity kills the diagonal of C_xp
        assert!(ss.c_xp[(0, 0)].abs() < 1e-10);
        assert!(ss.c_xp[(1, 1)].abs() < 1e-10);
    }

    #[test]
    fn hot_bath_pushes_heat_into_the_network() {
        let spec = two_oscillator_chain(1.0, 1.0, 0.1, bath(1.0), bath(0.1), true);
        let net = build_network(&spec).unwrap();
        let ss = network_steady_covariances(&net).unwrap();
        let q = heat_currents_opensystems(&net, &ss);
        assert!(q[0] > 0.0, "hot current {q:?}");
        assert_relative_eq!(q[0], -q[1], max_relative = 1e-6);
        // swapping the baths negates both currents
        let swapped = two_oscillator_chain(1.0, 1.0, 0.1, bath(0.1), bath(1.0), true);
        let net2 = build_network(&swapped).unwrap();
        let q2 = heat_currents_opensystems(&net2, &network_steady_covariances(&net2).unwrap());
        assert_relative_eq!(q2[0], q[1], max_relative = 1e-6);
        assert_relative_eq!(q2[1], q[0], max_relative = 1e-6);
    }

    #[test]
    fn classical_currents_are_linear_in_temperature() {
        let mk = |th: f64, tc: f64| {
            let b = |t| BathSpec::new(lor(0.3), t, NoiseKind::Classical).unwrap();
            let net = build_network(&two_oscillator_chain(1.0, 1.0, 0.1, b(th), b(tc), true))
                .unwrap();
            heat_currents_opensystems(&net, &network_steady_covariances(&net).unwrap())
        };
        let q1 = mk(1.0, 0.1);
        let q2 = mk(2.0, 0.2);
        assert_relative_eq!(q2[0], 2.0 * q1[0], max_relative = 1e-6);
        assert_relative_eq!(q2[1], 2.0 * q1[1], max_relative = 1e-6);
    }
}
