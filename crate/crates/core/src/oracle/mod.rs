//! Analytic ground truth: dynamical moments, steady-state covariances,
//! Gibbs and mean-force covariances, computed without any stochastic
//! sampling.
//!
//! For a Lorentzian spectral density the kernel Laplace transform is
//! rational, so the response functions
//!
//! ```text
//! g2(t) = L^-1[ 1 / (m (s^2 + Obar^2) - Khat(s)) ],   g1 = m g2',  g3 = m g1'
//! ```
//!
//! are pole sums over the quartic `m (s^2 + Obar^2)(s^2 + width s + w0^2) =
//! coupling^2`. Means propagate through `g1, g2, g3`; covariances add a
//! frequency integral whose inner time integrals are closed-form pole
//! expressions. The steady state is reached by four mutually independent
//! routes (long-time quadrature, Matsubara summation, mean-force
//! principal-value integrals, and the exact classical formulas), which the
//! test suite plays against each other.

mod matsubara;

use crate::bath::{BathSpec, NoiseKind, OscillatorParams, SpectralDensity};
use crate::quad::{self, QuadOptions};
use crate::{Error, Result};
use num_complex::Complex64;

/// First and second moments of the oscillator state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub mu_x: f64,
    pub mu_p: f64,
    pub sigma_xx: f64,
    pub sigma_xp: f64,
    pub sigma_pp: f64,
}

/// Which route produced a steady-state result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    Quadrature,
    Matsubara,
    Gibbs,
    MeanForce,
    ClassicalExact,
}

impl SteadyMethod {
    pub fn label(self) -> &'static str {
        match self {
            SteadyMethod::Quadrature => "quadrature",
            SteadyMethod::Matsubara => "matsubara",
            SteadyMethod::Gibbs => "gibbs",
            SteadyMethod::MeanForce => "mean_force",
            SteadyMethod::ClassicalExact => "classical_exact",
        }
    }
}

/// Long-time covariances; `sigma_xp` vanishes identically in the steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCovariances {
    pub sigma_xx: f64,
    pub sigma_pp: f64,
    pub sigma_xp: f64,
    pub method: SteadyMethod,
}

/// Pole–residue representation of the response functions.
#[derive(Debug, Clone)]
pub struct GFunctions {
    poles: [Complex64; 4],
    residues: [Complex64; 4],
    mass: f64,
    omega_bar_sq: f64,
    kernel: (f64, f64, f64), // coupling, resonance, width
}

impl GFunctions {
    pub fn poles(&self) -> &[Complex64; 4] {
        &self.poles
    }

    pub fn residues(&self) -> &[Complex64; 4] {
        &self.residues
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega_bar_sq(&self) -> f64 {
        self.omega_bar_sq
    }

    /// All poles strictly in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.poles.iter().all(|p| p.re < 0.0)
    }

    /// `g1(t) = m g2'(t)`; propagates an initial position into a position.
    pub fn g1(&self, t: f64) -> f64 {
        self.mass
            * self
                .poles
                .iter()
                .zip(&self.residues)
                .map(|(p, r)| r * p * (p * t).exp())
                .sum::<Complex64>()
                .re
    }

    /// `g2(t)`; propagates an initial momentum into a position.
    pub fn g2(&self, t: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(p, r)| r * (p * t).exp())
            .sum::<Complex64>()
            .re
    }

    /// `g3(t) = m g1'(t)`; propagates an initial position into a momentum.
    pub fn g3(&self, t: f64) -> f64 {
        self.mass
            * self.mass
            * self
                .poles
                .iter()
                .zip(&self.residues)
                .map(|(p, r)| r * p * p * (p * t).exp())
                .sum::<Complex64>()
                .re
    }

    /// `g2hat(i w)` from the rational form.
    pub fn g2_hat_iw(&self, omega: f64) -> Complex64 {
        let (coupling, resonance, width) = self.kernel;
        let s = Complex64::new(0.0, omega);
        let k = coupling * coupling / (s * s + width * s + resonance * resonance);
        1.0 / (self.mass * (s * s + self.omega_bar_sq) - k)
    }

    /// Finite-time Fourier integrals of the response functions,
    /// `A2 = int_0^t g2(u) e^{-iwu} du` and `A1 = int_0^t g1(u) e^{-iwu} du`.
    fn finite_transforms(&self, t: f64, omega: f64) -> (Complex64, Complex64) {
        let iw = Complex64::new(0.0, omega);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut a1 = Complex64::new(0.0, 0.0);
        for (p, r) in self.poles.iter().zip(&self.residues) {
            let d = p - iw;
            let e = ((d * t).exp() - 1.0) / d;
            a2 += r * e;
            a1 += r * p * e;
        }
        (a2, a1 * self.mass)
    }
}

/// Build the pole–residue form of `g1, g2, g3` for a Lorentzian bath.
pub fn g_functions(params: &OscillatorParams, j: &SpectralDensity) -> Result<GFunctions> {
    params.validate()?;
    let (coupling, resonance, width) = match j {
        SpectralDensity::Lorentzian {
            coupling,
            resonance,
            width,
        } => (*coupling, *resonance, *width),
        other => {
            return Err(Error::InvalidParameter(format!(
                "response functions need a Lorentzian spectral density, got {}",
                other.describe()
            )))
        }
    };
    let m = params.mass;
    let obar2 = params.renormalized_frequency_sq(j);
    let w02 = resonance * resonance;

    // monic quartic: (s^2 + Obar^2)(s^2 + width s + w0^2) - coupling^2/m
    let c = [
        obar2 * w02 - coupling * coupling / m,
        width * obar2,
        obar2 + w02,
        width,
    ];
    let poles = quartic_roots(c)?;

    // residues of g2hat = (s^2 + width s + w0^2) / (m * quartic(s)):
    // the quartic is monic, so its derivative at p_k is prod_{l != k}(p_k - p_l)
    let mut residues = [Complex64::new(0.0, 0.0); 4];
    for (k, &p) in poles.iter().enumerate() {
        let q = p * p + width * p + w02;
        let mut dprod = Complex64::new(1.0, 0.0);
        for (l, &pl) in poles.iter().enumerate() {
            if l != k {
                dprod *= p - pl;
            }
        }
        residues[k] = q / (m * dprod);
    }

    Ok(GFunctions {
        poles,
        residues,
        mass: m,
        omega_bar_sq: obar2,
        kernel: (coupling, resonance, width),
    })
}

/// Durand–Kerner iteration for the roots of a monic real quartic
/// `s^4 + c[3] s^3 + c[2] s^2 + c[1] s + c[0]`, with exact conjugate pairing
/// enforced afterwards.
fn quartic_roots(c: [f64; 4]) -> Result<[Complex64; 4]> {
    let eval = |s: Complex64| -> Complex64 { (((s + c[3]) * s + c[2]) * s + c[1]) * s + c[0] };
    let deriv = |s: Complex64| -> Complex64 { ((4.0 * s + 3.0 * c[3]) * s + 2.0 * c[2]) * s + c[1] };

    let radius = 1.0 + c.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [
        seed * radius,
        seed * seed * radius,
        seed * seed * seed * radius,
        seed * seed * seed * seed * radius,
    ];
    for _ in 0..200 {
        let mut max_step = 0.0_f64;
        for k in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for l in 0..4 {
                if l != k {
                    denom *= roots[k] - roots[l];
                }
            }
            let step = eval(roots[k]) / denom;
            roots[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-15 * radius {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }

    let scale = roots.iter().fold(1.0_f64, |a, r| a.max(r.norm()));
    for r in roots.iter_mut() {
        if r.im.abs() < 1e-10 * scale {
            r.im = 0.0;
        }
    }
    // pair complex roots with their conjugates and average them exactly
    let mut used = [false; 4];
    for k in 0..4 {
        if used[k] || roots[k].im <= 0.0 {
            continue;
        }
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for l in 0..4 {
            if l != k && !used[l] && roots[l].im < 0.0 {
                let d = (roots[k].conj() - roots[l]).norm();
                if d < best_d {
                    best_d = d;
                    best = l;
                }
            }
        }
        if best != usize::MAX {
            let avg = 0.5 * (roots[k] + roots[best].conj());
            roots[k] = avg;
            roots[best] = avg.conj();
            used[k] = true;
            used[best] = true;
        }
    }

    let mut min_sep = f64::INFINITY;
    for i in 0..4 {
        for l in (i + 1)..4 {
            min_sep = min_sep.min((roots[i] - roots[l]).norm());
        }
    }
    // a true double root computed in f64 lands ~sqrt(eps) ~ 1e-8 from its
    // twin, so the detector must sit above that
    if min_sep < 1e-6 * scale {
        return Err(Error::DegeneratePoles {
            separation: min_sep / scale,
        });
    }
    Ok(roots)
}

/// Mean position and momentum at time `t` from the initial means.
pub fn mean_evolution(g: &GFunctions, mu0: (f64, f64), t: f64) -> Result<(f64, f64)> {
    if t < 0.0 {
        return Err(Error::Domain {
            what: "time",
            value: t,
        });
    }
    let (mu_x0, mu_p0) = mu0;
    Ok((
        g.g1(t) * mu_x0 + g.g2(t) * mu_p0,
        g.g3(t) * mu_x0 + g.g1(t) * mu_p0,
    ))
}

fn quadrature_breakpoints(g: &GFunctions) -> Vec<f64> {
    let mut pts = vec![g.kernel.1, g.omega_bar_sq.sqrt()];
    for p in g.poles() {
        if p.im.abs() > 0.0 {
            pts.push(p.im.abs());
            pts.push(p.im.abs() - 3.0 * p.re.abs());
            pts.push(p.im.abs() + 3.0 * p.re.abs());
        }
    }
    pts
}

fn frequency_cut(g: &GFunctions) -> f64 {
    let pole_max = g.poles().iter().map(|p| p.norm()).fold(0.0_f64, f64::max);
    4.0 * pole_max.max(g.kernel.1).max(1.0)
}

/// Covariances at time `t` for an initial state uncorrelated with the bath.
///
/// The homogeneous part propagates `sigma0 = (sigma_xx, sigma_xp, sigma_pp)`
/// through the quadratic form in `g1, g2, g3`; the inhomogeneous part is an
/// adaptive frequency integral with the inner time integrals in closed form.
pub fn covariance_evolution(
    g: &GFunctions,
    bath: &BathSpec,
    sigma0: (f64, f64, f64),
    t: f64,
) -> Result<(f64, f64, f64)> {
    if t < 0.0 {
        return Err(Error::Domain {
            what: "time",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(sigma0);
    }
    let (sxx0, sxp0, spp0) = sigma0;
    let (g1, g2, g3) = (g.g1(t), g.g2(t), g.g3(t));
    let i_xx = g1 * g1 * sxx0 + 2.0 * g1 * g2 * sxp0 + g2 * g2 * spp0;
    let i_xp = g1 * g3 * sxx0 + (g1 * g1 + g2 * g3) * sxp0 + g1 * g2 * spp0;
    let i_pp = g3 * g3 * sxx0 + 2.0 * g1 * g3 * sxp0 + g1 * g1 * spp0;

    let opts = QuadOptions {
        rel_tol: 3e-9,
        abs_tol: 1e-13,
        max_intervals: 60_000,
    };
    let cut = frequency_cut(g);
    let integrand = |w: f64, out: &mut [f64]| {
        let weight = bath.spectral.over_omega(w).unwrap_or(0.0)
            * bath.kind.spectrum(w, bath.temperature).unwrap_or(0.0);
        let (a2, a1) = g.finite_transforms(t, w);
        out[0] = weight * a2.norm_sqr();
        out[1] = weight * (a2 * a1.conj()).re;
        out[2] = weight * a1.norm_sqr();
    };
    let segments = quad::split_segments(0.0, cut, &quadrature_breakpoints(g));
    let (head, _) = quad::integrate_multi(integrand, 3, &segments, &opts)?;
    let (tail, _) = quad::integrate_multi(
        |u, out| {
            let wgt = 1.0 / ((1.0 - u) * (1.0 - u));
            integrand(cut + u / (1.0 - u), out);
            for v in out.iter_mut() {
                *v *= wgt;
            }
        },
        3,
        &[(0.0, 1.0)],
        &opts,
    )?;

    Ok((
        head[0] + tail[0] + i_xx,
        head[1] + tail[1] + i_xp,
        head[2] + tail[2] + i_pp,
    ))
}

/// Steady-state covariances by direct frequency quadrature,
/// `sigma_xx = int (J/w) N |g2hat(iw)|^2` and
/// `sigma_pp = m^2 int w^2 (J/w) N |g2hat(iw)|^2`.
pub fn steady_covariances_quadrature(
    params: &OscillatorParams,
    bath: &BathSpec,
) -> Result<SteadyCovariances> {
    params.validate()?;
    let m = params.mass;
    let obar2 = params.renormalized_frequency_sq(&bath.spectral);

    // for the rational kernel, verify stability and reuse the pole set
    let lorentzian_g = match &bath.spectral {
        SpectralDensity::Lorentzian { .. } => {
            let g = g_functions(params, &bath.spectral)?;
            if !g.is_stable() {
                return Err(Error::Unstable(
                    "response poles in the right half-plane; steady state does not exist".into(),
                ));
            }
            Some(g)
        }
        _ => None,
    };

    let g2_hat_sq = |w: f64| -> f64 {
        match &lorentzian_g {
            Some(g) => g.g2_hat_iw(w).norm_sqr(),
            None => {
                let k = bath
                    .spectral
                    .kernel_laplace(Complex64::new(0.0, w))
                    .unwrap_or(Complex64::new(0.0, 0.0));
                (m * Complex64::new(obar2 - w * w, 0.0) - k).norm_sqr().recip()
            }
        }
    };

    let opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-15,
        max_intervals: 60_000,
    };
    let (breaks, cut) = match &lorentzian_g {
        Some(g) => (quadrature_breakpoints(g), frequency_cut(g)),
        None => (
            vec![bath.spectral.frequency_scale(), obar2.sqrt()],
            4.0 * bath.spectral.frequency_scale().max(obar2.sqrt()).max(1.0),
        ),
    };
    let integrand = |w: f64, out: &mut [f64]| {
        let weight = bath.spectral.over_omega(w).unwrap_or(0.0)
            * bath.kind.spectrum(w, bath.temperature).unwrap_or(0.0)
            * g2_hat_sq(w);
        out[0] = weight;
        out[1] = m * m * w * w * weight;
    };
    let segments = quad::split_segments(0.0, cut, &breaks);
    let (head, _) = quad::integrate_multi(integrand, 2, &segments, &opts)?;
    let (tail, _) = quad::integrate_multi(
        |u, out| {
            let wgt = 1.0 / ((1.0 - u) * (1.0 - u));
            integrand(cut + u / (1.0 - u), out);
            out[0] *= wgt;
            out[1] *= wgt;
        },
        2,
        &[(0.0, 1.0)],
        &opts,
    )?;

    Ok(SteadyCovariances {
        sigma_xx: head[0] + tail[0],
        sigma_pp: head[1] + tail[1],
        sigma_xp: 0.0,
        method: SteadyMethod::Quadrature,
    })
}

/// Steady-state covariances from the Matsubara series (quantum noise,
/// Lorentzian bath, nondimensional units `m = Omega = 1`, `T > 0`).
pub fn steady_covariances_matsubara(
    params: &OscillatorParams,
    j: &SpectralDensity,
    temperature: f64,
) -> Result<SteadyCovariances> {
    params.validate()?;
    if (params.mass - 1.0).abs() > 1e-12 || (params.frequency - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "Matsubara route is defined in nondimensional units m = Omega = 1".into(),
        ));
    }
    if !params.counter_term {
        return Err(Error::InvalidParameter(
            "Matsubara route assumes the counter-term is applied".into(),
        ));
    }
    let (coupling, resonance, width) = match j {
        SpectralDensity::Lorentzian {
            coupling,
            resonance,
            width,
        } => (*coupling, *resonance, *width),
        other => {
            return Err(Error::InvalidParameter(format!(
                "Matsubara route needs a Lorentzian spectral density, got {}",
                other.describe()
            )))
        }
    };
    let (sigma_xx, sigma_pp) =
        matsubara::steady_covariances(coupling, resonance, width, temperature)?;
    Ok(SteadyCovariances {
        sigma_xx,
        sigma_pp,
        sigma_xp: 0.0,
        method: SteadyMethod::Matsubara,
    })
}

/// Thermal-state covariances of the bare oscillator,
/// `sigma_xx = coth(Omega/2T) / (2 m Omega)`, `sigma_pp = m Omega coth(Omega/2T) / 2`.
pub fn gibbs_covariances(params: &OscillatorParams, temperature: f64) -> Result<SteadyCovariances> {
    params.validate()?;
    if temperature < 0.0 {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
        });
    }
    let om = params.frequency;
    let coth = if temperature == 0.0 {
        1.0
    } else {
        1.0 / (om / (2.0 * temperature)).tanh()
    };
    Ok(SteadyCovariances {
        sigma_xx: coth / (2.0 * params.mass * om),
        sigma_pp: 0.5 * params.mass * om * coth,
        sigma_xp: 0.0,
        method: SteadyMethod::Gibbs,
    })
}

/// Steady-state covariances of the mean-force thermal state.
///
/// The retarded response `G(w) = 1 / (m(Obar^2 - w^2) - Ktilde(w))` is
/// rebuilt from scratch: `Re Ktilde` through the principal-value integral
/// `P int 2 xi J(xi) / (xi^2 - w^2) d xi` and `Im Ktilde = pi J(w)`, with no
/// reference to the rational closed form; the covariances then follow from
/// `sigma_xx = (1/pi) int dw N(w,T)/w Im G(w)` and
/// `sigma_pp = (m^2/pi) int dw w N(w,T) Im G(w)`.
pub fn mean_force_covariances(
    params: &OscillatorParams,
    j: &SpectralDensity,
    temperature: f64,
) -> Result<SteadyCovariances> {
    params.validate()?;
    if temperature < 0.0 {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
        });
    }
    let m = params.mass;
    let obar2 = params.renormalized_frequency_sq(j);
    let pv_opts = QuadOptions {
        rel_tol: 1e-9,
        abs_tol: 1e-14,
        max_intervals: 8_000,
    };
    let kernel_re = |w: f64| -> f64 {
        quad::principal_value_half_line(
            |xi| {
                if xi <= 0.0 {
                    0.0
                } else {
                    2.0 * xi * j.evaluate(xi).unwrap_or(0.0) / (xi + w)
                }
            },
            w,
            &pv_opts,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN)
    };

    let integrand = |w: f64, out: &mut [f64]| {
        let k_re = kernel_re(w);
        let k_im = std::f64::consts::PI * j.evaluate(w).unwrap_or(0.0);
        let response = 1.0 / Complex64::new(m * (obar2 - w * w) - k_re, -k_im);
        let n = NoiseKind::Quantum.spectrum(w, temperature).unwrap_or(0.0);
        let im_g = response.im;
        out[0] = n / w * im_g / std::f64::consts::PI;
        out[1] = m * m * w * n * im_g / std::f64::consts::PI;
    };

    let opts = QuadOptions {
        rel_tol: 3e-8,
        abs_tol: 1e-13,
        max_intervals: 30_000,
    };
    let (breaks, cut) = match g_functions(params, j) {
        Ok(g) => (quadrature_breakpoints(&g), frequency_cut(&g)),
        Err(_) => (
            vec![j.frequency_scale(), obar2.sqrt()],
            4.0 * j.frequency_scale().max(obar2.sqrt()).max(1.0),
        ),
    };
    let segments = quad::split_segments(0.0, cut, &breaks);
    let (head, _) = quad::integrate_multi(integrand, 2, &segments, &opts)?;
    let (tail, _) = quad::integrate_multi(
        |u, out| {
            let wgt = 1.0 / ((1.0 - u) * (1.0 - u));
            integrand(cut + u / (1.0 - u), out);
            out[0] *= wgt;
            out[1] *= wgt;
        },
        2,
        &[(0.0, 1.0)],
        &opts,
    )?;

    Ok(SteadyCovariances {
        sigma_xx: head[0] + tail[0],
        sigma_pp: head[1] + tail[1],
        sigma_xp: 0.0,
        method: SteadyMethod::MeanForce,
    })
}

/// Exact classical steady state: the thermal state at the bare frequency
/// with the counter-term, and at the softened frequency
/// `sqrt(Omega^2 - Khat(0)/m)` without it.
pub fn classical_exact_covariances(
    params: &OscillatorParams,
    j: &SpectralDensity,
    temperature: f64,
) -> Result<SteadyCovariances> {
    params.validate()?;
    if temperature < 0.0 {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
        });
    }
    let m = params.mass;
    let om2 = params.frequency * params.frequency;
    let eff2 = if params.counter_term {
        om2
    } else {
        let shifted = om2 - j.renormalization_shift() / m;
        if shifted <= 0.0 {
            return Err(Error::Unstable(format!(
                "without the counter-term the effective squared frequency is {shifted}"
            )));
        }
        shifted
    };
    Ok(SteadyCovariances {
        sigma_xx: temperature / (m * eff2),
        sigma_pp: m * temperature,
        sigma_xp: 0.0,
        method: SteadyMethod::ClassicalExact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig_j() -> SpectralDensity {
        SpectralDensity::lorentzian(0.3, 0.5, 0.1).unwrap()
    }

    fn fig_bath(kind: NoiseKind) -> BathSpec {
        BathSpec::new(fig_j(), 0.1, kind).unwrap()
    }

    #[test]
    fn residue_sum_identities() {
        let g = g_functions(&OscillatorParams::default(), &fig_j()).unwrap();
        let sum_r: Complex64 = g.residues().iter().sum();
        let sum_rp: Complex64 = g
            .poles()
            .iter()
            .zip(g.residues())
            .map(|(p, r)| p * r)
            .sum();
        let sum_rp2: Complex64 = g
            .poles()
            .iter()
            .zip(g.residues())
            .map(|(p, r)| p * p * r)
            .sum();
        assert!(sum_r.norm() < 1e-12, "{sum_r}");
        assert_relative_eq!(sum_rp.re, 1.0, max_relative = 1e-12);
        assert!(sum_rp.im.abs() < 1e-12);
        assert!(sum_rp2.norm() < 1e-12, "{sum_rp2}");
    }

    #[test]
    fn initial_value_identities() {
        let g = g_functions(&OscillatorParams::new(2.0, 1.3).unwrap(), &fig_j()).unwrap();
        assert!(g.g2(0.0).abs() < 1e-13);
        assert_relative_eq!(g.g1(0.0), 1.0, max_relative = 1e-12);
        assert!(g.g3(0.0).abs() < 1e-12);
        // g2'(0) = 1/m via finite difference
        let h = 1e-6;
        assert_relative_eq!(g.g2(h) / h, 1.0 / 2.0, max_relative = 1e-4);
    }

    #[test]
    fn free_oscillator_g_functions() {
        let j = SpectralDensity::lorentzian(0.0, 0.5, 0.1).unwrap();
        let p = OscillatorParams {
            mass: 1.5,
            frequency: 0.9,
            counter_term: true,
        };
        let g = g_functions(&p, &j).unwrap();
        for t in [0.0, 0.7, 3.3, 10.0] {
            assert_relative_eq!(g.g1(t), (0.9 * t).cos(), epsilon = 1e-10);
            assert_relative_eq!(g.g2(t), (0.9 * t).sin() / (1.5 * 0.9), epsilon = 1e-10);
            assert_relative_eq!(g.g3(t), -1.5 * 0.9 * (0.9 * t).sin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn poles_are_stable_with_counter_term() {
        for coupling in [0.3, 2.0] {
            let j = SpectralDensity::lorentzian(coupling, 0.5, 0.1).unwrap();
            let g = g_functions(&OscillatorParams::default(), &j).unwrap();
            assert!(g.is_stable());
        }
    }

    #[test]
    fn no_counter_term_can_destabilize() {
        let p = OscillatorParams {
            counter_term: false,
            ..Default::default()
        };
        // coupling^2 > m Omega^2 w0^2 = 0.25 flips a pole into the right half-plane
        let strong = SpectralDensity::lorentzian(0.6, 0.5, 0.1).unwrap();
        let g = g_functions(&p, &strong).unwrap();
        assert!(!g.is_stable());
        assert!(steady_covariances_quadrature(
            &p,
            &BathSpec::new(strong, 0.5, NoiseKind::Classical).unwrap()
        )
        .is_err());
    }

    #[test]
    fn mean_evolution_basics() {
        let g = g_functions(&OscillatorParams::default(), &fig_j()).unwrap();
        assert_eq!(mean_evolution(&g, (0.0, 0.0), 5.0).unwrap(), (0.0, 0.0));
        let (mx, mp) = mean_evolution(&g, (0.7, -0.2), 0.0).unwrap();
        assert_relative_eq!(mx, 0.7, max_relative = 1e-12);
        assert_relative_eq!(mp, -0.2, max_relative = 1e-12);
        // dissipation drives the means to zero (slowest rate ~3e-3 here)
        let (mx, mp) = mean_evolution(&g, (1.0, 0.0), 4000.0).unwrap();
        assert!(mx.abs() < 1e-4 && mp.abs() < 1e-4, "({mx}, {mp})");
        assert!(mean_evolution(&g, (1.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn covariance_evolution_at_t0_is_exact() {
        let g = g_functions(&OscillatorParams::default(), &fig_j()).unwrap();
        let s =
            covariance_evolution(&g, &fig_bath(NoiseKind::Quantum), (0.5, 0.1, 0.4), 0.0).unwrap();
        assert_eq!(s, (0.5, 0.1, 0.4));
    }

    #[test]
    fn covariance_evolution_approaches_steady_state() {
        let g = g_functions(&OscillatorParams::default(), &fig_j()).unwrap();
        let bath = fig_bath(NoiseKind::Quantum);
        let steady = steady_covariances_quadrature(&OscillatorParams::default(), &bath).unwrap();
        // slowest covariance decay rate is 2*min|Re p| ~ 6e-3 here, so run long
        let s = covariance_evolution(&g, &bath, (0.5, 0.0, 0.5), 2500.0).unwrap();
        assert_relative_eq!(s.0, steady.sigma_xx, max_relative = 1e-4);
        assert_relative_eq!(s.2, steady.sigma_pp, max_relative = 1e-4);
        assert!(s.1.abs() < 1e-4);
    }

    #[test]
    fn classical_steady_state_is_thermal_for_any_coupling() {
        // mass and frequency deliberately != 1 to pin unit placement
        let p = OscillatorParams::new(2.0, 0.7).unwrap();
        for coupling in [0.3, 2.0] {
            let j = SpectralDensity::lorentzian(coupling, 0.5, 0.1).unwrap();
            let bath = BathSpec::new(j.clone(), 0.8, NoiseKind::Classical).unwrap();
            let q = steady_covariances_quadrature(&p, &bath).unwrap();
            let exact = classical_exact_covariances(&p, &j, 0.8).unwrap();
            assert_relative_eq!(q.sigma_xx, exact.sigma_xx, max_relative = 1e-8);
            assert_relative_eq!(q.sigma_pp, exact.sigma_pp, max_relative = 1e-8);
            assert_relative_eq!(exact.sigma_xx, 0.8 / (2.0 * 0.49), max_relative = 1e-14);
            assert_relative_eq!(exact.sigma_pp, 2.0 * 0.8, max_relative = 1e-14);
        }
    }

    #[test]
    fn no_counter_term_classical_state_sits_at_softened_frequency() {
        let p = OscillatorParams {
            counter_term: false,
            ..Default::default()
        };
        let j = fig_j();
        let bath = BathSpec::new(j.clone(), 0.7, NoiseKind::Classical).unwrap();
        let q = steady_covariances_quadrature(&p, &bath).unwrap();
        let exact = classical_exact_covariances(&p, &j, 0.7).unwrap();
        // softened squared frequency: 1 - 0.09/0.25 = 0.64
        assert_relative_eq!(exact.sigma_xx, 0.7 / 0.64, max_relative = 1e-14);
        assert_relative_eq!(q.sigma_xx, exact.sigma_xx, max_relative = 1e-8);
        assert_relative_eq!(q.sigma_pp, 0.7, max_relative = 1e-8);
    }

    #[test]
    fn gibbs_values() {
        let p = OscillatorParams::default();
        let zero = gibbs_covariances(&p, 0.0).unwrap();
        assert_eq!((zero.sigma_xx, zero.sigma_pp), (0.5, 0.5));
        // frozen from the number-state sum oracle in the integration tests:
        // coth(1/2)/2
        let one = gibbs_covariances(&p, 1.0).unwrap();
        assert_relative_eq!(one.sigma_xx, 1.0819767068693265, max_relative = 1e-12);
        // high-temperature asymptote T/(m Omega^2)
        let hot = gibbs_covariances(&p, 100.0).unwrap();
        assert_relative_eq!(hot.sigma_xx, 100.0, max_relative = 1e-4);
    }

    #[test]
    fn zero_coupling_quantum_ground_state() {
        // coupling -> 0+ at T = 0 leaves the zero-point values
        let j = SpectralDensity::lorentzian(0.02, 0.5, 0.1).unwrap();
        let bath = BathSpec::new(j, 0.0, NoiseKind::Quantum).unwrap();
        let q = steady_covariances_quadrature(&OscillatorParams::default(), &bath).unwrap();
        assert_relative_eq!(q.sigma_xx, 0.5, max_relative = 2e-3);
        assert_relative_eq!(q.sigma_pp, 0.5, max_relative = 2e-3);
    }

    #[test]
    fn matsubara_requires_nondimensional_quantum_setup() {
        let p = OscillatorParams::new(2.0, 1.0).unwrap();
        assert!(steady_covariances_matsubara(&p, &fig_j(), 1.0).is_err());
        let p = OscillatorParams::default();
        assert!(steady_covariances_matsubara(&p, &fig_j(), 0.0).is_err());
        assert!(steady_covariances_matsubara(&p, &fig_j(), 0.5).is_ok());
    }

    #[test]
    fn degenerate_poles_rejected() {
        // coupling = 0 with width = 2 w0 collapses the bath pair onto one point
        let j = SpectralDensity::lorentzian(0.0, 0.5, 1.0).unwrap();
        match g_functions(&OscillatorParams::default(), &j) {
            Err(Error::DegeneratePoles { .. }) => {}
            other => panic!("expected degenerate poles, got {other:?}"),
        }
    }
}
