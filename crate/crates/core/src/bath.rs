//! Spectral densities, memory kernels, noise spectra and force power spectra.
//!
//! The environment is characterized entirely by a spectral density `J(w)`
//! and a temperature. From `J` follow the memory (dissipation) kernel
//!
//! ```text
//! K(tau) = 2 Theta(tau) int_0^inf dw J(w) sin(w tau)
//! ```
//!
//! its Laplace transform `Khat(s)`, the frequency renormalization
//! `Obar^2 = Omega^2 + (2/m) int_0^inf dw J(w)/w` induced by the
//! counter-term, and the force power spectral density
//! `P_F(w) = pi * J(w)/w * N(w, T)`. The noise spectrum `N` is either
//! quantum, `w*coth(w/2T)`, or classical, `2T` (units `hbar = kB = 1`).
//!
//! The Lorentzian variant has closed forms for everything; the other
//! variants fall back to adaptive quadrature. The Lorentzian coupling
//! constant is defined so that `Khat(0) = coupling^2 / resonance^2`
//! regardless of the oscillator mass (in the underlying model its square
//! scales linearly with the mass).

use crate::quad::{self, QuadOptions};
use crate::{Error, Result};
use num_complex::Complex64;

/// Frequency-resolved system–bath coupling profile `J(w)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `J(w) = coupling^2 * width * w / pi / ((resonance^2 - w^2)^2 + width^2 w^2)`.
    Lorentzian {
        coupling: f64,
        resonance: f64,
        width: f64,
    },
    /// `J(w) = damping * w / pi * exp(-w / cutoff)`.
    ///
    /// The exponential cutoff keeps the spectral integrals (and with them the
    /// frequency renormalization) finite; the pure Ohmic form diverges.
    OhmicExpCutoff { damping: f64, cutoff: f64 },
    /// Piecewise-linear samples on a strictly increasing grid; zero outside.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl SpectralDensity {
    pub fn lorentzian(coupling: f64, resonance: f64, width: f64) -> Result<Self> {
        if !(coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lorentzian coupling must be >= 0, got {coupling}"
            )));
        }
        if !(resonance > 0.0) || !(width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lorentzian resonance and width must be > 0, got {resonance}, {width}"
            )));
        }
        Ok(SpectralDensity::Lorentzian {
            coupling,
            resonance,
            width,
        })
    }

    pub fn ohmic_exp_cutoff(damping: f64, cutoff: f64) -> Result<Self> {
        if !(damping >= 0.0) || !(cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Ohmic damping must be >= 0 and cutoff > 0, got {damping}, {cutoff}"
            )));
        }
        Ok(SpectralDensity::OhmicExpCutoff { damping, cutoff })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidParameter(
                "tabulated spectral density needs >= 2 matching grid/value samples".into(),
            ));
        }
        if grid[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "tabulated grid must be nonnegative".into(),
            ));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "tabulated grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "tabulated values must be nonnegative".into(),
            ));
        }
        if grid[0] == 0.0 && values[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "tabulated J(0) must vanish when the grid starts at zero".into(),
            ));
        }
        Ok(SpectralDensity::Tabulated { grid, values })
    }

    /// `J(w)` for `w >= 0`.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::Domain {
                what: "spectral density frequency",
                value: omega,
            });
        }
        Ok(match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                width,
            } => {
                let d = resonance * resonance - omega * omega;
                coupling * coupling * width * omega
                    / std::f64::consts::PI
                    / (d * d + width * width * omega * omega)
            }
            SpectralDensity::OhmicExpCutoff { damping, cutoff } => {
                damping * omega / std::f64::consts::PI * (-omega / cutoff).exp()
            }
            SpectralDensity::Tabulated { grid, values } => interp_linear(grid, values, omega),
        })
    }

    /// `J(w)/w`, finite at `w = 0` (the ratio has a limit because `J(0) = 0`).
    pub fn over_omega(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::Domain {
                what: "spectral density frequency",
                value: omega,
            });
        }
        Ok(match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                width,
            } => {
                let d = resonance * resonance - omega * omega;
                coupling * coupling * width
                    / std::f64::consts::PI
                    / (d * d + width * width * omega * omega)
            }
            SpectralDensity::OhmicExpCutoff { damping, cutoff } => {
                damping / std::f64::consts::PI * (-omega / cutoff).exp()
            }
            SpectralDensity::Tabulated { grid, values } => {
                if omega > 0.0 {
                    interp_linear(grid, values, omega) / omega
                } else if grid[0] == 0.0 {
                    // slope of the first panel
                    values[1] / grid[1]
                } else {
                    0.0
                }
            }
        })
    }

    /// Memory kernel `K(tau)`; zero for `tau <= 0`.
    pub fn memory_kernel(&self, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                width,
            } => {
                // K(tau) = coupling^2 e^{-width tau/2} sin(w1 tau)/w1,
                // w1^2 = resonance^2 - width^2/4; hyperbolic branch when negative.
                let q = resonance * resonance - 0.25 * width * width;
                Ok(coupling * coupling * decaying_sinc(q, tau, 0.5 * width))
            }
            _ => {
                let opts = QuadOptions::with_rel_tol(1e-11);
                let value = match self {
                    SpectralDensity::OhmicExpCutoff { cutoff, .. } => quad::integrate_half_line(
                        |w| 2.0 * self.evaluate(w).unwrap_or(0.0) * (w * tau).sin(),
                        &[*cutoff, 1.0 / tau],
                        8.0 * cutoff,
                        &opts,
                    )?,
                    SpectralDensity::Tabulated { grid, .. } => {
                        let hi = *grid.last().unwrap();
                        quad::integrate_with_breakpoints(
                            |w| 2.0 * self.evaluate(w).unwrap_or(0.0) * (w * tau).sin(),
                            0.0,
                            hi,
                            grid,
                            &opts,
                        )?
                    }
                    SpectralDensity::Lorentzian { .. } => unreachable!(),
                };
                Ok(value.value)
            }
        }
    }

    /// Laplace transform `Khat(s) = int_0^inf e^{-s tau} K(tau) dtau`,
    /// defined for `Re(s) >= 0`.
    ///
    /// On the imaginary axis `Khat(i w)` has imaginary part `-pi J(w)`
    /// (equivalently, the Fourier transform `Ktilde(w) = Khat(-i w)` has
    /// imaginary part `+pi J(w)`).
    pub fn kernel_laplace(&self, s: Complex64) -> Result<Complex64> {
        if s.re < 0.0 {
            return Err(Error::Domain {
                what: "Re(s) of kernel Laplace transform",
                value: s.re,
            });
        }
        match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                width,
            } => {
                let den = s * s + width * s + resonance * resonance;
                let scale = s.norm_sqr() + width * s.norm() + resonance * resonance;
                if den.norm() <= 1e-12 * scale {
                    return Err(Error::KernelPole { s });
                }
                Ok(coupling * coupling / den)
            }
            _ => self.kernel_laplace_quadrature(s),
        }
    }

    /// Fourier transform `Ktilde(w) = int dt e^{i w t} K(t) = Khat(-i w)`;
    /// satisfies `Im Ktilde(w) = pi J(w)` for `w >= 0`.
    pub fn kernel_fourier(&self, omega: f64) -> Result<Complex64> {
        if omega < 0.0 {
            return Err(Error::Domain {
                what: "kernel Fourier frequency",
                value: omega,
            });
        }
        Ok(self.kernel_laplace(Complex64::new(0.0, omega))?.conj())
    }

    /// `Khat(s) = 2 int_0^inf dw J(w) w / (s^2 + w^2)`, evaluated by
    /// quadrature; used by the non-Lorentzian variants.
    fn kernel_laplace_quadrature(&self, s: Complex64) -> Result<Complex64> {
        let opts = QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_intervals: 20_000,
        };
        if s.norm() == 0.0 {
            return Ok(Complex64::new(self.renormalization_shift(), 0.0));
        }
        if s.re == 0.0 {
            // Khat(i sigma) = 2 P int J(w) w/(w^2 - sigma^2) dw - i pi J(sigma)
            let sigma = s.im.abs();
            let re = if sigma == 0.0 {
                self.renormalization_shift()
            } else {
                quad::principal_value_half_line(
                    |w| {
                        if w < 0.0 {
                            0.0
                        } else {
                            2.0 * w * self.evaluate(w).unwrap_or(0.0) / (w + sigma)
                        }
                    },
                    sigma,
                    &opts,
                )?
                .value
            };
            let im = -std::f64::consts::PI * self.evaluate(sigma)?;
            return Ok(Complex64::new(re, if s.im >= 0.0 { im } else { -im }));
        }
        let s2 = s * s;
        // align segments with tabulation panels: the integrand is smooth
        // within each panel but only C0 across them
        let (segments, tail_from) = match self {
            SpectralDensity::Tabulated { grid, .. } => {
                let hi = *grid.last().unwrap();
                (quad::split_segments(0.0, hi, grid), None)
            }
            _ => {
                let cut = 8.0 * self.frequency_scale();
                (
                    quad::split_segments(0.0, cut, &[self.frequency_scale(), s.norm()]),
                    Some(cut),
                )
            }
        };
        let integrand = |w: f64, out: &mut [f64]| {
            let z = 2.0 * w * self.evaluate(w).unwrap_or(0.0) / (s2 + w * w);
            out[0] = z.re;
            out[1] = z.im;
        };
        let (mut parts, _) = quad::integrate_multi(integrand, 2, &segments, &opts)?;
        if let Some(cut) = tail_from {
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
            parts[0] += tail[0];
            parts[1] += tail[1];
        }
        Ok(Complex64::new(parts[0], parts[1]))
    }

    /// `2 int_0^inf dw J(w)/w`: the counter-term contribution to the
    /// potential, equal to `Khat(0)`.
    pub fn renormalization_shift(&self) -> f64 {
        match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                ..
            } => coupling * coupling / (resonance * resonance),
            SpectralDensity::OhmicExpCutoff { damping, cutoff } => {
                2.0 * damping * cutoff / std::f64::consts::PI
            }
            SpectralDensity::Tabulated { grid, .. } => {
                // trapezoid on the tabulation grid; zero outside it
                let f: Vec<f64> = grid
                    .iter()
                    .map(|&w| 2.0 * self.over_omega(w).unwrap_or(0.0))
                    .collect();
                let mut acc = 0.0;
                for i in 1..grid.len() {
                    acc += 0.5 * (f[i] + f[i - 1]) * (grid[i] - grid[i - 1]);
                }
                acc
            }
        }
    }

    /// Characteristic frequency scale, used to place quadrature cuts and
    /// validate time steps.
    pub fn frequency_scale(&self) -> f64 {
        match self {
            SpectralDensity::Lorentzian { resonance, width, .. } => resonance.max(*width),
            SpectralDensity::OhmicExpCutoff { cutoff, .. } => *cutoff,
            SpectralDensity::Tabulated { grid, .. } => *grid.last().unwrap(),
        }
    }

    /// Compact parameter string for provenance records.
    pub fn describe(&self) -> String {
        match self {
            SpectralDensity::Lorentzian {
                coupling,
                resonance,
                width,
            } => format!("lorentzian(coupling={coupling},resonance={resonance},width={width})"),
            SpectralDensity::OhmicExpCutoff { damping, cutoff } => {
                format!("ohmic(damping={damping},cutoff={cutoff})")
            }
            SpectralDensity::Tabulated { grid, .. } => {
                format!("tabulated({} points, max={})", grid.len(), grid.last().unwrap())
            }
        }
    }
}

/// `e^{-decay tau} * sin(sqrt(q) tau)/sqrt(q)` with the hyperbolic branch for
/// `q < 0` and the series limit near `q = 0`, all overflow-safe.
fn decaying_sinc(q: f64, tau: f64, decay: f64) -> f64 {
    if q.abs() * tau * tau < 1e-6 {
        let x = q * tau * tau;
        return (-decay * tau).exp() * tau * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if q > 0.0 {
        let w1 = q.sqrt();
        (-decay * tau).exp() * (w1 * tau).sin() / w1
    } else {
        let w1 = (-q).sqrt();
        // w1 < decay here, so both exponents are negative
        0.5 * (((w1 - decay) * tau).exp() - (-(w1 + decay) * tau).exp()) / w1
    }
}

fn interp_linear(grid: &[f64], values: &[f64], x: f64) -> f64 {
    if x < grid[0] || x > *grid.last().unwrap() {
        return 0.0;
    }
    let idx = grid.partition_point(|&g| g <= x);
    if idx == 0 {
        return values[0];
    }
    if idx == grid.len() {
        return *values.last().unwrap();
    }
    let (x0, x1) = (grid[idx - 1], grid[idx]);
    let t = (x - x0) / (x1 - x0);
    values[idx - 1] * (1.0 - t) + values[idx] * t
}

/// Statistics of the environmental force: quantum or classical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Quantum,
    Classical,
}

impl NoiseKind {
    /// Noise spectrum `N(w, T)`: `w coth(w/2T)` (quantum) or `2T` (classical).
    ///
    /// The quantum spectrum tends to `2T` as `w -> 0` (for `T > 0`) and to
    /// `w` as `T -> 0`.
    pub fn spectrum(self, omega: f64, temperature: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::Domain {
                what: "noise spectrum frequency",
                value: omega,
            });
        }
        if temperature < 0.0 {
            return Err(Error::Domain {
                what: "temperature",
                value: temperature,
            });
        }
        Ok(match self {
            NoiseKind::Classical => 2.0 * temperature,
            NoiseKind::Quantum => {
                if temperature == 0.0 {
                    omega
                } else {
                    let x = omega / (2.0 * temperature);
                    if x < 1e-12 {
                        2.0 * temperature
                    } else {
                        omega / x.tanh()
                    }
                }
            }
        })
    }

    pub fn describe(self) -> &'static str {
        match self {
            NoiseKind::Quantum => "quantum",
            NoiseKind::Classical => "classical",
        }
    }
}

/// A spectral density plus the thermal state of the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub spectral: SpectralDensity,
    pub temperature: f64,
    pub kind: NoiseKind,
}

impl BathSpec {
    pub fn new(spectral: SpectralDensity, temperature: f64, kind: NoiseKind) -> Result<Self> {
        if !(temperature >= 0.0) {
            return Err(Error::Domain {
                what: "temperature",
                value: temperature,
            });
        }
        Ok(BathSpec {
            spectral,
            temperature,
            kind,
        })
    }

    /// Force power spectral density `P_F(w) = pi J(w)/w N(w, T)`.
    pub fn force_psd(&self, omega: f64) -> Result<f64> {
        Ok(std::f64::consts::PI
            * self.spectral.over_omega(omega)?
            * self.kind.spectrum(omega, self.temperature)?)
    }

    pub fn describe(&self) -> String {
        format!(
            "{}|T={}|{}",
            self.spectral.describe(),
            self.temperature,
            self.kind.describe()
        )
    }
}

/// Mass, bare frequency and counter-term switch of a system oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub frequency: f64,
    /// Include the counter-term, renormalizing `Omega^2` to
    /// `Omega^2 + Khat(0)/m`. Without it the steady state sits at the
    /// softened frequency `sqrt(Omega^2 - Khat(0)/m)` instead.
    pub counter_term: bool,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            mass: 1.0,
            frequency: 1.0,
            counter_term: true,
        }
    }
}

impl OscillatorParams {
    pub fn new(mass: f64, frequency: f64) -> Result<Self> {
        let p = OscillatorParams {
            mass,
            frequency,
            counter_term: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass must be > 0, got {}",
                self.mass
            )));
        }
        if !(self.frequency > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be > 0, got {}",
                self.frequency
            )));
        }
        Ok(())
    }

    /// Effective squared frequency entering the equation of motion:
    /// `Omega^2 + (2/m) int J/w dw` with the counter-term, bare `Omega^2`
    /// without it.
    pub fn renormalized_frequency_sq(&self, j: &SpectralDensity) -> f64 {
        let base = self.frequency * self.frequency;
        if self.counter_term {
            base + j.renormalization_shift() / self.mass
        } else {
            base
        }
    }
}
