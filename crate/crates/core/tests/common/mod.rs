//! Test-side reference computations, independent of the library's own
//! quadrature and series machinery.
#![allow(dead_code)]

/// Composite Simpson rule with `2n` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / (2 * n) as f64;
    let mut acc = f(a) + f(b);
    for k in 1..2 * n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Richardson-refined Simpson: doubles panels until two refinements agree.
pub fn simpson_refined<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut n = 64;
    let mut prev = simpson(f, a, b, n);
    loop {
        n *= 2;
        let next = simpson(f, a, b, n);
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) || n > (1 << 22) {
            return next;
        }
        prev = next;
    }
}

/// Average Gibbs occupation from an explicit truncated number-state sum:
/// `<x^2> = (2<n> + 1) / (2 m Omega)` with Boltzmann weights
/// `exp(-(n + 1/2) Omega / T)`.
pub fn gibbs_xx_number_state_sum(mass: f64, omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0 / (2.0 * mass * omega);
    }
    let beta = 1.0 / temperature;
    let mut z = 0.0;
    let mut occ = 0.0;
    for n in 0..100_000 {
        let e = (n as f64 + 0.5) * omega;
        let w = (-beta * e).exp();
        z += w;
        occ += n as f64 * w;
        if w < 1e-18 * z {
            break;
        }
    }
    let nbar = occ / z;
    (2.0 * nbar + 1.0) / (2.0 * mass * omega)
}
