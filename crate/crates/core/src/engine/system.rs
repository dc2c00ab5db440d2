//! Generic embedded integrator for linear oscillator networks with
//! Lorentzian memory.
//!
//! The memory integral `u(t) = int_0^t K(t-t') x(t') dt'` of a Lorentzian
//! kernel satisfies `u'' + width u' + w0^2 u = coupling^2 x` with
//! `u(0) = u'(0) = 0` (the kernel obeys that same homogeneous equation with
//! `K(0) = 0`, `K'(0) = coupling^2`), so each bath attachment contributes two
//! auxiliary variables and the whole system becomes a local linear ODE driven
//! by the sampled noise. A classic fourth-order Runge–Kutta step treats the
//! colored force as a smooth drive, interpolating it linearly at half-steps.
//!
//! State layout: `[x_0..x_n, p_0..p_n, u_0..u_s, v_0..v_s]` with one `(u, v)`
//! pair per attachment slot. The single oscillator is the `n = 1` case —
//! both the scalar engine and the network runner share this exact code path.

/// One bath attachment: a Lorentzian embedding acting on one coordinate.
#[derive(Debug, Clone)]
pub struct SlotParams {
    pub coord: usize,
    pub coupling_sq: f64,
    pub omega0_sq: f64,
    pub width: f64,
}

/// Mass-inverse and potential matrices plus attachment slots.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub n: usize,
    /// Row-major `n x n` inverse mass matrix.
    pub m_inv: Vec<f64>,
    /// Row-major `n x n` potential matrix including counter-terms.
    pub v_bar: Vec<f64>,
    pub slots: Vec<SlotParams>,
}

impl LinearSystem {
    pub fn state_len(&self) -> usize {
        2 * self.n + 2 * self.slots.len()
    }

    /// `out = d state / dt` given per-slot forces.
    fn rhs(&self, state: &[f64], forces: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (x, rest) = state.split_at(n);
        let (p, uv) = rest.split_at(n);
        let (u, v) = uv.split_at(self.slots.len());

        for i in 0..n {
            let mut dx = 0.0;
            let mut dp = 0.0;
            for j in 0..n {
                dx += self.m_inv[i * n + j] * p[j];
                dp -= self.v_bar[i * n + j] * x[j];
            }
            out[i] = dx;
            out[n + i] = dp;
        }
        for (s, slot) in self.slots.iter().enumerate() {
            out[n + slot.coord] += u[s] + forces[s];
            out[2 * n + s] = v[s];
            out[2 * n + self.slots.len() + s] =
                -slot.width * v[s] - slot.omega0_sq * u[s] + slot.coupling_sq * x[slot.coord];
        }
    }
}

/// Scratch buffers reused across steps of one trajectory.
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
    f_mid: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(sys: &LinearSystem) -> Self {
        let len = sys.state_len();
        Rk4Workspace {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            stage: vec![0.0; len],
            f_mid: vec![0.0; sys.slots.len()],
        }
    }
}

/// Integrate one trajectory over `n_steps` uniform steps.
///
/// `noise[s]` holds the sampled force of slot `s` on the step grid
/// (`n_steps + 1` values). `observe(k, state, forces_k)` fires at every grid
/// point, including the initial one.
pub fn integrate_rk4<F>(
    sys: &LinearSystem,
    ws: &mut Rk4Workspace,
    state: &mut [f64],
    noise: &[Vec<f64>],
    dt: f64,
    n_steps: usize,
    mut observe: F,
) where
    F: FnMut(usize, &[f64], &[f64]),
{
    let n_slots = sys.slots.len();
    let forces_at = |k: usize, buf: &mut Vec<f64>| {
        buf.clear();
        for s in 0..n_slots {
            buf.push(noise[s][k]);
        }
    };
    let mut f_lo = Vec::with_capacity(n_slots);
    let mut f_hi = Vec::with_capacity(n_slots);

    forces_at(0, &mut f_lo);
    observe(0, state, &f_lo);

    for k in 0..n_steps {
        forces_at(k, &mut f_lo);
        forces_at(k + 1, &mut f_hi);
        for s in 0..n_slots {
            ws.f_mid[s] = 0.5 * (f_lo[s] + f_hi[s]);
        }

        sys.rhs(state, &f_lo, &mut ws.k1);
        for (i, st) in ws.stage.iter_mut().enumerate() {
            *st = state[i] + 0.5 * dt * ws.k1[i];
        }
        sys.rhs(&ws.stage, &ws.f_mid, &mut ws.k2);
        for (i, st) in ws.stage.iter_mut().enumerate() {
            *st = state[i] + 0.5 * dt * ws.k2[i];
        }
        sys.rhs(&ws.stage, &ws.f_mid, &mut ws.k3);
        for (i, st) in ws.stage.iter_mut().enumerate() {
            *st = state[i] + dt * ws.k3[i];
        }
        sys.rhs(&ws.stage, &f_hi, &mut ws.k4);

        for i in 0..state.len() {
            state[i] +=
                dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
        observe(k + 1, state, &f_hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_oscillator() -> LinearSystem {
        LinearSystem {
            n: 1,
            m_inv: vec![1.0],
            v_bar: vec![1.0],
            slots: vec![SlotParams {
                coord: 0,
                coupling_sq: 0.0,
                omega0_sq: 0.25,
                width: 0.1,
            }],
        }
    }

    #[test]
    fn unforced_oscillator_is_fourth_order_accurate() {
        let sys = free_oscillator();
        let n_steps = 10_000;
        let dt = 1e-3;
        let noise = vec![vec![0.0; n_steps + 1]];
        let mut ws = Rk4Workspace::new(&sys);
        let mut state = vec![1.0, 0.0, 0.0, 0.0];
        integrate_rk4(&sys, &mut ws, &mut state, &noise, dt, n_steps, |_, _, _| {});
        let t = dt * n_steps as f64;
        assert!((state[0] - t.cos()).abs() < 1e-8, "x = {}", state[0]);
        assert!((state[1] + t.sin()).abs() < 1e-8, "p = {}", state[1]);
        // with zero coupling the auxiliary pair never moves
        assert_eq!(&state[2..], &[0.0, 0.0]);
    }

    #[test]
    fn memory_variable_reaches_static_limit() {
        // pin x = 1 by a huge mass (p barely moves): u -> coupling^2/w0^2 = Khat(0)
        let sys = LinearSystem {
            n: 1,
            m_inv: vec![1e-12],
            v_bar: vec![1.0],
            slots: vec![SlotParams {
                coord: 0,
                coupling_sq: 0.09,
                omega0_sq: 0.25,
                width: 0.3,
            }],
        };
        let n_steps = 40_000;
        let noise = vec![vec![0.0; n_steps + 1]];
        let mut ws = Rk4Workspace::new(&sys);
        let mut state = vec![1.0, 0.0, 0.0, 0.0];
        integrate_rk4(&sys, &mut ws, &mut state, &noise, 5e-3, n_steps, |_, _, _| {});
        let expect = 0.09 / 0.25;
        assert!(
            (state[2] - expect).abs() < 1e-6,
            "u = {} vs {}",
            state[2],
            expect
        );
    }
}
