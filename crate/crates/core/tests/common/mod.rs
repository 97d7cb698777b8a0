//! Reference integrators written directly on 2x2 matrices, independent of
//! the superoperator code under test.
#![allow(dead_code)]

use nalgebra::{Complex, Matrix2};

pub type C = Complex<f64>;
pub type M = Matrix2<C>;

pub fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// `[[ω, Ω], [Ω, −ω]]`.
pub fn hamiltonian(rabi: f64, bias: f64) -> M {
    M::new(re(bias), re(rabi), re(rabi), re(-bias))
}

pub fn reference_h() -> M {
    hamiltonian(3.0, 1.0)
}

/// `ρ̇ = −i[H, ρ] + γ(2NρN − Nρ − ρN)` with `N = diag(1, 0)`.
pub fn rhs(rho: &M, h: &M, gamma: f64) -> M {
    let n = M::new(re(1.0), re(0.0), re(0.0), re(0.0));
    let commutator = (h * rho - rho * h) * C::new(0.0, -1.0);
    let dephasing = (n * rho * n * re(2.0) - n * rho - rho * n) * re(gamma);
    commutator + dephasing
}

pub fn euler(rho0: &M, h: &M, gamma: f64, t: f64, dt: f64) -> M {
    let steps = (t / dt).round() as usize;
    let mut rho = *rho0;
    for _ in 0..steps {
        rho += rhs(&rho, h, gamma) * re(dt);
    }
    rho
}

/// Euler at `dt` and `dt/2` combined to cancel the first-order error.
pub fn euler_richardson(rho0: &M, h: &M, gamma: f64, t: f64, dt: f64) -> M {
    euler(rho0, h, gamma, t, dt / 2.0) * re(2.0) - euler(rho0, h, gamma, t, dt)
}

pub fn rk4(rho0: &M, h: &M, gamma: f64, t: f64, dt: f64) -> M {
    let steps = (t / dt).round() as usize;
    let mut rho = *rho0;
    for _ in 0..steps {
        let k1 = rhs(&rho, h, gamma);
        let k2 = rhs(&(rho + k1 * re(dt / 2.0)), h, gamma);
        let k3 = rhs(&(rho + k2 * re(dt / 2.0)), h, gamma);
        let k4 = rhs(&(rho + k3 * re(dt)), h, gamma);
        rho += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(dt / 6.0);
    }
    rho
}

/// RK4 trajectory sampled every `dt`, starting with `rho0`.
pub fn rk4_path(rho0: &M, h: &M, gamma: f64, t: f64, dt: f64) -> Vec<M> {
    let steps = (t / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut rho = *rho0;
    out.push(rho);
    for _ in 0..steps {
        rho = rk4(&rho, h, gamma, dt, dt);
        out.push(rho);
    }
    out
}

/// Energy eigenvector of the 2x2 real symmetric `[[a, b], [b, −a]]` with
/// eigenvalue `+√(a² + b²)`, as a projector.
pub fn excited_projector(rabi: f64, bias: f64) -> M {
    let e = (rabi * rabi + bias * bias).sqrt();
    let v = [rabi, e - bias];
    let norm = v[0] * v[0] + v[1] * v[1];
    M::new(
        re(v[0] * v[0] / norm),
        re(v[0] * v[1] / norm),
        re(v[0] * v[1] / norm),
        re(v[1] * v[1] / norm),
    )
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Composite Simpson rule for `f` on `[0, t]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let dt = t / n as f64;
    let mut s = f(0.0) + f(t);
    for k in 1..n {
        s += f(k as f64 * dt) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * dt / 3.0
}
