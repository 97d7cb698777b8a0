//! Uncontrolled open dynamics `ρ̇ = −i[H₀, ρ] + D[ρ]`.
//!
//! Density matrices are vectorized by stacking columns,
//! `vec(ρ) = (ρ₀₀, ρ₁₀, ρ₀₁, ρ₁₁)`, so that `vec(AXB) = (Bᵀ ⊗ A) vec(X)` and
//! the coherent part becomes `−i (I ⊗ H₀ − H₀ᵀ ⊗ I)`.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::qstate::{c, eigvalsh2, hermitize, Hamiltonian, Mat2, QubitState, C64};

pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

/// Singular values below this count towards the null space of `L`.
pub const NULL_SPACE_TOL: f64 = 1e-9;

pub fn vectorize(m: &Mat2) -> Vec4 {
    Vec4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

pub fn unvectorize(v: &Vec4) -> Mat2 {
    Mat2::new(v[0], v[2], v[1], v[3])
}

/// Pure dephasing `D[ρ] = γ(−{N, ρ} + 2 N ρ N)` for a rank-1 projector `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingGenerator {
    rate: f64,
    projector: Mat2,
}

impl DephasingGenerator {
    pub fn new(rate: f64, projector: Mat2) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("dephasing rate {rate} must be >= 0")));
        }
        let idempotency = (projector * projector - projector).norm();
        if idempotency > 1e-12 || (projector.trace().re - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("N must be a rank-1 projector".into()));
        }
        Ok(Self { rate, projector })
    }

    /// Dephasing with `N = |1⟩⟨1| = diag(1, 0)`.
    pub fn computational(rate: f64) -> Result<Self> {
        Self::new(rate, *QubitState::ket1().matrix())
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn projector(&self) -> &Mat2 {
        &self.projector
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let n = &self.projector;
        (-(n * rho + rho * n) + n * rho * n * c(2.0)) * c(self.rate)
    }

    pub fn superoperator(&self) -> Mat4 {
        let n = &self.projector;
        let id = Mat2::identity();
        let nt = n.transpose();
        (-(id.kronecker(n) + nt.kronecker(&id)) + nt.kronecker(n) * c(2.0)) * c(self.rate)
    }
}

/// `D[ρ]` for a state.
pub fn dissipator(rho: &QubitState, g: &DephasingGenerator) -> Mat2 {
    g.apply(rho.matrix())
}

/// The 4×4 generator together with propagators precomputed for a few step
/// lengths that get reused many times.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    hamiltonian: Hamiltonian,
    dephasing: DephasingGenerator,
    matrix: Mat4,
    cache: Vec<(f64, Mat4)>,
}

impl Liouvillian {
    pub fn new(hamiltonian: Hamiltonian, dephasing: DephasingGenerator) -> Self {
        let h = hamiltonian.matrix();
        let id = Mat2::identity();
        let coherent = (id.kronecker(h) - h.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
        Self {
            hamiltonian,
            dephasing,
            matrix: coherent + dephasing.superoperator(),
            cache: Vec::new(),
        }
    }

    /// Precomputes `exp(L Δt)` for each listed step.
    pub fn with_cached_steps(mut self, steps: &[f64]) -> Self {
        for &dt in steps {
            if dt >= 0.0 && !self.cache.iter().any(|(s, _)| *s == dt) {
                let p = (self.matrix * c(dt)).exp();
                self.cache.push((dt, p));
            }
        }
        self
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn dephasing(&self) -> &DephasingGenerator {
        &self.dephasing
    }

    /// `−i[H₀, ρ] + D[ρ]` evaluated directly on the matrix.
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let h = self.hamiltonian.matrix();
        (h * rho - rho * h) * C64::new(0.0, -1.0) + self.dephasing.apply(rho)
    }

    /// `exp(L Δt)`, from the cache when `Δt` was precomputed.
    pub fn propagator(&self, dt: f64) -> Result<Mat4> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step {dt} must be >= 0")));
        }
        if let Some((_, p)) = self.cache.iter().find(|(s, _)| *s == dt) {
            return Ok(*p);
        }
        Ok((self.matrix * c(dt)).exp())
    }

    /// Energy current `Tr[H₀ D[ρ]]`.
    pub fn energy_current(&self, rho: &Mat2) -> f64 {
        (self.dephasing.apply(rho) * self.hamiltonian.matrix()).trace().re
    }

    /// Time derivative of the energy current along the uncontrolled flow,
    /// `Tr[H₀ D[L[ρ]]]`.
    pub fn energy_current_slope(&self, rho: &Mat2) -> f64 {
        self.energy_current(&self.apply(rho))
    }
}

/// Applies a precomputed propagator and revalidates the result.
pub fn apply_propagator(rho: &QubitState, p: &Mat4) -> Result<QubitState> {
    QubitState::from_integrator(unvectorize(&(p * vectorize(rho.matrix()))))
}

/// `unvec(exp(L Δt) vec(ρ))`.
pub fn propagate(rho: &QubitState, l: &Liouvillian, dt: f64) -> Result<QubitState> {
    if dt == 0.0 {
        return Ok(*rho);
    }
    apply_propagator(rho, &l.propagator(dt)?)
}

/// A fixed point of the uncontrolled dynamics.
#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    state: QubitState,
    nullity: usize,
}

impl SteadyState {
    /// Accepts a caller-chosen fixed point after checking `‖L vec(ρ)‖ ≤ 1e-10`.
    pub fn from_state(rho: QubitState, l: &Liouvillian) -> Result<Self> {
        let residual = l.apply(rho.matrix()).norm();
        if residual > 1e-10 {
            return Err(Error::NoSteadyState(format!("residual {residual:e} for supplied state")));
        }
        Ok(Self {
            state: rho,
            nullity: null_space(l).len(),
        })
    }

    pub fn state(&self) -> &QubitState {
        &self.state
    }

    /// Dimension of the numerical null space of `L`.
    pub fn nullity(&self) -> usize {
        self.nullity
    }

    pub fn is_unique(&self) -> bool {
        self.nullity == 1
    }
}

fn null_space(l: &Liouvillian) -> Vec<Vec4> {
    let svd = l.matrix().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < NULL_SPACE_TOL)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Finds a unit-trace PSD null vector of `L`.
///
/// When the null space is degenerate the orthogonal projection of `I/2`
/// onto it is tried first, which picks the maximally mixed state whenever
/// that is stationary.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let basis = null_space(l);
    if basis.is_empty() {
        return Err(Error::NoSteadyState("generator has trivial null space".into()));
    }
    let mixed = vectorize(QubitState::maximally_mixed().matrix());
    let projected = basis
        .iter()
        .fold(Vec4::zeros(), |acc, v| acc + v * v.dotc(&mixed));

    for candidate in std::iter::once(projected).chain(basis.iter().copied()) {
        let m = unvectorize(&candidate);
        let tr = m.trace();
        if tr.norm() < 1e-12 {
            continue;
        }
        let m = m / tr;
        let defect = (m - m.adjoint()).norm();
        let m = hermitize(&m);
        if defect > 1e-8 || eigvalsh2(&m)[0] < -1e-8 {
            continue;
        }
        if l.apply(&m).norm() > 1e-10 {
            continue;
        }
        if let Ok(state) = QubitState::new(m) {
            return Ok(SteadyState {
                state,
                nullity: basis.len(),
            });
        }
    }
    Err(Error::NoSteadyState("no PSD unit-trace vector in the null space".into()))
}

/// Temperature of the Gibbs state that reproduces the steady-state populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveTemperature {
    /// Negative values signal population inversion.
    Finite(f64),
    /// Equal populations: no finite temperature.
    Unbounded,
}

impl EffectiveTemperature {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Self::Finite(t) => Some(*t),
            Self::Unbounded => None,
        }
    }

    pub fn is_inverted(&self) -> bool {
        matches!(self, Self::Finite(t) if *t < 0.0)
    }
}

/// `T = (E_e − E_g) / log(p_g / p_e)` for a steady state diagonal in the energy basis.
pub fn effective_temperature(ss: &SteadyState, h: &Hamiltonian) -> Result<EffectiveTemperature> {
    let rho = ss.state();
    let coherence = h.energy_basis_coherence(rho);
    if coherence > 1e-9 {
        return Err(Error::NotGibbs(coherence));
    }
    let p_e = rho.expectation(h.excited_state().matrix()).re;
    let p_g = rho.expectation(h.ground_state().matrix()).re;
    if (p_g - p_e).abs() < 1e-9 {
        return Ok(EffectiveTemperature::Unbounded);
    }
    let floor = crate::qstate::EIGEN_FLOOR;
    let ratio = p_g.max(floor) / p_e.max(floor);
    Ok(EffectiveTemperature::Finite(h.capacity() / ratio.ln()))
}

/// `Σ_D(ρ) = −Tr[L[ρ] (log ρ − log ρ̄)]` using the full uncontrolled generator.
pub fn entropy_production_rate_d(rho: &QubitState, l: &Liouvillian, ss: &SteadyState) -> f64 {
    let flow = l.apply(rho.matrix());
    let logs = rho.log_floored() - ss.state().log_floored();
    -(flow * logs).trace().re
}

/// `Ė_D(ρ) = Tr[D[ρ] H₀]`.
pub fn energy_current_d(rho: &QubitState, h: &Hamiltonian, g: &DephasingGenerator) -> f64 {
    (g.apply(rho.matrix()) * h.matrix()).trace().re
}

/// An entropy rate, flagged when the logarithm floor was active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRate {
    pub value: f64,
    pub regularized: bool,
}

/// `Ṡ_D(ρ) = −Tr[L[ρ] log ρ]`.
pub fn entropy_rate_s_d(rho: &QubitState, l: &Liouvillian) -> EntropyRate {
    let flow = l.apply(rho.matrix());
    EntropyRate {
        value: -(flow * rho.log_floored()).trace().re,
        regularized: rho.touches_floor(),
    }
}
