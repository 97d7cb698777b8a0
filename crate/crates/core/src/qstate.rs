//! Qubit density matrices, energy observables and the usual distance and
//! entropy functionals.
//!
//! Basis convention: the computational basis is `|1⟩ = (1, 0)ᵀ`,
//! `|0⟩ = (0, 1)ᵀ`, so `|0⟩⟨0|` is `diag(0, 1)`. Matrix entries are indexed
//! from zero, i.e. the top-left population is `entry(0, 0)`.

use nalgebra::{Complex, Matrix2, Vector2};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;

/// Spectral floor applied inside every logarithm.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Hermiticity and unit-trace tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;
/// Negative eigenvalues beyond this are rejected rather than clipped.
pub const PSD_REJECT: f64 = 1e-8;
/// Minimal energy gap of an admissible Hamiltonian.
pub const MIN_GAP: f64 = 1e-9;

const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0))
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// Spectral decomposition of a 2×2 Hermitian matrix, eigenvalues ascending.
///
/// Eigenvectors carry the global-phase convention that their first
/// non-negligible component is real and positive.
#[derive(Debug, Clone, Copy)]
pub struct Eigh2 {
    pub values: [f64; 2],
    pub vectors: [Vector2<C64>; 2],
}

impl Eigh2 {
    /// Rebuilds `Σ f(λ) |v⟩⟨v|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        let mut out = Mat2::zeros();
        for (lam, v) in self.values.iter().zip(self.vectors.iter()) {
            out += v * v.adjoint() * c(f(*lam));
        }
        out
    }
}

fn fix_phase(mut v: Vector2<C64>) -> Vector2<C64> {
    let norm = v.norm();
    v /= c(norm);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-14).copied() {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    v
}

/// Closed-form eigendecomposition of the Hermitian part of `m`.
pub fn eigh2(m: &Mat2) -> Eigh2 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = (half * half + b.norm_sqr()).sqrt();
    let values = [mean - radius, mean + radius];

    if radius <= 1e-15 * (1.0 + mean.abs()) {
        return Eigh2 {
            values,
            vectors: [
                Vector2::new(c(1.0), c(0.0)),
                Vector2::new(c(0.0), c(1.0)),
            ],
        };
    }

    let vector_for = |lam: f64| {
        let v1 = Vector2::new(b, c(lam - a));
        let v2 = Vector2::new(c(lam - d), b.conj());
        fix_phase(if v1.norm_squared() >= v2.norm_squared() { v1 } else { v2 })
    };
    Eigh2 {
        values,
        vectors: [vector_for(values[0]), vector_for(values[1])],
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh2(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = (half * half + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

pub(crate) fn hermitize(m: &Mat2) -> Mat2 {
    (m + m.adjoint()) * c(0.5)
}

fn hermiticity_defect(m: &Mat2) -> f64 {
    let off = (m[(0, 1)] - m[(1, 0)].conj()).norm();
    off.max(m[(0, 0)].im.abs()).max(m[(1, 1)].im.abs())
}

/// A validated qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    m: Mat2,
}

impl QubitState {
    /// Validates `m` as a density matrix.
    ///
    /// Hermiticity and trace must hold within 1e-10. Eigenvalues in
    /// `[-1e-8, 0)` are clipped to zero and the state is renormalized;
    /// anything more negative is rejected.
    pub fn new(m: Mat2) -> Result<Self> {
        let defect = hermiticity_defect(&m);
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Self::clip(hermitize(&m)).map_err(Error::InvalidState)
    }

    /// Re-validates the output of a propagator: Hermitizes, then applies the
    /// clipping policy. PSD violations beyond 1e-8 become integrator failures.
    pub fn from_integrator(m: Mat2) -> Result<Self> {
        let tr = m.trace();
        if !(tr.re.is_finite() && tr.im.is_finite()) || (tr.re - 1.0).abs() > PSD_REJECT {
            return Err(Error::Integrator(format!("propagated trace {tr}")));
        }
        Self::clip(hermitize(&m)).map_err(Error::Integrator)
    }

    fn clip(h: Mat2) -> std::result::Result<Self, String> {
        let [low, _] = eigvalsh2(&h);
        if low < -PSD_REJECT {
            return Err(format!("negative eigenvalue {low:e}"));
        }
        if low < 0.0 {
            let eig = eigh2(&h);
            let total: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
            return Ok(Self {
                m: eig.map(|l| l.max(0.0) / total),
            });
        }
        Ok(Self { m: h })
    }

    /// Wraps a matrix that is already known to be a valid state.
    pub(crate) fn from_trusted(m: Mat2) -> Self {
        Self { m }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: Vector2<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 1e-15) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / c(norm);
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self::from_trusted(Mat2::identity() * c(0.5))
    }

    /// `|0⟩⟨0| = diag(0, 1)`.
    pub fn ket0() -> Self {
        Self::from_trusted(Mat2::new(c(0.0), c(0.0), c(0.0), c(1.0)))
    }

    /// `|1⟩⟨1| = diag(1, 0)`.
    pub fn ket1() -> Self {
        Self::from_trusted(Mat2::new(c(1.0), c(0.0), c(0.0), c(0.0)))
    }

    pub fn diagonal(p_top: f64) -> Result<Self> {
        Self::new(Mat2::new(c(p_top), c(0.0), c(0.0), c(1.0 - p_top)))
    }

    /// `(I + x σx + y σy + z σz) / 2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let m = (Mat2::identity() + pauli_x() * c(r[0]) + pauli_y() * c(r[1]) + pauli_z() * c(r[2]))
            * c(0.5);
        Self::new(m)
    }

    pub fn bloch(&self) -> [f64; 3] {
        let off = self.m[(0, 1)];
        [2.0 * off.re, -2.0 * off.im, self.m[(0, 0)].re - self.m[(1, 1)].re]
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        eigvalsh2(&self.m)
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.eigenvalues()[0].abs() <= tol
    }

    /// `Tr[A ρ]`.
    pub fn expectation(&self, op: &Mat2) -> C64 {
        (op * self.m).trace()
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Mat2) -> Result<Self> {
        Self::from_integrator(u * self.m * u.adjoint())
    }

    /// `log ρ` with eigenvalues floored at [`EIGEN_FLOOR`].
    pub fn log_floored(&self) -> Mat2 {
        eigh2(&self.m).map(|l| l.max(EIGEN_FLOOR).ln())
    }

    /// True when an eigenvalue sits below the logarithm floor.
    pub fn touches_floor(&self) -> bool {
        self.eigenvalues()[0] < EIGEN_FLOOR
    }
}

/// A non-degenerate qubit Hamiltonian with its cached energy eigenbasis.
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian {
    m: Mat2,
    ground_energy: f64,
    excited_energy: f64,
    excited: QubitState,
    ground: QubitState,
}

impl Hamiltonian {
    pub fn new(m: Mat2) -> Result<Self> {
        let defect = hermiticity_defect(&m);
        if defect > HAMILTONIAN_HERMITIAN_TOL {
            return Err(Error::InvalidHamiltonian(format!("not Hermitian (defect {defect:e})")));
        }
        let m = hermitize(&m);
        let eig = eigh2(&m);
        let gap = eig.values[1] - eig.values[0];
        if gap < MIN_GAP {
            return Err(Error::DegenerateHamiltonian(gap));
        }
        let proj = |v: &Vector2<C64>| QubitState::from_trusted(hermitize(&(v * v.adjoint())));
        Ok(Self {
            m,
            ground_energy: eig.values[0],
            excited_energy: eig.values[1],
            excited: proj(&eig.vectors[1]),
            ground: proj(&eig.vectors[0]),
        })
    }

    /// `Ω σx + ω σz`.
    pub fn qubit(rabi: f64, bias: f64) -> Result<Self> {
        Self::new(pauli_x() * c(rabi) + pauli_z() * c(bias))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn excited_energy(&self) -> f64 {
        self.excited_energy
    }

    /// Battery capacity `E_max = E_e − E_g`.
    pub fn capacity(&self) -> f64 {
        self.excited_energy - self.ground_energy
    }

    pub fn excited_state(&self) -> &QubitState {
        &self.excited
    }

    pub fn ground_state(&self) -> &QubitState {
        &self.ground
    }

    /// `|⟨e|ρ|g⟩|`: the coherence of `rho` in the energy eigenbasis.
    pub fn energy_basis_coherence(&self, rho: &QubitState) -> f64 {
        (self.excited.matrix() * rho.matrix() * self.ground.matrix()).norm()
    }

    /// Gibbs state at temperature `temperature` (energy units).
    pub fn gibbs(&self, temperature: f64) -> Result<QubitState> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter(format!("temperature {temperature} must be > 0")));
        }
        // relative weights avoid overflow for small temperatures
        let w_e = (-self.capacity() / temperature).exp();
        let p_e = w_e / (1.0 + w_e);
        Ok(self.energy_diagonal(p_e))
    }

    /// `p_e ρ_e + (1 − p_e) ρ_g`.
    pub fn energy_diagonal(&self, p_e: f64) -> QubitState {
        let p_e = p_e.clamp(0.0, 1.0);
        QubitState::from_trusted(
            self.excited.matrix() * c(p_e) + self.ground.matrix() * c(1.0 - p_e),
        )
    }
}

/// `(ρ_e, ρ_g)`: projectors onto the highest and lowest energy eigenvectors.
pub fn max_min_energy_states(h: &Hamiltonian) -> (QubitState, QubitState) {
    (*h.excited_state(), *h.ground_state())
}

/// Outcome probabilities of a projective energy measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    pub p_e: f64,
    pub p_g: f64,
}

impl OutcomeDistribution {
    pub fn new(p_e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_e) {
            return Err(Error::InvalidParameter(format!("probability {p_e} outside [0, 1]")));
        }
        Ok(Self { p_e, p_g: 1.0 - p_e })
    }

    /// `P_e = Tr[ρ ρ_e]`, `P_g = Tr[ρ ρ_g]`.
    ///
    /// Both traces are evaluated directly so that a small `P_g` keeps its
    /// relative precision instead of being formed as `1 − P_e`.
    pub fn from_state(rho: &QubitState, h: &Hamiltonian) -> Self {
        let p_e = rho.expectation(h.excited_state().matrix()).re.max(0.0);
        let p_g = rho.expectation(h.ground_state().matrix()).re.max(0.0);
        let total = p_e + p_g;
        Self {
            p_e: p_e / total,
            p_g: p_g / total,
        }
    }
}

/// `T(ρ, σ) = ½ Σ |λ(ρ − σ)|`.
pub fn trace_distance(rho: &QubitState, sigma: &QubitState) -> f64 {
    let [a, b] = eigvalsh2(&(rho.matrix() - sigma.matrix()));
    (0.5 * (a.abs() + b.abs())).clamp(0.0, 1.0)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, evaluated with the qubit identity
/// `F = Tr[ρσ] + 2√(det ρ · det σ)`.
///
/// Determinants below `1e-15` are rounding noise of a rank-one state and
/// count as zero; the square root would otherwise amplify them to ~1e-8.
pub fn fidelity(rho: &QubitState, sigma: &QubitState) -> f64 {
    let overlap = (rho.matrix() * sigma.matrix()).trace().re;
    let det = |m: &Mat2| {
        let d = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        if d < 1e-15 {
            0.0
        } else {
            d
        }
    };
    (overlap + 2.0 * (det(rho.matrix()) * det(sigma.matrix())).sqrt()).clamp(0.0, 1.0)
}

/// `Tr[ρ σ]`, which equals the fidelity whenever `pure` is a pure state.
pub fn fidelity_with_pure(pure: &QubitState, sigma: &QubitState) -> f64 {
    sigma.expectation(pure.matrix()).re.clamp(0.0, 1.0)
}

fn entropy_term(p: f64) -> f64 {
    if p > EIGEN_FLOOR {
        -p * p.ln()
    } else {
        0.0
    }
}

/// `−Σ λ log λ`, natural log.
pub fn von_neumann_entropy(rho: &QubitState) -> f64 {
    rho.eigenvalues().iter().map(|&l| entropy_term(l)).sum()
}

/// `H(P) = −P_e log P_e − P_g log P_g`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &OutcomeDistribution) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p.p_e) + term(p.p_g)
}

/// `S(ρ‖σ) = Tr[ρ (log ρ − log σ)]` with floored logarithms.
pub fn relative_entropy(rho: &QubitState, sigma: &QubitState) -> f64 {
    let diff = rho.log_floored() - sigma.log_floored();
    rho.expectation(&diff).re
}

/// `Tr[H ρ]`.
pub fn energy(rho: &QubitState, h: &Hamiltonian) -> f64 {
    rho.expectation(h.matrix()).re
}

/// Energy extractable by unitaries: `Tr[Hρ]` minus the energy of the passive
/// state that pairs the largest population with the lowest energy.
pub fn ergotropy(rho: &QubitState, h: &Hamiltonian) -> f64 {
    let [small, large] = rho.eigenvalues();
    let passive = large * h.ground_energy() + small * h.excited_energy();
    (energy(rho, h) - passive).max(0.0)
}
