//! The measurement-based stabilization protocol.
//!
//! One realization runs: fast y-rotation of the input state, free open
//! evolution for `t_star`, a projective energy measurement; on an excited
//! outcome a Zeno loop of measurements every `tau`, on a ground outcome (at
//! any stage) a re-initialization from `ρ_g`. Measurements and rotations are
//! instantaneous; free evolution consumes protocol time up to `t_fin`.
//!
//! States are recorded on the common grid `k·h` plus at every event time,
//! where the sample holds the post-event state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liouville::{apply_propagator, propagate, DephasingGenerator, Liouvillian, Mat4};
use crate::qstate::{
    c, energy, fidelity_with_pure, Hamiltonian, Mat2, OutcomeDistribution, QubitState,
};
use crate::thermo::{landauer_cost, EnergyLedger, EntryKind};

/// Two protocol times closer than this are treated as equal.
pub const TIME_TOL: f64 = 1e-9;

const ENSEMBLE_CHUNK: usize = 64;

/// Parameters of one stabilization experiment (natural units, ħ = 1).
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub hamiltonian: Hamiltonian,
    pub dephasing: DephasingGenerator,
    /// Input state; `None` means the ground state `ρ_g`.
    pub initial_state: Option<QubitState>,
    pub t_star: f64,
    pub tau: f64,
    pub t_fin: f64,
    /// Inverse temperature of the erasure reservoir; `f64::INFINITY` makes erasure free.
    pub beta: f64,
    /// Recording step `h`.
    pub step: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

impl ProtocolConfig {
    /// `H₀ = 3σx + σz`, `γ = 2/3`, `t* = 0.33`, `τ = 0.0662`, `t_fin = 10`,
    /// `β = 1`, `h = 1e-3`, 1000 realizations, seed 42.
    pub fn reference_defaults() -> Self {
        Self {
            hamiltonian: Hamiltonian::qubit(3.0, 1.0).expect("non-degenerate"),
            dephasing: DephasingGenerator::computational(2.0 / 3.0).expect("valid rate"),
            initial_state: None,
            t_star: 0.33,
            tau: 0.0662,
            t_fin: 10.0,
            beta: 1.0,
            step: 1e-3,
            realizations: 1000,
            master_seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let times = [self.step, self.tau, self.t_star, self.t_fin];
        if times.iter().any(|t| !t.is_finite()) {
            return bad("protocol times must be finite".into());
        }
        if !(self.step > 0.0) {
            return bad(format!("recording step {} must be > 0", self.step));
        }
        if !(self.step <= self.tau && self.tau <= self.t_star && self.t_star <= self.t_fin) {
            return bad(format!(
                "need 0 < h <= tau <= t_star <= t_fin, got h={} tau={} t_star={} t_fin={}",
                self.step, self.tau, self.t_star, self.t_fin
            ));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta {} must be > 0", self.beta));
        }
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        Ok(())
    }

    pub fn initial_state(&self) -> QubitState {
        self.initial_state
            .unwrap_or(*self.hamiltonian.ground_state())
    }

    pub fn liouvillian(&self) -> Liouvillian {
        Liouvillian::new(self.hamiltonian, self.dephasing)
            .with_cached_steps(&[self.step, self.tau, self.t_star])
    }

    /// Number of common-grid points `k·h` in `[0, t_fin]`.
    pub fn grid_len(&self) -> usize {
        (self.t_fin / self.step + 1e-6).floor() as usize + 1
    }

    pub fn grid_times(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|k| k as f64 * self.step).collect()
    }
}

/// Deterministic per-realization random stream: ChaCha8 keyed by the master
/// seed, with the realization index selecting one of its 2⁶⁴ streams.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        Self(rng)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}

/// `exp(−iφσ_y)`.
pub fn rotation_y(angle: f64) -> Mat2 {
    let (s, co) = angle.sin_cos();
    Mat2::new(c(co), c(-s), c(s), c(co))
}

/// Result of the instantaneous initialization rotation.
#[derive(Debug, Clone, Copy)]
pub struct FastUnitary {
    pub state: QubitState,
    pub angle: f64,
    /// The input had a σ_y Bloch component, which no y-rotation can remove.
    pub off_plane: bool,
}

/// Rotates `rho0` about the y-axis so that its population on `|0⟩ = (0,1)ᵀ`
/// is maximal.
///
/// The angle is `φ = ½ atan2(x, −z)` for Bloch components `(x, z)`; for the
/// ground state of a real Hamiltonian this coincides (mod π) with
/// `arctan(ρ_g⁽¹¹⁾ / ρ_g⁽²¹⁾)`, and `|1⟩⟨1|` maps through `φ = π/2`.
pub fn fast_unitary_init(rho0: &QubitState) -> Result<FastUnitary> {
    let [x, y, z] = rho0.bloch();
    let angle = if x.hypot(z) < 1e-12 { 0.0 } else { 0.5 * x.atan2(-z) };
    let off_plane = y.abs() > 1e-9;
    if off_plane {
        log::debug!("fast unitary input has sigma_y component {y:e}; only the x-z part is rotated");
    }
    Ok(FastUnitary {
        state: rho0.conjugate_by(&rotation_y(angle))?,
        angle,
        off_plane,
    })
}

/// Fast rotation followed by free evolution for `t_star`.
#[derive(Debug, Clone, Copy)]
pub struct Initialization {
    pub rotation: FastUnitary,
    pub rho_i: QubitState,
    /// `Tr[H₀(ρ_i − ρ₀)]`.
    pub energy_cost: f64,
}

pub fn initialize(rho0: &QubitState, l: &Liouvillian, t_star: f64) -> Result<Initialization> {
    let rotation = fast_unitary_init(rho0)?;
    let rho_i = propagate(&rotation.state, l, t_star)?;
    let h = l.hamiltonian();
    Ok(Initialization {
        rotation,
        rho_i,
        energy_cost: energy(&rho_i, h) - energy(rho0, h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Excited,
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// The very first measurement after the initial charge.
    FirstMeasurement,
    Zeno,
    /// First measurement after a re-initialization.
    Reinit,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::FirstMeasurement => "first-measurement",
            Phase::Zeno => "zeno",
            Phase::Reinit => "reinit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementEvent {
    pub time: f64,
    pub phase: Phase,
    pub outcome: Outcome,
    /// `P_e` of the pre-measurement state.
    pub p_e: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// `β⁻¹ H(P)`.
    pub landauer: f64,
}

impl MeasurementEvent {
    pub fn energy_change(&self) -> f64 {
        self.energy_after - self.energy_before
    }
}

/// Projective energy measurement: collapses to `ρ_e` iff `u < P_e`.
pub fn projective_measurement(
    rho: &QubitState,
    h: &Hamiltonian,
    beta: f64,
    rng: &mut RngStream,
    time: f64,
    phase: Phase,
) -> Result<(MeasurementEvent, QubitState)> {
    let p = OutcomeDistribution::from_state(rho, h);
    let (outcome, post) = if rng.uniform() < p.p_e {
        (Outcome::Excited, *h.excited_state())
    } else {
        (Outcome::Ground, *h.ground_state())
    };
    let event = MeasurementEvent {
        time,
        phase,
        outcome,
        p_e: p.p_e,
        energy_before: energy(rho, h),
        energy_after: energy(&post, h),
        landauer: landauer_cost(&p, beta)?,
    };
    Ok((event, post))
}

/// Free evolution for `tau` followed by a Zeno-phase measurement.
pub fn zeno_step(
    rho: &QubitState,
    l: &Liouvillian,
    tau: f64,
    beta: f64,
    rng: &mut RngStream,
    time: f64,
) -> Result<(MeasurementEvent, QubitState)> {
    let pre = propagate(rho, l, tau)?;
    projective_measurement(&pre, l.hamiltonian(), beta, rng, time + tau, Phase::Zeno)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Instantaneous rotation at the start of an initialization attempt.
    FastUnitary,
    /// Free evolution from the rotated state towards `ρ_i`.
    Initialization,
    /// Free evolution between two Zeno measurements.
    Zeno,
    /// Measurement-free evolution of the uncontrolled battery.
    Uncontrolled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: f64,
    pub end: f64,
    /// `∫ Tr[H₀ D[ρ_t]] dt` over the segment.
    pub loss: f64,
    /// Energy injected by the rotation (fast-unitary segments only).
    pub work: f64,
    /// False when the segment was cut short by `t_fin`.
    pub complete: bool,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Everything recorded along one realization.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub step: f64,
    /// Sample times: the common grid merged with event times.
    pub times: Vec<f64>,
    /// Right-continuous states at `times`.
    pub states: Vec<QubitState>,
    /// Cumulative environment losses at `times`.
    pub losses: Vec<f64>,
    /// Positions in `times` of the common-grid points `k·h`.
    pub grid: Vec<usize>,
    pub events: Vec<MeasurementEvent>,
    pub segments: Vec<Segment>,
    pub ledger: EnergyLedger,
    pub reinitializations: usize,
    pub zeno_measurements: usize,
    pub zeno_failures: usize,
}

impl TrajectoryRecord {
    pub fn grid_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().map(|&i| self.times[i])
    }

    pub fn grid_states(&self) -> impl Iterator<Item = &QubitState> + '_ {
        self.grid.iter().map(|&i| &self.states[i])
    }

    pub fn grid_losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().map(|&i| self.losses[i])
    }

    /// Sum of segment durations; equals `t_fin` for a complete run.
    pub fn elapsed(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn final_state(&self) -> &QubitState {
        self.states.last().expect("records are never empty")
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn summary(&self) -> Summary {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Summary {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// Ensemble averages over independent realizations on the common grid.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean_states: Vec<QubitState>,
    /// `F(ρ_e, ⟨ρ_t⟩)`.
    pub fidelity: Vec<f64>,
    /// `⟨F(ρ_e, ρ_t)⟩`.
    pub mean_fidelity: Vec<f64>,
    /// `⟨W_stab(t)⟩`.
    pub mean_work: Vec<f64>,
    /// `⟨ΔL(t)⟩` under control.
    pub mean_loss: Vec<f64>,
    /// `ΔL(t)` of the uncontrolled battery started from `|0⟩⟨0|`.
    pub baseline_loss: Vec<f64>,
    /// Cumulative Landauer part of `⟨W_stab(t)⟩`.
    pub mean_landauer: Vec<f64>,
    pub realizations: usize,
    /// `N̄`: mean number of re-initializations per run.
    pub mean_reinitializations: f64,
    /// `m̄`: mean number of Zeno measurements per run.
    pub mean_zeno_measurements: f64,
    pub zeno_measurements: usize,
    pub zeno_failures: usize,
    /// Initialization measurements (first and after every re-initialization).
    pub init_measurements: usize,
    pub init_failures: usize,
    pub final_work: Summary,
    pub final_loss: Summary,
    /// Realized `ΣΔE_meas` per run.
    pub measurement_energy: Summary,
    /// Per realization: whether any Zeno measurement failed.
    pub zeno_failed: Vec<bool>,
}

impl EnsembleResult {
    pub fn zeno_failure_rate(&self) -> f64 {
        if self.zeno_measurements == 0 {
            0.0
        } else {
            self.zeno_failures as f64 / self.zeno_measurements as f64
        }
    }

    /// Binomial standard error of [`Self::zeno_failure_rate`].
    pub fn zeno_failure_stderr(&self) -> f64 {
        if self.zeno_measurements == 0 {
            return 0.0;
        }
        let p = self.zeno_failure_rate();
        (p * (1.0 - p) / self.zeno_measurements as f64).sqrt()
    }

    /// Lowest index `k > 0` whose failure status differs from realization 0,
    /// so that the pair shows both a clean and a failing run when possible.
    pub fn contrasting_index(&self) -> Option<u64> {
        let first = *self.zeno_failed.first()?;
        self.zeno_failed
            .iter()
            .skip(1)
            .position(|&f| f != first)
            .map(|k| k as u64 + 1)
    }

    /// Empirical `P_g` of the initialization measurements.
    pub fn init_failure_rate(&self) -> f64 {
        if self.init_measurements == 0 {
            0.0
        } else {
            self.init_failures as f64 / self.init_measurements as f64
        }
    }
}

struct SegmentEnd {
    state: QubitState,
    end: f64,
    loss: f64,
    truncated: bool,
}

/// Sample sink for one run.
struct Recorder {
    step: f64,
    grid_len: usize,
    next_grid: usize,
    cumulative_loss: f64,
    times: Vec<f64>,
    states: Vec<QubitState>,
    losses: Vec<f64>,
    grid: Vec<usize>,
}

impl Recorder {
    fn new(step: f64, grid_len: usize) -> Self {
        Self {
            step,
            grid_len,
            next_grid: 0,
            cumulative_loss: 0.0,
            times: Vec::with_capacity(grid_len + 256),
            states: Vec::with_capacity(grid_len + 256),
            losses: Vec::with_capacity(grid_len + 256),
            grid: Vec::with_capacity(grid_len),
        }
    }

    fn next_grid_time(&self) -> Option<f64> {
        (self.next_grid < self.grid_len).then_some(self.next_grid as f64 * self.step)
    }

    /// Records the state at `t`; a sample within tolerance of the next grid
    /// point takes that grid time.
    fn point(&mut self, t: f64, state: QubitState) {
        let mut time = t;
        let mut on_grid = false;
        if let Some(tk) = self.next_grid_time() {
            if (tk - t).abs() <= TIME_TOL {
                time = tk;
                on_grid = true;
            }
        }
        if let Some(&last) = self.times.last() {
            if time <= last + TIME_TOL {
                // same instant as the previous sample: keep the later state
                let i = self.times.len() - 1;
                self.states[i] = state;
                self.losses[i] = self.cumulative_loss;
                if on_grid && self.grid.last() != Some(&i) {
                    self.grid.push(i);
                    self.next_grid += 1;
                }
                return;
            }
        }
        if on_grid {
            self.grid.push(self.times.len());
            self.next_grid += 1;
        }
        self.times.push(time);
        self.states.push(state);
        self.losses.push(self.cumulative_loss);
    }
}

/// Cubic Hermite (endpoint-corrected trapezoid) rule on one interval.
pub(crate) fn hermite_interval(dt: f64, f0: f64, s0: f64, f1: f64, s1: f64) -> f64 {
    0.5 * dt * (f0 + f1) - dt * dt / 12.0 * (s1 - s0)
}

/// A configured protocol with its propagators precomputed.
#[derive(Debug, Clone)]
pub struct Protocol {
    config: ProtocolConfig,
    liouvillian: Liouvillian,
    step_prop: Mat4,
    tau_prop: Mat4,
    t_star_prop: Mat4,
    initial: QubitState,
    initial_rotation: FastUnitary,
    reset_rotation: FastUnitary,
}

impl Protocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let liouvillian = config.liouvillian();
        let initial = config.initial_state();
        Ok(Self {
            step_prop: liouvillian.propagator(config.step)?,
            tau_prop: liouvillian.propagator(config.tau)?,
            t_star_prop: liouvillian.propagator(config.t_star)?,
            initial_rotation: fast_unitary_init(&initial)?,
            reset_rotation: fast_unitary_init(config.hamiltonian.ground_state())?,
            initial,
            liouvillian,
            config,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        self.liouvillian.hamiltonian()
    }

    /// `ρ_α = exp(Lτ) ρ_e`, the mean state just before a Zeno measurement.
    pub fn zeno_pre_state(&self) -> Result<QubitState> {
        apply_propagator(self.hamiltonian().excited_state(), &self.tau_prop)
    }

    /// `ρ_i` reached from `ρ_g` by one initialization.
    pub fn initialization_from_ground(&self) -> Result<Initialization> {
        initialize(self.hamiltonian().ground_state(), &self.liouvillian, self.config.t_star)
    }

    /// Free evolution from `(t0, rho0)` for `duration`, cut at `t_fin`.
    /// Grid points strictly inside the segment are recorded; the returned
    /// state is the one just before any event at the segment end.
    fn evolve(
        &self,
        rec: &mut Recorder,
        rho0: &QubitState,
        t0: f64,
        duration: f64,
        full: Option<&Mat4>,
    ) -> Result<SegmentEnd> {
        let t_fin = self.config.t_fin;
        let nominal = t0 + duration;
        let truncated = nominal > t_fin + TIME_TOL;
        let end = if truncated { t_fin } else { nominal };
        let l = &self.liouvillian;
        let h = self.config.step;

        let mut current = *rho0;
        let mut t_cur = t0;
        let mut f_cur = l.energy_current(current.matrix());
        let mut s_cur = l.energy_current_slope(current.matrix());
        let mut loss = 0.0;

        while let Some(tk) = rec.next_grid_time() {
            if tk >= end - TIME_TOL {
                break;
            }
            let dt = tk - t_cur;
            let next = if (dt - h).abs() < 1e-12 {
                apply_propagator(&current, &self.step_prop)?
            } else {
                apply_propagator(&current, &l.propagator(dt)?)?
            };
            let f_next = l.energy_current(next.matrix());
            let s_next = l.energy_current_slope(next.matrix());
            let piece = hermite_interval(dt, f_cur, s_cur, f_next, s_next);
            loss += piece;
            rec.cumulative_loss += piece;
            rec.point(tk, next);
            current = next;
            t_cur = tk;
            f_cur = f_next;
            s_cur = s_next;
        }

        let end_state = match full {
            Some(p) if !truncated => apply_propagator(rho0, p)?,
            _ => propagate(rho0, l, end - t0)?,
        };
        let dt = end - t_cur;
        if dt > 0.0 {
            let piece = hermite_interval(
                dt,
                f_cur,
                s_cur,
                l.energy_current(end_state.matrix()),
                l.energy_current_slope(end_state.matrix()),
            );
            loss += piece;
            rec.cumulative_loss += piece;
        }
        Ok(SegmentEnd {
            state: end_state,
            end,
            loss,
            truncated,
        })
    }

    /// One realization, deterministic in `(master_seed, index)`.
    pub fn run_single(&self, index: u64) -> Result<TrajectoryRecord> {
        let cfg = &self.config;
        let h = self.hamiltonian();
        let mut rng = RngStream::new(cfg.master_seed, index);
        let mut rec = Recorder::new(cfg.step, cfg.grid_len());
        let mut ledger = EnergyLedger::new(h.capacity());
        let mut events = Vec::new();
        let mut segments = Vec::new();
        let (mut reinitializations, mut zeno_measurements, mut zeno_failures) = (0, 0, 0);

        let excited = *h.excited_state();
        let ground = *h.ground_state();
        let mut t = 0.0;
        let mut attempt_input = self.initial;
        let mut rotation = self.initial_rotation;
        let mut phase = Phase::FirstMeasurement;

        'attempts: loop {
            if t >= cfg.t_fin - TIME_TOL && t > 0.0 {
                rec.point(t, attempt_input);
                break;
            }
            segments.push(Segment {
                kind: SegmentKind::FastUnitary,
                start: t,
                end: t,
                loss: 0.0,
                work: energy(&rotation.state, h) - energy(&attempt_input, h),
                complete: true,
            });
            rec.point(t, rotation.state);

            let seg = self.evolve(&mut rec, &rotation.state, t, cfg.t_star, Some(&self.t_star_prop))?;
            segments.push(Segment {
                kind: SegmentKind::Initialization,
                start: t,
                end: seg.end,
                loss: seg.loss,
                work: 0.0,
                complete: !seg.truncated,
            });
            ledger.push(seg.end, EntryKind::EvolutionLoss, seg.loss);
            t = seg.end;
            if seg.truncated {
                rec.point(t, seg.state);
                break;
            }

            ledger.push(t, EntryKind::Evolution, energy(&seg.state, h) - energy(&attempt_input, h));
            let (event, post) = projective_measurement(&seg.state, h, cfg.beta, &mut rng, t, phase)?;
            ledger.push(t, EntryKind::Landauer, event.landauer);
            ledger.push(t, EntryKind::Measurement, event.energy_change());
            events.push(event);

            if event.outcome == Outcome::Ground {
                reinitializations += 1;
                attempt_input = post;
                rotation = self.reset_rotation;
                phase = Phase::Reinit;
                continue 'attempts;
            }

            // Zeno protection
            rec.point(t, excited);
            loop {
                if t >= cfg.t_fin - TIME_TOL {
                    break 'attempts;
                }
                let seg = self.evolve(&mut rec, &excited, t, cfg.tau, Some(&self.tau_prop))?;
                segments.push(Segment {
                    kind: SegmentKind::Zeno,
                    start: t,
                    end: seg.end,
                    loss: seg.loss,
                    work: 0.0,
                    complete: !seg.truncated,
                });
                ledger.push(seg.end, EntryKind::ZenoLoss, seg.loss);
                t = seg.end;
                if seg.truncated {
                    rec.point(t, seg.state);
                    break 'attempts;
                }

                let (event, post) =
                    projective_measurement(&seg.state, h, cfg.beta, &mut rng, t, Phase::Zeno)?;
                ledger.push(t, EntryKind::Landauer, event.landauer);
                ledger.push(t, EntryKind::Measurement, event.energy_change());
                events.push(event);
                zeno_measurements += 1;

                if event.outcome == Outcome::Ground {
                    zeno_failures += 1;
                    reinitializations += 1;
                    attempt_input = post;
                    rotation = self.reset_rotation;
                    phase = Phase::Reinit;
                    continue 'attempts;
                }
                rec.point(t, excited);
            }
        }
        debug_assert_eq!(ground, *h.ground_state());

        Ok(TrajectoryRecord {
            index,
            step: cfg.step,
            times: rec.times,
            states: rec.states,
            losses: rec.losses,
            grid: rec.grid,
            events,
            segments,
            ledger,
            reinitializations,
            zeno_measurements,
            zeno_failures,
        })
    }

    /// Measurement-free evolution from `|0⟩⟨0|` over `[0, t_fin]`.
    pub fn uncontrolled_run(&self) -> Result<TrajectoryRecord> {
        let cfg = &self.config;
        let mut rec = Recorder::new(cfg.step, cfg.grid_len());
        let start = QubitState::ket0();
        rec.point(0.0, start);
        let seg = self.evolve(&mut rec, &start, 0.0, cfg.t_fin, None)?;
        rec.point(seg.end, seg.state);
        let mut ledger = EnergyLedger::new(self.hamiltonian().capacity());
        ledger.push(seg.end, EntryKind::EvolutionLoss, seg.loss);
        Ok(TrajectoryRecord {
            index: 0,
            step: cfg.step,
            times: rec.times,
            states: rec.states,
            losses: rec.losses,
            grid: rec.grid,
            events: Vec::new(),
            segments: vec![Segment {
                kind: SegmentKind::Uncontrolled,
                start: 0.0,
                end: seg.end,
                loss: seg.loss,
                work: 0.0,
                complete: true,
            }],
            ledger,
            reinitializations: 0,
            zeno_measurements: 0,
            zeno_failures: 0,
        })
    }

    /// Runs all realizations and reduces them in index order, so the result
    /// does not depend on how many worker threads executed them.
    pub fn run_ensemble(&self) -> Result<EnsembleResult> {
        let cfg = &self.config;
        let n = cfg.realizations;
        let times = cfg.grid_times();
        let len = times.len();
        let excited = *self.hamiltonian().excited_state();

        let mut sum_states = vec![Mat2::zeros(); len];
        let mut sum_fid = vec![0.0; len];
        let mut sum_work = vec![0.0; len];
        let mut sum_loss = vec![0.0; len];
        let mut sum_landauer = vec![0.0; len];
        let (mut reinit, mut zeno_meas, mut zeno_fail) = (0usize, 0usize, 0usize);
        let (mut init_meas, mut init_fail) = (0usize, 0usize);
        let (mut work, mut loss, mut meas_energy) =
            (Moments::default(), Moments::default(), Moments::default());
        let mut zeno_failed = Vec::with_capacity(n);

        for chunk_start in (0..n).step_by(ENSEMBLE_CHUNK) {
            let chunk_end = (chunk_start + ENSEMBLE_CHUNK).min(n);
            let records: Vec<Result<TrajectoryRecord>> = (chunk_start..chunk_end)
                .into_par_iter()
                .map(|i| self.run_single(i as u64))
                .collect();
            for record in records {
                let record = record?;
                if record.grid.len() != len {
                    return Err(Error::Integrator(format!(
                        "realization {} produced {} grid samples, expected {len}",
                        record.index,
                        record.grid.len()
                    )));
                }
                for (k, rho) in record.grid_states().enumerate() {
                    sum_states[k] += rho.matrix();
                    sum_fid[k] += fidelity_with_pure(&excited, rho);
                }
                for (k, l) in record.grid_losses().enumerate() {
                    sum_loss[k] += l;
                }
                let w = record.ledger.work_curve(&times);
                let land = record.ledger.curve(&times, |k| k == EntryKind::Landauer);
                for k in 0..len {
                    sum_work[k] += w[k];
                    sum_landauer[k] += land[k];
                }

                reinit += record.reinitializations;
                zeno_meas += record.zeno_measurements;
                zeno_fail += record.zeno_failures;
                for e in record.events.iter().filter(|e| e.phase != Phase::Zeno) {
                    init_meas += 1;
                    if e.outcome == Outcome::Ground {
                        init_fail += 1;
                    }
                }
                zeno_failed.push(record.zeno_failures > 0);
                work.push(record.ledger.work_total());
                loss.push(*record.losses.last().unwrap_or(&0.0));
                meas_energy.push(record.ledger.total_of(EntryKind::Measurement));
            }
        }

        let inv = 1.0 / n as f64;
        let mean_states = sum_states
            .iter()
            .map(|m| QubitState::new(if n == 1 { *m } else { m * c(inv) }))
            .collect::<Result<Vec<_>>>()?;
        let fidelity = mean_states
            .iter()
            .map(|rho| fidelity_with_pure(&excited, rho))
            .collect();
        let scale = |v: Vec<f64>| v.into_iter().map(|x| x * inv).collect::<Vec<_>>();
        let baseline = self.uncontrolled_run()?;

        Ok(EnsembleResult {
            mean_states,
            fidelity,
            mean_fidelity: scale(sum_fid),
            mean_work: scale(sum_work),
            mean_loss: scale(sum_loss),
            baseline_loss: baseline.grid_losses().collect(),
            mean_landauer: scale(sum_landauer),
            realizations: n,
            mean_reinitializations: reinit as f64 * inv,
            mean_zeno_measurements: zeno_meas as f64 * inv,
            zeno_measurements: zeno_meas,
            zeno_failures: zeno_fail,
            init_measurements: init_meas,
            init_failures: init_fail,
            final_work: work.summary(),
            final_loss: loss.summary(),
            measurement_energy: meas_energy.summary(),
            zeno_failed,
            times,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{max_min_energy_states, trace_distance};

    fn reference() -> ProtocolConfig {
        ProtocolConfig::reference_defaults()
    }

    #[test]
    fn config_validation() {
        assert!(reference().validate().is_ok());
        let mut c = reference();
        c.tau = 0.5;
        assert!(c.validate().is_err());
        let mut c = reference();
        c.beta = 0.0;
        assert!(c.validate().is_err());
        let mut c = reference();
        c.realizations = 0;
        assert!(c.validate().is_err());
        let mut c = reference();
        c.beta = f64::INFINITY;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn fast_unitary_maps_reference_ground_state_to_ket0() {
        let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
        let (_, g) = max_min_energy_states(&h);
        let fu = fast_unitary_init(&g).unwrap();
        assert!(trace_distance(&fu.state, &QubitState::ket0()) < 1e-9);
        assert!(!fu.off_plane);
        // agrees with arctan(ρ_g⁽¹¹⁾ / ρ_g⁽²¹⁾) modulo π
        let printed = (g.entry(0, 0).re / g.entry(1, 0).re).atan();
        let diff = (fu.angle - printed).rem_euclid(std::f64::consts::PI);
        assert!(diff < 1e-12 || (std::f64::consts::PI - diff) < 1e-12);
    }

    #[test]
    fn fast_unitary_angle_maximizes_ket0_population() {
        let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
        let g = *h.ground_state();
        let fu = fast_unitary_init(&g).unwrap();
        let pop = |phi: f64| g.conjugate_by(&rotation_y(phi)).unwrap().entry(1, 1).re;
        let best_grid = (0..20_000)
            .map(|k| -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / 20_000.0)
            .map(pop)
            .fold(f64::MIN, f64::max);
        assert!(pop(fu.angle) >= best_grid - 1e-12);
        assert!((pop(fu.angle) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fast_unitary_edge_inputs() {
        let fu = fast_unitary_init(&QubitState::ket0()).unwrap();
        assert_eq!(fu.angle, 0.0);
        assert!(trace_distance(&fu.state, &QubitState::ket0()) < 1e-15);

        let fu = fast_unitary_init(&QubitState::ket1()).unwrap();
        assert!((fu.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(trace_distance(&fu.state, &QubitState::ket0()) < 1e-12);

        let off = QubitState::from_bloch([0.0, 0.6, 0.0]).unwrap();
        assert!(fast_unitary_init(&off).unwrap().off_plane);

        let mixed = QubitState::from_bloch([0.3, 0.0, 0.4]).unwrap();
        let fu = fast_unitary_init(&mixed).unwrap();
        assert!((fu.state.entry(1, 1).re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn initialize_examples() {
        let cfg = reference();
        let l = cfg.liouvillian();
        let g = *cfg.hamiltonian.ground_state();
        let init = initialize(&g, &l, 0.33).unwrap();
        let direct = propagate(&QubitState::ket0(), &l, 0.33).unwrap();
        assert!(trace_distance(&init.rho_i, &direct) < 1e-9);
        let h = &cfg.hamiltonian;
        assert!((init.energy_cost - (energy(&direct, h) - energy(&g, h))).abs() < 1e-9);

        let zero = initialize(&g, &l, 0.0).unwrap();
        assert!(trace_distance(&zero.rho_i, &QubitState::ket0()) < 1e-9);

        let closed = Liouvillian::new(*h, DephasingGenerator::computational(0.0).unwrap());
        let period = std::f64::consts::PI / 10f64.sqrt();
        let back = initialize(&g, &closed, period).unwrap();
        assert!(trace_distance(&back.rho_i, &QubitState::ket0()) < 1e-6);
    }

    #[test]
    fn measurement_of_eigenstate_is_certain() {
        let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
        let e = *h.excited_state();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let (ev, post) = projective_measurement(&e, &h, 1.0, &mut rng, 0.0, Phase::Zeno).unwrap();
            assert_eq!(ev.outcome, Outcome::Excited);
            assert_eq!(post, e);
            assert!(ev.landauer.abs() < 1e-12);
        }
        let (ev, _) = projective_measurement(
            &QubitState::maximally_mixed(),
            &h,
            1.0,
            &mut rng,
            0.0,
            Phase::FirstMeasurement,
        )
        .unwrap();
        assert!((ev.p_e - 0.5).abs() < 1e-12);
        let after = ev.energy_after;
        assert!((after - h.excited_energy()).abs() < 1e-12 || (after - h.ground_energy()).abs() < 1e-12);
    }

    #[test]
    fn measurement_frequencies_follow_born_rule() {
        let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
        let rho = QubitState::ket0();
        let p_e = OutcomeDistribution::from_state(&rho, &h).p_e;
        let mut rng = RngStream::new(7, 3);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| {
                projective_measurement(&rho, &h, 1.0, &mut rng, 0.0, Phase::FirstMeasurement)
                    .unwrap()
                    .0
                    .outcome
                    == Outcome::Excited
            })
            .count();
        let freq = hits as f64 / n as f64;
        let se = (p_e * (1.0 - p_e) / n as f64).sqrt();
        assert!((freq - p_e).abs() < 3.0 * se, "freq {freq} vs {p_e}");
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = RngStream::new(42, 5);
            (0..8).map(|_| r.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut r = RngStream::new(42, 5);
            (0..8).map(|_| r.uniform()).collect()
        };
        let other: Vec<f64> = {
            let mut r = RngStream::new(42, 6);
            (0..8).map(|_| r.uniform()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, other);

        // smoke-level independence: correlation between neighbouring streams
        let n = 20_000;
        let mut x = RngStream::new(9, 0);
        let mut y = RngStream::new(9, 1);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (x.uniform(), y.uniform())).collect();
        let mean = |f: &dyn Fn(&(f64, f64)) -> f64| pairs.iter().map(f).sum::<f64>() / n as f64;
        let (mx, my) = (mean(&|p| p.0), mean(&|p| p.1));
        let cov = mean(&|p| (p.0 - mx) * (p.1 - my));
        let corr = cov / (1.0 / 12.0);
        assert!(corr.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn zeno_step_examples() {
        let cfg = reference();
        let h = cfg.hamiltonian;
        let closed = Liouvillian::new(h, DephasingGenerator::computational(0.0).unwrap());
        let mut rng = RngStream::new(3, 0);
        for tau in [0.01, 0.0662, 1.3] {
            let (ev, _) = zeno_step(h.excited_state(), &closed, tau, 1.0, &mut rng, 0.0).unwrap();
            assert!((ev.p_e - 1.0).abs() < 1e-9);
            assert_eq!(ev.outcome, Outcome::Excited);
            assert_eq!(ev.phase, Phase::Zeno);
            assert!((ev.time - tau).abs() < 1e-15);
        }

        let l = cfg.liouvillian();
        let p_g = |tau: f64| {
            let rho = propagate(h.excited_state(), &l, tau).unwrap();
            OutcomeDistribution::from_state(&rho, &h).p_g
        };
        for k in 0..=29 {
            let tau = 0.01 + k as f64 * 0.01;
            assert!(p_g(tau / 2.0) < p_g(tau), "tau={tau}");
        }
    }

    #[test]
    fn single_run_is_deterministic_and_accounts_time() {
        let mut cfg = reference();
        cfg.t_fin = 3.0;
        let proto = Protocol::new(cfg).unwrap();
        let a = proto.run_single(11).unwrap();
        let b = proto.run_single(11).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.states, b.states);
        assert_eq!(a.events, b.events);
        assert!((a.elapsed() - 3.0).abs() < 1e-9);
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(a.grid.len(), proto.config().grid_len());
        for e in &a.events {
            assert!(a.times.iter().any(|t| (t - e.time).abs() <= TIME_TOL));
        }
    }

    #[test]
    fn closed_battery_run_has_no_losses() {
        let mut cfg = reference();
        cfg.dephasing = DephasingGenerator::computational(0.0).unwrap();
        cfg.t_fin = 2.0;
        let proto = Protocol::new(cfg).unwrap();
        for index in 0..10 {
            let rec = proto.run_single(index).unwrap();
            assert!(rec.ledger.loss_total().abs() < 1e-12);
            assert!(rec.ledger.work_total().is_finite());
            assert_eq!(rec.zeno_failures, 0);
        }
    }

    #[test]
    fn ensemble_of_one_reduces_to_single_run() {
        let mut cfg = reference();
        cfg.t_fin = 1.5;
        cfg.realizations = 1;
        let proto = Protocol::new(cfg).unwrap();
        let ens = proto.run_ensemble().unwrap();
        let single = proto.run_single(0).unwrap();
        for (avg, one) in ens.mean_states.iter().zip(single.grid_states()) {
            assert_eq!(avg, one);
        }
        assert_eq!(ens.final_work.mean, single.ledger.work_total());
    }
}
