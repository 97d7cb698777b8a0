//! Work and loss bookkeeping, entropy production and the cost measures of
//! the stabilization protocol.

use crate::error::{Error, Result};
use crate::liouville::{
    energy_current_d, entropy_production_rate_d, entropy_rate_s_d, propagate, EffectiveTemperature,
    Liouvillian, SteadyState,
};
use crate::protocol::{hermite_interval, Outcome, TrajectoryRecord, TIME_TOL};
use crate::qstate::{
    energy, relative_entropy, shannon_entropy, Hamiltonian, OutcomeDistribution, QubitState,
    EIGEN_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    /// `Tr[H₀(ρ_i − ρ₀)]` of one initialization attempt.
    Evolution,
    /// Realized `Tr[H₀(ρ_post − ρ_pre)]` of one measurement.
    Measurement,
    /// `β⁻¹H(P)` of one measurement.
    Landauer,
    /// Environment loss over an initialization segment.
    EvolutionLoss,
    /// Environment loss over a Zeno period.
    ZenoLoss,
}

impl EntryKind {
    /// Entries that make up `W_stab`.
    pub fn is_work(self) -> bool {
        matches!(self, Self::Evolution | Self::Measurement | Self::Landauer)
    }

    pub fn is_loss(self) -> bool {
        matches!(self, Self::EvolutionLoss | Self::ZenoLoss)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Evolution => "evol",
            Self::Measurement => "meas",
            Self::Landauer => "landauer",
            Self::EvolutionLoss => "evol-loss",
            Self::ZenoLoss => "zeno-loss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub time: f64,
    pub kind: EntryKind,
    pub value: f64,
}

/// Time-ordered energy entries of one run. Cumulative curves are
/// right-continuous: an entry at `t` is included in the value at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    capacity: f64,
    entries: Vec<LedgerEntry>,
}

impl EnergyLedger {
    pub fn new(capacity: f64) -> Self {
        Self {
            capacity,
            entries: Vec::new(),
        }
    }

    /// `E_max`.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn push(&mut self, time: f64, kind: EntryKind, value: f64) {
        debug_assert!(self.entries.last().is_none_or(|e| e.time <= time + TIME_TOL));
        debug_assert!(kind != EntryKind::Landauer || value >= 0.0);
        self.entries.push(LedgerEntry { time, kind, value });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_of(&self, kind: EntryKind) -> f64 {
        self.entries.iter().filter(|e| e.kind == kind).map(|e| e.value).sum()
    }

    /// `W_stab(t_fin)`.
    pub fn work_total(&self) -> f64 {
        self.entries.iter().filter(|e| e.kind.is_work()).map(|e| e.value).sum()
    }

    /// `ΔL(t_fin)`.
    pub fn loss_total(&self) -> f64 {
        self.entries.iter().filter(|e| e.kind.is_loss()).map(|e| e.value).sum()
    }

    /// `W_stab(t)`.
    pub fn work_at(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .take_while(|e| e.time <= t + TIME_TOL)
            .filter(|e| e.kind.is_work())
            .map(|e| e.value)
            .sum()
    }

    /// Cumulative sum of the selected entries at each of the ascending `times`.
    pub fn curve(&self, times: &[f64], select: impl Fn(EntryKind) -> bool) -> Vec<f64> {
        let mut out = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        let mut next = 0;
        for &t in times {
            while next < self.entries.len() && self.entries[next].time <= t + TIME_TOL {
                if select(self.entries[next].kind) {
                    acc += self.entries[next].value;
                }
                next += 1;
            }
            out.push(acc);
        }
        out
    }

    pub fn work_curve(&self, times: &[f64]) -> Vec<f64> {
        self.curve(times, EntryKind::is_work)
    }
}

/// `Tr[H(ρ_i − ρ₀)]`.
pub fn delta_e_evol(rho0: &QubitState, rho_i: &QubitState, h: &Hamiltonian) -> f64 {
    energy(rho_i, h) - energy(rho0, h)
}

/// `Tr[H(ρ_post − ρ_pre)]` for the eigenstate selected by `outcome`.
pub fn measurement_energy(rho_pre: &QubitState, outcome: Outcome, h: &Hamiltonian) -> f64 {
    let post = match outcome {
        Outcome::Excited => h.excited_energy(),
        Outcome::Ground => h.ground_energy(),
    };
    post - energy(rho_pre, h)
}

/// `β⁻¹H(P)` with natural logarithms; zero for `β = ∞`.
pub fn landauer_cost(p: &OutcomeDistribution, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta {beta} must be > 0")));
    }
    Ok(shannon_entropy(p) / beta)
}

/// `∫ Tr[H₀ D[ρ_t]] dt` over states sampled along free evolution.
///
/// Uses the trapezoid rule with the cubic Hermite end correction; the
/// derivative of the integrand comes from the generator, so no extra
/// samples are needed. Sample spacing may be uneven.
pub fn loss_integral(times: &[f64], states: &[QubitState], l: &Liouvillian) -> Result<f64> {
    if times.len() != states.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times for {} states",
            times.len(),
            states.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::InsufficientData("loss integral needs at least 2 samples".into()));
    }
    let current = |rho: &QubitState| {
        (
            l.energy_current(rho.matrix()),
            l.energy_current_slope(rho.matrix()),
        )
    };
    let mut total = 0.0;
    let (mut f0, mut s0) = current(&states[0]);
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("sample times must increase".into()));
        }
        let (f1, s1) = current(&states[k]);
        total += hermite_interval(dt, f0, s0, f1, s1);
        f0 = f1;
        s0 = s1;
    }
    Ok(total)
}

/// `ΔL` of one free-evolution segment of length `duration` from `rho0`,
/// sampled every `step`.
pub fn segment_loss(rho0: &QubitState, l: &Liouvillian, duration: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidParameter(format!("duration {duration}, step {step}")));
    }
    if duration == 0.0 {
        return Ok(0.0);
    }
    let n = (duration / step).ceil().max(1.0) as usize;
    let dt = duration / n as f64;
    let p = l.propagator(dt)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut rho = *rho0;
    for k in 0..=n {
        times.push(k as f64 * dt);
        states.push(rho);
        if k < n {
            rho = crate::liouville::apply_propagator(&rho, &p)?;
        }
    }
    loss_integral(&times, &states, l)
}

/// `1 + Σ_{k=1}^{N̄} P_g^k`, continued to real `N̄` through the closed form
/// `1 + P_g(1 − P_g^N̄)/(1 − P_g)`.
pub fn repetition_factor(p_g: f64, n_bar: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_g) || !(n_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need P_g in [0, 1) and N >= 0, got {p_g} and {n_bar}"
        )));
    }
    Ok(1.0 + p_g * (1.0 - p_g.powf(n_bar)) / (1.0 - p_g))
}

/// Closed-form `⟨W_stab(t_fin)⟩ = (1 + Σ P_g^k) ΔE_evol + m̄ β⁻¹H(P(ρ_α))`.
pub fn total_work_estimate(
    delta_e_evol: f64,
    p_g: f64,
    n_bar: f64,
    m_bar: f64,
    beta: f64,
    rho_alpha: &QubitState,
    h: &Hamiltonian,
) -> Result<f64> {
    if !(m_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!("mean Zeno count {m_bar} < 0")));
    }
    let landauer = landauer_cost(&OutcomeDistribution::from_state(rho_alpha, h), beta)?;
    Ok(repetition_factor(p_g, n_bar)? * delta_e_evol + m_bar * landauer)
}

/// Closed-form `⟨ΔL(t_fin)⟩ = (1 + Σ P_g^k) ΔL_evol + m̄ ΔL_τ`, where every
/// Zeno period starts from `ρ_e` and so loses the same `ΔL_τ`.
pub fn total_loss_estimate(
    delta_l_evol: f64,
    p_g: f64,
    n_bar: f64,
    m_bar: f64,
    zeno_period_loss: f64,
) -> Result<f64> {
    if !(m_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!("mean Zeno count {m_bar} < 0")));
    }
    Ok(repetition_factor(p_g, n_bar)? * delta_l_evol + m_bar * zeno_period_loss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeCosts {
    /// `ς = ⟨W_stab⟩ / E_max`.
    pub varsigma: f64,
    /// `ξ = |⟨W_stab⟩ − ⟨ΔL⟩| / E_max`.
    pub xi: f64,
}

/// `baseline_loss` is the leakage of the uncontrolled battery.
pub fn relative_costs(work: f64, baseline_loss: f64, capacity: f64) -> RelativeCosts {
    RelativeCosts {
        varsigma: work / capacity,
        xi: (work - baseline_loss).abs() / capacity,
    }
}

/// First-order `ξ(t_fin) ≈ (1 + P_g)|ΔE_evol − ΔL_evol| / E_max`, valid when
/// the Zeno work and Zeno losses cancel on average.
pub fn xi_first_order(p_g: f64, delta_e_evol: f64, delta_l_evol: f64, capacity: f64) -> f64 {
    (1.0 + p_g) * (delta_e_evol - delta_l_evol).abs() / capacity
}

/// `ξ(t_fin)` from the full closed forms, with `⟨ΔE_Zeno⟩ = ⟨ΔL_Zeno⟩`.
pub fn xi_closed_form(
    p_g: f64,
    n_bar: f64,
    delta_e_evol: f64,
    delta_l_evol: f64,
    capacity: f64,
) -> Result<f64> {
    Ok(repetition_factor(p_g, n_bar)? * (delta_e_evol - delta_l_evol).abs() / capacity)
}

/// Least-squares slope with the RMS residual of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// `R_stab`: slope of `ς(t)` over the final third of the record.
pub fn stabilization_rate(times: &[f64], varsigma: &[f64], tau: f64) -> Result<RateFit> {
    if times.len() != varsigma.len() || times.len() < 3 {
        return Err(Error::InsufficientData("need matching series of >= 3 samples".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span >= 10.0 * tau) {
        return Err(Error::InsufficientData(format!(
            "record spans {span}, shorter than 10 Zeno periods of {tau}"
        )));
    }
    let start = times[0] + 2.0 * span / 3.0;
    let tail: Vec<(f64, f64)> = times
        .iter()
        .zip(varsigma)
        .filter(|(t, _)| **t >= start)
        .map(|(t, s)| (*t, *s))
        .collect();
    if tail.len() < 2 {
        return Err(Error::InsufficientData("final third holds fewer than 2 samples".into()));
    }
    let n = tail.len() as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let ms = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mt) * (p.1 - ms)).sum();
    let slope = sxy / sxx;
    let intercept = ms - slope * mt;
    let residual = (tail
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}

/// `[Tr[H(ρ_i − ρ₀)] + m̄ β⁻¹H(P(ρ_α))] / τ`.
pub fn avg_power_estimate(
    rho0: &QubitState,
    rho_i: &QubitState,
    h: &Hamiltonian,
    m_bar: f64,
    beta: f64,
    rho_alpha: &QubitState,
    tau: f64,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau {tau} must be > 0")));
    }
    let landauer = landauer_cost(&OutcomeDistribution::from_state(rho_alpha, h), beta)?;
    Ok((delta_e_evol(rho0, rho_i, h) + m_bar * landauer) / tau)
}

/// `Ṗ_e = Tr[L[ρ] ρ_e]` under the uncontrolled generator.
pub fn excited_population_rate(rho: &QubitState, l: &Liouvillian) -> f64 {
    (l.apply(rho.matrix()) * l.hamiltonian().excited_state().matrix())
        .trace()
        .re
}

/// `Σ_NU = −Ṗ_e log(P_e / P_g)`, the rate of change of `H(P)`.
pub fn sigma_nu(rho: &QubitState, l: &Liouvillian) -> f64 {
    let p = OutcomeDistribution::from_state(rho, l.hamiltonian());
    let p_e = p.p_e.clamp(EIGEN_FLOOR, 1.0 - EIGEN_FLOOR);
    let p_g = p.p_g.clamp(EIGEN_FLOOR, 1.0 - EIGEN_FLOOR);
    -excited_population_rate(rho, l) * (p_e / p_g).ln()
}

/// How the number of Zeno measurements in `T_zeno` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZenoCount {
    /// `m̄ = T_zeno / τ`.
    #[default]
    Mean,
    /// `m = ⌊T_zeno / τ⌋`.
    Whole,
}

impl ZenoCount {
    pub fn count(self, tau: f64, t_zeno: f64) -> f64 {
        match self {
            Self::Mean => t_zeno / tau,
            Self::Whole => (t_zeno / tau + 1e-9).floor(),
        }
    }
}

fn check_zeno_args(tau: f64, t_zeno: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau {tau} must be > 0")));
    }
    if !(tau <= t_zeno) {
        return Err(Error::InvalidParameter(format!("tau {tau} exceeds T_zeno {t_zeno}")));
    }
    Ok(())
}

/// `∫₀^τ Ḣ(P) dt = H(P(ρ_α)) − H(P(ρ_e))` along free evolution from `ρ_e`.
pub fn zeno_entropy_increment(tau: f64, l: &Liouvillian) -> Result<f64> {
    let h = l.hamiltonian();
    let start = *h.excited_state();
    let end = propagate(&start, l, tau)?;
    Ok(shannon_entropy(&OutcomeDistribution::from_state(&end, h))
        - shannon_entropy(&OutcomeDistribution::from_state(&start, h)))
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫₀^τ Σ_NU(ρ_t) dt` by quadrature, `ρ_0 = ρ_e`.
///
/// The integrand behaves like `t log t` at the origin; substituting
/// `t = τu⁴` makes it smooth enough for composite Gauss-Legendre.
pub fn zeno_entropy_quadrature(tau: f64, l: &Liouvillian) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau {tau} must be > 0")));
    }
    const PANELS: usize = 48;
    let start = *l.hamiltonian().excited_state();
    let width = 1.0 / PANELS as f64;
    let mut total = 0.0;
    for panel in 0..PANELS {
        let mid = (panel as f64 + 0.5) * width;
        for (x, w) in GAUSS5 {
            let u = mid + 0.5 * width * x;
            let t = tau * u.powi(4);
            let rho = propagate(&start, l, t)?;
            total += 0.5 * width * w * sigma_nu(&rho, l) * 4.0 * tau * u.powi(3);
        }
    }
    Ok(total)
}

/// `σ_Zeno = m ∫₀^τ Ḣ(P) dt` for a Zeno phase lasting `t_zeno`.
pub fn sigma_zeno(tau: f64, t_zeno: f64, l: &Liouvillian, count: ZenoCount) -> Result<f64> {
    check_zeno_args(tau, t_zeno)?;
    Ok(count.count(tau, t_zeno) * zeno_entropy_increment(tau, l)?)
}

/// [`sigma_zeno`] with the integral evaluated by quadrature.
pub fn sigma_zeno_quadrature(
    tau: f64,
    t_zeno: f64,
    l: &Liouvillian,
    count: ZenoCount,
) -> Result<f64> {
    check_zeno_args(tau, t_zeno)?;
    Ok(count.count(tau, t_zeno) * zeno_entropy_quadrature(tau, l)?)
}

/// Energy left unstored by Zeno failures over a phase of length `T_zeno`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstoredEnergy {
    /// `P_g(ρ_α(τ))`, the failure probability per shot.
    pub p_g: f64,
    /// `m̄ P_g`: expected failures, i.e. the lost energy in units of `E_max`.
    pub normalized: f64,
    /// `m̄ P_g E_max`.
    pub energy: f64,
}

pub fn unstored_energy_fraction(
    tau: f64,
    t_zeno: f64,
    l: &Liouvillian,
    count: ZenoCount,
) -> Result<UnstoredEnergy> {
    check_zeno_args(tau, t_zeno)?;
    let h = l.hamiltonian();
    let rho_alpha = propagate(h.excited_state(), l, tau)?;
    let p_g = OutcomeDistribution::from_state(&rho_alpha, h).p_g;
    let normalized = count.count(tau, t_zeno) * p_g;
    Ok(UnstoredEnergy {
        p_g,
        normalized,
        energy: normalized * h.capacity(),
    })
}

/// Rates entering the minimum-power bound along one recorded run.
///
/// Point quantities are evaluated at the grid samples; interval quantities
/// at `[t_k, t_{k+1}]`, where energy jumps from measurements and rotations
/// enter as finite increments.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBoundReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// `Ṡ_D(ρ_t)`.
    pub entropy_rate: Vec<f64>,
    /// `Ė_D(ρ_t)`.
    pub energy_current: Vec<f64>,
    /// `Σ_D(ρ_t)`.
    pub entropy_production: Vec<f64>,
    /// `S(ρ_t‖ρ̄)`.
    pub relative_entropy: Vec<f64>,
    pub temperature: EffectiveTemperature,
    /// `Ė` per interval.
    pub energy_rate: Vec<f64>,
    /// Control power from the energy balance, `Ė − Ė_D`.
    pub control_power: Vec<f64>,
    /// Rate of the recorded `W_stab` entries.
    pub ledger_power: Vec<f64>,
    /// `Ẇ_stab − (Ė − T Ṡ_D)` per interval when `T` is finite.
    pub slack: Option<Vec<f64>>,
}

impl PowerBoundReport {
    pub fn min_entropy_production(&self) -> f64 {
        self.entropy_production.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_slack(&self) -> Option<f64> {
        self.slack
            .as_ref()
            .map(|s| s.iter().sum::<f64>() / s.len().max(1) as f64)
    }

    /// Largest increase of `S(ρ_t‖ρ̄)` between consecutive samples.
    pub fn max_relative_entropy_increase(&self) -> f64 {
        self.relative_entropy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn power_bound_report(
    record: &TrajectoryRecord,
    l: &Liouvillian,
    ss: &SteadyState,
    temperature: EffectiveTemperature,
) -> PowerBoundReport {
    let h = l.hamiltonian();
    let g = l.dephasing();
    let times: Vec<f64> = record.grid_times().collect();
    let states: Vec<&QubitState> = record.grid_states().collect();
    let losses: Vec<f64> = record.grid_losses().collect();
    let work = record.ledger.work_curve(&times);

    let energy_series: Vec<f64> = states.iter().map(|r| energy(r, h)).collect();
    let entropy_rate: Vec<f64> = states.iter().map(|r| entropy_rate_s_d(r, l).value).collect();
    let energy_current: Vec<f64> = states.iter().map(|r| energy_current_d(r, h, g)).collect();
    let entropy_production = states
        .iter()
        .map(|r| entropy_production_rate_d(r, l, ss))
        .collect();
    let rel = states.iter().map(|r| relative_entropy(r, ss.state())).collect();

    let n = times.len().saturating_sub(1);
    let mut energy_rate = Vec::with_capacity(n);
    let mut control_power = Vec::with_capacity(n);
    let mut ledger_power = Vec::with_capacity(n);
    let mut slack = temperature.finite().map(|_| Vec::with_capacity(n));
    for k in 0..n {
        let dt = times[k + 1] - times[k];
        let e_dot = (energy_series[k + 1] - energy_series[k]) / dt;
        let e_d_dot = (losses[k + 1] - losses[k]) / dt;
        let control = e_dot - e_d_dot;
        energy_rate.push(e_dot);
        control_power.push(control);
        ledger_power.push((work[k + 1] - work[k]) / dt);
        if let (Some(s), Some(temp)) = (slack.as_mut(), temperature.finite()) {
            let s_dot = 0.5 * (entropy_rate[k] + entropy_rate[k + 1]);
            s.push(control - (e_dot - temp * s_dot));
        }
    }

    PowerBoundReport {
        times,
        energy: energy_series,
        entropy_rate,
        energy_current,
        entropy_production,
        relative_entropy: rel,
        temperature,
        energy_rate,
        control_power,
        ledger_power,
        slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakEven {
    At(f64),
    /// `⟨W_stab⟩` stays below `E_max` over the whole record.
    BeyondHorizon,
}

impl BreakEven {
    pub fn time(&self) -> Option<f64> {
        match self {
            Self::At(t) => Some(*t),
            Self::BeyondHorizon => None,
        }
    }
}

/// First time `⟨W_stab(t)⟩` reaches `E_max`, interpolated linearly between
/// grid samples.
pub fn break_even_time(times: &[f64], work: &[f64], capacity: f64) -> Result<BreakEven> {
    if times.len() != work.len() || times.is_empty() {
        return Err(Error::InsufficientData("need matching non-empty series".into()));
    }
    let target = capacity * (1.0 - 1e-12);
    if work[0] >= target {
        return Ok(BreakEven::At(times[0]));
    }
    for k in 1..times.len() {
        if work[k] >= target {
            let frac = (capacity - work[k - 1]) / (work[k] - work[k - 1]);
            let frac = frac.clamp(0.0, 1.0);
            return Ok(BreakEven::At(times[k - 1] + frac * (times[k] - times[k - 1])));
        }
    }
    Ok(BreakEven::BeyondHorizon)
}

/// Break-even from a steady cost model: a one-off `initial_work` paid at
/// `t_start`, then constant `power`.
pub fn break_even_estimate(initial_work: f64, power: f64, capacity: f64, t_start: f64) -> BreakEven {
    if initial_work >= capacity {
        return BreakEven::At(t_start);
    }
    if !(power > 0.0) {
        return BreakEven::BeyondHorizon;
    }
    BreakEven::At(t_start + (capacity - initial_work) / power)
}
