mod common;

use oqb::liouville::{
    effective_temperature, energy_current_d, entropy_production_rate_d, entropy_rate_s_d,
    propagate, steady_state, DephasingGenerator, EffectiveTemperature, Liouvillian, SteadyState,
};
use oqb::protocol::{Protocol, ProtocolConfig};
use oqb::qstate::{energy, shannon_entropy, Hamiltonian, OutcomeDistribution, QubitState};
use oqb::thermo::{
    avg_power_estimate, break_even_time, loss_integral, measurement_energy, power_bound_report,
    relative_costs, segment_loss, sigma_nu, stabilization_rate, BreakEven, EntryKind,
};
use oqb::protocol::Outcome;

fn reference_l() -> Liouvillian {
    Liouvillian::new(
        Hamiltonian::qubit(3.0, 1.0).unwrap(),
        DephasingGenerator::computational(2.0 / 3.0).unwrap(),
    )
}

/// `∫₀^T Tr[H D[ρ_t]] dt` from RK4 states and Simpson's rule, refined once
/// and Richardson-extrapolated.
fn loss_oracle(start: &common::M, t: f64) -> f64 {
    let h = common::reference_h();
    let n = common::M::new(common::re(1.0), common::re(0.0), common::re(0.0), common::re(0.0));
    let gamma = 2.0 / 3.0;
    let current = |rho: &common::M| {
        let d = (n * rho * n * common::re(2.0) - n * rho - rho * n) * common::re(gamma);
        (h * d).trace().re
    };
    // Simpson needs an even number of panels
    let panels = 2 * ((t / 2e-4).ceil() as usize).max(1);
    let integrate = |steps: usize| {
        let dt = t / steps as f64;
        let path = common::rk4_path(start, &h, gamma, t, dt);
        common::simpson(|s| current(&path[(s / dt).round() as usize]), t, steps)
    };
    let coarse = integrate(panels);
    let fine = integrate(2 * panels);
    fine + (fine - coarse) / 15.0
}

#[test]
fn initialization_loss_matches_oracle() {
    let l = reference_l();
    let oracle = loss_oracle(QubitState::ket0().matrix(), 0.33);
    let got = segment_loss(&QubitState::ket0(), &l, 0.33, 1e-3).unwrap();
    assert!((got - oracle).abs() < 1e-7, "{got} vs {oracle}");

    // the value booked by a protocol run for its first segment
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.t_fin = 1.0;
    let rec = Protocol::new(cfg).unwrap().run_single(0).unwrap();
    let booked = rec
        .ledger
        .entries()
        .iter()
        .find(|e| e.kind == EntryKind::EvolutionLoss)
        .unwrap();
    assert!((booked.value - oracle).abs() < 1e-7);
}

#[test]
fn loss_integral_refines_stably() {
    let l = reference_l();
    for (start, t) in [
        (QubitState::ket0(), 0.33),
        (*l.hamiltonian().excited_state(), 0.0662),
        (QubitState::ket0(), 10.0),
    ] {
        let a = segment_loss(&start, &l, t, 1e-3).unwrap();
        let b = segment_loss(&start, &l, t, 5e-4).unwrap();
        assert!((a - b).abs() < 1e-6 * b.abs() + 1e-9, "{a} vs {b}");
    }
}

#[test]
fn loss_integral_accepts_uneven_samples() {
    let l = reference_l();
    let times = [0.0, 0.0004, 0.0011, 0.002, 0.0023, 0.003];
    let states: Vec<QubitState> = times
        .iter()
        .map(|t| propagate(l.hamiltonian().excited_state(), &l, *t).unwrap())
        .collect();
    let got = loss_integral(&times, &states, &l).unwrap();
    let oracle = loss_oracle(l.hamiltonian().excited_state().matrix(), 0.003);
    // only the RK4/Simpson path at 1e-4 resolution limits this comparison
    assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
}

#[test]
fn zeno_period_losses_are_identical() {
    let l = reference_l();
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.t_fin = 3.0;
    let proto = Protocol::new(cfg).unwrap();
    let per_period = segment_loss(l.hamiltonian().excited_state(), &l, 0.0662, 1e-3).unwrap();
    let rec = proto.run_single(2).unwrap();
    let zeno: Vec<_> = rec
        .segments
        .iter()
        .filter(|s| s.kind == oqb::protocol::SegmentKind::Zeno && s.complete)
        .collect();
    assert!(!zeno.is_empty());
    for s in zeno {
        assert!((s.loss - per_period).abs() < 1e-9);
    }
}

#[test]
fn measurement_energy_has_zero_mean() {
    let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
    let mut rng = oqb::protocol::RngStream::new(17, 0);
    for _ in 0..10_000 {
        let r = rng.uniform().cbrt();
        let cos_t = 2.0 * rng.uniform() - 1.0;
        let phi = std::f64::consts::TAU * rng.uniform();
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let rho = QubitState::from_bloch([r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t]).unwrap();
        let p = OutcomeDistribution::from_state(&rho, &h);
        let mean = p.p_e * measurement_energy(&rho, Outcome::Excited, &h)
            + p.p_g * measurement_energy(&rho, Outcome::Ground, &h);
        assert!(mean.abs() < 1e-10);
    }
}

#[test]
fn ensemble_measurement_energy_averages_out() {
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.t_fin = 1.0;
    cfg.realizations = 10_000;
    let ens = Protocol::new(cfg).unwrap().run_ensemble().unwrap();
    let m = ens.measurement_energy;
    assert!(m.mean.abs() <= 4.0 * m.stderr, "{} +- {}", m.mean, m.stderr);
}

#[test]
fn rates_vanish_at_the_fixed_point() {
    let l = reference_l();
    let ss = steady_state(&l).unwrap();
    let rho = *ss.state();
    assert!(entropy_rate_s_d(&rho, &l).value.abs() < 1e-12);
    assert!(energy_current_d(&rho, l.hamiltonian(), l.dephasing()).abs() < 1e-12);
    assert!(entropy_production_rate_d(&rho, &l, &ss).abs() < 1e-12);
    assert!(sigma_nu(&rho, &l).abs() < 1e-12);
    assert_eq!(effective_temperature(&ss, l.hamiltonian()).unwrap(), EffectiveTemperature::Unbounded);
}

#[test]
fn uncontrolled_report_contracts_towards_the_fixed_point() {
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.realizations = 1;
    let proto = Protocol::new(cfg).unwrap();
    let l = proto.liouvillian();
    let ss = steady_state(l).unwrap();
    let temperature = effective_temperature(&ss, l.hamiltonian()).unwrap();
    let rec = proto.uncontrolled_run().unwrap();
    let report = power_bound_report(&rec, l, &ss, temperature);
    assert!(report.ledger_power.iter().all(|p| *p == 0.0));
    assert!(report.max_relative_entropy_increase() <= 1e-8);
    assert!(report.min_entropy_production() >= -1e-8);
    assert!(report.slack.is_none());
    // without control the energy balance leaves no work: Ė = Ė_D
    let worst = report
        .control_power
        .iter()
        .fold(0.0f64, |m, p| m.max(p.abs()));
    assert!(worst < 1e-5, "{worst}");

    let controlled = proto.run_single(0).unwrap();
    let report = power_bound_report(&controlled, l, &ss, temperature);
    assert!(report.min_entropy_production() >= -1e-8);
}

#[test]
fn finite_temperature_bound_holds_on_average() {
    // dephasing in the energy basis keeps every energy-diagonal state fixed;
    // the Gibbs state at T = 1 is declared as the reference fixed point
    let h = Hamiltonian::qubit(3.0, 1.0).unwrap();
    let g = DephasingGenerator::new(0.5, *h.excited_state().matrix()).unwrap();
    let l = Liouvillian::new(h, g);
    let ss = SteadyState::from_state(h.gibbs(1.0).unwrap(), &l).unwrap();
    let temperature = effective_temperature(&ss, &h).unwrap();
    assert!((temperature.finite().unwrap() - 1.0).abs() < 1e-9);

    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.dephasing = g;
    cfg.t_fin = 2.0;
    let proto = Protocol::new(cfg).unwrap();
    let mut total = 0.0;
    let runs = 100;
    for index in 0..runs {
        let rec = proto.run_single(index).unwrap();
        let report = power_bound_report(&rec, proto.liouvillian(), &ss, temperature);
        total += report.mean_slack().unwrap();
    }
    assert!(total / runs as f64 >= -1e-6);
}

#[test]
fn closed_free_erasure_battery_pays_exactly_its_capacity() {
    // γ = 0 and β = ∞: per run W telescopes to E(ρ_t) − E(ρ_g) at every
    // measurement, so a charged run has paid exactly E_max
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.dephasing = DephasingGenerator::computational(0.0).unwrap();
    cfg.beta = f64::INFINITY;
    cfg.realizations = 300;
    let proto = Protocol::new(cfg).unwrap();
    let cap = proto.hamiltonian().capacity();
    let ens = proto.run_ensemble().unwrap();
    assert!(ens.mean_work.iter().all(|w| *w <= cap + 1e-9));
    let charged = ens
        .mean_states
        .last()
        .map(|rho| rho.expectation(proto.hamiltonian().excited_state().matrix()).re)
        .unwrap();
    assert!((ens.final_work.mean - cap * charged).abs() < 1e-9);

    let single = proto.run_single(0).unwrap();
    let h = proto.hamiltonian();
    let expected = energy(single.final_state(), h) - energy(h.ground_state(), h);
    if single.events.last().unwrap().outcome == Outcome::Excited {
        assert!((single.ledger.work_total() - expected).abs() < 1e-9);
    }
    match break_even_time(&ens.times, &ens.mean_work, cap).unwrap() {
        BreakEven::At(t) => assert!(t >= proto.config().t_star),
        BreakEven::BeyondHorizon => {}
    }
}

#[test]
fn closed_battery_rate_vanishes_after_charging() {
    let mut cfg = ProtocolConfig::reference_defaults();
    cfg.dephasing = DephasingGenerator::computational(0.0).unwrap();
    cfg.realizations = 400;
    let proto = Protocol::new(cfg).unwrap();
    let ens = proto.run_ensemble().unwrap();
    let cap = proto.hamiltonian().capacity();
    let varsigma: Vec<f64> = ens.mean_work.iter().map(|w| w / cap).collect();
    let fit = stabilization_rate(&ens.times, &varsigma, proto.config().tau).unwrap();
    assert!(fit.slope.abs() < 1e-3, "{}", fit.slope);
}

/// Renewal-reward rate of `W_stab`: a cycle is one Zeno phase (geometric
/// number of periods) followed by recharging (geometric number of attempts).
fn steady_cycle_rate(proto: &Protocol) -> f64 {
    let cfg = proto.config();
    let h = proto.hamiltonian();
    let alpha = OutcomeDistribution::from_state(&proto.zeno_pre_state().unwrap(), h);
    let init = proto.initialization_from_ground().unwrap();
    let p_i = OutcomeDistribution::from_state(&init.rho_i, h);
    let zeno_cost = shannon_entropy(&alpha) / cfg.beta / alpha.p_g;
    let attempt_cost = init.energy_cost + shannon_entropy(&p_i) / cfg.beta;
    let cost = zeno_cost + attempt_cost / p_i.p_e;
    let duration = cfg.tau / alpha.p_g + cfg.t_star / p_i.p_e;
    cost / duration / h.capacity()
}

#[test]
fn stabilization_rate_matches_steady_cycle_algebra() {
    let proto = Protocol::new(ProtocolConfig::reference_defaults()).unwrap();
    let ens = proto.run_ensemble().unwrap();
    let cap = proto.hamiltonian().capacity();
    let varsigma: Vec<f64> = ens
        .mean_work
        .iter()
        .zip(&ens.baseline_loss)
        .map(|(w, l)| relative_costs(*w, *l, cap).varsigma)
        .collect();
    let fit = stabilization_rate(&ens.times, &varsigma, proto.config().tau).unwrap();
    let oracle = steady_cycle_rate(&proto);
    assert!((fit.slope - oracle).abs() < 0.05 * oracle, "{} vs {oracle}", fit.slope);
    assert!(stabilization_rate(&ens.times[..500], &varsigma[..500], proto.config().tau).is_err());
}

#[test]
fn longer_zeno_period_lowers_the_landauer_rate() {
    let rate = |tau: f64| {
        let mut cfg = ProtocolConfig::reference_defaults();
        cfg.tau = tau;
        cfg.realizations = 400;
        let proto = Protocol::new(cfg).unwrap();
        let ens = proto.run_ensemble().unwrap();
        let cap = proto.hamiltonian().capacity();
        let landauer: Vec<f64> = ens.mean_landauer.iter().map(|w| w / cap).collect();
        stabilization_rate(&ens.times, &landauer, tau).unwrap().slope
    };
    let base = rate(0.0662);
    let doubled = rate(0.1324);
    assert!(doubled < base, "{doubled} vs {base}");
}

#[test]
fn power_estimate_at_half_period() {
    let l = reference_l();
    let h = l.hamiltonian();
    let rho_i = propagate(&QubitState::ket0(), &l, 0.33).unwrap();
    let at = |tau: f64| {
        let alpha = propagate(h.excited_state(), &l, tau).unwrap();
        avg_power_estimate(h.ground_state(), &rho_i, h, 1.0, 1.0, &alpha, tau).unwrap()
    };
    let (p, p_half) = (at(0.0662), at(0.0331));
    assert!(p.is_finite() && p_half.is_finite());
    assert!(p_half > p);
}
