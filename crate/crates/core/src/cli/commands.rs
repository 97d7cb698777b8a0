use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::liouville::Liouvillian;
use crate::protocol::{initialize, Protocol};
use crate::qstate::{energy, trace_distance, OutcomeDistribution, QubitState};
use crate::thermo::{
    avg_power_estimate, break_even_estimate, break_even_time, landauer_cost, relative_costs,
    repetition_factor, segment_loss, sigma_zeno, stabilization_rate, total_loss_estimate,
    total_work_estimate, unstored_energy_fraction, xi_closed_form, xi_first_order,
    zeno_entropy_increment, BreakEven, ZenoCount,
};

use super::csv::CsvTable;
use super::{sig6, svg, CliError, RunConfig};

/// Files written by a command and its human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    svg: bool,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path, svg: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            svg,
            files: Vec::new(),
        })
    }

    fn emit(&mut self, name: &str, table: &CsvTable) -> Result<(), CliError> {
        let path = self.dir.join(format!("{name}.csv"));
        table.write(&path)?;
        self.files.push(path);
        if self.svg {
            let path = self.dir.join(format!("{name}.svg"));
            std::fs::write(&path, svg::render(table, name)).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            self.files.push(path);
        }
        Ok(())
    }

    fn finish(self, summary: String) -> CommandOutput {
        CommandOutput {
            files: self.files,
            summary,
        }
    }
}

fn element_table<'a>(
    times: impl Iterator<Item = f64>,
    states: impl Iterator<Item = &'a QubitState>,
) -> CsvTable {
    let mut t = CsvTable::new(["t", "rho11", "re_rho12", "im_rho12"]);
    for (time, rho) in times.zip(states) {
        let off = rho.entry(0, 1);
        t.push(vec![time, rho.entry(0, 0).re, off.re, off.im]);
    }
    t
}

fn relative_deviation(estimate: f64, reference: f64) -> f64 {
    (estimate - reference).abs() / reference.abs()
}

/// Ensemble run: averaged elements, designated single runs and fidelity.
pub fn fig1(cfg: &RunConfig, svg: bool) -> Result<CommandOutput, CliError> {
    let proto = Protocol::new(cfg.protocol()?)?;
    let ens = proto.run_ensemble()?;
    let mut out = Writer::new(&cfg.out_dir, svg)?;

    out.emit("fig1_avg", &element_table(ens.times.iter().copied(), ens.mean_states.iter()))?;

    let mut singles = vec![0u64];
    if let Some(k) = ens.contrasting_index() {
        singles.push(k);
    }
    for &k in &singles {
        let rec = proto.run_single(k)?;
        out.emit(
            &format!("fig1_single_{k}"),
            &element_table(rec.grid_times(), rec.grid_states()),
        )?;
    }

    let mut fid = CsvTable::new(["t", "F", "F_mean"]);
    for k in 0..ens.times.len() {
        fid.push(vec![ens.times[k], ens.fidelity[k], ens.mean_fidelity[k]]);
    }
    out.emit("fig1_fidelity", &fid)?;

    let mut s = String::new();
    writeln!(s, "realizations          {}", ens.realizations).unwrap();
    writeln!(s, "fidelity at t=0       {}", sig6(ens.fidelity[0])).unwrap();
    writeln!(s, "fidelity at t_fin     {}", sig6(*ens.fidelity.last().unwrap())).unwrap();
    writeln!(
        s,
        "zeno failure rate     {} +- {}",
        sig6(ens.zeno_failure_rate()),
        sig6(ens.zeno_failure_stderr())
    )
    .unwrap();
    writeln!(s, "mean re-inits         {}", sig6(ens.mean_reinitializations)).unwrap();
    writeln!(s, "mean zeno count       {}", sig6(ens.mean_zeno_measurements)).unwrap();
    writeln!(s, "single runs           {singles:?}").unwrap();
    Ok(out.finish(s))
}

/// Zeno entropic cost and unstored energy on a grid of periods.
pub fn fig2(
    cfg: &RunConfig,
    tau_grid: &[f64],
    t_zeno: &[f64],
    count: ZenoCount,
    svg: bool,
) -> Result<CommandOutput, CliError> {
    if tau_grid.iter().any(|t| !(*t > 0.0)) || tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("tau grid must be positive and ascending".into()));
    }
    if t_zeno.iter().any(|t| !(*t > 0.0)) {
        return Err(CliError::Config("Zeno durations must be positive".into()));
    }
    let pc = cfg.protocol()?;
    let l = Liouvillian::new(pc.hamiltonian, pc.dephasing);

    let label = |t: &f64| format!("{t}");
    let mut sigma = CsvTable::new(
        ["tau".to_string(), "integral".to_string()]
            .into_iter()
            .chain(t_zeno.iter().map(|t| format!("sigma_T{}", label(t)))),
    );
    let mut inset = CsvTable::new(
        ["tau".to_string(), "P_g".to_string()]
            .into_iter()
            .chain(t_zeno.iter().map(|t| format!("mPg_T{}", label(t)))),
    );
    let mut skipped = 0;
    for &tau in tau_grid {
        let mut srow = vec![tau, zeno_entropy_increment(tau, &l)?];
        let rho_alpha = crate::liouville::propagate(pc.hamiltonian.excited_state(), &l, tau)?;
        let mut irow = vec![tau, OutcomeDistribution::from_state(&rho_alpha, &pc.hamiltonian).p_g];
        for &tz in t_zeno {
            if tau > tz {
                log::warn!("skipping tau = {tau} > T_zeno = {tz}");
                skipped += 1;
                srow.push(f64::NAN);
                irow.push(f64::NAN);
            } else {
                srow.push(sigma_zeno(tau, tz, &l, count)?);
                irow.push(unstored_energy_fraction(tau, tz, &l, count)?.normalized);
            }
        }
        sigma.push(srow);
        inset.push(irow);
    }
    let mut out = Writer::new(&cfg.out_dir, svg)?;
    out.emit("fig2_sigma", &sigma)?;
    out.emit("fig2_inset", &inset)?;

    let mut s = String::new();
    writeln!(s, "periods               {}", tau_grid.len()).unwrap();
    writeln!(s, "zeno durations        {t_zeno:?}").unwrap();
    writeln!(s, "count                 {count:?}").unwrap();
    writeln!(s, "skipped entries       {skipped}").unwrap();
    Ok(out.finish(s))
}

/// Uncontrolled evolution from `|0⟩⟨0|`.
pub fn uncontrolled(cfg: &RunConfig, svg: bool) -> Result<CommandOutput, CliError> {
    let proto = Protocol::new(cfg.protocol()?)?;
    let rec = proto.uncontrolled_run()?;
    let h = proto.hamiltonian();
    let excited = h.excited_state();

    let mut s1 = CsvTable::new(["t", "rho11", "rho22", "re_rho12", "im_rho12"]);
    let mut s2 = CsvTable::new(["t", "trace_distance", "P_e"]);
    let (mut min_td, mut max_pe) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, rho) in rec.grid_times().zip(rec.grid_states()) {
        let off = rho.entry(0, 1);
        s1.push(vec![t, rho.entry(0, 0).re, rho.entry(1, 1).re, off.re, off.im]);
        let td = trace_distance(rho, excited);
        let pe = OutcomeDistribution::from_state(rho, h).p_e;
        min_td = min_td.min(td);
        max_pe = max_pe.max(pe);
        s2.push(vec![t, td, pe]);
    }
    let mut out = Writer::new(&cfg.out_dir, svg)?;
    out.emit("s1_elements", &s1)?;
    out.emit("s2_metrics", &s2)?;

    let mut s = String::new();
    writeln!(s, "min trace distance    {}", sig6(min_td)).unwrap();
    writeln!(s, "max P_e               {}", sig6(max_pe)).unwrap();
    Ok(out.finish(s))
}

fn fmt_break_even(b: BreakEven) -> String {
    match b {
        BreakEven::At(t) => sig6(t),
        BreakEven::BeyondHorizon => "beyond horizon".into(),
    }
}

/// Ensemble ledgers, relative costs and closed-form cross-checks.
pub fn ledger(cfg: &RunConfig, svg: bool) -> Result<CommandOutput, CliError> {
    let pc = cfg.protocol()?;
    let proto = Protocol::new(pc.clone())?;
    let ens = proto.run_ensemble()?;
    let h = proto.hamiltonian();
    let l = proto.liouvillian();
    let cap = h.capacity();

    let mut table = CsvTable::new(["t", "W_stab", "Delta_L", "varsigma", "xi", "Delta_L_controlled"]);
    let mut varsigma = Vec::with_capacity(ens.times.len());
    for k in 0..ens.times.len() {
        let rc = relative_costs(ens.mean_work[k], ens.baseline_loss[k], cap);
        varsigma.push(rc.varsigma);
        table.push(vec![
            ens.times[k],
            ens.mean_work[k],
            ens.baseline_loss[k],
            rc.varsigma,
            rc.xi,
            ens.mean_loss[k],
        ]);
    }
    let mut out = Writer::new(&cfg.out_dir, svg)?;
    out.emit("ledger", &table)?;

    let init = proto.initialization_from_ground()?;
    let rho_alpha = proto.zeno_pre_state()?;
    let p_g = ens.init_failure_rate();
    let n_bar = ens.mean_reinitializations;
    let m_bar = ens.mean_zeno_measurements;
    let work_est = total_work_estimate(init.energy_cost, p_g, n_bar, m_bar, pc.beta, &rho_alpha, h)?;
    let loss_evol = segment_loss(&init.rotation.state, l, pc.t_star, pc.step)?;
    let loss_zeno = segment_loss(h.excited_state(), l, pc.tau, pc.step)?;
    let loss_est = total_loss_estimate(loss_evol, p_g, n_bar, m_bar, loss_zeno)?;
    let rate = stabilization_rate(&ens.times, &varsigma, pc.tau);
    let break_even = break_even_time(&ens.times, &ens.mean_work, cap)?;
    let zeno_landauer = landauer_cost(&OutcomeDistribution::from_state(&rho_alpha, h), pc.beta)?;
    let power = avg_power_estimate(h.ground_state(), &init.rho_i, h, m_bar, pc.beta, &rho_alpha, pc.tau)?;
    let break_even_est = break_even_estimate(
        repetition_factor(p_g, n_bar)? * init.energy_cost,
        zeno_landauer / pc.tau,
        cap,
        pc.t_star,
    );
    let xi_exact = xi_closed_form(p_g, n_bar, init.energy_cost, loss_evol, cap)?;
    let xi_first = xi_first_order(p_g, init.energy_cost, loss_evol, cap);
    let last = ens.times.len() - 1;

    let mut s = String::new();
    writeln!(s, "E_max                 {}", sig6(cap)).unwrap();
    writeln!(s, "<W_stab(t_fin)>       {} +- {}", sig6(ens.final_work.mean), sig6(ens.final_work.stderr)).unwrap();
    writeln!(s, "<Delta_L(t_fin)>      {} (uncontrolled {})", sig6(ens.final_loss.mean), sig6(ens.baseline_loss[last])).unwrap();
    writeln!(s, "varsigma(0)           {}", sig6(varsigma[0])).unwrap();
    writeln!(s, "varsigma(t_fin)       {}", sig6(varsigma[last])).unwrap();
    match rate {
        Ok(fit) => writeln!(s, "R_stab                {} (fit residual {})", sig6(fit.slope), sig6(fit.residual)).unwrap(),
        Err(e) => writeln!(s, "R_stab                unavailable: {e}").unwrap(),
    }
    writeln!(s, "break-even            {}", fmt_break_even(break_even)).unwrap();
    writeln!(s, "break-even estimate   {}", fmt_break_even(break_even_est)).unwrap();
    writeln!(s, "power estimate        {}", sig6(power)).unwrap();
    writeln!(s, "Delta_E_evol          {}", sig6(init.energy_cost)).unwrap();
    writeln!(s, "P_g (init)            {}", sig6(p_g)).unwrap();
    writeln!(s, "mean re-inits         {}", sig6(n_bar)).unwrap();
    writeln!(s, "mean zeno count       {}", sig6(m_bar)).unwrap();
    writeln!(s, "<Delta_E_meas>        {} +- {}", sig6(ens.measurement_energy.mean), sig6(ens.measurement_energy.stderr)).unwrap();
    writeln!(
        s,
        "W closed form         {} (deviation {})",
        sig6(work_est),
        sig6(relative_deviation(work_est, ens.final_work.mean))
    )
    .unwrap();
    writeln!(
        s,
        "Delta_L closed form   {} (deviation {})",
        sig6(loss_est),
        sig6(relative_deviation(loss_est, ens.final_loss.mean))
    )
    .unwrap();
    writeln!(s, "xi(t_fin) closed form {} (first order {})", sig6(xi_exact), sig6(xi_first)).unwrap();
    Ok(out.finish(s))
}

/// Initialization trade-offs as a function of the first measurement time.
pub fn sweep_tstar(cfg: &RunConfig, t_grid: &[f64], svg: bool) -> Result<CommandOutput, CliError> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("t_star grid must be non-negative and ascending".into()));
    }
    let pc = cfg.protocol()?;
    let l = Liouvillian::new(pc.hamiltonian, pc.dephasing);
    let h = &pc.hamiltonian;
    let e = h.excited_state();
    let target_coherence = e.entry(0, 1).norm_sqr();
    let target_population = e.entry(0, 0).re.powi(2);

    let mut table = CsvTable::new([
        "t_star",
        "P_e",
        "coherence_mismatch",
        "population_mismatch",
        "delta_E_evol",
        "delta_L_evol",
    ]);
    for &t in t_grid {
        let init = initialize(h.ground_state(), &l, t)?;
        let rho = init.rho_i;
        table.push(vec![
            t,
            OutcomeDistribution::from_state(&rho, h).p_e,
            (rho.entry(0, 1).norm_sqr() - target_coherence).abs(),
            (rho.entry(0, 0).re.powi(2) - target_population).abs(),
            init.energy_cost,
            segment_loss(&init.rotation.state, &l, t, pc.step)?,
        ]);
    }
    let mut out = Writer::new(&cfg.out_dir, svg)?;
    out.emit("tstar_sweep", &table)?;

    let argmin = |col: &str| {
        let xs = table.column("t_star").unwrap();
        let ys = table.column(col).unwrap();
        xs.into_iter()
            .zip(ys)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|p| p.0)
            .unwrap()
    };
    let mut s = String::new();
    writeln!(s, "candidates            {}", t_grid.len()).unwrap();
    writeln!(s, "coherence minimizer   {}", sig6(argmin("coherence_mismatch"))).unwrap();
    writeln!(s, "population minimizer  {}", sig6(argmin("population_mismatch"))).unwrap();
    writeln!(s, "energy at rho_g       {}", sig6(energy(h.ground_state(), h))).unwrap();
    Ok(out.finish(s))
}
