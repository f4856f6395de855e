use crate::cli::config::RunConfig;
use crate::cli::sweep::run_points;
use crate::cli::table::{plain, sci, time, Table};
use crate::devices::PairSystem;
use crate::dynamics::{compose_gate, zero_wait_gate, GateContext, GateMode, GateReport, PulseSchedule};
use crate::error::{CzError, Result};
use crate::metrics::delta_cz;
use crate::oracle::leakage_estimate;

/// Relative Richardson tolerance for the two-level amplitude.
const ORACLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub table: Table,
    pub reports: Vec<GateReport>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Dressed-energy shifts δE_m = (Ẽ_m − Ẽ₀₀) − (E_m − E₀₀) and Δ_CZ per T_c.
pub fn cmd_spectrum(cfg: &RunConfig, jobs: usize) -> Result<CommandOutput> {
    let sys = PairSystem::new(&cfg.device_config())?;
    let bare = sys.bare_spectrum(3);
    let grid = sorted(cfg.sweep.t_c.values());
    let rows = run_points(&grid, jobs, |&t| -> Result<Vec<String>> {
        let tab = sys.dressed(t, 3)?;
        let shift = |l| -> Result<f64> { Ok(tab.energy(l)? - bare.energy(l)?) };
        Ok(vec![plain(t), sci(shift((0, 1))?), sci(shift((1, 0))?), sci(shift((1, 1))?), sci(delta_cz(&tab)?)])
    });
    let mut table = Table::new(vec!["t_c", "de_01", "de_10", "de_11", "delta_cz"]);
    for r in rows {
        table.push(r?);
    }
    Ok(CommandOutput { table, reports: vec![] })
}

/// Leakage out of |11⟩ after the switch-on ramp, full and two-level.
pub fn cmd_leakage(cfg: &RunConfig, jobs: usize) -> Result<CommandOutput> {
    let sys = PairSystem::new(&cfg.device_config())?;
    let ctx = GateContext::new(&sys, cfg.t0, &cfg.propagate_options())?;
    let grid = sorted(cfg.sweep.tau_s.values());
    let rows = run_points(&grid, jobs, |&tau| -> Result<(Vec<String>, Option<GateReport>)> {
        let ramp = ctx.ramp(tau)?;
        let p02 = ramp.amplitude(&ctx.dressed, (0, 2), (1, 1))?.norm_sqr();
        let p20 = ramp.amplitude(&ctx.dressed, (2, 0), (1, 1))?.norm_sqr();
        let schedule = PulseSchedule::new(tau, 0.0, cfg.t0)?;
        let oracle = leakage_estimate(&sys, &schedule, ORACLE_TOL)?;
        let report = ctx.report(&ramp, tau, GateMode::Fixed, Some(0.0)).ok();
        Ok((vec![plain(tau), sci(p02), sci(p20), sci(oracle.probability)], report))
    });
    let mut table = Table::new(vec!["tau_s", "p_11_02", "p_11_20", "p_oracle"]);
    let mut reports = vec![];
    for r in rows {
        let (row, rep) = r?;
        table.push(row);
        reports.extend(rep);
    }
    Ok(CommandOutput { table, reports })
}

fn gate_row(t0: f64, r: &Result<GateReport>) -> Vec<String> {
    match r {
        Ok(g) => vec![plain(t0), sci(g.error), time(g.gate_time), time(g.tau_w), time(g.tau_s), "ok".into()],
        Err(e) => vec![plain(t0), String::new(), String::new(), String::new(), String::new(), e.code().into()],
    }
}

/// Gate error and time per T₀. Per-point failures are recorded in the
/// `status` column and do not stop the sweep.
pub fn cmd_gate(cfg: &RunConfig, mode: GateMode, jobs: usize) -> Result<CommandOutput> {
    let sys = PairSystem::new(&cfg.device_config())?;
    let opts = cfg.propagate_options();
    let grid = sorted(cfg.sweep.t0.values());
    let (lo, hi) = cfg.sweep.tau_s_range;
    let results = run_points(&grid, jobs, |&t0| -> Result<GateReport> {
        match mode {
            GateMode::Plateau => compose_gate(&sys, &PulseSchedule::new(cfg.tau_s, 0.0, t0)?, GateMode::Plateau, &opts),
            GateMode::ZeroWait => zero_wait_gate(&sys, t0, lo, hi, &opts),
            GateMode::Fixed => Err(CzError::Config("gate sweeps run in plateau or zero-wait mode".into())),
        }
    });
    let mut table = Table::new(vec!["t0", "error", "gate_time_ns", "tau_w_ns", "tau_s_ns", "status"]);
    let mut reports = vec![];
    for (t0, r) in grid.iter().zip(results) {
        table.push(gate_row(*t0, &r));
        reports.extend(r.ok());
    }
    Ok(CommandOutput { table, reports })
}

/// Zero-wait gates for every configured device.
pub fn cmd_compare(cfgs: &[RunConfig], jobs: usize) -> Result<CommandOutput> {
    let systems = cfgs.iter().map(|c| PairSystem::new(&c.device_config())).collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = cfgs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| sorted(c.sweep.compare_t0.values()).into_iter().map(move |t| (i, t)))
        .collect();
    let results = run_points(&points, jobs, |&(i, t0)| {
        let (lo, hi) = cfgs[i].sweep.tau_s_range;
        zero_wait_gate(&systems[i], t0, lo, hi, &cfgs[i].propagate_options())
    });
    let mut table = Table::new(vec!["device", "t0", "gate_time_ns", "error", "status"]);
    let mut reports = vec![];
    for (&(i, t0), r) in points.iter().zip(results) {
        let name = cfgs[i].device.name().to_string();
        match &r {
            Ok(g) => table.push(vec![name, plain(t0), time(g.gate_time), sci(g.error), "ok".into()]),
            Err(e) => table.push(vec![name, plain(t0), String::new(), String::new(), e.code().into()]),
        }
        reports.extend(r.ok());
    }
    Ok(CommandOutput { table, reports })
}
