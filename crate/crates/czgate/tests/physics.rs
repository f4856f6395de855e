use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4};

use czgate::devices::{DeviceConfig, DeviceKind, PairSystem, COMPUTATIONAL};
use czgate::dynamics::{
    gate_block, propagate_observed, waiting_time, GateContext, PropagateOptions, PulseSchedule, RampHamiltonian,
    RampPhase, TRACKED_EXCITATION,
};
use czgate::linalg::{wrap_phase, RMat, SplitBlock};
use czgate::metrics::{delta_cz, gate_error, ComputationalBlock};

fn system(kind: DeviceKind) -> PairSystem {
    PairSystem::new(&DeviceConfig::preset(kind)).unwrap()
}

fn bare_columns(sys: &PairSystem) -> RMat {
    RMat::from_columns(&COMPUTATIONAL.iter().map(|&l| sys.bare.vector(l)).collect::<Vec<_>>())
}

fn overlaps(p: &RMat, x: &SplitBlock) -> Matrix4<Complex<f64>> {
    let o = x.project_onto(p);
    Matrix4::from_fn(|i, j| Complex::new(o.re[(i, j)], o.im[(i, j)]))
}

#[test]
fn switch_off_by_transposition_matches_direct_propagation() {
    let sys = system(DeviceKind::TransmonPair);
    let (t0, tau_s) = (0.01, 15.0);
    let opts = PropagateOptions::default();
    let ctx = GateContext::new(&sys, t0, &opts).unwrap();
    let ramp = ctx.ramp(tau_s).unwrap();
    let (_, dphi_on) = czgate::dynamics::switching_phases(&ramp, &ctx.dressed).unwrap();
    let tau_w = waiting_time(dphi_on, ctx.delta_cz).unwrap();

    let schedule = PulseSchedule::new(tau_s, tau_w, t0).unwrap();
    let off = RampHamiltonian { system: &sys, schedule, phase: RampPhase::Off };
    let bare = bare_columns(&sys);

    // Full gate with U_off propagated explicitly.
    let held = ctx.plateau.evolve(&ramp.block, tau_w);
    let done = propagate_observed(&off, 0.0, tau_s, &held, Some(&bare), &opts).unwrap();
    let direct = ComputationalBlock::new(overlaps(&bare, &done.block));
    let transposed = gate_block(&ramp, &ctx.plateau, tau_w);
    let diff = (direct.w - transposed.w).map(|z| z.norm()).max();
    assert!(diff < 1e-5, "{diff}");
    assert!((gate_error(&direct) - gate_error(&transposed)).abs() < 1e-7);

    // Switch-off phases φ_m = −arg⟨m|U_off|m̃⟩ mirror the switch-on phases.
    let dressed = RMat::from_columns(&COMPUTATIONAL.iter().map(|&l| ctx.dressed.vector(l).unwrap().into_owned()).collect::<Vec<_>>());
    let u = propagate_observed(&off, 0.0, tau_s, &SplitBlock::from_real(dressed), Some(&bare), &opts).unwrap();
    let o = overlaps(&bare, &u.block);
    let phi: Vec<f64> = (0..4).map(|k| -o[(k, k)].arg()).collect();
    let dphi_off = wrap_phase(phi[3] + phi[0] - phi[2] - phi[1]);
    assert!((dphi_off - dphi_on).abs() < 1e-3, "{dphi_off} vs {dphi_on}");
}

#[test]
fn leakage_falls_with_switching_time() {
    let sys = system(DeviceKind::TransmonPair);
    let ctx = GateContext::new(&sys, 0.015, &PropagateOptions::default()).unwrap();
    let p: Vec<f64> = [5.0, 15.0, 30.0]
        .iter()
        .map(|&tau| ctx.ramp(tau).unwrap().amplitude(&ctx.dressed, (0, 2), (1, 1)).unwrap().norm_sqr())
        .collect();
    assert!(p[0] > 10.0 * p[1] && p[1] > 10.0 * p[2], "{p:?}");
}

#[test]
fn weak_coupling_shifts_are_first_order() {
    for kind in [DeviceKind::TransmonPair, DeviceKind::GatemonPair, DeviceKind::HPair] {
        let sys = system(kind);
        for t_c in [5e-4, 1e-3, 2e-3] {
            let v = sys.interaction(t_c).unwrap();
            let tab = sys.dressed(t_c, TRACKED_EXCITATION).unwrap();
            for &m in &COMPUTATIONAL {
                let b = sys.bare.vector(m);
                let first = b.dot(&(&v * &b));
                let shift = tab.energy(m).unwrap() + tab.ground - sys.bare.energy(m);
                assert!(((shift - first) / first).abs() < 0.1, "{kind:?} T_c = {t_c} {m:?}: {shift} vs {first}");
            }
        }
    }
}

#[test]
fn level_repulsion_grows_with_transmission() {
    let sys = system(DeviceKind::TransmonPair);
    let mut prev = 0.0;
    for k in 4..=20 {
        let tab = sys.dressed(k as f64 * 1e-3, TRACKED_EXCITATION).unwrap();
        let d = delta_cz(&tab).unwrap().abs();
        assert!(d > prev, "T_c = {}", k as f64 * 1e-3);
        prev = d;
    }
}

#[test]
fn basis_truncation_is_converged() {
    let base = DeviceConfig::preset(DeviceKind::TransmonPair);
    let big = DeviceConfig { levels: 14, ..base.clone() };
    let a = PairSystem::new(&base).unwrap();
    let b = PairSystem::new(&big).unwrap();
    for t_c in [0.005, 0.01, 0.015] {
        let da = delta_cz(&a.dressed(t_c, TRACKED_EXCITATION).unwrap()).unwrap();
        let db = delta_cz(&b.dressed(t_c, TRACKED_EXCITATION).unwrap()).unwrap();
        assert!(((da - db) / db).abs() < 0.01, "T_c = {t_c}: {da} vs {db}");
    }
}

#[test]
fn phase_accumulates_at_the_cz_rate_on_the_plateau() {
    let sys = system(DeviceKind::GatemonPair);
    let ctx = GateContext::new(&sys, 0.012, &PropagateOptions::default()).unwrap();
    let ramp = ctx.ramp(30.0).unwrap();
    let w0 = gate_block(&ramp, &ctx.plateau, 0.0).phases();
    let tau = 3.0;
    let w1 = gate_block(&ramp, &ctx.plateau, tau).phases();
    let cond = |p: [f64; 4]| p[3] + p[0] - p[1] - p[2];
    let gained = wrap_phase(cond(w1) - cond(w0));
    assert!((gained - wrap_phase(2.0 * PI * ctx.delta_cz * tau)).abs() < 1e-3, "{gained} vs {}", ctx.delta_cz);
}
