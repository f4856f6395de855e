//! Switch-on / wait / switch-off propagation and gate bookkeeping.
//!
//! Propagation uses the fourth-order commutator-free Magnus scheme: each
//! step is a product of two exponentials of Hamiltonians sampled at the
//! Gauss nodes, and each exponential is applied through an eigendecomposition,
//! so every step is unitary to machine precision.
//!
//! All device Hamiltonians are real symmetric, so the switch-off propagator
//! of the time-reversed ramp is the transpose of the switch-on propagator.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4};
use serde::{Deserialize, Serialize};

use crate::devices::{Label, PairSystem, SpectrumTable, COMPUTATIONAL};
use crate::error::{CzError, Result};
use crate::hilbert::{BasisTag, OperatorMatrix};
use crate::linalg::{sym_eigen, wrap_phase, RMat, SplitBlock, SymEigen};
use crate::metrics::{delta_cz, fidelity, ComputationalBlock};
use crate::roots::brent;

/// Dressed-state labels tracked during a gate (all n₁ + n₂ ≤ 3).
pub const TRACKED_EXCITATION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    #[default]
    Erf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub tau_s: f64,
    pub tau_w: f64,
    pub t0: f64,
    #[serde(default)]
    pub shape: PulseShape,
}

impl PulseSchedule {
    pub fn new(tau_s: f64, tau_w: f64, t0: f64) -> Result<Self> {
        if !(tau_s > 0.0 && tau_s.is_finite()) {
            return Err(CzError::Parameter(format!("switching time {tau_s} must be positive")));
        }
        if !(tau_w >= 0.0 && tau_w.is_finite()) {
            return Err(CzError::Parameter(format!("waiting time {tau_w} must be non-negative")));
        }
        if !(0.0..=1.0).contains(&t0) {
            return Err(CzError::Parameter(format!("T_0 = {t0} outside [0, 1]")));
        }
        Ok(PulseSchedule { tau_s, tau_w, t0, shape: PulseShape::Erf })
    }

    pub fn gate_time(&self) -> f64 {
        2.0 * self.tau_s + self.tau_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampPhase {
    On,
    Plateau,
    Off,
}

fn erf_ramp(t: f64, tau_s: f64, t0: f64) -> f64 {
    let lo = libm::erf(-2.0);
    let hi = libm::erf(2.0);
    let x = t.clamp(0.0, tau_s);
    t0 * (libm::erf(4.0 * x / tau_s - 2.0) - lo) / (hi - lo)
}

/// Time derivative of the on-ramp.
pub fn ramp_rate(t: f64, schedule: &PulseSchedule) -> f64 {
    let norm = libm::erf(2.0) - libm::erf(-2.0);
    let u = 4.0 * t / schedule.tau_s - 2.0;
    schedule.t0 * (4.0 / schedule.tau_s) * (2.0 / PI.sqrt()) * (-u * u).exp() / norm
}

/// Coupler transmission at time `t` within the given phase. The erf ramp is
/// renormalized so it is exactly 0 at the start and T₀ at the end.
pub fn transmission_profile(t: f64, schedule: &PulseSchedule, phase: RampPhase) -> f64 {
    match phase {
        RampPhase::On => erf_ramp(t, schedule.tau_s, schedule.t0),
        RampPhase::Plateau => schedule.t0,
        RampPhase::Off => erf_ramp(schedule.tau_s - t, schedule.tau_s, schedule.t0),
    }
}

/// Real symmetric Hamiltonian as a function of time.
pub trait HamiltonianProvider {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> Result<RMat>;
    fn eigen(&self, h: &RMat) -> SymEigen {
        sym_eigen(h)
    }
}

pub struct ConstantHamiltonian(pub RMat);

impl HamiltonianProvider for ConstantHamiltonian {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn at(&self, _t: f64) -> Result<RMat> {
        Ok(self.0.clone())
    }
}

pub struct RampHamiltonian<'a> {
    pub system: &'a PairSystem,
    pub schedule: PulseSchedule,
    pub phase: RampPhase,
}

impl HamiltonianProvider for RampHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }
    fn at(&self, t: f64) -> Result<RMat> {
        self.system.hamiltonian(transmission_profile(t, &self.schedule, self.phase))
    }
    fn eigen(&self, h: &RMat) -> SymEigen {
        self.system.eigen(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Frobenius-norm change between successive step halvings at which the
    /// finer result is accepted.
    pub tol: f64,
    /// Step size of the first (coarsest) pass, ns.
    pub initial_dt: f64,
    pub max_halvings: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { tol: 1e-6, initial_dt: 0.25, max_halvings: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub block: SplitBlock,
    pub steps: usize,
    pub change: f64,
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

fn cfm4(provider: &dyn HamiltonianProvider, t0: f64, t1: f64, steps: usize, init: &SplitBlock) -> Result<SplitBlock> {
    let a1 = (3.0 - 2.0 * 3f64.sqrt()) / 12.0;
    let a2 = (3.0 + 2.0 * 3f64.sqrt()) / 12.0;
    let dt = (t1 - t0) / steps as f64;
    let mut x = init.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let ha = provider.at(t + (0.5 - GAUSS_OFFSET) * dt)?;
        let hb = provider.at(t + (0.5 + GAUSS_OFFSET) * dt)?;
        let first = &ha * a2 + &hb * a1;
        let second = ha * a1 + hb * a2;
        x = provider.eigen(&first).evolve(&x, dt);
        x = provider.eigen(&second).evolve(&x, dt);
    }
    Ok(x)
}

/// Propagates the columns of `init` from `t0` to `t1`, halving the step
/// until two successive results differ by less than `opts.tol`.
pub fn propagate_block(
    provider: &dyn HamiltonianProvider,
    t0: f64,
    t1: f64,
    init: &SplitBlock,
    opts: &PropagateOptions,
) -> Result<Propagation> {
    propagate_observed(provider, t0, t1, init, None, opts)
}

/// As [`propagate_block`], but convergence is judged on the projections
/// `probeᵀ·U·init` only. States near the truncation edge oscillate fast enough
/// to alias at any practical step while carrying negligible amplitude; a
/// probe spanning the states that enter a result keeps them from setting
/// the step size.
pub fn propagate_observed(
    provider: &dyn HamiltonianProvider,
    t0: f64,
    t1: f64,
    init: &SplitBlock,
    probe: Option<&RMat>,
    opts: &PropagateOptions,
) -> Result<Propagation> {
    if !(t1 > t0) {
        return Err(CzError::Parameter(format!("propagation interval [{t0}, {t1}] is empty")));
    }
    if init.nrows() != provider.dim() {
        return Err(CzError::BasisMismatch(format!(
            "state block has {} rows, Hamiltonian dimension is {}",
            init.nrows(),
            provider.dim()
        )));
    }
    let mut steps = ((t1 - t0) / opts.initial_dt).ceil().max(1.0) as usize;
    let mut prev = cfm4(provider, t0, t1, steps, init)?;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_halvings {
        steps *= 2;
        let next = cfm4(provider, t0, t1, steps, init)?;
        change = match probe {
            Some(p) => next.project_onto(p).distance(&prev.project_onto(p)),
            None => next.distance(&prev),
        };
        if change < opts.tol {
            return Ok(Propagation { block: next, steps, change });
        }
        prev = next;
    }
    Err(CzError::Integration { halvings: opts.max_halvings, change })
}

/// Full propagator U(t1, t0).
pub fn propagate(
    provider: &dyn HamiltonianProvider,
    t0: f64,
    t1: f64,
    opts: &PropagateOptions,
    basis: BasisTag,
) -> Result<OperatorMatrix> {
    let p = propagate_block(provider, t0, t1, &SplitBlock::identity(provider.dim()), opts)?;
    OperatorMatrix::new(p.block.to_complex(), basis)
}

/// Switch-on propagator applied to bare states.
#[derive(Debug, Clone)]
pub struct RampResult {
    /// Bare states the columns of `block` start from.
    pub columns: Vec<Label>,
    pub block: SplitBlock,
    pub steps: usize,
    pub change: f64,
}

impl RampResult {
    fn column_of(&self, label: Label) -> Result<usize> {
        self.columns.iter().position(|&l| l == label).ok_or(CzError::MissingLabel(label))
    }

    /// ⟨m̃|U|n⟩.
    pub fn amplitude(&self, dressed: &SpectrumTable, m: Label, n: Label) -> Result<Complex<f64>> {
        let v = dressed.vector(m)?.into_owned();
        Ok(self.block.project(&v, self.column_of(n)?))
    }
}

/// Switch-on ramp applied to the bare states `columns`. With a `probe`,
/// step convergence is judged on the overlaps with its columns.
pub fn switch_on(
    system: &PairSystem,
    schedule: &PulseSchedule,
    columns: &[Label],
    probe: Option<&RMat>,
    opts: &PropagateOptions,
) -> Result<RampResult> {
    let init = SplitBlock::from_real(RMat::from_columns(
        &columns.iter().map(|&l| system.bare.vector(l)).collect::<Vec<_>>(),
    ));
    let provider = RampHamiltonian { system, schedule: *schedule, phase: RampPhase::On };
    let p = propagate_observed(&provider, 0.0, schedule.tau_s, &init, probe, opts)?;
    Ok(RampResult { columns: columns.to_vec(), block: p.block, steps: p.steps, change: p.change })
}

/// Switching phases φ_m = −arg⟨m̃|U_on|m⟩ for the computational states and
/// δΦ = φ₁₁ + φ₀₀ − φ₁₀ − φ₀₁ wrapped to (−π, π].
pub fn switching_phases(ramp: &RampResult, dressed: &SpectrumTable) -> Result<([f64; 4], f64)> {
    let mut phi = [0.0; 4];
    for (k, &m) in COMPUTATIONAL.iter().enumerate() {
        let z = ramp.amplitude(dressed, m, m)?;
        if z.norm() < 0.5 {
            return Err(CzError::Leakage { label: m, magnitude: z.norm() });
        }
        phi[k] = -z.arg();
    }
    Ok((phi, wrap_phase(phi[3] + phi[0] - phi[2] - phi[1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageEntry {
    pub from: Label,
    pub to: Label,
    pub probability: f64,
}

/// Transition probabilities |⟨m̃|U|n⟩|² from each requested n to itself and
/// to the `nearest` dressed states closest in energy.
pub fn leakage_probabilities(
    ramp: &RampResult,
    dressed: &SpectrumTable,
    from: &[Label],
    nearest: usize,
) -> Result<Vec<LeakageEntry>> {
    let mut out = Vec::new();
    for &n in from {
        let en = dressed.energy(n)?;
        let mut others: Vec<(f64, Label)> = dressed
            .labels
            .iter()
            .zip(&dressed.energies)
            .filter(|(&l, _)| l != n)
            .map(|(&l, &e)| ((e - en).abs(), l))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for m in std::iter::once(n).chain(others.into_iter().take(nearest).map(|(_, l)| l)) {
            let p = ramp.amplitude(dressed, m, n)?.norm_sqr();
            out.push(LeakageEntry { from: n, to: m, probability: p.min(1.0) });
        }
    }
    Ok(out)
}

/// Smallest τ_w ≥ 0 with 2δΦ/(2π) + Δ_CZ·τ_w ≡ 1/2 (mod 1).
pub fn waiting_time(delta_phi_on: f64, delta_cz: f64) -> Result<f64> {
    if delta_cz.abs() < 1e-6 {
        return Err(CzError::NoCoupling { delta_cz });
    }
    let x = 2.0 * delta_phi_on / (2.0 * PI);
    let frac = if delta_cz > 0.0 { (0.5 - x).rem_euclid(1.0) } else { (x - 0.5).rem_euclid(1.0) };
    // rem_euclid can return 1 − ε for an exact multiple.
    let frac = if frac > 1.0 - 1e-12 { 0.0 } else { frac };
    Ok(frac / delta_cz.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateMode {
    /// τ_s fixed, τ_w from the phase condition.
    Plateau,
    /// τ_w = 0, τ_s from the phase condition.
    ZeroWait,
    /// τ_s and τ_w both as given.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub device: String,
    pub mode: GateMode,
    pub t0: f64,
    pub tau_s: f64,
    pub tau_w: f64,
    pub gate_time: f64,
    pub delta_cz: f64,
    /// φ₀₀, φ₀₁, φ₁₀, φ₁₁ after the switch-on ramp (rad).
    pub phi_on: [f64; 4],
    pub delta_phi_on: f64,
    /// Transition probabilities out of |11⟩ at the end of the switch-on ramp.
    pub leakage: Vec<LeakageEntry>,
    pub fidelity: f64,
    pub error: f64,
    pub ramp_steps: usize,
}

impl GateReport {
    pub fn leakage_to(&self, to: Label) -> Option<f64> {
        self.leakage.iter().find(|e| e.from == (1, 1) && e.to == to).map(|e| e.probability)
    }
}

/// Gate block W = ⟨m|U_off U_w U_on|n⟩ on the computational states, with
/// U_off = U_onᵀ.
pub fn gate_block(ramp: &RampResult, plateau: &SymEigen, tau_w: f64) -> ComputationalBlock {
    let x = &ramp.block;
    let y = plateau.evolve(x, tau_w);
    let re = x.re.tr_mul(&y.re) - x.im.tr_mul(&y.im);
    let im = x.re.tr_mul(&y.im) + x.im.tr_mul(&y.re);
    ComputationalBlock::new(Matrix4::from_fn(|i, j| Complex::new(re[(i, j)], im[(i, j)])))
}

/// Pieces of a gate evaluation that do not depend on τ_w.
pub struct GateContext<'a> {
    pub system: &'a PairSystem,
    pub t0: f64,
    pub dressed: SpectrumTable,
    pub plateau: SymEigen,
    pub delta_cz: f64,
    pub opts: PropagateOptions,
}

impl<'a> GateContext<'a> {
    pub fn new(system: &'a PairSystem, t0: f64, opts: &PropagateOptions) -> Result<Self> {
        let h = system.hamiltonian(t0)?;
        let dressed = system.dressed(t0, TRACKED_EXCITATION)?;
        let delta_cz = delta_cz(&dressed)?;
        Ok(GateContext { system, t0, dressed, plateau: system.eigen(&h), delta_cz, opts: *opts })
    }

    pub fn ramp(&self, tau_s: f64) -> Result<RampResult> {
        let schedule = PulseSchedule::new(tau_s, 0.0, self.t0)?;
        switch_on(self.system, &schedule, &COMPUTATIONAL, Some(&self.dressed.vectors), &self.opts)
    }

    pub fn delta_phi_on(&self, tau_s: f64) -> Result<f64> {
        Ok(switching_phases(&self.ramp(tau_s)?, &self.dressed)?.1)
    }

    pub fn report(&self, ramp: &RampResult, tau_s: f64, mode: GateMode, tau_w: Option<f64>) -> Result<GateReport> {
        let (phi_on, delta_phi_on) = switching_phases(ramp, &self.dressed)?;
        let tau_w = match (mode, tau_w) {
            (GateMode::ZeroWait, _) => 0.0,
            (GateMode::Fixed, Some(w)) => w,
            (GateMode::Fixed, None) => 0.0,
            (GateMode::Plateau, _) => waiting_time(delta_phi_on, self.delta_cz)?,
        };
        let block = gate_block(ramp, &self.plateau, tau_w);
        let f = fidelity(&block);
        Ok(GateReport {
            device: self.system.kind.name().to_string(),
            mode,
            t0: self.t0,
            tau_s,
            tau_w,
            gate_time: 2.0 * tau_s + tau_w,
            delta_cz: self.delta_cz,
            phi_on,
            delta_phi_on,
            leakage: leakage_probabilities(ramp, &self.dressed, &[(1, 1)], 6)?,
            fidelity: f,
            error: 1.0 - f,
            ramp_steps: ramp.steps,
        })
    }
}

/// U = U_off U_w U_on for the given schedule. In `Plateau` mode τ_w comes
/// from the phase condition and `schedule.tau_w` is ignored.
pub fn compose_gate(system: &PairSystem, schedule: &PulseSchedule, mode: GateMode, opts: &PropagateOptions) -> Result<GateReport> {
    let ctx = GateContext::new(system, schedule.t0, opts)?;
    let ramp = ctx.ramp(schedule.tau_s)?;
    ctx.report(&ramp, schedule.tau_s, mode, Some(schedule.tau_w))
}

/// Zero-wait gate: finds the shortest τ_s in [`tau_min`, `tau_max`] with
/// |δΦ_on| = π/2, so the two ramps alone accumulate the conditional phase.
pub fn zero_wait_gate(system: &PairSystem, t0: f64, tau_min: f64, tau_max: f64, opts: &PropagateOptions) -> Result<GateReport> {
    let ctx = GateContext::new(system, t0, opts)?;
    if ctx.delta_cz.abs() < 1e-6 {
        return Err(CzError::NoCoupling { delta_cz: ctx.delta_cz });
    }
    let f = |tau: f64| -> Result<f64> { Ok(ctx.delta_phi_on(tau)?.abs() - PI / 2.0) };
    // Adiabatic estimate: δΦ ≈ π Δ_CZ(T₀) τ_s for a ramp symmetric about T₀/2.
    let guess = (0.5 / ctx.delta_cz.abs()).clamp(tau_min, tau_max);
    let mut lo = guess;
    let mut flo = f(lo)?;
    while flo >= 0.0 {
        if lo <= tau_min {
            return Err(CzError::RootSearch(format!("|δΦ_on| ≥ π/2 already at τ_s = {tau_min} ns")));
        }
        lo = (lo / 1.25).max(tau_min);
        flo = f(lo)?;
    }
    let mut hi = lo;
    let mut fhi = flo;
    while fhi < 0.0 {
        if hi >= tau_max {
            return Err(CzError::RootSearch(format!("|δΦ_on| < π/2 up to τ_s = {tau_max} ns")));
        }
        lo = hi;
        hi = (hi * 1.25).min(tau_max);
        fhi = f(hi)?;
    }
    let tau = brent(f, lo, hi, 1e-3, 100)?;
    let ramp = ctx.ramp(tau)?;
    ctx.report(&ramp, tau, GateMode::ZeroWait, None)
}

/// T₀ in [lo, hi] where the plateau waiting time vanishes at fixed τ_s
/// (|δΦ_on| = π/2), bracketed by a scan with `samples` points.
pub fn kink_location(system: &PairSystem, tau_s: f64, lo: f64, hi: f64, samples: usize, opts: &PropagateOptions) -> Result<f64> {
    let f = |t0: f64| -> Result<f64> {
        let ctx = GateContext::new(system, t0, opts)?;
        Ok(ctx.delta_phi_on(tau_s)?.abs() - PI / 2.0)
    };
    let n = samples.max(2);
    let mut prev = (lo, f(lo)?);
    for k in 1..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let fx = f(x)?;
        if prev.1 < 0.0 && fx >= 0.0 {
            return brent(f, prev.0, x, 1e-6, 100);
        }
        prev = (x, fx);
    }
    Err(CzError::RootSearch(format!("no waiting-time kink for T_0 in [{lo}, {hi}]")))
}
