//! Single-qubit Hamiltonians, the junction coupler, and the two-qubit
//! system with its bare and dressed spectra.

use nalgebra::{DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{CzError, Result};
use crate::hilbert::{
    build_phase_charge_ops, charge_squared, embed_pair, embed_real, phase_power, truncate_product,
    BasisTag, OperatorMatrix, OscillatorBasis, Slot,
};
use crate::hjunction::{
    calibrate_beamsplitters, compose_h_smatrix, josephson_expansion, QuarticExpansion, ScatteringModel,
    WireParams, DEFAULT_SPLITTER_B, EVEN_TERMS,
};
use crate::linalg::{kron, sym_eigen, sym_eigen_blocked, RMat, SymEigen};

pub const DEFAULT_E_J: f64 = 20.55;
pub const DEFAULT_E_C1: f64 = 0.240;
pub const DEFAULT_E_C2: f64 = 0.255;
pub const DEFAULT_GAP: f64 = 82.2;
pub const DEFAULT_COUPLER_GAP: f64 = 164.4;
pub const DEFAULT_LEVELS: usize = 10;
pub const DEFAULT_K20: f64 = 0.123;

/// State label (n₁, n₂): excitation numbers of qubit 1 and qubit 2.
pub type Label = (usize, usize);

/// Computational states in the order 00, 01, 10, 11.
pub const COMPUTATIONAL: [Label; 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitKind {
    Transmon,
    Gatemon,
    Hpair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub kind: QubitKind,
    pub e_c: f64,
    #[serde(default = "default_e_j")]
    pub e_j: f64,
    #[serde(default = "default_t_alpha")]
    pub t_alpha: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Quadratic and quartic expansion coefficients (K₂₀, K₄₀) of an H-pair
    /// qubit, in units of the gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_coeffs: Option<(f64, f64)>,
}

fn default_e_j() -> f64 {
    DEFAULT_E_J
}
fn default_t_alpha() -> f64 {
    1.0
}
fn default_gap() -> f64 {
    DEFAULT_GAP
}

impl QubitSpec {
    pub fn transmon(e_c: f64, e_j: f64) -> Self {
        QubitSpec { kind: QubitKind::Transmon, e_c, e_j, t_alpha: 1.0, gap: DEFAULT_GAP, k_coeffs: None }
    }

    pub fn gatemon(e_c: f64, gap: f64, t_alpha: f64) -> Self {
        QubitSpec { kind: QubitKind::Gatemon, e_c, e_j: gap * t_alpha / 4.0, t_alpha, gap, k_coeffs: None }
    }

    pub fn hpair(e_c: f64, gap: f64, k20: f64, k40: f64) -> Self {
        QubitSpec { kind: QubitKind::Hpair, e_c, e_j: 2.0 * gap * k20, t_alpha: 1.0, gap, k_coeffs: Some((k20, k40)) }
    }

    /// Coefficient pairing with θ²/2, which also fixes the oscillator basis.
    pub fn e_j_quad(&self) -> Result<f64> {
        match self.kind {
            QubitKind::Transmon => Ok(self.e_j),
            QubitKind::Gatemon => Ok(self.gap * self.t_alpha / 4.0),
            QubitKind::Hpair => {
                let (k20, _) = self.k_coeffs.ok_or_else(|| {
                    CzError::Parameter("H-pair qubit needs expansion coefficients".into())
                })?;
                Ok(2.0 * self.gap * k20)
            }
        }
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.e_c > 0.0) {
            return Err(CzError::Parameter(format!("E_C = {} must be positive", self.e_c)));
        }
        if !(self.gap > 0.0) {
            return Err(CzError::Parameter(format!("gap = {} must be positive", self.gap)));
        }
        match self.kind {
            QubitKind::Transmon if !(self.e_j > 0.0) => {
                return Err(CzError::Parameter(format!("E_J = {} must be positive", self.e_j)))
            }
            QubitKind::Gatemon if !(self.t_alpha > 0.0 && self.t_alpha <= 1.0) => {
                return Err(CzError::Parameter(format!("gatemon transmission {} outside (0, 1]", self.t_alpha)))
            }
            _ => {}
        }
        let ej = self.e_j_quad()?;
        if !(ej > 0.0) {
            return Err(CzError::Parameter(format!("quadratic Josephson coefficient {ej} must be positive")));
        }
        let mut warnings = Vec::new();
        if ej / self.e_c < 20.0 {
            warnings.push(format!("E_J/E_C = {:.1} is below the transmon regime (20)", ej / self.e_c));
        }
        Ok(warnings)
    }

    pub fn basis(&self, levels: usize) -> Result<OscillatorBasis> {
        OscillatorBasis::new(self.e_c, self.e_j_quad()?, levels)
    }
}

fn expect_kind(spec: &QubitSpec, kind: QubitKind) -> Result<()> {
    if spec.kind != kind {
        return Err(CzError::BasisMismatch(format!("expected a {kind:?} spec, got {:?}", spec.kind)));
    }
    spec.validate().map(|_| ())
}

fn single(basis: &OscillatorBasis, m: RMat) -> Result<OperatorMatrix> {
    OperatorMatrix::from_real(&m, BasisTag::Single { levels: basis.levels })
}

/// 4E_C n² + E_J(θ²/2 − θ⁴/24).
pub fn transmon_hamiltonian(spec: &QubitSpec, basis: &OscillatorBasis) -> Result<OperatorMatrix> {
    expect_kind(spec, QubitKind::Transmon)?;
    let h = charge_squared(basis) * (4.0 * spec.e_c)
        + (phase_power(basis, 2) / 2.0 - phase_power(basis, 4) / 24.0) * spec.e_j;
    single(basis, h)
}

/// 4E_C n² + Δ(T/8)θ² − Δ(T/96)(1 − 3T/4)θ⁴, constant −Δ dropped.
pub fn gatemon_hamiltonian(spec: &QubitSpec, basis: &OscillatorBasis) -> Result<OperatorMatrix> {
    expect_kind(spec, QubitKind::Gatemon)?;
    let (d, t) = (spec.gap, spec.t_alpha);
    let h = charge_squared(basis) * (4.0 * spec.e_c) + phase_power(basis, 2) * (d * t / 8.0)
        - phase_power(basis, 4) * (d * t / 96.0 * (1.0 - 0.75 * t));
    single(basis, h)
}

/// 4E_C n² + Δ(K₂₀θ² + K₄₀θ⁴) for one qubit of the H-pair.
pub fn hpair_hamiltonian(spec: &QubitSpec, basis: &OscillatorBasis) -> Result<OperatorMatrix> {
    expect_kind(spec, QubitKind::Hpair)?;
    let (k2, k4) = spec.k_coeffs.expect("validated");
    let h = charge_squared(basis) * (4.0 * spec.e_c)
        + (phase_power(basis, 2) * k2 + phase_power(basis, 4) * k4) * spec.gap;
    single(basis, h)
}

pub fn qubit_hamiltonian(spec: &QubitSpec, basis: &OscillatorBasis) -> Result<OperatorMatrix> {
    match spec.kind {
        QubitKind::Transmon => transmon_hamiltonian(spec, basis),
        QubitKind::Gatemon => gatemon_hamiltonian(spec, basis),
        QubitKind::Hpair => hpair_hamiltonian(spec, basis),
    }
}

/// Transition frequency and anharmonicity of one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitLevels {
    /// Energies relative to the ground state (GHz).
    pub energies: DVector<f64>,
    pub omega10: f64,
    pub beta: f64,
}

pub fn qubit_levels(spec: &QubitSpec, levels: usize) -> Result<QubitLevels> {
    let basis = spec.basis(levels)?;
    let h = qubit_hamiltonian(spec, &basis)?.real_part();
    let e = sym_eigen(&h).values;
    let energies = e.map(|x| x - e[0]);
    Ok(QubitLevels { omega10: energies[1], beta: energies[2] - 2.0 * energies[1], energies })
}

/// (T_cΔ/8)[(θ₁ − θ₂)² − (θ₁ − θ₂)⁴/12] for phase operators on a common
/// product basis.
pub fn abs_interaction(
    t_c: f64,
    gap: f64,
    theta1: &OperatorMatrix,
    theta2: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if !(0.0..=1.0).contains(&t_c) {
        return Err(CzError::Parameter(format!("coupler transmission {t_c} outside [0, 1]")));
    }
    if theta1.basis != theta2.basis || !matches!(theta1.basis, BasisTag::Product { .. }) {
        return Err(CzError::BasisMismatch("phase operators must share one product basis".into()));
    }
    let d = &theta1.entries - &theta2.entries;
    let d2 = &d * &d;
    let d4 = &d2 * &d2;
    let v = (d2 - d4 / nalgebra::Complex::new(12.0, 0.0)) * nalgebra::Complex::new(t_c * gap / 8.0, 0.0);
    OperatorMatrix::new(v, theta1.basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceKind {
    TransmonPair,
    GatemonPair,
    HPair,
}

impl DeviceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DeviceKind::TransmonPair => "transmon-pair",
            DeviceKind::GatemonPair => "gatemon-pair",
            DeviceKind::HPair => "h-pair",
        }
    }
}

/// H-junction description: either an explicit scattering model or a
/// calibration target for symmetric real beam splitters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HJunctionConfig {
    pub target_k20: f64,
    pub target_k02: f64,
    pub splitter_b: f64,
    pub wire_vartheta: f64,
    pub wire_eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ScatteringModel>,
}

impl Default for HJunctionConfig {
    fn default() -> Self {
        let w = WireParams::symmetric(0.0);
        HJunctionConfig {
            target_k20: DEFAULT_K20,
            target_k02: DEFAULT_K20,
            splitter_b: DEFAULT_SPLITTER_B,
            wire_vartheta: w.vartheta,
            wire_eta: w.eta,
            model: None,
        }
    }
}

impl HJunctionConfig {
    pub fn resolve(&self) -> Result<ScatteringModel> {
        match self.model {
            Some(m) => Ok(m.with_wire_transmission(0.0)),
            None => calibrate_beamsplitters(
                self.target_k20,
                self.target_k02,
                &WireParams { t: 0.0, vartheta: self.wire_vartheta, eta: self.wire_eta },
                self.splitter_b,
            ),
        }
    }
}

/// Everything needed to build a two-qubit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub kind: DeviceKind,
    pub qubit1: QubitSpec,
    pub qubit2: QubitSpec,
    /// Gap entering the ABS coupler of transmon and gatemon pairs (GHz).
    pub coupler_gap: f64,
    pub hjunction: HJunctionConfig,
    pub levels: usize,
}

impl DeviceConfig {
    pub fn preset(kind: DeviceKind) -> Self {
        let (q1, q2) = match kind {
            DeviceKind::TransmonPair => (
                QubitSpec::transmon(DEFAULT_E_C1, DEFAULT_E_J),
                QubitSpec::transmon(DEFAULT_E_C2, DEFAULT_E_J),
            ),
            DeviceKind::GatemonPair => (
                QubitSpec::gatemon(DEFAULT_E_C1, DEFAULT_GAP, 1.0),
                QubitSpec::gatemon(DEFAULT_E_C2, DEFAULT_GAP, 1.0),
            ),
            DeviceKind::HPair => {
                let t = 8.0 * DEFAULT_K20;
                let k40 = -t / 96.0 * (1.0 - 0.75 * t);
                (
                    QubitSpec::hpair(DEFAULT_E_C1, DEFAULT_GAP, DEFAULT_K20, k40),
                    QubitSpec::hpair(DEFAULT_E_C2, DEFAULT_GAP, DEFAULT_K20, k40),
                )
            }
        };
        DeviceConfig {
            kind,
            qubit1: q1,
            qubit2: q2,
            coupler_gap: DEFAULT_COUPLER_GAP,
            hjunction: HJunctionConfig::default(),
            levels: DEFAULT_LEVELS,
        }
    }
}

/// Product of single-qubit eigenbases, used to label states.
#[derive(Debug, Clone)]
pub struct BareBasis {
    pub e1: DVector<f64>,
    pub u1: RMat,
    pub e2: DVector<f64>,
    pub u2: RMat,
}

fn gauge_columns(u: &mut RMat) {
    for mut col in u.column_iter_mut() {
        let k = col.iamax();
        if col[k] < 0.0 {
            col.neg_mut();
        }
    }
}

impl BareBasis {
    fn new(h1: &RMat, h2: &RMat) -> Self {
        let a = sym_eigen(h1);
        let b = sym_eigen(h2);
        let (mut u1, mut u2) = (a.vectors, b.vectors);
        gauge_columns(&mut u1);
        gauge_columns(&mut u2);
        BareBasis { e1: a.values, u1, e2: b.values, u2 }
    }

    pub fn vector(&self, (n1, n2): Label) -> DVector<f64> {
        let a = self.u1.column(n1).into_owned();
        let b = self.u2.column(n2).into_owned();
        a.kronecker(&b)
    }

    pub fn energy(&self, (n1, n2): Label) -> f64 {
        self.e1[n1] + self.e2[n2]
    }
}

#[derive(Debug, Clone)]
enum Coupler {
    Abs,
    HJunction { model: ScatteringModel, reference: QuarticExpansion },
}

/// Two coupled qubits with H(T_c) = H₁ + H₂ + Σ_k c_k(T_c)·O_k.
#[derive(Debug, Clone)]
pub struct PairSystem {
    pub kind: DeviceKind,
    pub qubits: [QubitSpec; 2],
    pub levels: usize,
    pub h0: RMat,
    pub bare: BareBasis,
    coupler: Coupler,
    terms: Vec<RMat>,
    /// Product-basis indices of even and odd total oscillator number. Every
    /// term of H is even in (θ₁, θ₂), so H never couples the two sets.
    parity_blocks: Vec<Vec<usize>>,
}

impl PairSystem {
    pub fn new(cfg: &DeviceConfig) -> Result<Self> {
        let n = cfg.levels;
        let (mut q1, mut q2) = (cfg.qubit1, cfg.qubit2);
        let (coupler, terms_needed) = match cfg.kind {
            DeviceKind::TransmonPair | DeviceKind::GatemonPair => {
                let want = if cfg.kind == DeviceKind::TransmonPair { QubitKind::Transmon } else { QubitKind::Gatemon };
                if q1.kind != want || q2.kind != want {
                    return Err(CzError::Config(format!("{} needs two {want:?} qubits", cfg.kind.name())));
                }
                if !(cfg.coupler_gap > 0.0) {
                    return Err(CzError::Parameter(format!("coupler gap {} must be positive", cfg.coupler_gap)));
                }
                (Coupler::Abs, false)
            }
            DeviceKind::HPair => {
                let model = cfg.hjunction.resolve()?;
                let reference = josephson_expansion(&compose_h_smatrix(&model)?)?;
                q1 = QubitSpec::hpair(q1.e_c, q1.gap, reference.get(2, 0), reference.get(4, 0));
                // Both qubits see the gap of the shared junction.
                q2 = QubitSpec::hpair(q2.e_c, q1.gap, reference.get(0, 2), reference.get(0, 4));
                (Coupler::HJunction { model, reference }, true)
            }
        };
        let b1 = q1.basis(n)?;
        let b2 = q2.basis(n)?;
        let h1 = qubit_hamiltonian(&q1, &b1)?.real_part();
        let h2 = qubit_hamiltonian(&q2, &b2)?.real_part();
        let h0 = embed_real(&h1, Slot::First, n)? + embed_real(&h2, Slot::Second, n)?;
        let terms = if terms_needed {
            let p1: Vec<RMat> = (0..=4).map(|k| phase_power(&b1, k)).collect();
            let p2: Vec<RMat> = (0..=4).map(|k| phase_power(&b2, k)).collect();
            EVEN_TERMS.iter().map(|&(i, j)| kron(&p1[i], &p2[j]) * q1.gap).collect()
        } else {
            vec![unit_abs_coupler(&q1, &q2, n, cfg.coupler_gap)?]
        };
        Ok(PairSystem {
            kind: cfg.kind,
            qubits: [q1, q2],
            levels: n,
            h0,
            bare: BareBasis::new(&h1, &h2),
            coupler,
            terms,
            parity_blocks: (0..2).map(|p| (0..n * n).filter(|i| (i / n + i % n) % 2 == p).collect()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    /// Eigendecomposition of a Hamiltonian of this system, solved per parity sector.
    pub fn eigen(&self, h: &RMat) -> SymEigen {
        sym_eigen_blocked(h, &self.parity_blocks)
    }

    pub fn scattering_model(&self) -> Option<&ScatteringModel> {
        match &self.coupler {
            Coupler::HJunction { model, .. } => Some(model),
            Coupler::Abs => None,
        }
    }

    /// Expansion change δK(T_c) relative to the decoupled junction (H-pair only).
    pub fn delta_expansion(&self, t_c: f64) -> Result<Option<QuarticExpansion>> {
        match &self.coupler {
            Coupler::Abs => Ok(None),
            Coupler::HJunction { model, reference } => {
                let s = compose_h_smatrix(&model.with_wire_transmission(t_c))?;
                Ok(Some(josephson_expansion(&s)?.delta(reference)))
            }
        }
    }

    fn coefficients(&self, t_c: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t_c) {
            return Err(CzError::Parameter(format!("coupler transmission {t_c} outside [0, 1]")));
        }
        Ok(match self.delta_expansion(t_c)? {
            None => vec![t_c],
            Some(dk) => EVEN_TERMS.iter().map(|&(i, j)| dk.get(i, j)).collect(),
        })
    }

    /// Interaction V(T_c) in the product basis.
    pub fn interaction(&self, t_c: f64) -> Result<RMat> {
        let n = self.dim();
        let mut v = RMat::zeros(n, n);
        for (c, o) in self.coefficients(t_c)?.into_iter().zip(&self.terms) {
            if c != 0.0 {
                v += o * c;
            }
        }
        Ok(v)
    }

    pub fn hamiltonian(&self, t_c: f64) -> Result<RMat> {
        Ok(&self.h0 + self.interaction(t_c)?)
    }

    /// Bare (T_c = 0) table of all states with n₁ + n₂ ≤ `max_excitation`.
    pub fn bare_spectrum(&self, max_excitation: usize) -> SpectrumTable {
        let labels: Vec<Label> = (0..=max_excitation)
            .flat_map(|s| (0..=s).rev().map(move |n1| (n1, s - n1)))
            .filter(|&(a, b)| a < self.levels && b < self.levels)
            .collect();
        let vectors = RMat::from_columns(&labels.iter().map(|&l| self.bare.vector(l)).collect::<Vec<_>>());
        let e0 = self.bare.energy((0, 0));
        let energies = labels.iter().map(|&l| self.bare.energy(l) - e0).collect();
        SpectrumTable { t_c: 0.0, labels, energies, ground: e0, vectors }
    }

    /// Largest T_c increment used when continuing labels from T_c = 0.
    pub fn label_step(&self) -> f64 {
        match self.kind {
            DeviceKind::HPair => 0.02,
            _ => 1e-3,
        }
    }

    /// Dressed states at T_c, labeled by continuation from the bare table.
    /// A step that fails to label is halved down to 1e-6 of the default.
    pub fn dressed(&self, t_c: f64, max_excitation: usize) -> Result<SpectrumTable> {
        let mut table = self.bare_spectrum(max_excitation);
        let step = self.label_step();
        let mut h = step;
        while table.t_c < t_c {
            let next = (table.t_c + h).min(t_c);
            match label_eigenstates(&self.eigen(&self.hamiltonian(next)?), &table, next) {
                Ok(t) => {
                    table = t;
                    h = (2.0 * h).min(step);
                }
                Err(e @ CzError::Labeling { .. }) if h < 1e-6 * step => return Err(e),
                Err(CzError::Labeling { .. }) => h /= 2.0,
                Err(e) => return Err(e),
            }
        }
        Ok(table)
    }
}

/// Interaction at T_c = 1 with exact matrix elements: the phase operators
/// are embedded in a padded product space before the fourth power is taken.
fn unit_abs_coupler(q1: &QubitSpec, q2: &QubitSpec, n: usize, gap: f64) -> Result<RMat> {
    let m = n + 3;
    let (t1, _) = build_phase_charge_ops(q1.e_c, q1.e_j_quad()?, m)?;
    let (t2, _) = build_phase_charge_ops(q2.e_c, q2.e_j_quad()?, m)?;
    let e1 = embed_pair(&t1, Slot::First, m)?;
    let e2 = embed_pair(&t2, Slot::Second, m)?;
    let v = abs_interaction(1.0, gap, &e1, &e2)?.real_part();
    Ok(truncate_product(&v, m, m, n, n))
}

/// Product-basis Hamiltonian of a transmon or gatemon pair with an ABS coupler.
pub fn two_qubit_hamiltonian(
    spec1: &QubitSpec,
    spec2: &QubitSpec,
    t_c: f64,
    levels: usize,
    coupler_gap: f64,
) -> Result<OperatorMatrix> {
    let kind = match (spec1.kind, spec2.kind) {
        (QubitKind::Transmon, QubitKind::Transmon) => DeviceKind::TransmonPair,
        (QubitKind::Gatemon, QubitKind::Gatemon) => DeviceKind::GatemonPair,
        _ => {
            return Err(CzError::Config(
                "two_qubit_hamiltonian takes matching transmon or gatemon specs; H-pairs use PairSystem".into(),
            ))
        }
    };
    let cfg = DeviceConfig {
        kind,
        qubit1: *spec1,
        qubit2: *spec2,
        coupler_gap,
        hjunction: HJunctionConfig::default(),
        levels,
    };
    let sys = PairSystem::new(&cfg)?;
    OperatorMatrix::from_real(&sys.hamiltonian(t_c)?, BasisTag::Product { first: levels, second: levels })
}

/// Labeled eigenpairs. Energies are relative to the (0, 0) state.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub t_c: f64,
    pub labels: Vec<Label>,
    pub energies: Vec<f64>,
    /// Absolute energy of the (0, 0) state.
    pub ground: f64,
    /// Eigenvectors as columns, in label order.
    pub vectors: RMat,
}

impl SpectrumTable {
    pub fn index(&self, label: Label) -> Result<usize> {
        self.labels.iter().position(|&l| l == label).ok_or(CzError::MissingLabel(label))
    }

    pub fn energy(&self, label: Label) -> Result<f64> {
        Ok(self.energies[self.index(label)?])
    }

    pub fn vector(&self, label: Label) -> Result<DVectorView<'_, f64>> {
        Ok(self.vectors.column(self.index(label)?))
    }
}

/// Labels the eigenpairs of `h` by greedy maximum overlap with the
/// reference vectors. Each dressed vector is signed so that its overlap with
/// the reference vector of the same label is positive.
pub fn dressed_spectrum(h: &RMat, reference: &SpectrumTable, t_c: f64) -> Result<SpectrumTable> {
    label_eigenstates(&sym_eigen(h), reference, t_c)
}

/// Labels a precomputed eigendecomposition against `reference`.
pub fn label_eigenstates(eig: &SymEigen, reference: &SpectrumTable, t_c: f64) -> Result<SpectrumTable> {
    let overlaps = reference.vectors.tr_mul(&eig.vectors);
    let (nl, nk) = overlaps.shape();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(nl * nk);
    for l in 0..nl {
        for k in 0..nk {
            pairs.push((overlaps[(l, k)].powi(2), l, k));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut by_label: Vec<Option<(usize, f64)>> = vec![None; nl];
    let mut taken = vec![false; nk];
    for (w, l, k) in pairs {
        if by_label[l].is_none() && !taken[k] {
            by_label[l] = Some((k, w));
            taken[k] = true;
        }
    }
    let mut vectors = RMat::zeros(eig.vectors.nrows(), nl);
    let mut abs_energy = Vec::with_capacity(nl);
    for (l, slot) in by_label.iter().enumerate() {
        let (k, w) = slot.expect("at least as many eigenvectors as labels");
        if w < 0.5 {
            return Err(CzError::Labeling { t_c, label: reference.labels[l], overlap: w });
        }
        let sign = overlaps[(l, k)].signum();
        vectors.set_column(l, &(eig.vectors.column(k) * sign));
        abs_energy.push(eig.values[k]);
    }
    let ground = reference
        .labels
        .iter()
        .position(|&l| l == (0, 0))
        .map(|i| abs_energy[i])
        .unwrap_or_else(|| eig.values[0]);
    Ok(SpectrumTable {
        t_c,
        labels: reference.labels.clone(),
        energies: abs_energy.iter().map(|e| e - ground).collect(),
        ground,
        vectors,
    })
}
