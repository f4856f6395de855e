//! Four-terminal H-junction: beam-splitter and wire scattering matrices,
//! their composition, Andreev bound-state energies and the quartic
//! Josephson expansion of the junction ground energy.
//!
//! Terminal order of the composed matrix is (ground-left, qubit-1, qubit-2,
//! ground-right); the ground terminals carry phase 0.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix3, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{CzError, Result};
use crate::roots::brent;

type C64 = Complex<f64>;

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireParams {
    pub t: f64,
    #[serde(default = "default_vartheta")]
    pub vartheta: f64,
    #[serde(default)]
    pub eta: f64,
}

fn default_vartheta() -> f64 {
    FRAC_PI_2
}

impl WireParams {
    /// Mirror-symmetric wire (r = r′) with transmission `t`.
    pub fn symmetric(t: f64) -> Self {
        WireParams { t, vartheta: FRAC_PI_2, eta: 0.0 }
    }

    pub fn with_transmission(self, t: f64) -> Self {
        WireParams { t, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterParams {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub phi11: f64,
    #[serde(default)]
    pub phi22: f64,
    #[serde(default)]
    pub phi12: f64,
    #[serde(default)]
    pub phi13: f64,
}

impl BeamSplitterParams {
    pub fn real(a: f64, b: f64) -> Self {
        BeamSplitterParams { a, b, phi11: 0.0, phi22: 0.0, phi12: 0.0, phi13: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringModel {
    pub left: BeamSplitterParams,
    pub right: BeamSplitterParams,
    pub wire: WireParams,
}

impl ScatteringModel {
    pub fn with_wire_transmission(&self, t: f64) -> Self {
        ScatteringModel { wire: self.wire.with_transmission(t), ..*self }
    }
}

/// Short-wire scattering matrix [[r, t], [t, r′]].
///
/// r′ carries a minus sign relative to the commonly printed form; without it
/// the matrix is not unitary.
pub fn wire_smatrix(p: &WireParams) -> Result<Matrix2<C64>> {
    if !(0.0..=1.0).contains(&p.t) {
        return Err(CzError::Parameter(format!("wire transmission {} outside [0, 1]", p.t)));
    }
    let refl = (1.0 - p.t).sqrt();
    let r = cis(p.vartheta) * refl;
    let rp = -cis(2.0 * p.eta - p.vartheta) * refl;
    let t = cis(p.eta) * p.t.sqrt();
    Ok(Matrix2::new(r, t, t, rp))
}

/// Three-terminal beam-splitter matrix; lead 3 attaches to the wire.
pub fn beamsplitter_smatrix(p: &BeamSplitterParams) -> Result<Matrix3<C64>> {
    if !(0.0..=1.0).contains(&p.a) || !(0.0..=1.0).contains(&p.b) {
        return Err(CzError::Parameter(format!(
            "beam-splitter parameters a = {}, b = {} outside [0, 1]",
            p.a, p.b
        )));
    }
    let (a, b) = (p.a, p.b);
    let sa = (1.0 - a * a).sqrt();
    let sb = (1.0 - b * b).sqrt();
    let y11 = cis(p.phi11) * a;
    let y12 = cis(p.phi12) * (b * sa);
    let y13 = cis(p.phi13) * (sa * sb);
    let y22 = -cis(2.0 * p.phi12 - p.phi11) * (a * b * b) + cis(p.phi22) * (1.0 - b * b);
    let y23 = -cis(p.phi13) * (b * sb) * (cis(p.phi12 - p.phi11) * a + cis(p.phi22 - p.phi12));
    let y33 = cis(2.0 * p.phi13) * (-cis(-p.phi11) * (a * (1.0 - b * b)) + cis(p.phi22 - 2.0 * p.phi12) * (b * b));
    Ok(Matrix3::new(y11, y12, y13, y12, y22, y23, y13, y23, y33))
}

/// Composes both beam splitters and the wire into the 4×4 junction matrix by
/// eliminating the internal wire amplitudes for each incident terminal.
pub fn compose_h_smatrix(m: &ScatteringModel) -> Result<Matrix4<C64>> {
    let yl = beamsplitter_smatrix(&m.left)?;
    let yr = beamsplitter_smatrix(&m.right)?;
    let w = wire_smatrix(&m.wire)?;
    let (r, t, rp) = (w[(0, 0)], w[(0, 1)], w[(1, 1)]);
    let one = C64::new(1.0, 0.0);
    let k = Matrix2::new(one - yl[(2, 2)] * r, -yl[(2, 2)] * t, -yr[(2, 2)] * t, one - yr[(2, 2)] * rp);
    let det = k.determinant();
    if det.norm() < 1e-12 {
        return Err(CzError::Composition { det: det.norm() });
    }
    let kinv = k.try_inverse().ok_or(CzError::Composition { det: det.norm() })?;
    // Columns in appendix order (L1, L2, R1, R2).
    let mut s = Matrix4::<C64>::zeros();
    for j in 0..4 {
        let (lj, rj) = if j < 2 { (Some(j), None) } else { (None, Some(j - 2)) };
        let rhs = Vector2::new(
            lj.map_or(C64::new(0.0, 0.0), |l| yl[(2, l)]),
            rj.map_or(C64::new(0.0, 0.0), |l| yr[(2, l)]),
        );
        let xy = kinv * rhs;
        let into_left = r * xy[0] + t * xy[1];
        let into_right = t * xy[0] + rp * xy[1];
        for i in 0..2 {
            s[(i, j)] = lj.map_or(C64::new(0.0, 0.0), |l| yl[(i, l)]) + yl[(i, 2)] * into_left;
            s[(i + 2, j)] = rj.map_or(C64::new(0.0, 0.0), |l| yr[(i, l)]) + yr[(i, 2)] * into_right;
        }
    }
    // Appendix (L1, L2, R1, R2) to (ground-left, qubit-1, qubit-2, ground-right).
    const P: [usize; 4] = [0, 1, 3, 2];
    Ok(Matrix4::from_fn(|i, j| s[(P[i], P[j])]))
}

/// Cosine coefficients of A(θ₁, θ₂) and B(θ₁, θ₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndreevCoefficients {
    /// A₀, A₁, A₂, A₁₂ multiplying 1, cos θ₁, cos θ₂, cos(θ₁ − θ₂).
    pub a: [f64; 4],
    /// B₀, B₁, B₂, B₋, B₊ multiplying 1, cos θ₁, cos θ₂, cos(θ₁ − θ₂), cos(θ₁ + θ₂).
    pub b: [f64; 5],
}

impl AndreevCoefficients {
    pub fn from_smatrix(s: &Matrix4<C64>) -> Self {
        let e = |i: usize, j: usize| s[(i - 1, j - 1)];
        let q = |z: C64| z.norm_sqr();
        let a0 = 2.0 * q(e(1, 4)) + (1..=4).map(|k| q(e(k, k))).sum::<f64>();
        let a1 = 2.0 * (q(e(1, 2)) + q(e(2, 4)));
        let a2 = 2.0 * (q(e(1, 3)) + q(e(3, 4)));
        let a12 = 2.0 * q(e(2, 3));
        let mut b0 = 2.0
            * (q(e(1, 2) * e(2, 4) - e(1, 4) * e(2, 2)) + q(e(1, 3) * e(3, 4) - e(1, 4) * e(3, 3)));
        for i in 1..=4 {
            for j in i + 1..=4 {
                b0 += q(e(i, i) * e(j, j) - e(i, j) * e(i, j));
            }
        }
        // The cos-dependent B terms carry a factor 2 (fixed by A = tr M, B = e₂(M)).
        let b1 = 2.0
            * (q(e(1, 3) * e(2, 3) - e(1, 2) * e(3, 3))
                + q(e(1, 4) * e(2, 4) - e(1, 2) * e(4, 4))
                + q(e(1, 2) * e(1, 4) - e(1, 1) * e(2, 4))
                + q(e(2, 4) * e(3, 3) - e(2, 3) * e(3, 4)));
        let b2 = 2.0
            * (q(e(1, 2) * e(2, 3) - e(1, 3) * e(2, 2))
                + q(e(1, 4) * e(3, 4) - e(1, 3) * e(4, 4))
                + q(e(1, 3) * e(1, 4) - e(1, 1) * e(3, 4))
                + q(e(2, 3) * e(2, 4) - e(2, 2) * e(3, 4)));
        let bm = 2.0
            * (q(e(1, 2) * e(1, 3) - e(1, 1) * e(2, 3))
                + q(e(2, 4) * e(3, 4) - e(2, 3) * e(4, 4))
                + q(e(1, 4) * e(2, 3) - e(1, 2) * e(3, 4))
                + q(e(1, 4) * e(2, 3) - e(1, 3) * e(2, 4)));
        let bp = 2.0 * q(e(1, 3) * e(2, 4) - e(1, 2) * e(3, 4));
        AndreevCoefficients { a: [a0, a1, a2, a12], b: [b0, b1, b2, bm, bp] }
    }

    pub fn ab(&self, t1: f64, t2: f64) -> (f64, f64) {
        let (c1, c2, cm, cp) = (t1.cos(), t2.cos(), (t1 - t2).cos(), (t1 + t2).cos());
        let a = self.a[0] + self.a[1] * c1 + self.a[2] * c2 + self.a[3] * cm;
        let b = self.b[0] + self.b[1] * c1 + self.b[2] * c2 + self.b[3] * cm + self.b[4] * cp;
        (a, b)
    }

    /// Squared energies (ε²₋, ε²₊) of the two Andreev branches, units of Δ².
    pub fn squared_energies(&self, t1: f64, t2: f64) -> Result<(f64, f64)> {
        let (a, b) = self.ab(t1, t2);
        let d = a * a - 4.0 * b + 8.0;
        if d < -1e-12 {
            return Err(CzError::Consistency { radicand: d });
        }
        let root = d.max(0.0).sqrt();
        Ok((((a + 4.0 - root) / 8.0).max(0.0), (a + 4.0 + root) / 8.0))
    }

    /// Junction ground energy −(ε₊ᴬ + ε₊ᴮ) in units of Δ, written in the
    /// form that stays analytic where the two branches touch.
    pub fn ground_energy(&self, t1: f64, t2: f64) -> Result<f64> {
        let (a, b) = self.ab(t1, t2);
        let inner = 2.0 * a + b + 2.0;
        if inner < -1e-12 {
            return Err(CzError::Consistency { radicand: inner });
        }
        Ok(-((a + 4.0) / 4.0 + inner.max(0.0).sqrt() / 2.0).max(0.0).sqrt())
    }
}

/// The four Andreev energies ±ε_A, ±ε_B in units of Δ, ascending.
pub fn andreev_energies(s: &Matrix4<C64>, theta1: f64, theta2: f64) -> Result<[f64; 4]> {
    let (lo, hi) = AndreevCoefficients::from_smatrix(s).squared_energies(theta1, theta2)?;
    let (lo, hi) = (lo.sqrt(), hi.sqrt());
    Ok([-hi, -lo, lo, hi])
}

/// Bivariate quartic expansion E(θ₁, θ₂)/Δ = Σ K_ij θ₁^i θ₂^j, i + j ≤ 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticExpansion {
    pub k: [[f64; 5]; 5],
}

/// Even-order coupling terms (i, j) with 0 < i + j ≤ 4.
pub const EVEN_TERMS: [(usize, usize); 8] =
    [(2, 0), (1, 1), (0, 2), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];

impl QuarticExpansion {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > 4 {
            0.0
        } else {
            self.k[i][j]
        }
    }

    /// δK = K − K_reference, entrywise.
    pub fn delta(&self, reference: &QuarticExpansion) -> QuarticExpansion {
        let mut k = [[0.0; 5]; 5];
        for (i, row) in k.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.k[i][j] - reference.k[i][j];
            }
        }
        QuarticExpansion { k }
    }
}

const STENCIL_HALF_WIDTH: f64 = 0.3;
const STENCIL_POINTS: usize = 9;
const FIT_MAX_ORDER: usize = 6;

struct FitDesign {
    points: Vec<(f64, f64)>,
    terms: Vec<(usize, usize)>,
    design: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

fn fit_design() -> &'static FitDesign {
    static DESIGN: OnceLock<FitDesign> = OnceLock::new();
    DESIGN.get_or_init(|| {
        let grid: Vec<f64> = (0..STENCIL_POINTS)
            .map(|k| -STENCIL_HALF_WIDTH + 2.0 * STENCIL_HALF_WIDTH * k as f64 / (STENCIL_POINTS - 1) as f64)
            .collect();
        let points: Vec<(f64, f64)> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect();
        // Sixth-order monomials are fitted and discarded so the retained
        // coefficients are Taylor coefficients rather than a least-squares blend.
        let terms: Vec<(usize, usize)> = (0..=FIT_MAX_ORDER)
            .flat_map(|i| (0..=FIT_MAX_ORDER - i).map(move |j| (i, j)))
            .filter(|(i, j)| (i + j) % 2 == 0)
            .collect();
        let design = DMatrix::from_fn(points.len(), terms.len(), |r, c| {
            let (x, y) = points[r];
            let (i, j) = terms[c];
            x.powi(i as i32) * y.powi(j as i32)
        });
        let pinv = design.clone().pseudo_inverse(1e-14).expect("well-conditioned stencil");
        FitDesign { points, terms, design, pinv }
    })
}

/// Quartic expansion of the junction ground energy from a least-squares fit
/// on a 9×9 stencil over [−0.3, 0.3]². Odd total orders vanish by parity
/// and are never fitted.
pub fn josephson_expansion(s: &Matrix4<C64>) -> Result<QuarticExpansion> {
    let coeffs = AndreevCoefficients::from_smatrix(s);
    let fit = fit_design();
    let mut y = DVector::zeros(fit.points.len());
    for (r, &(x1, x2)) in fit.points.iter().enumerate() {
        y[r] = coeffs.ground_energy(x1, x2)?;
    }
    let c = &fit.pinv * &y;
    let residual = (&fit.design * &c - &y).amax();
    if residual > 1e-8 {
        return Err(CzError::FitResidual { residual });
    }
    let mut k = [[0.0; 5]; 5];
    for (n, &(i, j)) in fit.terms.iter().enumerate() {
        if i + j <= 4 {
            k[i][j] = c[n];
        }
    }
    Ok(QuarticExpansion { k })
}

/// Default wire-coupling parameter b shared by both beam splitters.
pub const DEFAULT_SPLITTER_B: f64 = 0.93;

/// Finds real beam splitters (all phases zero, common `b`) whose
/// wire-decoupled expansion has K₂₀ and K₀₂ equal to the targets.
///
/// At wire transmission zero the left splitter alone sets K₂₀ and the right
/// alone sets K₀₂, so the 2-D root problem separates into two bracketed
/// 1-D searches over a_left and a_right.
pub fn calibrate_beamsplitters(
    target_k20: f64,
    target_k02: f64,
    wire: &WireParams,
    b: f64,
) -> Result<ScatteringModel> {
    for t in [target_k20, target_k02] {
        if !(t > 0.0 && t <= 0.25) {
            return Err(CzError::Parameter(format!("calibration target {t} outside (0, 0.25]")));
        }
    }
    let decoupled = wire.with_transmission(0.0);
    let k_at = |al: f64, ar: f64| -> Result<QuarticExpansion> {
        let m = ScatteringModel {
            left: BeamSplitterParams::real(al, b),
            right: BeamSplitterParams::real(ar, b),
            wire: decoupled,
        };
        josephson_expansion(&compose_h_smatrix(&m)?)
    };
    const A_MAX: f64 = 0.999;
    let solve = |target: f64, left: bool| -> Result<f64> {
        let f = |a: f64| -> Result<f64> {
            let k = if left { k_at(a, 0.5)?.get(2, 0) } else { k_at(0.5, a)?.get(0, 2) };
            Ok(k - target)
        };
        brent(f, 0.0, A_MAX, 1e-12, 200).map_err(|e| {
            CzError::Calibration(format!(
                "no a in [0, {A_MAX}] reaches K = {target} with b = {b} ({e})"
            ))
        })
    };
    let al = solve(target_k20, true)?;
    let ar = solve(target_k02, false)?;
    let k = k_at(al, ar)?;
    if (k.get(2, 0) - target_k20).abs() > 1e-4 || (k.get(0, 2) - target_k02).abs() > 1e-4 {
        return Err(CzError::Calibration(format!(
            "calibrated K20 = {}, K02 = {} miss targets",
            k.get(2, 0),
            k.get(0, 2)
        )));
    }
    Ok(ScatteringModel {
        left: BeamSplitterParams::real(al, b),
        right: BeamSplitterParams::real(ar, b),
        wire: *wire,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn defect<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> f64
    where
        nalgebra::Const<N>: nalgebra::DimName,
    {
        (m.adjoint() * m - nalgebra::SMatrix::<C64, N, N>::identity()).camax()
    }

    fn splitter() -> impl Strategy<Value = BeamSplitterParams> {
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..TAU, 0.0..TAU, 0.0..TAU, 0.0..TAU).prop_map(
            |(a, b, phi11, phi22, phi12, phi13)| BeamSplitterParams { a, b, phi11, phi22, phi12, phi13 },
        )
    }

    fn model() -> impl Strategy<Value = ScatteringModel> {
        (splitter(), splitter(), 0.0..=1.0f64, 0.0..TAU, 0.0..TAU).prop_map(|(left, right, t, vartheta, eta)| {
            ScatteringModel { left, right, wire: WireParams { t, vartheta, eta } }
        })
    }

    /// Independent route: A = tr M and B = e₂(M) for M = S e^{iθ} S* e^{−iθ}.
    fn ab_from_trace(s: &Matrix4<C64>, t1: f64, t2: f64) -> (C64, C64) {
        let ph = Matrix4::from_diagonal(&nalgebra::Vector4::new(cis(0.0), cis(t1), cis(t2), cis(0.0)));
        let m = s * ph * s.conjugate() * ph.adjoint();
        let tr = m.trace();
        let tr2 = (m * m).trace();
        (tr, (tr * tr - tr2) / 2.0)
    }

    fn det_residual(s: &Matrix4<C64>, t1: f64, t2: f64, eps: f64) -> f64 {
        let ph = Matrix4::from_diagonal(&nalgebra::Vector4::new(cis(0.0), cis(t1), cis(t2), cis(0.0)));
        let m = s * ph * s.conjugate() * ph.adjoint();
        let chi = eps.clamp(-1.0, 1.0).acos();
        (Matrix4::identity() - m * cis(-2.0 * chi)).determinant().norm()
    }

    #[test]
    fn wire_limits() {
        let w = wire_smatrix(&WireParams { t: 1.0, vartheta: 0.3, eta: 0.7 }).unwrap();
        assert!(w[(0, 0)].norm() < 1e-15 && w[(1, 1)].norm() < 1e-15);
        assert!((w[(0, 1)].norm() - 1.0).abs() < 1e-15);
        let w = wire_smatrix(&WireParams { t: 0.0, vartheta: 0.3, eta: 0.7 }).unwrap();
        assert!(w[(0, 1)].norm() < 1e-15);
        assert!((w[(0, 0)].norm() - 1.0).abs() < 1e-15 && (w[(1, 1)].norm() - 1.0).abs() < 1e-15);
        assert!(wire_smatrix(&WireParams { t: 1.5, vartheta: 0.0, eta: 0.0 }).is_err());
    }

    #[test]
    fn splitter_decoupling_limits() {
        let y = beamsplitter_smatrix(&BeamSplitterParams { a: 1.0, b: 0.4, phi11: 0.2, phi22: 1.0, phi12: 2.0, phi13: 3.0 }).unwrap();
        assert!((y[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let y = beamsplitter_smatrix(&BeamSplitterParams { a: 0.3, b: 0.0, phi11: 0.2, phi22: 1.0, phi12: 2.0, phi13: 3.0 }).unwrap();
        assert!((y[(1, 1)].norm() - 1.0).abs() < 1e-14);
        let y = beamsplitter_smatrix(&BeamSplitterParams { a: 0.3, b: 1.0, phi11: 0.2, phi22: 1.0, phi12: 2.0, phi13: 3.0 }).unwrap();
        assert!((y[(2, 2)].norm() - 1.0).abs() < 1e-14);
        assert!(beamsplitter_smatrix(&BeamSplitterParams::real(1.2, 0.5)).is_err());
    }

    #[test]
    fn decoupled_wire_gives_block_diagonal_s() {
        let m = ScatteringModel {
            left: BeamSplitterParams::real(0.3, 0.8),
            right: BeamSplitterParams::real(0.6, 0.5),
            wire: WireParams::symmetric(0.0),
        };
        let s = compose_h_smatrix(&m).unwrap();
        // Left block: terminals 1, 2. Right block: terminals 3, 4.
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert!(s[(i, j)].norm() < 1e-14 && s[(j, i)].norm() < 1e-14);
        }
    }

    #[test]
    fn mirror_symmetric_model_is_permutation_invariant() {
        let bs = BeamSplitterParams { a: 0.4, b: 0.7, phi11: 0.3, phi22: 1.1, phi12: 0.5, phi13: 2.0 };
        let m = ScatteringModel { left: bs, right: bs, wire: WireParams::symmetric(0.45) };
        let s = compose_h_smatrix(&m).unwrap();
        // Mirror swaps ground-left with ground-right and qubit-1 with qubit-2.
        const P: [usize; 4] = [3, 2, 1, 0];
        for i in 0..4 {
            for j in 0..4 {
                assert!((s[(i, j)] - s[(P[i], P[j])]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_phase_puts_states_at_gap_edge() {
        let m = ScatteringModel {
            left: BeamSplitterParams { a: 0.2, b: 0.9, phi11: 0.4, phi22: 2.0, phi12: 1.0, phi13: 0.3 },
            right: BeamSplitterParams::real(0.7, 0.3),
            wire: WireParams { t: 0.6, vartheta: 0.2, eta: 1.3 },
        };
        let e = andreev_energies(&compose_h_smatrix(&m).unwrap(), 0.0, 0.0).unwrap();
        for x in e {
            assert!((x.abs() - 1.0).abs() < 1e-7, "{e:?}");
        }
    }

    #[test]
    fn decoupled_wire_factorizes_into_two_terminal_levels() {
        let m = ScatteringModel {
            left: BeamSplitterParams::real(0.25, 0.85),
            right: BeamSplitterParams::real(0.55, 0.6),
            wire: WireParams::symmetric(0.0),
        };
        let s = compose_h_smatrix(&m).unwrap();
        let t1 = s[(0, 1)].norm_sqr();
        let t2 = s[(2, 3)].norm_sqr();
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.7), (PI, 0.1)] {
            let e = andreev_energies(&s, a, b).unwrap();
            let mut want = [
                (1.0 - t1 * (a / 2.0).sin().powi(2)).sqrt(),
                (1.0 - t2 * (b / 2.0).sin().powi(2)).sqrt(),
            ];
            want.sort_by(f64::total_cmp);
            assert!((e[2] - want[0]).abs() < 1e-8 && (e[3] - want[1]).abs() < 1e-8, "{e:?} vs {want:?}");
        }
    }

    #[test]
    fn expansion_of_two_terminal_junction_matches_taylor_series() {
        let m = ScatteringModel {
            left: BeamSplitterParams::real(0.25, 0.85),
            right: BeamSplitterParams::real(0.55, 0.6),
            wire: WireParams::symmetric(0.0),
        };
        let s = compose_h_smatrix(&m).unwrap();
        let k = josephson_expansion(&s).unwrap();
        // −√(1 − T sin²(θ/2)) = −1 + Tθ²/8 − T(1 − 3T/4)θ⁴/96 + …
        for (t, (i2, i4)) in [(s[(0, 1)].norm_sqr(), ((2, 0), (4, 0))), (s[(2, 3)].norm_sqr(), ((0, 2), (0, 4)))] {
            assert!((k.get(i2.0, i2.1) - t / 8.0).abs() < 1e-9);
            assert!((k.get(i4.0, i4.1) + t * (1.0 - 0.75 * t) / 96.0).abs() < 1e-7, "{} {}", k.get(i4.0, i4.1), -t * (1.0 - 0.75 * t) / 96.0);
        }
        for (i, j) in [(1, 1), (3, 1), (2, 2), (1, 3)] {
            assert!(k.get(i, j).abs() < 1e-9, "K{i}{j} = {}", k.get(i, j));
        }
        assert!((k.get(0, 0) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_round_trip_and_coupling() {
        let wire = WireParams::symmetric(0.0);
        let m = calibrate_beamsplitters(0.123, 0.123, &wire, DEFAULT_SPLITTER_B).unwrap();
        let k0 = josephson_expansion(&compose_h_smatrix(&m).unwrap()).unwrap();
        assert!((k0.get(2, 0) - 0.123).abs() < 1e-4);
        assert!((k0.get(0, 2) - 0.123).abs() < 1e-4);
        assert!(m.left.a >= 0.0 && m.left.a <= 1.0);
        let k = josephson_expansion(&compose_h_smatrix(&m.with_wire_transmission(0.6)).unwrap()).unwrap();
        let dk = k.delta(&k0);
        let k11 = dk.get(1, 1).abs();
        assert!(k11 > 1e-4);
        for (i, j) in [(3, 1), (2, 2), (1, 3)] {
            assert!(k11 > dk.get(i, j).abs());
        }
    }

    #[test]
    fn calibration_fails_beyond_two_terminal_maximum() {
        // K₂₀ = T/8 cannot exceed 1/8 for a single channel.
        let r = calibrate_beamsplitters(0.2, 0.2, &WireParams::symmetric(0.0), DEFAULT_SPLITTER_B);
        assert!(matches!(r, Err(CzError::Calibration(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn component_and_composed_matrices_are_unitary(m in model()) {
            prop_assert!(defect(&wire_smatrix(&m.wire).unwrap()) < 1e-14);
            let y = beamsplitter_smatrix(&m.left).unwrap();
            prop_assert!(defect(&y) < 1e-12);
            prop_assert!((y - y.transpose()).camax() < 1e-15);
            if let Ok(s) = compose_h_smatrix(&m) {
                prop_assert!(defect(&s) < 1e-12);
                prop_assert!((s - s.transpose()).camax() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn coefficients_match_trace_route(m in model(), t1 in -PI..PI, t2 in -PI..PI) {
            let s = compose_h_smatrix(&m).unwrap();
            let (a, b) = AndreevCoefficients::from_smatrix(&s).ab(t1, t2);
            let (ta, tb) = ab_from_trace(&s, t1, t2);
            prop_assert!((ta.re - a).abs() < 1e-10 && ta.im.abs() < 1e-10);
            prop_assert!((tb.re - b).abs() < 1e-10 && tb.im.abs() < 1e-10);
        }

        #[test]
        fn energies_satisfy_determinant_condition(m in model(), t1 in -PI..PI, t2 in -PI..PI) {
            let s = compose_h_smatrix(&m).unwrap();
            for e in andreev_energies(&s, t1, t2).unwrap() {
                prop_assert!(det_residual(&s, t1, t2, e) < 1e-10, "ε = {}", e);
            }
        }

        #[test]
        fn energies_are_even_and_periodic(m in model(), t1 in -PI..PI, t2 in -PI..PI) {
            let s = compose_h_smatrix(&m).unwrap();
            let e = andreev_energies(&s, t1, t2).unwrap();
            let ep = andreev_energies(&s, -t1, -t2).unwrap();
            let eq = andreev_energies(&s, t1 + TAU, t2 - TAU).unwrap();
            for k in 0..4 {
                prop_assert!((e[k] - ep[k]).abs() < 1e-10);
                prop_assert!((e[k] - eq[k]).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn expansion_has_even_parity(left in splitter(), right in splitter(), t in 0.0..0.9f64) {
            let m = ScatteringModel { left, right, wire: WireParams::symmetric(t) };
            let s = compose_h_smatrix(&m).unwrap();
            // Odd orders are structurally absent; check the fitted surface is even.
            let coeffs = AndreevCoefficients::from_smatrix(&s);
            for &(x, y) in &[(0.2, -0.1), (0.05, 0.25)] {
                let a = coeffs.ground_energy(x, y).unwrap();
                let b = coeffs.ground_energy(-x, -y).unwrap();
                prop_assert!((a - b).abs() < 1e-13);
            }
            if let Ok(k) = josephson_expansion(&s) {
                for i in 0..5 {
                    for j in 0..5 {
                        if (i + j) % 2 == 1 {
                            prop_assert_eq!(k.get(i, j), 0.0);
                        }
                    }
                }
            }
        }
    }
}
