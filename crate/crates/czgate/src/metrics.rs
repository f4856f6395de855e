//! CZ figures of merit.

use nalgebra::{Complex, Matrix4, Vector4};

use crate::devices::SpectrumTable;
use crate::error::{CzError, Result};

type C64 = Complex<f64>;

/// Gate restricted to the computational states, ordered 00, 01, 10, 11.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputationalBlock {
    pub w: Matrix4<C64>,
}

impl ComputationalBlock {
    pub fn new(w: Matrix4<C64>) -> Self {
        ComputationalBlock { w }
    }

    /// φ_m = −arg W_mm.
    pub fn phases(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| -self.w[(k, k)].arg())
    }

    pub fn max_column_norm(&self) -> f64 {
        self.w.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub fn u_cz() -> Matrix4<C64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0).map(|x| C64::new(x, 0.0)))
}

/// Ẽ₁₁ + Ẽ₀₀ − Ẽ₀₁ − Ẽ₁₀ (GHz).
pub fn delta_cz(table: &SpectrumTable) -> Result<f64> {
    Ok(table.energy((1, 1))? + table.energy((0, 0))? - table.energy((0, 1))? - table.energy((1, 0))?)
}

/// Single-qubit Z corrections diag{1, e^{i(φ₀₁−φ₀₀)}, e^{i(φ₁₀−φ₀₀)}, e^{i(φ₁₀+φ₀₁−2φ₀₀)}}.
pub fn z_corrections(block: &ComputationalBlock) -> Result<Matrix4<C64>> {
    const LABELS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
    for k in 0..4 {
        if block.w[(k, k)].norm() < 1e-12 {
            return Err(CzError::Leakage { label: LABELS[k], magnitude: block.w[(k, k)].norm() });
        }
    }
    let p = block.phases();
    let d = Vector4::new(0.0, p[1] - p[0], p[2] - p[0], p[2] + p[1] - 2.0 * p[0]);
    Ok(Matrix4::from_diagonal(&d.map(|x| C64::from_polar(1.0, x))))
}

/// F = [tr(WW†) + |tr(U_z W U_CZ)|²] / 20. A diagonal entry that vanished
/// entirely contributes no phase information, so its correction is taken as 1.
pub fn fidelity(block: &ComputationalBlock) -> f64 {
    let w = &block.w;
    let uz = z_corrections(block).unwrap_or_else(|_| Matrix4::identity());
    let first = (w * w.adjoint()).trace().re;
    let second = (uz * w * u_cz()).trace().norm_sqr();
    (first + second) / 20.0
}

pub fn gate_error(block: &ComputationalBlock) -> f64 {
    1.0 - fidelity(block)
}
