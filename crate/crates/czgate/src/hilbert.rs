//! Truncated harmonic-oscillator bases and the phase/charge operators.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CzError, Result};
use crate::linalg::{CMat, RMat};

pub const MIN_LEVELS: usize = 5;
pub const MAX_PRODUCT_DIM: usize = 10_000;

/// Oscillator basis whose frequency matches the quadratic part of a qubit
/// Hamiltonian `4 E_C n² + E_Jquad θ²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorBasis {
    pub levels: usize,
    pub theta_zpf: f64,
    pub plasma_freq: f64,
}

impl OscillatorBasis {
    pub fn new(e_c: f64, e_j_quad: f64, levels: usize) -> Result<Self> {
        if !(e_c > 0.0 && e_c.is_finite()) || !(e_j_quad > 0.0 && e_j_quad.is_finite()) {
            return Err(CzError::Parameter(format!(
                "energies must be positive (E_C = {e_c}, E_Jquad = {e_j_quad})"
            )));
        }
        if levels < MIN_LEVELS {
            return Err(CzError::Truncation { levels });
        }
        Ok(OscillatorBasis {
            levels,
            theta_zpf: (2.0 * e_c / e_j_quad).powf(0.25),
            plasma_freq: (8.0 * e_j_quad * e_c).sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    Single { levels: usize },
    Product { first: usize, second: usize },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::Single { levels } => levels,
            BasisTag::Product { first, second } => first * second,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMat,
    pub basis: BasisTag,
}

impl OperatorMatrix {
    pub fn new(entries: CMat, basis: BasisTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() != basis.dim() {
            return Err(CzError::BasisMismatch(format!(
                "{}x{} matrix does not fit basis of dimension {}",
                entries.nrows(),
                entries.ncols(),
                basis.dim()
            )));
        }
        Ok(OperatorMatrix { entries, basis })
    }

    pub fn from_real(m: &RMat, basis: BasisTag) -> Result<Self> {
        Self::new(m.map(|x| Complex::new(x, 0.0)), basis)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Real part, for operators known to be real in the oscillator basis.
    pub fn real_part(&self) -> RMat {
        self.entries.map(|z| z.re)
    }

    /// ‖A − A†‖ / max(‖A‖, 1) in the Frobenius norm.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.norm() / self.entries.norm().max(1.0)
    }

    pub fn unitarity_defect(&self) -> f64 {
        crate::linalg::unitarity_defect(&self.entries)
    }
}

fn lowering(m: usize) -> RMat {
    RMat::from_fn(m, m, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

fn theta_raw(basis: &OscillatorBasis, m: usize) -> RMat {
    let a = lowering(m);
    (&a + a.transpose()) * basis.theta_zpf
}

/// θ̂ and n̂ as N×N matrices, with n̂ = (i/2λ)(a − a†) so that [n̂, θ̂] = i.
pub fn build_phase_charge_ops(
    e_c: f64,
    e_j_quad: f64,
    levels: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let basis = OscillatorBasis::new(e_c, e_j_quad, levels)?;
    let a = lowering(levels);
    let tag = BasisTag::Single { levels };
    let theta = OperatorMatrix::from_real(&((&a + a.transpose()) * basis.theta_zpf), tag)?;
    let scale = 1.0 / (2.0 * basis.theta_zpf);
    let n = (&a - a.transpose()).map(|x| Complex::new(0.0, scale * x));
    Ok((theta, OperatorMatrix::new(n, tag)?))
}

/// θ̂^k with every retained entry exact: the power is taken in a padded
/// space and truncated, so the top rows do not see the truncation edge.
pub fn phase_power(basis: &OscillatorBasis, k: u32) -> RMat {
    let n = basis.levels;
    let m = n + k as usize / 2 + 1;
    let th = theta_raw(basis, m);
    let mut p = RMat::identity(m, m);
    for _ in 0..k {
        p = &p * &th;
    }
    p.view((0, 0), (n, n)).into_owned()
}

/// n̂² with exact entries (real, since n̂ is i times a real antisymmetric matrix).
pub fn charge_squared(basis: &OscillatorBasis) -> RMat {
    let n = basis.levels;
    let m = n + 1;
    let a = lowering(m);
    let d = &a - a.transpose();
    let sq = -(&d * &d) / (4.0 * basis.theta_zpf * basis.theta_zpf);
    sq.view((0, 0), (n, n)).into_owned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

fn check_product(a: usize, b: usize) -> Result<usize> {
    let dim = a
        .checked_mul(b)
        .ok_or(CzError::DimensionOverflow { dim: usize::MAX })?;
    if dim > MAX_PRODUCT_DIM {
        return Err(CzError::DimensionOverflow { dim });
    }
    Ok(dim)
}

/// op ⊗ I (first slot) or I ⊗ op (second slot).
pub fn embed_pair(op: &OperatorMatrix, slot: Slot, other_dim: usize) -> Result<OperatorMatrix> {
    if other_dim < MIN_LEVELS {
        return Err(CzError::Truncation { levels: other_dim });
    }
    let own = op.dim();
    check_product(own, other_dim)?;
    let id = CMat::identity(other_dim, other_dim);
    let (entries, basis) = match slot {
        Slot::First => (
            op.entries.kronecker(&id),
            BasisTag::Product { first: own, second: other_dim },
        ),
        Slot::Second => (
            id.kronecker(&op.entries),
            BasisTag::Product { first: other_dim, second: own },
        ),
    };
    OperatorMatrix::new(entries, basis)
}

/// Real counterpart of [`embed_pair`].
pub fn embed_real(op: &RMat, slot: Slot, other_dim: usize) -> Result<RMat> {
    check_product(op.nrows(), other_dim)?;
    let id = RMat::identity(other_dim, other_dim);
    Ok(match slot {
        Slot::First => op.kronecker(&id),
        Slot::Second => id.kronecker(op),
    })
}

/// Keeps product-basis rows/columns (i₁, i₂) with i₁ < n1 and i₂ < n2 from
/// an operator on an (m1 × m2) product space.
pub fn truncate_product(op: &RMat, m1: usize, m2: usize, n1: usize, n2: usize) -> RMat {
    debug_assert_eq!(op.nrows(), m1 * m2);
    let idx: Vec<usize> = (0..n1)
        .flat_map(|i| (0..n2).map(move |j| i * m2 + j))
        .collect();
    RMat::from_fn(idx.len(), idx.len(), |r, c| op[(idx[r], idx[c])])
}
