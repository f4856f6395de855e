//! Dense helpers shared by the physics modules.
//!
//! All device Hamiltonians are real symmetric in the oscillator basis, so
//! propagation keeps complex state blocks as a pair of real matrices and
//! advances them with a real symmetric eigendecomposition.

use nalgebra::{Complex, DMatrix, DVector};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

/// Complex matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBlock {
    pub re: RMat,
    pub im: RMat,
}

impl SplitBlock {
    pub fn from_real(re: RMat) -> Self {
        let im = RMat::zeros(re.nrows(), re.ncols());
        SplitBlock { re, im }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(RMat::identity(n, n))
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn to_complex(&self) -> CMat {
        CMat::from_fn(self.nrows(), self.ncols(), |i, j| {
            Complex::new(self.re[(i, j)], self.im[(i, j)])
        })
    }

    pub fn from_complex(m: &CMat) -> Self {
        SplitBlock {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn column(&self, j: usize) -> (DVector<f64>, DVector<f64>) {
        (self.re.column(j).into_owned(), self.im.column(j).into_owned())
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &SplitBlock) -> f64 {
        let dr = &self.re - &other.re;
        let di = &self.im - &other.im;
        (dr.norm_squared() + di.norm_squared()).sqrt()
    }

    /// ⟨v|X_j⟩ for a real vector v and column j.
    pub fn project(&self, v: &DVector<f64>, j: usize) -> Complex<f64> {
        Complex::new(self.re.column(j).dot(v), self.im.column(j).dot(v))
    }

    /// Overlaps pᵀ·X with the real columns of `p`.
    pub fn project_onto(&self, p: &RMat) -> SplitBlock {
        SplitBlock { re: p.tr_mul(&self.re), im: p.tr_mul(&self.im) }
    }

    pub fn transpose(&self) -> SplitBlock {
        SplitBlock {
            re: self.re.transpose(),
            im: self.im.transpose(),
        }
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: RMat,
}

pub fn sym_eigen(h: &RMat) -> SymEigen {
    let e = h.clone().symmetric_eigen();
    let n = e.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| e.eigenvalues[order[i]]);
    let vectors = RMat::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    SymEigen { values, vectors }
}

/// Eigendecomposition of a matrix that is block diagonal on the index sets
/// `blocks`, which must partition 0..n. Each block is solved separately;
/// a nonzero off-block entry falls back to the dense solver.
pub fn sym_eigen_blocked(h: &RMat, blocks: &[Vec<usize>]) -> SymEigen {
    let n = h.nrows();
    let mut block_of = vec![usize::MAX; n];
    for (b, idx) in blocks.iter().enumerate() {
        for &i in idx {
            block_of[i] = b;
        }
    }
    if block_of.contains(&usize::MAX) {
        return sym_eigen(h);
    }
    for j in 0..n {
        for i in 0..n {
            if block_of[i] != block_of[j] && h[(i, j)] != 0.0 {
                return sym_eigen(h);
            }
        }
    }
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::with_capacity(n);
    for idx in blocks.iter().filter(|b| !b.is_empty()) {
        let sub = RMat::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
        let e = sub.symmetric_eigen();
        for k in 0..idx.len() {
            let mut v = DVector::zeros(n);
            for (a, &i) in idx.iter().enumerate() {
                v[i] = e.eigenvectors[(a, k)];
            }
            pairs.push((e.eigenvalues[k], v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    SymEigen {
        values: DVector::from_iterator(n, pairs.iter().map(|p| p.0)),
        vectors: RMat::from_columns(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>()),
    }
}

impl SymEigen {
    /// Applies exp(−2πi·H·t) to a complex block.
    pub fn evolve(&self, x: &SplitBlock, t: f64) -> SplitBlock {
        let q = &self.vectors;
        let mut zr = q.tr_mul(&x.re);
        let mut zi = q.tr_mul(&x.im);
        for (k, &e) in self.values.iter().enumerate() {
            let (s, c) = (-2.0 * std::f64::consts::PI * e * t).sin_cos();
            let mut rr = zr.row_mut(k);
            let mut ri = zi.row_mut(k);
            for j in 0..rr.len() {
                let (a, b) = (rr[j], ri[j]);
                rr[j] = c * a - s * b;
                ri[j] = s * a + c * b;
            }
        }
        SplitBlock {
            re: q * zr,
            im: q * zi,
        }
    }

    /// Full propagator exp(−2πi·H·t) as a complex matrix.
    pub fn propagator(&self, t: f64) -> SplitBlock {
        self.evolve(&SplitBlock::identity(self.values.len()), t)
    }
}

/// Kronecker product of two real matrices.
pub fn kron(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

/// Largest absolute entry of U†U − I.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}
