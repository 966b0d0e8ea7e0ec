//! Dense operators on a position grid.
//!
//! Kernels sample K(x_i, x_j) directly; the quadrature weight dx enters the action
//! (Af)_i = Σ_j K_ij f_j dx, so the matrix of the discrete operator is K·dx.

use nalgebra::{DMatrix, Dyn, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::phase_space::{check_h, PhasePoint, PositionGrid, WaveFunction};

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperator {
    kernel: DMatrix<C64>,
    grid: PositionGrid,
    h: f64,
    hermitian_hint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorms {
    pub op: f64,
    pub hs: f64,
    pub tr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub i_inf: f64,
    pub i_tr: f64,
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub(crate) fn herm(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a hermitian matrix with a capped sweep count. A stalled or non-finite
/// run is retried on a diagonal-phase similarity and on a diagonal shift, which keep the spectrum
/// and eigenvectors recoverable. None when every attempt fails.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> Option<SymmetricEigen<C64, Dyn>> {
    let n = m.nrows();
    let phase = |i: usize| C64::from_polar(1.0, 0.7 * i as f64);
    let shift = max_abs(m).max(f64::MIN_POSITIVE);
    let ok = |e: &SymmetricEigen<C64, Dyn>| {
        e.eigenvalues.iter().all(|v| v.is_finite()) && e.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    };
    let run = |a: DMatrix<C64>| SymmetricEigen::try_new(a, f64::EPSILON, 10_000).filter(ok);
    if let Some(e) = run(m.clone()) {
        return Some(e);
    }
    let rotated = DMatrix::from_fn(n, n, |i, j| phase(i) * m[(i, j)] * phase(j).conj());
    if let Some(mut e) = run(rotated) {
        for i in 0..n {
            let p = phase(i).conj();
            e.eigenvectors.row_mut(i).iter_mut().for_each(|z| *z *= p);
        }
        return Some(e);
    }
    let shifted = m + DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
    run(shifted).map(|mut e| {
        e.eigenvalues.iter_mut().for_each(|v| *v -= shift);
        e
    })
}

/// Singular values by SVD with a capped sweep count, unordered. The complex SVD can stall or
/// return a NaN on nearly rank-deficient input, so failures are retried on the transpose and on
/// a column-phase rotation, which share the singular values, then on the eigenvalues of M^†M.
fn bounded_svd(m: DMatrix<C64>) -> Vec<f64> {
    let finite = |s: &[f64]| s.iter().all(|v| v.is_finite());
    let attempts = [
        m.clone(),
        m.transpose(),
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * C64::from_polar(1.0, 0.7 * j as f64)),
    ];
    for a in attempts {
        if let Some(svd) = SVD::try_new_unordered(a, false, false, f64::EPSILON, 10_000) {
            let s: Vec<f64> = svd.singular_values.iter().copied().collect();
            if finite(&s) {
                return s;
            }
        }
    }
    match hermitian_eigen(&herm(&(m.adjoint() * &m))) {
        Some(e) => e.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; m.ncols()],
    }
}

/// max|M − M^†| relative to max|M|.
fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let s = max_abs(m);
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

fn anti_hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] + m[(j, i)].conj()).norm());
        }
    }
    let s = max_abs(m);
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

/// Apply the momentum −ih d/du spectrally (Nyquist mode dropped).
pub(crate) fn apply_momentum(v: &mut [C64], dx: f64, h: f64) {
    let k = fourier::derivative_wavenumbers(v.len(), dx);
    fourier::fft(v);
    for (z, kk) in v.iter_mut().zip(&k) {
        *z *= h * kk;
    }
    fourier::ifft(v);
}

impl QuantumOperator {
    pub fn new(kernel: DMatrix<C64>, grid: PositionGrid, h: f64) -> Result<Self> {
        check_h(h)?;
        if kernel.nrows() != grid.len() || kernel.ncols() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{}x{} kernel on a {}-point grid",
                kernel.nrows(),
                kernel.ncols(),
                grid.len()
            )));
        }
        if kernel.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite kernel entry".into()));
        }
        Ok(QuantumOperator { kernel, grid, h, hermitian_hint: false })
    }

    /// Marks the operator hermitian after checking max|K − K^†| ≤ 1e-10·max|K|.
    pub fn with_hermitian_hint(mut self) -> Result<Self> {
        let d = hermitian_defect(&self.kernel);
        if d > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("hermitian hint on a kernel with defect {d:e}")));
        }
        self.hermitian_hint = true;
        Ok(self)
    }

    pub(crate) fn from_raw(kernel: DMatrix<C64>, grid: PositionGrid, h: f64) -> Self {
        QuantumOperator { kernel, grid, h, hermitian_hint: false }
    }

    pub fn identity(grid: PositionGrid, h: f64) -> Self {
        let k = DMatrix::identity(grid.len(), grid.len()) / C64::new(grid.dx(), 0.0);
        QuantumOperator { kernel: k, grid, h, hermitian_hint: true }
    }

    pub fn zeros(grid: PositionGrid, h: f64) -> Self {
        QuantumOperator { kernel: DMatrix::zeros(grid.len(), grid.len()), grid, h, hermitian_hint: true }
    }

    /// Q(h): multiplication by x.
    pub fn position(grid: PositionGrid, h: f64) -> Self {
        Self::multiplication(grid, h, |x| x)
    }

    /// Multiplication by a real function of x.
    pub fn multiplication(grid: PositionGrid, h: f64, v: impl Fn(f64) -> f64) -> Self {
        let dx = grid.dx();
        let d: Vec<C64> = grid.points().into_iter().map(|x| C64::new(v(x) / dx, 0.0)).collect();
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        QuantumOperator { kernel: k, grid, h, hermitian_hint: true }
    }

    /// P(h) = −ih d/dx by Fourier differentiation.
    pub fn momentum(grid: PositionGrid, h: f64) -> Self {
        let n = grid.len();
        let dx = grid.dx();
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            apply_momentum(&mut e, dx, h);
            for i in 0..n {
                k[(i, j)] = e[i] / dx;
            }
        }
        QuantumOperator { kernel: k, grid, h, hermitian_hint: false }
    }

    /// Σ_{Y,h} on the periodic grid.
    pub fn symmetry(grid: PositionGrid, h: f64, y: PhasePoint) -> Self {
        let op = Self::from_linear_map(grid, h, |e| {
            let mut v = e.to_vec();
            crate::phase_space::reflect_raw(&grid, h, y, &mut v);
            v
        })
        .expect("reflection preserves length");
        QuantumOperator { hermitian_hint: false, ..op }
    }

    /// W_{X,h} on the periodic grid.
    pub fn translation(grid: PositionGrid, h: f64, x: PhasePoint) -> Self {
        Self::from_linear_map(grid, h, |e| {
            let mut v = e.to_vec();
            crate::phase_space::translate_raw(&grid, h, x, &mut v);
            v
        })
        .expect("translation preserves length")
    }

    /// |f⟩⟨g|, kernel f(x) ḡ(y).
    pub fn outer(f: &WaveFunction, g: &WaveFunction) -> Result<Self> {
        f.same_grid(g)?;
        let n = f.grid().len();
        let (fv, gv) = (f.values(), g.values());
        let k = DMatrix::from_fn(n, n, |i, j| fv[i] * gv[j].conj());
        Ok(QuantumOperator { kernel: k, grid: f.grid(), h: f.h(), hermitian_hint: false })
    }

    pub fn projector(f: &WaveFunction) -> Self {
        let mut p = Self::outer(f, f).expect("same grid");
        p.hermitian_hint = true;
        p
    }

    /// Operator of a linear map given on grid vectors: column j is map(e_j)/dx.
    pub fn from_linear_map(grid: PositionGrid, h: f64, map: impl Fn(&[C64]) -> Vec<C64>) -> Result<Self> {
        let n = grid.len();
        let dx = grid.dx();
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let col = map(&e);
            if col.len() != n {
                return Err(Error::GridMismatch("linear map changed the vector length".into()));
            }
            for i in 0..n {
                k[(i, j)] = col[i] / dx;
            }
        }
        Self::new(k, grid, h)
    }

    pub fn kernel(&self) -> &DMatrix<C64> {
        &self.kernel
    }
    pub fn into_kernel(self) -> DMatrix<C64> {
        self.kernel
    }
    pub fn grid(&self) -> PositionGrid {
        self.grid
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// The matrix K·dx of the discrete operator.
    pub fn matrix(&self) -> DMatrix<C64> {
        &self.kernel * C64::new(self.grid.dx(), 0.0)
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.kernel)
    }

    fn same(&self, other: &QuantumOperator) -> Result<()> {
        if self.grid != other.grid || self.h != other.h {
            return Err(Error::GridMismatch("operators live on different grids or h".into()));
        }
        Ok(())
    }

    pub fn apply(&self, f: &WaveFunction) -> Result<WaveFunction> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch("vector and operator grids differ".into()));
        }
        let v = nalgebra::DVector::from_column_slice(f.values());
        let out = &self.kernel * v * C64::new(self.grid.dx(), 0.0);
        Ok(WaveFunction::from_raw(out.as_slice().to_vec(), self.grid, f.h()))
    }

    /// K_AB = K_A · dx · K_B
    pub fn compose(&self, other: &QuantumOperator) -> Result<QuantumOperator> {
        self.same(other)?;
        let k = (&self.kernel * &other.kernel) * C64::new(self.grid.dx(), 0.0);
        Ok(QuantumOperator::from_raw(k, self.grid, self.h))
    }

    pub fn adjoint(&self) -> QuantumOperator {
        QuantumOperator { kernel: self.kernel.adjoint(), ..self.clone() }
    }

    pub fn add(&self, other: &QuantumOperator) -> Result<QuantumOperator> {
        self.same(other)?;
        Ok(QuantumOperator::from_raw(&self.kernel + &other.kernel, self.grid, self.h))
    }

    pub fn sub(&self, other: &QuantumOperator) -> Result<QuantumOperator> {
        self.same(other)?;
        Ok(QuantumOperator::from_raw(&self.kernel - &other.kernel, self.grid, self.h))
    }

    pub fn scale(&self, s: C64) -> QuantumOperator {
        let hint = self.hermitian_hint && s.im == 0.0;
        QuantumOperator { kernel: &self.kernel * s, grid: self.grid, h: self.h, hermitian_hint: hint }
    }

    /// Hermitian part (A + A^†)/2.
    pub fn hermitian_part(&self) -> QuantumOperator {
        let k = (&self.kernel + self.kernel.adjoint()) * C64::new(0.5, 0.0);
        QuantumOperator { kernel: k, grid: self.grid, h: self.h, hermitian_hint: true }
    }

    pub fn commutator(&self, other: &QuantumOperator) -> Result<QuantumOperator> {
        Ok(self.compose(other)?.sub(&other.compose(self)?)?)
    }

    /// dx·Σ K_ii
    pub fn trace(&self) -> C64 {
        self.kernel.diagonal().iter().sum::<C64>() * self.grid.dx()
    }

    /// Singular values of K·dx, descending. Hermitian and anti-hermitian kernels
    /// go through the eigensolver.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = self.matrix();
        let eig: Option<Vec<f64>> = if self.hermitian_hint || hermitian_defect(&m) <= HERMITIAN_TOL {
            hermitian_eigen(&herm(&m)).map(|e| e.eigenvalues.iter().map(|v| v.abs()).collect())
        } else if anti_hermitian_defect(&m) <= HERMITIAN_TOL {
            let im = &m * C64::new(0.0, 1.0);
            hermitian_eigen(&herm(&im)).map(|e| e.eigenvalues.iter().map(|v| v.abs()).collect())
        } else {
            None
        };
        // the eigensolver occasionally breaks down on exactly decoupled blocks
        let mut s = match eig {
            Some(e) if e.iter().all(|v| v.is_finite()) => e,
            _ => bounded_svd(m),
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn norms(&self) -> OperatorNorms {
        let s = self.singular_values();
        OperatorNorms {
            op: s.first().copied().unwrap_or(0.0),
            hs: s.iter().map(|v| v * v).sum::<f64>().sqrt(),
            tr: s.iter().sum(),
        }
    }

    pub fn op_norm(&self) -> f64 {
        self.norms().op
    }
    pub fn trace_norm(&self) -> f64 {
        self.norms().tr
    }
    /// Hilbert-Schmidt norm without a decomposition.
    pub fn hs_norm(&self) -> f64 {
        let dx = self.grid.dx();
        self.kernel.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * dx
    }

    /// Eigenvalues of a hermitian operator, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = herm(&self.matrix());
        let mut e: Vec<f64> = match hermitian_eigen(&m) {
            Some(e) => e.eigenvalues.iter().copied().collect(),
            None => vec![f64::NAN; m.nrows()],
        };
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    /// [P, A] computed spectrally on columns and rows.
    pub fn commutator_momentum(&self) -> QuantumOperator {
        let n = self.dim();
        let dx = self.grid.dx();
        let h = self.h;
        let mut pa = self.kernel.clone();
        for j in 0..n {
            let mut col: Vec<C64> = pa.column(j).iter().copied().collect();
            apply_momentum(&mut col, dx, h);
            pa.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        let mut ap = self.kernel.clone();
        for i in 0..n {
            // row·P = conj(P conj(row)) since P is hermitian
            let mut row: Vec<C64> = ap.row(i).iter().map(|z| z.conj()).collect();
            apply_momentum(&mut row, dx, h);
            for j in 0..n {
                ap[(i, j)] = row[j].conj();
            }
        }
        QuantumOperator::from_raw(pa - ap, self.grid, self.h)
    }

    /// [Q, A], kernel (x_i − x_j) K_ij.
    pub fn commutator_position(&self) -> QuantumOperator {
        let g = self.grid;
        let dx = g.dx();
        let k = DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.kernel[(i, j)] * ((i as f64 - j as f64) * dx));
        QuantumOperator::from_raw(k, g, self.h)
    }

    /// Rescaled commutator norms: (1/h)(‖[P,A]‖ + ‖[Q,A]‖) in operator and trace norm.
    pub fn regularity(&self) -> RegularityReport {
        let p = self.commutator_momentum().norms();
        let q = self.commutator_position().norms();
        RegularityReport { i_inf: (p.op + q.op) / self.h, i_tr: (p.tr + q.tr) / self.h }
    }

    /// U A U^† for a unitary given by its action on grid vectors.
    pub fn conjugate_by(&self, apply: impl Fn(&mut [C64])) -> QuantumOperator {
        let n = self.dim();
        let mut k = self.kernel.clone();
        for j in 0..n {
            let mut col: Vec<C64> = k.column(j).iter().copied().collect();
            apply(&mut col);
            k.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        for i in 0..n {
            let mut row: Vec<C64> = k.row(i).iter().map(|z| z.conj()).collect();
            apply(&mut row);
            for j in 0..n {
                k[(i, j)] = row[j].conj();
            }
        }
        QuantumOperator { kernel: k, grid: self.grid, h: self.h, hermitian_hint: self.hermitian_hint }
    }

    /// W_{X,h'} A W_{X,h'}^† where the translation uses the parameter `h_translate`.
    pub fn conjugate_translate(&self, x: PhasePoint, h_translate: f64) -> QuantumOperator {
        let g = self.grid;
        self.conjugate_by(|v| crate::phase_space::translate_raw(&g, h_translate, x, v))
    }

    /// Max entry modulus of K − other.K.
    pub fn max_diff(&self, other: &QuantumOperator) -> f64 {
        max_abs(&(&self.kernel - &other.kernel))
    }

    /// Largest |K| within `margin` of the grid ends relative to max|K|.
    pub fn edge_ratio(&self, margin: f64) -> f64 {
        let g = self.grid;
        let m = ((margin / g.dx()).ceil() as usize).min(g.len() / 2);
        let n = g.len();
        let top = max_abs(&self.kernel);
        if top == 0.0 {
            return 0.0;
        }
        let mut e = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i < m || j < m || i >= n - m || j >= n - m {
                    e = e.max(self.kernel[(i, j)].norm());
                }
            }
        }
        e / top
    }
}

/// A hermitian, positive, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    op: QuantumOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

impl DensityState {
    pub const EIGEN_FLOOR: f64 = -1e-8;
    pub const TRACE_TOL: f64 = 1e-6;

    /// Validates hermiticity, positivity and unit trace.
    pub fn new(op: QuantumOperator) -> Result<Self> {
        let s = DensityState { op };
        s.validate()?;
        Ok(s)
    }

    pub fn pure(psi: &WaveFunction) -> Result<Self> {
        Self::new(QuantumOperator::projector(&psi.normalized()?))
    }

    /// Σ λ_k |φ_k⟩⟨φ_k|
    pub fn from_orbitals(orbitals: &[WaveFunction], occupations: &[f64]) -> Result<Self> {
        if orbitals.is_empty() || orbitals.len() != occupations.len() {
            return Err(Error::InvalidArgument("orbitals and occupations must match and be non-empty".into()));
        }
        let g = orbitals[0].grid();
        let n = g.len();
        let mut k = DMatrix::<C64>::zeros(n, n);
        for (phi, &w) in orbitals.iter().zip(occupations) {
            let v = phi.values();
            for j in 0..n {
                let c = v[j].conj() * w;
                for i in 0..n {
                    k[(i, j)] += v[i] * c;
                }
            }
        }
        let op = QuantumOperator::from_raw(k, g, orbitals[0].h()).hermitian_part();
        Self::new(op)
    }

    pub fn report(&self) -> DensityReport {
        let e = self.op.eigenvalues();
        DensityReport {
            hermitian_defect: self.op.hermitian_defect(),
            min_eigenvalue: e.last().copied().unwrap_or(0.0),
            trace: self.op.trace().re,
        }
    }

    pub fn validate(&self) -> Result<DensityReport> {
        let r = self.report();
        if r.hermitian_defect > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("hermitian defect {:e}", r.hermitian_defect)));
        }
        if r.min_eigenvalue < Self::EIGEN_FLOOR {
            return Err(Error::Invariant(format!("negative eigenvalue {:e}", r.min_eigenvalue)));
        }
        if (r.trace - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::Invariant(format!("trace {} differs from 1", r.trace)));
        }
        Ok(r)
    }

    pub fn operator(&self) -> &QuantumOperator {
        &self.op
    }
    pub fn into_operator(self) -> QuantumOperator {
        self.op
    }
    pub fn grid(&self) -> PositionGrid {
        self.op.grid
    }
    pub fn h(&self) -> f64 {
        self.op.h
    }

    /// Diagonal density n(x_i) = K(x_i, x_i).
    pub fn density(&self) -> Vec<f64> {
        self.op.kernel.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.op.eigenvalues()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{coherent_state, PhasePoint};

    fn grid() -> PositionGrid {
        PositionGrid::standard()
    }

    fn random_kernel(n: usize, seed: u64) -> DMatrix<C64> {
        // small LCG keeps the test self-contained
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn identity_and_adjoint_rules() {
        let g = PositionGrid::new(-4.0, 4.0, 32).unwrap();
        let a = QuantumOperator::new(random_kernel(32, 1), g, 0.3).unwrap();
        let b = QuantumOperator::new(random_kernel(32, 2), g, 0.3).unwrap();
        let id = QuantumOperator::identity(g, 0.3);
        assert!(a.compose(&id).unwrap().max_diff(&a) < 1e-13);
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }

    #[test]
    fn grid_mismatch() {
        let a = QuantumOperator::identity(grid(), 0.5);
        let b = QuantumOperator::identity(PositionGrid::new(-4.0, 4.0, 256).unwrap(), 0.5);
        assert!(matches!(a.compose(&b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn canonical_commutation_on_ground_state() {
        let h = 0.5;
        let g = grid();
        let q = QuantumOperator::position(g, h);
        let p = QuantumOperator::momentum(g, h);
        let psi = coherent_state(PhasePoint::ORIGIN, h, &g).unwrap();
        let qp = q.compose(&p).unwrap().sub(&p.compose(&q).unwrap()).unwrap();
        let out = qp.apply(&psi).unwrap();
        let expect = psi.scaled(C64::new(0.0, h));
        assert!(out.max_diff(&expect) / expect.values().iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-4);
    }

    #[test]
    fn plane_wave_is_momentum_eigenvector() {
        let h = 0.5;
        let g = grid();
        let p = QuantumOperator::momentum(g, h);
        let k = 2.0 * std::f64::consts::PI * 5.0 / g.length();
        let xi0 = h * k;
        let f = WaveFunction::from_fn(g, h, |u| C64::from_polar(1.0, u * xi0 / h)).unwrap();
        let pf = p.apply(&f).unwrap();
        assert!(pf.max_diff(&f.scaled(C64::new(xi0, 0.0))) < 1e-6);
    }

    #[test]
    fn identity_norms_and_projector_norms() {
        let g = grid();
        let id = QuantumOperator::identity(g, 0.5);
        assert!((id.trace().re - 256.0).abs() < 1e-9);
        assert!((id.op_norm() - 1.0).abs() < 1e-12);
        let psi = coherent_state(PhasePoint::new(0.5, -0.2), 0.5, &g).unwrap();
        let p = QuantumOperator::projector(&psi);
        let n = p.norms();
        assert!((n.op - 1.0).abs() < 1e-6 && (n.hs - 1.0).abs() < 1e-6 && (n.tr - 1.0).abs() < 1e-6);
        assert!((p.trace().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn regularity_of_identity_and_position() {
        let h = 0.5;
        let g = PositionGrid::new(-8.0, 8.0, 128).unwrap();
        let r = QuantumOperator::identity(g, h).regularity();
        assert!(r.i_inf < 1e-10 && r.i_tr < 1e-9);
        let q = QuantumOperator::position(g, h);
        let pq = q.commutator_momentum();
        // on the discrete grid [P, Q] equals −ih on smooth vectors; its norm picks up no more than that
        let psi = coherent_state(PhasePoint::ORIGIN, h, &g).unwrap();
        let v = pq.apply(&psi).unwrap();
        assert!(v.max_diff(&psi.scaled(C64::new(0.0, -h))) < 1e-3);
    }

    #[test]
    fn trace_norm_inequalities() {
        let g = PositionGrid::new(-4.0, 4.0, 32).unwrap();
        let a = QuantumOperator::new(random_kernel(32, 3), g, 0.3).unwrap();
        let b = QuantumOperator::new(random_kernel(32, 4), g, 0.3).unwrap();
        let ab = a.compose(&b).unwrap();
        assert!(ab.trace_norm() <= a.op_norm() * b.trace_norm() + 1e-8);
        let t1 = ab.trace();
        let t2 = b.compose(&a).unwrap().trace();
        assert!((t1 - t2).norm() <= 1e-8 * t1.norm().max(1.0));
    }

    #[test]
    fn trace_norm_is_translation_invariant() {
        let h = 0.5;
        let g = grid();
        let f1 = coherent_state(PhasePoint::new(0.3, 0.2), h, &g).unwrap();
        let f2 = coherent_state(PhasePoint::new(-0.5, -0.4), h, &g).unwrap();
        let a = QuantumOperator::outer(&f1, &f2).unwrap().add(&QuantumOperator::projector(&f2).scale(C64::new(0.0, 0.7))).unwrap();
        let b = a.conjugate_translate(PhasePoint::new(0.7, 0.4), h);
        let (ta, tb) = (a.trace_norm(), b.trace_norm());
        assert!((ta - tb).abs() <= 1e-6 * ta);
    }

    #[test]
    fn density_state_validation() {
        let g = grid();
        let psi = coherent_state(PhasePoint::ORIGIN, 0.5, &g).unwrap();
        let rho = DensityState::pure(&psi).unwrap();
        let r = rho.validate().unwrap();
        assert!(r.min_eigenvalue > -1e-8);
        let bad = QuantumOperator::projector(&psi).scale(C64::new(2.0, 0.0));
        assert!(DensityState::new(bad).is_err());
        let neg = QuantumOperator::projector(&psi).scale(C64::new(-1.0, 0.0));
        assert!(DensityState::new(neg).is_err());
    }

    #[test]
    fn rank_one_coherent_operator_has_finite_norms() {
        // the plain complex SVD returns a NaN singular value on this kernel
        let g = PositionGrid::new(-16.0, 16.0, 512).unwrap();
        let h = 0.28592657299083096;
        let f = crate::phase_space::coherent_state(PhasePoint::new(-1.3578476369408896, 0.0), h, &g).unwrap();
        let e = crate::phase_space::coherent_state(PhasePoint::new(0.0, 0.0), h, &g).unwrap();
        let c = 0.731923950324205;
        let n = QuantumOperator::outer(&f, &e).unwrap().scale(C64::new(0.0, c)).norms();
        for v in [n.op, n.hs, n.tr] {
            assert!((v - c).abs() < 1e-9, "{n:?}");
        }
    }
}
