//! Gaussian averages of Heisenberg conjugations.
//!
//! (πλ)^{-1} ∫ e^{−|X|²/λ} W_{X,h'} A W_{X,h'}^* dX translates the h'-Weyl symbol of A
//! by X, so it convolves that symbol with a Gaussian of variance λ/2 per axis. In the
//! kernel this is a factor e^{−λv²/4h'²} on each diagonal (v = x − y) and a Gaussian
//! blur of variance λ/2 along the diagonal's midpoints.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::operator::QuantumOperator;
use crate::phase_space::PhasePoint;
use crate::quadrature::gauss_hermite;

/// Exact Gaussian conjugation average with weight variance `lambda`/2 and translations W_{X,h_translate}.
pub fn gaussian_average(a: &QuantumOperator, lambda: f64, h_translate: f64) -> QuantumOperator {
    let grid = a.grid();
    let n = grid.len();
    let dx = grid.dx();
    let k = a.kernel();
    let kw = fourier::wavenumbers(n, dx);
    let blur: Vec<f64> = kw.iter().map(|k| (-lambda * k * k / 4.0).exp()).collect();
    let diags: Vec<Vec<C64>> = crate::par_map(2 * n - 1, |di| {
        let d = di as isize - (n as isize - 1);
        let v = d as f64 * dx;
        let damp = (-lambda * v * v / (4.0 * h_translate * h_translate)).exp();
        let j0 = 0.max(-d) as usize;
        let j1 = (n as isize).min(n as isize - d) as usize;
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for j in j0..j1 {
            buf[j] = k[((j as isize + d) as usize, j)];
        }
        if buf.iter().all(|z| z.norm() == 0.0) {
            return buf;
        }
        fourier::fft(&mut buf);
        for (z, b) in buf.iter_mut().zip(&blur) {
            *z *= b * damp;
        }
        fourier::ifft(&mut buf);
        buf
    });
    let mut out = DMatrix::zeros(n, n);
    for (di, buf) in diags.iter().enumerate() {
        let d = di as isize - (n as isize - 1);
        let j0 = 0.max(-d) as usize;
        let j1 = (n as isize).min(n as isize - d) as usize;
        for j in j0..j1 {
            out[((j as isize + d) as usize, j)] = buf[j];
        }
    }
    let op = QuantumOperator::from_raw(out, grid, a.h());
    if a.hermitian_hint() {
        op.hermitian_part()
    } else {
        op
    }
}

/// T_h A = (πh)^{-1} ∫ e^{−|X|²/h} W_{X,h} A W_{X,h}^* dX.
/// Its Weyl symbol is the Wick symbol of A.
pub fn smooth_th(a: &QuantumOperator) -> QuantumOperator {
    gaussian_average(a, a.h(), a.h())
}

/// T′_λ A: weight (πλ)^{-1} e^{−|X|²/λ}, translations at unit Planck parameter.
pub fn smooth_tlambda(a: &QuantumOperator, lambda: f64) -> Result<QuantumOperator> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} must be positive")));
    }
    Ok(gaussian_average(a, lambda, 1.0))
}

/// Tensor Gauss-Hermite quadrature of the same conjugation average.
pub fn conjugation_quadrature(a: &QuantumOperator, lambda: f64, h_translate: f64, order: usize) -> Result<QuantumOperator> {
    let grid = a.grid();
    let (t, w) = gauss_hermite(order);
    let s = lambda.sqrt();
    let reach = t.iter().fold(0.0f64, |m, v| m.max(v.abs())) * s;
    // the weight mass beyond the outermost node must be negligible, and translated
    // kernels must not wrap
    let tail = (-(reach / s).powi(2)).exp();
    if order < 4 || tail > 1e-8 {
        return Err(Error::QuadratureTruncation(format!("{order} nodes reach only |X| = {reach}")));
    }
    let edge = a.edge_ratio(reach);
    if edge > 1e-8 {
        return Err(Error::QuadratureTruncation(format!("translated kernel wraps (edge ratio {edge:e})")));
    }
    let n = grid.len();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for (ta, wa) in t.iter().zip(&w) {
        for (tb, wb) in t.iter().zip(&w) {
            let x = PhasePoint::new(s * ta, s * tb);
            let c = a.conjugate_translate(x, h_translate);
            acc += c.kernel() * C64::new(wa * wb / PI, 0.0);
        }
    }
    Ok(QuantumOperator::from_raw(acc, grid, a.h()))
}
