//! FFT plumbing shared by the grid modules.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized forward transform.
pub fn fft(buf: &mut [C64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

/// Inverse transform including the 1/n factor.
pub fn ifft(buf: &mut [C64]) {
    let n = buf.len();
    if n > 1 {
        plan(n, true).process(buf);
    }
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= s);
}

/// Angular wavenumbers in FFT order. The Nyquist entry is reported as negative.
pub fn wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * spacing);
    (0..n)
        .map(|k| {
            let k = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            k * dk
        })
        .collect()
}

/// Wavenumbers with the Nyquist mode zeroed, for odd-symmetric multipliers (derivatives).
pub fn derivative_wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let mut k = wavenumbers(n, spacing);
    if n % 2 == 0 && n > 1 {
        k[n / 2] = 0.0;
    }
    k
}

/// Periodic band-limited shift: returns samples of f(u - shift).
pub fn spectral_shift(values: &[C64], shift: f64, spacing: f64) -> Vec<C64> {
    let mut buf = values.to_vec();
    spectral_shift_in_place(&mut buf, shift, spacing);
    buf
}

pub fn spectral_shift_in_place(buf: &mut [C64], shift: f64, spacing: f64) {
    if shift == 0.0 {
        return;
    }
    let k = wavenumbers(buf.len(), spacing);
    fft(buf);
    for (z, kk) in buf.iter_mut().zip(&k) {
        *z *= C64::from_polar(1.0, -kk * shift);
    }
    ifft(buf);
}

/// Spectral derivative of order `order` (Nyquist mode dropped).
pub fn spectral_derivative(values: &[C64], spacing: f64, order: u32) -> Vec<C64> {
    let mut buf = values.to_vec();
    if order == 0 {
        return buf;
    }
    let k = derivative_wavenumbers(buf.len(), spacing);
    fft(&mut buf);
    for (z, kk) in buf.iter_mut().zip(&k) {
        *z *= C64::new(0.0, *kk).powu(order);
    }
    ifft(&mut buf);
    buf
}

/// Weight of node offset `s` in periodic trigonometric interpolation on `n` nodes
/// of spacing `h` (cosine-symmetrised Nyquist term).
pub fn dirichlet_weight(s: f64, n: usize, h: f64) -> f64 {
    let nf = n as f64;
    let period = nf * h;
    let r = s / period;
    let r = r - r.round();
    if r.abs() < 1e-14 {
        return 1.0;
    }
    let a = PI * r;
    if n % 2 == 0 {
        ((nf - 1.0) * a).sin() / a.sin() / nf + (nf * a).cos() / nf
    } else {
        (nf * a).sin() / a.sin() / nf
    }
}

/// Matrix mapping samples on nodes `origin + j*h` (j < n) to trigonometric-interpolant
/// values at `points`; rows for points outside `[origin, origin + (n-1) h]` are zero
/// when `zero_outside` is set.
pub fn interp_matrix(origin: f64, h: f64, n: usize, points: &[f64], zero_outside: bool) -> DMatrix<f64> {
    let hi = origin + (n as f64 - 1.0) * h;
    let tol = 1e-9 * h;
    DMatrix::from_fn(points.len(), n, |r, j| {
        let p = points[r];
        if zero_outside && (p < origin - tol || p > hi + tol) {
            return 0.0;
        }
        dirichlet_weight(p - origin - j as f64 * h, n, h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip() {
        let v: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut w = v.clone();
        fft(&mut w);
        ifft(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn integer_shift_is_a_rotation() {
        let v: Vec<C64> = (0..32).map(|i| C64::new((i as f64 * 0.3).sin(), 0.0)).collect();
        let w = spectral_shift(&v, 3.0 * 0.5, 0.5);
        for i in 0..32 {
            assert!((w[(i + 3) % 32] - v[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_band_limited_functions() {
        let n = 32;
        let h = 2.0 * PI / n as f64;
        let f = |x: f64| (3.0 * x).sin() + 0.5 * (5.0 * x).cos();
        let pts = [0.0, 0.123, 1.7, 4.4, 2.0 * h];
        let m = interp_matrix(0.0, h, n, &pts, false);
        let samples: Vec<f64> = (0..n).map(|j| f(j as f64 * h)).collect();
        for (r, p) in pts.iter().enumerate() {
            let v: f64 = (0..n).map(|j| m[(r, j)] * samples[j]).sum();
            assert!((v - f(*p)).abs() < 1e-12, "{p}: {v} vs {}", f(*p));
        }
    }

    #[test]
    fn derivative_of_sine() {
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let v: Vec<C64> = (0..n).map(|j| C64::new((2.0 * j as f64 * h).sin(), 0.0)).collect();
        let d = spectral_derivative(&v, h, 1);
        for j in 0..n {
            assert!((d[j].re - 2.0 * (2.0 * j as f64 * h).cos()).abs() < 1e-11);
        }
    }
}
