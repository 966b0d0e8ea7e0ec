//! Gauss rules via Golub-Welsch.

use nalgebra::{DMatrix, SymmetricEigen};

fn golub_welsch(diag: Vec<f64>, off: Vec<f64>, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights for the weight e^{-t^2} on the real line.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let off = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(vec![0.0; n], off, std::f64::consts::PI.sqrt())
}

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let off = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(vec![0.0; n], off, 2.0)
}

/// Gauss-Legendre mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        t.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|w| w * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let (t, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = t.iter().zip(&w).map(|(t, w)| t * t * w).sum();
        let m4: f64 = t.iter().zip(&w).map(|(t, w)| t.powi(4) * w).sum();
        let sp = std::f64::consts::PI.sqrt();
        assert!((m0 - sp).abs() < 1e-12);
        assert!((m2 - sp / 2.0).abs() < 1e-12);
        assert!((m4 - 0.75 * sp).abs() < 1e-12);
    }

    #[test]
    fn legendre_integrates_exp() {
        let (x, w) = gauss_legendre_on(30, 0.0, 2.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| x.exp() * w).sum();
        assert!((s - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn large_legendre_rule_is_accurate() {
        let (x, w) = gauss_legendre(400);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| (3.0 * x).cos() * w).sum();
        assert!((s - 2.0 * 3f64.sin() / 3.0).abs() < 1e-12);
    }
}
