//! A trace-class operator whose Weyl symbol is not integrable.
//!
//! P = Op_1(p), p(x, ξ) = e^{2ixξ}(1 + x² + ξ²)^{−α}, written as the λ-integral
//! Γ(α)^{-1} ∫ e^{−λ} λ^{α−1} A_λ dλ with A_λ = Op_1(e^{2ixξ − λ(x²+ξ²)}).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::operator::QuantumOperator;
use crate::phase_space::PositionGrid;
use crate::quadrature::gauss_legendre_on;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { lambda_min: 1e-3, lambda_max: 30.0, nodes: 200 }
    }
}

impl QuadratureSpec {
    /// λ-nodes and the weights of Γ(α)^{-1} e^{−λ} λ^{α−1} dλ, Gauss-Legendre in ln λ.
    pub fn nodes(&self, alpha: f64) -> (Vec<f64>, Vec<f64>) {
        let (s, w) = gauss_legendre_on(self.nodes, self.lambda_min.ln(), self.lambda_max.ln());
        let g = gamma(alpha);
        s.iter()
            .zip(&w)
            .map(|(s, w)| {
                let l = s.exp();
                (l, w * (-l).exp() * l.powf(alpha) / g)
            })
            .unzip()
    }
}

pub fn p_symbol(alpha: f64, x: f64, xi: f64) -> C64 {
    C64::from_polar((1.0 + x * x + xi * xi).powf(-alpha), 2.0 * x * xi)
}

fn abc(lambda: f64) -> (f64, f64, f64) {
    (lambda / 4.0 + 1.0 / lambda, lambda / 4.0, lambda / 4.0)
}

/// μ(λ) = c/√(ab)
pub fn mu(lambda: f64) -> f64 {
    let (a, b, c) = abc(lambda);
    c / (a * b).sqrt()
}

/// Kernel of A_λ: (4πλ)^{-1/2} e^{−(a x² + b y² + 2c xy)}.
pub fn kernel_a_lambda(lambda: f64, x: f64, y: f64) -> f64 {
    let (a, b, c) = abc(lambda);
    (4.0 * PI * lambda).powf(-0.5) * (-(a * x * x + b * y * y + 2.0 * c * x * y)).exp()
}

/// Kernel of B_λ: e^{−(x² + y²) + 2μxy}.
pub fn kernel_b_lambda(lambda: f64, x: f64, y: f64) -> f64 {
    (-(x * x + y * y) + 2.0 * mu(lambda) * x * y).exp()
}

/// Tr B_λ = (π / (2(1 − μ)))^{1/2}
pub fn trace_b_lambda(lambda: f64) -> f64 {
    (PI / (2.0 * (1.0 - mu(lambda)))).sqrt()
}

/// ‖A_λ‖_tr = (4πλ)^{-1/2} (ab)^{-1/4} Tr B_λ, from A_λ = const · U B_λ V with U, V unitary.
pub fn trace_norm_a_lambda(lambda: f64) -> f64 {
    let (a, b, _) = abc(lambda);
    (4.0 * PI * lambda).powf(-0.5) * (a * b).powf(-0.25) * trace_b_lambda(lambda)
}

/// Wick symbol of A_λ at unit Planck parameter.
pub fn wick_symbol_a_lambda(lambda: f64, x: f64, xi: f64) -> C64 {
    let d = (1.0 + lambda).powi(2) + 1.0;
    let r2 = x * x + xi * xi;
    let e = C64::new((1.0 + lambda) * r2 / d - r2, 2.0 * x * xi / d);
    e.exp() / d.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleDiagnostics {
    pub alpha: f64,
    /// (λ, ‖A_λ‖_tr) at every quadrature node.
    pub node_trace_norms: Vec<(f64, f64)>,
    pub trace_norm: f64,
    pub trace_norm_doubled: f64,
    pub doubling_change: f64,
    /// (R, ∫_{|X|<R} |p|)
    pub p_ball_mass: Vec<(f64, f64)>,
    /// (R, ∫_{|X|<R} |σ^wick(P)|)
    pub wick_ball_mass: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct CounterexampleResult {
    pub p: QuantumOperator,
    pub diagnostics: CounterexampleDiagnostics,
}

fn assemble(grid: PositionGrid, alpha: f64, quad: &QuadratureSpec) -> QuantumOperator {
    let (lams, ws) = quad.nodes(alpha);
    let xs = grid.points();
    let n = grid.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for (l, w) in lams.iter().zip(&ws) {
            acc += w * kernel_a_lambda(*l, xs[i], xs[j]);
        }
        C64::new(acc, 0.0)
    });
    QuantumOperator::from_raw(k, grid, 1.0)
}

/// Wick symbol of P at one point, by the λ-quadrature of the closed form.
pub fn wick_symbol_p(alpha: f64, quad: &QuadratureSpec, x: f64, xi: f64) -> C64 {
    let (lams, ws) = quad.nodes(alpha);
    lams.iter().zip(&ws).map(|(l, w)| wick_symbol_a_lambda(*l, x, xi) * *w).sum()
}

/// Polar quadrature of a function over nested balls |X| < R for each R in `radii`
/// (ascending), with doubling radial panels.
pub fn ball_masses(radii: &[f64], f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<(f64, f64)> {
    let n_theta = 256;
    let (gr, gw) = crate::quadrature::gauss_legendre(48);
    let mut edges = vec![0.0];
    let mut r = 0.25;
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    while r < r_max {
        edges.push(r);
        r *= 2.0;
    }
    for &rr in radii {
        edges.push(rr);
    }
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let panels: Vec<f64> = crate::par_map(edges.len() - 1, |p| {
        let (a, b) = (edges[p], edges[p + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (t, w) in gr.iter().zip(&gw) {
            let r = mid + half * t;
            let mut ang = 0.0;
            for k in 0..n_theta {
                let th = 2.0 * PI * k as f64 / n_theta as f64;
                ang += f(r * th.cos(), r * th.sin());
            }
            acc += w * half * r * ang * 2.0 * PI / n_theta as f64;
        }
        acc
    });
    radii
        .iter()
        .map(|&rr| {
            let m: f64 = edges.windows(2).zip(&panels).filter(|(e, _)| e[1] <= rr + 1e-12).map(|(_, v)| v).sum();
            (rr, m)
        })
        .collect()
}

/// Assemble P on `grid` and collect the trace-norm and ball-mass diagnostics.
pub fn counterexample_build(alpha: f64, quad: &QuadratureSpec, grid: PositionGrid, radii: &[f64]) -> Result<CounterexampleResult> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (1/2, 1]")));
    }
    if quad.nodes < 2 || !(quad.lambda_min > 0.0 && quad.lambda_max > quad.lambda_min) {
        return Err(Error::InvalidArgument("bad quadrature spec".into()));
    }
    let p = assemble(grid, alpha, quad);
    let doubled = QuadratureSpec { nodes: 2 * quad.nodes, ..*quad };
    let p2 = assemble(grid, alpha, &doubled);
    let trace_norm = p.trace_norm();
    let trace_norm_doubled = p2.trace_norm();
    let doubling_change = (trace_norm - trace_norm_doubled).abs() / trace_norm_doubled;
    let limit = 1e-3;
    if doubling_change > limit {
        return Err(Error::QuadratureDivergence { change: doubling_change, limit });
    }
    let (lams, _) = quad.nodes(alpha);
    let node_trace_norms = lams.iter().map(|&l| (l, trace_norm_a_lambda(l))).collect();
    let p_ball_mass = ball_masses(radii, |x, xi| p_symbol(alpha, x, xi).norm());
    let (lams, ws) = quad.nodes(alpha);
    let wick_ball_mass = ball_masses(radii, |x, xi| {
        lams.iter().zip(&ws).map(|(l, w)| wick_symbol_a_lambda(*l, x, xi) * *w).sum::<C64>().norm()
    });
    Ok(CounterexampleResult {
        p,
        diagnostics: CounterexampleDiagnostics {
            alpha,
            node_trace_norms,
            trace_norm,
            trace_norm_doubled,
            doubling_change,
            p_ball_mass,
            wick_ball_mass,
        },
    })
}
