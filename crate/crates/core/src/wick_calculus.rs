//! Bi-Wick symbols, Wirtinger derivatives, the Wick composition expansion and the
//! evolution equation of the Husimi density.
//!
//! ∂ = ½(∂_x − i∂_ξ), ∂̄ = ½(∂_x + i∂_ξ). On Wick symbols these are commutators:
//! ∂σ(A) = −(1/2h)σ([Q − iP, A]) and ∂̄σ(A) = (1/2h)σ([Q + iP, A]).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classical::PotentialSpec;
use crate::error::{Error, Result};
use crate::fourier;
use crate::operator::QuantumOperator;
use crate::phase_space::{coherent_overlap, coherent_state, PhaseGrid, PhasePoint};
use crate::quantization::{spectral_2d, weyl_quantize, wick_symbol_direct, Symbol, LEAKAGE_FLOOR};
use crate::quantum::field_from_density;

/// Order of a Wirtinger derivative in one complex dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirtingerIndex {
    pub alpha: u32,
}

impl WirtingerIndex {
    pub fn new(alpha: u32) -> Self {
        WirtingerIndex { alpha }
    }
}

/// Separations beyond which the bi-Wick denominator is not representable.
pub fn bi_wick_limit(h: f64) -> f64 {
    4.0 * h * 1e300f64.ln()
}

/// S_h(A)(X, Y) = ⟨AΨ_X, Ψ_Y⟩ / ⟨Ψ_X, Ψ_Y⟩.
pub fn bi_wick_eval(a: &QuantumOperator, x: PhasePoint, y: PhasePoint) -> Result<C64> {
    let h = a.h();
    let d2 = (x - y).norm_sqr();
    if d2 > bi_wick_limit(h) {
        return Err(Error::Underflow { dist2: d2, h });
    }
    let g = a.grid();
    let px = coherent_state(x, h, &g)?;
    let py = coherent_state(y, h, &g)?;
    Ok(a.apply(&px)?.inner(&py)? / coherent_overlap(x, y, h))
}

fn fd_axis(values: &DMatrix<C64>, spacing: f64, along_x: bool) -> DMatrix<C64> {
    let (nx, nxi) = values.shape();
    let n = if along_x { nx } else { nxi };
    let get = |i: usize, k: usize| if along_x { values[(i, k)] } else { values[(k, i)] };
    let c = 1.0 / (12.0 * spacing);
    let mut out = DMatrix::zeros(nx, nxi);
    let other = if along_x { nxi } else { nx };
    for k in 0..other {
        for i in 0..n {
            let f = |j: usize| get(j, k);
            // fourth-order stencils, one-sided at the two outermost nodes of each end
            let d = if i >= 2 && i + 2 < n {
                f(i - 2) - f(i - 1) * 8.0 + f(i + 1) * 8.0 - f(i + 2)
            } else if i == 0 {
                f(0) * -25.0 + f(1) * 48.0 - f(2) * 36.0 + f(3) * 16.0 - f(4) * 3.0
            } else if i == 1 {
                f(0) * -3.0 - f(1) * 10.0 + f(2) * 18.0 - f(3) * 6.0 + f(4)
            } else if i == n - 1 {
                -(f(n - 1) * -25.0 + f(n - 2) * 48.0 - f(n - 3) * 36.0 + f(n - 4) * 16.0 - f(n - 5) * 3.0)
            } else {
                -(f(n - 1) * -3.0 - f(n - 2) * 10.0 + f(n - 3) * 18.0 - f(n - 4) * 6.0 + f(n - 5))
            };
            let (a, b) = if along_x { (i, k) } else { (k, i) };
            out[(a, b)] = d * c;
        }
    }
    out
}

/// ∂^α F (or ∂̄^α F when `conjugate`). Spectral when F is periodic or decays to the
/// border; fourth-order stencils otherwise, which are exact on polynomials of degree ≤ 4.
pub fn wirtinger(f: &Symbol, idx: WirtingerIndex, conjugate: bool) -> Result<Symbol> {
    let pg = *f.pg();
    let sign = if conjugate { 1.0 } else { -1.0 };
    if idx.alpha == 0 {
        return Ok(f.clone());
    }
    let spectral = f.is_periodic() || f.border_ratio() <= LEAKAGE_FLOOR;
    let mut v = f.values().clone();
    if spectral {
        let kx = fourier::derivative_wavenumbers(pg.nx, pg.dx());
        let kxi = fourier::derivative_wavenumbers(pg.nxi, pg.dxi());
        // ½(∂_x ± i∂_ξ) → ½(i k_x ∓ k_ξ)
        let m = |a: usize, b: usize| C64::new(-sign * kxi[b], kx[a]).scale(0.5).powu(idx.alpha);
        spectral_2d(&mut v, m);
    } else {
        if pg.nx < 5 || pg.nxi < 5 {
            return Err(Error::InvalidGrid("stencils need at least 5 nodes per axis".into()));
        }
        for _ in 0..idx.alpha {
            let dx = fd_axis(&v, pg.dx(), true);
            let dxi = fd_axis(&v, pg.dxi(), false);
            v = (dx + dxi * C64::new(0.0, sign)) * C64::new(0.5, 0.0);
        }
    }
    let out = Symbol::new(v, pg)?;
    Ok(match f.h_tag() {
        Some(h) => out.with_h(h),
        None => out,
    })
}

/// ad_{Q∓iP}^k A, the operator whose Wick symbol is (∓2h)^k ∂^k σ(A) (resp. ∂̄^k).
fn wirtinger_operator(a: &QuantumOperator, k: u32, conjugate: bool) -> QuantumOperator {
    let i = C64::new(0.0, if conjugate { 1.0 } else { -1.0 });
    let mut cur = a.clone();
    for _ in 0..k {
        let q = cur.commutator_position();
        let p = cur.commutator_momentum();
        cur = q.add(&p.scale(i)).expect("same grid");
    }
    cur
}

/// ∂^k σ^wick(A) (or ∂̄^k) on pg through iterated commutators with Q ∓ iP.
pub fn wick_derivative(a: &QuantumOperator, k: u32, conjugate: bool, pg: &PhaseGrid) -> Result<Symbol> {
    let op = wirtinger_operator(a, k, conjugate);
    let s = if conjugate { 1.0 } else { -1.0 };
    let scale = (s / (2.0 * a.h())).powi(k as i32);
    Ok(wick_symbol_direct(&op, pg)?.scale(C64::new(scale, 0.0)))
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Σ_{k<m} (2h)^k/k! ∂^k σ^wick(A) · ∂̄^k σ^wick(B).
pub fn wick_compose_expand(a: &QuantumOperator, b: &QuantumOperator, m: u32, pg: &PhaseGrid) -> Result<Symbol> {
    if m == 0 {
        return Err(Error::InvalidArgument("expansion order m must be ≥ 1".into()));
    }
    let h = a.h();
    let mut acc = Symbol::constant(*pg, C64::new(0.0, 0.0));
    for k in 0..m {
        let da = wick_derivative(a, k, false, pg)?;
        let db = wick_derivative(b, k, true, pg)?;
        let c = (2.0 * h).powi(k as i32) / factorial(k);
        acc = acc.add(&da.mul(&db)?.scale(C64::new(c, 0.0)))?;
    }
    Ok(Symbol::new(acc.values().clone(), *pg)?)
}

#[derive(Debug, Clone)]
pub struct CompositionRemainder {
    pub r_m: Symbol,
    /// (2πh)^{-1}‖R_m‖_{L¹}
    pub l1: f64,
    /// ‖B‖_tr Σ_{m ≤ k ≤ max(m, 2)} h^{k/2} ‖∂^k F‖_∞
    pub bound_rhs: f64,
}

/// Remainder of the order-m expansion for A = Op_h(F) with F sampled (and decaying) on its own grid.
pub fn composition_remainder(f: &Symbol, b: &QuantumOperator, m: u32, pg: &PhaseGrid) -> Result<CompositionRemainder> {
    let (grid, h) = (b.grid(), b.h());
    let a = weyl_quantize(f, grid, h)?;
    composition_remainder_op(&a, f, b, m, pg)
}

/// Same, with A = Op_h(F) already assembled.
pub fn composition_remainder_op(a: &QuantumOperator, f: &Symbol, b: &QuantumOperator, m: u32, pg: &PhaseGrid) -> Result<CompositionRemainder> {
    let h = b.h();
    let exact = wick_symbol_direct(&a.compose(b)?, pg)?;
    let partial = wick_compose_expand(a, b, m, pg)?;
    let r_m = exact.sub(&partial)?;
    let l1 = r_m.l1_norm() / (2.0 * PI * h);
    let mut s = 0.0;
    for k in m..=m.max(2) {
        s += h.powf(k as f64 / 2.0) * wirtinger(f, WirtingerIndex::new(k), false)?.linf_norm();
    }
    Ok(CompositionRemainder { r_m, l1, bound_rhs: b.trace_norm() * s })
}

/// One interior time of the Husimi evolution equation.
#[derive(Debug, Clone)]
pub struct PdeSample {
    pub t: f64,
    /// ∂_t u + 2ξ∂_x u + h∂_x∂_ξ u
    pub lhs: Symbol,
    /// (1/ih)(2πh)^{-1} σ^wick([V_q(ρ), ρ])
    pub rhs: Symbol,
}

impl PdeSample {
    pub fn residual(&self) -> Symbol {
        self.lhs.sub(&self.rhs).expect("same grid")
    }
}

fn husimi_symbol(rho: &QuantumOperator, pg: &PhaseGrid) -> Result<Symbol> {
    Ok(wick_symbol_direct(rho, pg)?.scale(C64::new(1.0 / (2.0 * PI * rho.h()), 0.0)))
}

/// 2ξ∂_x u + h∂_x∂_ξ u, spectrally.
fn transport_terms(u: &Symbol, h: f64) -> Result<Symbol> {
    let pg = *u.pg();
    let kx = fourier::derivative_wavenumbers(pg.nx, pg.dx());
    let kxi = fourier::derivative_wavenumbers(pg.nxi, pg.dxi());
    let mut ux = u.values().clone();
    spectral_2d(&mut ux, |a, _| C64::new(0.0, kx[a]));
    let mut uxxi = u.values().clone();
    spectral_2d(&mut uxxi, |a, b| C64::new(-kx[a] * kxi[b], 0.0));
    let v = DMatrix::from_fn(pg.nx, pg.nxi, |a, b| ux[(a, b)] * (2.0 * pg.xi(b)) + uxxi[(a, b)] * h);
    Symbol::new(v, pg)
}

/// (1/ih)(2πh)^{-1} σ^wick([V_q(ρ), ρ])
pub fn mean_field_commutator_symbol(rho: &QuantumOperator, pot: &PotentialSpec, pg: &PhaseGrid) -> Result<Symbol> {
    let grid = rho.grid();
    let h = rho.h();
    let n: Vec<f64> = rho.kernel().diagonal().iter().map(|z| z.re).collect();
    let vq = field_from_density(&grid, &n, pot);
    let k = rho.kernel();
    let c = DMatrix::from_fn(grid.len(), grid.len(), |i, j| k[(i, j)] * (vq[i] - vq[j]));
    let comm = QuantumOperator::new(c, grid, h)?;
    Ok(husimi_symbol(&comm, pg)?.scale(C64::new(0.0, -1.0 / h)))
}

fn check_uniform(traj: &[(f64, QuantumOperator)]) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::InsufficientSampling(format!("{} snapshots; need at least 3", traj.len())));
    }
    let dt = traj[1].0 - traj[0].0;
    if !(dt > 0.0) || traj.windows(2).any(|w| ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InsufficientSampling("snapshots must be uniformly spaced in t".into()));
    }
    Ok(dt)
}

/// Both sides of the Husimi evolution equation at every interior snapshot.
pub fn pde_residual(traj: &[(f64, QuantumOperator)], pot: &PotentialSpec, pg: &PhaseGrid) -> Result<Vec<PdeSample>> {
    let dt = check_uniform(traj)?;
    let h = traj[0].1.h();
    let us: Vec<Symbol> = traj.iter().map(|(_, r)| husimi_symbol(r, pg)).collect::<Result<_>>()?;
    (1..traj.len() - 1)
        .map(|k| {
            let dudt = us[k + 1].sub(&us[k - 1])?.scale(C64::new(1.0 / (2.0 * dt), 0.0));
            let lhs = dudt.add(&transport_terms(&us[k], h)?)?;
            let rhs = mean_field_commutator_symbol(&traj[k].1, pot, pg)?;
            Ok(PdeSample { t: traj[k].0, lhs, rhs })
        })
        .collect()
}

/// x-derivatives of Φ_h(u)(x) = (e^{hΔ/4}V)(x) + ∫W(x − y)u(y, η)dydη on the pg x-nodes.
pub fn phi_derivatives(u: &Symbol, pot: &PotentialSpec, h: f64, order: u32) -> Vec<f64> {
    let pg = u.pg();
    let dxi = pg.dxi();
    let xs = pg.xs();
    let marg: Vec<f64> = (0..pg.nx).map(|a| u.values().row(a).iter().map(|z| z.re).sum::<f64>() * dxi).collect();
    let v = pot.v.wick_smoothed(h);
    xs.iter()
        .map(|&x| {
            v.derivative(x, order) + xs.iter().zip(&marg).map(|(y, m)| pot.w.derivative(x - y, order) * m).sum::<f64>() * pg.dx()
        })
        .collect()
}

/// (1/ih) Σ_{1≤k<m} (2h)^k/k! [∂^kΦ ∂̄^k u − ∂^k u ∂̄^kΦ] with Φ = Φ_h(u) a function of x.
pub fn truncated_mean_field_terms(u: &Symbol, pot: &PotentialSpec, h: f64, m: u32) -> Result<Symbol> {
    let pg = *u.pg();
    let mut acc = DMatrix::<C64>::zeros(pg.nx, pg.nxi);
    for k in 1..m {
        // ∂^kΦ = ∂̄^kΦ = 2^{-k} Φ^(k)
        let phik: Vec<f64> = phi_derivatives(u, pot, h, k).iter().map(|v| v * 0.5f64.powi(k as i32)).collect();
        let du = wirtinger(u, WirtingerIndex::new(k), false)?;
        let dbu = wirtinger(u, WirtingerIndex::new(k), true)?;
        let c = (2.0 * h).powi(k as i32) / factorial(k);
        for a in 0..pg.nx {
            for b in 0..pg.nxi {
                acc[(a, b)] += (dbu.at(a, b) - du.at(a, b)) * (phik[a] * c);
            }
        }
    }
    Ok(Symbol::new(acc * C64::new(0.0, -1.0 / h), pg)?)
}

/// R_m = LHS − truncated terms at the middle of three snapshots (t − δ, t, t + δ), with ‖R_m‖_{L¹}.
pub fn truncation_remainder(traj: &[(f64, QuantumOperator)], pot: &PotentialSpec, pg: &PhaseGrid, m: u32) -> Result<(Symbol, f64)> {
    if traj.len() != 3 {
        return Err(Error::InsufficientSampling("truncation needs exactly three snapshots".into()));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("truncation order m must be ≥ 2".into()));
    }
    let sample = pde_residual(traj, pot, pg)?.remove(0);
    let h = traj[1].1.h();
    let u = husimi_symbol(&traj[1].1, pg)?;
    let r = sample.lhs.sub(&truncated_mean_field_terms(&u, pot, h, m)?)?;
    let l1 = r.l1_norm();
    Ok((r, l1))
}

#[cfg(test)]
mod tests;
