//! Split-step Schrödinger propagation, self-consistent TDHF and the Husimi density.
//!
//! Kinetic symbol is |ξ|², so Ĥ = −h²∂² + V and the kinetic phase per step is e^{−i dt h k²}.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::classical::{PhaseDistribution, PotentialSpec, Profile};
use crate::error::{Error, Result};
use crate::fourier;
use crate::operator::{apply_momentum, DensityState, QuantumOperator};
use crate::phase_space::{PhaseGrid, PositionGrid, WaveFunction};
use crate::quantization::wick_symbol_direct;

/// Fraction of spectral power allowed in the top fifth of the wavenumber band.
pub const SPECTRAL_TAIL_LIMIT: f64 = 1e-10;
/// Rank up to which states are propagated as orbitals.
pub const LOW_RANK_MAX: usize = 16;
const OCCUPATION_FLOOR: f64 = 1e-12;

/// V_q(x_i) = V(x_i) + Σ_j W(x_i − x_j) n(x_j) dx from a diagonal density n.
pub fn field_from_density(grid: &PositionGrid, n: &[f64], pot: &PotentialSpec) -> Vec<f64> {
    let xs = grid.points();
    let dx = grid.dx();
    xs.iter()
        .map(|&x| {
            let mut acc = pot.v.value(x);
            if pot.w != Profile::Zero {
                acc += xs.iter().zip(n).map(|(y, ny)| pot.w.value(x - y) * ny).sum::<f64>() * dx;
            }
            acc
        })
        .collect()
}

/// V_q(x, ρ) = V(x) + Tr(W_x ρ) on the grid nodes.
pub fn mean_field_vq(rho: &DensityState, pot: &PotentialSpec) -> Vec<f64> {
    field_from_density(&rho.grid(), &rho.density(), pot)
}

/// Share of |f̂|² above 0.8 of the Nyquist wavenumber.
pub fn spectral_tail(values: &[C64]) -> f64 {
    let n = values.len();
    let mut buf = values.to_vec();
    fourier::fft(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let cut = (0.4 * n as f64) as usize;
    let tail: f64 = buf
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k).min(n - *k) > cut)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    tail / total
}

fn check_band(values: &[C64], grid: &PositionGrid, h: f64) -> Result<()> {
    let tail = spectral_tail(values);
    if tail > SPECTRAL_TAIL_LIMIT {
        return Err(Error::Alias { xi: 0.8 * grid.xi_nyquist(h), limit: tail });
    }
    Ok(())
}

/// Precomputed Strang factors e^{−iτV/2h}·e^{−iτhk²}·e^{−iτV/2h}.
#[derive(Debug, Clone)]
pub struct SplitPropagator {
    half_potential: Vec<C64>,
    kinetic: Vec<C64>,
}

impl SplitPropagator {
    pub fn new(grid: &PositionGrid, h: f64, dt: f64, v: &[f64]) -> Result<Self> {
        if v.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} potential values on a {}-point grid", v.len(), grid.len())));
        }
        let half_potential = v.iter().map(|vx| C64::from_polar(1.0, -dt * vx / (2.0 * h))).collect();
        let kinetic = fourier::wavenumbers(grid.len(), grid.dx())
            .iter()
            .map(|k| C64::from_polar(1.0, -dt * h * k * k))
            .collect();
        Ok(SplitPropagator { half_potential, kinetic })
    }

    pub fn apply(&self, v: &mut [C64]) {
        for (z, p) in v.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        fourier::fft(v);
        for (z, p) in v.iter_mut().zip(&self.kinetic) {
            *z *= p;
        }
        fourier::ifft(v);
        for (z, p) in v.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
    }

    /// U K U* for a kernel K.
    pub fn conjugate(&self, k: &DMatrix<C64>) -> DMatrix<C64> {
        let n = k.nrows();
        let cols = crate::par_map(n, |j| {
            let mut c: Vec<C64> = k.column(j).iter().copied().collect();
            self.apply(&mut c);
            c
        });
        // M = U K; (U M*)* = U K U*
        let m_adj = DMatrix::from_fn(n, n, |i, j| cols[i][j].conj());
        let cols2 = crate::par_map(n, |j| {
            let mut c: Vec<C64> = m_adj.column(j).iter().copied().collect();
            self.apply(&mut c);
            c
        });
        DMatrix::from_fn(n, n, |i, j| cols2[i][j].conj())
    }
}

/// One Strang step of ih∂_t f = (−h²∂² + V) f.
pub fn schrodinger_step(f: &WaveFunction, dt: f64, v: &[f64]) -> Result<WaveFunction> {
    let grid = f.grid();
    check_band(f.values(), &grid, f.h())?;
    let prop = SplitPropagator::new(&grid, f.h(), dt, v)?;
    let mut out = f.values().to_vec();
    prop.apply(&mut out);
    Ok(WaveFunction::from_raw(out, grid, f.h()))
}

/// ⟨x⟩ and Var(x) of a normalized wave function.
pub fn position_moments(f: &WaveFunction) -> (f64, f64) {
    let g = f.grid();
    let dx = g.dx();
    let xs = g.points();
    let p: Vec<f64> = f.values().iter().map(|z| z.norm_sqr() * dx).collect();
    let m: f64 = xs.iter().zip(&p).map(|(x, w)| x * w).sum();
    let v: f64 = xs.iter().zip(&p).map(|(x, w)| (x - m).powi(2) * w).sum();
    (m, v)
}

#[derive(Debug, Clone)]
enum Repr {
    Dense(QuantumOperator),
    Orbitals { orbitals: Vec<WaveFunction>, occupations: Vec<f64> },
}

/// ρ_h(t) with its potentials; carried either as a dense kernel or as orbitals with occupations.
#[derive(Debug, Clone)]
pub struct MeanFieldState {
    repr: Repr,
    t: f64,
    pot: PotentialSpec,
    h: f64,
    grid: PositionGrid,
}

fn gram_defect(orbitals: &[WaveFunction]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, fa) in orbitals.iter().enumerate() {
        for (b, fb) in orbitals.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((fa.inner(fb)? - target).norm());
        }
    }
    Ok(worst)
}

impl MeanFieldState {
    /// Low-rank orbitals when the numerical rank is ≤ LOW_RANK_MAX, else the dense kernel.
    pub fn new(rho: DensityState, pot: PotentialSpec) -> Result<Self> {
        let grid = rho.grid();
        let h = rho.h();
        let op = rho.operator();
        let n = grid.len();
        let Some(eig) = crate::operator::hermitian_eigen(&crate::operator::herm(&op.matrix())) else {
            return Ok(MeanFieldState { repr: Repr::Dense(rho.into_operator()), t: 0.0, pot, h, grid });
        };
        let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > OCCUPATION_FLOOR).collect();
        if idx.len() <= LOW_RANK_MAX {
            idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let scale = grid.dx().sqrt().recip();
            let orbitals = idx
                .iter()
                .map(|&i| WaveFunction::from_raw(eig.eigenvectors.column(i).iter().map(|z| z * scale).collect(), grid, h))
                .collect();
            let occupations = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
            return Self::from_orbitals(orbitals, occupations, pot);
        }
        Ok(MeanFieldState { repr: Repr::Dense(rho.into_operator()), t: 0.0, pot, h, grid })
    }

    /// Always the dense kernel.
    pub fn dense(rho: DensityState, pot: PotentialSpec) -> Self {
        let (grid, h) = (rho.grid(), rho.h());
        MeanFieldState { repr: Repr::Dense(rho.into_operator()), t: 0.0, pot, h, grid }
    }

    /// Orthonormal orbitals with nonnegative occupations summing to 1.
    pub fn from_orbitals(orbitals: Vec<WaveFunction>, occupations: Vec<f64>, pot: PotentialSpec) -> Result<Self> {
        if orbitals.is_empty() || orbitals.len() != occupations.len() {
            return Err(Error::InvalidArgument("orbitals and occupations must match and be non-empty".into()));
        }
        if occupations.iter().any(|&w| !(w >= 0.0)) || (occupations.iter().sum::<f64>() - 1.0).abs() > DensityState::TRACE_TOL {
            return Err(Error::Invariant("occupations must be nonnegative and sum to 1".into()));
        }
        let d = gram_defect(&orbitals)?;
        if d > 1e-8 {
            return Err(Error::Invariant(format!("orbitals not orthonormal (defect {d:e})")));
        }
        let (grid, h) = (orbitals[0].grid(), orbitals[0].h());
        Ok(MeanFieldState { repr: Repr::Orbitals { orbitals, occupations }, t: 0.0, pot, h, grid })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn grid(&self) -> PositionGrid {
        self.grid
    }
    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }
    pub fn is_low_rank(&self) -> bool {
        matches!(self.repr, Repr::Orbitals { .. })
    }
    pub fn occupations(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Orbitals { occupations, .. } => Some(occupations),
            Repr::Dense(_) => None,
        }
    }

    /// n(x_i) = K_ρ(x_i, x_i)
    pub fn density_diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(op) => op.kernel().diagonal().iter().map(|z| z.re).collect(),
            Repr::Orbitals { orbitals, occupations } => {
                let mut n = vec![0.0; self.grid.len()];
                for (phi, w) in orbitals.iter().zip(occupations) {
                    for (acc, z) in n.iter_mut().zip(phi.values()) {
                        *acc += w * z.norm_sqr();
                    }
                }
                n
            }
        }
    }

    pub fn mean_field(&self) -> Vec<f64> {
        field_from_density(&self.grid, &self.density_diagonal(), &self.pot)
    }

    /// The kernel of ρ, without the eigen-decomposition a DensityState would run.
    pub fn operator(&self) -> QuantumOperator {
        match &self.repr {
            Repr::Dense(op) => op.clone(),
            Repr::Orbitals { orbitals, occupations } => {
                let n = self.grid.len();
                let mut k = DMatrix::<C64>::zeros(n, n);
                for (phi, &w) in orbitals.iter().zip(occupations) {
                    let v = nalgebra::DVector::from_column_slice(phi.values());
                    k += (&v * v.adjoint()) * C64::new(w, 0.0);
                }
                QuantumOperator::from_raw(k, self.grid, self.h)
            }
        }
    }

    /// Fully validated density (runs an eigen-decomposition).
    pub fn density_state(&self) -> Result<DensityState> {
        DensityState::new(self.operator().hermitian_part())
    }

    fn propagated(&self, dt: f64, field: &[f64]) -> Result<Repr> {
        let prop = SplitPropagator::new(&self.grid, self.h, dt, field)?;
        Ok(match &self.repr {
            Repr::Dense(op) => Repr::Dense(QuantumOperator::from_raw(prop.conjugate(op.kernel()), self.grid, self.h)),
            Repr::Orbitals { orbitals, occupations } => {
                let out = crate::par_map(orbitals.len(), |k| {
                    let mut v = orbitals[k].values().to_vec();
                    prop.apply(&mut v);
                    WaveFunction::from_raw(v, self.grid, self.h)
                });
                Repr::Orbitals { orbitals: out, occupations: occupations.clone() }
            }
        })
    }

    fn check_band(&self) -> Result<()> {
        match &self.repr {
            Repr::Dense(op) => {
                // the diagonal carries the band content of every orbital
                let d: Vec<C64> = (0..self.grid.len()).map(|j| op.kernel()[(j, self.grid.len() / 2)]).collect();
                check_band(&d, &self.grid, self.h)
            }
            Repr::Orbitals { orbitals, .. } => orbitals.iter().try_for_each(|o| check_band(o.values(), &self.grid, self.h)),
        }
    }

    /// Cheap per-step invariants: hermiticity and trace for kernels, orbital norms for orbitals.
    pub fn check_invariants(&self) -> Result<()> {
        match &self.repr {
            Repr::Dense(op) => {
                let hd = op.hermitian_defect();
                if hd > 1e-10 {
                    return Err(Error::Invariant(format!("hermitian defect {hd:e} at t = {}", self.t)));
                }
                let tr = op.trace().re;
                if (tr - 1.0).abs() > DensityState::TRACE_TOL {
                    return Err(Error::Invariant(format!("trace {tr} at t = {}", self.t)));
                }
            }
            Repr::Orbitals { orbitals, .. } => {
                for o in orbitals {
                    let e = (o.norm() - 1.0).abs();
                    if e > 1e-10 {
                        return Err(Error::Invariant(format!("orbital norm drift {e:e} at t = {}", self.t)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Tr((−h²∂² + V)ρ) + ½∫∫W(x−y)n(x)n(y); monitored, not asserted.
    pub fn energy(&self) -> f64 {
        let dx = self.grid.dx();
        let n = self.density_diagonal();
        let xs = self.grid.points();
        let pot: f64 = xs.iter().zip(&n).map(|(x, d)| self.pot.v.value(*x) * d).sum::<f64>() * dx;
        let mut inter = 0.0;
        if self.pot.w != Profile::Zero {
            for (x, nx) in xs.iter().zip(&n) {
                for (y, ny) in xs.iter().zip(&n) {
                    inter += self.pot.w.value(x - y) * nx * ny;
                }
            }
            inter *= 0.5 * dx * dx;
        }
        let kinetic = match &self.repr {
            Repr::Orbitals { orbitals, occupations } => orbitals
                .iter()
                .zip(occupations)
                .map(|(o, w)| {
                    let mut v = o.values().to_vec();
                    apply_momentum(&mut v, dx, self.h);
                    w * v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
                })
                .sum(),
            Repr::Dense(op) => {
                // Tr(P ρ P) through P applied to the columns and then the rows
                let k = op.kernel();
                let np = self.grid.len();
                let cols = crate::par_map(np, |j| {
                    let mut c: Vec<C64> = k.column(j).iter().copied().collect();
                    apply_momentum(&mut c, dx, self.h);
                    c
                });
                let pk_adj = DMatrix::from_fn(np, np, |i, j| cols[i][j].conj());
                let rows = crate::par_map(np, |j| {
                    let mut c: Vec<C64> = pk_adj.column(j).iter().copied().collect();
                    apply_momentum(&mut c, dx, self.h);
                    c[j].conj()
                });
                rows.iter().map(|z| z.re).sum::<f64>() * dx
            }
        };
        kinetic + pot + inter
    }
}

/// One TDHF step: predictor half step under V_q(ρ(t)), corrector full step under V_q(ρ(t + dt/2)).
pub fn tdhf_step(state: &MeanFieldState, dt: f64) -> Result<MeanFieldState> {
    state.check_band()?;
    let v0 = state.mean_field();
    let field = if state.pot.is_interacting() {
        let mid = MeanFieldState { repr: state.propagated(0.5 * dt, &v0)?, ..state.clone() };
        mid.mean_field()
    } else {
        v0
    };
    let next = MeanFieldState { repr: state.propagated(dt, &field)?, t: state.t + dt, ..state.clone() };
    next.check_invariants()?;
    Ok(next)
}

/// Steps of at most dt up to time t; the callback sees every intermediate state.
pub fn tdhf_evolve(state: &MeanFieldState, t: f64, dt: f64, mut each: impl FnMut(&MeanFieldState)) -> Result<MeanFieldState> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t}, dt = {dt}")));
    }
    let n = (t / dt - 1e-9).ceil().max(0.0) as usize;
    let tau = if n == 0 { 0.0 } else { t / n as f64 };
    let mut cur = state.clone();
    for _ in 0..n {
        cur = tdhf_step(&cur, tau)?;
        each(&cur);
    }
    Ok(cur)
}

/// u_h = (2πh)^{-1} σ^wick(ρ) on pg.
pub fn husimi_density(rho: &QuantumOperator, pg: &PhaseGrid) -> Result<PhaseDistribution> {
    let w = wick_symbol_direct(rho, pg)?;
    PhaseDistribution::from_symbol(&w.scale(C64::new(1.0 / (2.0 * PI * rho.h()), 0.0)))
}

/// ρ = (2πh)·Op_h(F₀), F₀ = (2π)^{-1} e^{−(x²+ξ²)/2}; kernel (2π)^{-1/2} e^{−(x+y)²/8 − (x−y)²/2h²}.
pub fn broad_gaussian_state(grid: PositionGrid, h: f64) -> Result<DensityState> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("h = {h} outside (0, 1]")));
    }
    let xs = grid.points();
    let n = grid.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        let (s, d) = (xs[i] + xs[j], xs[i] - xs[j]);
        C64::new((2.0 * PI).powf(-0.5) * (-s * s / 8.0 - d * d / (2.0 * h * h)).exp(), 0.0)
    });
    DensityState::new(QuantumOperator::new(k, grid, h)?.with_hermitian_hint()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{coherent_state, PhasePoint};
    use crate::quantization::weyl_quantize_fn;

    #[test]
    fn mean_field_oracles() {
        let g = PositionGrid::new(-10.0, 10.0, 256).unwrap();
        let h = 0.2;
        let rho = DensityState::pure(&coherent_state(PhasePoint::new(0.7, 0.3), h, &g).unwrap()).unwrap();
        let pot = PotentialSpec::preset("cosine").unwrap();
        let f = mean_field_vq(&rho, &pot);
        for (x, v) in g.points().iter().zip(&f) {
            assert_eq!(*v, pot.v.value(*x));
        }
        let pot = PotentialSpec::preset("gaussian_W").unwrap();
        let f = mean_field_vq(&rho, &pot);
        // |Ψ|² is N(0.7, h/2)
        let conv = pot.w.convolved(h / 2.0);
        for (x, v) in g.points().iter().zip(&f) {
            assert!((v - pot.v.value(*x) - conv.value(x - 0.7)).abs() < 1e-4);
        }
        let c = PotentialSpec { v: Profile::Zero, w: Profile::Harmonic { k: 0.0, c0: 1.7 } };
        for v in mean_field_vq(&rho, &c) {
            assert!((v - 1.7).abs() < 1e-10);
        }
    }

    #[test]
    fn free_packet_moves_and_spreads() {
        let g = PositionGrid::new(-16.0, 16.0, 512).unwrap();
        let h = 0.1;
        let xi0 = 0.8;
        let mut f = coherent_state(PhasePoint::new(-3.0, xi0), h, &g).unwrap();
        let zero = vec![0.0; 512];
        let dt = 0.01;
        for _ in 0..200 {
            f = schrodinger_step(&f, dt, &zero).unwrap();
            assert!((f.norm() - 1.0).abs() < 1e-10);
        }
        let (m, v) = position_moments(&f);
        assert!((m - (-3.0 + 2.0 * 2.0 * xi0)).abs() < 1e-4);
        let expect = h / 2.0 + 4.0 * 4.0 * h / 2.0;
        assert!((v - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn harmonic_recurrence() {
        let g = PositionGrid::new(-8.0, 8.0, 256).unwrap();
        let h = 0.2;
        let f0 = coherent_state(PhasePoint::new(1.0, 0.5), h, &g).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| x * x).collect();
        let n = 3142;
        let dt = PI / n as f64;
        let prop = SplitPropagator::new(&g, h, dt, &v).unwrap();
        let mut w = f0.values().to_vec();
        for _ in 0..n {
            prop.apply(&mut w);
        }
        let f = WaveFunction::new(w, g, h).unwrap();
        // Ĥ = P² + Q² has spectrum h(2k+1), so e^{−iπĤ/h} = −1
        let fid = f.inner(&f0).unwrap().norm_sqr();
        assert!(fid > 1.0 - 1e-3, "{fid}");
    }

    #[test]
    fn aliasing_is_refused() {
        let g = PositionGrid::new(-8.0, 8.0, 128).unwrap();
        let h = 0.1;
        // momentum near the band edge
        let f = coherent_state(PhasePoint::new(0.0, 0.95 * g.xi_nyquist(h)), h, &g);
        if let Ok(f) = f {
            assert!(matches!(schrodinger_step(&f, 0.01, &vec![0.0; 128]), Err(Error::Alias { .. })));
        }
    }

    fn three_orbitals(g: PositionGrid, h: f64) -> (Vec<WaveFunction>, Vec<f64>) {
        // Gram-Schmidt on three coherent states
        let mut out: Vec<WaveFunction> = Vec::new();
        for c in [PhasePoint::new(-1.0, 0.3), PhasePoint::new(0.5, -0.2), PhasePoint::new(1.2, 0.6)] {
            let mut f = coherent_state(c, h, &g).unwrap();
            for o in &out {
                let p = f.inner(o).unwrap();
                f = f.add(&o.scaled(-p)).unwrap();
            }
            out.push(f.normalized().unwrap());
        }
        (out, vec![0.5, 0.3, 0.2])
    }

    #[test]
    fn w_zero_reduces_to_linear_evolution() {
        let g = PositionGrid::new(-8.0, 8.0, 128).unwrap();
        let h = 0.25;
        let pot = PotentialSpec::preset("cosine").unwrap();
        let psi = coherent_state(PhasePoint::new(0.5, 0.5), h, &g).unwrap();
        let st = MeanFieldState::dense(DensityState::pure(&psi).unwrap(), pot);
        let v: Vec<f64> = g.points().iter().map(|x| pot.v.value(*x)).collect();
        let dt = 0.01;
        let mut f = psi.clone();
        let end = tdhf_evolve(&st, 1.0, dt, |_| {}).unwrap();
        for _ in 0..100 {
            f = schrodinger_step(&f, dt, &v).unwrap();
        }
        let lin = QuantumOperator::projector(&f);
        assert!(end.operator().sub(&lin).unwrap().trace_norm() < 1e-6);
    }

    #[test]
    fn dense_and_orbital_paths_agree_and_keep_spectrum() {
        let g = PositionGrid::new(-8.0, 8.0, 128).unwrap();
        let h = 0.25;
        let pot = PotentialSpec::preset("gaussian_W").unwrap();
        let (orbs, occ) = three_orbitals(g, h);
        let rho = DensityState::from_orbitals(&orbs, &occ).unwrap();
        let auto = MeanFieldState::new(rho.clone(), pot).unwrap();
        assert!(auto.is_low_rank());
        let dense = MeanFieldState::dense(rho, pot);
        let a = tdhf_evolve(&auto, 1.0, 0.01, |s| s.check_invariants().unwrap()).unwrap();
        let b = tdhf_evolve(&dense, 1.0, 0.01, |s| s.check_invariants().unwrap()).unwrap();
        assert!(a.operator().sub(&b.operator()).unwrap().trace_norm() < 1e-8);
        let ds = b.density_state().unwrap();
        let spec = ds.spectrum();
        for (k, w) in occ.iter().enumerate() {
            assert!((spec[k] - w).abs() < 1e-6);
        }
        let e0 = dense.energy();
        let e1 = b.energy();
        assert!((auto.energy() - e0).abs() < 1e-10);
        assert!((e1 - e0).abs() < 1e-3 * e0.abs().max(1.0), "{e0} -> {e1}");
    }

    #[test]
    fn splitting_is_second_order() {
        let g = PositionGrid::new(-8.0, 8.0, 128).unwrap();
        let h = 0.25;
        let pot = PotentialSpec::preset("gaussian_W").unwrap();
        let (orbs, occ) = three_orbitals(g, h);
        let st = MeanFieldState::from_orbitals(orbs, occ, pot).unwrap();
        let run = |dt: f64| tdhf_evolve(&st, 0.5, dt, |_| {}).unwrap().operator();
        let dt = 0.05;
        let reference = run(dt / 8.0);
        let e1 = run(dt).sub(&reference).unwrap().trace_norm();
        let e2 = run(dt / 2.0).sub(&reference).unwrap().trace_norm();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn husimi_of_coherent_projector() {
        let g = PositionGrid::standard();
        let h = 0.25;
        let x0 = PhasePoint::new(0.4, -0.3);
        let rho = QuantumOperator::projector(&coherent_state(x0, h, &g).unwrap());
        let pg = PhaseGrid::square(3.5, 64).unwrap();
        let u = husimi_density(&rho, &pg).unwrap();
        assert!((u.mass() - 1.0).abs() < 1e-4);
        assert!(u.min() >= -1e-10);
        let peak = 1.0 / (2.0 * PI * h);
        for a in 0..pg.nx {
            for b in 0..pg.nxi {
                let exact = peak * (-(pg.point(a, b) - x0).norm_sqr() / (2.0 * h)).exp();
                assert!((u.values()[(a, b)] - exact).abs() < 1e-4 * peak);
            }
        }
    }

    #[test]
    fn broad_gaussian_state_is_the_quantized_density() {
        let g = PositionGrid::new(-8.0, 8.0, 256).unwrap();
        let h = 0.2;
        let rho = broad_gaussian_state(g, h).unwrap();
        let f0 = weyl_quantize_fn(g, h, |x, xi| C64::new((-(x * x + xi * xi) / 2.0).exp() / (2.0 * PI) * 2.0 * PI * h, 0.0)).unwrap();
        assert!(rho.operator().max_diff(&f0) < 1e-10);
        let st = MeanFieldState::new(rho, PotentialSpec::free()).unwrap();
        assert!(!st.is_low_rank());
    }
}
