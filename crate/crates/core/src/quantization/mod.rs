//! Weyl quantization, Weyl and Wick symbols, and the heat semigroup between them.

mod counterexample;
mod smoothing;

pub use counterexample::{
    ball_masses, counterexample_build, kernel_a_lambda, kernel_b_lambda, mu, p_symbol, trace_b_lambda, trace_norm_a_lambda,
    wick_symbol_a_lambda, wick_symbol_p, CounterexampleDiagnostics, CounterexampleResult, QuadratureSpec,
};
pub use smoothing::{conjugation_quadrature, gaussian_average, smooth_th, smooth_tlambda};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::operator::QuantumOperator;
use crate::phase_space::{border_ratio, CoherentWindow, PhaseGrid, PhasePoint, PositionGrid};

/// Relative border magnitude tolerated before a symbol counts as leaking.
pub const LEAKAGE_FLOOR: f64 = 1e-8;

/// Sampled function on a phase grid, indexed [(a, b)] = (x_a, ξ_b).
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    values: DMatrix<C64>,
    pg: PhaseGrid,
    h_tag: Option<f64>,
    periodic: bool,
}

impl Symbol {
    pub fn new(values: DMatrix<C64>, pg: PhaseGrid) -> Result<Self> {
        if values.shape() != (pg.nx, pg.nxi) {
            return Err(Error::GridMismatch(format!("{:?} values on a {}x{} phase grid", values.shape(), pg.nx, pg.nxi)));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite symbol value".into()));
        }
        Ok(Symbol { values, pg, h_tag: None, periodic: false })
    }

    pub fn from_fn(pg: PhaseGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = DMatrix::from_fn(pg.nx, pg.nxi, |a, b| f(pg.x(a), pg.xi(b)));
        Symbol { values, pg, h_tag: None, periodic: false }
    }

    pub fn from_real_fn(pg: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(pg, |x, xi| C64::new(f(x, xi), 0.0))
    }

    /// A constant; marked periodic so spectral operations accept it.
    pub fn constant(pg: PhaseGrid, c: C64) -> Self {
        Symbol { values: DMatrix::from_element(pg.nx, pg.nxi, c), pg, h_tag: None, periodic: true }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h_tag = Some(h);
        self
    }

    /// Declare the samples one period of a periodic function.
    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub(crate) fn from_raw(values: DMatrix<C64>, pg: PhaseGrid) -> Self {
        Symbol { values, pg, h_tag: None, periodic: false }
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }
    pub fn pg(&self) -> &PhaseGrid {
        &self.pg
    }
    pub fn h_tag(&self) -> Option<f64> {
        self.h_tag
    }
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
    pub fn at(&self, a: usize, b: usize) -> C64 {
        self.values[(a, b)]
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.values.map(|z| z.re)
    }

    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.pg.cell_area()
    }
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum::<f64>() * self.pg.cell_area()
    }
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn same(&self, other: &Symbol) -> Result<()> {
        if self.pg != other.pg {
            return Err(Error::GridMismatch("symbols live on different phase grids".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Symbol) -> Result<Symbol> {
        self.same(other)?;
        Ok(Symbol { values: &self.values - &other.values, ..self.clone() })
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        self.same(other)?;
        Ok(Symbol { values: &self.values + &other.values, ..self.clone() })
    }

    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        self.same(other)?;
        Ok(Symbol { values: self.values.component_mul(&other.values), ..self.clone() })
    }

    pub fn scale(&self, s: C64) -> Symbol {
        Symbol { values: &self.values * s, ..self.clone() }
    }

    pub fn max_diff(&self, other: &Symbol) -> Result<f64> {
        Ok(self.sub(other)?.linf_norm())
    }

    /// Border magnitude relative to the peak.
    pub fn border_ratio(&self) -> f64 {
        border_ratio(&self.values.map(|z| z.norm()))
    }

    fn check_leakage(&self, limit: f64) -> Result<()> {
        if self.periodic {
            return Ok(());
        }
        let leak = self.border_ratio();
        if leak > limit {
            return Err(Error::Leakage { leak, limit });
        }
        Ok(())
    }
}

/// Midpoint lattice m_s = x_min + s·dx/2 and the matching band ξ_k = k·2πh/(2N dx).
fn band(grid: &PositionGrid, h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let mids = (0..2 * n - 1).map(|s| grid.x_min() + 0.5 * s as f64 * grid.dx()).collect();
    let xis = fourier::wavenumbers(2 * n, grid.dx()).into_iter().map(|k| k * h).collect();
    (mids, xis)
}

/// Assemble K(x_i, x_j) = (2πh)^{-1} ∫ F((x_i+x_j)/2, ξ) e^{i(x_i−x_j)ξ/h} dξ from
/// symbol samples G[s][k] on the midpoint lattice and band.
fn assemble_from_band(grid: PositionGrid, h: f64, rows: Vec<Vec<C64>>) -> QuantumOperator {
    let n = grid.len();
    let m = 2 * n;
    let dx = grid.dx();
    let per_mid: Vec<Vec<C64>> = crate::par_map(rows.len(), |s| {
        let mut buf = rows[s].clone();
        fourier::ifft(&mut buf);
        buf
    });
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = (i as isize - j as isize).rem_euclid(m as isize) as usize;
            k[(i, j)] = per_mid[i + j][d] / dx;
        }
    }
    QuantumOperator::from_raw(k, grid, h)
}

/// Weyl quantization of a symbol given as a function.
pub fn weyl_quantize_fn(grid: PositionGrid, h: f64, f: impl Fn(f64, f64) -> C64 + Sync) -> Result<QuantumOperator> {
    crate::phase_space::check_h(h)?;
    let (mids, xis) = band(&grid, h);
    let rows = crate::par_map(mids.len(), |s| xis.iter().map(|&xi| f(mids[s], xi)).collect());
    Ok(assemble_from_band(grid, h, rows))
}

/// Weyl quantization of sampled F, interpolated spectrally to midpoints and the band.
pub fn weyl_quantize(f: &Symbol, grid: PositionGrid, h: f64) -> Result<QuantumOperator> {
    crate::phase_space::check_h(h)?;
    let pg = f.pg();
    pg.check_alias(&grid, h)?;
    f.check_leakage(1e-10)?;
    let (mids, xis) = band(&grid, h);
    let ix = fourier::interp_matrix(pg.x_min, pg.dx(), pg.nx, &mids, !f.periodic).map(|v| C64::new(v, 0.0));
    let ik = fourier::interp_matrix(pg.xi_min, pg.dxi(), pg.nxi, &xis, !f.periodic).map(|v| C64::new(v, 0.0));
    let g = ix * f.values() * ik.transpose();
    let rows = (0..g.nrows()).map(|s| g.row(s).iter().copied().collect()).collect();
    Ok(assemble_from_band(grid, h, rows))
}

/// σ(x, ξ) = ∫ K(x + v/2, x − v/2) e^{−ivξ/h} dv at the nodes of `pg`.
pub fn weyl_symbol(a: &QuantumOperator, pg: &PhaseGrid) -> Result<Symbol> {
    let grid = a.grid();
    let h = a.h();
    pg.check_alias(&grid, h)?;
    let n = grid.len();
    let dx = grid.dx();
    let k = a.kernel();
    // far off-diagonal mass would alias in the v-transform
    let top = k.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut far = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if (i as isize - j as isize).unsigned_abs() >= n / 2 {
                far = far.max(k[(i, j)].norm());
            }
        }
    }
    if top > 0.0 && far / top > LEAKAGE_FLOOR {
        return Err(Error::Leakage { leak: far / top, limit: LEAKAGE_FLOOR });
    }
    let xs = pg.xs();
    let m_even = fourier::interp_matrix(grid.x_min(), dx, n, &xs, false);
    let m_odd = fourier::interp_matrix(grid.x_min() + 0.5 * dx, dx, n, &xs, false);
    // T[a][d + n - 1] = diagonal d interpolated to x_a
    let diags: Vec<Vec<C64>> = crate::par_map(2 * n - 1, |di| {
        let d = di as isize - (n as isize - 1);
        let m = if d.rem_euclid(2) == 0 { &m_even } else { &m_odd };
        let shift = d.div_euclid(2);
        let j0 = 0.max(-d) as usize;
        let j1 = (n as isize).min(n as isize - d) as usize;
        (0..pg.nx)
            .map(|a_| {
                let mut acc = C64::new(0.0, 0.0);
                for j in j0..j1 {
                    let col = (j as isize + shift).rem_euclid(n as isize) as usize;
                    acc += k[((j as isize + d) as usize, j)] * m[(a_, col)];
                }
                acc
            })
            .collect()
    });
    let xis = pg.xis();
    let cols: Vec<Vec<C64>> = crate::par_map(pg.nx, |a_| {
        xis.iter()
            .map(|&xi| {
                let mut acc = C64::new(0.0, 0.0);
                for (di, t) in diags.iter().enumerate() {
                    let d = di as f64 - (n as f64 - 1.0);
                    acc += t[a_] * C64::from_polar(1.0, -d * dx * xi / h);
                }
                acc * dx
            })
            .collect()
    });
    let values = DMatrix::from_fn(pg.nx, pg.nxi, |a_, b| cols[a_][b]);
    Ok(Symbol::from_raw(values, *pg).with_h(h))
}

/// S(d) = Σ_i K[s+i, s+i+d] g_i g_{i+d} over a coherent window, d ∈ (−L, L).
fn window_diagonals(k: &DMatrix<C64>, w: &CoherentWindow) -> Vec<C64> {
    let l = w.len();
    let mut s = vec![C64::new(0.0, 0.0); 2 * l - 1];
    for i in 0..l {
        let gi = w.envelope[i];
        for j in 0..l {
            s[j + l - 1 - i] += k[(w.start + i, w.start + j)] * (gi * w.envelope[j]);
        }
    }
    s
}

/// ⟨AΨ_X, Ψ_X⟩ = dx² Σ_d S(d) e^{i d dx ξ/h}
fn wick_from_diagonals(s: &[C64], dx: f64, h: f64, xi: f64) -> C64 {
    let l = (s.len() + 1) / 2;
    let step = C64::from_polar(1.0, dx * xi / h);
    let mut ph = C64::from_polar(1.0, -((l - 1) as f64) * dx * xi / h);
    let mut acc = C64::new(0.0, 0.0);
    for v in s {
        acc += v * ph;
        ph *= step;
    }
    acc * dx * dx
}

/// Wick symbol ⟨AΨ_{X,h}, Ψ_{X,h}⟩ on every node of `pg`.
pub fn wick_symbol_direct(a: &QuantumOperator, pg: &PhaseGrid) -> Result<Symbol> {
    let grid = a.grid();
    let h = a.h();
    pg.check_alias(&grid, h)?;
    let dx = grid.dx();
    let xis = pg.xis();
    let cols: Vec<Result<Vec<C64>>> = crate::par_map(pg.nx, |a_| {
        let w = CoherentWindow::new(&grid, h, pg.x(a_))?;
        let s = window_diagonals(a.kernel(), &w);
        Ok(xis.iter().map(|&xi| wick_from_diagonals(&s, dx, h, xi)).collect())
    });
    let mut values = DMatrix::zeros(pg.nx, pg.nxi);
    for (a_, col) in cols.into_iter().enumerate() {
        for (b, v) in col?.into_iter().enumerate() {
            values[(a_, b)] = v;
        }
    }
    Ok(Symbol::from_raw(values, *pg).with_h(h))
}

/// Wick symbol at scattered phase points.
pub fn wick_symbol_at(a: &QuantumOperator, points: &[PhasePoint]) -> Result<Vec<C64>> {
    let grid = a.grid();
    let h = a.h();
    let limit = 0.7 * grid.xi_nyquist(h);
    crate::par_map(points.len(), |p| {
        let x = points[p];
        if x.xi.abs() > limit {
            return Err(Error::Alias { xi: x.xi.abs(), limit });
        }
        let w = CoherentWindow::new(&grid, h, x.x)?;
        let s = window_diagonals(a.kernel(), &w);
        Ok(wick_from_diagonals(&s, grid.dx(), h, x.xi))
    })
    .into_iter()
    .collect()
}

/// e^{(h/4)Δ}F: convolution with (πh)^{-1} e^{−|X|²/h}, done by 2-D FFT.
pub fn heat_smooth(f: &Symbol, h: f64) -> Result<Symbol> {
    f.check_leakage(LEAKAGE_FLOOR)?;
    let pg = f.pg();
    Ok(Symbol { values: heat_apply(f.values(), pg, h), ..f.clone() })
}

pub(crate) fn heat_apply(values: &DMatrix<C64>, pg: &PhaseGrid, h: f64) -> DMatrix<C64> {
    let (nx, nxi) = (pg.nx, pg.nxi);
    let kx = fourier::wavenumbers(nx, pg.dx());
    let kxi = fourier::wavenumbers(nxi, pg.dxi());
    let mut v = values.clone();
    spectral_2d(&mut v, |a, b| (-(h / 4.0) * (kx[a] * kx[a] + kxi[b] * kxi[b])).exp().into());
    v
}

/// Apply a Fourier multiplier m(a, b) (wavenumber indices) to a 2-D array.
pub(crate) fn spectral_2d(v: &mut DMatrix<C64>, m: impl Fn(usize, usize) -> C64) {
    let (nx, nxi) = v.shape();
    for b in 0..nxi {
        let mut col: Vec<C64> = v.column(b).iter().copied().collect();
        fourier::fft(&mut col);
        for a in 0..nx {
            v[(a, b)] = col[a];
        }
    }
    for a in 0..nx {
        let mut row: Vec<C64> = v.row(a).iter().copied().collect();
        fourier::fft(&mut row);
        for (b, z) in row.iter_mut().enumerate() {
            *z *= m(a, b);
        }
        fourier::ifft(&mut row);
        for b in 0..nxi {
            v[(a, b)] = row[b];
        }
    }
    for b in 0..nxi {
        let mut col: Vec<C64> = v.column(b).iter().copied().collect();
        fourier::ifft(&mut col);
        for a in 0..nx {
            v[(a, b)] = col[a];
        }
    }
}

/// Heat-smoothed Weyl symbol, computed as the Weyl symbol of T_h A.
pub fn wick_symbol_via_weyl(a: &QuantumOperator, pg: &PhaseGrid) -> Result<Symbol> {
    weyl_symbol(&smooth_th(a), pg)
}

/// (2πh)^{-1} ∫ F dX, the trace of Op_h(F).
pub fn trace_of_quantized(f: &Symbol, h: f64) -> C64 {
    f.integral() / (2.0 * PI * h)
}
