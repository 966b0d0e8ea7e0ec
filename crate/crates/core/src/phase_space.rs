//! Position grids, coherent states and the Heisenberg-Weyl group.
//!
//! Conventions: X = (x, ξ) is identified with x + iξ, the inner product is
//! ⟨f, g⟩ = ∫ f ḡ, and σ(X, Y) = y·ξ − x·η.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;

/// Relative amplitude below which a coherent-state tail counts as zero.
pub const DECAY_FLOOR: f64 = 1e-12;
/// Fraction of the Nyquist momentum a phase grid may reach.
pub const ALIAS_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { x: 0.0, xi: 0.0 };

    pub fn new(x: f64, xi: f64) -> Self {
        PhasePoint { x, xi }
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.xi * self.xi
    }

    /// x + iξ
    pub fn as_complex(self) -> C64 {
        C64::new(self.x, self.xi)
    }

    /// σ(self, other) = Im(X·Ȳ) = y·ξ − x·η.
    pub fn symplectic(self, other: PhasePoint) -> f64 {
        other.x * self.xi - self.x * other.xi
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.xi.is_finite()
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, o: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x + o.x, self.xi + o.xi)
    }
}

impl Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, o: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x - o.x, self.xi - o.xi)
    }
}

impl Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        PhasePoint::new(-self.x, -self.xi)
    }
}

impl Mul<f64> for PhasePoint {
    type Output = PhasePoint;
    fn mul(self, s: f64) -> PhasePoint {
        PhasePoint::new(self.x * s, self.xi * s)
    }
}

/// Uniform periodic grid: nodes x_min + i·dx for i < num_points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    x_min: f64,
    x_max: f64,
    num_points: usize,
}

impl PositionGrid {
    pub fn new(x_min: f64, x_max: f64, num_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("need x_max > x_min, got [{x_min}, {x_max}]")));
        }
        if num_points < 2 || !num_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("num_points = {num_points} is not a power of two")));
        }
        Ok(PositionGrid { x_min, x_max, num_points })
    }

    /// The default [-8, 8] grid with 256 points.
    pub fn standard() -> Self {
        PositionGrid { x_min: -8.0, x_max: 8.0, num_points: 256 }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn len(&self) -> usize {
        self.num_points
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.num_points as f64
    }
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }
    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.point(i)).collect()
    }
    /// Momentum Nyquist bound πh/dx.
    pub fn xi_nyquist(&self, h: f64) -> f64 {
        PI * h / self.dx()
    }
    /// Momentum nodes h·k in FFT order.
    pub fn momenta(&self, h: f64) -> Vec<f64> {
        fourier::wavenumbers(self.num_points, self.dx()).into_iter().map(|k| k * h).collect()
    }
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("h = {h} is outside (0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    values: Vec<C64>,
    grid: PositionGrid,
    h: f64,
}

impl WaveFunction {
    pub fn new(values: Vec<C64>, grid: PositionGrid, h: f64) -> Result<Self> {
        check_h(h)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on a {}-point grid", values.len(), grid.len())));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite wave function entry".into()));
        }
        Ok(WaveFunction { values, grid, h })
    }

    pub(crate) fn from_raw(values: Vec<C64>, grid: PositionGrid, h: f64) -> Self {
        WaveFunction { values, grid, h }
    }

    pub fn zeros(grid: PositionGrid, h: f64) -> Self {
        WaveFunction { values: vec![C64::new(0.0, 0.0); grid.len()], grid, h }
    }

    pub fn from_fn(grid: PositionGrid, h: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(grid.points().into_iter().map(f).collect(), grid, h)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
    pub fn grid(&self) -> PositionGrid {
        self.grid
    }
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self, other⟩ = dx Σ f ḡ
    pub fn inner(&self, other: &WaveFunction) -> Result<C64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<C64>() * self.grid.dx())
    }

    pub fn scaled(&self, s: C64) -> WaveFunction {
        WaveFunction::from_raw(self.values.iter().map(|z| z * s).collect(), self.grid, self.h)
    }

    pub fn add(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.same_grid(other)?;
        Ok(WaveFunction::from_raw(
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            self.grid,
            self.h,
        ))
    }

    pub fn normalized(&self) -> Result<WaveFunction> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Max pointwise distance.
    pub fn max_diff(&self, other: &WaveFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Grid interval outside which |f| < rel·max|f|.
    pub fn support(&self, rel: f64) -> Option<(f64, f64)> {
        let m = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return None;
        }
        let cut = rel * m;
        let lo = self.values.iter().position(|z| z.norm() > cut)?;
        let hi = self.values.iter().rposition(|z| z.norm() > cut)?;
        Some((self.grid.point(lo), self.grid.point(hi)))
    }

    pub(crate) fn same_grid(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid || self.h != other.h {
            return Err(Error::GridMismatch("wave functions live on different grids or h".into()));
        }
        Ok(())
    }
}

/// Rectangle of phase space sampled on a periodic layout:
/// x_a = x_min + a·dx (a < nx), ξ_b = xi_min + b·dξ (b < nxi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub nx: usize,
    pub nxi: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, xi_min: f64, xi_max: f64, nx: usize, nxi: usize) -> Result<Self> {
        let ok = [x_min, x_max, xi_min, xi_max].iter().all(|v| v.is_finite());
        if !ok || x_max <= x_min || xi_max <= xi_min || nx < 2 || nxi < 2 {
            return Err(Error::InvalidGrid(format!(
                "bad phase grid [{x_min},{x_max}]x[{xi_min},{xi_max}] {nx}x{nxi}"
            )));
        }
        Ok(PhaseGrid { x_min, x_max, xi_min, xi_max, nx, nxi })
    }

    /// Square window [-r, r]² with n nodes per axis.
    pub fn square(r: f64, n: usize) -> Result<Self> {
        Self::new(-r, r, -r, r, n, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }
    pub fn dxi(&self) -> f64 {
        (self.xi_max - self.xi_min) / self.nxi as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dxi()
    }
    pub fn x(&self, a: usize) -> f64 {
        self.x_min + a as f64 * self.dx()
    }
    pub fn xi(&self, b: usize) -> f64 {
        self.xi_min + b as f64 * self.dxi()
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|a| self.x(a)).collect()
    }
    pub fn xis(&self) -> Vec<f64> {
        (0..self.nxi).map(|b| self.xi(b)).collect()
    }
    pub fn point(&self, a: usize, b: usize) -> PhasePoint {
        PhasePoint::new(self.x(a), self.xi(b))
    }
    pub fn len(&self) -> usize {
        self.nx * self.nxi
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest |ξ| sampled.
    pub fn xi_extent(&self) -> f64 {
        self.xi_min.abs().max(self.xi_max.abs())
    }

    /// Alias guard for pairing with (grid, h).
    pub fn check_alias(&self, grid: &PositionGrid, h: f64) -> Result<()> {
        let limit = ALIAS_FRACTION * grid.xi_nyquist(h);
        if self.xi_extent() > limit {
            return Err(Error::Alias { xi: self.xi_extent(), limit });
        }
        Ok(())
    }
}

/// Coherent state restricted to the grid nodes where its envelope is non-negligible.
#[derive(Debug, Clone)]
pub(crate) struct CoherentWindow {
    pub start: usize,
    /// (πh)^{-1/4} e^{-(u-x)²/2h} on the window nodes.
    pub envelope: Vec<f64>,
}

impl CoherentWindow {
    pub fn new(grid: &PositionGrid, h: f64, x: f64) -> Result<Self> {
        let dx = grid.dx();
        let cut = (2.0 * h * (1.0 / (0.1 * DECAY_FLOOR)).ln()).sqrt();
        let lo = ((x - cut - grid.x_min()) / dx).ceil();
        let hi = ((x + cut - grid.x_min()) / dx).floor();
        let n = grid.len() as f64;
        if lo < 0.0 || hi > n - 1.0 {
            let edge = (x - grid.x_min()).abs().min((grid.x_max() - x).abs());
            let amp = (-edge * edge / (2.0 * h)).exp();
            if amp > DECAY_FLOOR || x < grid.x_min() || x > grid.x_max() {
                return Err(Error::Coverage(format!(
                    "coherent state at x = {x} (h = {h}) is not contained in [{}, {}]",
                    grid.x_min(),
                    grid.x_max()
                )));
            }
        }
        let start = lo.max(0.0) as usize;
        let end = (hi.min(n - 1.0).max(lo.max(0.0))) as usize;
        let c = (PI * h).powf(-0.25);
        let envelope = (start..=end)
            .map(|i| {
                let d = grid.point(i) - x;
                c * (-d * d / (2.0 * h)).exp()
            })
            .collect();
        Ok(CoherentWindow { start, envelope })
    }

    pub fn len(&self) -> usize {
        self.envelope.len()
    }
}

/// Ψ_{X,h}(u) = (πh)^{-1/4} e^{-(u-x)²/2h} e^{i(uξ - xξ/2)/h}
pub fn coherent_value(center: PhasePoint, h: f64, u: f64) -> C64 {
    let d = u - center.x;
    let amp = (PI * h).powf(-0.25) * (-d * d / (2.0 * h)).exp();
    C64::from_polar(amp, (u - 0.5 * center.x) * center.xi / h)
}

pub fn coherent_state(center: PhasePoint, h: f64, grid: &PositionGrid) -> Result<WaveFunction> {
    check_h(h)?;
    if !center.is_finite() {
        return Err(Error::InvalidArgument("non-finite phase point".into()));
    }
    for edge in [grid.x_min(), grid.x_max()] {
        let d = edge - center.x;
        let amplitude = (-d * d / (2.0 * h)).exp();
        if amplitude > DECAY_FLOOR {
            return Err(Error::BoundaryMass { center: center.x, amplitude });
        }
    }
    let f = WaveFunction::from_raw(
        grid.points().into_iter().map(|u| coherent_value(center, h, u)).collect(),
        *grid,
        h,
    );
    let n = f.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidGrid(format!(
            "dx = {} under-resolves width sqrt(h) = {} (norm {n})",
            grid.dx(),
            h.sqrt()
        )));
    }
    Ok(f)
}

/// ⟨Ψ_X, Ψ_Y⟩ in closed form.
pub fn coherent_overlap(x: PhasePoint, y: PhasePoint, h: f64) -> C64 {
    let d = x - y;
    C64::from_polar((-d.norm_sqr() / (4.0 * h)).exp(), x.symplectic(y) / (2.0 * h))
}

/// Relative amplitude used to locate the support of a wave function.
const SUPPORT_REL: f64 = 1e-8;

/// W_{X,h} f(u) = f(u − x) e^{i(uξ − xξ/2)/h}
pub fn heisenberg_translate(center: PhasePoint, h: f64, f: &WaveFunction) -> Result<WaveFunction> {
    let grid = f.grid();
    if center.x == 0.0 && center.xi == 0.0 {
        return Ok(f.clone());
    }
    if let Some((lo, hi)) = f.support(SUPPORT_REL) {
        let margin = 3.0 * h.sqrt();
        let (min, max) = (grid.x_min() + margin, grid.x_max() - margin);
        let (lo, hi) = (lo + center.x, hi + center.x);
        if lo < min || hi > max {
            return Err(Error::WrapAround { lo, hi, min, max });
        }
    }
    let mut v = f.values().to_vec();
    translate_raw(&grid, h, center, &mut v);
    Ok(WaveFunction::from_raw(v, grid, h))
}

/// W_{X,h} on raw grid samples, without support checks.
pub(crate) fn translate_raw(grid: &PositionGrid, h: f64, center: PhasePoint, v: &mut [C64]) {
    let dx = grid.dx();
    let steps = center.x / dx;
    if (steps - steps.round()).abs() < 1e-12 {
        v.rotate_right(steps.round().rem_euclid(grid.len() as f64) as usize);
    } else {
        fourier::spectral_shift_in_place(v, center.x, dx);
    }
    if center.xi != 0.0 {
        for (i, z) in v.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, (grid.point(i) - 0.5 * center.x) * center.xi / h);
        }
    }
}

/// Σ_{Y,h} f(u) = e^{2i(u−y)η/h} f(2y − u)
pub fn symmetry_apply(y: PhasePoint, h: f64, f: &WaveFunction) -> Result<WaveFunction> {
    let grid = f.grid();
    if let Some((lo, hi)) = f.support(SUPPORT_REL) {
        let (rlo, rhi) = (2.0 * y.x - hi, 2.0 * y.x - lo);
        if rlo < grid.x_min() || rhi > grid.x_max() - grid.dx() {
            return Err(Error::OutOfDomain { lo: rlo, hi: rhi, min: grid.x_min(), max: grid.x_max() });
        }
    }
    let mut v = f.values().to_vec();
    reflect_raw(&grid, h, y, &mut v);
    Ok(WaveFunction::from_raw(v, grid, h))
}

/// Σ_{Y,h} on raw periodic grid samples, without domain checks.
pub(crate) fn reflect_raw(grid: &PositionGrid, h: f64, y: PhasePoint, v: &mut [C64]) {
    let n = grid.len();
    let dx = grid.dx();
    // reflection about x_min is an index reversal; the rest is a shift
    let mut r: Vec<C64> = (0..n).map(|i| v[(n - i) % n]).collect();
    let shift = 2.0 * (y.x - grid.x_min());
    let steps = shift / dx;
    if (steps - steps.round()).abs() < 1e-9 {
        r.rotate_right(steps.round().rem_euclid(n as f64) as usize);
    } else {
        fourier::spectral_shift_in_place(&mut r, shift, dx);
    }
    for (i, z) in r.iter_mut().enumerate() {
        *z *= C64::from_polar(1.0, 2.0 * (grid.point(i) - y.x) * y.xi / h);
    }
    v.copy_from_slice(&r);
}

/// ⟨f, Ψ_X⟩ for every node of `pg`, indexed [(a, b)] = (x_a, ξ_b).
pub fn coherent_transform(f: &WaveFunction, pg: &PhaseGrid) -> Result<DMatrix<C64>> {
    let grid = f.grid();
    let h = f.h();
    pg.check_alias(&grid, h)?;
    let dx = grid.dx();
    let xis = pg.xis();
    let cols: Vec<Result<Vec<C64>>> = crate::par_map(pg.nx, |a| {
        let x = pg.x(a);
        let w = CoherentWindow::new(&grid, h, x)?;
        let fw: Vec<C64> = (0..w.len()).map(|k| f.values()[w.start + k] * w.envelope[k] * dx).collect();
        Ok(xis
            .iter()
            .map(|&xi| {
                // Σ f(u) g(u−x) e^{−i(u − x/2)ξ/h}, with the phase advanced recursively
                let u0 = grid.point(w.start);
                let mut ph = C64::from_polar(1.0, -(u0 - 0.5 * x) * xi / h);
                let step = C64::from_polar(1.0, -dx * xi / h);
                let mut acc = C64::new(0.0, 0.0);
                for z in &fw {
                    acc += z * ph;
                    ph *= step;
                }
                acc
            })
            .collect())
    });
    let mut out = DMatrix::zeros(pg.nx, pg.nxi);
    for (a, col) in cols.into_iter().enumerate() {
        for (b, v) in col?.into_iter().enumerate() {
            out[(a, b)] = v;
        }
    }
    Ok(out)
}

/// Density at the pg border relative to its maximum.
pub(crate) fn border_ratio(d: &DMatrix<f64>) -> f64 {
    let (nx, nxi) = d.shape();
    let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for a in 0..nx {
        edge = edge.max(d[(a, 0)].abs()).max(d[(a, nxi - 1)].abs());
    }
    for b in 0..nxi {
        edge = edge.max(d[(0, b)].abs()).max(d[(nx - 1, b)].abs());
    }
    edge / max
}

/// Relative Husimi density allowed on the border of a phase grid.
pub const COVERAGE_FLOOR: f64 = 1e-6;

/// (2πh)^{-1} Σ_X |⟨f, Ψ_X⟩|² · cell_area
pub fn resolution_of_identity(f: &WaveFunction, pg: &PhaseGrid) -> Result<f64> {
    let h = f.h();
    let amps = coherent_transform(f, pg)?;
    let dens = amps.map(|z| z.norm_sqr());
    let ratio = border_ratio(&dens);
    if ratio > COVERAGE_FLOOR {
        return Err(Error::Coverage(format!("Husimi density on the phase-grid border is {ratio:e} of its peak")));
    }
    Ok(dens.sum() * pg.cell_area() / (2.0 * PI * h))
}
