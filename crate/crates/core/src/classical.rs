//! Hamiltonian point flow for H = ξ² + V(x), the self-consistent Vlasov solver and L¹ metrics.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::phase_space::{border_ratio, PhaseGrid, PhasePoint, COVERAGE_FLOOR};
use crate::quantization::Symbol;

/// Largest step count a single flow call may take.
pub const MAX_STEPS: f64 = 1e6;

/// Smooth even profiles used for V and W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// k·x² + c0
    Harmonic { k: f64, c0: f64 },
    /// a·cos(b·x)
    Cosine { a: f64, b: f64 },
    /// c·exp(−x²/s²)
    Gaussian { c: f64, s: f64 },
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Zero => true,
            Profile::Harmonic { k, c0 } => k.is_finite() && c0.is_finite(),
            Profile::Cosine { a, b } => a.is_finite() && b.is_finite(),
            Profile::Gaussian { c, s } => c.is_finite() && s.is_finite() && s > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad profile {self:?}")))
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// d^order/dx^order for order ≤ 4.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        assert!(order <= 4, "derivative tables stop at order 4");
        match *self {
            Profile::Zero => 0.0,
            Profile::Harmonic { k, c0 } => match order {
                0 => k * x * x + c0,
                1 => 2.0 * k * x,
                2 => 2.0 * k,
                _ => 0.0,
            },
            Profile::Cosine { a, b } => {
                a * b.powi(order as i32) * (b * x + order as f64 * std::f64::consts::FRAC_PI_2).cos()
            }
            Profile::Gaussian { c, s } => {
                let u = x / s;
                let herm = match order {
                    0 => 1.0,
                    1 => 2.0 * u,
                    2 => 4.0 * u * u - 2.0,
                    3 => 8.0 * u.powi(3) - 12.0 * u,
                    _ => 16.0 * u.powi(4) - 48.0 * u * u + 12.0,
                };
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                c * sign * herm * s.powi(-(order as i32)) * (-u * u).exp()
            }
        }
    }

    /// Convolution with a centered Gaussian of variance `var`; stays inside the family.
    pub fn convolved(&self, var: f64) -> Profile {
        match *self {
            Profile::Zero => Profile::Zero,
            Profile::Harmonic { k, c0 } => Profile::Harmonic { k, c0: c0 + k * var },
            Profile::Cosine { a, b } => Profile::Cosine { a: a * (-b * b * var / 2.0).exp(), b },
            Profile::Gaussian { c, s } => {
                let s2 = s * s + 2.0 * var;
                Profile::Gaussian { c: c * s / s2.sqrt(), s: s2.sqrt() }
            }
        }
    }

    /// Wick symbol of the multiplication operator: e^{(h/4)∂²} applied to the profile.
    pub fn wick_smoothed(&self, h: f64) -> Profile {
        self.convolved(h / 2.0)
    }

    /// max |f^(order)| sampled on [lo, hi].
    pub fn sup_abs(&self, order: u32, lo: f64, hi: f64) -> f64 {
        let n = 4000;
        (0..=n)
            .map(|i| self.derivative(lo + (hi - lo) * i as f64 / n as f64, order).abs())
            .fold(0.0, f64::max)
    }
}

/// External potential V and pair interaction W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub v: Profile,
    pub w: Profile,
}

impl PotentialSpec {
    pub const PRESETS: [&'static str; 4] = ["zero", "harmonic", "cosine", "gaussian_W"];

    pub fn new(v: Profile, w: Profile) -> Result<Self> {
        v.validate()?;
        w.validate()?;
        Ok(PotentialSpec { v, w })
    }

    pub fn free() -> Self {
        PotentialSpec { v: Profile::Zero, w: Profile::Zero }
    }

    /// Named presets: zero, harmonic (V = x²), cosine (V = ½cos x), gaussian_W (V = ½cos x, W = ½e^{−x²}).
    pub fn preset(name: &str) -> Result<Self> {
        let cos = Profile::Cosine { a: 0.5, b: 1.0 };
        match name {
            "zero" => Ok(Self::free()),
            "harmonic" => Ok(PotentialSpec { v: Profile::Harmonic { k: 1.0, c0: 0.0 }, w: Profile::Zero }),
            "cosine" => Ok(PotentialSpec { v: cos, w: Profile::Zero }),
            "gaussian_W" => Ok(PotentialSpec { v: cos, w: Profile::Gaussian { c: 0.5, s: 1.0 } }),
            other => Err(Error::Config(format!("unknown potential preset '{other}'"))),
        }
    }

    pub fn is_interacting(&self) -> bool {
        self.w != Profile::Zero
    }
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t = {t}, dt = {dt}")));
    }
    let steps = (t.abs() / dt).ceil();
    if steps > MAX_STEPS {
        return Err(Error::StepOverflow { steps, limit: MAX_STEPS });
    }
    Ok(steps as usize)
}

/// φ_t(X) for H = ξ² + V(x) by Störmer-Verlet with step ≤ dt (q̇ = 2p, ṗ = −V′(q)).
pub fn hamiltonian_flow(x0: PhasePoint, t: f64, v: &Profile, dt: f64) -> Result<PhasePoint> {
    let n = steps_for(t, dt)?;
    if n == 0 {
        return Ok(x0);
    }
    let tau = t / n as f64;
    let (mut q, mut p) = (x0.x, x0.xi);
    for _ in 0..n {
        p -= 0.5 * tau * v.derivative(q, 1);
        q += 2.0 * tau * p;
        p -= 0.5 * tau * v.derivative(q, 1);
    }
    Ok(PhasePoint::new(q, p))
}

/// φ_t applied to many points.
pub fn flow_points(points: &[PhasePoint], t: f64, v: &Profile, dt: f64) -> Result<Vec<PhasePoint>> {
    steps_for(t, dt)?;
    let out = crate::par_map(points.len(), |k| hamiltonian_flow(points[k], t, v, dt));
    out.into_iter().collect()
}

pub fn energy(x: PhasePoint, v: &Profile) -> f64 {
    x.xi * x.xi + v.value(x.x)
}

/// Nonnegative phase-space density sampled on a PhaseGrid, indexed [(a, b)] = (x_a, ξ_b).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    values: DMatrix<f64>,
    pg: PhaseGrid,
}

impl PhaseDistribution {
    pub const NEGATIVE_FLOOR: f64 = -1e-12;
    pub const UNDERSHOOT: f64 = 1e-6;

    pub fn new(values: DMatrix<f64>, pg: PhaseGrid) -> Result<Self> {
        if values.shape() != (pg.nx, pg.nxi) {
            return Err(Error::GridMismatch(format!("{:?} values on a {}x{} phase grid", values.shape(), pg.nx, pg.nxi)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite density".into()));
        }
        let min = values.min();
        if min < Self::NEGATIVE_FLOOR {
            return Err(Error::Undershoot { min, limit: Self::NEGATIVE_FLOOR });
        }
        Ok(PhaseDistribution { values, pg })
    }

    pub fn from_fn(pg: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(pg.nx, pg.nxi, |a, b| f(pg.x(a), pg.xi(b))), pg)
    }

    /// Real part of a symbol that should be a density; imaginary parts above 1e-10 of the peak are rejected.
    pub fn from_symbol(s: &Symbol) -> Result<Self> {
        let peak = s.linf_norm().max(f64::MIN_POSITIVE);
        let im = s.values().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if im > 1e-10 * peak {
            return Err(Error::Invariant(format!("density has imaginary part {im:e}")));
        }
        Self::new(s.real_part(), *s.pg())
    }

    pub(crate) fn from_raw(values: DMatrix<f64>, pg: PhaseGrid) -> Self {
        PhaseDistribution { values, pg }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
    pub fn pg(&self) -> &PhaseGrid {
        &self.pg
    }
    pub fn mass(&self) -> f64 {
        self.values.sum() * self.pg.cell_area()
    }
    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn to_symbol(&self) -> Symbol {
        Symbol::from_raw(self.values.map(|v| C64::new(v, 0.0)), self.pg)
    }

    /// m(x_a) = Σ_b v(x_a, ξ_b) dξ
    pub fn marginal_x(&self) -> Vec<f64> {
        let dxi = self.pg.dxi();
        (0..self.pg.nx).map(|a| self.values.row(a).sum() * dxi).collect()
    }

    pub fn l1_distance(&self, other: &PhaseDistribution) -> Result<f64> {
        if self.pg != other.pg {
            return Err(Error::GridMismatch("distributions live on different phase grids".into()));
        }
        Ok((&self.values - &other.values).abs().sum() * self.pg.cell_area())
    }
}

/// cell_area · Σ|a − b|
pub fn l1_distance(a: &Symbol, b: &Symbol) -> Result<f64> {
    Ok(a.sub(b)?.l1_norm())
}

/// V_cl on the x-nodes of the distribution's grid: V(x) + Σ_j W(x − x_j) m(x_j) dx.
pub fn vcl_profile(v: &PhaseDistribution, pot: &PotentialSpec) -> Vec<f64> {
    field_from_marginal(&v.pg, &v.marginal_x(), pot, 0)
}

/// ∂_x V_cl on the x-nodes.
pub fn vcl_gradient(v: &PhaseDistribution, pot: &PotentialSpec) -> Vec<f64> {
    field_from_marginal(&v.pg, &v.marginal_x(), pot, 1)
}

fn field_from_marginal(pg: &PhaseGrid, m: &[f64], pot: &PotentialSpec, order: u32) -> Vec<f64> {
    let xs = pg.xs();
    let dx = pg.dx();
    xs.iter()
        .map(|&x| {
            let mut acc = pot.v.derivative(x, order);
            if pot.w != Profile::Zero {
                acc += xs.iter().zip(m).map(|(y, my)| pot.w.derivative(x - y, order) * my).sum::<f64>() * dx;
            }
            acc
        })
        .collect()
}

/// V_cl(x, v) as a symbol constant in ξ.
pub fn mean_field_vcl(v: &PhaseDistribution, pot: &PotentialSpec) -> Symbol {
    let f = vcl_profile(v, pot);
    Symbol::from_raw(DMatrix::from_fn(v.pg.nx, v.pg.nxi, |a, _| C64::new(f[a], 0.0)), v.pg)
}

/// x ↦ x + 2ξτ along every ξ-column (spectral shift in x).
pub(crate) fn drift(values: &mut DMatrix<f64>, pg: &PhaseGrid, tau: f64) {
    let dx = pg.dx();
    let cols: Vec<Vec<f64>> = crate::par_map(pg.nxi, |b| {
        let shift = 2.0 * pg.xi(b) * tau;
        let col: Vec<C64> = values.column(b).iter().map(|&v| C64::new(v, 0.0)).collect();
        fourier::spectral_shift(&col, shift, dx).iter().map(|z| z.re).collect()
    });
    for (b, col) in cols.into_iter().enumerate() {
        for (a, v) in col.into_iter().enumerate() {
            values[(a, b)] = v;
        }
    }
}

/// ξ ↦ ξ − ∂_xV_cl(x)·τ along every x-row.
fn kick(values: &mut DMatrix<f64>, pg: &PhaseGrid, grad: &[f64], tau: f64) {
    let dxi = pg.dxi();
    let rows: Vec<Vec<f64>> = crate::par_map(pg.nx, |a| {
        let row: Vec<C64> = values.row(a).iter().map(|&v| C64::new(v, 0.0)).collect();
        fourier::spectral_shift(&row, -grad[a] * tau, dxi).iter().map(|z| z.re).collect()
    });
    for (a, row) in rows.into_iter().enumerate() {
        for (b, v) in row.into_iter().enumerate() {
            values[(a, b)] = v;
        }
    }
}

fn check_step(v: &PhaseDistribution, dt: f64, grad: &[f64]) -> Result<()> {
    let pg = &v.pg;
    let drift_cfl = 2.0 * pg.xi_extent() * dt.abs();
    if drift_cfl > pg.dx() * (1.0 + 1e-12) {
        return Err(Error::Cfl(format!("2|ξ|dt = {drift_cfl} exceeds dx = {}", pg.dx())));
    }
    let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if gmax * dt.abs() > pg.dxi() * (1.0 + 1e-12) {
        return Err(Error::Cfl(format!("|∂V|dt = {} exceeds dξ = {}", gmax * dt.abs(), pg.dxi())));
    }
    Ok(())
}

fn check_undershoot(values: &DMatrix<f64>) -> Result<()> {
    let (min, max) = (values.min(), values.max());
    let limit = -PhaseDistribution::UNDERSHOOT * max.max(0.0);
    if min < limit {
        return Err(Error::Undershoot { min, limit });
    }
    Ok(())
}

/// One Strang step drift(dt/2)·kick(dt)·drift(dt/2). The kick uses the field of the
/// half-drifted distribution, which is the self-consistent midpoint field.
pub fn vlasov_step(v: &PhaseDistribution, dt: f64, pot: &PotentialSpec) -> Result<PhaseDistribution> {
    // mass at the border would wrap around in the periodic drift
    let leak = border_ratio(&v.values);
    if leak > COVERAGE_FLOOR {
        return Err(Error::Leakage { leak, limit: COVERAGE_FLOOR });
    }
    let pg = v.pg;
    let mut w = v.values.clone();
    drift(&mut w, &pg, 0.5 * dt);
    let grad = field_from_marginal(&pg, &PhaseDistribution::from_raw(w.clone(), pg).marginal_x(), pot, 1);
    check_step(v, dt, &grad)?;
    kick(&mut w, &pg, &grad, dt);
    drift(&mut w, &pg, 0.5 * dt);
    check_undershoot(&w)?;
    Ok(PhaseDistribution { values: w, pg })
}

/// The same step under a frozen gradient field ∂_xV on the x-nodes.
pub fn vlasov_step_frozen(v: &PhaseDistribution, dt: f64, grad: &[f64]) -> Result<PhaseDistribution> {
    if grad.len() != v.pg.nx {
        return Err(Error::GridMismatch(format!("{} field values for {} x-nodes", grad.len(), v.pg.nx)));
    }
    check_step(v, dt, grad)?;
    let pg = v.pg;
    let mut w = v.values.clone();
    drift(&mut w, &pg, 0.5 * dt);
    kick(&mut w, &pg, grad, dt);
    drift(&mut w, &pg, 0.5 * dt);
    check_undershoot(&w)?;
    Ok(PhaseDistribution { values: w, pg })
}

/// Evolve to time t in steps of at most dt; returns the state after each step.
pub fn vlasov_evolve(v0: &PhaseDistribution, t: f64, dt: f64, pot: &PotentialSpec) -> Result<Vec<PhaseDistribution>> {
    let n = steps_for(t, dt)?;
    let tau = if n == 0 { 0.0 } else { t / n as f64 };
    let mut out = Vec::with_capacity(n);
    let mut cur = v0.clone();
    for _ in 0..n {
        cur = vlasov_step(&cur, tau, pot)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Characteristic map of one frozen-field step: the point version of drift·kick·drift.
pub fn characteristic_map(x: PhasePoint, dt: f64, grad: impl Fn(f64) -> f64) -> PhasePoint {
    let q = x.x + x.xi * dt;
    let p = x.xi - grad(q) * dt;
    PhasePoint::new(q + p * dt, p)
}

/// Jacobian determinant of a planar map by centered differences.
pub fn jacobian_det(map: impl Fn(PhasePoint) -> PhasePoint, x: PhasePoint, eps: f64) -> f64 {
    let dx = map(x + PhasePoint::new(eps, 0.0)) - map(x - PhasePoint::new(eps, 0.0));
    let dxi = map(x + PhasePoint::new(0.0, eps)) - map(x - PhasePoint::new(0.0, eps));
    (dx.x * dxi.xi - dx.xi * dxi.x) / (4.0 * eps * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erf;
    use std::f64::consts::PI;

    fn gauss2(pg: PhaseGrid, x0: f64, xi0: f64, s: f64) -> PhaseDistribution {
        PhaseDistribution::from_fn(pg, |x, xi| {
            (-((x - x0).powi(2) + (xi - xi0).powi(2)) / (2.0 * s * s)).exp() / (2.0 * PI * s * s)
        })
        .unwrap()
    }

    #[test]
    fn free_flow_is_exact() {
        let x = PhasePoint::new(0.3, -1.2);
        let y = hamiltonian_flow(x, 2.5, &Profile::Zero, 0.1).unwrap();
        assert!((y.x - (0.3 - 2.0 * 2.5 * 1.2)).abs() < 1e-12 && (y.xi + 1.2).abs() < 1e-15);
    }

    #[test]
    fn harmonic_flow_rotates() {
        let v = Profile::Harmonic { k: 1.0, c0: 0.0 };
        let (x, xi, t) = (0.7, -0.4, 1.3);
        let y = hamiltonian_flow(PhasePoint::new(x, xi), t, &v, 1e-4).unwrap();
        let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
        assert!((y.x - (x * c + xi * s)).abs() < 1e-6);
        assert!((y.xi - (xi * c - x * s)).abs() < 1e-6);
    }

    #[test]
    fn flow_conserves_energy_and_reverses() {
        let v = Profile::Cosine { a: 1.0, b: 1.0 };
        let x = PhasePoint::new(0.2, 0.9);
        let y = hamiltonian_flow(x, 10.0, &v, 1e-3).unwrap();
        assert!((energy(y, &v) - energy(x, &v)).abs() < 1e-6);
        let back = hamiltonian_flow(y, -10.0, &v, 1e-3).unwrap();
        assert!((back - x).norm_sqr().sqrt() < 1e-9);
        assert!(matches!(hamiltonian_flow(x, 10.0, &v, 1e-6), Err(Error::StepOverflow { .. })));
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let ps = [
            Profile::Harmonic { k: 0.7, c0: 0.1 },
            Profile::Cosine { a: 0.5, b: 1.3 },
            Profile::Gaussian { c: 0.8, s: 0.9 },
        ];
        let e = 1e-4;
        for p in ps {
            for o in 0..4 {
                for x in [-1.1, 0.0, 0.4, 2.0] {
                    let fd = (p.derivative(x + e, o) - p.derivative(x - e, o)) / (2.0 * e);
                    assert!((fd - p.derivative(x, o + 1)).abs() < 1e-6, "{p:?} order {o} at {x}");
                }
            }
        }
    }

    #[test]
    fn convolution_stays_in_family() {
        let var = 0.3;
        let (g, xs) = crate::quadrature::gauss_hermite(60);
        for p in [
            Profile::Harmonic { k: 0.7, c0: 0.1 },
            Profile::Cosine { a: 0.5, b: 1.3 },
            Profile::Gaussian { c: 0.8, s: 0.9 },
        ] {
            let conv = p.convolved(var);
            for x in [-0.8, 0.0, 1.5] {
                // E f(x + √(2 var) t) under the weight e^{−t²}/√π
                let q: f64 = g.iter().zip(&xs).map(|(t, w)| w * p.value(x + (2.0 * var).sqrt() * t)).sum::<f64>() / PI.sqrt();
                assert!((q - conv.value(x)).abs() < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn presets_and_serde() {
        for name in PotentialSpec::PRESETS {
            PotentialSpec::preset(name).unwrap();
        }
        assert!(PotentialSpec::preset("quartic").is_err());
        let json = r#"{"v": {"kind": "cosine", "a": 0.5, "b": 1.0}, "w": {"kind": "zero"}}"#;
        let p: PotentialSpec = serde_json::from_str(json).unwrap();
        assert_eq!(p, PotentialSpec::preset("cosine").unwrap());
        let bad = r#"{"v": {"kind": "cosine", "a": 0.5, "b": 1.0, "phase": 1}, "w": {"kind": "zero"}}"#;
        assert!(serde_json::from_str::<PotentialSpec>(bad).is_err());
    }

    #[test]
    fn mean_field_oracles() {
        let pg = PhaseGrid::square(8.0, 128).unwrap();
        let v = gauss2(pg, 0.5, 0.3, 0.2);
        let pot0 = PotentialSpec::preset("cosine").unwrap();
        let f = vcl_profile(&v, &pot0);
        for (a, x) in pg.xs().iter().enumerate() {
            assert_eq!(f[a], pot0.v.value(*x));
        }
        let pot = PotentialSpec::preset("gaussian_W").unwrap();
        let f = vcl_profile(&v, &pot);
        // W ⋆ N(0.5, 0.04) in closed form
        let conv = pot.w.convolved(0.04);
        for (a, x) in pg.xs().iter().enumerate() {
            assert!((f[a] - pot.v.value(*x) - conv.value(x - 0.5)).abs() < 1e-4);
        }
        let v2 = gauss2(pg, -1.0, 0.0, 0.5);
        let mix = PhaseDistribution::new(v.values() * 0.3 + v2.values() * 0.7, pg).unwrap();
        let (f1, f2, fm) = (vcl_profile(&v, &pot), vcl_profile(&v2, &pot), vcl_profile(&mix, &pot));
        for (a, x) in pg.xs().iter().enumerate() {
            let vx = pot.v.value(*x);
            assert!(((fm[a] - vx) - 0.3 * (f1[a] - vx) - 0.7 * (f2[a] - vx)).abs() < 1e-10);
        }
        let sym = mean_field_vcl(&v, &pot);
        assert_eq!(sym.at(3, 0), sym.at(3, 7));
    }

    #[test]
    fn free_transport() {
        let pg = PhaseGrid::new(-10.0, 10.0, -4.0, 4.0, 256, 64).unwrap();
        let v0 = gauss2(pg, -1.0, 0.5, 0.4);
        let dt = 0.005;
        let mut v = v0.clone();
        for _ in 0..200 {
            v = vlasov_step(&v, dt, &PotentialSpec::free()).unwrap();
        }
        let exact = PhaseDistribution::from_fn(pg, |x, xi| {
            (-((x - 2.0 * xi - (-1.0)).powi(2) + (xi - 0.5).powi(2)) / 0.32).exp() / (2.0 * PI * 0.16)
        })
        .unwrap();
        let e = (v.values() - exact.values()).amax();
        assert!(e < 1e-4, "{e}");
        assert!((v.mass() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn harmonic_rotation_returns() {
        let pg = PhaseGrid::new(-4.0, 4.0, -4.0, 4.0, 128, 128).unwrap();
        let v0 = gauss2(pg, 1.0, 0.0, 0.35);
        let pot = PotentialSpec::preset("harmonic").unwrap();
        let n = 500;
        let dt = PI / n as f64;
        let mut v = v0.clone();
        for _ in 0..n {
            v = vlasov_step(&v, dt, &pot).unwrap();
            assert!((v.mass() - 1.0).abs() < 1e-4);
        }
        assert!(v.l1_distance(&v0).unwrap() < 1e-2);
    }

    #[test]
    fn guards() {
        let pg = PhaseGrid::new(-4.0, 4.0, -4.0, 4.0, 128, 128).unwrap();
        let v0 = gauss2(pg, 0.0, 0.0, 0.35);
        assert!(matches!(vlasov_step(&v0, 0.1, &PotentialSpec::free()), Err(Error::Cfl(_))));
        let wide = gauss2(pg, 0.0, 0.0, 2.0);
        assert!(matches!(vlasov_step(&wide, 0.001, &PotentialSpec::free()), Err(Error::Leakage { .. })));
        let neg = DMatrix::from_element(128, 128, -1.0);
        assert!(PhaseDistribution::new(neg, pg).is_err());
    }

    #[test]
    fn frozen_step_reverses_and_is_symplectic() {
        let pg = PhaseGrid::new(-8.0, 8.0, -4.0, 4.0, 128, 128).unwrap();
        let v0 = gauss2(pg, 0.5, 0.2, 0.5);
        let pot = PotentialSpec::preset("cosine").unwrap();
        let grad: Vec<f64> = pg.xs().iter().map(|x| pot.v.derivative(*x, 1)).collect();
        let dt = 0.01;
        let fwd = vlasov_step_frozen(&v0, dt, &grad).unwrap();
        let back = vlasov_step_frozen(&fwd, -dt, &grad).unwrap();
        assert!((back.values() - v0.values()).amax() < 1e-10);
        for x in [PhasePoint::new(0.1, 0.5), PhasePoint::new(-2.0, 1.3)] {
            let det = jacobian_det(|p| characteristic_map(p, dt, |q| pot.v.derivative(q, 1)), x, 1e-5);
            assert!((det - 1.0).abs() < 10.0 * dt.powi(3));
        }
    }

    #[test]
    fn l1_oracles() {
        let pg = PhaseGrid::square(8.0, 256).unwrap();
        let a = gauss2(pg, -4.0, 0.0, 0.3).to_symbol();
        let b = gauss2(pg, 4.0, 0.0, 0.3).to_symbol();
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        assert!((l1_distance(&a, &b).unwrap() - 2.0).abs() < 1e-6);
        let (s, d) = (0.6, 0.9);
        let c = gauss2(pg, 0.0, 0.0, s).to_symbol();
        let e = gauss2(pg, d, 0.0, s).to_symbol();
        let exact = 2.0 * erf(d / (2.0 * 2f64.sqrt() * s));
        assert!((l1_distance(&c, &e).unwrap() - exact).abs() < 1e-4);
        let other = Symbol::constant(PhaseGrid::square(7.0, 256).unwrap(), C64::new(0.0, 0.0));
        assert!(l1_distance(&a, &other).is_err());
    }
}
