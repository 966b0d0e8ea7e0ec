//! Invariant suites at reduced sizes, shared by `selftest` and the acceptance tests.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::Check;
use crate::classical::{flow_points, hamiltonian_flow, vlasov_step, PhaseDistribution, PotentialSpec, Profile};
use crate::error::Result;
use crate::operator::{DensityState, QuantumOperator};
use crate::phase_space::{coherent_overlap, coherent_state, resolution_of_identity, symmetry_apply, PhaseGrid, PhasePoint, PositionGrid, WaveFunction, ALIAS_FRACTION};
use crate::quantization::{heat_smooth, smooth_th, weyl_quantize_fn, weyl_symbol, wick_symbol_direct, wick_symbol_via_weyl, Symbol};
use crate::quantum::{schrodinger_step, tdhf_step, MeanFieldState};
use crate::wick_calculus::wick_compose_expand;

pub const SWEEP: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// [−L, L] with enough points to resolve momenta up to `xi_window`.
fn grid_for(h: f64, half_width: f64, xi_window: f64) -> Result<PositionGrid> {
    let need = (2.0 * half_width * xi_window / (ALIAS_FRACTION * PI * h)).ceil() as usize;
    PositionGrid::new(-half_width, half_width, need.max(256).next_power_of_two())
}

fn rel(a: &Symbol, b: &Symbol) -> Result<f64> {
    Ok(a.max_diff(b)? / a.linf_norm().max(b.linf_norm()))
}

fn gauss2(x: f64, xi: f64, c: PhasePoint, var: f64) -> f64 {
    (-((x - c.x).powi(2) + (xi - c.xi).powi(2)) / var).exp()
}

/// ∫ e^{−(s−a)²/p − (s−b)²/q} ds
fn gauss_overlap_1d(a: f64, b: f64, p: f64, q: f64) -> f64 {
    (PI * p * q / (p + q)).sqrt() * (-(a - b).powi(2) / (p + q)).exp()
}

/// Largest value; NaN if any value is not finite.
fn worst(name: &str, values: impl IntoIterator<Item = f64>, hi: f64) -> Check {
    let v = values.into_iter().fold(0.0f64, |m, v| if v.is_finite() && m.is_finite() { m.max(v) } else { f64::NAN });
    Check::at_most(name, v, hi)
}

/// Coherent-state overlaps, the Wick symbol of Σ_Y, the resolution of identity,
/// the two Wick routes and the trace pairing, over the h sweep.
pub fn symbol_calculus() -> Result<Vec<Check>> {
    let pairs = [
        (PhasePoint::new(0.0, 0.0), PhasePoint::new(0.3, 0.0)),
        (PhasePoint::new(0.3, -0.4), PhasePoint::new(-0.2, 0.1)),
        (PhasePoint::new(-0.5, 0.25), PhasePoint::new(-0.1, 0.45)),
    ];
    let (mut overlap, mut sigma, mut resolution, mut routes, mut pairing) = (vec![], vec![], vec![], vec![], vec![]);
    for h in SWEEP {
        let g = grid_for(h, 8.0, 6.0)?;
        for &(x, y) in &pairs {
            let grid_inner = coherent_state(x, h, &g)?.inner(&coherent_state(y, h, &g)?)?;
            overlap.push((grid_inner - coherent_overlap(x, y, h)).norm());
            let psi = coherent_state(x, h, &g)?;
            let v = symmetry_apply(y, h, &psi)?.inner(&psi)?;
            sigma.push((v - (-(x - y).norm_sqr() / h).exp()).norm());
        }

        let gr = grid_for(h, 16.0, 5.0)?;
        let pg = PhaseGrid::new(-8.0, 10.0, -5.0, 5.0, 128, 96)?;
        let cat = coherent_state(PhasePoint::ORIGIN, h, &gr)?
            .add(&coherent_state(PhasePoint::new(2.0, 0.5), h, &gr)?)?
            .normalized()?;
        resolution.push((resolution_of_identity(&cat, &pg)? - 1.0).abs());

        let z = PhasePoint::new(0.3, -0.2);
        let gw = grid_for(h, 9.0, 5.0)?;
        let a = weyl_quantize_fn(gw, h, |x, xi| C64::new(gauss2(x, xi, PhasePoint::new(-0.2, 0.3), 0.8), 0.0))?
            .add(&QuantumOperator::projector(&coherent_state(z, h, &gw)?))?;
        let wpg = PhaseGrid::square(3.5, 40)?;
        routes.push(rel(&wick_symbol_direct(&a, &wpg)?, &wick_symbol_via_weyl(&a, &wpg)?)?);

        let (cf, cg, p, q) = (PhasePoint::new(0.3, -0.2), PhasePoint::new(-0.4, 0.5), 0.8, 1.2);
        let f = weyl_quantize_fn(g, h, |x, xi| C64::new(gauss2(x, xi, cf, p), 0.0))?;
        let gg = weyl_quantize_fn(g, h, |x, xi| C64::new(gauss2(x, xi, cg, q), 0.0))?;
        let tr = f.compose(&gg)?.trace().re;
        let expect = gauss_overlap_1d(cf.x, cg.x, p, q) * gauss_overlap_1d(cf.xi, cg.xi, p, q) / (2.0 * PI * h);
        pairing.push((tr - expect).abs() / expect);
    }
    Ok(vec![
        worst("coherent_overlap", overlap, 1e-6),
        worst("symmetry_wick_symbol", sigma, 1e-6),
        worst("resolution_of_identity", resolution, 1e-2),
        worst("wick_cross_route", routes, 1e-4),
        worst("trace_pairing", pairing, 1e-4),
    ])
}

/// Contraction of T_h, its Wick and Weyl identities, and the commutator constants
/// ‖A − T_hA‖/(√h·I_h(A)) for coherent projectors over the h sweep.
pub fn smoothing_operator() -> Result<Vec<Check>> {
    let (mut contraction, mut heat, mut weyl) = (vec![], vec![], vec![]);
    let (mut c_op, mut c_tr) = (vec![], vec![]);
    let z = PhasePoint::new(0.3, -0.2);
    for h in SWEEP {
        let g = grid_for(h, 8.0, z.xi.abs() + 8.0 * h.sqrt())?;
        let proj = QuantumOperator::projector(&coherent_state(z, h, &g)?);
        let t = smooth_th(&proj);
        let d = proj.sub(&t)?;
        let r = proj.regularity();
        c_op.push(d.op_norm() / (h.sqrt() * r.i_inf));
        c_tr.push(d.trace_norm() / (h.sqrt() * r.i_tr));

        let gs = grid_for(h, 10.5, 5.0)?;
        let a = weyl_quantize_fn(gs, h, |x, xi| C64::new(gauss2(x, xi, PhasePoint::new(0.1, 0.2), 0.5) * (0.7 * x).cos(), 0.0))?
            .add(&QuantumOperator::projector(&coherent_state(z, h, &gs)?))?;
        let ta = smooth_th(&a);
        contraction.push(ta.op_norm() - a.op_norm());
        contraction.push(ta.trace_norm() - a.trace_norm());
        let pg = PhaseGrid::square(5.0, 64)?;
        let wick = wick_symbol_direct(&a, &pg)?;
        heat.push(rel(&wick_symbol_direct(&ta, &pg)?, &heat_smooth(&wick, h)?)?);
        weyl.push(rel(&weyl_symbol(&ta, &pg)?, &wick)?);
    }
    let spread = |c: &[f64]| {
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        c.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0f64, |m, v| if v.is_finite() { m.max(v) } else { f64::NAN })
    };
    // the proof's constant: (πh)^{-1}∫e^{−|X|²/h}|x| dX = √(h/π)
    let c_max = PI.sqrt().recip();
    Ok(vec![
        worst("contraction_excess", contraction, 1e-8),
        worst("wick_of_smoothed_is_heat_flow", heat, 1e-4),
        worst("weyl_of_smoothed_is_wick", weyl, 1e-4),
        Check::at_most("commutator_constant_op_spread", spread(&c_op), 0.25),
        Check::at_most("commutator_constant_tr_spread", spread(&c_tr), 0.25),
        worst("commutator_constant_op", c_op.iter().copied(), c_max),
        worst("commutator_constant_tr", c_tr.iter().copied(), c_max),
        // for a coherent projector both ratios equal 1/(3√2) at every h
        worst("projector_constant_closed_form", c_op.iter().chain(&c_tr).map(|c| (c - 2f64.sqrt() / 6.0).abs()), 1e-6),
    ])
}

fn orthonormal(states: Vec<WaveFunction>) -> Result<Vec<WaveFunction>> {
    let mut out: Vec<WaveFunction> = Vec::new();
    for mut f in states {
        for g in &out {
            let c = f.inner(g)?;
            f = f.add(&g.scaled(-c))?;
        }
        out.push(f.normalized()?);
    }
    Ok(out)
}

fn rank3_orbitals(g: &PositionGrid, h: f64) -> Result<(Vec<WaveFunction>, Vec<f64>)> {
    let centers = [PhasePoint::new(-1.0, 0.3), PhasePoint::new(0.5, -0.4), PhasePoint::new(1.2, 0.6)];
    let states = centers.iter().map(|&c| coherent_state(c, h, g)).collect::<Result<Vec<_>>>()?;
    Ok((orthonormal(states)?, vec![0.5, 0.3, 0.2]))
}

fn trace_gap(a: &QuantumOperator, b: &QuantumOperator) -> Result<f64> {
    Ok(a.sub(b)?.trace_norm())
}

fn evolve_orbitals(g: &PositionGrid, h: f64, pot: &PotentialSpec, dt: f64, steps: usize) -> Result<QuantumOperator> {
    let (orb, occ) = rank3_orbitals(g, h)?;
    let mut st = MeanFieldState::from_orbitals(orb, occ, pot.clone())?;
    for _ in 0..steps {
        st = tdhf_step(&st, dt)?;
    }
    Ok(st.operator())
}

/// Step-by-step invariants of the TDHF propagator in both representations, the
/// W = 0 reduction, Schrödinger unitarity and the dt-halving defect ratio.
pub fn propagator_hygiene() -> Result<Vec<Check>> {
    let h = 0.2;
    let g = PositionGrid::standard();
    let pot = PotentialSpec::preset("gaussian_W")?;
    let (orb, occ) = rank3_orbitals(&g, h)?;
    let rho = DensityState::from_orbitals(&orb, &occ)?;
    let mut dense = MeanFieldState::dense(rho, pot.clone());
    let mut low = MeanFieldState::from_orbitals(orb.clone(), occ.clone(), pot.clone())?;
    let (dt, steps) = (0.02, 25);
    let (mut herm, mut trace, mut min_eig, mut spectrum, mut paths) = (vec![], vec![], vec![], vec![], vec![]);
    let mut invariants_ok = true;
    for _ in 0..steps {
        dense = tdhf_step(&dense, dt)?;
        low = tdhf_step(&low, dt)?;
        invariants_ok &= dense.check_invariants().is_ok() && low.check_invariants().is_ok();
        let op = dense.operator();
        herm.push(op.hermitian_defect());
        trace.push((op.trace() - 1.0).norm());
        let eig = op.eigenvalues();
        min_eig.push(-eig.last().copied().unwrap_or(0.0));
        let spec_err = eig.iter().enumerate().map(|(k, &e)| (e - occ.get(k).copied().unwrap_or(0.0)).abs()).fold(0.0f64, f64::max);
        spectrum.push(spec_err);
        paths.push(trace_gap(&op, &low.operator())?);
    }

    // Schrödinger unitarity and the W = 0 reduction
    let free_w = PotentialSpec::new(pot.v.clone(), Profile::Zero)?;
    let v: Vec<f64> = g.points().iter().map(|&x| free_w.v.value(x)).collect();
    let mut lin = orb.clone();
    let mut norm_drift: Vec<f64> = vec![];
    let mut st = MeanFieldState::from_orbitals(orb.clone(), occ.clone(), free_w)?;
    for _ in 0..steps {
        st = tdhf_step(&st, dt)?;
        for f in lin.iter_mut() {
            *f = schrodinger_step(f, dt, &v)?;
            norm_drift.push((f.norm() - 1.0).abs());
        }
    }
    let lin_rho = DensityState::from_orbitals(&lin, &occ)?;
    let reduction = trace_gap(&st.operator(), lin_rho.operator())?;

    // dt-halving against a reference at a quarter of the finer step
    let t_end = 1.0;
    let coarse = 0.05;
    let run = |dt: f64| evolve_orbitals(&g, h, &pot, dt, (t_end / dt).round() as usize);
    let reference = run(coarse / 8.0)?;
    let e1 = trace_gap(&run(coarse)?, &reference)?;
    let e2 = trace_gap(&run(coarse / 2.0)?, &reference)?;

    Ok(vec![
        Check::holds("per_step_invariants", invariants_ok),
        worst("hermitian_defect", herm, 1e-10),
        worst("trace_defect", trace, 1e-10),
        worst("negative_eigenvalue", min_eig, 1e-8),
        worst("occupation_spectrum", spectrum, 1e-6),
        worst("orbital_vs_dense", paths, 1e-8),
        worst("schrodinger_norm", norm_drift, 1e-10),
        Check::at_most("w0_reduction_trace_norm", reduction, 1e-6),
        Check::within("dt_halving_ratio", e1 / e2, 3.5, 4.5),
    ])
}

/// Exactness of the order-3 expansion on quadratic symbols, plus cheap classical invariants.
pub fn wick_identities() -> Result<Vec<Check>> {
    let h = 0.2;
    let g = grid_for(h, 8.0, 6.0)?;
    let pg = PhaseGrid::square(2.5, 32)?;
    let z = PhasePoint::new(0.25, -0.25);
    let b = QuantumOperator::projector(&coherent_state(z, h, &g)?);
    let q = weyl_quantize_fn(g, h, |x, xi| C64::new(x * x + xi * xi - 0.5 * x * xi, 0.0))?;
    let exact = wick_symbol_direct(&q.compose(&b)?, &pg)?;
    let expand = wick_compose_expand(&q, &b, 3, &pg)?;
    let poly = exact.max_diff(&expand)? / exact.linf_norm();

    // classical side: energy along the flow and Vlasov mass
    let pot = PotentialSpec::preset("cosine")?;
    let x0 = PhasePoint::new(0.4, 0.7);
    let x1 = hamiltonian_flow(x0, 1.0, &pot.v, 1e-4)?;
    let energy = |p: PhasePoint| p.xi * p.xi + pot.v.value(p.x);
    let back = flow_points(&[x1], -1.0, &pot.v, 1e-4)?[0];
    let vpg = PhaseGrid::square(6.0, 64)?;
    let mut u = PhaseDistribution::from_fn(vpg, |x, xi| gauss2(x, xi, PhasePoint::ORIGIN, 1.0) / PI)?;
    let m0 = u.mass();
    for _ in 0..20 {
        u = vlasov_step(&u, 0.01, &PotentialSpec::preset("gaussian_W")?)?;
    }
    Ok(vec![
        Check::at_most("polynomial_expansion_defect", poly, 1e-6),
        Check::at_most("flow_energy_drift", (energy(x1) - energy(x0)).abs(), 1e-8),
        Check::at_most("flow_reversibility", (back - x0).norm_sqr().sqrt(), 1e-8),
        Check::at_most("vlasov_mass_drift", (u.mass() - m0).abs(), 1e-10),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    /// (suite, checks) in run order.
    pub suites: Vec<(String, Vec<Check>)>,
    pub pass: bool,
}

impl SelftestReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::error::Error::Io(e.to_string()))
    }

    pub fn lines(&self) -> Vec<String> {
        self.suites.iter().flat_map(|(s, cs)| cs.iter().map(move |c| format!("[{s}] {}", c.line()))).collect()
    }
}

/// Every invariant suite at reduced size.
pub fn selftest() -> Result<SelftestReport> {
    let suites: Vec<(&str, fn() -> Result<Vec<Check>>)> = vec![
        ("symbol_calculus", symbol_calculus),
        ("smoothing_operator", smoothing_operator),
        ("propagator_hygiene", propagator_hygiene),
        ("wick_identities", wick_identities),
    ];
    let mut out = Vec::new();
    for (name, f) in suites {
        out.push((name.to_string(), f()?));
    }
    let pass = out.iter().all(|(_, cs)| cs.iter().all(|c| c.pass));
    Ok(SelftestReport { suites: out, pass })
}
