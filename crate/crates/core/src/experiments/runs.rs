
use num_complex::Complex64 as C64;
use statrs::function::erf::erf;

use super::{config_hash, fit_slope, with_jobs, Check, ExperimentConfig, Metadata, NamedFit, Recorder, Row, Scenario, SweepResult};
use crate::classical::{drift, flow_points, vlasov_step, PhaseDistribution, PotentialSpec, Profile};
use crate::error::{Error, Result};
use crate::fourier;
use crate::operator::QuantumOperator;
use crate::phase_space::{coherent_state, PhaseGrid, PhasePoint, PositionGrid};
use crate::quantization::{counterexample_build, weyl_quantize_fn, wick_symbol_direct, Symbol};
use crate::quantum::{broad_gaussian_state, husimi_density, tdhf_step, MeanFieldState, SplitPropagator};
use crate::wick_calculus::{composition_remainder_op, pde_residual, truncation_remainder, wick_compose_expand};

/// Validate, run the scenario, attach metadata.
pub fn run(cfg: &ExperimentConfig) -> Result<SweepResult> {
    match cfg.scenario {
        Scenario::Ehrenfest => run_ehrenfest(cfg),
        Scenario::TdhfVlasov => run_tdhf_vlasov(cfg),
        Scenario::EhrenfestTime => run_ehrenfest_time(cfg),
        Scenario::Counterexample => run_counterexample(cfg),
        Scenario::Composition => run_composition(cfg),
    }
}

fn metadata(cfg: &ExperimentConfig, guards: Vec<(String, f64)>) -> Metadata {
    Metadata {
        scenario: cfg.scenario,
        config_hash: config_hash(cfg),
        code_version: env!("CARGO_PKG_VERSION").into(),
        guards,
    }
}

/// Independent h cells, concatenated in h_list order.
fn sweep(cfg: &ExperimentConfig, cell: impl Fn(f64) -> Result<Vec<Row>> + Sync + Send) -> Result<Vec<Row>> {
    let hs = cfg.h_list.clone();
    let cells: Vec<Result<Vec<Row>>> = with_jobs(cfg.jobs, || crate::par_map(hs.len(), |k| cell(hs[k])));
    let mut rows = Vec::new();
    for c in cells {
        rows.extend(c?);
    }
    Ok(rows)
}

fn points_at(rows: &[Row], metric: &str, t: f64) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.metric == metric && r.t == t).map(|r| (r.h, r.value)).collect()
}

fn slope_checks(name: &str, fit: &super::SlopeFit, cfg: &ExperimentConfig) -> Vec<Check> {
    vec![
        Check::at_least(format!("{name}_slope"), fit.slope, cfg.tolerances.slope_min),
        Check::at_least(format!("{name}_r2"), fit.r2, cfg.tolerances.r2_min),
    ]
}

fn ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn sample_potential(grid: &PositionGrid, v: &Profile) -> Vec<f64> {
    grid.points().iter().map(|&x| v.value(x)).collect()
}

// ---------------------------------------------------------------- Ehrenfest

/// Fixed observable symbol F = exp(−|X − X₀|²/2) and its Wick symbol e^{hΔ/4}F, which is
/// again a Gaussian with the variance raised by h/2.
pub fn ehrenfest_observable(center: PhasePoint, h: f64) -> (impl Fn(f64, f64) -> f64 + Sync, impl Fn(f64, f64) -> f64 + Sync) {
    let r2 = move |x: f64, xi: f64| (x - center.x).powi(2) + (xi - center.xi).powi(2);
    let f = move |x: f64, xi: f64| (-r2(x, xi) / 2.0).exp();
    let s2 = 1.0 + h / 2.0;
    let w = move |x: f64, xi: f64| (-r2(x, xi) / (2.0 * s2)).exp() / s2;
    (f, w)
}

/// sup over the window of |σ^wick(A_h(t)) − σ^wick(A)∘φ_t| for A = Op_h(F).
pub fn run_ehrenfest(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let guards = cfg.validate()?;
    let pot = cfg.potential.resolve()?;
    if pot.is_interacting() {
        return Err(Error::Config("the Ehrenfest scenario is linear; W must be zero".into()));
    }
    let pg = cfg.grid.phase_grid()?;
    let times = cfg.times();
    let (per, tau) = cfg.stepping();
    let center = cfg.center_point();
    let nodes: Vec<PhasePoint> = (0..pg.nx).flat_map(|a| (0..pg.nxi).map(move |b| pg.point(a, b))).collect();
    let flow_dt = tau.min(1e-3);
    let rows = sweep(cfg, |h| {
        let mut rec = Recorder::new(h);
        let g = cfg.grid.position_grid(h)?;
        let (f, wick) = ehrenfest_observable(center, h);
        let a0 = weyl_quantize_fn(g, h, |x, xi| C64::new(f(x, xi), 0.0))?;
        let i_inf = a0.regularity().i_inf;
        rec.push(0.0, "i_inf", i_inf)?;
        // U(−τ) K U(τ): the Heisenberg picture
        let prop = SplitPropagator::new(&g, h, -tau, &sample_potential(&g, &pot.v))?;
        let mut k = a0.into_kernel();
        for (step, &t) in times.iter().enumerate() {
            if step > 0 {
                for _ in 0..per {
                    k = prop.conjugate(&k);
                }
            }
            let at = QuantumOperator::from_raw(k.clone(), g, h);
            let s = wick_symbol_direct(&at, &pg)?;
            let moved = flow_points(&nodes, t, &pot.v, flow_dt)?;
            let mut err = 0.0f64;
            for (idx, p) in moved.iter().enumerate() {
                let (a, b) = (idx / pg.nxi, idx % pg.nxi);
                err = err.max((s.at(a, b) - wick(p.x, p.xi)).norm());
            }
            rec.push(t, "err", err)?;
            rec.push(t, "err_scaled", err / (h.sqrt() * i_inf))?;
            if step + 1 == times.len() {
                rec.push(t, "kernel_edge", at.edge_ratio(0.0))?;
            }
        }
        Ok(rec.into_rows())
    })?;
    let t_end = *times.last().unwrap_or(&0.0);
    let mut checks = Vec::new();
    for (h, e) in points_at(&rows, "err", 0.0) {
        checks.push(Check::at_most(format!("initial_err@h={h}"), e, 1e-8));
    }
    let fit = fit_slope(&points_at(&rows, "err", t_end))?;
    checks.extend(slope_checks("err", &fit, cfg));
    let scaled: Vec<f64> = points_at(&rows, "err_scaled", t_end).iter().map(|p| p.1).collect();
    checks.push(Check::at_most("err_scaled_ratio", ratio(&scaled), cfg.tolerances.scaled_ratio_max));
    Ok(SweepResult { metadata: metadata(cfg, guards), rows, fits: vec![NamedFit { name: "err".into(), fit }], checks })
}

// ---------------------------------------------------------------- TDHF vs Vlasov

/// ‖u_h(t) − v_h(t)‖_{L¹} with u from TDHF and v from the Vlasov solver started at u_h(0).
pub fn run_tdhf_vlasov(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let guards = cfg.validate()?;
    let pot = cfg.potential.resolve()?;
    let pg = cfg.grid.phase_grid()?;
    let times = cfg.times();
    let (per, tau) = cfg.stepping();
    let rows = sweep(cfg, |h| {
        let mut rec = Recorder::new(h);
        let g = cfg.grid.position_grid(h)?;
        let rho = broad_gaussian_state(g, h)?;
        rec.push(0.0, "i_tr", rho.operator().regularity().i_tr)?;
        let mut state = MeanFieldState::dense(rho, pot.clone());
        let e0 = state.energy();
        let mut v = husimi_density(&state.operator(), &pg)?;
        for (step, &t) in times.iter().enumerate() {
            if step > 0 {
                for _ in 0..per {
                    state = tdhf_step(&state, tau)?;
                    v = vlasov_step(&v, tau, &pot)?;
                }
            }
            let u = husimi_density(&state.operator(), &pg)?;
            rec.push(t, "l1_distance", u.l1_distance(&v)?)?;
            rec.push(t, "u_mass", u.mass())?;
            rec.push(t, "v_mass", v.mass())?;
            rec.push(t, "energy_drift", state.energy() - e0)?;
        }
        Ok(rec.into_rows())
    })?;
    let t_end = *times.last().unwrap_or(&0.0);
    let mut checks = Vec::new();
    for (h, d) in points_at(&rows, "l1_distance", 0.0) {
        checks.push(Check::at_most(format!("initial_distance@h={h}"), d, cfg.tolerances.initial_gap));
    }
    let fit = fit_slope(&points_at(&rows, "l1_distance", t_end))?;
    checks.extend(slope_checks("l1_distance", &fit, cfg));
    let itr: Vec<f64> = points_at(&rows, "i_tr", 0.0).iter().map(|p| p.1).collect();
    checks.push(Check::at_most("i_tr_ratio", ratio(&itr), cfg.tolerances.scaled_ratio_max));
    Ok(SweepResult { metadata: metadata(cfg, guards), rows, fits: vec![NamedFit { name: "l1_distance".into(), fit }], checks })
}

// ---------------------------------------------------------------- Ehrenfest time

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / 2f64.sqrt()))
}

/// ∫|e^{ht²Δ}U₀ − U₀| for U₀ a centred Gaussian of variance h (the x-marginal of the
/// Husimi density of a coherent state); the heat flow raises the variance to h(1 + 2t²).
pub fn heat_marginal_oracle(h: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let (s1, s2) = (h.sqrt(), (h * (1.0 + 2.0 * t * t)).sqrt());
    let c = (2.0 * s1 * s1 * s2 * s2 * (s2 / s1).ln() / (s2 * s2 - s1 * s1)).sqrt();
    4.0 * (normal_cdf(c / s1) - normal_cdf(c / s2))
}

fn l1_1d(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}

/// e^{sΔ} on a periodic 1-D sample.
fn heat_1d(v: &[f64], dx: f64, s: f64) -> Vec<f64> {
    let k = fourier::wavenumbers(v.len(), dx);
    let mut buf: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    fourier::fft(&mut buf);
    for (z, kk) in buf.iter_mut().zip(&k) {
        *z *= (-s * kk * kk).exp();
    }
    fourier::ifft(&mut buf);
    buf.iter().map(|z| z.re).collect()
}

/// U_h(x, t) = ∫u(x + 2tξ, ξ, t)dξ: undo the free shear, then integrate out ξ.
fn pulled_back_marginal(u: &PhaseDistribution, t: f64) -> Vec<f64> {
    let pg = *u.pg();
    let mut w = u.values().clone();
    drift(&mut w, &pg, -t);
    PhaseDistribution::from_raw(w, pg).marginal_x()
}

/// Free evolution of a coherent state: quantum vs classical distance against t.
pub fn run_ehrenfest_time(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let guards = cfg.validate()?;
    let pot = cfg.potential.resolve()?;
    let pg = cfg.grid.phase_grid()?;
    let (per, tau) = cfg.stepping();
    let center = cfg.center_point();
    let rows = sweep(cfg, |h| {
        let mut rec = Recorder::new(h);
        let cap = cfg.spread_cap(h);
        let times: Vec<f64> = cfg.times().into_iter().filter(|&t| t <= cap + 1e-12).collect();
        let g = cfg.grid.position_grid(h)?;
        let psi = coherent_state(center, h, &g)?;
        let mut state = MeanFieldState::from_orbitals(vec![psi], vec![1.0], pot.clone())?;
        let u0 = husimi_density(&state.operator(), &pg)?;
        let m0 = u0.marginal_x();
        let mut v = u0.clone();
        for (step, &t) in times.iter().enumerate() {
            if step > 0 {
                for _ in 0..per {
                    state = tdhf_step(&state, tau)?;
                    v = vlasov_step(&v, tau, &pot)?;
                }
            }
            let u = husimi_density(&state.operator(), &pg)?;
            rec.push(t, "l1_distance", u.l1_distance(&v)?)?;
            let ut = pulled_back_marginal(&u, t);
            rec.push(t, "marginal_bound", l1_1d(&ut, &m0, pg.dx()))?;
            rec.push(t, "heat_oracle", heat_marginal_oracle(h, t))?;
            rec.push(t, "heat_identity_gap", l1_1d(&ut, &heat_1d(&m0, pg.dx(), h * t * t), pg.dx()))?;
        }
        Ok(rec.into_rows())
    })?;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    for &h in &cfg.h_list {
        let series = |m: &str| -> Vec<(f64, f64)> { rows.iter().filter(|r| r.h == h && r.metric == m).map(|r| (r.t, r.value)).collect() };
        let dist = series("l1_distance");
        let bound = series("marginal_bound");
        let oracle = series("heat_oracle");
        let gap = series("heat_identity_gap");
        if let Some(&(_, d0)) = dist.first() {
            checks.push(Check::at_most(format!("initial_distance@h={h}"), d0, tol.initial_gap));
        }
        for &(t, g) in gap.iter().filter(|p| p.0 > 0.0 && p.0 <= 2.0) {
            checks.push(Check::at_most(format!("heat_identity_gap@h={h},t={t}"), g, tol.heat_identity_gap));
        }
        let increasing = dist.windows(2).all(|w| w[1].1 > w[0].1);
        checks.push(Check::holds(format!("distance_increasing@h={h}"), increasing));
        if let Some(&(t, d)) = dist.last() {
            checks.push(Check::at_least(format!("final_distance@h={h},t={t}"), d, tol.final_distance_min));
        }
        let worst = bound
            .iter()
            .zip(&oracle)
            .filter(|(b, _)| b.0 > 0.0)
            .map(|(b, o)| (b.1 / o.1 - 1.0).abs())
            .fold(0.0f64, f64::max);
        checks.push(Check::at_most(format!("oracle_match@h={h}"), worst, tol.oracle_rel));
        let below = dist.iter().zip(&bound).all(|(d, b)| d.1 >= b.1 - 1e-6);
        checks.push(Check::holds(format!("distance_above_marginal_bound@h={h}"), below));
    }
    Ok(SweepResult { metadata: metadata(cfg, guards), rows, fits: vec![], checks })
}

// ---------------------------------------------------------------- counter-example

/// Trace-norm convergence and the ball masses of p and of σ^wick(P).
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let guards = cfg.validate()?;
    let h = 1.0;
    let g = cfg.grid.position_grid(h)?;
    let mut rec = Recorder::new(h);
    let res = with_jobs(cfg.jobs, || counterexample_build(cfg.alpha, &cfg.quadrature, g, &cfg.radii))?;
    let d = &res.diagnostics;
    rec.push(0.0, "trace_norm", d.trace_norm)?;
    rec.push(0.0, "trace_norm_doubled", d.trace_norm_doubled)?;
    rec.push(0.0, "doubling_change", d.doubling_change)?;
    for &(r, m) in &d.p_ball_mass {
        rec.push(0.0, &format!("p_ball_mass[R={r}]"), m)?;
    }
    for &(r, m) in &d.wick_ball_mass {
        rec.push(0.0, &format!("wick_ball_mass[R={r}]"), m)?;
    }
    let small: Vec<(f64, f64)> = d.node_trace_norms.iter().cloned().filter(|&(l, _)| (0.01..=0.2).contains(&l)).collect();
    for &(l, n) in &small {
        rec.push(0.0, &format!("a_lambda_trace_norm[lambda={l}]"), n)?;
    }
    let rows = rec.into_rows();
    let tol = &cfg.tolerances;
    let mut checks = vec![Check::at_most("doubling_change", d.doubling_change, tol.doubling_change)];
    let log_xy: Vec<(f64, f64)> = d.p_ball_mass.iter().map(|&(r, m)| (r.ln(), m)).collect();
    let (slope, _, r2) = super::linear_fit(&log_xy);
    checks.push(Check::at_least("p_mass_log_r2", r2, tol.log_fit_r2));
    checks.push(Check::at_least("p_mass_log_slope", slope, 0.0));
    let incs: Vec<f64> = d.p_ball_mass.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let last = *incs.last().unwrap_or(&0.0);
    let mean = incs.iter().sum::<f64>() / incs.len().max(1) as f64;
    checks.push(Check::at_least("p_mass_last_increment_ratio", last / mean, 0.5));
    let at = |r: f64| d.wick_ball_mass.iter().find(|p| p.0 == r).map(|p| p.1).unwrap_or(f64::NAN);
    checks.push(Check::at_most("wick_saturation_16_32", (at(32.0) - at(16.0)).abs() / at(32.0), tol.wick_saturation));
    let mut fits = Vec::new();
    if small.len() >= 3 {
        let fit = fit_slope(&small)?;
        checks.push(Check::within("a_lambda_trace_norm_slope", fit.slope, -0.6, -0.4));
        fits.push(NamedFit { name: "a_lambda_trace_norm".into(), fit });
    }
    Ok(SweepResult { metadata: metadata(cfg, guards), rows, fits, checks })
}

// ---------------------------------------------------------------- composition and the Husimi equation

/// Width of the Gaussian symbol F in the composition study.
const F_WIDTH: f64 = 2.0;

/// Remainders of the order-2 and order-3 Wick expansions of Op_h(F)∘|Ψ_Z⟩⟨Ψ_Z|, plus the
/// exactness of the order-3 expansion on a quadratic symbol.
///
/// F peaks one width to the left of Z. At the peak itself every ∂^kF with k ≥ 1 vanishes and
/// the leading remainder term with it.
pub fn composition_sweep(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let pg = cfg.grid.phase_grid()?;
    let z = cfg.center_point();
    let peak = PhasePoint::new(z.x - F_WIDTH, z.xi);
    let gaussian = move |x: f64, xi: f64| (-((x - peak.x).powi(2) + (xi - peak.xi).powi(2)) / (2.0 * F_WIDTH * F_WIDTH)).exp();
    sweep(cfg, |h| {
        let mut rec = Recorder::new(h);
        let g = cfg.grid.position_grid(h)?;
        let b = QuantumOperator::projector(&coherent_state(z, h, &g)?);
        let a = weyl_quantize_fn(g, h, |x, xi| C64::new(gaussian(x, xi), 0.0))?;
        let fpg = PhaseGrid::new(-9.0, 9.0, -9.0, 9.0, 144, 144)?;
        let f = Symbol::from_real_fn(fpg, gaussian);
        for m in [2u32, 3] {
            let r = composition_remainder_op(&a, &f, &b, m, &pg)?;
            rec.push(0.0, &format!("remainder_l1_m{m}"), r.l1)?;
            rec.push(0.0, &format!("bound_rhs_m{m}"), r.bound_rhs)?;
        }
        let q = weyl_quantize_fn(g, h, |x, xi| C64::new(x * x + xi * xi - 0.5 * x * xi, 0.0))?;
        let exact = wick_symbol_direct(&q.compose(&b)?, &pg)?;
        let expand = wick_compose_expand(&q, &b, 3, &pg)?;
        rec.push(0.0, "polynomial_defect", exact.max_diff(&expand)? / exact.linf_norm())?;
        Ok(rec.into_rows())
    })
}

fn coherent_trajectory(g: PositionGrid, h: f64, z: PhasePoint, pot: &PotentialSpec, dt: f64, skip: usize, keep: usize) -> Result<Vec<(f64, QuantumOperator)>> {
    let rho = crate::operator::DensityState::pure(&coherent_state(z, h, &g)?)?;
    let mut st = MeanFieldState::dense(rho, pot.clone());
    for _ in 0..skip {
        st = tdhf_step(&st, dt)?;
    }
    let mut out = vec![(st.t(), st.operator())];
    for _ in 1..keep {
        st = tdhf_step(&st, dt)?;
        out.push((st.t(), st.operator()));
    }
    Ok(out)
}

/// Residual of the Husimi evolution equation under halving of dt and of both grids, the mass of
/// its right side, and the truncation remainders of orders 2 and 3.
pub fn wick_pde_sweep(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let pot = cfg.potential.resolve()?;
    let pg = cfg.grid.phase_grid()?;
    let z = cfg.center_point();
    let delta = 1e-3;
    let mut rows = sweep(cfg, |h| {
        let mut rec = Recorder::new(h);
        let g = cfg.grid.position_grid(h)?;
        let traj = coherent_trajectory(g, h, z, &pot, delta, 0, 3)?;
        for m in [2u32, 3] {
            let (_, l1) = truncation_remainder(&traj, &pot, &pg, m)?;
            rec.push(traj[1].0, &format!("truncation_l1_m{m}"), l1)?;
        }
        Ok(rec.into_rows())
    })?;
    // grid-halving study at the middle of the sweep
    let h = cfg.h_list[cfg.h_list.len() / 2];
    let mut rec = Recorder::new(h);
    let dt = 0.04;
    let g = cfg.grid.position_grid(h)?;
    let fine_g = PositionGrid::new(g.x_min(), g.x_max(), 2 * g.len())?;
    let fine_pg = PhaseGrid::new(pg.x_min, pg.x_max, pg.xi_min, pg.xi_max, 2 * pg.nx, 2 * pg.nxi)?;
    let coarse = pde_residual(&coherent_trajectory(g, h, z, &pot, dt, 0, 3)?, &pot, &pg)?.remove(0);
    let fine = pde_residual(&coherent_trajectory(fine_g, h, z, &pot, dt / 2.0, 1, 3)?, &pot, &fine_pg)?.remove(0);
    if (coarse.t - fine.t).abs() > 1e-12 {
        return Err(Error::Invariant("residual samples at different times".into()));
    }
    let (rc, rf) = (coarse.residual().l1_norm(), fine.residual().l1_norm());
    rec.push(coarse.t, "pde_residual_coarse", rc)?;
    rec.push(coarse.t, "pde_residual_fine", rf)?;
    rec.push(coarse.t, "pde_residual_ratio", rc / rf)?;
    rec.push(coarse.t, "rhs_mass", coarse.rhs.integral().norm())?;
    rec.push(coarse.t, "rhs_l1", coarse.rhs.l1_norm())?;
    rows.extend(rec.into_rows());
    Ok(rows)
}

pub(crate) fn composition_checks(rows: &[Row], cfg: &ExperimentConfig) -> Result<(Vec<NamedFit>, Vec<Check>)> {
    let tol = &cfg.tolerances;
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    let series = |m: &str| -> Vec<(f64, f64)> { rows.iter().filter(|r| r.metric == m).map(|r| (r.h, r.value)).collect() };
    if !series("remainder_l1_m2").is_empty() {
        for (m, target) in [(2u32, 1.0), (3, 1.5)] {
            let name = format!("remainder_l1_m{m}");
            let fit = fit_slope(&series(&name))?;
            checks.push(Check::within(format!("{name}_slope"), fit.slope, target - tol.slope_band, target + tol.slope_band));
            fits.push(NamedFit { name, fit });
        }
        let worst = series("polynomial_defect").iter().map(|p| p.1).fold(0.0f64, f64::max);
        checks.push(Check::at_most("polynomial_defect", worst, tol.polynomial_exactness));
    }
    if !series("truncation_l1_m3").is_empty() {
        let fit = fit_slope(&series("truncation_l1_m3"))?;
        checks.push(Check::within("truncation_l1_m3_slope", fit.slope, tol.truncation_slope_lo, tol.truncation_slope_hi));
        fits.push(NamedFit { name: "truncation_l1_m3".into(), fit });
        if let Ok(fit2) = fit_slope(&series("truncation_l1_m2")) {
            fits.push(NamedFit { name: "truncation_l1_m2".into(), fit: fit2 });
        }
        let r = series("pde_residual_ratio");
        if let Some(&(_, v)) = r.first() {
            checks.push(Check::at_least("pde_residual_ratio", v, tol.residual_ratio_min));
        }
        if let Some(&(_, v)) = series("rhs_mass").first() {
            checks.push(Check::at_most("rhs_mass", v, tol.rhs_mass));
        }
    }
    Ok((fits, checks))
}

/// The expansion remainders and the Husimi-equation checks.
pub fn run_composition(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let guards = cfg.validate()?;
    let mut rows = composition_sweep(cfg)?;
    rows.extend(wick_pde_sweep(cfg)?);
    let (fits, checks) = composition_checks(&rows, cfg)?;
    Ok(SweepResult { metadata: metadata(cfg, guards), rows, fits, checks })
}
