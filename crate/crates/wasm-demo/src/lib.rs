//! Browser bindings for the static demo page in `www/`.

use std::f64::consts::PI;

use semiclassical::classical::hamiltonian_flow;
use semiclassical::experiments::heat_marginal_oracle;
use semiclassical::phase_space::coherent_state;
use semiclassical::quantization::smooth_th;
use semiclassical::quantum::schrodinger_step;
use semiclassical::{PhasePoint, PositionGrid, PotentialSpec, QuantumOperator};
use wasm_bindgen::prelude::*;

/// Half-width of the square phase window shown on the page.
pub const WINDOW: f64 = 4.0;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn check_h(h: f64) -> Result<(), JsError> {
    if (0.1..=0.5).contains(&h) {
        Ok(())
    } else {
        Err(JsError::new("h must lie in [0.1, 0.5]"))
    }
}

/// Husimi density of a coherent state after time t under V = ½cos x, sampled on an n×n grid
/// over [−4, 4]², row-major in x. The last two entries are the classical orbit point.
#[wasm_bindgen]
pub fn husimi_frame(x0: f64, xi0: f64, h: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    check_h(h)?;
    if !(0.0..=3.0).contains(&t) || !(8..=128).contains(&n) {
        return Err(JsError::new("need 0 ≤ t ≤ 3 and 8 ≤ n ≤ 128"));
    }
    // room for coherent states at the window corners when h = 0.5
    let grid = PositionGrid::new(-16.0, 16.0, 512).map_err(err)?;
    let pot = PotentialSpec::preset("cosine").map_err(err)?;
    let v: Vec<f64> = grid.points().iter().map(|&x| pot.v.value(x)).collect();
    let z = PhasePoint::new(x0, xi0);
    let mut f = coherent_state(z, h, &grid).map_err(err)?;
    let steps = (t / 0.01).ceil() as usize;
    if steps > 0 {
        let dt = t / steps as f64;
        for _ in 0..steps {
            f = schrodinger_step(&f, dt, &v).map_err(err)?;
        }
    }
    let step = 2.0 * WINDOW / n as f64;
    let mut out = Vec::with_capacity(n * n + 2);
    for a in 0..n {
        for b in 0..n {
            let x = PhasePoint::new(-WINDOW + (a as f64 + 0.5) * step, -WINDOW + (b as f64 + 0.5) * step);
            let c = coherent_state(x, h, &grid).map_err(err)?.inner(&f).map_err(err)?;
            out.push(c.norm_sqr() / (2.0 * PI * h));
        }
    }
    let p = hamiltonian_flow(z, t, &pot.v, 1e-3).map_err(err)?;
    out.extend([p.x, p.xi]);
    Ok(out)
}

/// [‖P − T_hP‖_op, ‖P − T_hP‖_tr] for the coherent projector at (x, ξ). Both are independent
/// of h and of the center: 1/3 and 2/3.
#[wasm_bindgen]
pub fn smoothing_gap(x: f64, xi: f64, h: f64) -> Result<Vec<f64>, JsError> {
    check_h(h)?;
    if x.abs() > 2.0 || xi.abs() > 2.0 {
        return Err(JsError::new("center must lie in [−2, 2]²"));
    }
    let grid = PositionGrid::standard();
    let p = QuantumOperator::projector(&coherent_state(PhasePoint::new(x, xi), h, &grid).map_err(err)?);
    let d = p.sub(&smooth_th(&p)).map_err(err)?;
    Ok(vec![d.op_norm(), d.trace_norm()])
}

/// Lower bound on the L¹ distance between the quantum and classical phase densities of a free
/// coherent state at n + 1 equally spaced times in [0, t_max]. It does not depend on h.
#[wasm_bindgen]
pub fn ehrenfest_time_curve(h: f64, t_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(h > 0.0 && h <= 1.0) || !(t_max > 0.0 && t_max <= 50.0) || n == 0 || n > 2000 {
        return Err(JsError::new("need 0 < h ≤ 1, 0 < t_max ≤ 50 and 1 ≤ n ≤ 2000"));
    }
    Ok((0..=n).map(|k| heat_marginal_oracle(h, t_max * k as f64 / n as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_a_probability_density() {
        let n = 48;
        let v = husimi_frame(0.5, 0.5, 0.25, 0.5, n).unwrap_or_else(|_| panic!("frame"));
        let cell = (2.0 * WINDOW / n as f64).powi(2);
        let mass: f64 = v[..n * n].iter().sum::<f64>() * cell;
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
        assert!(v[..n * n].iter().all(|&p| p >= 0.0));
        assert!(husimi_frame(-2.0, 1.5, 0.5, 3.0, 16).is_ok());
    }

    #[test]
    fn smoothing_gap_closed_form() {
        let g = smoothing_gap(0.3, -0.2, 0.2).unwrap_or_else(|_| panic!("gap"));
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-6);
        assert!((g[1] - 2.0 / 3.0).abs() < 1e-6);
        assert!(smoothing_gap(2.0, -2.0, 0.5).is_ok());
    }

    #[test]
    fn curve_starts_at_zero_and_grows() {
        let c = ehrenfest_time_curve(0.1, 8.0, 16).unwrap_or_else(|_| panic!("curve"));
        assert_eq!(c[0], 0.0);
        assert!(c.windows(2).all(|w| w[1] > w[0]));
    }
}
