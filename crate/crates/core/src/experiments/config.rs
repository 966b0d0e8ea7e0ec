use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classical::{PotentialSpec, Profile, MAX_STEPS};
use crate::error::{Error, Result};
use crate::phase_space::{PhaseGrid, PhasePoint, PositionGrid, ALIAS_FRACTION, DECAY_FLOOR};
use crate::quantization::QuadratureSpec;

/// Largest position grid a run may request.
pub const MAX_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Ehrenfest,
    TdhfVlasov,
    EhrenfestTime,
    Counterexample,
    Composition,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Ehrenfest, Scenario::TdhfVlasov, Scenario::EhrenfestTime, Scenario::Counterexample, Scenario::Composition];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ehrenfest => "ehrenfest",
            Scenario::TdhfVlasov => "tdhf_vlasov",
            Scenario::EhrenfestTime => "ehrenfest_time",
            Scenario::Counterexample => "counterexample",
            Scenario::Composition => "composition",
        }
    }
}

/// Phase window for the metrics and the rule for the position grid behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Metrics live on [−x_window, x_window] × [−xi_window, xi_window].
    pub x_window: f64,
    pub xi_window: f64,
    pub pg_nx: usize,
    pub pg_nxi: usize,
    /// Lower bound on the number of position nodes; the alias guard can raise it.
    pub min_points: usize,
    /// Lower bound on the position box half-width.
    pub min_half_width: f64,
}

impl GridConfig {
    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(-self.x_window, self.x_window, -self.xi_window, self.xi_window, self.pg_nx, self.pg_nxi)
    }

    /// Position box [−L, L]: the window plus the reach of a coherent state, and the smallest
    /// power of two whose alias bound covers the window's momenta.
    pub fn position_grid(&self, h: f64) -> Result<PositionGrid> {
        let margin = (2.0 * h * (1.0 / (0.1 * DECAY_FLOOR)).ln()).sqrt();
        let half = (self.x_window + margin + 0.25).max(self.min_half_width);
        let needed = 2.0 * half * self.xi_window / (ALIAS_FRACTION * std::f64::consts::PI * h);
        let n = (needed.ceil() as usize).next_power_of_two().max(self.min_points.next_power_of_two());
        if n > MAX_POINTS {
            return Err(Error::Config(format!(
                "h = {h} needs {n} position nodes (limit {MAX_POINTS}); shrink the window or drop small h"
            )));
        }
        PositionGrid::new(-half, half, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// One of zero, harmonic, cosine, gaussian_W.
    pub preset: String,
    /// Replace the preset's external potential or interaction.
    pub v: Option<Profile>,
    pub w: Option<Profile>,
}

impl PotentialConfig {
    pub fn named(preset: &str) -> Self {
        PotentialConfig { preset: preset.into(), v: None, w: None }
    }

    pub fn resolve(&self) -> Result<PotentialSpec> {
        let base = PotentialSpec::preset(&self.preset)?;
        PotentialSpec::new(self.v.clone().unwrap_or(base.v), self.w.clone().unwrap_or(base.w))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File names inside `dir`; default `<scenario>.csv` and `<scenario>_summary.json`.
    pub csv: Option<String>,
    pub summary: Option<String>,
}

/// Pass/fail thresholds. Defaults are the acceptance values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub slope_min: f64,
    pub r2_min: f64,
    /// max/min of err/(√h·I) across the sweep
    pub scaled_ratio_max: f64,
    pub initial_gap: f64,
    pub heat_identity_gap: f64,
    pub final_distance_min: f64,
    pub oracle_rel: f64,
    pub doubling_change: f64,
    pub log_fit_r2: f64,
    pub wick_saturation: f64,
    pub polynomial_exactness: f64,
    pub slope_band: f64,
    pub residual_ratio_min: f64,
    pub rhs_mass: f64,
    pub truncation_slope_lo: f64,
    pub truncation_slope_hi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope_min: 0.45,
            r2_min: 0.95,
            scaled_ratio_max: 4.0,
            initial_gap: 1e-6,
            heat_identity_gap: 1e-3,
            final_distance_min: 1.5,
            oracle_rel: 0.05,
            doubling_change: 1e-3,
            log_fit_r2: 0.99,
            wick_saturation: 1e-3,
            polynomial_exactness: 1e-6,
            slope_band: 0.15,
            residual_ratio_min: 1.8,
            rhs_mass: 1e-8,
            truncation_slope_lo: 0.35,
            truncation_slope_hi: 0.65,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: GridConfig,
    /// Strictly descending, inside (0, 1].
    pub h_list: Vec<f64>,
    pub t_max: f64,
    pub dt: f64,
    /// Output times are t_max·k/t_samples, k = 0..=t_samples.
    pub t_samples: usize,
    pub potential: PotentialConfig,
    /// Centre of the observable, initial state or coherent factor.
    pub center: [f64; 2],
    /// Counter-example exponent α ∈ (1/2, 1].
    pub alpha: f64,
    pub quadrature: QuadratureSpec,
    /// Counter-example ball radii.
    pub radii: Vec<f64>,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

const SWEEP: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

impl ExperimentConfig {
    /// Defaults for one scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let base = ExperimentConfig {
            scenario,
            grid: GridConfig { x_window: 4.0, xi_window: 4.0, pg_nx: 128, pg_nxi: 128, min_points: 256, min_half_width: 8.0 },
            h_list: SWEEP.to_vec(),
            t_max: 1.0,
            dt: 0.01,
            t_samples: 4,
            potential: PotentialConfig::named("cosine"),
            center: [0.0, 0.0],
            alpha: 1.0,
            quadrature: QuadratureSpec::default(),
            radii: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            output: OutputConfig { dir: PathBuf::from("out"), csv: None, summary: None },
            tolerances: Tolerances::default(),
            jobs: 0,
        };
        match scenario {
            Scenario::Ehrenfest => ExperimentConfig {
                grid: GridConfig { min_half_width: 13.0, ..base.grid.clone() },
                center: [0.0, 0.5],
                ..base
            },
            Scenario::TdhfVlasov => ExperimentConfig {
                grid: GridConfig { x_window: 14.0, xi_window: 6.7, pg_nx: 256, pg_nxi: 128, min_points: 256, min_half_width: 0.0 },
                dt: 1.0 / 128.0,
                potential: PotentialConfig::named("gaussian_W"),
                ..base
            },
            Scenario::EhrenfestTime => ExperimentConfig {
                grid: GridConfig { x_window: 75.0, xi_window: 4.5, pg_nx: 1536, pg_nxi: 448, min_points: 256, min_half_width: 0.0 },
                h_list: vec![0.5],
                t_max: 8.0,
                t_samples: 8,
                potential: PotentialConfig::named("zero"),
                ..base
            },
            Scenario::Counterexample => ExperimentConfig {
                grid: GridConfig { x_window: 8.0, xi_window: 4.0, pg_nx: 64, pg_nxi: 64, min_points: 256, min_half_width: 16.0 },
                h_list: vec![1.0],
                t_max: 0.0,
                t_samples: 0,
                potential: PotentialConfig::named("zero"),
                ..base
            },
            Scenario::Composition => ExperimentConfig {
                center: [1.0, -0.5],
                // half the wavenumber of the cosine preset
                potential: PotentialConfig { preset: "cosine".into(), v: Some(Profile::Cosine { a: 0.5, b: 0.5 }), w: None },
                t_max: 0.0,
                t_samples: 0,
                ..base
            },
        }
    }

    /// Parse a JSON document, filling missing keys from the scenario defaults.
    /// Unknown keys anywhere are rejected.
    pub fn from_json(text: &str, scenario: Option<Scenario>) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let named = match doc.get("scenario") {
            Some(v) => Some(serde_json::from_value::<Scenario>(v.clone()).map_err(|e| Error::Config(format!("scenario: {e}")))?),
            None => None,
        };
        let scenario = match (named, scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for {}, command is {}", a.name(), b.name())));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("missing key `scenario`".into())),
        };
        let mut merged = serde_json::to_value(Self::preset(scenario)).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, doc);
        let cfg: ExperimentConfig = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn center_point(&self) -> PhasePoint {
        PhasePoint::new(self.center[0], self.center[1])
    }

    /// Output times (empty for static scenarios).
    pub fn times(&self) -> Vec<f64> {
        if self.t_samples == 0 {
            return vec![];
        }
        (0..=self.t_samples).map(|k| self.t_max * k as f64 / self.t_samples as f64).collect()
    }

    /// Steps between consecutive output times, and the step length that makes them land exactly.
    pub fn stepping(&self) -> (usize, f64) {
        if self.t_samples == 0 || self.t_max == 0.0 {
            return (0, self.dt);
        }
        let interval = self.t_max / self.t_samples as f64;
        let n = (interval / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, interval / n as f64)
    }

    /// Latest time allowed by the spread guard 2t·ξ_spread + 3√h ≤ x_window (free streaming only).
    pub fn spread_cap(&self, h: f64) -> f64 {
        let reach = self.grid.x_window - self.center[0].abs() - 3.0 * h.sqrt();
        (reach / (2.0 * self.grid.xi_window)).max(0.0)
    }

    /// Check everything that can fail before any compute is spent. Returns the guard values.
    pub fn validate(&self) -> Result<Vec<(String, f64)>> {
        let bad = |m: String| Err(Error::Config(m));
        if self.h_list.is_empty() {
            return bad("h_list is empty".into());
        }
        for &h in &self.h_list {
            if !(h > 0.0 && h <= 1.0) {
                return bad(format!("h = {h} outside (0, 1]"));
            }
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h_list must be strictly descending".into());
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max = {}", self.t_max));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {}", self.dt));
        }
        if self.t_max / self.dt > MAX_STEPS {
            return bad(format!("t_max/dt = {} exceeds {MAX_STEPS}", self.t_max / self.dt));
        }
        if !(self.grid.x_window > 0.0 && self.grid.xi_window > 0.0) || self.grid.pg_nx < 8 || self.grid.pg_nxi < 8 {
            return bad("phase window needs positive extents and at least 8 nodes per axis".into());
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return bad("center must be finite".into());
        }
        let pot = self.potential.resolve()?;
        let pg = self.grid.phase_grid()?;
        let mut guards = vec![("pg_dx".to_string(), pg.dx()), ("pg_dxi".to_string(), pg.dxi())];
        for &h in &self.h_list {
            let g = self.grid.position_grid(h)?;
            pg.check_alias(&g, h)?;
            guards.push((format!("points@h={h}"), g.len() as f64));
            guards.push((format!("half_width@h={h}"), g.x_max()));
        }
        match self.scenario {
            Scenario::TdhfVlasov | Scenario::EhrenfestTime => {
                let (_, tau) = self.stepping();
                let cfl = 2.0 * pg.xi_extent() * tau / pg.dx();
                guards.push(("drift_cfl".into(), cfl));
                if cfl > 1.0 + 1e-12 {
                    return Err(Error::Cfl(format!("drift CFL 2|ξ|dt/dx = {cfl} exceeds 1")));
                }
                let (lo, hi) = (-self.grid.x_window, self.grid.x_window);
                let force = pot.v.sup_abs(1, lo, hi) + pot.w.sup_abs(1, 2.0 * lo, 2.0 * hi);
                let kick = force * tau / pg.dxi();
                guards.push(("kick_cfl".into(), kick));
                if kick > 1.0 + 1e-12 {
                    return Err(Error::Cfl(format!("kick CFL |∂V|dt/dξ = {kick} exceeds 1")));
                }
            }
            _ => {}
        }
        match self.scenario {
            Scenario::EhrenfestTime => {
                if pot.v != Profile::Zero || pot.w != Profile::Zero {
                    return bad("ehrenfest_time needs V = W = 0".into());
                }
                for &h in &self.h_list {
                    guards.push((format!("t_cap@h={h}"), self.spread_cap(h).min(self.t_max)));
                }
            }
            Scenario::Counterexample => {
                if !(self.alpha > 0.5 && self.alpha <= 1.0) {
                    return bad(format!("alpha = {} outside (1/2, 1]", self.alpha));
                }
                if self.radii.len() < 3 || self.radii.windows(2).any(|w| w[1] <= w[0]) || self.radii[0] <= 0.0 {
                    return bad("radii must be positive, ascending, at least 3".into());
                }
                if !self.radii.contains(&16.0) || !self.radii.contains(&32.0) {
                    return bad("radii must include 16 and 32 for the saturation check".into());
                }
            }
            Scenario::Ehrenfest | Scenario::TdhfVlasov | Scenario::Composition => {
                if self.h_list.len() < 3 {
                    return Err(Error::InsufficientSampling("slope fits need at least 3 values of h".into()));
                }
            }
        }
        Ok(guards)
    }
}

/// Overlay `patch` on `base`, object by object.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}
