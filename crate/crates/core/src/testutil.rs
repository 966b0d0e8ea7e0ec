use num_complex::Complex64 as C64;

use crate::operator::QuantumOperator;
use crate::phase_space::{coherent_state, PhasePoint, PositionGrid};

/// Deterministic uniform samples in [-0.5, 0.5).
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(0x9E3779B97F4A7C15) | 1)
    }
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }
    pub fn complex(&mut self) -> C64 {
        C64::new(self.next(), self.next())
    }
}

/// Σ c_kl |Ψ_{X_k}⟩⟨Ψ_{X_l}| with random centers in [-spread, spread]²; hermitian if asked.
pub fn localized_operator(grid: PositionGrid, h: f64, terms: usize, spread: f64, hermitian: bool, seed: u64) -> QuantumOperator {
    let mut rng = Lcg::new(seed);
    let centers: Vec<PhasePoint> = (0..terms)
        .map(|_| PhasePoint::new(2.0 * spread * rng.next(), 2.0 * spread * rng.next()))
        .collect();
    let states: Vec<_> = centers.iter().map(|c| coherent_state(*c, h, &grid).unwrap()).collect();
    let mut acc = QuantumOperator::zeros(grid, h);
    for k in 0..terms {
        for l in 0..terms {
            let c = rng.complex();
            let t = QuantumOperator::outer(&states[k], &states[l]).unwrap().scale(c);
            acc = acc.add(&t).unwrap();
        }
    }
    if hermitian {
        acc.hermitian_part()
    } else {
        acc
    }
}
