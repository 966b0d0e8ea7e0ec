//! Semiclassical phase-space laboratory in one space dimension.
//!
//! Coherent states, Weyl and Wick symbols, the heat bridge between them,
//! Heisenberg smoothing operators, TDHF and Vlasov propagators, and the
//! experiment runners that measure the h-scaling of quantum/classical gaps.

pub mod classical;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod operator;
pub mod phase_space;
pub mod quadrature;
pub mod quantization;
pub mod quantum;
pub mod wick_calculus;

pub use classical::{PhaseDistribution, PotentialSpec, Profile};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use operator::{DensityState, OperatorNorms, QuantumOperator, RegularityReport};
pub use phase_space::{PhaseGrid, PhasePoint, PositionGrid, WaveFunction};
pub use quantization::Symbol;

/// Ordered map over `0..n`; parallel when the `parallel` feature is on.
/// Output order never depends on scheduling.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
pub(crate) mod testutil;
