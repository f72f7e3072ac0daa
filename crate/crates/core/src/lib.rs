//! Certified lower bounds on the classical capacity of a noisy qubit
//! channel, estimated from local Pauli measurements on an entangled probe.
//!
//! The pipeline runs probe → channel → coincidence counts → noise
//! deconvolution → binary error pairs → per-axis Shannon capacities, whose
//! maximum is the detected capacity `C_D ≤ C`.
//!
//! ```
//! use qcapwit::{capacity_cb, ErrorPair};
//!
//! // Z-channel: input 1 flips with probability 1/2.
//! let c = capacity_cb(&ErrorPair::new(0.0, 0.5).unwrap());
//! assert!((c - 1.25f64.log2()).abs() < 1e-12);
//! ```

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod qubit;
pub mod reconstruct;
pub mod simulate;
pub mod uncertainty;

pub use capacity::{
    binary_entropy, brute_force_capacity, capacity_cb, detected_capacity, mutual_information, optimal_prior,
    CapacityReport, PriorDistribution,
};
pub use channel::{
    apply, holevo_capacity_ad, make_amplitude_damping, make_pauli_channel, theoretical_detected_capacity,
    theoretical_errors, ChannelErrorProfile, ChannelKind, KrausChannel, PauliParams,
};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use io::{ingest_table, recompute_from_table, ChannelFamily, PointReport, TableRow};
pub use qubit::{expectation, kron, pauli_basis, Axis, CMatrix, DensityMatrix, Mat2, Mat4};
pub use reconstruct::{deconvolve_q, identify_errors, sanitize, ErrorPair, Sanitization, TransitionMatrix};
pub use simulate::{
    expected_counts, joint_probabilities, sample_counts, werner_state, CoincidenceSet, EfficiencyModel, WernerState,
};
pub use uncertainty::{mc_capacity_distribution, sigma_f_ratio, MonteCarloResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/capacity.md")]
    mod capacity {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/uncertainty.md")]
    mod uncertainty {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
