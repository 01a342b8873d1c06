//! Capacity regions and achievable rate regions for uplink cloud radio access
//! networks (CRAN) in which the relays operate obliviously of the users'
//! codebooks.
//!
//! The crate is organised bottom-up:
//!
//! - [`finite_info`]: exact entropies and mutual informations of dense joint
//!   pmfs, measured in bits.
//! - [`dm`]: discrete-memoryless models, the compress-and-forward region
//!   evaluators (joint, separate and successive decoding) and the capacity
//!   region of the conditionally independent class.
//! - [`gaussian_info`]: Hermitian linear algebra for MIMO models and the
//!   whitened quantizer parametrisation `0 ⪯ B ⪯ Σ⁻¹`.
//! - [`gaussian_schemes`]: Gaussian regions with and without time-sharing,
//!   the cut-set bound, the constant-gap certificate and the closed forms of
//!   the single-user two-relay example.
//! - [`submodular`]: the fronthaul polytope, its extreme points and the
//!   time-shared successive schedules that dominate them.
//! - [`wyner`]: the circular symmetric Wyner benchmark.
//! - [`optimize`]: the scalar, box and time-sharing searches used above.
//!
//! All rates are in bits (base-2 logarithms).

pub mod dm;
pub mod error;
pub mod finite_info;
pub mod gaussian_info;
pub mod gaussian_schemes;
pub mod optimize;
pub mod random;
pub mod region;
pub mod subsets;
pub mod submodular;
pub mod sweep;
pub mod wyner;

pub use error::{Error, Result};
