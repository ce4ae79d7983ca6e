//! Spectral quantities of `A A^T` that govern volume-sampled block Kaczmarz:
//! elementary symmetric polynomial tables, the kernel `H_s`, the contraction
//! factor `ρ_{A,s}` and the momentum constants, plus enumeration oracles.

mod esp;
pub mod oracles;
mod profile;
mod theory;

pub use esp::EspTable;
pub use profile::{SpectralProfile, DEFAULT_MAX_ORDER};
pub use theory::{
    esp_ratio_lower_bound_check, expected_projector_spectrum, h_matrix, momentum_beta_window, momentum_constants,
    omega_max, rate_ratio, rbkvs_error_bound, rho_as, MomentumConstants,
};
