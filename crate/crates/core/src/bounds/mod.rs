//! Eavesdropper correct-decoding bounds for lattice coset codes, their
//! fading counterparts, and the information-theoretic and design-level
//! quantities built on them.

mod code;
mod design;
mod info;
mod mc;
mod psi;

pub use code::{ecdp_awgn, ecdp_fading, CosetCode, Ecdp, FadingModel};
pub use design::{diversity_variance_ratio, ins, ins_with_tolerance, snr_expansion, InsValue};
pub use info::{info_bound_gaussian_coset, info_bound_h, info_bound_mod_lambda, LogBase};
pub use mc::{avg_flatness_mc, draw_fading, McEstimate};
pub use psi::{psi_bf, psi_ff, PsiValue};
