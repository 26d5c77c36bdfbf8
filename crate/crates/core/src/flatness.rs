//! Flatness factor `ε_Λ(σ) = Vol(Λ)·max_x g_m(Λ + x; σ) − 1`.
//!
//! Two algebraically equal expressions are available:
//! primal `Vol·(2πσ²)^{−m/2}·Θ_Λ(e^{−1/(2σ²)}) − 1` and
//! dual `Θ_{Λ*}(e^{−2π²σ²}) − 1`, related by Poisson summation (the Fourier
//! transform of `e^{−‖x‖²/(2σ²)}` is `(2πσ²)^{m/2}·e^{−2π²σ²‖t‖²}`).
//! The dispatcher picks whichever series decays faster at the requested σ.

use std::f64::consts::PI;

use crate::enumerate::minimal_norm;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::theta::{theta_profile_for, ThetaProfile, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatnessPath {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flatness {
    pub value: f64,
    /// Estimated truncation error plus a floating roundoff allowance.
    pub tail_estimate: f64,
    pub path: FlatnessPath,
    pub converged: bool,
}

impl Flatness {
    /// `ε + 1`, the quantity that multiplies over direct sums.
    pub fn plus_one(&self) -> f64 {
        self.value + 1.0
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive and finite, got {sigma}")));
    }
    Ok(())
}

/// A full-rank lattice isometric to `lattice` (via the Gram square root).
pub fn intrinsic(lattice: &Lattice) -> Result<Lattice> {
    if lattice.is_full_rank() {
        return Ok(lattice.clone());
    }
    let q = lattice.gram_decomposition()?.sqrt_factor;
    let mut l = Lattice::new(q)?;
    if let Some(name) = lattice.label() {
        l = l.with_label(name);
    }
    Ok(l)
}

/// Multiplier on the ε-scaled sensitivity in the reported error; absorbs the
/// conditioning of the computed norms and volume.
const ROUNDOFF: f64 = 64.0;

pub fn primal_q(sigma: f64) -> f64 {
    (-1.0 / (2.0 * sigma * sigma)).exp()
}

pub fn dual_q(sigma: f64) -> f64 {
    (-2.0 * PI * PI * sigma * sigma).exp()
}

/// Primal evaluation from a shell profile of `Λ`.
pub fn primal_from_profile(profile: &ThetaProfile, sigma: f64) -> Flatness {
    let m = profile.rank() as f64;
    let log_c = profile.volume().ln() - 0.5 * m * (2.0 * PI * sigma * sigma).ln();
    let c = log_c.exp();
    let q = primal_q(sigma);
    // ε = (c − 1) + c·(Θ − 1), avoiding the cancellation in c·Θ − 1.
    let value = log_c.exp_m1() + c * profile.evaluate_nonzero(q);
    let roundoff = ROUNDOFF * f64::EPSILON * c * (profile.sensitivity_at(q) + profile.evaluate(q) * log_c.abs());
    Flatness {
        value,
        tail_estimate: c * profile.tail_at(q) + roundoff,
        path: FlatnessPath::Primal,
        converged: profile.converged,
    }
}

/// Dual evaluation from a shell profile of `Λ*`.
pub fn dual_from_profile(profile: &ThetaProfile, sigma: f64) -> Flatness {
    let q = dual_q(sigma);
    let value = profile.evaluate_nonzero(q);
    Flatness {
        value,
        tail_estimate: profile.tail_at(q) + ROUNDOFF * f64::EPSILON * profile.sensitivity_at(q),
        path: FlatnessPath::Dual,
        converged: profile.converged,
    }
}

pub fn flatness_primal(lattice: &Lattice, sigma: f64, policy: &TruncationPolicy) -> Result<Flatness> {
    check_sigma(sigma)?;
    let l = intrinsic(lattice)?;
    let profile = theta_profile_for(&l, &[primal_q(sigma)], policy)?;
    Ok(primal_from_profile(&profile, sigma))
}

pub fn flatness_dual(lattice: &Lattice, sigma: f64, policy: &TruncationPolicy) -> Result<Flatness> {
    check_sigma(sigma)?;
    let dual = intrinsic(lattice)?.dual()?;
    let profile = theta_profile_for(&dual, &[dual_q(sigma)], policy)?;
    Ok(dual_from_profile(&profile, sigma))
}

/// The series with the faster leading decay: dual iff
/// `e^{−2π²σ²λ*_min} < e^{−λ_min/(2σ²)}`.
pub fn preferred_path(min_norm: f64, dual_min_norm: f64, sigma: f64) -> FlatnessPath {
    let s2 = sigma * sigma;
    if 2.0 * PI * PI * s2 * dual_min_norm > min_norm / (2.0 * s2) {
        FlatnessPath::Dual
    } else {
        FlatnessPath::Primal
    }
}

pub fn flatness(lattice: &Lattice, sigma: f64, policy: &TruncationPolicy) -> Result<Flatness> {
    check_sigma(sigma)?;
    let l = intrinsic(lattice)?;
    let dual = l.dual()?;
    let lam = minimal_norm(&l)?.norm_sq;
    let lam_dual = minimal_norm(&dual)?.norm_sq;
    match preferred_path(lam, lam_dual, sigma) {
        FlatnessPath::Primal => {
            let p = theta_profile_for(&l, &[primal_q(sigma)], policy)?;
            Ok(primal_from_profile(&p, sigma))
        }
        FlatnessPath::Dual => {
            let p = theta_profile_for(&dual, &[dual_q(sigma)], policy)?;
            Ok(dual_from_profile(&p, sigma))
        }
    }
}

/// Flatness of `Λ₁ ⊕ … ⊕ Λ_k` from its factors, each raised to a
/// multiplicity: theta series multiply, so `ε + 1 = Π (ε_i + 1)^{k_i}`.
pub fn direct_sum_flatness(parts: &[(Flatness, u32)]) -> Flatness {
    let mut log_sum = 0.0;
    let mut log_upper = 0.0;
    let mut converged = true;
    let mut path = FlatnessPath::Dual;
    for (f, k) in parts {
        let k = *k as f64;
        log_sum += k * f.value.ln_1p();
        log_upper += k * (f.value + f.tail_estimate).ln_1p();
        converged &= f.converged;
        if f.path == FlatnessPath::Primal {
            path = FlatnessPath::Primal;
        }
    }
    let value = log_sum.exp_m1();
    let upper = log_upper.exp_m1();
    Flatness {
        value,
        tail_estimate: (upper - value).max(0.0) + 8.0 * f64::EPSILON * (value + 1.0),
        path,
        converged,
    }
}

/// Primal and dual shell profiles computed once and evaluated over many σ.
#[derive(Debug, Clone)]
pub struct FlatnessCurve {
    primal: Option<ThetaProfile>,
    dual: Option<ThetaProfile>,
}

impl FlatnessCurve {
    /// Enumerates each series deep enough for the σ values routed to it.
    pub fn build(lattice: &Lattice, sigmas: &[f64], policy: &TruncationPolicy) -> Result<Self> {
        for &s in sigmas {
            check_sigma(s)?;
        }
        let l = intrinsic(lattice)?;
        let dual = l.dual()?;
        let lam = minimal_norm(&l)?.norm_sq;
        let lam_dual = minimal_norm(&dual)?.norm_sq;
        let mut qp = Vec::new();
        let mut qd = Vec::new();
        for &s in sigmas {
            match preferred_path(lam, lam_dual, s) {
                FlatnessPath::Primal => qp.push(primal_q(s)),
                FlatnessPath::Dual => qd.push(dual_q(s)),
            }
        }
        let primal = if qp.is_empty() {
            None
        } else {
            Some(theta_profile_for(&l, &qp, policy)?)
        };
        let dual = if qd.is_empty() {
            None
        } else {
            Some(theta_profile_for(&dual, &qd, policy)?)
        };
        Ok(FlatnessCurve { primal, dual })
    }

    pub fn primal_profile(&self) -> Option<&ThetaProfile> {
        self.primal.as_ref()
    }

    pub fn dual_profile(&self) -> Option<&ThetaProfile> {
        self.dual.as_ref()
    }

    /// Evaluates with whichever available profile reports the smaller tail.
    pub fn evaluate(&self, sigma: f64) -> Flatness {
        let p = self.primal.as_ref().map(|p| primal_from_profile(p, sigma));
        let d = self.dual.as_ref().map(|d| dual_from_profile(d, sigma));
        match (p, d) {
            (Some(p), Some(d)) => {
                if d.tail_estimate <= p.tail_estimate {
                    d
                } else {
                    p
                }
            }
            (Some(p), None) => p,
            (None, Some(d)) => d,
            (None, None) => unreachable!("curve built from at least one sigma"),
        }
    }
}

/// Flatness of the dual lattice after the coordinate-wise fading and
/// shaping weights:
/// `Σ_{t∈Λ*} exp(−2π² Σ_i t_i² / (h_i²/σ² + 1/σ_s²)) − 1`.
///
/// This is the theta series of `diag((h_i²/σ² + 1/σ_s²)^{−1/2})·Λ*` at
/// `q = e^{−2π²}`. As `σ_s → ∞` it tends to `ε_{diag(h)Λ}(σ)`.
pub fn shaping_adjusted_flatness(
    lattice: &Lattice,
    h: &[f64],
    sigma: f64,
    sigma_s: f64,
    policy: &TruncationPolicy,
) -> Result<Flatness> {
    check_sigma(sigma)?;
    if !(sigma_s > 0.0) || sigma_s.is_nan() {
        return Err(Error::domain(format!("shaping deviation must be positive, got {sigma_s}")));
    }
    if !lattice.is_full_rank() {
        return Err(Error::UnsupportedRank {
            rank: lattice.rank(),
            ambient: lattice.ambient_dim(),
        });
    }
    if h.len() != lattice.ambient_dim() {
        return Err(Error::Shape(format!(
            "{} fading coefficients for dimension {}",
            h.len(),
            lattice.ambient_dim()
        )));
    }
    let weights: Vec<f64> = h
        .iter()
        .map(|hi| {
            let d = hi * hi / (sigma * sigma) + 1.0 / (sigma_s * sigma_s);
            1.0 / d.sqrt()
        })
        .collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::domain("a zero fading coefficient needs a finite shaping deviation"));
    }
    let scaled = lattice.dual()?.scale_coordinates(&weights)?;
    let q = (-2.0 * PI * PI).exp();
    let profile = theta_profile_for(&scaled, &[q], policy)?;
    let value = profile.evaluate_nonzero(q);
    Ok(Flatness {
        value,
        tail_estimate: profile.tail_at(q) + ROUNDOFF * f64::EPSILON * profile.sensitivity_at(q),
        path: FlatnessPath::Dual,
        converged: profile.converged,
    })
}
