//! Closed-form fading expectations of the Gaussian lattice sum.
//!
//! The summands decay only polynomially (`Π|t_i|^{−3}` for fast fading), so
//! truncation error is estimated by extrapolating the last annulus with a
//! `C/R²` tail, the decay rate of the axis-aligned terms of `Z^n`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::theta::{Neumaier, TruncationMode, TruncationPolicy, GROWTH};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub tail_estimate: f64,
    /// Truncation radius actually used.
    pub radius: f64,
    pub converged: bool,
}

impl PsiValue {
    /// Truncated sum plus its tail estimate.
    pub fn extrapolated(&self) -> f64 {
        self.value + self.tail_estimate
    }
}

/// `ψ^FF(γ) = (γ/2)^n·Σ_{t∈Λ_e} Π_i (1 + t_i²γ²)^{−3/2}`, `γ = σ_h/σ`.
pub fn psi_ff(eve: &Lattice, gamma: f64, policy: &TruncationPolicy) -> Result<PsiValue> {
    check(eve, gamma)?;
    let n = eve.ambient_dim();
    let g2 = gamma * gamma;
    let log_scale = n as f64 * (0.5 * gamma).ln();
    ball_series(eve, policy, gamma, log_scale, |x| {
        -1.5 * x.iter().map(|t| (t * t * g2).ln_1p()).sum::<f64>()
    })
}

/// `ψ^BF(γ) = Γ(T/2+1)^m·π^{−n/2}·γ^n·Σ_X Π_{i=1}^m (1 + ‖X_i‖²γ²)^{−(T/2+1)}`
/// with `n = mT` and `X_i = (X_i, X_{i+m}, …, X_{i+(T−1)m})`.
pub fn psi_bf(eve: &Lattice, gamma: f64, t: usize, policy: &TruncationPolicy) -> Result<PsiValue> {
    check(eve, gamma)?;
    let n = eve.ambient_dim();
    if t == 0 || !n.is_multiple_of(t) {
        return Err(Error::Shape(format!("block length {t} does not divide dimension {n}")));
    }
    let m = n / t;
    let g2 = gamma * gamma;
    let power = 0.5 * t as f64 + 1.0;
    let log_scale = m as f64 * ln_gamma(power) - 0.5 * n as f64 * PI.ln() + n as f64 * gamma.ln();
    ball_series(eve, policy, gamma, log_scale, |x| {
        let mut acc = 0.0;
        for i in 0..m {
            let block: f64 = (0..t).map(|k| x[i + k * m] * x[i + k * m]).sum();
            acc += (block * g2).ln_1p();
        }
        -power * acc
    })
}

fn check(eve: &Lattice, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    if !eve.is_full_rank() {
        return Err(Error::UnsupportedRank {
            rank: eve.rank(),
            ambient: eve.ambient_dim(),
        });
    }
    Ok(())
}

/// `exp(log_scale)·Σ_{x∈Λ, ‖x‖≤R} exp(log_term(x))` for an even summand.
fn ball_series<F>(lattice: &Lattice, policy: &TruncationPolicy, gamma: f64, log_scale: f64, log_term: F) -> Result<PsiValue>
where
    F: Fn(&[f64]) -> f64,
{
    policy.validate()?;
    let en = Enumerator::new(lattice)?.with_budget(policy.point_budget);
    let sum_at = |radius: f64| -> Result<(f64, f64)> {
        let r2 = radius * radius;
        let inner = r2 / (GROWTH * GROWTH);
        let mut total = Neumaier::default();
        let mut annulus = Neumaier::default();
        en.for_each_half_with_vectors(r2, |_, x, norm| {
            let v = 2.0 * log_term(x).exp();
            total.add(v);
            if norm > inner {
                annulus.add(v);
            }
        })?;
        let zero = log_term(&vec![0.0; lattice.ambient_dim()]).exp();
        let sum = total.value() + zero;
        // Tail C/R² fitted to the annulus between R/GROWTH and R.
        let tail = annulus.value() / (GROWTH * GROWTH - 1.0);
        Ok((sum, tail))
    };
    let scale = log_scale.exp();
    let finish = |radius: f64, (sum, tail): (f64, f64), converged: bool| PsiValue {
        value: scale * sum,
        tail_estimate: scale * tail,
        radius,
        converged,
    };
    match policy.mode {
        TruncationMode::FixedRadius(r) => Ok(finish(r, sum_at(r)?, true)),
        TruncationMode::Adaptive { rel_tol } => {
            // The summand varies on the scale 1/γ; start a few of those out.
            let mut r = (4.0 / gamma).max(2.0 * en.shortest_basis_norm_sq().sqrt());
            loop {
                let capped = r.min(policy.max_radius);
                let affordable = affordable_radius(&en, capped);
                let clamped = affordable < r;
                let res = sum_at(affordable)?;
                if res.1 < rel_tol * res.0 {
                    return Ok(finish(affordable, res, true));
                }
                if clamped {
                    return Ok(finish(affordable, res, false));
                }
                r *= GROWTH;
            }
        }
    }
}

fn affordable_radius(en: &Enumerator, r: f64) -> f64 {
    if en.estimated_nodes(r * r) <= en.budget() {
        return r;
    }
    let (mut lo, mut hi) = (0.0, r);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if en.estimated_nodes(mid * mid) <= en.budget() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
