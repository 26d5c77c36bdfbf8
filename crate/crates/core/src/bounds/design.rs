//! High-SNR design heuristics: inverse norm sum, SNR expansion coefficients
//! and the diversity variance ratio.

use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Sub};

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::theta::{Neumaier, TruncationMode, TruncationPolicy, DEFAULT_FIXED_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsValue {
    pub value: f64,
    pub radius: f64,
    pub points: u64,
}

/// Inverse norm sum `Σ_{t≠0} Π_i |t_i|^{−exponent}` over the policy ball.
/// Components with `|t_i| ≤ 1e-9·max|basis entry|` count as zero.
pub fn ins(eve: &Lattice, exponent: f64, policy: &TruncationPolicy) -> Result<InsValue> {
    ins_with_tolerance(eve, exponent, policy, 1e-9 * eve.max_abs_entry())
}

pub fn ins_with_tolerance(eve: &Lattice, exponent: f64, policy: &TruncationPolicy, zero_tol: f64) -> Result<InsValue> {
    policy.validate()?;
    // The sum has no useful tail model, so an adaptive policy falls back to
    // the default fixed radius.
    let radius = match policy.mode {
        TruncationMode::FixedRadius(r) => r,
        TruncationMode::Adaptive { .. } => DEFAULT_FIXED_RADIUS,
    };
    let en = Enumerator::new(eve)?.with_budget(policy.point_budget);
    let mut sum = Neumaier::default();
    let mut points = 0u64;
    let mut bad: Option<Vec<i64>> = None;
    en.for_each_half_with_vectors(radius * radius, |z, x, _| {
        if bad.is_some() {
            return;
        }
        if x.iter().any(|t| t.abs() <= zero_tol) {
            bad = Some(en.to_original(z));
            return;
        }
        let log: f64 = x.iter().map(|t| t.abs().ln()).sum();
        sum.add(2.0 * (-exponent * log).exp());
        points += 2;
    })?;
    if let Some(point) = bad {
        return Err(Error::NotFullDiversity { point });
    }
    Ok(InsValue {
        value: sum.value(),
        radius,
        points,
    })
}

/// First three coefficients of `Π_i (1 + t_i²γ)` in powers of `γ`:
/// `(1, ‖t‖₂², ½(‖t‖₂⁴ − ‖t‖₄⁴))`.
pub fn snr_expansion<T>(t: &[T]) -> (T, T, T)
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let mut s2 = T::zero();
    let mut s4 = T::zero();
    for v in t {
        let sq = v.clone() * v.clone();
        s4 = s4 + sq.clone() * sq.clone();
        s2 = s2 + sq;
    }
    let two = T::one() + T::one();
    let c2 = (s2.clone() * s2.clone() - s4) / two;
    (T::one(), s2, c2)
}

/// `‖t‖₄⁴ / ‖t‖₂⁴ ∈ (0, 1]`; small values mean the energy is spread over
/// many coordinates.
pub fn diversity_variance_ratio(t: &[f64]) -> Result<f64> {
    let s2: f64 = t.iter().map(|v| v * v).sum();
    if s2 == 0.0 {
        return Err(Error::domain("diversity ratio of the zero vector"));
    }
    let s4: f64 = t.iter().map(|v| v.powi(4)).sum();
    Ok(s4 / (s2 * s2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_examples() {
        assert_eq!(snr_expansion(&[1i64, 1, 1, 1]), (1, 4, 6));
        assert_eq!(snr_expansion(&[2i64, 0]), (1, 4, 0));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(diversity_variance_ratio(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.25);
        assert_eq!(diversity_variance_ratio(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((diversity_variance_ratio(&[2.0, 1.0]).unwrap() - 17.0 / 25.0).abs() < 1e-15);
        assert!(diversity_variance_ratio(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn ins_rejects_z4() {
        let err = ins(&Lattice::integer(4), 3.0, &TruncationPolicy::fixed(3.0)).unwrap_err();
        assert!(matches!(err, Error::NotFullDiversity { .. }));
    }
}
