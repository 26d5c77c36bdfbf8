//! Bounds on the information leaked to the eavesdropper.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
    Base(f64),
}

impl LogBase {
    pub fn log(&self, x: f64) -> f64 {
        match *self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
            LogBase::Base(b) => x.ln() / b.ln(),
        }
    }
}

fn check_m(m: u64) -> Result<()> {
    if m < 4 {
        return Err(Error::domain(format!("message set size must be at least 4, got {m}")));
    }
    Ok(())
}

/// `h(ε, |M|) = 2ε·log|M| − 2ε·log(2ε)`, with `h(0, ·) = 0`.
pub fn info_bound_h(epsilon: f64, m: u64, base: LogBase) -> Result<f64> {
    check_m(m)?;
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon must lie in [0, 1/2], got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let two_eps = 2.0 * epsilon;
    Ok(two_eps * base.log(m as f64) - two_eps * base.log(two_eps))
}

/// Leakage bound in the mod-Λ_s channel: `(1−2E)·h(E,|M|) + 2E·log|M|`
/// for `E ≤ 1/2`, and `log|M|` beyond.
pub fn info_bound_mod_lambda(e: f64, m: u64, base: LogBase) -> Result<f64> {
    check_m(m)?;
    check_e(e)?;
    let log_m = base.log(m as f64);
    if e >= 0.5 {
        return Ok(log_m);
    }
    Ok((1.0 - 2.0 * e) * info_bound_h(e, m, base)? + 2.0 * e * log_m)
}

/// Leakage bound with discrete Gaussian coset coding:
/// `(1−5E)·h(5E/2,|M|) + 5E·log|M|` for `E ≤ 1/5`, and `log|M|` beyond.
pub fn info_bound_gaussian_coset(e: f64, m: u64, base: LogBase) -> Result<f64> {
    check_m(m)?;
    check_e(e)?;
    let log_m = base.log(m as f64);
    if e >= 0.2 {
        return Ok(log_m);
    }
    Ok((1.0 - 5.0 * e) * info_bound_h(2.5 * e, m, base)? + 5.0 * e * log_m)
}

fn check_e(e: f64) -> Result<()> {
    if !(e >= 0.0) || e.is_infinite() {
        return Err(Error::domain(format!("E must be finite and nonnegative, got {e}")));
    }
    Ok(())
}
