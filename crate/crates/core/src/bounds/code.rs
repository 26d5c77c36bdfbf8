use crate::error::{Error, Result};
use crate::flatness::{flatness, Flatness};
use crate::lattice::Lattice;
use crate::theta::TruncationPolicy;

use super::psi::{psi_bf, psi_ff};

/// Nested pair `Λ_e ⊂ Λ_b`; messages index the cosets `Λ_b/Λ_e`.
#[derive(Debug, Clone)]
pub struct CosetCode {
    bob: Lattice,
    eve: Lattice,
    index: u64,
}

impl CosetCode {
    pub fn new(bob: Lattice, eve: Lattice) -> Result<Self> {
        if bob.rank() != eve.rank() || bob.ambient_dim() != eve.ambient_dim() {
            return Err(Error::InvalidSublattice(format!(
                "shapes differ: bob {}x{}, eve {}x{}",
                bob.ambient_dim(),
                bob.rank(),
                eve.ambient_dim(),
                eve.rank()
            )));
        }
        let z = bob
            .sublattice_coordinates(&eve, 1e-9)
            .ok_or_else(|| Error::InvalidSublattice("eve's basis is not an integer combination of bob's".into()))?;
        let det = crate::lattice::integer_determinant(&z).unsigned_abs();
        if det == 0 {
            return Err(Error::InvalidSublattice("coordinate matrix is singular".into()));
        }
        let index = u64::try_from(det).map_err(|_| Error::InvalidSublattice("index overflows u64".into()))?;
        let ratio = eve.volume() / bob.volume();
        if ((ratio - index as f64) / index as f64).abs() > 1e-9 {
            return Err(Error::InvalidSublattice(format!(
                "volume ratio {ratio} disagrees with index {index}"
            )));
        }
        Ok(CosetCode { bob, eve, index })
    }

    /// `Λ_b` and `Λ_e = a·Λ_b` for a positive integer `a`.
    pub fn scaled(bob: Lattice, a: u32) -> Result<Self> {
        let eve = bob.scale(a as f64)?;
        Self::new(bob, eve)
    }

    pub fn bob(&self) -> &Lattice {
        &self.bob
    }

    pub fn eve(&self) -> &Lattice {
        &self.eve
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    Awgn,
    RayleighFast { sigma_h: f64 },
    /// Fade `h_i` shared by coordinates `i, i+m, …, i+(T−1)m`.
    RayleighBlock { sigma_h: f64, t: usize },
}

impl FadingModel {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            FadingModel::Awgn => Ok(()),
            FadingModel::RayleighFast { sigma_h } => check_sigma_h(sigma_h),
            FadingModel::RayleighBlock { sigma_h, t } => {
                check_sigma_h(sigma_h)?;
                if t == 0 || !dim.is_multiple_of(t) {
                    return Err(Error::Shape(format!("block length {t} does not divide dimension {dim}")));
                }
                Ok(())
            }
        }
    }
}

fn check_sigma_h(sigma_h: f64) -> Result<()> {
    if !(sigma_h > 0.0 && sigma_h.is_finite()) {
        return Err(Error::domain(format!("sigma_h must be positive, got {sigma_h}")));
    }
    Ok(())
}

/// An upper bound on Eve's correct-decoding probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ecdp {
    pub value: f64,
    pub tail_estimate: f64,
    /// Set when the bound exceeds 1 and says nothing.
    pub vacuous: bool,
}

impl Ecdp {
    fn new(value: f64, tail_estimate: f64) -> Self {
        Ecdp {
            value,
            tail_estimate,
            vacuous: value > 1.0,
        }
    }
}

/// `Vol(Λ_b)·g_m(Λ_e; σ) = [Λ_b:Λ_e]⁻¹·(ε_{Λ_e}(σ) + 1)`.
pub fn ecdp_awgn(code: &CosetCode, sigma: f64, policy: &TruncationPolicy) -> Result<Ecdp> {
    let f = flatness(&code.eve, sigma, policy)?;
    Ok(ecdp_from_flatness(code.index, &f))
}

pub fn ecdp_from_flatness(index: u64, f: &Flatness) -> Ecdp {
    let inv = 1.0 / index as f64;
    Ecdp::new(inv * (f.value + 1.0), inv * f.tail_estimate)
}

/// `Vol(Λ_b)·ψ_{Λ_e}(σ_h/σ)` for fast or block Rayleigh fading.
pub fn ecdp_fading(code: &CosetCode, model: FadingModel, sigma: f64, policy: &TruncationPolicy) -> Result<Ecdp> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    model.validate(code.eve.ambient_dim())?;
    let vol = code.bob.volume();
    let psi = match model {
        FadingModel::Awgn => return ecdp_awgn(code, sigma, policy),
        FadingModel::RayleighFast { sigma_h } => psi_ff(&code.eve, sigma_h / sigma, policy)?,
        FadingModel::RayleighBlock { sigma_h, t } => psi_bf(&code.eve, sigma_h / sigma, t, policy)?,
    };
    Ok(Ecdp::new(vol * psi.value, vol * psi.tail_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_validation() {
        let b = Lattice::integer(3).scale(0.5).unwrap();
        let code = CosetCode::new(b.clone(), Lattice::integer(3)).unwrap();
        assert_eq!(code.index(), 8);
        let bad = Lattice::integer(3).scale(0.7).unwrap();
        assert!(CosetCode::new(b, bad).is_err());
    }

    #[test]
    fn awgn_identity_and_scale() {
        let code = CosetCode::scaled(Lattice::integer(2).scale(0.5).unwrap(), 2).unwrap();
        let p = TruncationPolicy::default();
        let e = ecdp_awgn(&code, 0.5, &p).unwrap();
        let f = flatness(code.eve(), 0.5, &p).unwrap();
        assert!((e.value - (f.value + 1.0) / 4.0).abs() < 1e-10 * e.value);
        let a = 3.0;
        let scaled = CosetCode::new(code.bob().scale(a).unwrap(), code.eve().scale(a).unwrap()).unwrap();
        let e2 = ecdp_awgn(&scaled, 0.5 * a, &p).unwrap();
        assert!(((e.value - e2.value) / e.value).abs() < 1e-8);
    }

    #[test]
    fn block_length_must_divide() {
        let m = FadingModel::RayleighBlock { sigma_h: 1.0, t: 3 };
        assert!(m.validate(4).is_err());
        assert!(m.validate(6).is_ok());
    }
}
