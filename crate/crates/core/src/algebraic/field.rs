use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::poly::{discriminant, quartic_is_irreducible, sturm_real_root_count};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const DEFAULT_COEFF_BOUND: i64 = 10;
pub const MAX_DRAWS: usize = 10_000;

/// A totally real quartic field, given by a defining polynomial or as
/// `Q(√p, √q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSpec {
    /// `x⁴ + c3x³ + c2x² + c1x + c0`, stored as `[c0, c1, c2, c3]`.
    Quartic([i64; 4]),
    Biquadratic { p: u64, q: u64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldSpecJson {
    kind: String,
    coeffs: Option<Vec<i64>>,
    p: Option<u64>,
    q: Option<u64>,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

impl FieldSpec {
    pub fn quartic(coeffs: [i64; 4]) -> Result<Self> {
        let spec = FieldSpec::Quartic(coeffs);
        spec.validate()?;
        Ok(spec)
    }

    pub fn biquadratic(p: u64, q: u64) -> Result<Self> {
        let spec = FieldSpec::Biquadratic { p, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::Quartic(c) => {
                if !quartic_is_irreducible(c) {
                    return Err(Error::domain(format!("polynomial {} is reducible", self.describe())));
                }
                if sturm_real_root_count(&self.polynomial()) != 4 {
                    return Err(Error::domain(format!(
                        "polynomial {} does not have four distinct real roots",
                        self.describe()
                    )));
                }
                Ok(())
            }
            FieldSpec::Biquadratic { p, q } => {
                if !is_prime(*p) || !is_prime(*q) || p == q {
                    return Err(Error::domain(format!("biquadratic field needs distinct primes, got {p}, {q}")));
                }
                Ok(())
            }
        }
    }

    /// Defining polynomial, low degree first (the biquadratic one is
    /// `(x² − p − q)² − 4pq`, minimal for `√p + √q`).
    pub fn polynomial(&self) -> Vec<i64> {
        match *self {
            FieldSpec::Quartic(c) => vec![c[0], c[1], c[2], c[3], 1],
            FieldSpec::Biquadratic { p, q } => {
                let (p, q) = (p as i64, q as i64);
                vec![(p - q) * (p - q), 0, -2 * (p + q), 0, 1]
            }
        }
    }

    pub fn polynomial_discriminant(&self) -> BigInt {
        discriminant(&self.polynomial())
    }

    pub fn describe(&self) -> String {
        match *self {
            FieldSpec::Quartic(c) => format!("x^4{:+}x^3{:+}x^2{:+}x{:+}", c[3], c[2], c[1], c[0]),
            FieldSpec::Biquadratic { p, q } => format!("Q(sqrt{p},sqrt{q})"),
        }
    }

    pub fn to_json(&self) -> String {
        let j = match *self {
            FieldSpec::Quartic(c) => FieldSpecJson {
                kind: "quartic".into(),
                coeffs: Some(c.to_vec()),
                p: None,
                q: None,
            },
            FieldSpec::Biquadratic { p, q } => FieldSpecJson {
                kind: "biquadratic".into(),
                coeffs: None,
                p: Some(p),
                q: Some(q),
            },
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: FieldSpecJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let spec = match (j.kind.as_str(), j.coeffs, j.p, j.q) {
            ("quartic", Some(c), _, _) => {
                let c: [i64; 4] = c
                    .try_into()
                    .map_err(|_| Error::Parse("quartic needs exactly four coefficients c0..c3".into()))?;
                FieldSpec::Quartic(c)
            }
            ("biquadratic", _, Some(p), Some(q)) => FieldSpec::Biquadratic { p, q },
            (kind, ..) => return Err(Error::Parse(format!("incomplete or unknown field spec `{kind}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Draws monic quartics with coefficients uniform in `[−bound, bound]` until
/// one is irreducible with four distinct real roots.
pub fn random_totally_real_quartic(seed: u64, coeff_bound: i64) -> Result<FieldSpec> {
    if coeff_bound < 1 {
        return Err(Error::domain(format!("coefficient bound must be at least 1, got {coeff_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let c: [i64; 4] = std::array::from_fn(|_| rng.random_range(-coeff_bound..=coeff_bound));
        if quartic_is_irreducible(&c) && sturm_real_root_count(&[c[0], c[1], c[2], c[3], 1]) == 4 {
            return Ok(FieldSpec::Quartic(c));
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_DRAWS })
}

/// Real roots of a quartic with four distinct real roots, ascending:
/// companion-matrix eigenvalues polished by Newton's method.
pub fn real_roots(poly: &[i64]) -> Result<Vec<f64>> {
    let n = poly.len() - 1;
    let lead = poly[n] as f64;
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -(poly[i] as f64) / lead;
    }
    let eig = comp.complex_eigenvalues();
    let f = |x: f64| poly.iter().rev().fold(0.0, |a, &c| a * x + c as f64);
    let df = |x: f64| {
        poly.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |a, (i, &c)| a * x + (i as f64) * c as f64)
    };
    let mut roots = Vec::with_capacity(n);
    for z in eig.iter() {
        let mut x = z.re;
        let mut converged = false;
        for _ in 0..100 {
            let step = f(x) / df(x);
            x -= step;
            let scale = poly.iter().map(|&c| (c as f64).abs() * x.abs().max(1.0).powi(n as i32)).sum::<f64>();
            if step.abs() <= 1e-15 * x.abs().max(1.0) || f(x).abs() <= 1e-14 * scale {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() {
            return Err(Error::Numeric(format!("root refinement did not converge near {}", z.re)));
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    if roots.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-9 * w[1].abs().max(1.0)) {
        return Err(Error::Numeric("refined roots collapsed onto each other".into()));
    }
    Ok(roots)
}

/// Lattice of an order in a totally real quartic field under the canonical
/// embedding, normalized to unit volume.
#[derive(Debug, Clone)]
pub struct AlgebraicLattice {
    pub lattice: Lattice,
    pub field: FieldSpec,
    /// `det(BᵀB)` of the embedding basis before normalization.
    pub disc_proxy: f64,
    /// The embedding basis before normalization; column 0 is the embedding of 1.
    pub unnormalized: Lattice,
}

impl AlgebraicLattice {
    pub fn sqrt_disc_proxy(&self) -> f64 {
        self.disc_proxy.sqrt()
    }
}

/// Canonical embedding of `Z[θ]` (quartic) or of `Z[1, √p, √q, √pq]`.
pub fn embed(spec: &FieldSpec) -> Result<AlgebraicLattice> {
    spec.validate()?;
    let basis = match *spec {
        FieldSpec::Quartic(_) => {
            let roots = real_roots(&spec.polynomial())?;
            DMatrix::from_fn(4, 4, |i, j| roots[i].powi(j as i32))
        }
        FieldSpec::Biquadratic { p, q } => {
            let (sp, sq) = ((p as f64).sqrt(), (q as f64).sqrt());
            let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
            DMatrix::from_fn(4, 4, |i, j| {
                let (a, b) = signs[i];
                match j {
                    0 => 1.0,
                    1 => a * sp,
                    2 => b * sq,
                    _ => a * b * sp * sq,
                }
            })
        }
    };
    let unnormalized = Lattice::new(basis)?.with_label(spec.describe());
    let disc_proxy = unnormalized.gram().determinant();
    Ok(AlgebraicLattice {
        lattice: unnormalized.unit_volume(),
        field: spec.clone(),
        disc_proxy,
        unnormalized,
    })
}
