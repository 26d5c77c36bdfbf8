//! Monte Carlo estimate of the average flatness factor `E_H[ε_{hΛ_e}(σ)]`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flatness::flatness;
use crate::lattice::Lattice;
use crate::theta::{Neumaier, TruncationPolicy};

use super::code::FadingModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Diagonal fading coefficients for one channel use of dimension `dim`.
/// Rayleigh draws use inversion, `h = σ_h·sqrt(−2 ln U)` with `U ∈ (0, 1)`.
pub fn draw_fading<R: Rng>(model: &FadingModel, dim: usize, rng: &mut R) -> Vec<f64> {
    let mut rayleigh = |s: f64| {
        let u: f64 = rng.sample(Open01);
        s * (-2.0 * u.ln()).sqrt()
    };
    match *model {
        FadingModel::Awgn => vec![1.0; dim],
        FadingModel::RayleighFast { sigma_h } => (0..dim).map(|_| rayleigh(sigma_h)).collect(),
        FadingModel::RayleighBlock { sigma_h, t } => {
            let m = dim / t;
            let fades: Vec<f64> = (0..m).map(|_| rayleigh(sigma_h)).collect();
            (0..dim).map(|j| fades[j % m]).collect()
        }
    }
}

/// The generator for sample `index`: stream `index` of the seeded ChaCha8,
/// so results do not depend on how samples are spread over threads.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of `ε_{diag(h)Λ_e}(σ)` over i.i.d. fading draws.
pub fn avg_flatness_mc(
    eve: &Lattice,
    model: FadingModel,
    sigma: f64,
    samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let dim = eve.ambient_dim();
    model.validate(dim)?;
    if model == FadingModel::Awgn {
        let f = flatness(eve, sigma, policy)?;
        return Ok(McEstimate {
            mean: f.value,
            std_error: 0.0,
            samples,
            seed,
        });
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let h = draw_fading(&model, dim, &mut rng);
            let faded = eve.scale_coordinates(&h)?;
            Ok(flatness(&faded, sigma, policy)?.value)
        })
        .collect::<Result<_>>()?;
    let (mean, std_error) = mean_and_std_error(&values);
    Ok(McEstimate {
        mean,
        std_error,
        samples,
        seed,
    })
}

/// Sequential compensated mean and `s/√N`, fixed order for reproducibility.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut sum = Neumaier::default();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut ss = Neumaier::default();
    for &v in values {
        ss.add((v - mean) * (v - mean));
    }
    let var = ss.value() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awgn_is_exact() {
        let z = Lattice::integer(2);
        let p = TruncationPolicy::default();
        let est = avg_flatness_mc(&z, FadingModel::Awgn, 0.4, 10, 1, &p).unwrap();
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.mean, flatness(&z, 0.4, &p).unwrap().value);
    }

    #[test]
    fn reproducible() {
        let z = Lattice::integer(2);
        let p = TruncationPolicy::default();
        let model = FadingModel::RayleighFast { sigma_h: 1.0 };
        let a = avg_flatness_mc(&z, model, 0.5, 64, 9, &p).unwrap();
        let b = avg_flatness_mc(&z, model, 0.5, 64, 9, &p).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn block_fades_repeat() {
        let mut rng = sample_rng(3, 0);
        let h = draw_fading(&FadingModel::RayleighBlock { sigma_h: 1.0, t: 2 }, 6, &mut rng);
        assert_eq!(h[0], h[3]);
        assert_eq!(h[2], h[5]);
        assert_ne!(h[0], h[1]);
    }

    #[test]
    fn rayleigh_second_moment() {
        // E[h²] = 2σ_h².
        let model = FadingModel::RayleighFast { sigma_h: 1.5 };
        let n = 20000;
        let m2: f64 = (0..n)
            .map(|i| draw_fading(&model, 1, &mut sample_rng(5, i))[0].powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((m2 - 4.5).abs() < 0.15);
    }
}
