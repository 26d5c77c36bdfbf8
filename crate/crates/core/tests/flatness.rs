//! Flatness factor oracles: Poisson duality, scaling, product structure
//! and the shaping-adjusted variant.

use std::f64::consts::PI;

use latsec_core::catalog;
use latsec_core::flatness::{
    flatness, flatness_dual, flatness_primal, shaping_adjusted_flatness, Flatness, FlatnessCurve, FlatnessPath,
};
use latsec_core::theta::TruncationPolicy;
use latsec_core::Lattice;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn policy() -> TruncationPolicy {
    TruncationPolicy::adaptive(1e-10)
}

fn sigma_grid() -> Vec<f64> {
    (0..10).map(|i| 0.1 + 1.9 * i as f64 / 9.0).collect()
}

fn random_lattice(rng: &mut ChaCha8Rng, n: usize) -> Lattice {
    let b = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.5..0.5));
    Lattice::new(b).unwrap()
}

fn assert_dual_agreement(l: &Lattice, sigma: f64) {
    let p = flatness_primal(l, sigma, &policy()).unwrap();
    let d = flatness_dual(l, sigma, &policy()).unwrap();
    let gap = (p.value - d.value).abs();
    assert!(
        gap <= p.tail_estimate + d.tail_estimate,
        "σ={sigma}: primal {} dual {} gap {gap} tails {} {}",
        p.value,
        d.value,
        p.tail_estimate,
        d.tail_estimate
    );
}

#[test]
fn primal_and_dual_agree_on_small_lattices() {
    let mut lattices: Vec<Lattice> = (1..=4).map(Lattice::integer).collect();
    lattices.push(catalog::make("BCC", false).unwrap());
    lattices.push(catalog::make("D4", false).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    lattices.extend((0..3).map(|_| random_lattice(&mut rng, 3)));
    for l in &lattices {
        for s in sigma_grid() {
            assert_dual_agreement(l, s);
        }
    }
}

#[test]
fn e8_primal_and_dual_agree_at_point_three() {
    assert_dual_agreement(&catalog::make("E8", false).unwrap(), 0.3);
}

/// `Θ_Z(q)` summed directly, independent of the enumerator.
fn theta_z(q: f64) -> f64 {
    1.0 + 2.0 * (1..200).map(|k| q.powi(k * k)).sum::<f64>()
}

#[test]
fn integer_lattice_matches_one_dimensional_power() {
    for n in [1usize, 3, 5] {
        for s in [0.2, 0.45, 0.9] {
            let primal = (2.0 * PI * s * s).powf(-0.5 * n as f64) * theta_z((-1.0 / (2.0 * s * s)).exp()).powi(n as i32) - 1.0;
            let dual = theta_z((-2.0 * PI * PI * s * s).exp()).powi(n as i32) - 1.0;
            assert!((primal - dual).abs() <= 1e-10 * (1.0 + dual), "{primal} {dual}");
            let f = flatness(&Lattice::integer(n), s, &policy()).unwrap();
            assert!((f.value - dual).abs() <= 1e-10 * (1.0 + dual), "n={n} σ={s}: {} vs {dual}", f.value);
        }
    }
}

#[test]
fn scaling_law() {
    let e8 = catalog::make("E8", true).unwrap();
    let d4 = catalog::make("D4", false).unwrap();
    for l in [&e8, &d4] {
        for a in [0.5, 3f64.powf(0.125), 2.0, 1.37] {
            for s in [0.3, 0.6, 1.1] {
                let base = flatness(l, s, &policy()).unwrap().value;
                let scaled = flatness(&l.scale(a).unwrap(), a * s, &policy()).unwrap().value;
                assert!((base - scaled).abs() <= 1e-8 * base.abs().max(1e-12), "a={a} σ={s}: {base} {scaled}");
            }
        }
    }
}

#[test]
fn strictly_decreasing_in_sigma() {
    for name in ["Z4", "E8", "BCC"] {
        let l = catalog::make(name, true).unwrap();
        let vals: Vec<f64> = (0..12)
            .map(|i| flatness(&l, 0.2 + 0.05 * i as f64, &policy()).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{name}: {vals:?}");
    }
}

#[test]
fn dispatcher_agrees_with_both_paths() {
    let z4 = Lattice::integer(4);
    for s in sigma_grid() {
        let f = flatness(&z4, s, &policy()).unwrap();
        for other in [flatness_primal(&z4, s, &policy()).unwrap(), flatness_dual(&z4, s, &policy()).unwrap()] {
            assert!((f.value - other.value).abs() <= f.tail_estimate + other.tail_estimate);
        }
    }
    assert_eq!(flatness(&z4, 0.1, &policy()).unwrap().path, FlatnessPath::Primal);
    assert_eq!(flatness(&z4, 2.0, &policy()).unwrap().path, FlatnessPath::Dual);
}

#[test]
fn e8_flatter_than_z8() {
    let e8 = flatness(&catalog::make("E8", true).unwrap(), 0.25, &policy()).unwrap();
    let z8 = flatness(&Lattice::integer(8), 0.25, &policy()).unwrap();
    assert!(e8.value < z8.value);
}

#[test]
fn curve_matches_pointwise_evaluation() {
    let l = catalog::make("A8*", true).unwrap();
    let sigmas = sigma_grid();
    let curve = FlatnessCurve::build(&l, &sigmas, &policy()).unwrap();
    for &s in &sigmas {
        let a = curve.evaluate(s);
        let b = flatness(&l, s, &policy()).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_estimate + b.tail_estimate);
    }
}

#[test]
fn underflowing_dual_weight_is_exact() {
    // e^{−2π²σ²} underflows; only the origin survives.
    let f = flatness_dual(&Lattice::integer(2), 20.0, &policy()).unwrap();
    assert_eq!(f.value, 0.0);
}

/// Direct dual series `Σ_{t∈Z^n} Π_i exp(−2π² t_i²/w_i) − 1`, one axis at a time.
fn weighted_z_dual(weights: &[f64]) -> f64 {
    weights
        .iter()
        .map(|w| theta_z((-2.0 * PI * PI / w).exp()))
        .product::<f64>()
        - 1.0
}

#[test]
fn shaping_matches_direct_series_on_integer_lattice() {
    let h = [1.0, 1.0, 1.0, 1.0];
    let sigma = 0.4;
    let f = shaping_adjusted_flatness(&Lattice::integer(4), &h, sigma, sigma, &policy()).unwrap();
    let w: Vec<f64> = h.iter().map(|x| x * x / (sigma * sigma) + 1.0 / (sigma * sigma)).collect();
    let oracle = weighted_z_dual(&w);
    assert!((f.value - oracle).abs() <= 1e-10 * (1.0 + oracle), "{} {oracle}", f.value);
    // The same as the flatness of √2·Z⁴ at σ.
    let g = flatness(&Lattice::integer(4).scale(2f64.sqrt()).unwrap(), sigma, &policy()).unwrap();
    assert!((f.value - g.value).abs() <= 1e-9 * (1.0 + g.value));
}

fn shaping_checks(l: &Lattice, rng: &mut ChaCha8Rng) {
    let n = l.ambient_dim();
    let sigma = 0.5;
    for _ in 0..3 {
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let limit = flatness(&l.scale_coordinates(&h).unwrap(), sigma, &policy()).unwrap().value;
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let ss = 0.2 * 1.5f64.powi(k);
            let f: Flatness = shaping_adjusted_flatness(l, &h, sigma, ss, &policy()).unwrap();
            assert!(f.value < prev, "not decreasing at σ_s={ss}");
            assert!(f.value >= limit * (1.0 - 1e-9));
            prev = f.value;
        }
        let far = shaping_adjusted_flatness(l, &h, sigma, 1e6, &policy()).unwrap().value;
        assert!((far - limit).abs() <= 1e-6 * limit, "{far} {limit}");
    }
}

#[test]
fn shaping_decreases_to_faded_flatness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    shaping_checks(&Lattice::integer(4), &mut rng);
    shaping_checks(&catalog::make("D4", true).unwrap(), &mut rng);
}
