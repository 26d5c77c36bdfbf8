//! Floating-point LLL reduction with an exact integer transform.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const DEFAULT_DELTA: f64 = 0.99;

/// Size-reduction threshold; slightly above 1/2 to absorb rounding.
const ETA: f64 = 0.5 + 1e-9;

#[derive(Debug, Clone)]
pub struct LllReduction {
    pub lattice: Lattice,
    /// Unimodular `U` with `reduced_basis = basis · U`.
    pub transform: DMatrix<i64>,
}

/// LLL-reduces the basis of `lattice` with Lovász parameter `delta ∈ (1/4, 1]`.
pub fn lll_reduce(lattice: &Lattice, delta: f64) -> Result<LllReduction> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(Error::domain(format!("LLL delta must lie in (1/4, 1], got {delta}")));
    }
    let m = lattice.rank();
    let mut b: Vec<DVector<f64>> = (0..m).map(|j| lattice.column(j)).collect();
    let mut u = DMatrix::<i64>::identity(m, m);
    let mut mu = vec![vec![0.0; m]; m];
    let mut bstar = vec![0.0; m];
    gram_schmidt(&b, &mut mu, &mut bstar);

    let mut k = 1;
    let mut iterations = 0usize;
    while k < m {
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(Error::Numeric("LLL did not terminate".into()));
        }
        for j in (0..k).rev() {
            if mu[k][j].abs() > ETA {
                let r = mu[k][j].round();
                let ri = r as i64;
                let bj = b[j].clone();
                b[k].axpy(-r, &bj, 1.0);
                for row in 0..m {
                    u[(row, k)] -= ri * u[(row, j)];
                }
                for i in 0..j {
                    mu[k][i] -= r * mu[j][i];
                }
                mu[k][j] -= r;
            }
        }
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap_columns(k, k - 1);
            gram_schmidt(&b, &mut mu, &mut bstar);
            k = (k - 1).max(1);
        }
    }

    let basis = DMatrix::from_columns(&b);
    let mut reduced = Lattice::new(basis)?;
    if let Some(l) = lattice.label() {
        reduced = reduced.with_label(l);
    }
    Ok(LllReduction {
        lattice: reduced,
        transform: u,
    })
}

fn gram_schmidt(b: &[DVector<f64>], mu: &mut [Vec<f64>], bstar: &mut [f64]) {
    let m = b.len();
    let mut star: Vec<DVector<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = b[i].dot(&star[j]) / bstar[j];
            v.axpy(-mu[i][j], &star[j], 1.0);
        }
        bstar[i] = v.norm_squared();
        star.push(v);
    }
}

/// Checks size reduction and the Lovász condition for the basis as given.
pub fn is_lll_reduced(lattice: &Lattice, delta: f64) -> bool {
    let m = lattice.rank();
    let b: Vec<DVector<f64>> = (0..m).map(|j| lattice.column(j)).collect();
    let mut mu = vec![vec![0.0; m]; m];
    let mut bstar = vec![0.0; m];
    gram_schmidt(&b, &mut mu, &mut bstar);
    for i in 1..m {
        if (0..i).any(|j| mu[i][j].abs() > ETA + 1e-9) {
            return false;
        }
        let rhs = (delta - mu[i][i - 1] * mu[i][i - 1]) * bstar[i - 1];
        if bstar[i] < rhs * (1.0 - 1e-9) {
            return false;
        }
    }
    true
}
