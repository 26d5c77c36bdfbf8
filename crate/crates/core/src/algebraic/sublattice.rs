//! Power-of-two rescaling of reduced generators so that every generator is
//! within a factor 2 of the shortest one.

use nalgebra::DMatrix;

use crate::enumerate::SHELL_TOL;
use crate::error::Result;
use crate::lattice::Lattice;
use crate::lll::{lll_reduce, DEFAULT_DELTA};

use super::field::AlgebraicLattice;

#[derive(Debug, Clone)]
pub struct SublatticeResult {
    /// `Λ′`, generated by `m₁, 2^{k_2}m₂, …, 2^{k_n}m_n` (not renormalized).
    pub lattice: Lattice,
    /// `k_i = ⌈log₂(‖m₁‖/‖m_i‖)⌉ ≤ 0`, with `k_1 = 0`.
    pub exponents: Vec<i32>,
    /// Another reduced vector ties with `m₁` in length.
    pub ambiguous: bool,
    /// The LLL-reduced basis `m₁, …, m_n` of the input lattice.
    pub reduced: Lattice,
}

impl SublatticeResult {
    /// `max |k_i|`; `2^{max|k_i|}·Λ′` is a sublattice of the input.
    pub fn max_shift(&self) -> u32 {
        self.exponents.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// `‖2^{k_i}m_i‖/‖m₁‖`, each in `[1, 2)`.
    pub fn generator_ratios(&self) -> Vec<f64> {
        let first = self.lattice.column(0).norm();
        (0..self.lattice.rank()).map(|j| self.lattice.column(j).norm() / first).collect()
    }
}

pub fn sublattice_procedure(al: &AlgebraicLattice) -> Result<SublatticeResult> {
    sublattice_of(&al.lattice)
}

/// The procedure for any lattice whose first basis vector should be kept
/// as `m₁` when it is shortest (LLL never moves a shortest first vector).
pub fn sublattice_of(lattice: &Lattice) -> Result<SublatticeResult> {
    let reduced = lll_reduce(lattice, DEFAULT_DELTA)?.lattice;
    let n = reduced.rank();
    let mut cols: Vec<_> = (0..n).map(|j| reduced.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.norm_squared()).collect();
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = SHELL_TOL * min.max(1.0);
    // Shortest reduced vector, ties broken lexicographically on entries.
    let mut candidates: Vec<usize> = (0..n).filter(|&j| norms[j] <= min + tol).collect();
    let ambiguous = candidates.len() > 1;
    candidates.sort_by(|&a, &b| {
        cols[a]
            .iter()
            .zip(cols[b].iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let first = candidates[0];
    cols.swap(0, first);
    if cols[0].sum() < 0.0 {
        cols[0] = -cols[0].clone();
    }
    let m1 = cols[0].norm();
    let mut exponents = vec![0i32];
    for col in cols.iter_mut().skip(1) {
        let k = (m1 / col.norm()).log2().ceil() as i32;
        *col *= 2f64.powi(k);
        exponents.push(k);
    }
    let mut out = Lattice::new(DMatrix::from_columns(&cols))?;
    if let Some(l) = lattice.label() {
        out = out.with_label(format!("{l}'"));
    }
    Ok(SublatticeResult {
        lattice: out,
        exponents,
        ambiguous,
        reduced,
    })
}
