//! Fincke–Pohst enumeration of lattice points in a ball, and the diagnostics
//! built on it (minimal vectors, well-roundedness, diversity).
//!
//! Enumeration runs over the Cholesky factor of an LLL-reduced Gram matrix.
//! Coordinates handed to visitors are with respect to the *reduced* basis;
//! [`Enumerator::to_original`] maps them back. Results that leave this module
//! ([`ShellEnumeration`], [`MinimalVectors`]) always use original coordinates.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::lll::{lll_reduce, DEFAULT_DELTA};

pub const DEFAULT_POINT_BUDGET: f64 = 1e8;

/// Squared norms closer than this are treated as one shell.
pub const SHELL_TOL: f64 = 1e-9;

/// Floor for Cholesky diagonal entries relative to the largest one.
const DIAG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Enumerator {
    original: Lattice,
    reduced: Lattice,
    transform: DMatrix<i64>,
    /// `r_ii²` of the Cholesky factor of the reduced Gram matrix.
    diag: Vec<f64>,
    /// `r_ij / r_ii` for `j > i`.
    coef: Vec<Vec<f64>>,
    /// Reduced basis columns, for the incremental point computation.
    columns: Vec<Vec<f64>>,
    budget: f64,
}

impl Enumerator {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let red = lll_reduce(lattice, DEFAULT_DELTA)?;
        let m = lattice.rank();
        let gram = red.lattice.gram();
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numeric("reduced Gram matrix lost definiteness".into()))?;
        let r = chol.l().transpose();
        let max_diag = (0..m).map(|i| r[(i, i)] * r[(i, i)]).fold(0.0, f64::max);
        let diag: Vec<f64> = (0..m)
            .map(|i| (r[(i, i)] * r[(i, i)]).max(DIAG_FLOOR * max_diag))
            .collect();
        let coef = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if j > i { r[(i, j)] / r[(i, i)] } else { 0.0 })
                    .collect()
            })
            .collect();
        let columns = (0..m)
            .map(|j| red.lattice.column(j).iter().copied().collect())
            .collect();
        Ok(Enumerator {
            original: lattice.clone(),
            reduced: red.lattice,
            transform: red.transform,
            diag,
            coef,
            columns,
            budget: DEFAULT_POINT_BUDGET,
        })
    }

    pub fn with_budget(mut self, cap: f64) -> Self {
        self.budget = cap;
        self
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn lattice(&self) -> &Lattice {
        &self.original
    }

    pub fn reduced(&self) -> &Lattice {
        &self.reduced
    }

    /// Unimodular `U` with `reduced = original · U`.
    pub fn transform(&self) -> &DMatrix<i64> {
        &self.transform
    }

    /// Squared length of the shortest reduced basis vector (an upper bound
    /// on the minimal norm).
    pub fn shortest_basis_norm_sq(&self) -> f64 {
        self.columns
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Babai bound on the covering radius, `½·sqrt(Σ‖b_i*‖²)`.
    pub fn covering_radius_bound(&self) -> f64 {
        0.5 * self.diag.iter().sum::<f64>().sqrt()
    }

    pub fn to_original(&self, z: &[i64]) -> Vec<i64> {
        let m = z.len();
        (0..m)
            .map(|i| (0..m).map(|j| self.transform[(i, j)] * z[j]).sum())
            .collect()
    }

    /// Gaussian-heuristic estimate of the number of enumeration tree nodes
    /// for a ball of squared radius `radius_sq`.
    pub fn estimated_nodes(&self, radius_sq: f64) -> f64 {
        let m = self.diag.len();
        let r = radius_sq.max(0.0).sqrt();
        let mut total = 0.0;
        let mut log_det = 0.0;
        for k in 1..=m {
            log_det += 0.5 * self.diag[m - k].ln();
            let kf = k as f64;
            let log_ball = 0.5 * kf * std::f64::consts::PI.ln() - ln_gamma(0.5 * kf + 1.0)
                + kf * r.ln();
            total += (log_ball - log_det).exp() + 1.0;
        }
        total
    }

    fn check_budget(&self, radius_sq: f64) -> Result<()> {
        let est = self.estimated_nodes(radius_sq);
        if est > self.budget {
            return Err(Error::BudgetExceeded {
                estimated: est,
                cap: self.budget,
            });
        }
        Ok(())
    }

    /// Visits one representative of every `±` pair of nonzero points with
    /// `‖x‖² ≤ radius_sq`. The callback receives reduced coordinates and the
    /// squared norm.
    pub fn for_each_half<F>(&self, radius_sq: f64, mut visit: F) -> Result<()>
    where
        F: FnMut(&[i64], f64),
    {
        self.walk(radius_sq, None, true, false, |z, _, n| visit(z, n))
    }

    /// As [`for_each_half`](Self::for_each_half), also passing the ambient vector.
    pub fn for_each_half_with_vectors<F>(&self, radius_sq: f64, visit: F) -> Result<()>
    where
        F: FnMut(&[i64], &[f64], f64),
    {
        self.walk(radius_sq, None, true, true, visit)
    }

    /// Visits every lattice point `x` (origin included) with
    /// `‖x + shift‖² ≤ radius_sq`, passing reduced coordinates and `‖x + shift‖²`.
    /// The shift must lie in the span; the caller accounts for any
    /// orthogonal component.
    pub fn for_each_shifted<F>(&self, shift_coords: &[f64], radius_sq: f64, mut visit: F) -> Result<()>
    where
        F: FnMut(&[i64], f64),
    {
        self.walk(radius_sq, Some(shift_coords), false, false, |z, _, n| {
            visit(z, n)
        })
    }

    /// Reduced-basis coordinates of a vector in the span (least squares).
    pub fn reduced_coordinates(&self, x: &nalgebra::DVector<f64>) -> Result<Vec<f64>> {
        Ok(self.reduced.coordinates_of(x)?.iter().copied().collect())
    }

    fn walk<F>(
        &self,
        radius_sq: f64,
        shift: Option<&[f64]>,
        half: bool,
        with_vectors: bool,
        mut visit: F,
    ) -> Result<()>
    where
        F: FnMut(&[i64], &[f64], f64),
    {
        if !(radius_sq >= 0.0) || !radius_sq.is_finite() {
            return Err(Error::domain(format!("radius_sq must be finite and nonnegative, got {radius_sq}")));
        }
        self.check_budget(radius_sq)?;
        let m = self.diag.len();
        let n = self.reduced.ambient_dim();
        let slack = SHELL_TOL * radius_sq.max(1.0);
        let mut state = Walk {
            en: self,
            shift,
            half,
            with_vectors,
            limit: radius_sq + slack,
            z: vec![0; m],
            partial: vec![vec![0.0; n]; if with_vectors { m + 1 } else { 0 }],
        };
        state.level(m - 1, radius_sq + slack, true, &mut visit);
        Ok(())
    }
}

struct Walk<'a> {
    en: &'a Enumerator,
    shift: Option<&'a [f64]>,
    half: bool,
    with_vectors: bool,
    limit: f64,
    z: Vec<i64>,
    /// `partial[i] = Σ_{j ≥ i} z_j b_j`, `partial[m] = 0`.
    partial: Vec<Vec<f64>>,
}

impl Walk<'_> {
    fn level<F>(&mut self, i: usize, remaining: f64, zero_above: bool, visit: &mut F)
    where
        F: FnMut(&[i64], &[f64], f64),
    {
        let en = self.en;
        let m = en.diag.len();
        let mut center = 0.0;
        for j in i + 1..m {
            let w = self.z[j] as f64 + self.shift.map_or(0.0, |s| s[j]);
            center -= en.coef[i][j] * w;
        }
        if let Some(s) = self.shift {
            center -= s[i];
        }
        let q = en.diag[i];
        let width = (remaining.max(0.0) / q).sqrt();
        let mut lo = (center - width).ceil() as i64;
        let hi = (center + width).floor() as i64;
        if self.half && zero_above {
            lo = lo.max(if i == 0 { 1 } else { 0 });
        }
        for zi in lo..=hi {
            let d = zi as f64 - center;
            let rem = remaining - q * d * d;
            if rem < 0.0 {
                continue;
            }
            self.z[i] = zi;
            if self.with_vectors {
                let (lower, upper) = self.partial.split_at_mut(i + 1);
                let dst = &mut lower[i];
                let src = &upper[0];
                let col = &en.columns[i];
                let zf = zi as f64;
                for k in 0..dst.len() {
                    dst[k] = src[k] + zf * col[k];
                }
            }
            if i == 0 {
                if !self.half && self.shift.is_none() && zero_above && zi == 0 {
                    continue;
                }
                let norm = self.limit - rem;
                let x: &[f64] = if self.with_vectors { &self.partial[0] } else { &[] };
                visit(&self.z, x, norm.max(0.0));
            } else {
                self.level(i - 1, rem, zero_above && zi == 0, visit);
            }
        }
        self.z[i] = 0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    /// Integer coordinates in the lattice's own basis.
    pub coords: Vec<i64>,
    pub norm_sq: f64,
}

/// All nonzero lattice points in a closed ball (both signs stored explicitly),
/// sorted lexicographically by coordinates.
#[derive(Debug, Clone)]
pub struct ShellEnumeration {
    pub radius_sq: f64,
    pub points: Vec<LatticePoint>,
    pub complete: bool,
}

impl ShellEnumeration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn enumerate_points(lattice: &Lattice, radius_sq: f64) -> Result<ShellEnumeration> {
    enumerate_points_with_budget(lattice, radius_sq, DEFAULT_POINT_BUDGET)
}

pub fn enumerate_points_with_budget(
    lattice: &Lattice,
    radius_sq: f64,
    cap: f64,
) -> Result<ShellEnumeration> {
    if !(radius_sq > 0.0) {
        return Err(Error::domain(format!("radius_sq must be positive, got {radius_sq}")));
    }
    let en = Enumerator::new(lattice)?.with_budget(cap);
    let mut points = Vec::new();
    en.for_each_half(radius_sq, |z, norm| {
        let orig = en.to_original(z);
        let neg: Vec<i64> = orig.iter().map(|v| -v).collect();
        points.push(LatticePoint { coords: orig, norm_sq: norm });
        points.push(LatticePoint { coords: neg, norm_sq: norm });
    })?;
    points.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(ShellEnumeration {
        radius_sq,
        points,
        complete: true,
    })
}

#[derive(Debug, Clone)]
pub struct MinimalVectors {
    pub norm_sq: f64,
    /// Integer coordinates (original basis) of every vector attaining the minimum.
    pub vectors: Vec<Vec<i64>>,
}

impl MinimalVectors {
    pub fn kissing_number(&self) -> usize {
        self.vectors.len()
    }
}

pub fn minimal_norm(lattice: &Lattice) -> Result<MinimalVectors> {
    let en = Enumerator::new(lattice)?;
    minimal_vectors_with(&en)
}

pub fn minimal_vectors_with(en: &Enumerator) -> Result<MinimalVectors> {
    let bound = en.shortest_basis_norm_sq();
    let mut best = f64::INFINITY;
    let mut found: Vec<(Vec<i64>, f64)> = Vec::new();
    en.for_each_half(bound, |z, norm| {
        if norm <= best + SHELL_TOL {
            if norm < best - SHELL_TOL {
                found.retain(|(_, n)| *n <= norm + SHELL_TOL);
            }
            best = best.min(norm);
            found.push((z.to_vec(), norm));
        }
    })?;
    found.retain(|(_, n)| *n <= best + SHELL_TOL);
    let mut vectors = Vec::with_capacity(2 * found.len());
    for (z, _) in &found {
        let v = en.to_original(z);
        vectors.push(v.iter().map(|x| -x).collect());
        vectors.push(v);
    }
    vectors.sort();
    Ok(MinimalVectors {
        norm_sq: best,
        vectors,
    })
}

/// True iff the minimal vectors span the whole rank (singular values above
/// `1e-9` relative to the largest).
pub fn is_well_rounded(lattice: &Lattice) -> Result<bool> {
    let min = minimal_norm(lattice)?;
    let n = lattice.ambient_dim();
    let cols: Vec<_> = min.vectors.iter().map(|z| lattice.point(z)).collect();
    let mat = DMatrix::from_columns(&cols);
    debug_assert_eq!(mat.nrows(), n);
    let sv = mat.singular_values();
    let max = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-9 * max).count();
    Ok(rank == lattice.rank())
}

/// Smallest number of components with `|x_i| > zero_tol` over the nonzero
/// points in the ball. A value below the ambient dimension certifies a
/// diversity failure; a full count is only a diagnostic on the ball.
pub fn diversity_lower_report(
    lattice: &Lattice,
    radius_sq: f64,
    zero_tol: Option<f64>,
) -> Result<usize> {
    let tol = zero_tol.unwrap_or(1e-9 * lattice.max_abs_entry());
    let en = Enumerator::new(lattice)?;
    let mut best = lattice.ambient_dim();
    en.for_each_half_with_vectors(radius_sq, |_, x, _| {
        let nz = x.iter().filter(|v| v.abs() > tol).count();
        best = best.min(nz);
    })?;
    Ok(best)
}
