//! Lattices given by a generator matrix whose columns are the basis vectors.
//!
//! A [`Lattice`] of rank `m` lives in `R^n` with `1 <= m <= n`. Everything
//! downstream (enumeration, theta series, bounds) consumes this type.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which columns count as dependent.
const RANK_TOL: f64 = 1e-12;

/// Eigenvalue floor used when forming the symmetric square root of a Gram matrix.
const SQRT_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    label: Option<String>,
}

/// Gram matrix of a basis with its Cholesky factor and symmetric square root.
#[derive(Debug, Clone)]
pub struct GramDecomposition {
    pub gram: DMatrix<f64>,
    /// Upper-triangular `R` with `RᵀR = gram`.
    pub cholesky_factor: DMatrix<f64>,
    /// Symmetric `Q` with `QᵀQ = gram`.
    pub sqrt_factor: DMatrix<f64>,
}

/// Result of [`Lattice::sublattice`].
#[derive(Debug, Clone)]
pub struct Sublattice {
    pub lattice: Lattice,
    /// `|det Z|`, present when the coordinate matrix is square.
    pub index: Option<u64>,
}

impl Lattice {
    /// Builds a lattice from an `n × m` generator matrix (columns are generators).
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (n, m) = basis.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidLattice("empty basis".into()));
        }
        if m > n {
            return Err(Error::InvalidLattice(format!(
                "rank {m} exceeds ambient dimension {n}"
            )));
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLattice("non-finite basis entry".into()));
        }
        let sv = basis.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(max > 0.0) || min <= RANK_TOL * max {
            return Err(Error::InvalidLattice(
                "basis columns are linearly dependent".into(),
            ));
        }
        Ok(Lattice { basis, label: None })
    }

    /// Builds a lattice from a list of basis vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m = columns.len();
        if m == 0 {
            return Err(Error::InvalidLattice("empty basis".into()));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("basis columns differ in length".into()));
        }
        Lattice::new(DMatrix::from_fn(n, m, |i, j| columns[j][i]))
    }

    /// Builds a full-rank lattice realizing the given Gram matrix via its
    /// Cholesky factor.
    pub fn from_gram(gram: &DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::Shape("Gram matrix must be square".into()));
        }
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidLattice("Gram matrix is not positive definite".into()))?;
        Lattice::new(chol.l().transpose())
    }

    /// The integer lattice `Z^n`.
    pub fn integer(n: usize) -> Self {
        Lattice {
            basis: DMatrix::identity(n, n),
            label: Some(format!("Z{n}")),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.basis.transpose() * &self.basis
    }

    pub fn gram_decomposition(&self) -> Result<GramDecomposition> {
        let gram = self.gram();
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidLattice("Gram matrix is not positive definite".into()))?;
        let cholesky_factor = chol.l().transpose();
        let sqrt_factor = symmetric_sqrt(&gram);
        Ok(GramDecomposition {
            gram,
            cholesky_factor,
            sqrt_factor,
        })
    }

    /// `sqrt(det(BᵀB))`, the m-dimensional volume of a fundamental parallelotope.
    pub fn volume(&self) -> f64 {
        if self.is_full_rank() {
            return self.basis.determinant().abs();
        }
        match self.gram().cholesky() {
            Some(c) => c.l().diagonal().iter().product::<f64>(),
            None => 0.0,
        }
    }

    /// The dual lattice, generated by the inverse transpose of the basis.
    pub fn dual(&self) -> Result<Lattice> {
        if !self.is_full_rank() {
            return Err(Error::UnsupportedRank {
                rank: self.rank(),
                ambient: self.ambient_dim(),
            });
        }
        let inv = self
            .basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("basis matrix is not invertible".into()))?;
        let mut dual = Lattice::new(inv.transpose())?;
        dual.label = self.label.as_ref().map(|l| format!("{l}*"));
        Ok(dual)
    }

    /// Sublattice generated by the columns of `B·Z` for an integer `m × k` matrix `Z`.
    pub fn sublattice(&self, coords: &DMatrix<i64>) -> Result<Sublattice> {
        if coords.nrows() != self.rank() {
            return Err(Error::Shape(format!(
                "coordinate matrix has {} rows, lattice rank is {}",
                coords.nrows(),
                self.rank()
            )));
        }
        let zf = coords.map(|v| v as f64);
        let lattice = Lattice::new(&self.basis * zf)
            .map_err(|_| Error::InvalidSublattice("generators are linearly dependent".into()))?;
        let index = if coords.is_square() {
            Some(integer_determinant(coords).unsigned_abs() as u64)
        } else {
            None
        };
        Ok(Sublattice { lattice, index })
    }

    /// The lattice `aΛ`.
    pub fn scale(&self, a: f64) -> Result<Lattice> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("scale factor must be positive, got {a}")));
        }
        Ok(Lattice {
            basis: &self.basis * a,
            label: self.label.clone(),
        })
    }

    /// Scale factor `volume^(-1/m)` that brings the lattice to unit volume.
    pub fn unit_volume_factor(&self) -> f64 {
        self.volume().powf(-1.0 / self.rank() as f64)
    }

    pub fn unit_volume(&self) -> Lattice {
        let a = self.unit_volume_factor();
        Lattice {
            basis: &self.basis * a,
            label: self.label.clone(),
        }
    }

    /// Image of the lattice under a linear map `R^n → R^k` (for instance a fading matrix).
    pub fn transform(&self, map: &DMatrix<f64>) -> Result<Lattice> {
        if map.ncols() != self.ambient_dim() {
            return Err(Error::Shape(format!(
                "map has {} columns, ambient dimension is {}",
                map.ncols(),
                self.ambient_dim()
            )));
        }
        Lattice::new(map * &self.basis)
    }

    /// `diag(h)·Λ`.
    pub fn scale_coordinates(&self, h: &[f64]) -> Result<Lattice> {
        if h.len() != self.ambient_dim() {
            return Err(Error::Shape(format!(
                "{} weights for ambient dimension {}",
                h.len(),
                self.ambient_dim()
            )));
        }
        let mut basis = self.basis.clone();
        for (i, mut row) in basis.row_iter_mut().enumerate() {
            row *= h[i];
        }
        Lattice::new(basis)
    }

    /// Orthogonal direct sum with block-diagonal basis.
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (n1, m1) = self.basis.shape();
        let (n2, m2) = other.basis.shape();
        let mut basis = DMatrix::zeros(n1 + n2, m1 + m2);
        basis.view_mut((0, 0), (n1, m1)).copy_from(&self.basis);
        basis.view_mut((n1, m1), (n2, m2)).copy_from(&other.basis);
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            _ => None,
        };
        Lattice { basis, label }
    }

    /// The lattice point `B·z`.
    pub fn point(&self, z: &[i64]) -> DVector<f64> {
        assert_eq!(z.len(), self.rank(), "coordinate vector has wrong length");
        let mut x = DVector::zeros(self.ambient_dim());
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0 {
                x.axpy(zj as f64, &self.basis.column(j), 1.0);
            }
        }
        x
    }

    /// Least-squares real coordinates of `x` in this basis.
    pub fn coordinates_of(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.ambient_dim() {
            return Err(Error::Shape("vector length differs from ambient dimension".into()));
        }
        let gram = self.gram();
        let rhs = self.basis.transpose() * x;
        gram.cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::Numeric("singular Gram matrix".into()))
    }

    /// Integer coordinates of `x`, if every coordinate is within `tol` of an
    /// integer and `x` lies in the span.
    pub fn integer_coordinates(&self, x: &DVector<f64>, tol: f64) -> Option<Vec<i64>> {
        let c = self.coordinates_of(x).ok()?;
        let z: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        if c.iter().zip(&z).any(|(v, r)| (v - *r as f64).abs() > tol) {
            return None;
        }
        let residual = (self.point(&z) - x).norm();
        let scale = x.norm().max(1.0);
        (residual <= tol * scale).then_some(z)
    }

    /// Integer matrix `Z` with `other = self·Z`, if `other` is a sublattice
    /// (coordinates within `tol` of integers).
    pub fn sublattice_coordinates(&self, other: &Lattice, tol: f64) -> Option<DMatrix<i64>> {
        if other.ambient_dim() != self.ambient_dim() {
            return None;
        }
        let mut z = DMatrix::zeros(self.rank(), other.rank());
        for j in 0..other.rank() {
            let col = self.integer_coordinates(&other.column(j), tol)?;
            for (i, v) in col.into_iter().enumerate() {
                z[(i, j)] = v;
            }
        }
        Some(z)
    }

    /// Largest absolute basis entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.basis.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// Symmetric square root of a positive semidefinite matrix, eigenvalues floored.
pub fn symmetric_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.max().max(0.0);
    let floor = SQRT_EIGEN_FLOOR * max.max(f64::MIN_POSITIVE);
    let d = eig.eigenvalues.map(|v| v.max(floor).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Exact determinant of a small integer matrix (Bareiss fraction-free elimination).
pub fn integer_determinant(a: &DMatrix<i64>) -> i128 {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Interchange format: `{ "label", "ambient_dim", "rank", "basis_columns" }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    pub label: String,
    pub ambient_dim: usize,
    pub rank: usize,
    pub basis_columns: Vec<Vec<f64>>,
}

impl From<&Lattice> for LatticeJson {
    fn from(l: &Lattice) -> Self {
        LatticeJson {
            label: l.label.clone().unwrap_or_default(),
            ambient_dim: l.ambient_dim(),
            rank: l.rank(),
            basis_columns: (0..l.rank())
                .map(|j| l.basis.column(j).iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<LatticeJson> for Lattice {
    type Error = Error;

    fn try_from(j: LatticeJson) -> Result<Self> {
        if j.basis_columns.len() != j.rank {
            return Err(Error::Parse(format!(
                "rank {} but {} basis columns",
                j.rank,
                j.basis_columns.len()
            )));
        }
        if let Some(c) = j.basis_columns.iter().find(|c| c.len() != j.ambient_dim) {
            return Err(Error::Parse(format!(
                "ambient_dim {} but a column has {} entries",
                j.ambient_dim,
                c.len()
            )));
        }
        let mut l = Lattice::from_columns(&j.basis_columns)?;
        if !j.label.is_empty() {
            l.label = Some(j.label);
        }
        Ok(l)
    }
}

impl Lattice {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LatticeJson::from(self)).expect("lattice serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: LatticeJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Lattice::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bcc() -> Lattice {
        Lattice::from_columns(&[
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(Lattice::integer(3).volume(), 1.0);
        assert!((bcc().volume() - 4.0).abs() < 1e-12);
        // rank-1 lattice spanned by (1,1,1) in R^3
        let line = Lattice::from_columns(&[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!((line.volume() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dependent_columns_rejected() {
        let err = Lattice::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidLattice(_)));
        assert!(Lattice::from_columns(&[vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn dual_examples() {
        let z = Lattice::integer(4);
        assert_eq!(z.dual().unwrap().basis(), z.basis());
        let a = Lattice::from_columns(&[vec![2.5]]).unwrap();
        assert!((a.dual().unwrap().basis()[(0, 0)] - 0.4).abs() < 1e-15);
        let b = bcc();
        assert!((b.dual().unwrap().volume() - 0.25).abs() < 1e-12);
        let line = Lattice::from_columns(&[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(line.dual(), Err(Error::UnsupportedRank { .. })));
    }

    #[test]
    fn sublattice_index() {
        let z8 = Lattice::integer(8);
        let two = DMatrix::<i64>::identity(8, 8) * 2;
        let s = z8.sublattice(&two).unwrap();
        assert_eq!(s.index, Some(256));
        assert!((s.lattice.volume() - 256.0).abs() < 1e-9);

        let z2 = Lattice::integer(2);
        let zm = DMatrix::from_row_slice(2, 2, &[1, 0, 1, 2]);
        assert_eq!(z2.sublattice(&zm).unwrap().index, Some(2));

        let id = DMatrix::<i64>::identity(3, 3);
        let same = bcc().sublattice(&id).unwrap();
        assert_eq!(same.index, Some(1));
        assert_eq!(same.lattice.basis(), bcc().basis());

        let dep = DMatrix::from_row_slice(2, 2, &[1, 2, 1, 2]);
        assert!(matches!(
            z2.sublattice(&dep),
            Err(Error::InvalidSublattice(_))
        ));
    }

    #[test]
    fn scale_examples() {
        let z1 = Lattice::integer(1);
        assert_eq!(z1.scale(2.0).unwrap().volume(), 2.0);
        assert!(z1.scale(0.0).is_err());
        assert!(z1.scale(-1.0).is_err());
        let u = bcc().unit_volume();
        assert!((u.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_decomposition_factors() {
        let g = bcc().gram_decomposition().unwrap();
        let r = &g.cholesky_factor;
        assert!((r.transpose() * r - &g.gram).norm() <= 1e-10 * g.gram.norm());
        let q = &g.sqrt_factor;
        assert!((q.transpose() * q - &g.gram).norm() <= 1e-10 * g.gram.norm());
    }

    #[test]
    fn integer_determinant_matches_float() {
        let m = DMatrix::from_row_slice(3, 3, &[2, -1, 0, -1, 2, -1, 0, -1, 2]);
        assert_eq!(integer_determinant(&m), 4);
        let s = DMatrix::from_row_slice(2, 2, &[0, 1, 1, 0]);
        assert_eq!(integer_determinant(&s), -1);
    }

    #[test]
    fn json_round_trip_and_rejects_mismatch() {
        let l = bcc().with_label("BCC");
        let back = Lattice::from_json(&l.to_json()).unwrap();
        assert_eq!(back, l);
        let bad = r#"{"label":"x","ambient_dim":3,"rank":1,"basis_columns":[[1.0,2.0]]}"#;
        assert!(matches!(Lattice::from_json(bad), Err(Error::Parse(_))));
        let bad_rank = r#"{"label":"x","ambient_dim":2,"rank":2,"basis_columns":[[1.0,2.0]]}"#;
        assert!(matches!(Lattice::from_json(bad_rank), Err(Error::Parse(_))));
    }

    #[test]
    fn sublattice_coordinates_recovered() {
        let b = bcc();
        let z = DMatrix::from_row_slice(3, 3, &[1, 2, 0, 0, 1, 0, 3, 0, 2]);
        let s = b.sublattice(&z).unwrap().lattice;
        assert_eq!(b.sublattice_coordinates(&s, 1e-9).unwrap(), z);
        let half = b.scale(0.5).unwrap();
        assert!(b.sublattice_coordinates(&half, 1e-9).is_none());
    }
}
