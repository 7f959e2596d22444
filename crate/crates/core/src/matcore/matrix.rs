use std::fmt;

use faer::{c64, Mat, MatRef};

use crate::error::{Result, VlabError};

/// Identifies the orthonormal basis an operator matrix is written in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisTag(String);

impl BasisTag {
    pub fn new(tag: impl Into<String>) -> Self {
        BasisTag(tag.into())
    }

    /// Discrete-series sector basis `|n,k>`, `n < dim`.
    pub fn sector(k: f64, dim: usize) -> Self {
        BasisTag(format!("sector:k={k}:N={dim}"))
    }

    /// Full-line harmonic oscillator basis.
    pub fn fock_line(dim: usize) -> Self {
        BasisTag(format!("fockline:N={dim}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Leading-block projector: rows and columns `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    size: usize,
}

impl Window {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(VlabError::InvalidParameter("window size must be positive".into()));
        }
        Ok(Window { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Errors unless the window fits inside `limit` (itself at most `dim`).
    pub fn check(&self, dim: usize, limit: usize) -> Result<()> {
        let limit = limit.min(dim);
        if self.size > limit {
            return Err(VlabError::WindowOutOfRange { window: self.size, dim, limit });
        }
        Ok(())
    }
}

/// Dense complex matrix tagged with its row and column bases.
///
/// Square operators acting inside one basis carry the same tag on both
/// sides. Maps between two sector bases (overlaps, intertwiners) carry
/// distinct tags, and products check that inner bases line up.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: Mat<c64>,
    rows: BasisTag,
    cols: BasisTag,
}

impl OperatorMatrix {
    pub fn from_mat(entries: Mat<c64>, basis: BasisTag) -> Result<Self> {
        Self::from_mat_between(entries, basis.clone(), basis)
    }

    /// Matrix of a map from the `cols` basis into the `rows` basis.
    pub fn from_mat_between(entries: Mat<c64>, rows: BasisTag, cols: BasisTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(VlabError::DimensionMismatch { left: entries.nrows(), right: entries.ncols() });
        }
        if entries.nrows() == 0 {
            return Err(VlabError::InvalidParameter("dimension must be positive".into()));
        }
        Ok(OperatorMatrix { entries, rows, cols })
    }

    pub fn from_fn(dim: usize, basis: BasisTag, f: impl FnMut(usize, usize) -> c64) -> Self {
        let dim = dim.max(1);
        OperatorMatrix { entries: Mat::from_fn(dim, dim, f), rows: basis.clone(), cols: basis }
    }

    pub fn zeros(dim: usize, basis: BasisTag) -> Self {
        Self::from_fn(dim, basis, |_, _| c64::new(0.0, 0.0))
    }

    pub fn identity(dim: usize, basis: BasisTag) -> Self {
        Self::from_fn(dim, basis, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
    }

    pub fn diagonal(values: &[c64], basis: BasisTag) -> Self {
        Self::from_fn(values.len(), basis, |i, j| if i == j { values[i] } else { c64::new(0.0, 0.0) })
    }

    pub fn real_diagonal(values: &[f64], basis: BasisTag) -> Self {
        Self::from_fn(values.len(), basis, |i, j| if i == j { c64::new(values[i], 0.0) } else { c64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn row_basis(&self) -> &BasisTag {
        &self.rows
    }

    pub fn col_basis(&self) -> &BasisTag {
        &self.cols
    }

    /// Single tag for square operators, `rows<-cols` for maps.
    pub fn basis_tag(&self) -> String {
        if self.rows == self.cols {
            self.rows.to_string()
        } else {
            format!("{}<-{}", self.rows, self.cols)
        }
    }

    pub fn is_endomorphism(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.entries
    }

    pub fn with_basis(self, rows: BasisTag, cols: BasisTag) -> Self {
        OperatorMatrix { entries: self.entries, rows, cols }
    }

    pub fn identity_like(&self) -> Self {
        Self::identity(self.dim(), self.rows.clone())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(VlabError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(VlabError::BasisMismatch { left: self.basis_tag(), right: other.basis_tag() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(OperatorMatrix { entries: &self.entries + &other.entries, rows: self.rows.clone(), cols: self.cols.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(OperatorMatrix { entries: &self.entries - &other.entries, rows: self.rows.clone(), cols: self.cols.clone() })
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: c64) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] + c * other.entries[(i, j)]);
        Ok(OperatorMatrix { entries, rows: self.rows.clone(), cols: self.cols.clone() })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(VlabError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        if self.cols != other.rows {
            return Err(VlabError::BasisMismatch { left: self.basis_tag(), right: other.basis_tag() });
        }
        Ok(OperatorMatrix {
            entries: &self.entries * &other.entries,
            rows: self.rows.clone(),
            cols: other.cols.clone(),
        })
    }

    pub fn scale(&self, c: c64) -> Self {
        let entries = Mat::from_fn(self.dim(), self.dim(), |i, j| c * self.entries[(i, j)]);
        OperatorMatrix { entries, rows: self.rows.clone(), cols: self.cols.clone() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(c64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { entries: self.entries.adjoint().to_owned(), rows: self.cols.clone(), cols: self.rows.clone() }
    }

    pub fn transpose(&self) -> Self {
        OperatorMatrix {
            entries: self.entries.transpose().to_owned(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.block_max_abs(self.dim())
    }

    /// Max-abs entry over the leading `m x m` block.
    pub fn block_max_abs(&self, m: usize) -> f64 {
        let m = m.min(self.dim());
        let mut out = 0.0f64;
        for j in 0..m {
            for i in 0..m {
                out = out.max(self.entries[(i, j)].norm());
            }
        }
        out
    }

    /// Max-abs entry of `A - A^H`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut out = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                out = out.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        out
    }

    /// Leading `m x m` block as a new matrix.
    pub fn leading_block(&self, m: usize) -> Self {
        let m = m.clamp(1, self.dim());
        OperatorMatrix {
            entries: Mat::from_fn(m, m, |i, j| self.entries[(i, j)]),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        }
    }

    /// Applies the matrix to a coefficient vector.
    pub fn apply(&self, v: &[c64]) -> Result<Vec<c64>> {
        if v.len() != self.dim() {
            return Err(VlabError::DimensionMismatch { left: self.dim(), right: v.len() });
        }
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, vj) in v.iter().enumerate() {
            if *vj == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[(i, j)] * vj;
            }
        }
        Ok(out)
    }
}

fn diagonal_of(a: &OperatorMatrix) -> Option<Vec<c64>> {
    let n = a.dim();
    let m = a.as_mat();
    let zero = c64::new(0.0, 0.0);
    let off_zero = (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == zero));
    off_zero.then(|| (0..n).map(|i| m[(i, i)]).collect())
}

/// `AB - BA`. A diagonal operand is handled entrywise as `(d_i - d_j) B_ij`,
/// which avoids rounding the two large products separately.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let same = a.dim() == b.dim() && a.rows == b.rows && a.cols == b.cols && a.rows == a.cols;
    if same {
        if let Some(d) = diagonal_of(a) {
            let mb = b.as_mat();
            let entries = Mat::from_fn(a.dim(), a.dim(), |i, j| (d[i] - d[j]) * mb[(i, j)]);
            return Ok(OperatorMatrix { entries, rows: a.rows.clone(), cols: a.cols.clone() });
        }
        if let Some(d) = diagonal_of(b) {
            let ma = a.as_mat();
            let entries = Mat::from_fn(a.dim(), a.dim(), |i, j| ma[(i, j)] * (d[j] - d[i]));
            return Ok(OperatorMatrix { entries, rows: a.rows.clone(), cols: a.cols.clone() });
        }
    }
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// `(A + A^H) / 2`, exactly self-adjoint.
pub fn hermitian_part(a: &OperatorMatrix) -> OperatorMatrix {
    let n = a.dim();
    let m = a.as_mat();
    let entries = Mat::from_fn(n, n, |i, j| {
        if i <= j {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        } else {
            (m[(j, i)] + m[(i, j)].conj()).conj() * 0.5
        }
    });
    OperatorMatrix { entries, rows: a.rows.clone(), cols: a.cols.clone() }
}

/// `(A - A^H) / 2`.
pub fn anti_hermitian_part(a: &OperatorMatrix) -> OperatorMatrix {
    let n = a.dim();
    let m = a.as_mat();
    let entries = Mat::from_fn(n, n, |i, j| (m[(i, j)] - m[(j, i)].conj()) * 0.5);
    OperatorMatrix { entries, rows: a.rows.clone(), cols: a.cols.clone() }
}

/// Max-abs entry of `A - B` over the leading window block.
pub fn window_defect(a: &OperatorMatrix, b: &OperatorMatrix, w: Window) -> Result<f64> {
    a.check_same_shape(b)?;
    w.check(a.dim(), a.dim())?;
    let (ma, mb) = (a.as_mat(), b.as_mat());
    let mut out = 0.0f64;
    for j in 0..w.size() {
        for i in 0..w.size() {
            out = out.max((ma[(i, j)] - mb[(i, j)]).norm());
        }
    }
    Ok(out)
}

/// [`window_defect`] divided by `max(1, max-abs of B over the window)`.
pub fn window_defect_relative(a: &OperatorMatrix, b: &OperatorMatrix, w: Window) -> Result<f64> {
    let abs = window_defect(a, b, w)?;
    Ok(abs / b.block_max_abs(w.size()).max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag() -> BasisTag {
        BasisTag::new("test")
    }

    fn real(dim: usize, values: &[f64]) -> OperatorMatrix {
        OperatorMatrix::from_fn(dim, tag(), |i, j| c64::new(values[i * dim + j], 0.0))
    }

    #[test]
    fn ladder_pair_commutator() {
        let a = real(2, &[0.0, 1.0, 0.0, 0.0]);
        let b = a.transpose();
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c.entry(0, 0), c64::new(1.0, 0.0));
        assert_eq!(c.entry(1, 1), c64::new(-1.0, 0.0));
        assert_eq!(c.entry(0, 1), c64::new(0.0, 0.0));
        assert_eq!(commutator(&a, &a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hermitian_part_cases() {
        let i_id = OperatorMatrix::identity(3, tag()).scale(c64::new(0.0, 1.0));
        assert_eq!(hermitian_part(&i_id).max_abs(), 0.0);

        let h = real(2, &[1.0, 2.0, 2.0, -3.0]);
        assert_eq!(hermitian_part(&h), h);

        let n = real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(hermitian_part(&n), real(2, &[0.0, 0.5, 0.5, 0.0]));
        assert_eq!(hermitian_part(&n).hermiticity_defect(), 0.0);
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let a = OperatorMatrix::identity(3, tag());
        let b = OperatorMatrix::identity(3, BasisTag::new("other"));
        assert!(matches!(a.add(&b), Err(VlabError::BasisMismatch { .. })));
        assert!(matches!(commutator(&a, &b), Err(VlabError::BasisMismatch { .. })));
        let c = OperatorMatrix::identity(4, tag());
        assert!(matches!(a.matmul(&c), Err(VlabError::DimensionMismatch { .. })));
    }

    #[test]
    fn maps_compose_through_inner_basis() {
        let from = BasisTag::new("a");
        let to = BasisTag::new("b");
        let map = OperatorMatrix::identity(2, from.clone()).with_basis(to.clone(), from.clone());
        let op = OperatorMatrix::identity(2, from.clone());
        let moved = map.matmul(&op).unwrap().matmul(&map.adjoint()).unwrap();
        assert_eq!(moved.row_basis(), &to);
        assert!(moved.is_endomorphism());
        assert!(op.matmul(&map).is_err());
    }

    #[test]
    fn window_defect_rules() {
        let a = real(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(window_defect(&a, &a, Window::new(2).unwrap()).unwrap(), 0.0);

        let z = OperatorMatrix::zeros(2, tag());
        let w = Window::new(1).unwrap();
        assert_eq!(window_defect(&a, &z, w).unwrap(), 1.0);
        // denominator clamps at one when B vanishes on the window
        assert_eq!(window_defect_relative(&a, &z, w).unwrap(), 1.0);
        assert!(window_defect(&a, &z, Window::new(3).unwrap()).is_err());
        assert!(Window::new(0).is_err());
    }
}
