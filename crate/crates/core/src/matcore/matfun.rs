//! Matrix functions through eigendecomposition, plus the two exponential
//! routines that avoid it: the finite series for nilpotent matrices and
//! scaling-and-squaring for entrywise nonnegative matrices.

use std::cmp::Ordering;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};

use super::matrix::{hermitian_part, OperatorMatrix};
use crate::error::{Result, VlabError};

/// Relative Hermiticity tolerance, scaled by the max-abs entry.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalue floor for inverse powers, relative to the spectral radius.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Default cap on the eigenvector condition number.
pub const KAPPA_MAX: f64 = 1e8;
/// Default clearance required between eigenvalues and branch points.
pub const BRANCH_GUARD: f64 = 1e-6;

/// Domain restriction for [`matfun_hermitian`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralDomain {
    Real,
    /// Every eigenvalue must exceed `EIGENVALUE_FLOOR * spectral radius`.
    Positive,
}

/// Eigenvalues sorted by (real part, imaginary part), right eigenvectors as
/// columns, and the 2-norm condition number of the eigenvector matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    pub eigenvalues: Vec<c64>,
    pub vectors: Mat<c64>,
    pub condition: f64,
}

fn cmp_complex(a: &c64, b: &c64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn check_hermitian(a: &OperatorMatrix) -> Result<()> {
    let tolerance = HERMITIAN_TOL * a.max_abs().max(f64::MIN_POSITIVE);
    let defect = a.hermiticity_defect();
    if defect > tolerance {
        return Err(VlabError::NotHermitian { defect, tolerance });
    }
    Ok(())
}

/// Hermitian eigendecomposition with ascending real eigenvalues.
pub fn eigh(a: &OperatorMatrix) -> Result<(Vec<f64>, Mat<c64>)> {
    check_hermitian(a)?;
    let evd = a.as_mat().self_adjoint_eigen(Side::Lower).map_err(|e| VlabError::Decomposition(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].re.total_cmp(&values[j].re));
    let sorted_values = order.iter().map(|&i| values[i].re).collect();
    let sorted_vectors = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok((sorted_values, sorted_vectors))
}

/// `V f(L) V^H` for Hermitian `A = V L V^H`.
pub fn matfun_hermitian(a: &OperatorMatrix, f: impl Fn(f64) -> c64, domain: SpectralDomain) -> Result<OperatorMatrix> {
    let (values, vectors) = eigh(a)?;
    if domain == SpectralDomain::Positive {
        let radius = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let floor = EIGENVALUE_FLOOR * radius;
        if let Some(&bad) = values.iter().find(|&&v| v <= floor) {
            return Err(VlabError::EigenvalueOutOfDomain { eigenvalue: bad, floor });
        }
    }
    let fvals: Vec<c64> = values.iter().map(|&v| f(v)).collect();
    let n = a.dim();
    let scaled = Mat::from_fn(n, n, |i, j| vectors[(i, j)] * fvals[j]);
    let out = &scaled * vectors.adjoint();
    let out = OperatorMatrix::from_mat_between(out, a.row_basis().clone(), a.col_basis().clone())?;
    // real f of a Hermitian matrix is Hermitian; drop the roundoff asymmetry
    if fvals.iter().all(|z| z.im == 0.0) {
        return Ok(hermitian_part(&out));
    }
    Ok(out)
}

pub fn hermitian_exp(a: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    matfun_hermitian(a, |x| c64::new((t * x).exp(), 0.0), SpectralDomain::Real)
}

pub fn hermitian_inverse(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    matfun_hermitian(a, |x| c64::new(1.0 / x, 0.0), SpectralDomain::Positive)
}

pub fn hermitian_inv_sqrt(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    matfun_hermitian(a, |x| c64::new(1.0 / x.sqrt(), 0.0), SpectralDomain::Positive)
}

pub fn hermitian_sqrt(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    matfun_hermitian(a, |x| c64::new(x.sqrt(), 0.0), SpectralDomain::Positive)
}

/// General eigendecomposition with sorted eigenvalues and a 2-norm
/// condition number of the column-normalized eigenvector matrix.
pub fn eig(a: &OperatorMatrix) -> Result<EigenDecomp> {
    let evd = a.as_mat().eigen().map_err(|e| VlabError::Decomposition(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_complex(&values[i], &values[j]));
    let norms: Vec<f64> =
        order.iter().map(|&j| (0..n).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let sorted = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])] / norms[j]);
    let sv = sorted.singular_values().map_err(|e| VlabError::Decomposition(format!("{e:?}")))?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(EigenDecomp { eigenvalues: order.iter().map(|&i| values[i]).collect(), vectors: sorted, condition })
}

/// `V f(L) V^-1` for a diagonalizable `A`, guarded against near-defective
/// input and against eigenvalues close to the branch points of `f`.
pub fn matfun_diagonalizable(
    a: &OperatorMatrix,
    f: impl Fn(c64) -> c64,
    branch_points: &[c64],
    branch_guard: f64,
    kappa_max: f64,
) -> Result<OperatorMatrix> {
    let decomp = eig(a)?;
    for lambda in &decomp.eigenvalues {
        if branch_points.iter().any(|bp| (lambda - bp).norm() < branch_guard) {
            return Err(VlabError::BranchPoint { re: lambda.re, im: lambda.im, guard: branch_guard });
        }
    }
    if !(decomp.condition <= kappa_max) {
        return Err(VlabError::IllConditioned { condition: decomp.condition, cap: kappa_max });
    }
    let n = a.dim();
    let v = &decomp.vectors;
    let fvals: Vec<c64> = decomp.eigenvalues.iter().map(|&l| f(l)).collect();
    let vinv = v.partial_piv_lu().inverse();
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * fvals[j]);
    let out = &scaled * &vinv;
    OperatorMatrix::from_mat_between(out, a.row_basis().clone(), a.col_basis().clone())
}

/// Principal-branch arctangent with branch points at `+-i`.
pub fn arctan(a: &OperatorMatrix, branch_guard: f64, kappa_max: f64) -> Result<OperatorMatrix> {
    let i = c64::new(0.0, 1.0);
    matfun_diagonalizable(a, |z| z.atan(), &[i, -i], branch_guard, kappa_max)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Triangle {
    Upper,
    Lower,
}

fn strict_triangle(a: &OperatorMatrix) -> Option<Triangle> {
    let m = a.as_mat();
    let n = a.dim();
    let zero = c64::new(0.0, 0.0);
    let upper = (0..n).all(|j| (j..n).all(|i| m[(i, j)] == zero));
    if upper {
        return Some(Triangle::Upper);
    }
    let lower = (0..n).all(|j| (0..=j).all(|i| m[(i, j)] == zero));
    lower.then_some(Triangle::Lower)
}

/// Exact finite exponential series of a strictly triangular matrix.
pub fn expm_nilpotent(l: &OperatorMatrix) -> Result<OperatorMatrix> {
    let triangle = strict_triangle(l).ok_or(VlabError::NotStrictlyTriangular)?;
    let n = l.dim();
    let m = l.as_mat();
    let zero = c64::new(0.0, 0.0);
    let one = c64::new(1.0, 0.0);

    // single off-diagonal band: the series has a closed form per entry
    let single_band = (0..n).all(|j| {
        (0..n).all(|i| {
            let on_band = match triangle {
                Triangle::Upper => j == i + 1,
                Triangle::Lower => i == j + 1,
            };
            on_band || m[(i, j)] == zero
        })
    });
    if single_band {
        let band: Vec<c64> = (0..n.saturating_sub(1))
            .map(|i| match triangle {
                Triangle::Upper => m[(i, i + 1)],
                Triangle::Lower => m[(i + 1, i)],
            })
            .collect();
        let mut out = Mat::<c64>::identity(n, n);
        for start in 0..n {
            let mut term = one;
            for d in 1..(n - start) {
                term = term * band[start + d - 1] / (d as f64);
                match triangle {
                    Triangle::Upper => out[(start, start + d)] = term,
                    Triangle::Lower => out[(start + d, start)] = term,
                }
            }
        }
        return OperatorMatrix::from_mat_between(out, l.row_basis().clone(), l.col_basis().clone());
    }

    let mut sum = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for j in 1..n {
        let next = &term * m;
        term = Mat::from_fn(n, n, |r, c| next[(r, c)] / (j as f64));
        if (0..n).all(|c| (0..n).all(|r| term[(r, c)] == zero)) {
            break;
        }
        sum = &sum + &term;
    }
    OperatorMatrix::from_mat_between(sum, l.row_basis().clone(), l.col_basis().clone())
}

/// `exp(t A)` for a real matrix with nonnegative entries and `t >= 0`.
///
/// Every Taylor term and every squaring is entrywise nonnegative, so no
/// cancellation occurs and small entries keep their relative accuracy even
/// when the largest entries are astronomically large. The eigendecomposition
/// route loses those small entries to roundoff.
pub fn expm_nonnegative(a: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if !(t >= 0.0) {
        return Err(VlabError::InvalidParameter(format!("scale {t} must be nonnegative")));
    }
    let n = a.dim();
    let m = a.as_mat();
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if z.im != 0.0 || z.re < 0.0 {
                return Err(VlabError::InvalidParameter("expm_nonnegative requires real nonnegative entries".into()));
            }
        }
    }
    let norm1 = (0..n).map(|j| (0..n).map(|i| m[(i, j)].re).sum::<f64>()).fold(0.0, f64::max) * t;
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(squarings);
    let b = Mat::from_fn(n, n, |i, j| m[(i, j)] * scale);

    let mut sum = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for j in 1..=30 {
        let next = &term * &b;
        term = Mat::from_fn(n, n, |r, c| next[(r, c)] / (j as f64));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if (0..n).any(|j| (0..n).any(|i| !sum[(i, j)].re.is_finite())) {
        return Err(VlabError::PrecisionLoss("exponential overflowed binary64 range".into()));
    }
    OperatorMatrix::from_mat_between(sum, a.row_basis().clone(), a.col_basis().clone())
}
