//! Full-line oscillator realization of `x`, `p` and the free conformal
//! triple, used to compare the two forms of the free time operator.

use faer::{c64, Mat};

use crate::error::{Result, VlabError};
use crate::matcore::{commutator, eigh, hermitian_inv_sqrt, window_defect, BasisTag, OperatorMatrix, Window};
use crate::residual::{ConvergenceTable, ResidualRecord, Tier};

/// Smallest dimension accepted by [`fock_line`].
pub const MIN_FOCK_DIM: usize = 8;
/// Default momentum cutoff for [`t0_forms_agreement`].
pub const DEFAULT_P_MIN: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct FockLine {
    pub dim: usize,
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
    /// `p²/2`.
    pub h0: OperatorMatrix,
    /// `-(xp + px)/4`.
    pub d: OperatorMatrix,
    /// `x²/2`.
    pub k: OperatorMatrix,
}

fn ladder(n: usize) -> f64 {
    ((n + 1) as f64 / 2.0).sqrt()
}

/// Truncated position operator in the oscillator basis.
pub fn ladder_position(dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, BasisTag::fock_line(dim), |i, j| {
        if i == j + 1 {
            c64::new(ladder(j), 0.0)
        } else if j == i + 1 {
            c64::new(ladder(i), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Truncated momentum operator in the oscillator basis.
pub fn ladder_momentum(dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, BasisTag::fock_line(dim), |i, j| {
        if i == j + 1 {
            c64::new(0.0, ladder(j))
        } else if j == i + 1 {
            c64::new(0.0, -ladder(i))
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

pub fn fock_line(dim: usize) -> Result<FockLine> {
    if dim % 2 == 1 {
        return Err(VlabError::InvalidParameter(format!(
            "odd dimension {dim}: the truncated momentum has a zero eigenvalue"
        )));
    }
    if dim < MIN_FOCK_DIM {
        return Err(VlabError::InvalidParameter(format!("dimension {dim} below minimum {MIN_FOCK_DIM}")));
    }
    let x = ladder_position(dim);
    let p = ladder_momentum(dim);
    let h0 = p.matmul(&p)?.scale_real(0.5);
    let k = x.matmul(&x)?.scale_real(0.5);
    let d = x.matmul(&p)?.add(&p.matmul(&x)?)?.scale_real(-0.25);
    Ok(FockLine { dim, x, p, h0, d, k })
}

/// Compares `H0^{-1/2} D H0^{-1/2}` with `-(x p^{-1} + p^{-1} x)/2` after
/// compressing both onto momentum eigenvectors with `|p| >= p_min`.
///
/// Components: `kept` (retained eigenvectors) and `commutator_form_b`, the
/// windowed defect of `[H0, form B] - i`.
pub fn t0_forms_agreement(f: &FockLine, p_min: f64, w: Window) -> Result<ResidualRecord> {
    if !(p_min > 0.0) || !p_min.is_finite() {
        return Err(VlabError::InvalidParameter(format!("momentum cutoff {p_min} must be positive")));
    }
    w.check(f.dim, f.dim)?;
    let n = f.dim;
    let (lambda, v) = eigh(&f.p)?;
    let kept: Vec<usize> = (0..n).filter(|&j| lambda[j].abs() >= p_min).collect();
    if kept.is_empty() {
        return Err(VlabError::InvalidParameter(format!("no momentum eigenvalue clears the cutoff {p_min}")));
    }
    let basis = BasisTag::fock_line(n);

    let r = hermitian_inv_sqrt(&f.h0)?;
    let form_a = r.matmul(&f.d)?.matmul(&r)?;

    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] / lambda[j]);
    let p_inv = OperatorMatrix::from_mat(&scaled * v.adjoint(), basis.clone())?;
    let form_b = f.x.matmul(&p_inv)?.add(&p_inv.matmul(&f.x)?)?.scale_real(-0.5);

    let vk = Mat::from_fn(n, kept.len(), |i, j| v[(i, kept[j])]);
    let projector = OperatorMatrix::from_mat(&vk * vk.adjoint(), basis)?;
    let compress = |a: &OperatorMatrix| projector.matmul(a)?.matmul(&projector);
    let residual = window_defect(&compress(&form_a)?, &compress(&form_b)?, w)?;
    let scale = compress(&form_a)?.block_max_abs(w.size()).max(1.0);

    let defect = commutator(&f.h0, &form_b)?.sub(&f.h0.identity_like().scale(c64::new(0.0, 1.0)))?;
    let commutator_b = window_defect(&defect, &OperatorMatrix::zeros(n, f.h0.row_basis().clone()), w)?;

    Ok(ResidualRecord::new("t0_forms", Tier::ReportOnly, w.size(), residual, residual / scale)
        .with_component("kept", kept.len() as f64)
        .with_component("commutator_form_b", commutator_b))
}

/// Two-form residual along a sequence of momentum cutoffs.
pub fn t0_forms_trend(f: &FockLine, cutoffs: &[f64], w: Window) -> Result<ConvergenceTable> {
    let mut points = Vec::with_capacity(cutoffs.len());
    for &c in cutoffs {
        points.push((c, t0_forms_agreement(f, c, w)?.absolute));
    }
    Ok(ConvergenceTable::new("t0_forms", "p_min", &points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_normalization() {
        let f = fock_line(8).unwrap();
        assert!((f.x.entry(0, 1).re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_level_momentum_spectrum() {
        let (lambda, _) = eigh(&ladder_momentum(2)).unwrap();
        let r = 0.5f64.sqrt();
        assert!((lambda[0] + r).abs() < 1e-15 && (lambda[1] - r).abs() < 1e-15);
    }

    #[test]
    fn canonical_pair_on_leading_block() {
        let f = fock_line(16).unwrap();
        let c = commutator(&f.x, &f.p).unwrap();
        let target = f.x.identity_like().scale(c64::new(0.0, 1.0));
        assert!(window_defect(&c, &target, Window::new(15).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn odd_or_small_dimension_rejected() {
        assert!(fock_line(9).is_err());
        assert!(fock_line(6).is_err());
    }

    #[test]
    fn parity_checkerboard() {
        let f = fock_line(12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                if (i + j) % 2 == 0 {
                    assert_eq!(f.x.entry(i, j), c64::new(0.0, 0.0));
                    assert_eq!(f.p.entry(i, j), c64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn oscillator_sum_is_diagonal() {
        let f = fock_line(10).unwrap();
        let s = f.h0.add(&f.k).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let target = if i == j { i as f64 + 0.5 } else { 0.0 };
                assert!((s.entry(i, j) - c64::new(target, 0.0)).norm() < 1e-14, "({i},{j})");
            }
        }
        // the truncation corner loses the (N-1 -> N) half quantum
        assert!((s.entry(9, 9) - c64::new(4.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn empty_subspace_rejected() {
        let f = fock_line(8).unwrap();
        assert!(t0_forms_agreement(&f, 100.0, Window::new(4).unwrap()).is_err());
    }
}
