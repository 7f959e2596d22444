//! Cross-sector machinery: Laguerre-basis overlaps, the unitary transport
//! between sectors, the nilpotent-exponential intertwiner and the
//! transported harmonic time operator, plus a full-line Fock realization.

mod fock;
mod laguerre;

pub use fock::{
    fock_line, ladder_momentum, ladder_position, t0_forms_agreement, t0_forms_trend, FockLine, DEFAULT_P_MIN,
    MIN_FOCK_DIM,
};
pub use laguerre::{
    default_order, gauss_laguerre, overlap_matrix, LaguerreBasisSpec, LaguerreRule, OverlapMatrix, OverlapMethod,
    QUADRATURE_TOL,
};

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};

use crate::conformal::conformal_triple;
use crate::error::{Result, VlabError};
use crate::matcore::{expm_nilpotent, window_defect, BasisTag, OperatorMatrix, Window, KAPPA_MAX};
use crate::residual::{ResidualRecord, Tier};
use crate::su11::{generators, Sector};
use crate::timeops::{commutator_defect, t_harmonic, TimeOperator, TimeOperatorKind};

/// Bargmann index of the free sector, the source of the harmonic time operator.
pub const FREE_K: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntertwinerKind {
    /// Phases times overlap, unitary up to truncation.
    UPhase,
    /// Nilpotent exponentials around the overlap, not unitary.
    U1Nilpotent,
}

/// Map from sector `k0` into sector `k`.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub matrix: OperatorMatrix,
    pub kind: IntertwinerKind,
    pub k: f64,
    pub k0: f64,
}

/// Diagonal `e^{iθ(n+κ)}`.
pub fn phase_matrix(kappa: f64, theta: f64, dim: usize) -> OperatorMatrix {
    let values: Vec<c64> = (0..dim).map(|n| c64::cis(theta * (n as f64 + kappa))).collect();
    OperatorMatrix::diagonal(&values, BasisTag::sector(kappa, dim))
}

/// `U = P_k(-π) S P_{k0}(π)`.
pub fn unitary_u(k: f64, k0: f64, dim: usize) -> Result<Intertwiner> {
    let s = overlap_matrix(k0, k, dim, OverlapMethod::Quadrature)?.s;
    let matrix = if k == k0 {
        s
    } else {
        let pi = std::f64::consts::PI;
        phase_matrix(k, -pi, dim).matmul(&s)?.matmul(&phase_matrix(k0, pi, dim))?
    };
    Ok(Intertwiner { matrix, kind: IntertwinerKind::UPhase, k, k0 })
}

/// Windowed `U^†U - I`, with `UU^† - I` as component `u_u_dagger`.
pub fn unitarity_defect(u: &Intertwiner, w: Window) -> Result<ResidualRecord> {
    let m = &u.matrix;
    let utu = m.adjoint().matmul(m)?;
    let uut = m.matmul(&m.adjoint())?;
    let a = window_defect(&utu, &utu.identity_like(), w)?;
    let b = window_defect(&uut, &uut.identity_like(), w)?;
    Ok(ResidualRecord::new("unitarity", Tier::Convergent, w.size(), a, a)
        .with_component("u_dagger_u", a)
        .with_component("u_u_dagger", b))
}

/// `U1 = exp(-K-(k)) S exp(K-(k0))`.
pub fn intertwiner_u1(k: f64, k0: f64, dim: usize) -> Result<Intertwiner> {
    let to = Sector::from_k(k, dim)?;
    let from = Sector::from_k(k0, dim)?;
    if k == k0 {
        return Ok(Intertwiner {
            matrix: OperatorMatrix::identity(dim, to.basis()),
            kind: IntertwinerKind::U1Nilpotent,
            k,
            k0,
        });
    }
    let s = overlap_matrix(k0, k, dim, OverlapMethod::Quadrature)?.s;
    let left = expm_nilpotent(&generators(&to).kminus.scale_real(-1.0))?;
    let right = expm_nilpotent(&generators(&from).kminus)?;
    let matrix = left.matmul(&s)?.matmul(&right)?;
    Ok(Intertwiner { matrix, kind: IntertwinerKind::U1Nilpotent, k, k0 })
}

/// Inverse of the leading `M x M` block of the overlap, zero-padded.
fn windowed_pseudo_inverse(s: &OperatorMatrix, w: Window) -> Result<OperatorMatrix> {
    let n = s.dim();
    w.check(n, n)?;
    let m = w.size();
    let block = Mat::from_fn(m, m, |i, j| s.entry(i, j));
    let sv = block.singular_values().map_err(|e| VlabError::Decomposition(format!("{e:?}")))?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= KAPPA_MAX) {
        return Err(VlabError::IllConditioned { condition, cap: KAPPA_MAX });
    }
    let inv = block.partial_piv_lu().inverse();
    let padded = Mat::from_fn(n, n, |i, j| if i < m && j < m { inv[(i, j)] } else { c64::new(0.0, 0.0) });
    OperatorMatrix::from_mat_between(padded, s.col_basis().clone(), s.row_basis().clone())
}

/// Inverse map from sector `k` back into `k0`. Exact for `U` (its adjoint)
/// and for equal sectors; otherwise exact nilpotent exponentials around the
/// windowed pseudo-inverse of the overlap.
pub fn inverse(u: &Intertwiner, w: Window) -> Result<OperatorMatrix> {
    match u.kind {
        IntertwinerKind::UPhase => Ok(u.matrix.adjoint()),
        IntertwinerKind::U1Nilpotent if u.k == u.k0 => Ok(u.matrix.clone()),
        IntertwinerKind::U1Nilpotent => {
            let dim = u.matrix.dim();
            let to = Sector::from_k(u.k, dim)?;
            let from = Sector::from_k(u.k0, dim)?;
            let s = overlap_matrix(u.k0, u.k, dim, OverlapMethod::Quadrature)?.s;
            let s_inv = windowed_pseudo_inverse(&s, w)?;
            let left = expm_nilpotent(&generators(&from).kminus.scale_real(-1.0))?;
            let right = expm_nilpotent(&generators(&to).kminus)?;
            left.matmul(&s_inv)?.matmul(&right)
        }
    }
}

/// Windowed residual of `u A_from u^{-1} - A_to`.
///
/// Convergent tier for the unitary transport, report-only for `U1`.
pub fn transport_defect(
    u: &Intertwiner,
    a_from: &OperatorMatrix,
    a_to: &OperatorMatrix,
    w: Window,
) -> Result<ResidualRecord> {
    let inv = inverse(u, w)?;
    let moved = u.matrix.matmul(a_from)?.matmul(&inv)?;
    let abs = window_defect(&moved, a_to, w)?;
    let rel = abs / a_to.block_max_abs(w.size()).max(1.0);
    let tier = match u.kind {
        IntertwinerKind::UPhase => Tier::Convergent,
        IntertwinerKind::U1Nilpotent => Tier::ReportOnly,
    };
    Ok(ResidualRecord::new("transport", tier, w.size(), abs, rel))
}

/// Windowed residual of `H_CS U1 - U1 H_h` with `H_CS = 2ωK3(k)` and
/// `H_h = 2ωK3(k0)`, relative to the windowed size of `U1`.
pub fn u1_intertwining_defect(u: &Intertwiner, omega: f64, w: Window) -> Result<ResidualRecord> {
    let dim = u.matrix.dim();
    let h_cs = generators(&Sector::from_k(u.k, dim)?).k3.scale_real(2.0 * omega);
    let h_h = generators(&Sector::from_k(u.k0, dim)?).k3.scale_real(2.0 * omega);
    let lhs = h_cs.matmul(&u.matrix)?;
    let rhs = u.matrix.matmul(&h_h)?;
    let abs = window_defect(&lhs, &rhs, w)?;
    let rel = abs / u.matrix.block_max_abs(w.size()).max(1.0);
    Ok(ResidualRecord::new("u1_intertwining", Tier::ReportOnly, w.size(), abs, rel))
}

/// `H_CS = 2ωK3` in sector `k`.
pub fn calogero_hamiltonian(k: f64, omega: f64, dim: usize) -> Result<OperatorMatrix> {
    Ok(generators(&Sector::from_k(k, dim)?).k3.scale_real(2.0 * omega))
}

/// `T_CS = U1 T_h U1^{-1}`, with the inverse windowed by `w`.
pub fn t_cs(k: f64, k0: f64, omega: f64, dim: usize, w: Window) -> Result<TimeOperator> {
    if k0 != FREE_K {
        return Err(VlabError::InvalidParameter(format!("source sector must be k0 = 3/4, got {k0}")));
    }
    let free = conformal_triple(&Sector::from_k(k0, dim)?)?;
    let th = t_harmonic(&free, omega)?;
    let u1 = intertwiner_u1(k, k0, dim)?;
    let matrix = if k == k0 { th.matrix } else { u1.matrix.matmul(&th.matrix)?.matmul(&inverse(&u1, w)?)? };
    Ok(TimeOperator::new(matrix, TimeOperatorKind::Transported, &[("k", k), ("k0", k0), ("omega", omega)]))
}

/// `[H_CS, T_CS] - i` on the window.
pub fn t_cs_defect(k: f64, omega: f64, dim: usize, w: Window) -> Result<ResidualRecord> {
    let t = t_cs(k, FREE_K, omega, dim, w)?;
    let h = calogero_hamiltonian(k, omega, dim)?;
    let mut rec = commutator_defect(&h, &t, w, Tier::ReportOnly)?;
    rec.label = "t_cs_commutator".into();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su11::generators;

    #[test]
    fn phase_entry() {
        let p = phase_matrix(0.75, -std::f64::consts::PI, 4);
        let r = 0.5f64.sqrt();
        assert!((p.entry(0, 0) - c64::new(-r, -r)).norm() < 1e-15);
    }

    #[test]
    fn equal_sectors_are_trivial() {
        let u = unitary_u(1.25, 1.25, 8).unwrap();
        assert_eq!(u.matrix, OperatorMatrix::identity(8, BasisTag::sector(1.25, 8)));
        let u1 = intertwiner_u1(0.75, 0.75, 8).unwrap();
        assert_eq!(u1.matrix, OperatorMatrix::identity(8, BasisTag::sector(0.75, 8)));
        let k3 = generators(&Sector::from_k(1.25, 8).unwrap()).k3;
        let r = transport_defect(&u, &k3, &k3, Window::new(8).unwrap()).unwrap();
        assert_eq!(r.absolute, 0.0);
    }

    #[test]
    fn transport_rejects_wrong_basis() {
        let u = unitary_u(1.25, 0.75, 8).unwrap();
        let k3 = generators(&Sector::from_k(1.25, 8).unwrap()).k3;
        assert!(transport_defect(&u, &k3, &k3, Window::new(4).unwrap()).is_err());
    }

    #[test]
    fn calogero_ground_energy() {
        let h = calogero_hamiltonian(1.25, 1.0, 4).unwrap();
        assert_eq!(h.entry(0, 0), c64::new(2.5, 0.0));
    }

    #[test]
    fn t_cs_in_free_sector_is_t_h() {
        let w = Window::new(4).unwrap();
        let t = t_cs(0.75, 0.75, 0.5, 16, w).unwrap();
        let th = t_harmonic(&conformal_triple(&Sector::from_k(0.75, 16).unwrap()).unwrap(), 0.5).unwrap();
        assert_eq!(t.matrix, th.matrix);
        assert!(t_cs(1.25, 1.0, 0.5, 16, w).is_err());
    }

    #[test]
    fn u1_round_trip_on_window() {
        let w = Window::new(4).unwrap();
        let forward = intertwiner_u1(1.25, 0.75, 24).unwrap();
        let inv = inverse(&forward, w).unwrap();
        let prod = inv.matmul(&forward.matrix).unwrap();
        // not asserted small: the truncated overlap is only nearly unitary
        assert!(prod.entry(0, 0).norm().is_finite());
    }
}
