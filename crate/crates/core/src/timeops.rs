//! Candidate time operators conjugate to the singular-oscillator Hamiltonian
//! and to the harmonic Hamiltonian, and the commutator-defect machinery used
//! to judge them under truncation.

use std::collections::BTreeMap;

use faer::c64;

use crate::conformal::{check_frequency, omega_family, ConformalTriple, OmegaFamily};
use crate::error::{Result, VlabError};
use crate::matcore::{
    anti_hermitian_part, arctan, commutator, expm_nonnegative, hermitian_exp, hermitian_inv_sqrt, hermitian_inverse,
    hermitian_part, matfun_hermitian, window_defect, window_defect_relative, OperatorMatrix, SpectralDomain, Window,
    BRANCH_GUARD, KAPPA_MAX,
};
use crate::residual::{ConvergenceTable, ResidualRecord, Tier};
use crate::su11::Sector;

const I: c64 = c64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimeOperatorKind {
    /// `T(ω)`, canonical to `H` but not Hermitian.
    Omega,
    /// `H^{-1/2} D H^{-1/2}`.
    Minimal,
    /// The minimal operator of the free (`k = 3/4`) sector.
    FreeSector,
    /// `Q = -T0 + i/(4 H0)`.
    Q,
    /// Hermitian part of `arctan(ωQ)/ω`.
    Harmonic,
    /// Harmonic time operator carried into another sector.
    Transported,
}

#[derive(Clone, Debug)]
pub struct TimeOperator {
    pub matrix: OperatorMatrix,
    pub kind: TimeOperatorKind,
    pub params: BTreeMap<String, f64>,
}

impl TimeOperator {
    pub fn new(matrix: OperatorMatrix, kind: TimeOperatorKind, params: &[(&str, f64)]) -> Self {
        let params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        TimeOperator { matrix, kind, params }
    }

    /// `T + Σ c_j H^j`, another solution of the same commutation relation.
    pub fn shifted_by_polynomial(&self, h: &OperatorMatrix, coeffs: &[f64]) -> Result<TimeOperator> {
        let mut out = self.matrix.clone();
        let mut power = h.identity_like();
        for (j, c) in coeffs.iter().enumerate() {
            if j > 0 {
                power = power.matmul(h)?;
            }
            if *c != 0.0 {
                out = out.add_scaled(&power, c64::new(*c, 0.0))?;
            }
        }
        Ok(TimeOperator { matrix: out, kind: self.kind, params: self.params.clone() })
    }
}

/// `[H, T] - i` on a window. Components: `trace_abs`, the modulus of the
/// full-matrix trace of the defect (always `N`, since commutators are
/// traceless).
pub fn commutator_defect(h: &OperatorMatrix, t: &TimeOperator, w: Window, tier: Tier) -> Result<ResidualRecord> {
    let c = commutator(h, &t.matrix)?;
    let target = h.identity_like().scale(I);
    let defect = c.sub(&target)?;
    Ok(ResidualRecord::new(
        "commutator_defect",
        tier,
        w.size(),
        window_defect(&c, &target, w)?,
        window_defect_relative(&c, &target, w)?,
    )
    .with_component("trace_abs", defect.trace().norm()))
}

/// The defect operator `[H,T] - i` (that is, `iX`) and its sandwich
/// `H([H,T] - i)H`, which vanishes in the limit for the minimal operator.
#[derive(Clone, Debug)]
pub struct DefectRecord {
    pub defect: OperatorMatrix,
    pub sandwich: OperatorMatrix,
    pub defect_norm: f64,
    pub sandwich_norm: f64,
    /// Sandwich norm divided by the squared window norm of `H`.
    pub sandwich_scaled: f64,
    pub tier: Tier,
}

pub fn x_defect(h: &OperatorMatrix, t: &TimeOperator, w: Window) -> Result<DefectRecord> {
    w.check(h.dim(), h.dim())?;
    let defect = commutator(h, &t.matrix)?.sub(&h.identity_like().scale(I))?;
    let sandwich = h.matmul(&defect)?.matmul(h)?;
    let defect_norm = defect.block_max_abs(w.size());
    let sandwich_norm = sandwich.block_max_abs(w.size());
    let h_norm = h.block_max_abs(w.size()).max(f64::MIN_POSITIVE);
    Ok(DefectRecord {
        defect,
        sandwich,
        defect_norm,
        sandwich_norm,
        sandwich_scaled: sandwich_norm / (h_norm * h_norm),
        tier: Tier::Convergent,
    })
}

/// `exp(-ωK)` through the Hermitian eigendecomposition.
fn exp_minus(t: &ConformalTriple, omega: f64) -> Result<OperatorMatrix> {
    hermitian_exp(&t.k, -omega)
}

/// `exp(+ωK)`; `K` has nonnegative entries in the sector basis.
fn exp_plus(t: &ConformalTriple, omega: f64) -> Result<OperatorMatrix> {
    expm_nonnegative(&t.k, omega)
}

/// `-2ω K-ω`.
fn conjugated_target(f: &OmegaFamily) -> OperatorMatrix {
    f.kminus.scale_real(-2.0 * f.omega)
}

/// Three-term commutator series `H - ω[K,H] + (ω²/2)[K,[K,H]]` against
/// `-2ωK-ω` on the leading `N-2` block; no exponentials involved.
pub fn bch_series_defect(t: &ConformalTriple, omega: f64) -> Result<ResidualRecord> {
    check_frequency(omega, true)?;
    let f = omega_family(t, omega)?;
    let kh = commutator(&t.k, &t.h)?;
    let kkh = commutator(&t.k, &kh)?;
    let series = t.h.add_scaled(&kh, c64::new(-omega, 0.0))?.add_scaled(&kkh, c64::new(0.5 * omega * omega, 0.0))?;
    let target = conjugated_target(&f);
    let w = Window::new(t.dim() - 2)?;
    Ok(ResidualRecord::new(
        "bch_series",
        Tier::Exact,
        w.size(),
        window_defect(&series, &target, w)?,
        window_defect_relative(&series, &target, w)?,
    ))
}

/// `exp(-ωK) H exp(ωK) + 2ωK-ω` on a window of at most `N/4`.
pub fn bch_conjugation_defect(t: &ConformalTriple, omega: f64, w: Window) -> Result<ResidualRecord> {
    check_frequency(omega, false)?;
    w.check(t.dim(), t.dim() / 4)?;
    let f = omega_family(t, omega)?;
    let conj = exp_minus(t, omega)?.matmul(&t.h)?.matmul(&exp_plus(t, omega)?)?;
    let target = conjugated_target(&f);
    Ok(ResidualRecord::new(
        "bch_conjugation",
        Tier::Convergent,
        w.size(),
        window_defect(&conj, &target, w)?,
        window_defect_relative(&conj, &target, w)?,
    ))
}

/// `(K3ω + k)^{-1}` via the eigendecomposition of `K3ω`.
fn shifted_inverse(f: &OmegaFamily, k: f64) -> Result<OperatorMatrix> {
    let shifted = f.k3.add_scaled(&f.k3.identity_like(), c64::new(k, 0.0))?;
    matfun_hermitian(&shifted, |x| c64::new(1.0 / x, 0.0), SpectralDomain::Positive)
}

/// `T(ω) = -(i/2ω) exp(ωK) K+ω (K3ω + k)^{-1} exp(-ωK)`.
pub fn t_omega(t: &ConformalTriple, omega: f64) -> Result<TimeOperator> {
    check_frequency(omega, false)?;
    let f = omega_family(t, omega)?;
    let inner = f.kplus.matmul(&shifted_inverse(&f, t.sector.k())?)?;
    let m = exp_plus(t, omega)?.matmul(&inner)?.matmul(&exp_minus(t, omega)?)?.scale(c64::new(0.0, -0.5 / omega));
    Ok(TimeOperator::new(m, TimeOperatorKind::Omega, &[("omega", omega), ("k", t.sector.k())]))
}

/// Independent construction of `T(ω)^†`:
/// `(i/2ω) exp(-ωK) [(K3ω + k)^{-1} K-ω exp(ωK)]`, grouped as the adjoint of
/// [`t_omega`]'s product.
pub fn t_omega_mirror(t: &ConformalTriple, omega: f64) -> Result<OperatorMatrix> {
    check_frequency(omega, false)?;
    let f = omega_family(t, omega)?;
    let inner = shifted_inverse(&f, t.sector.k())?.matmul(&f.kminus)?;
    Ok(exp_minus(t, omega)?.matmul(&inner.matmul(&exp_plus(t, omega)?)?)?.scale(c64::new(0.0, 0.5 / omega)))
}

/// Postconditions of [`t_omega`]: commutator defect with `H` (convergent)
/// and the adjoint-symmetry residual against the mirror construction
/// (component `adjoint_symmetry`, relative).
pub fn t_omega_checks(t: &ConformalTriple, omega: f64, w: Window) -> Result<ResidualRecord> {
    let op = t_omega(t, omega)?;
    let mirror = t_omega_mirror(t, omega)?;
    let adj = op.matrix.adjoint();
    let sym = window_defect_relative(&adj, &mirror, w)?;
    let mut rec = commutator_defect(&t.h, &op, w, Tier::Convergent)?.with_component("adjoint_symmetry", sym);
    rec.label = "t_omega_commutator".into();
    Ok(rec)
}

/// `T = H^{-1/2} D H^{-1/2}`.
pub fn t_minimal(t: &ConformalTriple) -> Result<TimeOperator> {
    let r = hermitian_inv_sqrt(&t.h)?;
    let m = r.matmul(&t.d)?.matmul(&r)?;
    let kind =
        if (t.sector.k() - 0.75).abs() < 1e-12 { TimeOperatorKind::FreeSector } else { TimeOperatorKind::Minimal };
    Ok(TimeOperator::new(m, kind, &[("k", t.sector.k())]))
}

/// Small-frequency behavior of `T(ω)`.
#[derive(Clone, Debug)]
pub struct SmallOmegaReport {
    pub record: ResidualRecord,
    /// Hermitian part of `T(ω)` against the minimal operator.
    pub hermitian: ConvergenceTable,
    /// Anti-Hermitian part against `i/(2ω) + i(2k+1)/(2H)`.
    pub anti_hermitian: ConvergenceTable,
    /// Anti-Hermitian residual divided by `1/(2ω)`.
    pub anti_hermitian_fraction: Vec<f64>,
}

pub fn small_omega_report(t: &ConformalTriple, omegas: &[f64], w: Window) -> Result<SmallOmegaReport> {
    if omegas.is_empty() {
        return Err(VlabError::InvalidParameter("no frequencies given".into()));
    }
    for &o in omegas {
        check_frequency(o, false)?;
    }
    if omegas.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(VlabError::InvalidParameter("frequencies must be strictly descending".into()));
    }
    w.check(t.dim(), t.dim())?;
    let tmin = t_minimal(t)?;
    let h_inv = hermitian_inverse(&t.h)?;
    let k = t.sector.k();
    let mut herm = Vec::new();
    let mut anti = Vec::new();
    let mut fraction = Vec::new();
    let mut exact_fraction = 0.0;
    for &omega in omegas {
        let op = t_omega(t, omega)?;
        herm.push((omega, window_defect(&hermitian_part(&op.matrix), &tmin.matrix, w)?));
        let target = t.identity().scale(c64::new(0.0, 0.5 / omega)).add_scaled(&h_inv, c64::new(0.0, k + 0.5))?;
        let a = window_defect(&anti_hermitian_part(&op.matrix), &target, w)?;
        anti.push((omega, a));
        fraction.push(a * 2.0 * omega);
        // Exact closed form: T(ω) = i/2ω + (D - ik) H^{-1}.
        let closed = t.identity().scale(c64::new(0.0, 0.5 / omega)).add_scaled(&h_inv, c64::new(0.0, 0.5 - k))?;
        exact_fraction = window_defect(&anti_hermitian_part(&op.matrix), &closed, w)? * 2.0 * omega;
    }
    let hermitian = ConvergenceTable::new("small_omega_hermitian", "omega", &herm);
    let anti_hermitian = ConvergenceTable::new("small_omega_antihermitian", "omega", &anti);
    let last = herm.len() - 1;
    let mut record = ResidualRecord::new("small_omega", Tier::ReportOnly, w.size(), herm[last].1, herm[last].1)
        .with_component("antihermitian_fraction", fraction[last])
        .with_component("antihermitian_fraction_closed_form", exact_fraction);
    if let Some(order) = hermitian.mean_order() {
        record = record.with_component("hermitian_order", order);
    }
    Ok(SmallOmegaReport { record, hermitian, anti_hermitian, anti_hermitian_fraction: fraction })
}

fn require_free_sector(s: &Sector) -> Result<()> {
    if (s.k() - 0.75).abs() > 1e-12 {
        return Err(VlabError::InvalidParameter(format!("requires the free sector k = 3/4, got k = {}", s.k())));
    }
    Ok(())
}

/// `Q = -T0 + (i/4) H0^{-1}` in the free sector.
pub fn q_operator(t: &ConformalTriple) -> Result<TimeOperator> {
    require_free_sector(&t.sector)?;
    let t0 = t_minimal(t)?;
    let h_inv = hermitian_inverse(&t.h)?;
    let q = t0.matrix.scale_real(-1.0).add_scaled(&h_inv, c64::new(0.0, 0.25))?;
    Ok(TimeOperator::new(q, TimeOperatorKind::Q, &[("k", 0.75)]))
}

/// Residuals of `K = T0 H0 T0 + 1/(16 H0)` (`first_form`) and
/// `K = Q H0 Q - (i/2) Q` (`second_form`), plus their mutual agreement.
pub fn k_identity_defect(t: &ConformalTriple, w: Window) -> Result<ResidualRecord> {
    require_free_sector(&t.sector)?;
    w.check(t.dim(), t.dim())?;
    let t0 = t_minimal(t)?.matrix;
    let h_inv = hermitian_inverse(&t.h)?;
    let q = q_operator(t)?.matrix;
    let first = t0.matmul(&t.h)?.matmul(&t0)?.add_scaled(&h_inv, c64::new(1.0 / 16.0, 0.0))?;
    let second = q.matmul(&t.h)?.matmul(&q)?.add_scaled(&q, c64::new(0.0, -0.5))?;
    let r1 = window_defect(&first, &t.k, w)?;
    let r2 = window_defect(&second, &t.k, w)?;
    let agree = window_defect(&first, &second, w)?;
    Ok(ResidualRecord::new("k_identity", Tier::Convergent, w.size(), r1, window_defect_relative(&first, &t.k, w)?)
        .with_component("first_form", r1)
        .with_component("second_form", r2)
        .with_component("forms_agreement", agree))
}

/// `H_h = H0 + ω² K`.
pub fn harmonic_hamiltonian(t: &ConformalTriple, omega: f64) -> Result<OperatorMatrix> {
    t.h.add_scaled(&t.k, c64::new(omega * omega, 0.0))
}

/// Max-abs difference between `H0 + ω²K` and `2ω K3ω`.
pub fn harmonic_hamiltonian_identity(t: &ConformalTriple, omega: f64) -> Result<f64> {
    let f = omega_family(t, omega)?;
    Ok(harmonic_hamiltonian(t, omega)?.sub(&f.k3.scale_real(2.0 * omega))?.max_abs())
}

/// `T_h = Herm(arctan(ωQ)/ω)` in the free sector.
pub fn t_harmonic(t: &ConformalTriple, omega: f64) -> Result<TimeOperator> {
    t_harmonic_with(t, omega, BRANCH_GUARD, KAPPA_MAX)
}

pub fn t_harmonic_with(t: &ConformalTriple, omega: f64, branch_guard: f64, kappa_max: f64) -> Result<TimeOperator> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(VlabError::InvalidParameter(format!("frequency {omega} must be positive")));
    }
    let q = q_operator(t)?.matrix;
    let at = arctan(&q.scale_real(omega), branch_guard, kappa_max)?.scale_real(1.0 / omega);
    Ok(TimeOperator::new(hermitian_part(&at), TimeOperatorKind::Harmonic, &[("omega", omega), ("k", 0.75)]))
}

/// `[H_h, T_h] - i` on a window. Components: the `H_h = 2ωK3ω` identity and
/// `opposite_sign`, the defect against `-i` (`Q` is built from `-T0`).
pub fn harmonic_commutator_defect(t: &ConformalTriple, omega: f64, w: Window) -> Result<ResidualRecord> {
    let th = t_harmonic(t, omega)?;
    let hh = harmonic_hamiltonian(t, omega)?;
    let minus_i = hh.identity_like().scale(c64::new(0.0, -1.0));
    let opposite = window_defect(&commutator(&hh, &th.matrix)?, &minus_i, w)?;
    let mut rec = commutator_defect(&hh, &th, w, Tier::ReportOnly)?
        .with_component("hamiltonian_identity", harmonic_hamiltonian_identity(t, omega)?)
        .with_component("opposite_sign", opposite);
    rec.label = "harmonic_commutator".into();
    Ok(rec)
}

/// `T_h(ω) + T0` on a window: the arctangent reduces to `Herm(Q) = -T0` as `ω -> 0`.
pub fn harmonic_limit_defect(t: &ConformalTriple, omega: f64, w: Window) -> Result<f64> {
    let th = t_harmonic(t, omega)?;
    let t0 = t_minimal(t)?;
    window_defect(&th.matrix, &t0.matrix.scale_real(-1.0), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::conformal_triple;
    use crate::matcore::BasisTag;

    fn triple(k: f64, n: usize) -> ConformalTriple {
        conformal_triple(&Sector::from_k(k, n).unwrap()).unwrap()
    }

    #[test]
    fn zero_operator_has_unit_defect() {
        let t = triple(1.25, 16);
        let z = TimeOperator::new(OperatorMatrix::zeros(16, t.sector.basis()), TimeOperatorKind::Minimal, &[]);
        let r = commutator_defect(&t.h, &z, Window::new(8).unwrap(), Tier::Convergent).unwrap();
        assert_eq!(r.absolute, 1.0);
        assert!((r.component("trace_abs").unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_obstruction() {
        // trace([H,T]) = 0 while trace(i 1) = 2i, so some diagonal entry misses by >= 1
        let tag = BasisTag::new("toy");
        let h = OperatorMatrix::real_diagonal(&[0.0, 1.0], tag.clone());
        let m = OperatorMatrix::from_fn(2, tag, |i, j| c64::new((i + 2 * j) as f64, (i * j) as f64));
        let t = TimeOperator::new(m, TimeOperatorKind::Minimal, &[]);
        let r = commutator_defect(&h, &t, Window::new(2).unwrap(), Tier::ReportOnly).unwrap();
        assert!(r.absolute >= 1.0);
        assert!((r.component("trace_abs").unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bch_series_is_exact() {
        for (k, omega) in [(1.0, 0.5), (1.25, 0.2), (0.75, 0.9)] {
            let t = triple(k, 32);
            let r = bch_series_defect(&t, omega).unwrap();
            assert!(r.absolute < 1e-12 * 32.0, "{r:?}");
        }
    }

    #[test]
    fn bch_guards_and_small_frequency() {
        let t = triple(1.0, 32);
        assert!(bch_conjugation_defect(&t, 1.0, Window::new(8).unwrap()).is_err());
        assert!(bch_conjugation_defect(&t, 0.5, Window::new(9).unwrap()).is_err());
        let r = bch_conjugation_defect(&t, 1e-3, Window::new(8).unwrap()).unwrap();
        assert!(r.relative < 1e-10, "{r:?}");
    }

    #[test]
    fn minimal_operator_is_hermitian() {
        let t = triple(1.25, 64);
        let m = t_minimal(&t).unwrap();
        assert!(m.matrix.hermiticity_defect() <= 1e-12 * m.matrix.max_abs());
        assert_eq!(m.kind, TimeOperatorKind::Minimal);
        assert_eq!(t_minimal(&triple(0.75, 16)).unwrap().kind, TimeOperatorKind::FreeSector);
    }

    #[test]
    fn shift_by_function_of_h_keeps_defect() {
        let t = triple(1.25, 64);
        let m = t_minimal(&t).unwrap();
        let shifted = m.shifted_by_polynomial(&t.h, &[0.0, 1.0]).unwrap();
        let w = Window::new(8).unwrap();
        let a = x_defect(&t.h, &m, w).unwrap();
        let b = x_defect(&t.h, &shifted, w).unwrap();
        assert!(a.defect.sub(&b.defect).unwrap().block_max_abs(8) < 1e-12);
        assert!(x_defect(&OperatorMatrix::identity(64, BasisTag::new("x")), &m, w).is_err());
    }

    #[test]
    fn q_requires_free_sector() {
        assert!(q_operator(&triple(1.25, 16)).is_err());
        let t = triple(0.75, 32);
        let q = q_operator(&t).unwrap();
        let t0 = t_minimal(&t).unwrap();
        // the Hermitian part of Q is -T0 exactly
        let hq = hermitian_part(&q.matrix);
        assert!(hq.add(&t0.matrix).unwrap().max_abs() < 1e-12 * t0.matrix.max_abs());
    }

    #[test]
    fn two_forms_of_k_agree() {
        let t = triple(0.75, 64);
        let r = k_identity_defect(&t, Window::new(8).unwrap()).unwrap();
        assert!(r.component("forms_agreement").unwrap() < 1e-10, "{r:?}");
    }

    #[test]
    fn harmonic_hamiltonian_equals_scaled_k3() {
        let t = triple(0.75, 32);
        for omega in [0.1, 0.5, 1.0] {
            assert!(harmonic_hamiltonian_identity(&t, omega).unwrap() < 1e-13 * 64.0);
        }
    }

    #[test]
    fn t_omega_frequency_guard() {
        let t = triple(1.25, 16);
        assert!(t_omega(&t, 1.0).is_err());
        assert!(t_omega(&t, -0.2).is_err());
        assert!(t_harmonic(&triple(0.75, 16), 0.0).is_err());
    }
}
