//! Discrete-series sectors of su(1,1): generator matrices in the `|n,k>`
//! basis, the Casimir, Barut–Girardello coherent states and the Γ-ratio and
//! canonical-pair identities built from the ladder operators.

use faer::c64;
use libm::lgamma as ln_gamma;

use crate::error::{Result, VlabError};
use crate::matcore::{
    commutator, expm_nilpotent, window_defect, window_defect_relative, BasisTag, OperatorMatrix, Window,
};
use crate::residual::{ResidualRecord, Tier};

/// A truncated discrete-series representation with Bargmann index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    k: f64,
    g: Option<f64>,
    dim: usize,
}

pub const MIN_DIM: usize = 4;

fn check_dim(dim: usize) -> Result<()> {
    if dim < MIN_DIM {
        return Err(VlabError::InvalidParameter(format!("dimension {dim} below minimum {MIN_DIM}")));
    }
    Ok(())
}

impl Sector {
    pub fn from_k(k: f64, dim: usize) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(VlabError::InvalidParameter(format!("Bargmann index k = {k} must be positive")));
        }
        check_dim(dim)?;
        Ok(Sector { k, g: None, dim })
    }

    /// Sector of the singular oscillator with coupling `g >= 0`;
    /// `k = (1 + sqrt(g + 1/4)) / 2`.
    pub fn from_g(g: f64, dim: usize) -> Result<Self> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(VlabError::InvalidParameter(format!("coupling g = {g} must be nonnegative")));
        }
        check_dim(dim)?;
        Ok(Sector { k: 0.5 * (1.0 + (g + 0.25).sqrt()), g: Some(g), dim })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn g(&self) -> Option<f64> {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Sector { dim, ..self.clone() })
    }

    pub fn basis(&self) -> BasisTag {
        BasisTag::sector(self.k, self.dim)
    }

    /// `k(k-1)`.
    pub fn casimir_value(&self) -> f64 {
        self.k * (self.k - 1.0)
    }

    /// `(K+)_{n+1,n}`.
    pub fn raising_amplitude(&self, n: usize) -> f64 {
        let n = n as f64;
        ((n + 1.0) * (n + 2.0 * self.k)).sqrt()
    }
}

/// Casimir value `g/4 - 3/16` of the singular oscillator.
pub fn casimir_from_coupling(g: f64) -> f64 {
    g / 4.0 - 3.0 / 16.0
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub k3: OperatorMatrix,
    pub kplus: OperatorMatrix,
    pub kminus: OperatorMatrix,
    pub k1: OperatorMatrix,
    pub k2: OperatorMatrix,
}

pub fn generators(s: &Sector) -> GeneratorSet {
    let basis = s.basis();
    let n = s.dim();
    let zero = c64::new(0.0, 0.0);
    let k3 =
        OperatorMatrix::from_fn(n, basis.clone(), |i, j| if i == j { c64::new(i as f64 + s.k(), 0.0) } else { zero });
    let kplus = OperatorMatrix::from_fn(n, basis.clone(), |i, j| {
        if i == j + 1 {
            c64::new(s.raising_amplitude(j), 0.0)
        } else {
            zero
        }
    });
    let kminus = kplus.adjoint();
    let half = c64::new(0.5, 0.0);
    let minus_half_i = c64::new(0.0, -0.5);
    let k1 = OperatorMatrix::from_fn(n, basis.clone(), |i, j| (kplus.entry(i, j) + kminus.entry(i, j)) * half);
    let k2 = OperatorMatrix::from_fn(n, basis, |i, j| (kplus.entry(i, j) - kminus.entry(i, j)) * minus_half_i);
    GeneratorSet { k3, kplus, kminus, k1, k2 }
}

/// `K3^2 - (K+K- + K-K+)/2`.
pub fn casimir(s: &Sector) -> Result<OperatorMatrix> {
    let g = generators(s);
    let sym = g.kplus.matmul(&g.kminus)?.add(&g.kminus.matmul(&g.kplus)?)?.scale_real(0.5);
    g.k3.matmul(&g.k3)?.sub(&sym)
}

/// Closed-form corner entry of `[K-,K+] - 2K3` in an `N`-dimensional truncation.
pub fn lowering_raising_corner(k: f64, dim: usize) -> f64 {
    let n = dim as f64;
    -(n - 1.0) * (n - 2.0 + 2.0 * k) - 2.0 * (n - 1.0 + k)
}

/// Residuals of the defining relations on a sector.
///
/// Components: `k3_kplus` and `k3_kminus` over the full matrix,
/// `lowering_raising` on the leading `N-1` block, the observed and analytic
/// corner entries, and the Casimir interior deviation from `k(k-1)` (and from
/// `g/4 - 3/16` when the sector carries a coupling).
pub fn algebra_defects(s: &Sector) -> Result<ResidualRecord> {
    let g = generators(s);
    let n = s.dim();
    let interior = Window::new(n - 1)?;
    let r_plus = commutator(&g.k3, &g.kplus)?.sub(&g.kplus)?.max_abs();
    let r_minus = commutator(&g.k3, &g.kminus)?.add(&g.kminus)?.max_abs();
    let lr = commutator(&g.kminus, &g.kplus)?;
    let two_k3 = g.k3.scale_real(2.0);
    let r_lr = window_defect(&lr, &two_k3, interior)?;
    let corner = lr.sub(&two_k3)?.entry(n - 1, n - 1).re;
    let c = casimir(s)?;
    let c_ref = OperatorMatrix::identity(n, s.basis()).scale_real(s.casimir_value());
    let r_cas = window_defect(&c, &c_ref, interior)?;
    let mut rec = ResidualRecord::new("su11_algebra", Tier::Exact, n - 1, r_plus.max(r_minus).max(r_lr), 0.0)
        .with_component("k3_kplus", r_plus)
        .with_component("k3_kminus", r_minus)
        .with_component("lowering_raising", r_lr)
        .with_component("corner", corner)
        .with_component("corner_expected", lowering_raising_corner(s.k(), n))
        .with_component("casimir_interior", r_cas);
    if let Some(gc) = s.g() {
        let c_g = OperatorMatrix::identity(n, s.basis()).scale_real(casimir_from_coupling(gc));
        rec = rec.with_component("casimir_coupling", window_defect(&c, &c_g, interior)?);
    }
    rec.relative = window_defect_relative(&lr, &two_k3, interior)?;
    Ok(rec)
}

/// Unnormalized coherent-state coefficients plus their norm and the
/// eigenvalue residual `||(K- - z) v|| / ||v||`.
#[derive(Clone, Debug)]
pub struct CoherentVector {
    pub z: c64,
    pub coefficients: Vec<c64>,
    pub norm: f64,
    pub residual: f64,
    /// `|z| |c_{N-1}| / ||v||`: the residual in exact arithmetic, where only
    /// the truncated last row of `(K- - z) v` survives the recurrence.
    pub tail_residual: f64,
    /// Set when `|z|^2 > N min(1, 2k)`: the truncated tail then dominates.
    pub tail_warning: bool,
}

impl CoherentVector {
    fn finish(s: &Sector, z: c64, coefficients: Vec<c64>) -> Result<Self> {
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let g = generators(s);
        let kv = g.kminus.apply(&coefficients)?;
        let res = kv.iter().zip(&coefficients).map(|(a, c)| (a - z * c).norm_sqr()).sum::<f64>().sqrt();
        let tail_warning = z.norm_sqr() > s.dim() as f64 * (2.0 * s.k()).min(1.0);
        let tail_residual = z.norm() * coefficients[coefficients.len() - 1].norm() / norm;
        Ok(CoherentVector { z, coefficients, norm, residual: res / norm, tail_residual, tail_warning })
    }

    pub fn normalized(&self) -> Vec<c64> {
        self.coefficients.iter().map(|c| c / self.norm).collect()
    }
}

/// `ln sqrt(Γ(2k) / (Γ(2k+n) n!))`.
fn ln_coherent_weight(k: f64, n: usize) -> f64 {
    let n = n as f64;
    0.5 * (ln_gamma(2.0 * k) - ln_gamma(2.0 * k + n) - ln_gamma(n + 1.0))
}

/// Barut–Girardello state from its power series `c_n = z^n sqrt(Γ(2k)/(Γ(2k+n) n!))`.
pub fn bg_state_series(s: &Sector, z: c64) -> Result<CoherentVector> {
    let n = s.dim();
    let mut coefficients = vec![c64::new(0.0, 0.0); n];
    coefficients[0] = c64::new(1.0, 0.0);
    if z.norm() > 0.0 {
        let (r, theta) = z.to_polar();
        for (m, c) in coefficients.iter_mut().enumerate().skip(1) {
            let log_mag = m as f64 * r.ln() + ln_coherent_weight(s.k(), m);
            if log_mag > f64::MAX_EXP as f64 * std::f64::consts::LN_2 {
                return Err(VlabError::PrecisionLoss(format!(
                    "coefficient {m} overflows (log magnitude {log_mag:.1})"
                )));
            }
            *c = c64::from_polar(log_mag.exp(), m as f64 * theta);
        }
    }
    CoherentVector::finish(s, z, coefficients)
}

/// `z K+ (K3 + k)^{-1}`; strictly lower bidiagonal.
pub fn canonical_raising(s: &Sector) -> Result<OperatorMatrix> {
    let g = generators(s);
    let inv: Vec<f64> = (0..s.dim()).map(|n| 1.0 / (n as f64 + 2.0 * s.k())).collect();
    g.kplus.matmul(&OperatorMatrix::real_diagonal(&inv, s.basis()))
}

/// Barut–Girardello state as `exp(z K+ (K3+k)^{-1}) |0,k>`.
pub fn bg_state_exponential(s: &Sector, z: c64) -> Result<CoherentVector> {
    let a = canonical_raising(s)?.scale(z);
    let e = expm_nilpotent(&a)?;
    let coefficients: Vec<c64> = (0..s.dim()).map(|i| e.entry(i, 0)).collect();
    if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(VlabError::PrecisionLoss("exponential series overflowed".into()));
    }
    CoherentVector::finish(s, z, coefficients)
}

/// Which ladder identity [`identity_defect`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderIdentity {
    /// `[K+(K3+k)^{-1}]^n = K+^n Γ(K3+k)/Γ(K3+k+n)`, window `<= N-n`.
    GammaShift(usize),
    /// `[K-, K+(K3+k)^{-1}] = 1`, window `<= N-1`.
    CanonicalPair,
}

pub fn identity_defect(s: &Sector, which: LadderIdentity, w: Window) -> Result<ResidualRecord> {
    let n = s.dim();
    match which {
        LadderIdentity::GammaShift(power) => {
            if power < 1 || power > n - 2 {
                return Err(VlabError::InvalidParameter(format!("shift {power} outside 1..={}", n - 2)));
            }
            w.check(n, n - power)?;
            let step = canonical_raising(s)?;
            let mut lhs = step.clone();
            for _ in 1..power {
                lhs = lhs.matmul(&step)?;
            }
            let g = generators(s);
            let mut kp_pow = g.kplus.clone();
            for _ in 1..power {
                kp_pow = kp_pow.matmul(&g.kplus)?;
            }
            let ratio: Vec<f64> = (0..n)
                .map(|m| {
                    let a = m as f64 + 2.0 * s.k();
                    (ln_gamma(a) - ln_gamma(a + power as f64)).exp()
                })
                .collect();
            let rhs = kp_pow.matmul(&OperatorMatrix::real_diagonal(&ratio, s.basis()))?;
            Ok(ResidualRecord::new(
                format!("gamma_shift_{power}"),
                Tier::Exact,
                w.size(),
                window_defect(&lhs, &rhs, w)?,
                window_defect_relative(&lhs, &rhs, w)?,
            ))
        }
        LadderIdentity::CanonicalPair => {
            w.check(n, n - 1)?;
            let g = generators(s);
            let c = commutator(&g.kminus, &canonical_raising(s)?)?;
            let id = OperatorMatrix::identity(n, s.basis());
            Ok(ResidualRecord::new(
                "canonical_pair",
                Tier::Exact,
                w.size(),
                window_defect(&c, &id, w)?,
                window_defect_relative(&c, &id, w)?,
            )
            .with_component("corner", c.entry(n - 1, n - 1).re))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_from_coupling() {
        assert_eq!(Sector::from_g(2.0, 8).unwrap().k(), 1.25);
        assert_eq!(Sector::from_g(0.0, 8).unwrap().k(), 0.75);
        assert!(Sector::from_k(-1.0, 8).is_err());
        assert!(Sector::from_k(0.0, 8).is_err());
        assert!(Sector::from_g(-0.1, 8).is_err());
        assert!(Sector::from_k(1.0, 3).is_err());
    }

    #[test]
    fn generator_entries() {
        let s = Sector::from_k(1.0, 4).unwrap();
        let g = generators(&s);
        assert!((g.kplus.entry(1, 0).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.kplus.entry(2, 1).re - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.k3.entry(0, 0).re, 1.0);
        assert_eq!(g.kminus, g.kplus.adjoint());
        assert!(commutator(&g.k3, &g.kplus).unwrap().sub(&g.kplus).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn lowering_raising_corner_at_four() {
        let s = Sector::from_k(1.0, 4).unwrap();
        let g = generators(&s);
        let c = commutator(&g.kminus, &g.kplus).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| c.entry(i, i).re).collect();
        for (got, want) in diag.iter().zip([2.0, 4.0, 6.0, -12.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(lowering_raising_corner(1.0, 4), -20.0);
        let two_k3 = g.k3.scale_real(2.0);
        assert!(window_defect(&c, &two_k3, Window::new(3).unwrap()).unwrap() < 1e-12);
        assert!((window_defect(&c, &two_k3, Window::new(4).unwrap()).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn casimir_interior_values() {
        for (s, want) in [
            (Sector::from_k(1.0, 16).unwrap(), 0.0),
            (Sector::from_g(0.0, 16).unwrap(), -0.1875),
            (Sector::from_g(2.0, 16).unwrap(), 0.3125),
        ] {
            let c = casimir(&s).unwrap();
            for i in 0..15 {
                assert!((c.entry(i, i).re - want).abs() < 1e-12, "k={} i={i}", s.k());
            }
        }
    }

    #[test]
    fn coherent_coefficients() {
        let s = Sector::from_k(1.0, 16).unwrap();
        let v = bg_state_series(&s, c64::new(1.0, 0.0)).unwrap();
        assert!((v.coefficients[2].re / v.coefficients[0].re - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);

        let vac = bg_state_series(&s, c64::new(0.0, 0.0)).unwrap();
        assert_eq!(vac.coefficients[0], c64::new(1.0, 0.0));
        assert!(vac.coefficients[1..].iter().all(|c| c.norm() == 0.0));
        assert!(vac.residual < 1e-16);

        let z = c64::new(0.3, -0.2);
        let e = bg_state_exponential(&s, z).unwrap();
        assert!((e.coefficients[1] - z / 2f64.sqrt()).norm() < 1e-15);
        let e0 = bg_state_exponential(&s, c64::new(0.0, 0.0)).unwrap();
        assert_eq!(e0.coefficients, vac.coefficients);
    }

    #[test]
    fn coherent_ratio_invariant() {
        let s = Sector::from_k(1.25, 32).unwrap();
        let z = c64::new(0.7, 0.4);
        let v = bg_state_series(&s, z).unwrap();
        for n in 0..31 {
            let ratio = v.coefficients[n + 1] / v.coefficients[n];
            let want = z / s.raising_amplitude(n);
            assert!((ratio - want).norm() < 1e-13 * want.norm());
        }
    }

    #[test]
    fn series_and_exponential_agree() {
        let s = Sector::from_k(1.25, 64).unwrap();
        let z = c64::new(0.5, 0.0);
        let a = bg_state_series(&s, z).unwrap();
        let b = bg_state_exponential(&s, z).unwrap();
        let diff = a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12);
    }

    #[test]
    fn soft_bound_warning() {
        let s = Sector::from_k(1.0, 16).unwrap();
        assert!(!bg_state_series(&s, c64::new(1.0, 0.0)).unwrap().tail_warning);
        assert!(bg_state_series(&s, c64::new(5.0, 0.0)).unwrap().tail_warning);
    }

    #[test]
    fn gamma_shift_two_on_vacuum() {
        let s = Sector::from_k(1.0, 8).unwrap();
        let step = canonical_raising(&s).unwrap();
        let sq = step.matmul(&step).unwrap();
        assert!((sq.entry(2, 0).re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = identity_defect(&s, LadderIdentity::GammaShift(2), Window::new(6).unwrap()).unwrap();
        assert!(r.absolute < 1e-14);
        let r1 = identity_defect(&s, LadderIdentity::GammaShift(1), Window::new(7).unwrap()).unwrap();
        assert!(r1.absolute < 1e-14);
        assert!(identity_defect(&s, LadderIdentity::GammaShift(2), Window::new(7).unwrap()).is_err());
        assert!(identity_defect(&s, LadderIdentity::GammaShift(0), Window::new(2).unwrap()).is_err());
    }

    #[test]
    fn canonical_pair_window_and_corner() {
        let s = Sector::from_k(1.0, 4).unwrap();
        let r = identity_defect(&s, LadderIdentity::CanonicalPair, Window::new(3).unwrap()).unwrap();
        assert!(r.absolute < 1e-15);
        assert!((r.component("corner").unwrap() + 3.0).abs() < 1e-12);
        assert!(identity_defect(&s, LadderIdentity::CanonicalPair, Window::new(4).unwrap()).is_err());
    }
}
