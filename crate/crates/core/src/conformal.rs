//! Hamiltonians linear in the su(1,1) generators, and the singular
//! oscillator's conformal triple `H, D, K` realized in a fixed sector basis.
//!
//! The fixed basis is the `K3` eigenbasis at reference frequency one, so
//! `H = K3 - K1`, `D = K2`, `K = K3 + K1` are frequency independent. Every
//! other frequency enters through [`OmegaFamily`].

use faer::{c64, Mat};

use crate::error::{Result, VlabError};
use crate::matcore::{
    commutator, eigh, expm_nonnegative, window_defect, window_defect_relative, OperatorMatrix, Window,
};
use crate::residual::{ConvergenceTable, ResidualRecord, Tier};
use crate::su11::{bg_state_series, casimir_from_coupling, generators, GeneratorSet, Sector};

/// Coefficient vector of `Ω3 K3 + Ω2 K2 + Ω1 K1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaVector {
    pub o1: f64,
    pub o2: f64,
    pub o3: f64,
}

impl OmegaVector {
    pub fn new(o1: f64, o2: f64, o3: f64) -> Self {
        OmegaVector { o1, o2, o3 }
    }

    /// Minkowski norm `Ω3² - Ω2² - Ω1²`.
    pub fn norm_sq(&self) -> f64 {
        self.o3 * self.o3 - self.o2 * self.o2 - self.o1 * self.o1
    }

    fn euclid_sq(&self) -> f64 {
        self.o3 * self.o3 + self.o2 * self.o2 + self.o1 * self.o1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumCase {
    /// Timelike, `Ω3 > 0`: discrete spectrum `Ω (n + k)`.
    Discrete,
    /// Lightlike, `Ω3 > 0`: continuous spectrum bounded below.
    Continuous,
    Unsupported,
}

/// Relative tolerance for treating the Minkowski norm as zero.
pub const LIGHTLIKE_TOL: f64 = 1e-12;

pub fn classify(omega: &OmegaVector) -> SpectrumCase {
    let n2 = omega.norm_sq();
    if !(omega.o3 > 0.0) {
        return SpectrumCase::Unsupported;
    }
    if n2.abs() <= LIGHTLIKE_TOL * omega.euclid_sq() {
        SpectrumCase::Continuous
    } else if n2 > 0.0 {
        SpectrumCase::Discrete
    } else {
        SpectrumCase::Unsupported
    }
}

pub fn linear_hamiltonian(s: &Sector, omega: &OmegaVector) -> Result<OperatorMatrix> {
    let g = generators(s);
    g.k3.scale_real(omega.o3).add_scaled(&g.k2, c64::new(omega.o2, 0.0))?.add_scaled(&g.k1, c64::new(omega.o1, 0.0))
}

/// `H`, `D`, `K` of the singular oscillator in the sector basis.
#[derive(Clone, Debug)]
pub struct ConformalTriple {
    pub sector: Sector,
    pub generators: GeneratorSet,
    pub h: OperatorMatrix,
    pub d: OperatorMatrix,
    pub k: OperatorMatrix,
}

pub fn conformal_triple(s: &Sector) -> Result<ConformalTriple> {
    let g = generators(s);
    let h = g.k3.sub(&g.k1)?;
    let k = g.k3.add(&g.k1)?;
    let d = g.k2.clone();
    Ok(ConformalTriple { sector: s.clone(), generators: g, h, d, k })
}

impl ConformalTriple {
    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn identity(&self) -> OperatorMatrix {
        OperatorMatrix::identity(self.dim(), self.sector.basis())
    }

    /// Casimir constant: `g/4 - 3/16` when the sector carries a coupling,
    /// `k(k-1)` otherwise (the two agree identically).
    pub fn casimir_constant(&self) -> f64 {
        match self.sector.g() {
            Some(g) => casimir_from_coupling(g),
            None => self.sector.casimir_value(),
        }
    }
}

/// Frequency-dependent generators `K3ω = (ωK + H/ω)/2`, `K1ω = (ωK - H/ω)/2`,
/// `K2ω = D`, `K±ω = K1ω ± i K2ω`.
#[derive(Clone, Debug)]
pub struct OmegaFamily {
    pub omega: f64,
    pub k3: OperatorMatrix,
    pub k1: OperatorMatrix,
    pub k2: OperatorMatrix,
    pub kplus: OperatorMatrix,
    pub kminus: OperatorMatrix,
}

pub(crate) fn check_frequency(omega: f64, allow_one: bool) -> Result<()> {
    let ok = omega > 0.0 && (omega < 1.0 || (allow_one && omega == 1.0));
    if !ok {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        return Err(VlabError::InvalidParameter(format!("frequency {omega} outside {range}")));
    }
    Ok(())
}

pub fn omega_family(t: &ConformalTriple, omega: f64) -> Result<OmegaFamily> {
    check_frequency(omega, true)?;
    let wk = t.k.scale_real(omega);
    let h_over = t.h.scale_real(1.0 / omega);
    let k3 = wk.add(&h_over)?.scale_real(0.5);
    let k1 = wk.sub(&h_over)?.scale_real(0.5);
    let k2 = t.d.clone();
    let i = c64::new(0.0, 1.0);
    let kplus = k1.add_scaled(&k2, i)?;
    let kminus = k1.add_scaled(&k2, -i)?;
    Ok(OmegaFamily { omega, k3, k1, k2, kplus, kminus })
}

/// Windowed residuals of `[H,D] = iH`, `[K,D] = -iK`, `[H,K] = 2iD` and the
/// constant Casimir `(HK + KH)/2 - D²`. Window at most `N - 2`.
pub fn algebra_defects(t: &ConformalTriple, w: Window) -> Result<ResidualRecord> {
    let n = t.dim();
    w.check(n, n - 2)?;
    let i = c64::new(0.0, 1.0);
    let hd = commutator(&t.h, &t.d)?;
    let kd = commutator(&t.k, &t.d)?;
    let hk = commutator(&t.h, &t.k)?;
    let ih = t.h.scale(i);
    let mik = t.k.scale(-i);
    let two_id = t.d.scale(c64::new(0.0, 2.0));
    let cas = t.h.matmul(&t.k)?.add(&t.k.matmul(&t.h)?)?.scale_real(0.5).sub(&t.d.matmul(&t.d)?)?;
    let cas_ref = t.identity().scale_real(t.casimir_constant());
    let parts = [
        ("hd", window_defect(&hd, &ih, w)?),
        ("kd", window_defect(&kd, &mik, w)?),
        ("hk", window_defect(&hk, &two_id, w)?),
        ("casimir", window_defect(&cas, &cas_ref, w)?),
    ];
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let rel = [
        window_defect_relative(&hd, &ih, w)?,
        window_defect_relative(&kd, &mik, w)?,
        window_defect_relative(&hk, &two_id, w)?,
        window_defect_relative(&cas, &cas_ref, w)?,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let mut rec = ResidualRecord::new("conformal_algebra", Tier::Exact, w.size(), worst, rel);
    for (name, v) in parts {
        rec = rec.with_component(name, v);
    }
    Ok(rec)
}

/// Lowest eigenpairs of a truncated discrete-case Hamiltonian against `Ω(n+k)`.
#[derive(Clone, Debug)]
pub struct SpectralCheck {
    pub eigenvalues: Vec<f64>,
    /// Expansion coefficients `C_n(λ)` as columns, one per eigenvalue.
    pub eigenvectors: Mat<c64>,
    pub reference: Vec<f64>,
    pub deviations: Vec<f64>,
    /// `|λ(N) - λ(2N)|` per eigenvalue.
    pub self_convergence: Vec<f64>,
}

impl SpectralCheck {
    /// Largest deviation minus its allowance `max(floor, self-convergence)`;
    /// nonpositive means every eigenvalue is within tolerance.
    pub fn worst_excess(&self, floor: f64) -> f64 {
        self.deviations
            .iter()
            .zip(&self.self_convergence)
            .map(|(d, s)| d - floor.max(*s))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn case_a_spectrum(s: &Sector, omega: &OmegaVector, count: usize) -> Result<SpectralCheck> {
    if classify(omega) != SpectrumCase::Discrete {
        return Err(VlabError::InvalidParameter(format!("{omega:?} is not a discrete-spectrum vector")));
    }
    if count == 0 || count > s.dim() / 4 {
        return Err(VlabError::InvalidParameter(format!("count {count} outside 1..={}", s.dim() / 4)));
    }
    let (values, vectors) = eigh(&linear_hamiltonian(s, omega)?)?;
    let (values2, _) = eigh(&linear_hamiltonian(&s.with_dim(2 * s.dim())?, omega)?)?;
    let big = omega.norm_sq().sqrt();
    let reference: Vec<f64> = (0..count).map(|n| big * (n as f64 + s.k())).collect();
    let eigenvalues: Vec<f64> = values[..count].to_vec();
    let deviations = eigenvalues.iter().zip(&reference).map(|(a, b)| (a - b).abs()).collect();
    let self_convergence = eigenvalues.iter().zip(&values2).map(|(a, b)| (a - b).abs()).collect();
    let n = s.dim();
    let eigenvectors = Mat::from_fn(n, count, |i, j| vectors[(i, j)]);
    Ok(SpectralCheck { eigenvalues, eigenvectors, reference, deviations, self_convergence })
}

/// Eigenvectors of `K3ω` as columns, ascending, with phases chosen so that
/// `<n+1|K+ω|n>` is real and positive: the frequency-`ω` copy of `|n,k>`.
pub fn omega_basis(f: &OmegaFamily) -> Result<Mat<c64>> {
    let (_, mut v) = eigh(&f.k3)?;
    let n = v.nrows();
    let kp = f.kplus.as_mat();
    // fix the vacuum by making its largest component real and positive
    let (mut best, mut arg) = (0.0, 0usize);
    for i in 0..n {
        if v[(i, 0)].norm() > best {
            best = v[(i, 0)].norm();
            arg = i;
        }
    }
    let phase = v[(arg, 0)].conj() / best;
    for i in 0..n {
        v[(i, 0)] *= phase;
    }
    for col in 1..n {
        let mut amp = c64::new(0.0, 0.0);
        for r in 0..n {
            let mut kv = c64::new(0.0, 0.0);
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                kv += kp[(r, c)] * v[(c, col - 1)];
            }
            amp += v[(r, col)].conj() * kv;
        }
        if amp.norm() > 0.0 {
            let phase = amp.conj() / amp.norm();
            for r in 0..n {
                v[(r, col)] *= phase;
            }
        }
    }
    Ok(v)
}

/// `|E> = exp(ωK) |z, k>_ω` with `z = -E/(2ω)`, and its windowed relative
/// eigen-residual `||W(H - E)|E>|| / ||W|E>||`.
///
/// `|E>` is a generalized eigenvector, so the residual is a diagnostic.
pub fn energy_eigenvector(t: &ConformalTriple, omega: f64, energy: f64, w: Window) -> Result<ResidualRecord> {
    check_frequency(omega, false)?;
    if !(energy >= 0.0) {
        return Err(VlabError::InvalidParameter(format!("energy {energy} must be nonnegative")));
    }
    let n = t.dim();
    w.check(n, n)?;
    let f = omega_family(t, omega)?;
    let basis = omega_basis(&f)?;
    let z = c64::new(-energy / (2.0 * omega), 0.0);
    let coh = bg_state_series(&t.sector, z)?;
    let mut state = vec![c64::new(0.0, 0.0); n];
    for (j, c) in coh.coefficients.iter().enumerate() {
        for (i, s) in state.iter_mut().enumerate() {
            *s += basis[(i, j)] * c;
        }
    }
    let e_k = expm_nonnegative(&t.k, omega)?;
    let vec_e = e_k.apply(&state)?;
    let hv = t.h.apply(&vec_e)?;
    let m = w.size();
    let num: f64 = (0..m).map(|i| (hv[i] - vec_e[i] * energy).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = (0..m).map(|i| vec_e[i].norm_sqr()).sum::<f64>().sqrt();
    Ok(ResidualRecord::new("energy_eigenvector", Tier::ReportOnly, m, num, num / den)
        .with_component("coherent_residual", coh.residual))
}

/// [`energy_eigenvector`] relative residual across truncation dimensions.
pub fn energy_eigenvector_trend(
    sector: &Sector,
    omega: f64,
    energy: f64,
    w: Window,
    dims: &[usize],
) -> Result<ConvergenceTable> {
    let mut points = Vec::with_capacity(dims.len());
    for &dim in dims {
        let t = conformal_triple(&sector.with_dim(dim)?)?;
        points.push((dim as f64, energy_eigenvector(&t, omega, energy, w)?.relative));
    }
    Ok(ConvergenceTable::new("energy_eigenvector", "dim", &points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(classify(&OmegaVector::new(0.3, 0.0, 1.0)), SpectrumCase::Discrete);
        assert_eq!(classify(&OmegaVector::new(1.0, 0.0, 1.0)), SpectrumCase::Continuous);
        assert_eq!(classify(&OmegaVector::new(2.0, 0.0, 1.0)), SpectrumCase::Unsupported);
        assert_eq!(classify(&OmegaVector::new(0.0, 0.0, -1.0)), SpectrumCase::Unsupported);
        assert!((OmegaVector::new(0.3, 0.0, 1.0).norm_sq() - 0.91).abs() < 1e-15);
    }

    #[test]
    fn triple_structure() {
        let s = Sector::from_g(2.0, 64).unwrap();
        let t = conformal_triple(&s).unwrap();
        for n in 0..64 {
            assert_eq!(t.h.entry(n, n).re, n as f64 + 1.25);
        }
        let two_k3 = t.generators.k3.scale_real(2.0);
        assert_eq!(t.k, two_k3.sub(&t.h).unwrap());
        let (vals, _) = eigh(&t.h).unwrap();
        assert!(vals[0] > 0.0);
        assert_eq!(t.h.hermiticity_defect(), 0.0);
        assert_eq!(t.d.hermiticity_defect(), 0.0);
    }

    #[test]
    fn linear_hamiltonian_special_vectors() {
        let s = Sector::from_k(1.0, 8).unwrap();
        let t = conformal_triple(&s).unwrap();
        assert_eq!(linear_hamiltonian(&s, &OmegaVector::new(0.0, 0.0, 1.0)).unwrap(), t.generators.k3);
        assert_eq!(linear_hamiltonian(&s, &OmegaVector::new(-1.0, 0.0, 1.0)).unwrap(), t.h);
        let h = linear_hamiltonian(&s, &OmegaVector::new(0.3, 0.0, 1.0)).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        for i in 0..8usize {
            for j in 0..8 {
                if i.abs_diff(j) > 1 {
                    assert_eq!(h.entry(i, j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn omega_family_identities() {
        let s = Sector::from_k(1.25, 16).unwrap();
        let t = conformal_triple(&s).unwrap();
        let f1 = omega_family(&t, 1.0).unwrap();
        assert_eq!(f1.k3, t.generators.k3);
        for w in [0.2, 0.5, 0.9] {
            let f = omega_family(&t, w).unwrap();
            let h = f.k3.sub(&f.k1).unwrap().scale_real(w);
            assert!(h.sub(&t.h).unwrap().max_abs() < 1e-13);
            let k = f.k3.add(&f.k1).unwrap().scale_real(1.0 / w);
            assert!(k.sub(&t.k).unwrap().max_abs() < 1e-13);
        }
        assert!(omega_family(&t, 1.5).is_err());
        assert!(omega_family(&t, 0.0).is_err());
    }

    #[test]
    fn conformal_relations_on_window() {
        let s = Sector::from_g(2.0, 64).unwrap();
        let t = conformal_triple(&s).unwrap();
        let r = algebra_defects(&t, Window::new(62).unwrap()).unwrap();
        assert!(r.absolute <= 1e-12 * 64.0, "{r:?}");
        assert!(algebra_defects(&t, Window::new(63).unwrap()).is_err());
        let s3 = Sector::from_g(3.0, 8).unwrap();
        assert!((s3.casimir_value() - 0.5625).abs() < 1e-15);
        assert!((casimir_from_coupling(3.0) - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn discrete_spectrum() {
        let s = Sector::from_k(1.0, 32).unwrap();
        let c = case_a_spectrum(&s, &OmegaVector::new(0.0, 0.0, 1.0), 8).unwrap();
        for (i, v) in c.eigenvalues.iter().enumerate() {
            assert!((v - (i as f64 + 1.0)).abs() < 1e-13);
        }
        assert!(case_a_spectrum(&s, &OmegaVector::new(0.0, 0.0, 1.0), 9).is_err());
        assert!(case_a_spectrum(&s, &OmegaVector::new(1.0, 0.0, 1.0), 4).is_err());
    }

    #[test]
    fn energy_eigenvector_domain() {
        let s = Sector::from_g(2.0, 32).unwrap();
        let t = conformal_triple(&s).unwrap();
        let w = Window::new(8).unwrap();
        assert!(energy_eigenvector(&t, 1.5, 1.0, w).is_err());
        assert!(energy_eigenvector(&t, 0.25, -1.0, w).is_err());
        let r = energy_eigenvector(&t, 0.25, 0.0, w).unwrap();
        assert!(r.relative.is_finite());
    }

    #[test]
    fn omega_basis_raises_with_positive_amplitudes() {
        let s = Sector::from_k(1.25, 48).unwrap();
        let t = conformal_triple(&s).unwrap();
        let f = omega_family(&t, 0.5).unwrap();
        let v = omega_basis(&f).unwrap();
        let op = OperatorMatrix::from_mat(v.clone(), s.basis()).unwrap();
        let rotated = op.adjoint().matmul(&f.kplus).unwrap().matmul(&op).unwrap();
        for n in 0..6 {
            let amp = rotated.entry(n + 1, n);
            assert!((amp.re - s.raising_amplitude(n)).abs() < 1e-8, "n={n} {amp}");
            assert!(amp.im.abs() < 1e-8);
        }
    }
}
