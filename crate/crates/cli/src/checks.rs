//! Residual computation for every catalog id.

use faer::c64;
use vlab_core::conformal::{
    algebra_defects as conformal_defects, case_a_spectrum, conformal_triple, energy_eigenvector,
    energy_eigenvector_trend, ConformalTriple, OmegaVector,
};
use vlab_core::intertwine::{
    fock_line, intertwiner_u1, overlap_matrix, t0_forms_agreement, t0_forms_trend, t_cs_defect, transport_defect,
    u1_intertwining_defect, unitarity_defect, unitary_u, FockLine, OverlapMethod, DEFAULT_P_MIN, FREE_K,
};
use vlab_core::matcore::{commutator, window_defect, Window};
use vlab_core::residual::ConvergenceTable;
use vlab_core::su11::{
    algebra_defects, bg_state_exponential, bg_state_series, identity_defect, LadderIdentity, Sector,
};
use vlab_core::timeops::{
    bch_conjugation_defect, bch_series_defect, harmonic_commutator_defect, harmonic_hamiltonian_identity,
    harmonic_limit_defect, k_identity_defect, small_omega_report, t_minimal, t_omega_checks, x_defect,
};
use vlab_core::{Result, VlabError};

use crate::config::SPECTRUM_COUNT;

/// Coherent-state labels.
const COHERENT_Z: [c64; 2] = [c64 { re: 0.5, im: 0.0 }, c64 { re: 1.0, im: 0.5 }];
/// Case (a) vector with `Ω = sqrt(0.91)`.
const CASE_A: [f64; 3] = [0.3, 0.0, 1.0];
const CASE_A_FLOOR: f64 = 1e-6;
const ENERGY: f64 = 1.0;
const SMALL_OMEGAS: [f64; 3] = [0.4, 0.2, 0.1];
const LIMIT_OMEGAS: [f64; 2] = [1e-2, 1e-3];
const P_MIN_SWEEP: [f64; 3] = [0.2, 0.5, 1.0];
/// Overlap comparisons run at this dimension (degrees up to 20).
const OVERLAP_DIM: usize = 21;
const OVERLAP_INDICES: [f64; 3] = [0.75, 1.25, 2.5];
/// Fallback for convergent checks: two orders of magnitude between these
/// dimensions at this window.
const FALLBACK_FROM: usize = 32;
const FALLBACK_WINDOW: usize = 8;
const FALLBACK_FACTOR: f64 = 1e-2;

/// Inputs shared by every check of a run.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub sector: Sector,
    pub w: Window,
    pub omega: f64,
}

impl Ctx {
    fn dim(&self) -> usize {
        self.sector.dim()
    }

    fn k(&self) -> f64 {
        self.sector.k()
    }

    fn triple(&self) -> Result<ConformalTriple> {
        conformal_triple(&self.sector)
    }

    fn triple_at(&self, dim: usize) -> Result<ConformalTriple> {
        conformal_triple(&self.sector.with_dim(dim)?)
    }

    fn free_triple_at(&self, dim: usize) -> Result<ConformalTriple> {
        conformal_triple(&Sector::from_k(FREE_K, dim)?)
    }

    /// `N/4, N/2, N`.
    fn dims(&self) -> [usize; 3] {
        let n = self.dim();
        [n / 4, n / 2, n]
    }
}

/// Outcome of one check before tolerances are applied.
#[derive(Clone, Debug, Default)]
pub struct Measured {
    pub residual: f64,
    /// Alternative acceptance route for convergent checks.
    pub fallback: Option<bool>,
    pub tables: Vec<ConvergenceTable>,
}

fn value(residual: f64) -> Measured {
    Measured { residual, ..Default::default() }
}

fn with_table(residual: f64, table: ConvergenceTable) -> Measured {
    Measured { residual, tables: vec![table], ..Default::default() }
}

/// `a / b` with `0 / 0 = 0` (an identity that already holds exactly).
fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn largest_ratio(t: &ConvergenceTable) -> f64 {
    t.rows.windows(2).map(|p| ratio(p[1].residual, p[0].residual)).fold(f64::NEG_INFINITY, f64::max)
}

fn dim_table(id: &str, dims: &[usize], mut f: impl FnMut(usize) -> Result<f64>) -> Result<ConvergenceTable> {
    let mut points = Vec::with_capacity(dims.len());
    for &d in dims {
        points.push((d as f64, f(d)?));
    }
    Ok(ConvergenceTable::new(id, "dim", &points))
}

/// Residuals at `N = 32` and at `N` on the fallback window; passes on a
/// drop of two orders of magnitude.
fn fallback(
    cx: &Ctx,
    id: &str,
    f: impl Fn(&ConformalTriple, Window) -> Result<f64>,
) -> Result<(bool, ConvergenceTable)> {
    let w = Window::new(FALLBACK_WINDOW)?;
    let dims = [FALLBACK_FROM, cx.dim()];
    let table = dim_table(id, &dims, |d| f(&cx.triple_at(d)?, w))?;
    let r = table.residuals();
    Ok((r[1] <= FALLBACK_FACTOR * r[0], table))
}

fn even_fock(dim: usize) -> Result<FockLine> {
    fock_line(dim - dim % 2)
}

pub fn measure(id: &str, cx: &Ctx) -> Result<Measured> {
    let n = cx.dim();
    let w = cx.w;
    match id {
        "su11_k3_kplus" | "su11_k3_kminus" | "su11_lowering_raising" => {
            let name = id.trim_start_matches("su11_");
            Ok(value(algebra_defects(&cx.sector)?.component(name).unwrap_or(f64::NAN)))
        }
        "su11_corner" => {
            let r = algebra_defects(&cx.sector)?;
            let (got, want) =
                (r.component("corner").unwrap_or(f64::NAN), r.component("corner_expected").unwrap_or(f64::NAN));
            Ok(value((got - want).abs() / want.abs()))
        }
        "su11_casimir" => {
            let r = algebra_defects(&cx.sector)?;
            let interior = r.component("casimir_interior").unwrap_or(f64::NAN);
            Ok(value(interior.max(r.component("casimir_coupling").unwrap_or(0.0))))
        }
        "gamma_shift" => {
            let mut worst = 0.0f64;
            for power in 1..=10.min(n - 2) {
                let r = identity_defect(&cx.sector, LadderIdentity::GammaShift(power), Window::new(n - power)?)?;
                worst = worst.max(r.absolute);
            }
            Ok(value(worst))
        }
        "canonical_pair" => {
            Ok(value(identity_defect(&cx.sector, LadderIdentity::CanonicalPair, Window::new(n - 1)?)?.absolute))
        }
        "canonical_corner" => {
            let r = identity_defect(&cx.sector, LadderIdentity::CanonicalPair, Window::new(n - 1)?)?;
            let want = -((n - 1) as f64);
            Ok(value((r.component("corner").unwrap_or(f64::NAN) - want).abs() / want.abs()))
        }

        "coherent_agreement" => {
            let mut worst = 0.0f64;
            for z in COHERENT_Z {
                let a = bg_state_series(&cx.sector, z)?;
                let b = bg_state_exponential(&cx.sector, z)?;
                let diff: f64 =
                    a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(diff / a.norm);
            }
            Ok(value(worst))
        }
        "coherent_residual" => {
            let mut worst = 0.0f64;
            for z in COHERENT_Z {
                worst = worst
                    .max(bg_state_series(&cx.sector, z)?.residual)
                    .max(bg_state_exponential(&cx.sector, z)?.residual);
            }
            Ok(value(worst))
        }
        "coherent_trend" => {
            let table = dim_table("coherent_residual", &[n / 2, n], |d| {
                let s = cx.sector.with_dim(d)?;
                let mut worst = 0.0f64;
                for z in COHERENT_Z {
                    worst = worst.max(bg_state_series(&s, z)?.residual);
                }
                Ok(worst)
            })?;
            Ok(with_table(largest_ratio(&table), table))
        }

        "conformal_algebra" => {
            let r = conformal_defects(&cx.triple()?, Window::new(n - 2)?)?;
            let worst = ["hd", "kd", "hk"].iter().map(|c| r.component(c).unwrap_or(f64::NAN)).fold(0.0, f64::max);
            Ok(value(worst))
        }
        "conformal_casimir" => {
            let r = conformal_defects(&cx.triple()?, Window::new(n - 2)?)?;
            Ok(value(r.component("casimir").unwrap_or(f64::NAN)))
        }
        "case_a_spectrum" => {
            let c = case_a_spectrum(&cx.sector, &OmegaVector::new(CASE_A[0], CASE_A[1], CASE_A[2]), SPECTRUM_COUNT)?;
            let worst =
                c.deviations.iter().zip(&c.self_convergence).map(|(d, s)| d / CASE_A_FLOOR.max(*s)).fold(0.0, f64::max);
            Ok(value(worst))
        }
        "case_a_identity" => {
            let c = case_a_spectrum(&cx.sector, &OmegaVector::new(0.0, 0.0, 1.0), SPECTRUM_COUNT)?;
            Ok(value(c.deviations.iter().cloned().fold(0.0, f64::max)))
        }
        "energy_eigenvector" => {
            let r = energy_eigenvector(&cx.triple()?, cx.omega, ENERGY, w)?;
            let table = energy_eigenvector_trend(&cx.sector, cx.omega, ENERGY, w, &cx.dims())?;
            Ok(with_table(r.relative, table))
        }

        "bch_series" => Ok(value(bch_series_defect(&cx.triple()?, cx.omega)?.absolute)),
        "bch_conjugation" => {
            let r = bch_conjugation_defect(&cx.triple()?, cx.omega, w)?;
            let mut m = value(r.relative);
            if n > FALLBACK_FROM {
                let (ok, table) = fallback(cx, "bch_conjugation_fallback", |t, fw| {
                    Ok(bch_conjugation_defect(t, cx.omega, fw)?.relative)
                })?;
                m.fallback = Some(ok);
                m.tables.push(table);
            }
            Ok(m)
        }
        "t_omega_commutator" => {
            let r = t_omega_checks(&cx.triple()?, cx.omega, w)?;
            let mut m = value(r.relative);
            if n > FALLBACK_FROM {
                let (ok, table) =
                    fallback(cx, "t_omega_commutator_fallback", |t, fw| Ok(t_omega_checks(t, cx.omega, fw)?.relative))?;
                m.fallback = Some(ok);
                m.tables.push(table);
            }
            Ok(m)
        }
        "t_omega_adjoint" => {
            let r = t_omega_checks(&cx.triple()?, cx.omega, w)?;
            Ok(value(r.component("adjoint_symmetry").unwrap_or(f64::NAN)))
        }
        "t_minimal_hermiticity" => {
            let t = t_minimal(&cx.triple()?)?.matrix;
            Ok(value(t.hermiticity_defect() / t.max_abs()))
        }
        "t_minimal_trend" => {
            let table = dim_table("t_minimal_defect", &cx.dims(), |d| {
                let t = cx.triple_at(d)?;
                Ok(x_defect(&t.h, &t_minimal(&t)?, w)?.defect_norm)
            })?;
            Ok(with_table(largest_ratio(&table), table))
        }
        "t_minimal_sandwich" => {
            let t = cx.triple()?;
            let x = x_defect(&t.h, &t_minimal(&t)?, w)?;
            Ok(value(ratio(x.sandwich_scaled, x.defect_norm)))
        }
        "t_minimal_shift" => {
            let t = cx.triple()?;
            let tm = t_minimal(&t)?;
            let shifted = tm.shifted_by_polynomial(&t.h, &[0.0, 1.0, 1.0])?;
            let c = commutator(&t.h, &tm.matrix)?;
            let c_shift = commutator(&t.h, &shifted.matrix)?;
            Ok(value(window_defect(&c_shift, &c, w)?))
        }
        "small_omega_hermitian" | "small_omega_antihermitian" => {
            let t = cx.triple()?;
            let here = small_omega_report(&t, &[cx.omega], w)?;
            let sweep = small_omega_report(&t, &SMALL_OMEGAS, w)?;
            let residual = if id == "small_omega_hermitian" {
                here.hermitian.rows[0].residual
            } else {
                here.anti_hermitian_fraction[0]
            };
            Ok(Measured { residual, fallback: None, tables: vec![sweep.hermitian, sweep.anti_hermitian] })
        }
        "k_identity_forms" => {
            let r = k_identity_defect(&cx.free_triple_at(n)?, w)?;
            Ok(value(r.component("forms_agreement").unwrap_or(f64::NAN)))
        }
        "k_identity_trend" => {
            let table = dim_table("k_identity", &cx.dims(), |d| {
                Ok(k_identity_defect(&cx.free_triple_at(d)?, w)?.component("first_form").unwrap_or(f64::NAN))
            })?;
            Ok(with_table(largest_ratio(&table), table))
        }
        "harmonic_hamiltonian" => Ok(value(harmonic_hamiltonian_identity(&cx.free_triple_at(n)?, cx.omega)?)),
        "harmonic_commutator" => {
            let table = dim_table("harmonic_commutator", &cx.dims(), |d| {
                Ok(harmonic_commutator_defect(&cx.free_triple_at(d)?, cx.omega, w)?.absolute)
            })?;
            Ok(with_table(table.rows[2].residual, table))
        }
        "harmonic_limit" => {
            let t = cx.free_triple_at(n)?;
            let mut points = Vec::new();
            for om in LIMIT_OMEGAS {
                points.push((om, harmonic_limit_defect(&t, om, w)?));
            }
            let table = ConvergenceTable::new("harmonic_limit", "omega", &points);
            Ok(with_table(points[points.len() - 1].1, table))
        }

        "overlap_methods" => {
            let mut indices = OVERLAP_INDICES.to_vec();
            if !indices.contains(&cx.k()) {
                indices.push(cx.k());
            }
            let mut worst = 0.0f64;
            for &k0 in &indices {
                for &k in &indices {
                    let a = overlap_matrix(k0, k, OVERLAP_DIM, OverlapMethod::GammaSum)?.s;
                    let b = overlap_matrix(k0, k, OVERLAP_DIM, OverlapMethod::Quadrature)?.s;
                    worst = worst.max(a.sub(&b)?.max_abs());
                }
            }
            Ok(value(worst))
        }
        "overlap_oracle" => {
            let want = (8.0 / (3.0 * std::f64::consts::PI)).sqrt();
            let mut worst = 0.0f64;
            for method in [OverlapMethod::GammaSum, OverlapMethod::Quadrature] {
                let s = overlap_matrix(0.75, 1.25, 8, method)?.s;
                worst = worst.max((s.entry(0, 0).re - want).abs() + s.entry(0, 0).im.abs());
            }
            Ok(value(worst))
        }
        "unitarity" => {
            let table = dim_table("unitarity", &cx.dims(), |d| {
                Ok(unitarity_defect(&unitary_u(cx.k(), FREE_K, d)?, w)?.absolute)
            })?;
            Ok(with_table(table.rows[2].residual, table))
        }
        "h_transport" | "h_transport_trend" => {
            let table = dim_table("h_transport", &cx.dims(), |d| {
                let u = unitary_u(cx.k(), FREE_K, d)?;
                Ok(transport_defect(&u, &cx.free_triple_at(d)?.h, &cx.triple_at(d)?.h, w)?.relative)
            })?;
            if id == "h_transport" {
                return Ok(value(table.rows[2].residual));
            }
            Ok(with_table(largest_ratio(&table), table))
        }
        "t_transport" => {
            let table = dim_table("t_transport", &cx.dims(), |d| {
                let u = unitary_u(cx.k(), FREE_K, d)?;
                let t0 = t_minimal(&cx.free_triple_at(d)?)?.matrix;
                let t = t_minimal(&cx.triple_at(d)?)?.matrix;
                Ok(transport_defect(&u, &t0, &t, w)?.absolute)
            })?;
            Ok(with_table(table.rows[2].residual, table))
        }
        "u1_intertwining" => {
            let table = dim_table("u1_intertwining", &cx.dims(), |d| {
                Ok(u1_intertwining_defect(&intertwiner_u1(cx.k(), FREE_K, d)?, cx.omega, w)?.relative)
            })?;
            Ok(with_table(table.rows[2].residual, table))
        }
        "t_cs_commutator" => {
            let table =
                dim_table("t_cs_commutator", &cx.dims(), |d| Ok(t_cs_defect(cx.k(), cx.omega, d, w)?.absolute))?;
            Ok(with_table(table.rows[2].residual, table))
        }
        "t0_forms" => {
            let f = even_fock(n)?;
            let r = t0_forms_agreement(&f, DEFAULT_P_MIN, w)?;
            let table = t0_forms_trend(&f, &P_MIN_SWEEP, w)?;
            Ok(with_table(r.absolute, table))
        }
        "fock_canonical" => {
            let f = even_fock(n)?;
            let c = commutator(&f.x, &f.p)?;
            let i = f.x.identity_like().scale(c64::new(0.0, 1.0));
            Ok(value(window_defect(&c, &i, Window::new(f.dim - 1)?)?))
        }
        other => Err(VlabError::InvalidParameter(format!("no measurement for check `{other}`"))),
    }
}
