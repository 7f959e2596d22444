//! Acceptance criteria 1 to 13 for vlab. Each criterion yields a verdict
//! with its measured values; tolerances are pinned here, independent of the
//! CLI catalog.

use std::time::{Duration, Instant};

use faer::c64;
use vlab_core::conformal::{
    algebra_defects as conformal_defects, case_a_spectrum, conformal_triple, energy_eigenvector_trend, OmegaVector,
};
use vlab_core::intertwine::{
    fock_line, intertwiner_u1, overlap_matrix, t0_forms_trend, t_cs_defect, transport_defect, u1_intertwining_defect,
    unitarity_defect, unitary_u, OverlapMethod,
};
use vlab_core::matcore::csv::from_csv;
use vlab_core::matcore::{commutator, window_defect, BasisTag, OperatorMatrix, Window};
use vlab_core::residual::ConvergenceTable;
use vlab_core::su11::{
    algebra_defects, bg_state_exponential, bg_state_series, generators, identity_defect, LadderIdentity, Sector,
};
use vlab_core::timeops::{
    bch_conjugation_defect, bch_series_defect, harmonic_commutator_defect, harmonic_limit_defect, k_identity_defect,
    small_omega_report, t_minimal, t_omega, t_omega_checks, x_defect,
};
use vlab_core::Result;

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn w(m: usize) -> Window {
    Window::new(m).unwrap()
}

fn criterion_1() -> Result<Verdict> {
    let n = 128;
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in [0.75, 1.0, 1.25, 2.5] {
        let r = algebra_defects(&Sector::from_k(k, n)?)?;
        let c = |s: &str| r.component(s).unwrap();
        worst.0 = worst.0.max(c("k3_kplus")).max(c("k3_kminus"));
        worst.1 = worst.1.max(c("lowering_raising"));
        worst.2 = worst.2.max((c("corner") - c("corner_expected")).abs() / c("corner_expected").abs());
        worst.3 = worst.3.max(c("casimir_interior"));
    }
    for g in [0.0, 2.0, 3.0] {
        let r = algebra_defects(&Sector::from_g(g, n)?)?;
        worst.3 = worst.3.max(r.component("casimir_coupling").unwrap());
    }
    let nf = n as f64;
    let pass = worst.0 <= 1e-12 && worst.1 <= 1e-12 * nf && worst.2 <= 1e-9 && worst.3 <= 1e-10 * nf;
    Ok(verdict(
        pass,
        format!(
            "[K3,K±]∓K± {:.1e} (1e-12), [K-,K+]-2K3 {:.1e} (1e-12 N), corner rel {:.1e} (1e-9), Casimir {:.1e} (1e-10 N)",
            worst.0, worst.1, worst.2, worst.3
        ),
    ))
}

fn criterion_2() -> Result<Verdict> {
    let n = 128;
    let (mut shift, mut pair, mut corner) = (0.0f64, 0.0f64, 0.0f64);
    for k in [0.75, 1.0, 1.25, 2.5] {
        let s = Sector::from_k(k, n)?;
        for p in 1..=10 {
            shift = shift.max(identity_defect(&s, LadderIdentity::GammaShift(p), w(n - p))?.absolute);
        }
        let r = identity_defect(&s, LadderIdentity::CanonicalPair, w(n - 1))?;
        pair = pair.max(r.absolute);
        let want = -((n - 1) as f64);
        corner = corner.max((r.component("corner").unwrap() - want).abs() / want.abs());
    }
    Ok(verdict(
        shift <= 1e-10 && pair <= 1e-12 && corner <= 1e-9,
        format!("gamma_shift {shift:.1e} (1e-10), canonical_pair {pair:.1e} (1e-12), corner rel {corner:.1e} (1e-9)"),
    ))
}

fn criterion_3() -> Result<Verdict> {
    let (mut agree, mut resid) = (0.0f64, 0.0f64);
    let mut decreasing = true;
    let mut trend = Vec::new();
    for k in [0.75, 1.25] {
        for z in [c64::new(0.5, 0.0), c64::new(1.0, 0.5)] {
            let s = Sector::from_k(k, 128)?;
            let a = bg_state_series(&s, z)?;
            let b = bg_state_exponential(&s, z)?;
            let d: f64 =
                a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            agree = agree.max(d / a.norm);
            resid = resid.max(a.residual).max(b.residual);
            let coarse = bg_state_series(&Sector::from_k(k, 64)?, z)?.residual;
            decreasing &= a.residual < coarse;
            trend.push(format!("{coarse:.1e}->{:.1e}", a.residual));
        }
    }
    Ok(verdict(
        agree <= 1e-12 && resid <= 1e-8 && decreasing,
        format!(
            "agreement {agree:.1e} (1e-12), residual {resid:.1e} (1e-8), strict decrease N=64->128: {} [{}]",
            decreasing,
            trend.join(", ")
        ),
    ))
}

fn criterion_4() -> Result<Verdict> {
    let n = 64;
    let mut worst = 0.0f64;
    for g in [0.0, 2.0] {
        let r = conformal_defects(&conformal_triple(&Sector::from_g(g, n)?)?, w(n - 2))?;
        for c in ["hd", "kd", "hk", "casimir"] {
            worst = worst.max(r.component(c).unwrap());
        }
    }
    Ok(verdict(worst <= 1e-12 * n as f64, format!("worst residual {worst:.1e} (1e-12 N = {:.1e})", 1e-12 * n as f64)))
}

fn criterion_5() -> Result<Verdict> {
    let s = Sector::from_k(1.0, 256)?;
    let a = case_a_spectrum(&s, &OmegaVector::new(0.3, 0.0, 1.0), 10)?;
    let excess = a.worst_excess(1e-6);
    let worst_dev = a.deviations.iter().cloned().fold(0.0, f64::max);
    let b = case_a_spectrum(&s, &OmegaVector::new(0.0, 0.0, 1.0), 10)?;
    let ident = b.deviations.iter().cloned().fold(0.0, f64::max);
    Ok(verdict(
        excess <= 0.0 && ident <= 1e-13,
        format!(
            "case a max deviation {worst_dev:.1e} within allowance: {}, Omega=(0,0,1) {ident:.1e} (1e-13)",
            excess <= 0.0
        ),
    ))
}

fn criterion_6() -> Result<Verdict> {
    let n = 256;
    let mut series = 0.0f64;
    for k in [0.75, 1.25] {
        series = series.max(bch_series_defect(&conformal_triple(&Sector::from_k(k, n)?)?, 0.5)?.absolute);
    }
    let mut direct = 0.0f64;
    let mut drop = f64::INFINITY;
    for k in [0.75, 1.25] {
        let t = conformal_triple(&Sector::from_k(k, n)?)?;
        direct = direct.max(bch_conjugation_defect(&t, 0.5, w(16))?.relative);
        let coarse = bch_conjugation_defect(&conformal_triple(&Sector::from_k(k, 32)?)?, 0.5, w(8))?.relative;
        let fine = bch_conjugation_defect(&t, 0.5, w(8))?.relative;
        drop = drop.min(coarse / fine);
    }
    let conj_ok = direct <= 1e-6 || drop >= 100.0;
    Ok(verdict(
        series <= 1e-12 * n as f64 && conj_ok,
        format!(
            "series {series:.1e} (1e-12 N = {:.1e}), conjugation rel {direct:.1e} (1e-6) or drop x{drop:.1e} (>= 100)",
            1e-12 * n as f64
        ),
    ))
}

fn criterion_7() -> Result<Verdict> {
    let t = conformal_triple(&Sector::from_k(1.25, 256)?)?;
    let r = t_omega_checks(&t, 0.5, w(16))?;
    let coarse = t_omega_checks(&conformal_triple(&Sector::from_k(1.25, 32)?)?, 0.5, w(8))?.relative;
    let fine = t_omega_checks(&t, 0.5, w(8))?.relative;
    let drop = coarse / fine;
    let (mut adjoint, mut at) = (0.0f64, 0.0);
    for omega in [0.5, 0.4, 0.2, 0.1, 1e-2, 1e-3] {
        let a = t_omega_checks(&t, omega, w(16))?.component("adjoint_symmetry").unwrap();
        if a >= adjoint {
            (adjoint, at) = (a, omega);
        }
    }
    Ok(verdict(
        (r.relative <= 1e-6 || drop >= 100.0) && adjoint <= 1e-10,
        format!(
            "[H,T(w)]-i rel {:.1e} (1e-6) or drop x{drop:.1e}, adjoint symmetry {adjoint:.1e} at w={at} (1e-10)",
            r.relative
        ),
    ))
}

fn criterion_8() -> Result<Verdict> {
    let mut pass = true;
    let mut notes = Vec::new();
    for k in [0.75, 1.25] {
        let mut defects = Vec::new();
        let mut herm = 0.0f64;
        for n in [64, 128, 256] {
            let t = conformal_triple(&Sector::from_k(k, n)?)?;
            let tm = t_minimal(&t)?;
            herm = herm.max(tm.matrix.hermiticity_defect() / tm.matrix.max_abs());
            defects.push(x_defect(&t.h, &tm, w(8))?.defect_norm);
        }
        let t = conformal_triple(&Sector::from_k(k, 256)?)?;
        let tm = t_minimal(&t)?;
        let x = x_defect(&t.h, &tm, w(8))?;
        let shifted = tm.shifted_by_polynomial(&t.h, &[0.0, 1.0, 1.0])?;
        let shift = window_defect(&commutator(&t.h, &shifted.matrix)?, &commutator(&t.h, &tm.matrix)?, w(8))?;
        let monotone = defects.windows(2).all(|p| p[1] < p[0]);
        let ok = herm <= 1e-12 && monotone && x.sandwich_scaled <= x.defect_norm && shift <= 1e-12;
        pass &= ok;
        notes.push(format!(
            "k={k}: herm {herm:.1e}, defects {:.1e}/{:.1e}/{:.1e}, sandwich {:.1e} vs {:.1e}, shift {shift:.1e}",
            defects[0], defects[1], defects[2], x.sandwich_scaled, x.defect_norm
        ));
    }
    Ok(verdict(pass, notes.join("; ")))
}

fn criterion_9() -> Result<Verdict> {
    let mut pass = true;
    let mut notes = Vec::new();
    for k in [0.75, 1.25] {
        let t = conformal_triple(&Sector::from_k(k, 256)?)?;
        let r = small_omega_report(&t, &[0.4, 0.2, 0.1], w(8))?;
        let order = r.hermitian.mean_order().unwrap_or(f64::NAN);
        let fraction = r.anti_hermitian_fraction[2];
        pass &= order >= 0.8 && fraction <= 0.1;
        notes.push(format!(
            "k={k}: Hermitian order {order:.2} (>= 0.8), anti-Hermitian fraction {fraction:.2} (<= 0.1)"
        ));
    }
    Ok(verdict(pass, notes.join("; ")))
}

fn criterion_10() -> Result<Verdict> {
    let mut agree = 0.0f64;
    let mut first = Vec::new();
    for n in [64, 128, 256] {
        let r = k_identity_defect(&conformal_triple(&Sector::from_k(0.75, n)?)?, w(8))?;
        agree = agree.max(r.component("forms_agreement").unwrap());
        first.push(r.component("first_form").unwrap());
    }
    let monotone = first.windows(2).all(|p| p[1] < p[0]);
    Ok(verdict(
        agree <= 1e-10 && monotone,
        format!("forms agree {agree:.1e} (1e-10), K residual {:.3}/{:.3}/{:.3}", first[0], first[1], first[2]),
    ))
}

fn criterion_11() -> Result<Verdict> {
    let mut methods = 0.0f64;
    for k0 in [0.75, 1.25, 2.5] {
        for k in [0.75, 1.25, 2.5] {
            let a = overlap_matrix(k0, k, 21, OverlapMethod::GammaSum)?.s;
            let b = overlap_matrix(k0, k, 21, OverlapMethod::Quadrature)?.s;
            methods = methods.max(a.sub(&b)?.max_abs());
        }
    }
    let s00 = overlap_matrix(0.75, 1.25, 8, OverlapMethod::Quadrature)?.s.entry(0, 0);
    let oracle = (s00 - c64::new((8.0 / (3.0 * std::f64::consts::PI)).sqrt(), 0.0)).norm();
    let unit = unitarity_defect(&unitary_u(1.25, 0.75, 200)?, w(16))?.absolute;
    Ok(verdict(
        methods <= 1e-10 && oracle <= 1e-12 && unit <= 1e-6,
        format!(
            "methods {methods:.1e} (1e-10), S00 oracle {oracle:.1e} (1e-12), unitarity N=200 M=16 {unit:.1e} (1e-6)"
        ),
    ))
}

fn criterion_12() -> Result<Verdict> {
    let m = w(8);
    let dims = [64usize, 128, 256];
    let table = |id: &str, f: &dyn Fn(usize) -> Result<f64>| -> Result<ConvergenceTable> {
        let mut pts = Vec::new();
        for &d in &dims {
            pts.push((d as f64, f(d)?));
        }
        Ok(ConvergenceTable::new(id, "dim", &pts))
    };
    let free = |d: usize| conformal_triple(&Sector::from_k(0.75, d)?);
    let tables = [
        energy_eigenvector_trend(&Sector::from_k(1.25, 256)?, 0.5, 1.0, m, &dims)?,
        t0_forms_trend(&fock_line(256)?, &[0.2, 0.5, 1.0], m)?,
        table("t_transport", &|d| {
            let u = unitary_u(1.25, 0.75, d)?;
            let t0 = t_minimal(&free(d)?)?.matrix;
            let t = t_minimal(&conformal_triple(&Sector::from_k(1.25, d)?)?)?.matrix;
            Ok(transport_defect(&u, &t0, &t, m)?.absolute)
        })?,
        table("u1_intertwining", &|d| Ok(u1_intertwining_defect(&intertwiner_u1(1.25, 0.75, d)?, 0.5, m)?.relative))?,
        table("t_cs_commutator", &|d| Ok(t_cs_defect(1.25, 0.5, d, m)?.absolute))?,
        table("harmonic_commutator", &|d| Ok(harmonic_commutator_defect(&free(d)?, 0.5, m)?.absolute))?,
    ];
    let formed = tables.iter().all(|t| t.is_well_formed() && t.rows.len() >= 3);
    let limit = harmonic_limit_defect(&free(256)?, 1e-3, m)?;
    Ok(verdict(
        formed && limit <= 1e-6,
        format!("{} tables executed and well formed: {formed}; T_h + T0 at w=1e-3 {limit:.1e} (1e-6)", tables.len()),
    ))
}

fn vlab(args: &[&str]) -> u8 {
    vlab_cli::run(std::iter::once("vlab").chain(args.iter().copied()))
}

fn criterion_13() -> Result<Verdict> {
    let Ok(dir) = tempfile::tempdir() else {
        return Ok(verdict(false, "cannot create a temporary directory"));
    };
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let (a, b) = (p("a.json"), p("b.json"));
    for path in [&a, &b] {
        vlab(&["verify", "--suite", "all", "--k", "1.25", "--dim", "64", "--report", path]);
    }
    let identical = std::fs::read(&a).ok().is_some_and(|x| std::fs::read(&b).ok() == Some(x));

    let code = |args: &[&str]| Some(vlab(args));
    let codes = code(&["verify", "--suite", "algebra", "--k", "1", "--dim", "64"]) == Some(0)
        && code(&["verify", "--suite", "algebra", "--k", "1", "--g", "2", "--dim", "64"]) == Some(2)
        && code(&["verify", "--suite", "timeops", "--k", "1.25", "--dim", "64", "--omega", "1.0"]) == Some(2)
        && code(&["verify", "--suite", "algebra", "--k", "1", "--dim", "64", "--tol", "su11_lowering_raising=0"])
            == Some(1)
        && code(&["export", "--operator", "T_omega", "--out", &p("t.csv"), "--k", "1.25", "--dim", "16"]) == Some(2)
        && code(&["sweep", "--axis", "dim", "--values", "64", "--suite", "algebra", "--k", "1"]) == Some(2);

    let sector = Sector::from_k(1.25, 32)?;
    let expected: [(&str, OperatorMatrix); 3] = [
        ("K3", generators(&sector).k3),
        ("Kplus", generators(&sector).kplus),
        ("T_omega", t_omega(&conformal_triple(&sector)?, 0.5)?.matrix),
    ];
    let mut round_trip = true;
    for (op, want) in &expected {
        let path = p(&format!("{op}.csv"));
        vlab(&["export", "--operator", op, "--out", &path, "--k", "1.25", "--dim", "32", "--omega", "0.5"]);
        let text = std::fs::read_to_string(&path).unwrap_or_default();
        round_trip &= from_csv(&text, BasisTag::sector(1.25, 32)).ok().as_ref() == Some(want);
    }

    let start = Instant::now();
    let full = vlab(&["verify", "--suite", "all", "--k", "1.25", "--dim", "256", "--report", &p("full.json")]);
    let elapsed = start.elapsed();
    let completed = matches!(full, 0 | 1) && std::fs::metadata(p("full.json")).is_ok();
    let fast = completed && elapsed < Duration::from_secs(600);

    Ok(verdict(
        identical && codes && round_trip && fast,
        format!(
            "byte-identical {identical}, exit codes {codes}, round trip {round_trip}, all at N=256 in {:.1}s (600s)",
            elapsed.as_secs_f64()
        ),
    ))
}

pub type Criterion = (&'static str, fn() -> Result<Verdict>);

pub const CRITERIA: [Criterion; 13] = [
    ("exact algebra", criterion_1),
    ("ladder identities", criterion_2),
    ("coherent states", criterion_3),
    ("conformal algebra", criterion_4),
    ("case (a) spectrum", criterion_5),
    ("BCH conjugation", criterion_6),
    ("T(w) commutator", criterion_7),
    ("minimal T", criterion_8),
    ("small-w limit", criterion_9),
    ("K identity", criterion_10),
    ("overlaps and unitarity", criterion_11),
    ("report-only diagnostics", criterion_12),
    ("infrastructure", criterion_13),
];

/// Evaluates one criterion; an error counts as a failure.
pub fn evaluate(c: &Criterion) -> Verdict {
    (c.1)().unwrap_or_else(|e| verdict(false, format!("error: {e}")))
}
