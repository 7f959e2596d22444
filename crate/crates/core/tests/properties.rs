use faer::c64;
use proptest::prelude::*;

use vlab_core::conformal::{classify, OmegaVector, SpectrumCase};
use vlab_core::matcore::csv::{from_csv, to_csv};
use vlab_core::matcore::{commutator, expm_nilpotent, matfun_hermitian, BasisTag, OperatorMatrix, SpectralDomain};
use vlab_core::su11::{generators, Sector};

fn tag() -> BasisTag {
    BasisTag::new("prop")
}

fn matrix(dim: usize, values: &[(f64, f64)]) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, tag(), |i, j| {
        let (re, im) = values[i * dim + j];
        c64::new(re, im)
    })
}

fn entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), dim * dim)
}

fn close(a: &OperatorMatrix, b: &OperatorMatrix, tol: f64) -> bool {
    a.sub(b).unwrap().max_abs() <= tol
}

proptest! {
    #[test]
    fn commutator_is_antisymmetric(a in entries(5), b in entries(5)) {
        let (a, b) = (matrix(5, &a), matrix(5, &b));
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(close(&ab, &ba.scale_real(-1.0), 1e-12));
    }

    #[test]
    fn adjoint_reverses_products(a in entries(4), b in entries(4)) {
        let (a, b) = (matrix(4, &a), matrix(4, &b));
        let lhs = a.matmul(&b).unwrap().adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn exp_of_log_is_identity_map(values in prop::collection::vec(0.1..5.0f64, 6)) {
        // positive matrix with known spectrum through a fixed unitary rotation
        let h = OperatorMatrix::real_diagonal(&values, tag());
        let g = matrix(6, &(0..36).map(|i| ((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect::<Vec<_>>());
        let herm = g.add(&g.adjoint()).unwrap();
        let u = matfun_hermitian(&herm, c64::cis, SpectralDomain::Real).unwrap();
        let a = u.matmul(&h).unwrap().matmul(&u.adjoint()).unwrap();
        let log = matfun_hermitian(&a, |x| c64::new(x.ln(), 0.0), SpectralDomain::Positive).unwrap();
        let back = matfun_hermitian(&log, |x| c64::new(x.exp(), 0.0), SpectralDomain::Real).unwrap();
        prop_assert!(close(&back, &a, 1e-11 * values.iter().cloned().fold(1.0, f64::max)));
    }

    #[test]
    fn nilpotent_exponentials_invert(band in prop::collection::vec(-2.0..2.0f64, 7)) {
        let l = OperatorMatrix::from_fn(8, tag(), |i, j| if j == i + 1 { c64::new(band[i], 0.0) } else { c64::new(0.0, 0.0) });
        let e = expm_nilpotent(&l).unwrap();
        let f = expm_nilpotent(&l.scale_real(-1.0)).unwrap();
        prop_assert!(close(&e.matmul(&f).unwrap(), &l.identity_like(), 1e-12));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(a in prop::collection::vec((-1e6..1e6f64, -1e-6..1e-6f64), 9)) {
        let m = matrix(3, &a);
        let back = from_csv(&to_csv(&m), tag()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn classification_is_scale_covariant(o1 in -2.0..2.0f64, o2 in -2.0..2.0f64, o3 in 0.01..3.0f64, s in 0.1..10.0f64) {
        let a = classify(&OmegaVector::new(o1, o2, o3));
        let b = classify(&OmegaVector::new(s * o1, s * o2, s * o3));
        // skip vectors whose norm sits within rounding of the light cone
        let n = o3 * o3 - o2 * o2 - o1 * o1;
        prop_assume!(n.abs() > 1e-6);
        prop_assert_eq!(a, b);
        prop_assert!(a != SpectrumCase::Continuous);
    }

    #[test]
    fn ladder_relations_hold_for_any_index(k in 0.55..4.0f64) {
        let g = generators(&Sector::from_k(k, 24).unwrap());
        let c = commutator(&g.k3, &g.kplus).unwrap();
        prop_assert!(close(&c, &g.kplus, 1e-12 * (24.0 + k)));
    }
}
