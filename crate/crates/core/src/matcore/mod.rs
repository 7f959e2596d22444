//! Dense complex matrix kernel shared by every other module.

pub mod csv;
mod matfun;
mod matrix;

pub use matfun::{
    arctan, eig, eigh, expm_nilpotent, expm_nonnegative, hermitian_exp, hermitian_inv_sqrt, hermitian_inverse,
    hermitian_sqrt, matfun_diagonalizable, matfun_hermitian, EigenDecomp, SpectralDomain, BRANCH_GUARD,
    EIGENVALUE_FLOOR, HERMITIAN_TOL, KAPPA_MAX,
};
pub use matrix::{
    anti_hermitian_part, commutator, hermitian_part, window_defect, window_defect_relative, BasisTag, OperatorMatrix,
    Window,
};
