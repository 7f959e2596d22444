use std::path::Path;

use vlab_core::conformal::conformal_triple;
use vlab_core::intertwine::{fock_line, intertwiner_u1, overlap_matrix, t_cs, unitary_u, OverlapMethod, FREE_K};
use vlab_core::matcore::csv::to_csv;
use vlab_core::matcore::OperatorMatrix;
use vlab_core::su11::generators;
use vlab_core::timeops::{q_operator, t_harmonic, t_minimal, t_omega};

use crate::config::SuiteConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OperatorId {
    #[value(name = "K3")]
    K3,
    #[value(name = "Kplus")]
    Kplus,
    #[value(name = "Kminus")]
    Kminus,
    #[value(name = "H")]
    H,
    #[value(name = "D")]
    D,
    #[value(name = "K")]
    K,
    #[value(name = "T_min")]
    TMin,
    #[value(name = "T_omega")]
    TOmega,
    #[value(name = "Q")]
    Q,
    #[value(name = "T_h")]
    TH,
    #[value(name = "T_CS")]
    TCs,
    #[value(name = "S")]
    S,
    #[value(name = "U")]
    U,
    #[value(name = "U1")]
    U1,
    #[value(name = "x")]
    X,
    #[value(name = "p")]
    P,
}

fn require_omega(cfg: &SuiteConfig, what: &str) -> Result<f64, CliError> {
    cfg.omega.ok_or_else(|| CliError::Config(format!("{what} needs --omega")))
}

/// Cross-sector operators map the free sector `k0 = 3/4` into the configured one.
pub fn build(op: OperatorId, cfg: &SuiteConfig) -> Result<OperatorMatrix, CliError> {
    let sector = cfg.sector()?;
    let (k, n) = (sector.k(), cfg.dim);
    let m = match op {
        OperatorId::K3 => generators(&sector).k3,
        OperatorId::Kplus => generators(&sector).kplus,
        OperatorId::Kminus => generators(&sector).kminus,
        OperatorId::H => conformal_triple(&sector)?.h,
        OperatorId::D => conformal_triple(&sector)?.d,
        OperatorId::K => conformal_triple(&sector)?.k,
        OperatorId::TMin => t_minimal(&conformal_triple(&sector)?)?.matrix,
        OperatorId::TOmega => {
            let w = require_omega(cfg, "T_omega")?;
            t_omega(&conformal_triple(&sector)?, w)?.matrix
        }
        OperatorId::Q => q_operator(&conformal_triple(&sector)?)?.matrix,
        OperatorId::TH => {
            let w = require_omega(cfg, "T_h")?;
            t_harmonic(&conformal_triple(&sector)?, w)?.matrix
        }
        OperatorId::TCs => {
            let w = require_omega(cfg, "T_CS")?;
            t_cs(k, FREE_K, w, n, cfg.window())?.matrix
        }
        OperatorId::S => overlap_matrix(FREE_K, k, n, OverlapMethod::Quadrature)?.s,
        OperatorId::U => unitary_u(k, FREE_K, n)?.matrix,
        OperatorId::U1 => intertwiner_u1(k, FREE_K, n)?.matrix,
        OperatorId::X => fock_line(n)?.x,
        OperatorId::P => fock_line(n)?.p,
    };
    Ok(m)
}

pub fn export(op: OperatorId, cfg: &SuiteConfig, out: &Path) -> Result<(), CliError> {
    let m = build(op, cfg)?;
    std::fs::write(out, to_csv(&m)).map_err(|source| CliError::Io { path: out.to_path_buf(), source })
}
