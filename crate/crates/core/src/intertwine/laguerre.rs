//! Overlaps between the half-line Laguerre bases of two sectors.
//!
//! Sector `k` is realized by
//! `phi_n(x) = (-1)^n sqrt(2 n!/Γ(n+2k)) x^{2k-1/2} e^{-x²/2} L_n^{(2k-1)}(x²)`.
//! The sign makes `x²/2` have positive off-diagonal entries, matching the
//! ladder conventions of the sector generators. After `t = x²` the overlap
//! integrand is a polynomial against the weight `t^{k+k0-1} e^{-t}`.

use faer::{c64, Mat, Side};
use libm::lgamma as ln_gamma;
use twofloat::TwoFloat;

use crate::error::{Result, VlabError};
use crate::matcore::{BasisTag, OperatorMatrix};

/// Entrywise agreement required between quadrature orders `Q` and `2Q`.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Absolute error budget for a single Γ-sum entry.
const GAMMA_SUM_BUDGET: f64 = 1e-11;

/// Orthonormal half-line basis of sector `k` (reference frequency 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaguerreBasisSpec {
    pub k: f64,
    pub dim: usize,
}

impl LaguerreBasisSpec {
    pub fn new(k: f64, dim: usize) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(VlabError::InvalidParameter(format!("Bargmann index k = {k} must be positive")));
        }
        if dim < 4 {
            return Err(VlabError::InvalidParameter(format!("dimension {dim} below minimum 4")));
        }
        Ok(LaguerreBasisSpec { k, dim })
    }

    /// Laguerre parameter `2k - 1`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.k - 1.0
    }

    pub fn basis(&self) -> BasisTag {
        BasisTag::sector(self.k, self.dim)
    }

    /// `phi_n(x)` for `n < dim`, evaluated through the orthonormal recurrence.
    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let t = x * x;
        let alpha = self.alpha();
        let values = orthonormal_laguerre(alpha, t, self.dim);
        let prefactor = |ls: f64| (ls - 0.5 * ln_gamma(alpha + 1.0) - 0.5 * t + (alpha + 0.5) * x.ln()).exp();
        values.iter().enumerate().map(|(n, &(v, ls))| sign(n) * std::f64::consts::SQRT_2 * v * prefactor(ls)).collect()
    }
}

/// Orthonormal Laguerre polynomials for the weight `t^α e^{-t} / Γ(α+1)`,
/// as `(mantissa, log scale)` pairs: `p_n(t) = mantissa * e^{scale}`.
fn orthonormal_laguerre(alpha: f64, t: f64, count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut scale = 0.0;
    for n in 0..count {
        out.push((cur, scale));
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + alpha - t) * cur - (nf * (nf + alpha)).sqrt() * prev)
            / ((nf + 1.0) * (nf + 1.0 + alpha)).sqrt();
        prev = cur;
        cur = next;
        let size = cur.abs().max(prev.abs());
        if size > 1e100 {
            prev /= size;
            cur /= size;
            scale += size.ln();
        }
    }
    out
}

/// Gauss rule for `∫_0^∞ t^β e^{-t} f(t) dt`, as nodes and log-weights.
#[derive(Clone, Debug)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

/// Orthonormal recurrence value and derivative of degree `order` at `t`,
/// plus `ln Σ_{i<order} p_i(t)²`, normalized so that `p_0 = 1`.
fn christoffel(beta: f64, t: f64, order: usize) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0f64, 1.0f64);
    let (mut d_prev, mut d) = (0.0f64, 0.0f64);
    let mut sum = 0.0f64;
    let mut scale = 0.0f64;
    for n in 0..order {
        sum += p * p;
        let nf = n as f64;
        let b_n = (nf * (nf + beta)).sqrt();
        let b_next = ((nf + 1.0) * (nf + 1.0 + beta)).sqrt();
        let a_n = 2.0 * nf + 1.0 + beta;
        let p_next = ((t - a_n) * p - b_n * p_prev) / b_next;
        let d_next = ((t - a_n) * d + p - b_n * d_prev) / b_next;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        let size = p.abs().max(p_prev.abs()).max(d.abs()).max(d_prev.abs());
        if size > 1e100 {
            p_prev /= size;
            p /= size;
            d_prev /= size;
            d /= size;
            sum /= size * size;
            scale += size.ln();
        }
    }
    (p, d, sum.ln() + 2.0 * scale)
}

/// Nodes from the Jacobi matrix, polished by Newton steps on the degree
/// `order` polynomial; weights from the Christoffel function.
pub fn gauss_laguerre(beta: f64, order: usize) -> Result<LaguerreRule> {
    if !(beta > -1.0) {
        return Err(VlabError::InvalidParameter(format!("weight exponent {beta} must exceed -1")));
    }
    if order == 0 {
        return Err(VlabError::InvalidParameter("quadrature order must be positive".into()));
    }
    let jacobi = Mat::<f64>::from_fn(order, order, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0 + beta
        } else if i.abs_diff(j) == 1 {
            let n = i.max(j) as f64;
            (n * (n + beta)).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes =
        jacobi.self_adjoint_eigenvalues(Side::Lower).map_err(|e| VlabError::Decomposition(format!("{e:?}")))?;
    nodes.sort_by(f64::total_cmp);
    let log_mass = ln_gamma(beta + 1.0);
    let mut log_weights = Vec::with_capacity(order);
    for t in nodes.iter_mut() {
        for _ in 0..4 {
            let (p, d, _) = christoffel(beta, *t, order);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            if !step.is_finite() {
                break;
            }
            *t -= step;
            if step.abs() <= 1e-17 * t.abs() {
                break;
            }
        }
        let (_, _, log_sum) = christoffel(beta, *t, order);
        log_weights.push(log_mass - log_sum);
    }
    Ok(LaguerreRule { nodes, log_weights })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapMethod {
    /// Power expansion summed in double-double arithmetic.
    GammaSum,
    /// Gauss–Laguerre quadrature with an order-doubling check.
    Quadrature,
}

/// `S_{mn} = <phi_m^{(k)} | phi_n^{(k0)}>`: the map from sector `k0` into sector `k`.
#[derive(Clone, Debug)]
pub struct OverlapMatrix {
    pub s: OperatorMatrix,
    pub method: OverlapMethod,
    pub k0: f64,
    pub k: f64,
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn quadrature_overlap(k0: f64, k: f64, dim: usize, order: usize) -> Result<Vec<f64>> {
    let beta = k + k0 - 1.0;
    let rule = gauss_laguerre(beta, order)?;
    let (alpha, alpha0) = (2.0 * k - 1.0, 2.0 * k0 - 1.0);
    let (lg, lg0) = (ln_gamma(alpha + 1.0), ln_gamma(alpha0 + 1.0));
    let mut out = vec![0.0; dim * dim];
    let mut row = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for (&t, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        // sqrt(w) p_m^α(t), with the Γ(α+1) measure normalization folded in
        for (m, (v, ls)) in orthonormal_laguerre(alpha, t, dim).into_iter().enumerate() {
            row[m] = v * (0.5 * lw + ls - 0.5 * lg).exp();
        }
        for (n, (v, ls)) in orthonormal_laguerre(alpha0, t, dim).into_iter().enumerate() {
            col[n] = v * (0.5 * lw + ls - 0.5 * lg0).exp();
        }
        for m in 0..dim {
            let r = row[m];
            if r == 0.0 {
                continue;
            }
            let slot = &mut out[m * dim..(m + 1) * dim];
            for (o, c) in slot.iter_mut().zip(&col) {
                *o += r * c;
            }
        }
    }
    Ok(out)
}

/// Double-double quotient with one correction step; the crate's own
/// division is only accurate to about one double.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b;
    let r = a - q * b;
    q + r / b
}

/// Coefficient ratios `A_i / A_0` of `L_m^{(α)}` in powers of `t`.
fn power_ratios(alpha: f64, m: usize) -> Vec<TwoFloat> {
    let mut out = Vec::with_capacity(m + 1);
    let mut r = TwoFloat::from(1.0);
    out.push(r);
    for i in 0..m {
        let num = TwoFloat::from(-((m - i) as f64));
        let den = (TwoFloat::from(alpha) + TwoFloat::from((i + 1) as f64)) * TwoFloat::from((i + 1) as f64);
        r = dd_div(r * num, den);
        out.push(r);
    }
    out
}

fn gamma_sum_entry(k0: f64, k: f64, m: usize, n: usize, pochhammer: &[TwoFloat]) -> Result<f64> {
    let (alpha, alpha0) = (2.0 * k - 1.0, 2.0 * k0 - 1.0);
    let beta = k + k0 - 1.0;
    let a = power_ratios(alpha, m);
    let b = power_ratios(alpha0, n);
    let mut sum = TwoFloat::from(0.0);
    let mut largest = 0.0f64;
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            let term = *ai * *bj * pochhammer[i + j];
            largest = largest.max(term.hi().abs());
            sum += term;
        }
    }
    // sqrt(Γ(m+α+1)/m!)/Γ(α+1) per side, times Γ(β+1)
    let log_pre = 0.5 * (ln_gamma(m as f64 + alpha + 1.0) - ln_gamma(m as f64 + 1.0)) - ln_gamma(alpha + 1.0)
        + 0.5 * (ln_gamma(n as f64 + alpha0 + 1.0) - ln_gamma(n as f64 + 1.0))
        - ln_gamma(alpha0 + 1.0)
        + ln_gamma(beta + 1.0);
    let pre = log_pre.exp();
    let error = pre * largest * 1e-30;
    if !(error <= GAMMA_SUM_BUDGET) {
        return Err(VlabError::PrecisionLoss(format!(
            "Γ-sum entry ({m},{n}) cancels terms of size {:.3e}",
            pre * largest
        )));
    }
    Ok(pre * sum.hi() * sign(m + n))
}

fn gamma_sum_overlap(k0: f64, k: f64, dim: usize) -> Result<Vec<f64>> {
    let beta = TwoFloat::from(k + k0 - 1.0);
    let mut pochhammer = Vec::with_capacity(2 * dim);
    let mut p = TwoFloat::from(1.0);
    for s in 0..2 * dim {
        pochhammer.push(p);
        p *= beta + TwoFloat::from((s + 1) as f64);
    }
    let mut out = vec![0.0; dim * dim];
    for m in 0..dim {
        for n in 0..dim {
            out[m * dim + n] = gamma_sum_entry(k0, k, m, n, &pochhammer)?;
        }
    }
    Ok(out)
}

/// Default quadrature order for an `N`-dimensional overlap.
pub fn default_order(dim: usize) -> usize {
    2 * dim + 32
}

/// Overlap map from sector `k0` into sector `k`. Equal indices give the
/// identity exactly.
pub fn overlap_matrix(k0: f64, k: f64, dim: usize, method: OverlapMethod) -> Result<OverlapMatrix> {
    let from = LaguerreBasisSpec::new(k0, dim)?;
    let to = LaguerreBasisSpec::new(k, dim)?;
    let entries = if k == k0 {
        let mut id = vec![0.0; dim * dim];
        for i in 0..dim {
            id[i * dim + i] = 1.0;
        }
        id
    } else {
        match method {
            OverlapMethod::GammaSum => gamma_sum_overlap(k0, k, dim)?,
            OverlapMethod::Quadrature => {
                let order = default_order(dim);
                let base = quadrature_overlap(k0, k, dim, order)?;
                let doubled = quadrature_overlap(k0, k, dim, 2 * order)?;
                let discrepancy = base.iter().zip(&doubled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if !(discrepancy <= QUADRATURE_TOL) {
                    return Err(VlabError::QuadratureOrder { discrepancy });
                }
                // sign convention of the sector basis
                doubled.iter().enumerate().map(|(idx, v)| v * sign(idx / dim + idx % dim)).collect()
            }
        }
    };
    let mat = Mat::from_fn(dim, dim, |i, j| c64::new(entries[i * dim + j], 0.0));
    let s = OperatorMatrix::from_mat_between(mat, to.basis(), from.basis())?;
    Ok(OverlapMatrix { s, method, k0, k })
}
