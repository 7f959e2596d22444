use serde::{Deserialize, Serialize};

/// Verification status of an identity under truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Holds to roundoff on its defect-free window.
    Exact,
    /// Residual must shrink with the truncation dimension.
    Convergent,
    /// Numbers and trends only.
    ReportOnly,
}

/// Windowed measurement of one identity defect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub label: String,
    pub tier: Tier,
    pub window: usize,
    pub absolute: f64,
    pub relative: f64,
    /// Named sub-measurements, in a fixed order.
    pub components: Vec<(String, f64)>,
}

impl ResidualRecord {
    pub fn new(label: impl Into<String>, tier: Tier, window: usize, absolute: f64, relative: f64) -> Self {
        ResidualRecord { label: label.into(), tier, window, absolute, relative, components: Vec::new() }
    }

    pub fn with_component(mut self, name: impl Into<String>, value: f64) -> Self {
        self.components.push((name.into(), value));
        self
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub value: f64,
    pub residual: f64,
    /// Empirical order against the previous row: `ln(r_prev/r) / ln(v_prev/v)`.
    pub order: Option<f64>,
}

/// Residuals of one check along a sweep axis (dimension, frequency, cutoff).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub id: String,
    pub axis: String,
    pub rows: Vec<TrendRow>,
}

impl ConvergenceTable {
    pub fn new(id: impl Into<String>, axis: impl Into<String>, points: &[(f64, f64)]) -> Self {
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, &(value, residual))| {
                let order = (i > 0).then(|| {
                    let (pv, pr) = points[i - 1];
                    (pr / residual).ln() / (pv / value).ln()
                });
                TrendRow { value, residual, order: order.filter(|o| o.is_finite()) }
            })
            .collect();
        ConvergenceTable { id: id.into(), axis: axis.into(), rows }
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].residual < w[0].residual)
    }

    /// Mean of the available pairwise orders.
    pub fn mean_order(&self) -> Option<f64> {
        let orders: Vec<f64> = self.rows.iter().filter_map(|r| r.order).collect();
        (!orders.is_empty()).then(|| orders.iter().sum::<f64>() / orders.len() as f64)
    }

    /// Every row carries a finite, nonnegative residual and at least one row exists.
    pub fn is_well_formed(&self) -> bool {
        !self.rows.is_empty()
            && self.rows.iter().all(|r| r.residual.is_finite() && r.residual >= 0.0 && r.value.is_finite())
    }
}
