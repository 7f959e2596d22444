use serde::Deserialize;
use vlab_core::residual::Tier;

use crate::error::CliError;

const CATALOG: &str = include_str!("catalog.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Algebra,
    Coherent,
    Conformal,
    Timeops,
    Intertwine,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Coherent => "coherent",
            Suite::Conformal => "conformal",
            Suite::Timeops => "timeops",
            Suite::Intertwine => "intertwine",
            Suite::All => "all",
        }
    }

    pub fn selects(self, entry: &CatalogEntry) -> bool {
        self == Suite::All || self == entry.suite
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Dim,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    pub suite: Suite,
    pub paper_eq: String,
    pub tier: Tier,
    pub tolerance: Option<f64>,
    pub scale: Option<Scale>,
    #[serde(default)]
    pub strict: bool,
}

impl CatalogEntry {
    /// Tolerance after dimension scaling; `None` for report-only entries.
    pub fn effective_tolerance(&self, base: Option<f64>, dim: usize) -> Option<f64> {
        let t = base.or(self.tolerance)?;
        Some(match self.scale {
            Some(Scale::Dim) => t * dim as f64,
            None => t,
        })
    }

    pub fn passes(&self, residual: f64, tolerance: f64) -> bool {
        if self.strict {
            residual < tolerance
        } else {
            residual <= tolerance
        }
    }
}

#[derive(Deserialize)]
struct CatalogFile {
    check: Vec<CatalogEntry>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn load() -> Result<Self, CliError> {
        Self::parse(CATALOG)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| CliError::Catalog(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for e in &file.check {
            if !seen.insert(e.id.as_str()) {
                return Err(CliError::Catalog(format!("duplicate id `{}`", e.id)));
            }
            if e.suite == Suite::All {
                return Err(CliError::Catalog(format!("`{}` must name a concrete suite", e.id)));
            }
            match (e.tier, e.tolerance) {
                (Tier::ReportOnly, Some(_)) => {
                    return Err(CliError::Catalog(format!("report-only `{}` carries a tolerance", e.id)))
                }
                (Tier::Exact | Tier::Convergent, None) => {
                    return Err(CliError::Catalog(format!("`{}` has no tolerance", e.id)))
                }
                _ => {}
            }
        }
        Ok(Catalog { entries: file.check })
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn select(&self, suite: Suite) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(move |e| suite.selects(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_catalog_parses() {
        let c = Catalog::load().unwrap();
        assert!(c.get("bch_conjugation").is_some());
        assert_eq!(c.select(Suite::All).count(), c.entries.len());
    }

    #[test]
    fn every_suite_nonempty() {
        let c = Catalog::load().unwrap();
        for s in [Suite::Algebra, Suite::Coherent, Suite::Conformal, Suite::Timeops, Suite::Intertwine] {
            assert!(c.select(s).count() > 0, "{}", s.name());
        }
    }

    #[test]
    fn dimension_scaling() {
        let c = Catalog::load().unwrap();
        let e = c.get("conformal_algebra").unwrap();
        assert_eq!(e.effective_tolerance(None, 64), Some(64e-12));
        assert_eq!(c.get("t0_forms").unwrap().effective_tolerance(None, 64), None);
    }

    #[test]
    fn rejects_duplicates_and_missing_tolerance() {
        let dup = "[[check]]\nid='a'\nsuite='algebra'\npaper_eq='x'\ntier='exact'\ntolerance=1.0\n\
                   [[check]]\nid='a'\nsuite='algebra'\npaper_eq='x'\ntier='exact'\ntolerance=1.0\n";
        assert!(Catalog::parse(dup).is_err());
        let bare = "[[check]]\nid='a'\nsuite='algebra'\npaper_eq='x'\ntier='convergent'\n";
        assert!(Catalog::parse(bare).is_err());
    }
}
