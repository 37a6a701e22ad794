//! The option catalog behind path enumeration.
//!
//! Every decision level registers its options with a status; entries that
//! are statically pruned or not implemented never enter the path product
//! but surface in reports together with their rationale.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Decision levels from problem decomposition down to the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Decomposition,
    Encoding,
    Penalty,
    Scaling,
    Algorithm,
    Optimizer,
}

impl Level {
    pub const ALL: [Level; 6] = [
        Level::Decomposition,
        Level::Encoding,
        Level::Penalty,
        Level::Scaling,
        Level::Algorithm,
        Level::Optimizer,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Level::Decomposition => "decomposition",
            Level::Encoding => "encoding",
            Level::Penalty => "penalty",
            Level::Scaling => "scaling",
            Level::Algorithm => "algorithm",
            Level::Optimizer => "optimizer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionStatus {
    Implemented,
    /// Ruled out ahead of enumeration; kept for the record.
    PrunedStatic,
    Unimplemented,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub level: Level,
    pub id: String,
    pub status: OptionStatus,
    /// Required for anything other than `Implemented`.
    pub rationale: Option<String>,
}

impl CatalogEntry {
    fn implemented(level: Level, id: &str) -> Self {
        CatalogEntry {
            level,
            id: id.to_string(),
            status: OptionStatus::Implemented,
            rationale: None,
        }
    }

    fn excluded(level: Level, id: &str, status: OptionStatus, rationale: &str) -> Self {
        CatalogEntry {
            level,
            id: id.to_string(),
            status,
            rationale: Some(rationale.to_string()),
        }
    }
}

/// Registered options per level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl PathCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self> {
        let catalog = PathCatalog { entries };
        catalog.validate()?;
        Ok(catalog)
    }

    /// The option set this build ships with.
    pub fn default_catalog() -> Self {
        use Level::*;
        use OptionStatus::*;
        let entries = vec![
            CatalogEntry::implemented(Decomposition, "cluster-first"),
            // Kept so its qubit demand shows up in reports; the monolithic
            // time-indexed formulation is never executed.
            CatalogEntry::implemented(Decomposition, "direct-cvrp"),
            CatalogEntry::implemented(Encoding, "one-hot"),
            CatalogEntry::excluded(
                Encoding,
                "domain-wall",
                Unimplemented,
                "alternative integer encoding; not wired into the pipeline yet",
            ),
            CatalogEntry::excluded(
                Encoding,
                "binary",
                Unimplemented,
                "compact integer encoding; not wired into the pipeline yet",
            ),
            CatalogEntry::excluded(
                Encoding,
                "hobo",
                Unimplemented,
                "higher-order terms require a different cost-layer implementation",
            ),
            CatalogEntry::excluded(
                Encoding,
                "unbalanced-penalization",
                Unimplemented,
                "asymmetric constraint terms; not wired into the pipeline yet",
            ),
            CatalogEntry::implemented(Penalty, "exact-min-search"),
            CatalogEntry::implemented(Penalty, "bounding-box"),
            CatalogEntry::implemented(Scaling, "exact-width"),
            CatalogEntry::implemented(Scaling, "gershgorin-bound"),
            CatalogEntry::implemented(Scaling, "none"),
            CatalogEntry::implemented(Algorithm, "qaoa"),
            CatalogEntry::implemented(Algorithm, "classical-exact"),
            CatalogEntry::implemented(Algorithm, "classical-heuristic"),
            CatalogEntry::excluded(
                Algorithm,
                "warm-start-qaoa",
                PrunedStatic,
                "feasible one-hot states sit at least four bit flips apart, so a \
                 classically seeded assignment rarely overlaps the target state",
            ),
            CatalogEntry::excluded(
                Algorithm,
                "recursive-qaoa",
                PrunedStatic,
                "variable elimination still encodes the full problem up front, so \
                 it cannot reduce the qubit demand here",
            ),
            CatalogEntry::implemented(Optimizer, "adam"),
            CatalogEntry::implemented(Optimizer, "nelder-mead"),
            CatalogEntry::implemented(Optimizer, "umda"),
            CatalogEntry::implemented(Optimizer, "quasi-newton"),
        ];
        PathCatalog { entries }
    }

    pub fn validate(&self) -> Result<()> {
        for level in Level::ALL {
            if !self
                .entries
                .iter()
                .any(|e| e.level == level && e.status == OptionStatus::Implemented)
            {
                return Err(Error::Invalid(format!(
                    "catalog has no implemented option at the {} level",
                    level.id()
                )));
            }
        }
        for entry in &self.entries {
            if entry.status != OptionStatus::Implemented && entry.rationale.is_none() {
                return Err(Error::Invalid(format!(
                    "catalog entry {} is not implemented but carries no rationale",
                    entry.id
                )));
            }
        }
        Ok(())
    }

    pub fn implemented(&self, level: Level) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.level == level && e.status == OptionStatus::Implemented)
            .map(|e| e.id.as_str())
            .collect()
    }

    /// Entries that never enter the product, for the report.
    pub fn excluded_entries(&self) -> Vec<&CatalogEntry> {
        self.entries
            .iter()
            .filter(|e| e.status != OptionStatus::Implemented)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_is_valid() {
        let catalog = PathCatalog::default_catalog();
        catalog.validate().unwrap();
        assert!(catalog.implemented(Level::Optimizer).len() == 4);
        assert!(catalog
            .excluded_entries()
            .iter()
            .any(|e| e.id == "warm-start-qaoa" && e.status == OptionStatus::PrunedStatic));
    }

    #[test]
    fn missing_level_is_rejected() {
        let entries = vec![CatalogEntry::implemented(
            Level::Decomposition,
            "cluster-first",
        )];
        assert!(PathCatalog::new(entries).is_err());
    }

    #[test]
    fn missing_rationale_is_rejected() {
        let mut catalog = PathCatalog::default_catalog();
        catalog.entries.push(CatalogEntry {
            level: Level::Algorithm,
            id: "mystery".into(),
            status: OptionStatus::Unimplemented,
            rationale: None,
        });
        assert!(catalog.validate().is_err());
    }
}
