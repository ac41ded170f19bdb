use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::characteristics::{Characteristic, Characteristics};
use super::types::{tooth_types, JawKind, ToothType};

pub const DB_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatabaseError {
    #[error("malformed database: {0}")]
    Json(#[from] serde_json::Error),
    #[error("database schema version {found} is not supported (expected {DB_SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error("database is for {found}, model is {expected}")]
    WrongJaw { expected: JawKind, found: JawKind },
    #[error("database lacks tooth type {0}")]
    MissingType(String),
    #[error("tooth type {code}: {problem}")]
    BadEntry { code: String, problem: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    /// Reference values keyed by characteristic name.
    pub characteristics: BTreeMap<String, Vec<f64>>,
    /// Fraction of patients having this type, in [0, 1].
    pub prior: f64,
}

/// Reference measurements per tooth type. Left and right types share one
/// entry, keyed by the patient-right code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDatabase {
    pub schema_version: u32,
    pub jaw_kind: JawKind,
    pub types: BTreeMap<String, TypeEntry>,
}

const SHIPPED: [(JawKind, &str); 4] = [
    (JawKind::AdultUpper, include_str!("../../data/adult-upper.json")),
    (JawKind::AdultLower, include_str!("../../data/adult-lower.json")),
    (JawKind::DeciduousUpper, include_str!("../../data/deciduous-upper.json")),
    (JawKind::DeciduousLower, include_str!("../../data/deciduous-lower.json")),
];

impl TrainingDatabase {
    pub fn from_json(text: &str) -> Result<Self, DatabaseError> {
        let db: TrainingDatabase = serde_json::from_str(text)?;
        db.validate()?;
        Ok(db)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("database serializes")
    }

    /// The database built from synthetic jaws that ships with the library.
    pub fn shipped(jaw: JawKind) -> Result<Self, DatabaseError> {
        let (_, text) = SHIPPED.iter().find(|(k, _)| *k == jaw).expect("every jaw kind ships");
        Self::from_json(text)
    }

    pub fn validate(&self) -> Result<(), DatabaseError> {
        if self.schema_version != DB_SCHEMA_VERSION {
            return Err(DatabaseError::Version {
                found: self.schema_version,
            });
        }
        for t in tooth_types(self.jaw_kind) {
            let code = t.pooled_code();
            let entry = self.types.get(&code).ok_or_else(|| DatabaseError::MissingType(code.clone()))?;
            if !(0.0..=1.0).contains(&entry.prior) {
                return Err(DatabaseError::BadEntry {
                    code,
                    problem: format!("prior {} outside [0, 1]", entry.prior),
                });
            }
            for c in Characteristic::ALL {
                let n = entry.characteristics.get(c.name()).map_or(0, Vec::len);
                if n < 2 {
                    return Err(DatabaseError::BadEntry {
                        code,
                        problem: format!("{} has {n} reference values, need at least 2", c.name()),
                    });
                }
            }
            if let Some(v) = entry.characteristics.values().flatten().find(|v| !v.is_finite()) {
                return Err(DatabaseError::BadEntry {
                    code,
                    problem: format!("non-finite reference value {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn ensure_jaw(&self, jaw: JawKind) -> Result<(), DatabaseError> {
        if self.jaw_kind != jaw {
            return Err(DatabaseError::WrongJaw {
                expected: jaw,
                found: self.jaw_kind,
            });
        }
        Ok(())
    }

    pub fn prior(&self, t: &ToothType) -> f64 {
        self.types.get(&t.pooled_code()).map_or(0.0, |e| e.prior)
    }
}

/// Accumulates labeled samples, one model at a time.
#[derive(Debug, Clone)]
pub struct DatabaseBuilder {
    jaw: JawKind,
    models: usize,
    presence: BTreeMap<String, f64>,
    samples: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl DatabaseBuilder {
    pub fn new(jaw: JawKind) -> Self {
        DatabaseBuilder {
            jaw,
            models: 0,
            presence: BTreeMap::new(),
            samples: BTreeMap::new(),
        }
    }

    pub fn jaw(&self) -> JawKind {
        self.jaw
    }

    /// Adds one model's labeled parts (`code`, measurements). Codes not in
    /// the jaw's catalog are ignored and returned.
    pub fn add_model(&mut self, parts: &[(String, Characteristics)]) -> Vec<String> {
        let catalog = tooth_types(self.jaw);
        let mut ignored = Vec::new();
        let mut seen: Vec<&ToothType> = Vec::new();
        for (code, ch) in parts {
            let Some(t) = catalog.iter().find(|t| &t.code == code) else {
                ignored.push(code.clone());
                continue;
            };
            if !seen.contains(&t) {
                seen.push(t);
            }
            let slot = self.samples.entry(t.pooled_code()).or_default();
            for c in Characteristic::ALL {
                slot.entry(c.name().to_string()).or_default().push(ch.get(c));
            }
        }
        for t in seen {
            // Left and right each count half towards the pooled prior.
            *self.presence.entry(t.pooled_code()).or_default() += 0.5;
        }
        self.models += 1;
        ignored
    }

    pub fn build(self) -> TrainingDatabase {
        let mut types = BTreeMap::new();
        for t in tooth_types(self.jaw) {
            let key = t.pooled_code();
            if types.contains_key(&key) {
                continue;
            }
            let prior = if self.models > 0 {
                (self.presence.get(&key).copied().unwrap_or(0.0) / self.models as f64).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let characteristics = self.samples.get(&key).cloned().unwrap_or_default();
            types.insert(key, TypeEntry { characteristics, prior });
        }
        TrainingDatabase {
            schema_version: DB_SCHEMA_VERSION,
            jaw_kind: self.jaw,
            types,
        }
    }
}
