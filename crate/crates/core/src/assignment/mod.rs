//! Tooth identification: characteristics, mismatch costs and the ordered
//! assignment of blobs to tooth types.

mod characteristics;
mod cost;
mod database;
mod merge;
mod solver;
mod types;

use thiserror::Error;

pub use characteristics::{measure_characteristics, Characteristic, Characteristics};
pub use cost::{build_cost_table, cost_metric, CostTable};
pub use database::{DatabaseBuilder, DatabaseError, TrainingDatabase, TypeEntry, DB_SCHEMA_VERSION};
pub use merge::{merge_half_molars, LabeledTooth};
pub use solver::{objective, solve, solve_assignment, Assignment, DEFAULT_FUSSINESS};
pub use types::{tooth_class, tooth_types, whole_tooth_codes, JawKind, MolarRole, Side, ToothClass, ToothType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("training database has no entry for {0}")]
    MissingType(String),
    #[error("no characteristic of {0} has usable reference values")]
    NoUsableCharacteristic(String),
    #[error("cost for blob {blob}, type {type_index} is not finite")]
    NonFiniteCost { blob: usize, type_index: usize },
    #[error("cost row {row} has {len} entries for {types} types")]
    Shape { row: usize, len: usize, types: usize },
    #[error("fussiness and priors must be finite and non-negative")]
    BadPenalty,
    #[error("assignment reconstruction failed")]
    Internal,
}
