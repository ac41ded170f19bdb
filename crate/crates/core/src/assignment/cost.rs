use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::characteristics::{Characteristic, Characteristics};
use super::database::TrainingDatabase;
use super::types::ToothType;
use super::AssignmentError;

/// Normalized mean-square mismatch of `t` against reference values `r`.
///
/// `(MSE(t, r) − C_min) / C̄_ref` where `C_min` is the smallest achievable
/// MSE (the variance of `r`) and `C̄_ref` is the mean shifted cost of the
/// references themselves. `None` when `r` has fewer than two values or no
/// spread.
pub fn cost_metric(t: f64, r: &[f64]) -> Option<f64> {
    if r.len() < 2 {
        return None;
    }
    let k = r.len() as f64;
    let mse = |x: f64| r.iter().map(|ri| (x - ri).powi(2)).sum::<f64>() / k;
    let mean = r.iter().sum::<f64>() / k;
    let c_min = mse(mean);
    let c_ref = r.iter().map(|&ri| mse(ri) - c_min).sum::<f64>() / k;
    if !(c_ref > 0.0) {
        return None;
    }
    Some(((mse(t) - c_min) / c_ref).max(0.0))
}

/// Mismatch costs, one row per blob and one column per tooth type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub rows: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn blobs(&self) -> usize {
        self.rows.len()
    }

    pub fn types(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }
}

/// `C[i][j]` = unweighted mean over usable characteristics of
/// [`cost_metric`] against the pooled references for type `j`.
pub fn build_cost_table(
    blobs: &[Characteristics],
    types: &[ToothType],
    db: &TrainingDatabase,
) -> Result<CostTable, AssignmentError> {
    // Per type: the usable (characteristic, references) pairs.
    let mut usable: Vec<Vec<(Characteristic, &[f64])>> = Vec::with_capacity(types.len());
    for t in types {
        let key = t.pooled_code();
        let entry = db.types.get(&key).ok_or_else(|| AssignmentError::MissingType(key.clone()))?;
        let mut list = Vec::new();
        for c in Characteristic::ALL {
            let refs = entry.characteristics.get(c.name()).map(Vec::as_slice).unwrap_or(&[]);
            if cost_metric(0.0, refs).is_some() {
                list.push((c, refs));
            } else {
                warn!("{key}: characteristic {} has no usable reference spread; skipped", c.name());
            }
        }
        if list.is_empty() {
            return Err(AssignmentError::NoUsableCharacteristic(key));
        }
        usable.push(list);
    }
    let rows = blobs
        .par_iter()
        .map(|b| {
            usable
                .iter()
                .map(|list| {
                    let sum: f64 = list
                        .iter()
                        .map(|(c, refs)| cost_metric(b.get(*c), refs).expect("checked usable"))
                        .sum();
                    sum / list.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(CostTable { rows })
}
