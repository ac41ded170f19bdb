use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::solver::Assignment;
use super::types::{MolarRole, ToothType};

/// One identified tooth, possibly made of two half-molar blobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTooth {
    pub code: String,
    /// `(assigned code, blob index)` for every blob in the tooth.
    pub parts: Vec<(String, usize)>,
    /// Only the mesial half is present.
    pub partial: bool,
    /// Only the distal half is present.
    pub anomalous: bool,
}

impl LabeledTooth {
    pub fn blobs(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().map(|(_, b)| *b)
    }
}

/// Folds half-molar labels into whole teeth. Teeth come out in blob order.
pub fn merge_half_molars(assignment: &Assignment, types: &[ToothType]) -> Vec<LabeledTooth> {
    let mut by_tooth: BTreeMap<String, Vec<(usize, &ToothType)>> = BTreeMap::new();
    for (blob, t) in assignment.blob_type.iter().enumerate() {
        if let Some(j) = t {
            by_tooth.entry(types[*j].whole_code()).or_default().push((blob, &types[*j]));
        }
    }
    let mut teeth: Vec<LabeledTooth> = by_tooth
        .into_iter()
        .map(|(whole, members)| {
            let has = |r: MolarRole| members.iter().any(|(_, t)| t.role == r);
            let mesial = has(MolarRole::MesialHalf);
            let distal = has(MolarRole::DistalHalf);
            let anomalous = distal && !mesial;
            let code = if anomalous { members[0].1.code.clone() } else { whole };
            LabeledTooth {
                code,
                parts: members.iter().map(|(b, t)| (t.code.clone(), *b)).collect(),
                partial: mesial && !distal,
                anomalous,
            }
        })
        .collect();
    teeth.sort_by_key(|t| t.parts[0].1);
    teeth
}
