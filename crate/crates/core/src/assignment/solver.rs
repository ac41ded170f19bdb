use serde::{Deserialize, Serialize};

use super::cost::CostTable;
use super::database::TrainingDatabase;
use super::types::ToothType;
use super::AssignmentError;

/// Default penalty multiplier for missing tooth types.
pub const DEFAULT_FUSSINESS: f64 = 8.0;

/// Solved assignment. `blob_type[i]` is the type of blob `i`, or `None` for
/// non-tooth; a type no blob takes is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub blob_type: Vec<Option<usize>>,
    pub type_count: usize,
    pub objective: f64,
}

impl Assignment {
    pub fn d(&self, i: usize, j: usize) -> bool {
        self.blob_type[i] == Some(j)
    }

    pub fn non_tooth(&self, i: usize) -> bool {
        self.blob_type[i].is_none()
    }

    pub fn missing(&self, j: usize) -> bool {
        !self.blob_type.contains(&Some(j))
    }

    pub fn missing_count(&self) -> usize {
        (0..self.type_count).filter(|&j| self.missing(j)).count()
    }
}

/// `Σ D·C` (row-major) plus `fussiness · Σ P·MI` (type order).
pub fn objective(costs: &[Vec<f64>], priors: &[f64], fussiness: f64, blob_type: &[Option<usize>]) -> f64 {
    let mut matched = 0.0;
    for (row, t) in costs.iter().zip(blob_type) {
        if let Some(j) = t {
            matched += row[*j];
        }
    }
    let mut penalty = 0.0;
    for (j, p) in priors.iter().enumerate() {
        if !blob_type.contains(&Some(j)) {
            penalty += p;
        }
    }
    matched + fussiness * penalty
}

/// Optimal ordered assignment by dynamic programming.
///
/// Blobs and types are both in left-to-right order, so matched pairs must
/// increase in both indices; this turns the boolean model into a sequence
/// alignment where skipped types pay `fussiness · P`. `conflict(a, b)` marks
/// type pairs that may not both be matched (a whole molar and one of its
/// halves); they are adjacent in the type order, so checking the previous
/// match is enough. Among optimal solutions the lexicographically smallest
/// `D` (row-major) is returned.
pub fn solve(
    costs: &[Vec<f64>],
    priors: &[f64],
    conflict: impl Fn(usize, usize) -> bool,
    fussiness: f64,
) -> Result<Assignment, AssignmentError> {
    let m = costs.len();
    let n = priors.len();
    for (i, row) in costs.iter().enumerate() {
        if row.len() != n {
            return Err(AssignmentError::Shape { row: i, len: row.len(), types: n });
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(AssignmentError::NonFiniteCost { blob: i, type_index: j });
        }
    }
    if !(fussiness >= 0.0) || priors.iter().any(|p| !p.is_finite()) {
        return Err(AssignmentError::BadPenalty);
    }

    // prefix[j] = Σ P[..j]
    let mut prefix = vec![0.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] + priors[j];
    }
    let skip = |from: usize, to: usize| fussiness * (prefix[to] - prefix[from]);
    let allowed = |s: usize, t: usize| s == 0 || !conflict(s - 1, t);

    // g[i][s]: best cost for blobs i.. when types s.. are still available
    // (type s − 1 was the last match).
    let mut g = vec![vec![0.0; n + 1]; m + 1];
    for s in 0..=n {
        g[m][s] = skip(s, n);
    }
    for i in (0..m).rev() {
        for s in 0..=n {
            let mut best = g[i + 1][s];
            for t in s..n {
                if allowed(s, t) {
                    best = best.min(skip(s, t) + costs[i][t] + g[i + 1][t + 1]);
                }
            }
            g[i][s] = best;
        }
    }

    let target = g[0][0];
    let tol = 1e-9 * (1.0 + target.abs());
    let mut blob_type = vec![None; m];
    let mut acc = 0.0;
    let mut s = 0;
    for i in 0..m {
        if acc + g[i + 1][s] <= target + tol {
            continue;
        }
        let pick = (s..n)
            .rev()
            .find(|&t| allowed(s, t) && acc + skip(s, t) + costs[i][t] + g[i + 1][t + 1] <= target + tol)
            .ok_or(AssignmentError::Internal)?;
        acc += skip(s, pick) + costs[i][pick];
        blob_type[i] = Some(pick);
        s = pick + 1;
    }

    Ok(Assignment {
        objective: objective(costs, priors, fussiness, &blob_type),
        blob_type,
        type_count: n,
    })
}

/// Solves the cost table for `types` with priors from `db`.
pub fn solve_assignment(
    table: &CostTable,
    types: &[ToothType],
    db: &TrainingDatabase,
    fussiness: f64,
) -> Result<Assignment, AssignmentError> {
    let priors: Vec<f64> = types.iter().map(|t| db.prior(t)).collect();
    if table.blobs() == 0 {
        return solve(&[], &priors, |_, _| false, fussiness);
    }
    solve(&table.rows, &priors, |a, b| types[a].conflicts_with(&types[b]), fussiness)
}
