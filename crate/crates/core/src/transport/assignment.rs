//! Exact dense linear assignment by shortest augmenting paths
//! (the Jonker–Volgenant family), with dual prices for optimality
//! certificates.
//!
//! Maintains feasible duals u, v with cost[i][j] − u_i − v_j ≥ 0 and
//! complementary slackness on matched pairs, augmenting one row at a time
//! along a Dijkstra shortest path in the reduced-cost graph.

use crate::error::{Error, Result};

pub struct AssignmentSolution {
    /// col_of_row[i] = column matched to row i.
    pub col_of_row: Vec<usize>,
    /// Row duals.
    pub u: Vec<f64>,
    /// Column duals.
    pub v: Vec<f64>,
}

/// Solves the square dense assignment problem on a row-major cost matrix.
pub fn solve_assignment_dense(cost: &[f64], n: usize) -> Result<AssignmentSolution> {
    if cost.len() != n * n {
        return Err(Error::Precondition(format!(
            "cost matrix has {} entries for n = {n}",
            cost.len()
        )));
    }
    const UNSET: usize = usize::MAX;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut row_of_col = vec![UNSET; n];
    let mut col_of_row = vec![UNSET; n];
    let mut path = vec![UNSET; n]; // predecessor row of each column
    let mut shortest = vec![0.0f64; n];
    let mut scanned_rows = vec![false; n];
    let mut scanned_cols = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        for x in shortest.iter_mut() {
            *x = f64::INFINITY;
        }
        for x in scanned_rows.iter_mut() {
            *x = false;
        }
        for x in scanned_cols.iter_mut() {
            *x = false;
        }
        remaining.clear();
        remaining.extend(0..n);

        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let mut sink = UNSET;
        while sink == UNSET {
            scanned_rows[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = UNSET;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + cost[i * n + j] - u[i] - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row_of_col[j] == UNSET) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            if !lowest.is_finite() {
                return Err(Error::NonConvergence {
                    what: "assignment augmentation".into(),
                    residual: f64::INFINITY,
                    iterations: cur_row,
                });
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            if row_of_col[j] == UNSET {
                sink = j;
            } else {
                i = row_of_col[j];
            }
            scanned_cols[j] = true;
        }

        // dual update
        u[cur_row] += min_val;
        for r in 0..n {
            if scanned_rows[r] && r != cur_row {
                u[r] += min_val - shortest[col_of_row[r]];
            }
        }
        for j in 0..n {
            if scanned_cols[j] {
                v[j] -= min_val - shortest[j];
            }
        }

        // augment along the alternating path back to cur_row
        let mut j = sink;
        loop {
            let r = path[j];
            row_of_col[j] = r;
            std::mem::swap(&mut col_of_row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    Ok(AssignmentSolution { col_of_row, u, v })
}
