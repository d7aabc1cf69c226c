//! Rectangular maximum-weight assignment (Hungarian algorithm).
//!
//! Gains are real-valued and non-negative. The returned assignment has
//! `min(rows, cols)` pairs and, among optimal assignments, is the
//! lexicographically smallest list of `(row, col)` pairs.

use alloc::vec;
use alloc::vec::Vec;

/// Minimum-cost assignment of every row of an `n x m` cost matrix, `n <= m`.
///
/// Returns the column assigned to each row. Shortest augmenting path form
/// with row and column potentials, O(n^2 m).
fn min_cost_rows(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    debug_assert!(n <= m);
    const NONE: usize = usize::MAX;
    // Column m is the virtual source column.
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of = vec![NONE; m + 1];
    let mut way = vec![m; m + 1];

    for row in 0..n {
        row_of[m] = row;
        let mut j0 = m;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for j in 0..m {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 * m + j] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == NONE {
                break;
            }
        }
        // Augment along the alternating path back to the source.
        while j0 != m {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }

    let mut col_of = vec![NONE; n];
    for j in 0..m {
        if row_of[j] != NONE {
            col_of[row_of[j]] = j;
        }
    }
    col_of
}

/// Optimal assignment of a sub-matrix selected by `rows` and `cols`.
fn solve(gains: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (Vec<(usize, usize)>, f64) {
    if rows.is_empty() || cols.is_empty() {
        return (Vec::new(), 0.0);
    }
    let transpose = rows.len() > cols.len();
    let (outer, inner) = if transpose {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let (n, m) = (outer.len(), inner.len());
    let mut cost = vec![0.0; n * m];
    for (a, &o) in outer.iter().enumerate() {
        for (b, &i) in inner.iter().enumerate() {
            let g = if transpose { gains[i][o] } else { gains[o][i] };
            cost[a * m + b] = -g;
        }
    }
    let picked = min_cost_rows(&cost, n, m);
    let mut pairs: Vec<(usize, usize)> = picked
        .iter()
        .enumerate()
        .map(|(a, &b)| {
            if transpose {
                (inner[b], outer[a])
            } else {
                (outer[a], inner[b])
            }
        })
        .collect();
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(r, c)| gains[r][c]).sum();
    (pairs, total)
}

/// Maximum-weight assignment over a rectangular gain matrix.
///
/// `gains[row][col]`; every row must have the same length.
pub fn max_weight_assignment(gains: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n_rows = gains.len();
    let n_cols = gains.first().map_or(0, Vec::len);
    debug_assert!(gains.iter().all(|row| row.len() == n_cols));
    let all_rows: Vec<usize> = (0..n_rows).collect();
    let all_cols: Vec<usize> = (0..n_cols).collect();
    let (incumbent, best) = solve(gains, &all_rows, &all_cols);
    let size = incumbent.len();
    if size == 0 {
        return incumbent;
    }
    let tolerance = 1e-9 * best.abs().max(1.0);

    // Fix rows one at a time to the smallest column that still admits an
    // optimal completion of the right size.
    let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(size);
    let mut fixed_gain = 0.0;
    let mut free_cols = all_cols;
    let mut current = incumbent;
    for row in 0..n_rows {
        if fixed.len() == size {
            break;
        }
        let rest: Vec<usize> = (row + 1..n_rows).collect();
        let incumbent_col = current.iter().find(|p| p.0 == row).map(|p| p.1);
        let mut choice = None;
        for (k, &col) in free_cols.iter().enumerate() {
            if Some(col) == incumbent_col {
                choice = Some((k, col, None));
                break;
            }
            let mut cols = free_cols.clone();
            cols.remove(k);
            let (tail, tail_gain) = solve(gains, &rest, &cols);
            let complete = fixed.len() + 1 + tail.len() == size;
            if complete && fixed_gain + gains[row][col] + tail_gain >= best - tolerance {
                choice = Some((k, col, Some(tail)));
                break;
            }
        }
        match choice {
            Some((k, col, tail)) => {
                fixed.push((row, col));
                fixed_gain += gains[row][col];
                free_cols.remove(k);
                if let Some(tail) = tail {
                    current = fixed.iter().copied().chain(tail).collect();
                }
            }
            // Leaving the row unassigned is what the incumbent does.
            None => debug_assert!(incumbent_col.is_none()),
        }
    }
    fixed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(gains: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| gains[r][c]).sum()
    }

    #[test]
    fn square_case() {
        let gains = vec![vec![0.9, 0.2], vec![0.3, 0.8]];
        let a = max_weight_assignment(&gains);
        assert_eq!(a, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn prefers_crossing_when_better() {
        let gains = vec![vec![1.0, 5.0], vec![5.0, 1.0]];
        assert_eq!(max_weight_assignment(&gains), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn rectangular_shapes() {
        let wide = vec![vec![1.0, 3.0, 2.0]];
        assert_eq!(max_weight_assignment(&wide), vec![(0, 1)]);
        let tall = vec![vec![1.0], vec![3.0], vec![2.0]];
        assert_eq!(max_weight_assignment(&tall), vec![(1, 0)]);
        assert!(max_weight_assignment(&[]).is_empty());
        assert!(max_weight_assignment(&[vec![], vec![]]).is_empty());
    }

    #[test]
    fn ties_resolve_to_lowest_indices() {
        let zeros = vec![vec![0.0; 3]; 3];
        assert_eq!(max_weight_assignment(&zeros), vec![(0, 0), (1, 1), (2, 2)]);
        let tall_zero = vec![vec![0.0; 2]; 4];
        assert_eq!(max_weight_assignment(&tall_zero), vec![(0, 0), (1, 1)]);
        let gains = vec![vec![2.0, 2.0], vec![2.0, 2.0], vec![1.0, 1.0]];
        assert_eq!(max_weight_assignment(&gains), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn size_is_min_dimension_even_with_zero_gains() {
        let gains = vec![vec![0.0, 7.0, 0.0], vec![0.0, 0.0, 0.0]];
        let a = max_weight_assignment(&gains);
        assert_eq!(a.len(), 2);
        assert_eq!(total(&gains, &a), 7.0);
        assert_eq!(a, vec![(0, 1), (1, 0)]);
    }
}
