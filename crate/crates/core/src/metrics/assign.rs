//! Rectangular linear assignment (Hungarian method with potentials).

/// Maximum-weight assignment on a `rows x cols` matrix of finite weights.
///
/// Returns, for each row, the matched column (or `None` when there are more
/// rows than columns) and the total weight. Every row is matched when
/// `rows <= cols`, and vice versa; since weights here are nonnegative the
/// maximum over complete matchings is the maximum over all matchings.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (Vec<Option<usize>>, f64) {
    let rows = weights.len();
    if rows == 0 {
        return (Vec::new(), 0.0);
    }
    let cols = weights[0].len();
    if cols == 0 {
        return (vec![None; rows], 0.0);
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| weights[r][c]).collect()).collect();
        let (col_to_row, total) = max_weight_assignment(&transposed);
        let mut row_to_col = vec![None; rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                row_to_col[r] = Some(c);
            }
        }
        return (row_to_col, total);
    }
    let max = weights.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let cost = |r: usize, c: usize| max - weights[r][c];

    // 1-based arrays; column 0 is the virtual start.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for r in 1..=rows {
        owner[0] = r;
        let mut c0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[c0] = true;
            let r0 = owner[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0;
            for c in 1..=cols {
                if used[c] {
                    continue;
                }
                let cur = cost(r0 - 1, c - 1) - u[r0] - v[c];
                if cur < minv[c] {
                    minv[c] = cur;
                    way[c] = c0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    c1 = c;
                }
            }
            for c in 0..=cols {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
            if owner[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            owner[c0] = owner[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![None; rows];
    for c in 1..=cols {
        if owner[c] != 0 {
            row_to_col[owner[c] - 1] = Some(c - 1);
        }
    }
    let total = row_to_col.iter().enumerate().filter_map(|(r, c)| c.map(|c| weights[r][c])).sum();
    (row_to_col, total)
}
