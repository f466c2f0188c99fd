//! Phase-1 simplex for convex-combination feasibility.

use alloc::{vec, vec::Vec};

use crate::{Error, Matrix, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Decides whether `query` is a convex combination of the rows of `points`:
/// ∃ λ ≥ 0, Σλ = 1, Σ λ_i·p_i = query.
///
/// Each coordinate is rescaled by its largest magnitude, then the
/// sum of artificial variables is minimized with Bland's rule. The query is
/// inside when that minimum is at most `tol`.
pub fn in_convex_hull(points: &Matrix, query: &[f64], tol: f64) -> Result<bool> {
    let (n, dim) = (points.rows(), points.cols());
    if n == 0 {
        return Err(Error::data("convex hull of an empty point set"));
    }
    if query.len() != dim {
        return Err(Error::ShapeMismatch {
            what: "query dimension",
            expected: dim,
            actual: query.len(),
        });
    }
    if points
        .as_slice()
        .iter()
        .chain(query)
        .any(|v| !v.is_finite())
    {
        return Err(Error::data("hull membership needs finite points"));
    }

    let mut scale = vec![0.0f64; dim];
    for r in points.iter_rows().chain(core::iter::once(query)) {
        for (s, v) in scale.iter_mut().zip(r) {
            *s = s.max(v.abs());
        }
    }
    scale.iter_mut().filter(|s| **s == 0.0).for_each(|s| *s = 1.0);

    // Bounding-box rejection: a coordinate outside the point range cannot be
    // reached by any convex combination.
    for j in 0..dim {
        let (lo, hi) = points
            .iter_rows()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[j]), hi.max(r[j]))
            });
        let q = query[j];
        if (q - hi) / scale[j] > tol || (lo - q) / scale[j] > tol {
            return Ok(false);
        }
    }

    let m = dim + 1;
    let cols = n + m + 1;
    let rhs = cols - 1;
    let mut tab = vec![0.0; (m + 1) * cols];
    for i in 0..m {
        let row = &mut tab[i * cols..(i + 1) * cols];
        if i < dim {
            for (j, p) in points.iter_rows().enumerate() {
                row[j] = p[i] / scale[i];
            }
            row[rhs] = query[i] / scale[i];
        } else {
            row[..n].iter_mut().for_each(|v| *v = 1.0);
            row[rhs] = 1.0;
        }
        if row[rhs] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        row[n + i] = 1.0;
    }
    // reduced costs of minimizing the artificial sum
    for j in 0..n {
        tab[m * cols + j] = -(0..m).map(|i| tab[i * cols + j]).sum::<f64>();
    }
    tab[m * cols + rhs] = -(0..m).map(|i| tab[i * cols + rhs]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m) + 1000;
    for _ in 0..max_pivots {
        let infeasibility: f64 = (0..m)
            .filter(|&i| basis[i] >= n)
            .map(|i| tab[i * cols + rhs])
            .sum();
        if infeasibility <= tol {
            return Ok(true);
        }
        let Some(enter) = (0..n + m).find(|&j| tab[m * cols + j] < -PIVOT_TOL) else {
            return Ok(false);
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = tab[i * cols + enter];
            if a > PIVOT_TOL {
                let ratio = tab[i * cols + rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best || (ratio == best && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(pr) = leave else {
            // phase 1 is bounded below by zero
            return Err(Error::FitFailed("unbounded phase-1 LP".into()));
        };
        pivot(&mut tab, cols, m, pr, enter);
        basis[pr] = enter;
    }
    Err(Error::FitFailed("simplex iteration limit reached".into()))
}

fn pivot(tab: &mut [f64], cols: usize, m: usize, pr: usize, pc: usize) {
    let p = tab[pr * cols + pc];
    for v in &mut tab[pr * cols..(pr + 1) * cols] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = tab[pr * cols..(pr + 1) * cols].to_vec();
    for i in 0..=m {
        if i == pr {
            continue;
        }
        let f = tab[i * cols + pc];
        if f == 0.0 {
            continue;
        }
        for (v, pv) in tab[i * cols..(i + 1) * cols].iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        tab[i * cols + pc] = 0.0;
    }
}
