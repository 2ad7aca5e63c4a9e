//! Interpolation nodes with an invertible sample matrix.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::function::{merge_breakpoints, PiecewiseComplexFunction};
use crate::linalg;
use crate::{Error, Result};

/// Pivots below this fraction of the largest sample of the incoming function count as zero.
const PIVOT_TOL: f64 = 1e-9;

/// Nodes `t_1 < … < t_n` with `M[k][j] = f_k(t_j)` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSelection {
    nodes: Vec<f64>,
    matrix: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
    d: f64,
    pivots: Vec<f64>,
}

impl NodeSelection {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `M` as rows (`k` indexes functions, `j` nodes).
    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        linalg::to_rows(&self.matrix)
    }

    pub fn inverse(&self) -> Vec<Vec<Complex64>> {
        linalg::to_rows(&self.inverse)
    }

    /// Half the smallest gap in `0, t_1, …, t_n, 1`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Moduli of the greedy pivots, in the order nodes were chosen.
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// `‖M‖_∞ ‖M⁻¹‖_∞`.
    pub fn condition_estimate(&self) -> f64 {
        linalg::inf_norm(&self.matrix) * linalg::inf_norm(&self.inverse)
    }

    pub fn determinant(&self) -> Complex64 {
        self.matrix.determinant()
    }

    pub(crate) fn m(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub(crate) fn minv(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    /// `M⁻¹ v`.
    pub fn apply_inverse(&self, v: &[Complex64]) -> Vec<Complex64> {
        linalg::matvec(&self.inverse, v)
    }
}

/// `per_piece` equally spaced interior points `(k + ½)/per_piece` in every piece of the
/// merged breakpoint partition. No candidate lands on a breakpoint.
pub fn default_candidate_grid(fs: &[PiecewiseComplexFunction], per_piece: usize) -> Vec<f64> {
    let refs: Vec<&PiecewiseComplexFunction> = fs.iter().collect();
    let cuts = merge_breakpoints(&refs);
    let mut grid = Vec::with_capacity((cuts.len() - 1) * per_piece);
    for w in cuts.windows(2) {
        for k in 0..per_piece {
            grid.push(w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / per_piece as f64);
        }
    }
    grid
}

/// Greedy node placement: node `r + 1` maximizes the Schur complement
/// `y(t) = f_{r+1}(t) − w·M′⁻¹·v(t)` of the bordered sample matrix, so
/// `det M = y_1 ⋯ y_n ≠ 0`. Ties go to the smallest candidate. Nodes are returned sorted.
pub fn select_nodes(
    fs: &[PiecewiseComplexFunction],
    candidate_grid: &[f64],
) -> Result<NodeSelection> {
    if fs.is_empty() {
        return Err(Error::invalid("node selection needs at least one function"));
    }
    let mut grid: Vec<f64> = candidate_grid
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < 1.0 && fs.iter().all(|f| !f.breakpoints().contains(&t)))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // samples[k][c] = f_k(grid[c])
    let samples: Vec<Vec<Complex64>> = fs
        .iter()
        .map(|f| grid.iter().map(|&t| f.eval_unchecked(t)).collect())
        .collect();

    let n = fs.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);
    for r in 0..n {
        let sub = DMatrix::from_fn(r, r, |k, j| samples[k][chosen[j]]);
        let sub_inv = if r == 0 { sub } else { linalg::inverse(&sub)? };
        // w·M′⁻¹ with w_j = f_{r+1}(t_j)
        let wm: Vec<Complex64> = (0..r)
            .map(|k| {
                (0..r)
                    .map(|j| samples[r][chosen[j]] * sub_inv[(j, k)])
                    .sum()
            })
            .collect();
        let scale = samples[r].iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut best: Option<(usize, f64)> = None;
        for c in 0..grid.len() {
            if chosen.contains(&c) {
                continue;
            }
            let mut y = samples[r][c];
            for k in 0..r {
                y -= wm[k] * samples[k][c];
            }
            let a = y.norm();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((c, a));
            }
        }
        match best {
            Some((c, a)) if a > PIVOT_TOL * scale && a > 0.0 => {
                chosen.push(c);
                pivots.push(a);
            }
            other => {
                return Err(Error::NearDependence {
                    node: r,
                    pivot: other.map_or(0.0, |(_, a)| a),
                })
            }
        }
    }

    let mut nodes: Vec<f64> = chosen.iter().map(|&c| grid[c]).collect();
    nodes.sort_by(f64::total_cmp);
    let matrix = DMatrix::from_fn(n, n, |k, j| fs[k].eval_unchecked(nodes[j]));
    let inverse = linalg::inverse(&matrix)?;
    let mut d = f64::INFINITY;
    let mut prev = 0.0;
    for &t in nodes.iter().chain(core::iter::once(&1.0)) {
        d = d.min((t - prev) / 2.0);
        prev = t;
    }
    Ok(NodeSelection {
        nodes,
        matrix,
        inverse,
        d,
        pivots,
    })
}
