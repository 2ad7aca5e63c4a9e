//! Window moments `q_j(w)`, the map `Q(δ; z)` and certification of `δ`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::nodes::NodeSelection;
use crate::function::PiecewiseComplexFunction;
use crate::mollifier::Mollifier;
use crate::phase::window_phase;
use crate::poly;
use crate::quadrature::{self, QuadEstimate, QuadratureConfig};
use crate::{Error, Result};

/// `(∫_{−1}^{1} f_k(t_j + s h) e^{iθ_{h,z}(s)} ds)_k` for a whole family.
pub fn window_moments(
    fs: &[PiecewiseComplexFunction],
    t_j: f64,
    h: f64,
    z: Complex64,
    cfg: &QuadratureConfig,
) -> Result<QuadEstimate> {
    if !(h > 0.0) || t_j - h < 0.0 || t_j + h > 1.0 {
        return Err(Error::domain(alloc::format!(
            "window [{}, {}] leaves [0, 1]",
            t_j - h,
            t_j + h
        )));
    }
    let theta = window_phase(z, h, Mollifier::shared())?;
    let mut cuts = theta.structural_points();
    for f in fs {
        cuts.extend(f.breakpoints().iter().map(|&b| (b - t_j) / h));
    }
    let panels = quadrature::panels_from_cuts(-1.0, 1.0, &cuts);
    quadrature::integrate_panels(
        fs.len(),
        |s, out| {
            let e = Complex64::from_polar(1.0, theta.eval(s));
            let t = t_j + s * h;
            for (o, f) in out.iter_mut().zip(fs) {
                *o = f.eval_unchecked(t) * e;
            }
        },
        &panels,
        cfg,
    )
}

/// `∫_{−1}^{1} f(t_j + s h) e^{iθ_{h,z}(s)} ds`.
pub fn window_moment(
    f: &PiecewiseComplexFunction,
    t_j: f64,
    h: f64,
    z: Complex64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    Ok(window_moments(core::slice::from_ref(f), t_j, h, z, cfg)?.values[0])
}

/// `Q(h; z)_k = Σ_j window_moment(f_k, t_j, h, z_j)`; `h = 0` gives `M z` exactly.
pub fn compute_q(
    fs: &[PiecewiseComplexFunction],
    nodes: &NodeSelection,
    h: f64,
    z: &[Complex64],
    cfg: &QuadratureConfig,
) -> Result<Vec<Complex64>> {
    if z.len() != nodes.len() || fs.len() != nodes.len() {
        return Err(Error::invalid(
            "Q needs one z component per node and function",
        ));
    }
    if h == 0.0 {
        return Ok((nodes.m() * nalgebra::DVector::from_column_slice(z))
            .iter()
            .copied()
            .collect());
    }
    let mut q = vec![Complex64::new(0.0, 0.0); fs.len()];
    for (&t_j, &z_j) in nodes.nodes().iter().zip(z) {
        let est = window_moments(fs, t_j, h, z_j, cfg)?;
        for (a, b) in q.iter_mut().zip(&est.values) {
            *a += b;
        }
    }
    Ok(q)
}

/// Certified window half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCertificate {
    pub delta: f64,
    /// Rigorous bounds on `sup_{w∈D} ‖M⁻¹(w·col_j M − q_j(w))‖_∞`.
    pub per_node_margins: Vec<f64>,
    /// The same suprema sampled on the polar grid (diagnostic, never above the bounds).
    pub sampled_margins: Vec<f64>,
    pub z_grid_resolution: usize,
    pub margin_threshold: f64,
    /// `Σ_j margin_j` for every `δ` tried, starting at `d`.
    pub margin_history: Vec<f64>,
}

impl DeltaCertificate {
    pub fn margin_sum(&self) -> f64 {
        self.per_node_margins.iter().sum()
    }
}

/// Upper bound on `∫_{−1}^{1} |f(t_j + sδ) − f(t_j)| ds` from the Taylor expansion of each
/// piece about `t_j`.
fn deviation_bound(f: &PiecewiseComplexFunction, t_j: f64, delta: f64) -> f64 {
    let f0 = f.eval_unchecked(t_j);
    let bp = f.breakpoints();
    let mut total = 0.0;
    for (i, piece) in f.pieces().iter().enumerate() {
        let lo = bp[i].max(t_j - delta);
        let hi = bp[i + 1].min(t_j + delta);
        if !(hi > lo) {
            continue;
        }
        let (a, b) = ((lo - t_j) / delta, (hi - t_j) / delta);
        let shifted = poly::taylor_shift(piece, t_j);
        let mut bound = (shifted[0] - f0).norm() * (b - a);
        let mut scale = 1.0;
        for (m, c) in shifted.iter().enumerate().skip(1) {
            scale *= delta;
            bound += c.norm() * scale * poly::abs_power_integral(m, a, b);
        }
        total += bound;
    }
    // Headroom for rounding in the shift and the sums.
    total * (1.0 + 1e-10) + 1e-15
}

/// `margin_j = max_i [δ_ij·(4 + 2πκ)δ + Σ_k |M⁻¹_ik| G_kj]`.
///
/// `M⁻¹ col_j = e_j`, so the node's own constant part contributes
/// `|∫ e^{iθ_{δ,w}} − w| ≤ 4δ + 2πκδ` (clamping changes `θ_w` on two intervals of length `δ`;
/// mollifying each jump `J` moves `∫|θ|` by at most `|J|κδ`) and only to row `j`.
fn analytic_margins(
    fs: &[PiecewiseComplexFunction],
    nodes: &NodeSelection,
    delta: f64,
) -> Vec<f64> {
    let kappa = Mollifier::shared().first_abs_moment();
    let own = (4.0 + 2.0 * PI * kappa) * delta;
    let minv = nodes.minv();
    let n = nodes.len();
    nodes
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &t_j)| {
            let g: Vec<f64> = fs.iter().map(|f| deviation_bound(f, t_j, delta)).collect();
            (0..n)
                .map(|i| {
                    let spill: f64 = (0..n).map(|k| minv[(i, k)].norm() * g[k]).sum();
                    spill + if i == j { own } else { 0.0 }
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `sup_w ‖M⁻¹(w·col_j M − q_j(w))‖_∞` over the polar grid, per node.
pub fn sampled_margins(
    fs: &[PiecewiseComplexFunction],
    nodes: &NodeSelection,
    delta: f64,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let m = nodes.m();
    let mut out = Vec::with_capacity(nodes.len());
    for (j, &t_j) in nodes.nodes().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for w in polar_grid(resolution) {
            let q = window_moments(fs, t_j, delta, w, cfg)?.values;
            let diff: Vec<Complex64> = (0..fs.len()).map(|k| w * m[(k, j)] - q[k]).collect();
            let v = nodes.apply_inverse(&diff);
            worst = worst.max(v.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
        out.push(worst);
    }
    Ok(out)
}

/// Radii `i/(N−1)` times `N` equally spaced angles; the origin once.
pub fn polar_grid(resolution: usize) -> Vec<Complex64> {
    let n = resolution.max(2);
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for i in 1..n {
        let r = i as f64 / (n - 1) as f64;
        for k in 0..n {
            pts.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64));
        }
    }
    pts
}

/// Tries `δ = d, d/2, d/4, …` until the margins sum to at most `threshold`.
pub fn find_delta(
    fs: &[PiecewiseComplexFunction],
    nodes: &NodeSelection,
    threshold: f64,
    min_ratio: f64,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<DeltaCertificate> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(Error::invalid("margin threshold must lie in (0, 1/2)"));
    }
    let d = nodes.d();
    let mut delta = d;
    let mut history = Vec::new();
    loop {
        let margins = analytic_margins(fs, nodes, delta);
        let sum: f64 = margins.iter().sum();
        history.push(sum);
        if sum <= threshold {
            let sampled = sampled_margins(fs, nodes, delta, resolution, cfg)?;
            return Ok(DeltaCertificate {
                delta,
                per_node_margins: margins,
                sampled_margins: sampled,
                z_grid_resolution: resolution,
                margin_threshold: threshold,
                margin_history: history,
            });
        }
        delta *= 0.5;
        if delta < min_ratio * d {
            return Err(Error::Certification {
                delta: delta * 2.0,
                margin_sum: sum,
            });
        }
    }
}
