//! Adaptive 7/15-point Gauss–Kronrod quadrature on caller-aligned panels.
//!
//! Every integrand in this crate is piecewise smooth with known break locations
//! (polynomial breakpoints, mask endpoints, mollifier supports). Callers hand those
//! locations in as initial panel boundaries; the integrator then bisects the panel with
//! the worst `|K15 − G7|` until the summed estimate meets the tolerance.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::function::PiecewiseComplexFunction;
use crate::mask::IntervalMask;
use crate::phase::SmoothPhase;
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub(crate) const GK15_NODES: [f64; 8] = XGK;
pub(crate) const GK15_WEIGHTS: [f64; 8] = WGK;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the summed error estimate.
    pub abs_tol: f64,
    /// Relative tolerance; the goal is `max(abs_tol, rel_tol · |I|)`.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 50_000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = QuadratureConfig {
            abs_tol,
            max_subdivisions,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol >= 0.0) || self.max_subdivisions == 0 {
            return Err(Error::invalid(
                "quadrature needs abs_tol > 0, rel_tol >= 0 and a positive subdivision budget",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadEstimate {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub subdivisions: usize,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<Complex64>,
    error: f64,
}

#[derive(PartialEq)]
struct Worst(f64, usize);

impl Eq for Worst {}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        // Larger error first; lower index breaks ties so the run is deterministic.
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn gk15<F>(
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    scratch: &mut [Complex64],
) -> (Vec<Complex64>, f64)
where
    F: FnMut(f64, &mut [Complex64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = vec![Complex64::new(0.0, 0.0); dim];
    let mut abs_sum = 0.0;

    f(center, scratch);
    for k in 0..dim {
        kron[k] += scratch[k] * WGK[7];
        gauss[k] += scratch[k] * WG[3];
        abs_sum += WGK[7] * scratch[k].norm();
    }
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        for t in [center - dx, center + dx] {
            f(t, scratch);
            for k in 0..dim {
                kron[k] += scratch[k] * WGK[j];
                abs_sum += WGK[j] * scratch[k].norm();
                if j % 2 == 1 {
                    gauss[k] += scratch[k] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for k in 0..dim {
        kron[k] *= half;
        gauss[k] *= half;
        err = err.max((kron[k] - gauss[k]).norm());
    }
    // Roundoff floor: the estimate cannot resolve below a few ulps of Σ|f|.
    let floor = 50.0 * f64::EPSILON * abs_sum * half.abs();
    (kron, err.max(floor))
}

/// Integrates a `dim`-valued integrand over a list of panels.
///
/// Panels must be non-overlapping; their boundaries should sit on every location where
/// the integrand is not smooth.
pub fn integrate_panels<F>(
    dim: usize,
    mut f: F,
    panels: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<QuadEstimate>
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let mut store: Vec<Panel> = Vec::with_capacity(panels.len() * 2);
    let mut heap = BinaryHeap::new();
    for &(a, b) in panels {
        if b <= a {
            continue;
        }
        let (values, error) = gk15(&mut f, a, b, dim, &mut scratch);
        heap.push(Worst(error, store.len()));
        store.push(Panel {
            a,
            b,
            values,
            error,
        });
    }

    let mut subdivisions = 0;
    loop {
        let (total, err) = totals(&store, dim);
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let goal = cfg.abs_tol.max(cfg.rel_tol * scale);
        if err <= goal {
            return Ok(QuadEstimate {
                values: total,
                error: err,
                subdivisions,
            });
        }
        let worst = loop {
            match heap.pop() {
                Some(Worst(_, idx)) if store[idx].error >= 0.0 => break Some(idx),
                Some(_) => continue,
                None => break None,
            }
        };
        let idx = match worst {
            Some(idx) if subdivisions < cfg.max_subdivisions => idx,
            _ => {
                return Err(Error::Convergence {
                    estimate: total,
                    error_bound: err,
                    subdivisions,
                })
            }
        };
        let (a, b) = (store[idx].a, store[idx].b);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            // Panel at floating-point resolution; leave it in the total but stop splitting.
            store[idx].error = -store[idx].error - f64::MIN_POSITIVE;
            continue;
        }
        let (left, el) = gk15(&mut f, a, mid, dim, &mut scratch);
        let (right, er) = gk15(&mut f, mid, b, dim, &mut scratch);
        store[idx] = Panel {
            a,
            b: mid,
            values: left,
            error: el,
        };
        heap.push(Worst(el, idx));
        heap.push(Worst(er, store.len()));
        store.push(Panel {
            a: mid,
            b,
            values: right,
            error: er,
        });
        subdivisions += 1;
    }
}

fn totals(store: &[Panel], dim: usize) -> (Vec<Complex64>, f64) {
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut err = 0.0;
    for p in store {
        for (t, v) in total.iter_mut().zip(&p.values) {
            *t += v;
        }
        err += p.error.abs();
    }
    (total, err)
}

/// Splits `[a, b]` at every cut strictly inside it.
pub(crate) fn panels_from_cuts(a: f64, b: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > a && c < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

pub fn integrate_real<F>(
    mut f: F,
    panels: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let est = integrate_panels(1, |t, out| out[0] = Complex64::new(f(t), 0.0), panels, cfg)?;
    Ok((est.values[0].re, est.error))
}

/// `∫_{mask} f(t) e^{iθ(t)} dt`.
pub fn integrate_against_phase(
    f: &PiecewiseComplexFunction,
    theta: &SmoothPhase,
    mask: &IntervalMask,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let est = integrate_family_against_phase(core::slice::from_ref(f), theta, mask, cfg)?;
    Ok(est.values[0])
}

/// `(∫_{mask} f_k(t) e^{iθ(t)} dt)_k`, sharing phase evaluations across the family.
pub fn integrate_family_against_phase(
    fs: &[PiecewiseComplexFunction],
    theta: &SmoothPhase,
    mask: &IntervalMask,
    cfg: &QuadratureConfig,
) -> Result<QuadEstimate> {
    let mut cuts = theta.structural_points();
    for f in fs {
        cuts.extend_from_slice(f.breakpoints());
    }
    let mut panels = Vec::new();
    for &(lo, hi) in mask.intervals() {
        panels.extend(panels_from_cuts(lo, hi, &cuts));
    }
    integrate_panels(
        fs.len(),
        |t, out| {
            let e = Complex64::from_polar(1.0, theta.eval(t));
            for (o, f) in out.iter_mut().zip(fs) {
                *o = f.eval_unchecked(t) * e;
            }
        },
        &panels,
        cfg,
    )
}
