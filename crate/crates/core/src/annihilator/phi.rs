//! The smoothed Hobby–Rice phase `φ` living off the windows.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::nodes::NodeSelection;
use crate::function::{independent_subset, PiecewiseComplexFunction};
use crate::hobby_rice::{
    count_masked_discontinuities, select_phi_sharp, solve_hobby_rice, HobbyRiceOptions, SignPattern,
};
use crate::mask::IntervalMask;
use crate::mollifier::Mollifier;
use crate::phase::{mollify, SmoothPhase, StepPhase};
use crate::quadrature::{integrate_family_against_phase, QuadratureConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PhiConstruction {
    pub eta: f64,
    pub phi: SmoothPhase,
    /// `r_k = ∫_{L_δ} f_k e^{iφ}`.
    pub r: Vec<Complex64>,
    /// `max_j |(M⁻¹r)_j|`, at most `δ/2`.
    pub scaled_offset: f64,
    pub phi_sharp: StepPhase,
    pub sign_pattern: SignPattern,
    /// Real functions handed to the Hobby–Rice solver after dropping zero and dependent parts.
    pub hobby_rice_functions: usize,
    /// Discontinuities of `φ#·I_{L_δ}`.
    pub masked_discontinuities: usize,
    pub eta_halvings: usize,
}

/// `φ#·I_{L_{δ+η}}` as a step on the line: each mask component loses `η` on every side that
/// faces a window; beyond `[0, 1]` the end values continue.
fn masked_step(phi_sharp: &StepPhase, mask: &IntervalMask, eta: f64) -> StepPhase {
    let comps = mask.intervals();
    let base = match comps.first() {
        Some(&(0.0, _)) => phi_sharp.value(0.0),
        _ => 0.0,
    };
    let mut points = Vec::new();
    for &(a, b) in comps {
        let lo = if a > 0.0 { a + eta } else { a };
        let hi = if b < 1.0 { b - eta } else { b };
        if !(hi > lo) {
            continue;
        }
        if a > 0.0 {
            points.push((lo, phi_sharp.value(lo)));
        }
        for &l in phi_sharp.jump_locations() {
            if l > lo && l < hi {
                points.push((l, phi_sharp.value(l)));
            }
        }
        if b < 1.0 {
            points.push((hi, 0.0));
        }
    }
    StepPhase::from_values(base, points, (0.0, 1.0))
}

/// Largest admissible `η`: at most `δ/2`, a quarter of each mask component, and half the
/// distance from any jump of `φ#` inside the mask to the nearest window edge, so shrinking
/// the mask by `η` never swallows a jump.
fn eta_cap(phi_sharp: &StepPhase, mask: &IntervalMask, delta: f64) -> f64 {
    let mut cap = delta / 2.0;
    for &(a, b) in mask.intervals() {
        cap = cap.min((b - a) / 4.0);
        for &l in phi_sharp.jump_locations() {
            if a > 0.0 && l > a && l < b {
                cap = cap.min((l - a) / 2.0);
            }
            if b < 1.0 && l > a && l < b {
                cap = cap.min((b - l) / 2.0);
            }
        }
    }
    cap
}

/// Builds `φ = ψ_η ∗ (φ#·I_{L_{δ+η}})`, halving `η` from its cap until `‖M⁻¹r‖_∞ ≤ δ/2`.
pub fn build_phi(
    fs: &[PiecewiseComplexFunction],
    nodes: &NodeSelection,
    delta: f64,
    hr: &HobbyRiceOptions,
    gram_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<PhiConstruction> {
    let mask = IntervalMask::complement_of_windows(nodes.nodes(), delta)?;
    let mut parts = Vec::with_capacity(2 * fs.len());
    for f in fs {
        let g = f.restrict(&mask);
        for part in [g.real_part(), g.imag_part()] {
            if !part.is_zero() {
                parts.push(part);
            }
        }
    }
    let keep = independent_subset(&parts, gram_tol);
    let gs: Vec<PiecewiseComplexFunction> = keep.into_iter().map(|i| parts[i].clone()).collect();
    let pattern = if gs.is_empty() {
        SignPattern::new(Vec::new(), 1)?
    } else {
        solve_hobby_rice(&gs, &mask, hr)?
    };

    let boundary: Vec<f64> = nodes
        .nodes()
        .iter()
        .flat_map(|&t| [t - delta, t + delta])
        .collect();
    let phi_sharp = select_phi_sharp(&pattern, &boundary);
    let masked_discontinuities = count_masked_discontinuities(&phi_sharp, &mask);

    let mut eta = eta_cap(&phi_sharp, &mask, delta);
    let floor = 1e-12 * delta;
    let mut halvings = 0;
    loop {
        if !(eta > floor) {
            return Err(Error::Construction(alloc::format!(
                "no smoothing width above {floor:e} keeps the off-window offset below δ/2"
            )));
        }
        let step = masked_step(&phi_sharp, &mask, eta);
        let phi = mollify(&step, eta, Mollifier::shared())?;
        let r = integrate_family_against_phase(fs, &phi, &mask, cfg)?.values;
        let scaled_offset = nodes
            .apply_inverse(&r)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if scaled_offset <= delta / 2.0 {
            return Ok(PhiConstruction {
                eta,
                phi,
                r,
                scaled_offset,
                phi_sharp,
                sign_pattern: pattern,
                hobby_rice_functions: gs.len(),
                masked_discontinuities,
                eta_halvings: halvings,
            });
        }
        eta *= 0.5;
        halvings += 1;
    }
}

/// `∫|φ'|` can be at most `π` per discontinuity of the masked step.
pub fn phi_variation_bound(c: &PhiConstruction) -> f64 {
    PI * c.masked_discontinuities as f64
}
