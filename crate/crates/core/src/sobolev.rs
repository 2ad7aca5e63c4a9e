//! `W^{1,p}` norms of phases and the dyadic compression `Υ_n`.
//!
//! For `p > 1` no bound on `‖e^{iθ}‖_{W^{1,p}}` in terms of `‖f‖` can hold: if `θ`
//! annihilates `Υ_n f(t) = f(2ⁿt)·I_{[0,2^{−n}]}`, then `s ↦ θ(2^{−n}s)` annihilates `f`, and
//! `∫₀^{2^{−n}} |θ'|^p = 2^{n(p−1)} ∫₀¹ |(θ(2^{−n}·))'|^p`. Only upper bounds on the infimum
//! of `∫|θ'|^p` are computed here, from constructed annihilators.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::annihilator::{solve_annihilator, AnnihilatorOptions};
use crate::function::PiecewiseComplexFunction;
use crate::mask::IntervalMask;
use crate::phase::SmoothPhase;
use crate::quadrature::{integrate_family_against_phase, QuadratureConfig};
use crate::{Error, Result};

/// Slack allowed when comparing measured norms against the analytic bounds.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub p: f64,
    /// Number of functions the phase was built for.
    pub n: usize,
    /// `∫₀¹ |θ'|`.
    pub total_variation: f64,
    /// `(∫₀¹ |θ'|^p)^{1/p}`, also the `W^{1,p}` seminorm of `e^{iθ}`.
    pub seminorm_phase: f64,
    /// `‖e^{iθ}‖_{W^{1,p}} = (1 + ∫|θ'|^p)^{1/p}`.
    pub norm_exp_phase: f64,
    /// `‖e^{iθ}‖_{W^{1,1}} = 1 + ∫|θ'|`.
    pub norm_exp_phase_w11: f64,
    /// `‖θ‖_{W^{1,1}} = ∫|θ| + ∫|θ'|`.
    pub norm_phase: f64,
    pub max_abs_phase: f64,
    /// `5πn`
    pub bound_tv: f64,
    /// `5πn + 1`
    pub bound_5pin_plus_1: f64,
    /// `(7n + 1)π`
    pub bound_7n1_pi: f64,
    /// `(2n + 1)π`
    pub bound_max_abs: f64,
    pub tv_satisfied: bool,
    pub exp_norm_satisfied: bool,
    pub phase_norm_satisfied: bool,
    pub max_abs_satisfied: bool,
}

impl NormReport {
    pub fn all_satisfied(&self) -> bool {
        self.tv_satisfied
            && self.exp_norm_satisfied
            && self.phase_norm_satisfied
            && self.max_abs_satisfied
    }
}

/// Norms of `θ` and `e^{iθ}` on `[0, 1]` with the bounds for a family of `n` functions.
pub fn sobolev_report(
    theta: &SmoothPhase,
    p: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<NormReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(alloc::format!("p = {p} must be at least 1")));
    }
    let tv = theta.total_variation(0.0, 1.0, cfg)?;
    let power = if p == 1.0 {
        tv
    } else {
        theta.deriv_power_integral(0.0, 1.0, p, cfg)?
    };
    let seminorm = libm::pow(power, 1.0 / p);
    let norm_exp = libm::pow(1.0 + power, 1.0 / p);
    let norm_phase = theta.abs_integral(0.0, 1.0, cfg)? + tv;
    let max_abs = theta.max_abs(0.0, 1.0);
    let nf = n as f64;
    let bound_tv = 5.0 * PI * nf;
    let bound_5 = bound_tv + 1.0;
    let bound_7 = (7.0 * nf + 1.0) * PI;
    let bound_max = (2.0 * nf + 1.0) * PI;
    Ok(NormReport {
        p,
        n,
        total_variation: tv,
        seminorm_phase: seminorm,
        norm_exp_phase: norm_exp,
        norm_exp_phase_w11: 1.0 + tv,
        norm_phase,
        max_abs_phase: max_abs,
        bound_tv,
        bound_5pin_plus_1: bound_5,
        bound_7n1_pi: bound_7,
        bound_max_abs: bound_max,
        tv_satisfied: tv <= bound_tv + BOUND_SLACK,
        exp_norm_satisfied: 1.0 + tv <= bound_5 + BOUND_SLACK,
        phase_norm_satisfied: norm_phase <= bound_7 + BOUND_SLACK,
        max_abs_satisfied: max_abs <= bound_max + BOUND_SLACK,
    })
}

/// `Υ_n f`: `f(2ⁿt)` on `[0, 2^{−n}]`, zero after.
pub fn upsilon_scale(f: &PiecewiseComplexFunction, n: u32) -> Result<PiecewiseComplexFunction> {
    if n == 0 {
        return Err(Error::domain("the compression level must be at least 1"));
    }
    let s = libm::ldexp(1.0, n as i32);
    let mut breakpoints: Vec<f64> = f.breakpoints().iter().map(|b| b / s).collect();
    breakpoints.push(1.0);
    let mut pieces: Vec<Vec<Complex64>> = f
        .pieces()
        .iter()
        .map(|p| {
            let mut scale = 1.0;
            p.iter()
                .map(|&c| {
                    let v = c * scale;
                    scale *= s;
                    v
                })
                .collect()
        })
        .collect();
    pieces.push(alloc::vec![Complex64::new(0.0, 0.0)]);
    PiecewiseComplexFunction::new(breakpoints, pieces)
}

/// `s ↦ θ(2^{−n}s)`.
pub fn rescale_phase(theta: &SmoothPhase, n: u32) -> SmoothPhase {
    theta.affine_image(libm::ldexp(1.0, n as i32), 0.0)
}

/// Relative gap between `∫₀^{2^{−n}} |θ'|^p` and `2^{n(p−1)} ∫₀¹ |(θ(2^{−n}·))'|^p`.
pub fn scaling_identity_check(
    theta: &SmoothPhase,
    n: u32,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain("the scaling identity is stated for p > 1"));
    }
    let s = libm::ldexp(1.0, -(n as i32));
    let lhs = theta.deriv_power_integral(0.0, s, p, cfg)?;
    let rhs = libm::pow(2.0, n as f64 * (p - 1.0))
        * rescale_phase(theta, n).deriv_power_integral(0.0, 1.0, p, cfg)?;
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    })
}

/// `l·Υ_n f / ‖Υ_n f‖_{L¹}`.
pub fn blowup_instance(
    f: &PiecewiseComplexFunction,
    l: f64,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<PiecewiseComplexFunction> {
    if !(l > 0.0) {
        return Err(Error::domain("target norm must be positive"));
    }
    let g = upsilon_scale(f, n)?;
    let norm = g.l1_norm(cfg)?;
    if !(norm > 0.0) {
        return Err(Error::domain("the compressed function has zero L1 norm"));
    }
    Ok(g.scale(Complex64::new(l / norm, 0.0)))
}

/// Measurements at one compression level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMeasurement {
    /// `∫₀¹ |θ'|^p` of the constructed annihilator of `Υ_n f`: an upper bound on the infimum.
    pub seminorm_power: f64,
    pub identity_error: f64,
    /// `|∫₀¹ f e^{iθ(2^{−n}·)}|`, at most `2ⁿ` times the solver residual.
    pub membership_residual: f64,
    pub membership_bound: f64,
    pub solver_residual: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingLevel {
    pub n: u32,
    /// `2^{n(p−1)}`, the growth rate of the lower bound.
    pub theoretical_factor: f64,
    pub outcome: core::result::Result<LevelMeasurement, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub p: f64,
    pub levels: Vec<ScalingLevel>,
}

impl ScalingReport {
    pub fn n_levels(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.n).collect()
    }

    /// `∫|θ'|^p` per level; `None` where the level failed.
    pub fn seminorms(&self) -> Vec<Option<f64>> {
        self.levels
            .iter()
            .map(|l| l.outcome.as_ref().ok().map(|m| m.seminorm_power))
            .collect()
    }

    pub fn identity_errors(&self) -> Vec<Option<f64>> {
        self.levels
            .iter()
            .map(|l| l.outcome.as_ref().ok().map(|m| m.identity_error))
            .collect()
    }

    pub fn membership_residuals(&self) -> Vec<Option<f64>> {
        self.levels
            .iter()
            .map(|l| l.outcome.as_ref().ok().map(|m| m.membership_residual))
            .collect()
    }
}

/// Solves for `Υ_n f` and measures the scaling data at level `n`.
pub fn scaling_level(
    f: &PiecewiseComplexFunction,
    p: f64,
    n: u32,
    opts: &AnnihilatorOptions,
) -> ScalingLevel {
    let outcome = measure_level(f, p, n, opts);
    ScalingLevel {
        n,
        theoretical_factor: libm::pow(2.0, n as f64 * (p - 1.0)),
        outcome,
    }
}

fn measure_level(
    f: &PiecewiseComplexFunction,
    p: f64,
    n: u32,
    opts: &AnnihilatorOptions,
) -> Result<LevelMeasurement> {
    let cfg = &opts.quadrature;
    let g = upsilon_scale(f, n)?;
    let result = solve_annihilator(core::slice::from_ref(&g), opts)?;
    let theta = &result.theta;
    let seminorm_power = theta.deriv_power_integral(0.0, 1.0, p, cfg)?;
    let identity_error = scaling_identity_check(theta, n, p, cfg)?;
    let rescaled = rescale_phase(theta, n);
    let membership = integrate_family_against_phase(
        core::slice::from_ref(f),
        &rescaled,
        &IntervalMask::full(),
        cfg,
    )?;
    Ok(LevelMeasurement {
        seminorm_power,
        identity_error,
        membership_residual: membership.values[0].norm(),
        membership_bound: libm::ldexp(opts.tol, n as i32),
        solver_residual: result.max_residual(),
        delta: result.pipeline.as_ref().map_or(0.0, |pl| pl.delta().delta),
    })
}

/// Runs every level in order. Failures are recorded per level.
pub fn scaling_experiment(
    f: &PiecewiseComplexFunction,
    p: f64,
    levels: &[u32],
    opts: &AnnihilatorOptions,
) -> Result<ScalingReport> {
    if !(p > 1.0) {
        return Err(Error::domain("the scaling experiment needs p > 1"));
    }
    let mut out: Vec<ScalingLevel> = levels
        .iter()
        .map(|&n| scaling_level(f, p, n, opts))
        .collect();
    out.sort_by_key(|l| l.n);
    Ok(ScalingReport { p, levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::Mollifier;
    use crate::phase::MollifiedJump;
    use alloc::vec;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn upsilon_examples() {
        let one = PiecewiseComplexFunction::constant(c(1.0));
        let u = upsilon_scale(&one, 1).unwrap();
        assert_eq!(u.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(u.eval(0.25).unwrap(), c(1.0));
        assert_eq!(u.eval(0.75).unwrap(), c(0.0));
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        let u = upsilon_scale(&t, 2).unwrap();
        assert_eq!(u.eval(0.125).unwrap(), c(0.5));
        assert_eq!(u.eval(0.5).unwrap(), c(0.0));
        assert!(upsilon_scale(&t, 0).is_err());
    }

    #[test]
    fn blowup_example() {
        let cfg = QuadratureConfig::default();
        let g = blowup_instance(&PiecewiseComplexFunction::constant(c(1.0)), 1.0, 3, &cfg).unwrap();
        assert!((g.eval(0.1).unwrap() - c(8.0)).norm() < 1e-12);
        assert_eq!(g.eval(0.2).unwrap(), c(0.0));
    }

    #[test]
    fn constant_phase_report() {
        let cfg = QuadratureConfig::default();
        let r = sobolev_report(&SmoothPhase::constant(0.0), 1.0, 1, &cfg).unwrap();
        assert_eq!(r.norm_exp_phase, 1.0);
        assert!(r.all_satisfied());
        assert_eq!(
            scaling_identity_check(&SmoothPhase::constant(2.0), 3, 2.0, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn identity_on_random_like_phase() {
        let cfg = QuadratureConfig::default();
        let m = Mollifier::shared();
        let theta = SmoothPhase::new(
            0.3,
            vec![
                MollifiedJump {
                    center: 0.001,
                    width: 0.0005,
                    jump: 2.0,
                },
                MollifiedJump {
                    center: 0.0017,
                    width: 0.0002,
                    jump: -1.0,
                },
                MollifiedJump {
                    center: 0.3,
                    width: 0.1,
                    jump: 4.0,
                },
            ],
            m,
        )
        .unwrap();
        for n in 1..=8 {
            for p in [1.5, 2.0, 3.0] {
                assert!(scaling_identity_check(&theta, n, p, &cfg).unwrap() <= 1e-6);
            }
        }
    }
}
