//! Step phases and their closed-form mollifications.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::mollifier::Mollifier;
use crate::quadrature::{self, QuadratureConfig};
use crate::{Error, Result};

/// A right-continuous step function `base + Σ_{loc_i ≤ t} jump_i` on a closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPhase {
    locations: Vec<f64>,
    jumps: Vec<f64>,
    base: f64,
    domain: (f64, f64),
}

impl StepPhase {
    pub fn new(
        locations: Vec<f64>,
        jumps: Vec<f64>,
        base: f64,
        domain: (f64, f64),
    ) -> Result<Self> {
        if locations.len() != jumps.len() {
            return Err(Error::invalid("one jump size per location"));
        }
        if !(domain.0 < domain.1) {
            return Err(Error::invalid("empty step-phase domain"));
        }
        if locations.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("jump locations must be strictly increasing"));
        }
        if locations.iter().any(|&l| l < domain.0 || l > domain.1) {
            return Err(Error::invalid("jump location outside the domain"));
        }
        if jumps.iter().any(|&j| j == 0.0 || !j.is_finite()) || !base.is_finite() {
            return Err(Error::invalid("jumps must be finite and nonzero"));
        }
        Ok(StepPhase {
            locations,
            jumps,
            base,
            domain,
        })
    }

    /// Builds a step phase from the values it takes to the right of each location.
    ///
    /// Locations need not be distinct; equal locations are merged and zero jumps dropped.
    pub fn from_values(base: f64, mut points: Vec<(f64, f64)>, domain: (f64, f64)) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locations = Vec::with_capacity(points.len());
        let mut jumps = Vec::with_capacity(points.len());
        let mut prev = base;
        let mut i = 0;
        while i < points.len() {
            let loc = points[i].0;
            // The last value recorded at a location wins.
            let mut value = points[i].1;
            while i + 1 < points.len() && points[i + 1].0 == loc {
                i += 1;
                value = points[i].1;
            }
            if value != prev {
                locations.push(loc);
                jumps.push(value - prev);
                prev = value;
            }
            i += 1;
        }
        StepPhase {
            locations,
            jumps,
            base,
            domain,
        }
    }

    pub fn constant(value: f64, domain: (f64, f64)) -> Self {
        StepPhase {
            locations: Vec::new(),
            jumps: Vec::new(),
            base: value,
            domain,
        }
    }

    pub fn jump_locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jumps
    }

    pub fn base_value(&self) -> f64 {
        self.base
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = self.locations.partition_point(|&l| l <= t);
        self.base + self.jumps[..k].iter().sum::<f64>()
    }

    /// Left limit `lim_{s↑t}` of the step.
    pub fn value_left(&self, t: f64) -> f64 {
        let k = self.locations.partition_point(|&l| l < t);
        self.base + self.jumps[..k].iter().sum::<f64>()
    }

    /// Constant pieces `(a, b, value)` covering the domain.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.locations.len() + 1);
        let mut left = self.domain.0;
        let mut value = self.base;
        for (&loc, &jump) in self.locations.iter().zip(&self.jumps) {
            if loc > left {
                out.push((left, loc, value));
            }
            left = loc;
            value += jump;
        }
        if self.domain.1 > left {
            out.push((left, self.domain.1, value));
        }
        out
    }

    pub fn total_jump_variation(&self) -> f64 {
        self.jumps.iter().map(|j| j.abs()).sum()
    }

    /// `π − s`, the flip that keeps a `{0, π}` phase annihilating.
    pub fn flipped_about_half_pi(&self) -> Self {
        StepPhase {
            locations: self.locations.clone(),
            jumps: self.jumps.iter().map(|j| -j).collect(),
            base: PI - self.base,
            domain: self.domain,
        }
    }
}

/// The staircase `θ_z` on `[−1, 1]` with `∫_{−1}^{1} e^{iθ_z} = z`.
///
/// It takes the values `0, π/2, π, 3π/2` on consecutive intervals of lengths
/// `(1+u)/2, (1+v)/2, (1−u)/2, (1−v)/2` for `z = u + iv`. Empty intervals are omitted.
pub fn build_step_phase(z: Complex64) -> Result<StepPhase> {
    if !(z.norm() <= 1.0) {
        return Err(Error::domain(alloc::format!(
            "|z| = {} exceeds 1",
            z.norm()
        )));
    }
    let lengths = [
        (1.0 + z.re) / 2.0,
        (1.0 + z.im) / 2.0,
        (1.0 - z.re) / 2.0,
        (1.0 - z.im) / 2.0,
    ];
    let mut points = Vec::with_capacity(4);
    let mut left = -1.0;
    for (k, &len) in lengths.iter().enumerate() {
        if len > 0.0 {
            points.push((left, k as f64 * FRAC_PI_2));
            left += len;
        }
    }
    // Rounding can leave the last boundary a hair away from 1; the domain end is exact.
    points.retain(|&(loc, _)| loc < 1.0);
    let mut s = StepPhase::from_values(0.0, points, (-1.0, 1.0));
    if let Some(first) = s.locations.first_mut() {
        if *first < -1.0 {
            *first = -1.0;
        }
    }
    Ok(s)
}

/// Exact `∫ e^{is(t)} dt` over the domain of `s`.
pub fn step_integral_exp(s: &StepPhase) -> Complex64 {
    s.segments()
        .into_iter()
        .map(|(a, b, v)| Complex64::from_polar(b - a, v))
        .sum()
}

/// `θ#_{h,z} = θ_z·I_{(h−1, 1−h)} + 2π·I_{[1−h, ∞)}` restricted to `[−1, 1]`.
pub fn clamp_step(s: &StepPhase, h: f64) -> Result<StepPhase> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain(alloc::format!(
            "clamp width h = {h} must lie in (0, 1)"
        )));
    }
    let (lo, hi) = (h - 1.0, 1.0 - h);
    let mut points = Vec::with_capacity(s.locations.len() + 2);
    points.push((lo, s.value(lo)));
    for &loc in &s.locations {
        if loc > lo && loc < hi {
            points.push((loc, s.value(loc)));
        }
    }
    points.push((hi, 2.0 * PI));
    Ok(StepPhase::from_values(0.0, points, (-1.0, 1.0)))
}

/// `ψ_h ∗ s` in closed form: one `jump·Ψ((t − loc)/h)` term per jump.
pub fn mollify(s: &StepPhase, h: f64, m: Arc<Mollifier>) -> Result<SmoothPhase> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(alloc::format!(
            "mollifier width h = {h} must be positive"
        )));
    }
    let terms = s
        .locations
        .iter()
        .zip(&s.jumps)
        .map(|(&center, &jump)| MollifiedJump {
            center,
            width: h,
            jump,
        })
        .collect();
    SmoothPhase::new(s.base, terms, m)
}

/// `θ_{h,z} = ψ_h ∗ θ#_{h,z}` on `[−1, 1]`.
pub fn window_phase(z: Complex64, h: f64, m: Arc<Mollifier>) -> Result<SmoothPhase> {
    mollify(&clamp_step(&build_step_phase(z)?, h)?, h, m)
}

/// One smoothed jump `jump·Ψ((t − center)/width)`, supported in `[center − width, center + width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedJump {
    pub center: f64,
    pub width: f64,
    pub jump: f64,
}

impl MollifiedJump {
    #[inline]
    fn value(&self, m: &Mollifier, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        if x >= 1.0 {
            self.jump
        } else if x <= -1.0 {
            0.0
        } else {
            self.jump * m.cdf(x)
        }
    }

    #[inline]
    fn deriv(&self, m: &Mollifier, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            self.jump * m.density(x) / self.width
        }
    }
}

/// `base + Σ jump_i·Ψ((t − center_i)/width_i)`: a smooth phase built from mollified steps.
#[derive(Debug, Clone)]
pub struct SmoothPhase {
    terms: Vec<MollifiedJump>,
    base: f64,
    mollifier: Arc<Mollifier>,
}

impl PartialEq for SmoothPhase {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.terms == other.terms
    }
}

impl SmoothPhase {
    pub fn new(
        base: f64,
        mut terms: Vec<MollifiedJump>,
        mollifier: Arc<Mollifier>,
    ) -> Result<Self> {
        if !base.is_finite() {
            return Err(Error::invalid("phase base value must be finite"));
        }
        for t in &terms {
            if !(t.width > 0.0 && t.width.is_finite() && t.center.is_finite() && t.jump.is_finite())
            {
                return Err(Error::invalid(
                    "mollified jumps need finite centers, jumps and positive widths",
                ));
            }
        }
        terms.sort_by(|a, b| a.center.total_cmp(&b.center));
        Ok(SmoothPhase {
            terms,
            base,
            mollifier,
        })
    }

    pub fn constant(value: f64) -> Self {
        SmoothPhase {
            terms: Vec::new(),
            base: value,
            mollifier: Mollifier::shared(),
        }
    }

    pub fn terms(&self) -> &[MollifiedJump] {
        &self.terms
    }

    pub fn base_value(&self) -> f64 {
        self.base
    }

    pub fn mollifier(&self) -> &Arc<Mollifier> {
        &self.mollifier
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let m = &*self.mollifier;
        self.base + self.terms.iter().map(|term| term.value(m, t)).sum::<f64>()
    }

    #[inline]
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let m = &*self.mollifier;
        self.terms.iter().map(|term| term.deriv(m, t)).sum()
    }

    /// Support edges and centers of every term; quadrature panels are split here.
    pub fn structural_points(&self) -> Vec<f64> {
        self.terms
            .iter()
            .flat_map(|t| [t.center - t.width, t.center, t.center + t.width])
            .collect()
    }

    /// `t ↦ θ((t − offset)/scale)`.
    pub fn affine_image(&self, scale: f64, offset: f64) -> Self {
        SmoothPhase {
            terms: self
                .terms
                .iter()
                .map(|t| MollifiedJump {
                    center: offset + scale * t.center,
                    width: scale * t.width,
                    jump: t.jump,
                })
                .collect(),
            base: self.base,
            mollifier: self.mollifier.clone(),
        }
    }

    /// Pointwise sum of two phases.
    pub fn sum(&self, other: &SmoothPhase) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        terms.sort_by(|a, b| a.center.total_cmp(&b.center));
        SmoothPhase {
            terms,
            base: self.base + other.base,
            mollifier: self.mollifier.clone(),
        }
    }

    fn panels(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        quadrature::panels_from_cuts(a, b, &self.structural_points())
    }

    /// `∫_a^b |θ'|`. When every jump acting on `[a, b]` has one sign the phase is monotone
    /// there and the result is the exact net change.
    pub fn total_variation(&self, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if a > b {
            return Err(Error::domain("total variation needs a <= b"));
        }
        let mut pos = false;
        let mut neg = false;
        for t in &self.terms {
            if t.center - t.width < b && t.center + t.width > a {
                pos |= t.jump > 0.0;
                neg |= t.jump < 0.0;
            }
        }
        if !(pos && neg) {
            return Ok((self.eval(b) - self.eval(a)).abs());
        }
        Ok(quadrature::integrate_real(|t| self.eval_deriv(t).abs(), &self.panels(a, b), cfg)?.0)
    }

    /// `∫_a^b |θ'|^p`.
    pub fn deriv_power_integral(
        &self,
        a: f64,
        b: f64,
        p: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        if a > b {
            return Err(Error::domain("integration bounds need a <= b"));
        }
        Ok(quadrature::integrate_real(
            |t| libm::pow(self.eval_deriv(t).abs(), p),
            &self.panels(a, b),
            cfg,
        )?
        .0)
    }

    /// `∫_a^b |θ|`.
    pub fn abs_integral(&self, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(quadrature::integrate_real(|t| self.eval(t).abs(), &self.panels(a, b), cfg)?.0)
    }

    /// `max_{[a,b]} |θ|`, sampled at every structural point and on a uniform grid.
    pub fn max_abs(&self, a: f64, b: f64) -> f64 {
        let mut best = self.eval(a).abs().max(self.eval(b).abs());
        for p in self.structural_points() {
            if p > a && p < b {
                best = best.max(self.eval(p).abs());
            }
        }
        for i in 1..1024 {
            best = best.max(self.eval(a + (b - a) * i as f64 / 1024.0).abs());
        }
        best
    }
}

/// `∫_a^b |θ'|` (see [`SmoothPhase::total_variation`]).
pub fn phase_total_variation(
    theta: &SmoothPhase,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    theta.total_variation(a, b, cfg)
}
