//! Sign functions with few switches that annihilate finitely many real functions.
//!
//! For real `g_1, …, g_m` there is `Φ: [0,1] → {−1, 1}` with at most `m` switches and
//! `∫ g_k Φ = 0` for all `k`. The solver searches the sphere `S^m`: a point `x` splits
//! `[0,1]` into consecutive intervals of lengths `x_i²` carrying the signs of `x_i`. The
//! moment map is odd in `x`, so Borsuk–Ulam guarantees a zero; damped Gauss–Newton
//! from many seeds finds one.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::function::PiecewiseComplexFunction;
use crate::linalg;
use crate::mask::IntervalMask;
use crate::phase::StepPhase;
use crate::poly;
use crate::rng::Rng;
use crate::{Error, Result};

/// `Φ(t) = leading_sign · (−1)^{#switches ≤ t}`, right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern {
    switch_points: Vec<f64>,
    leading_sign: i8,
}

impl SignPattern {
    pub fn new(switch_points: Vec<f64>, leading_sign: i8) -> Result<Self> {
        if leading_sign != 1 && leading_sign != -1 {
            return Err(Error::invalid("leading sign must be +1 or -1"));
        }
        if switch_points.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
            return Err(Error::invalid("switch points must lie in (0, 1)"));
        }
        if switch_points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("switch points must be strictly increasing"));
        }
        Ok(SignPattern {
            switch_points,
            leading_sign,
        })
    }

    pub fn switch_points(&self) -> &[f64] {
        &self.switch_points
    }

    pub fn leading_sign(&self) -> i8 {
        self.leading_sign
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = self.switch_points.partition_point(|&s| s <= t);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.leading_sign as f64
    }

    pub fn negated(&self) -> Self {
        SignPattern {
            switch_points: self.switch_points.clone(),
            leading_sign: -self.leading_sign,
        }
    }

    /// `φ# = (π/2)(1 − Φ)` on `[0, 1]`.
    pub fn to_phase(&self) -> StepPhase {
        let value = |sign: f64| if sign > 0.0 { 0.0 } else { PI };
        let points = self
            .switch_points
            .iter()
            .map(|&s| (s, value(self.value(s))))
            .collect();
        StepPhase::from_values(value(self.leading_sign as f64), points, (0.0, 1.0))
    }

    /// Signed intervals `(a, b, ±1)` covering `[0, 1]`.
    fn intervals(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.switch_points.len() + 1);
        let mut left = 0.0;
        let mut sign = self.leading_sign as f64;
        for &s in &self.switch_points {
            out.push((left, s, sign));
            left = s;
            sign = -sign;
        }
        out.push((left, 1.0, sign));
        out
    }
}

/// A point of the unit sphere in `R^{m+1}` read as a signed partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCoordinates {
    x: Vec<f64>,
}

impl SphereCoordinates {
    /// Normalizes `x`; fails on the zero vector.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(
                "sphere coordinates need a finite nonzero vector",
            ));
        }
        Ok(SphereCoordinates {
            x: x.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    /// Interval boundaries `0 = b_0 ≤ b_1 ≤ … ≤ b_{m+1} = 1`.
    fn boundaries(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.x.len() + 1);
        let mut acc = 0.0;
        b.push(0.0);
        for v in &self.x[..self.x.len() - 1] {
            acc += v * v;
            b.push(acc.min(1.0));
        }
        b.push(1.0);
        b
    }

    fn signs(&self) -> Vec<f64> {
        self.x
            .iter()
            .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }

    /// The induced sign pattern with empty intervals removed and equal-sign neighbours merged.
    pub fn to_pattern(&self) -> SignPattern {
        pattern_from(&self.boundaries(), &self.signs())
    }
}

/// `+, −, +, …` for `len` intervals.
fn alternating(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

fn pattern_from(b: &[f64], s: &[f64]) -> SignPattern {
    let mut leading = None;
    let mut current = 0.0;
    let mut switches = Vec::new();
    for i in 0..s.len() {
        if !(b[i + 1] > b[i]) {
            continue;
        }
        match leading {
            None => {
                leading = Some(s[i]);
                current = s[i];
            }
            Some(_) if s[i] != current => {
                if b[i] > 0.0 && b[i] < 1.0 {
                    switches.push(b[i]);
                }
                current = s[i];
            }
            Some(_) => {}
        }
    }
    SignPattern {
        switch_points: switches,
        leading_sign: if leading.unwrap_or(1.0) > 0.0 { 1 } else { -1 },
    }
}

/// Solver settings for [`solve_hobby_rice`].
#[derive(Debug, Clone, PartialEq)]
pub struct HobbyRiceOptions {
    pub tol: f64,
    pub seeds: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for HobbyRiceOptions {
    fn default() -> Self {
        HobbyRiceOptions {
            tol: 1e-10,
            seeds: 64,
            max_iterations: 200,
            seed: 0x5eed,
        }
    }
}

/// `G(t) = ∫_0^t g·I_mask` for a real piecewise polynomial, tabulated per cell.
struct MaskedAntiderivative {
    cuts: Vec<f64>,
    // Per cell: coefficients (empty off the mask) and G at the cell start.
    cells: Vec<(Vec<f64>, f64)>,
}

impl MaskedAntiderivative {
    fn new(g: &PiecewiseComplexFunction, mask: &IntervalMask) -> Self {
        let mut cuts: Vec<f64> = g.breakpoints().to_vec();
        cuts.extend(mask.endpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut cells = Vec::with_capacity(cuts.len() - 1);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let coeffs: Vec<f64> = if mask.contains(mid) {
                let bp = g.breakpoints();
                let idx = (bp.partition_point(|&b| b <= mid) - 1).min(g.pieces().len() - 1);
                g.pieces()[idx].iter().map(|c| c.re).collect()
            } else {
                Vec::new()
            };
            let start = acc;
            acc += real_antiderivative(&coeffs, w[1]) - real_antiderivative(&coeffs, w[0]);
            cells.push((coeffs, start));
        }
        MaskedAntiderivative { cuts, cells }
    }

    fn cell(&self, t: f64) -> usize {
        (self.cuts.partition_point(|&c| c <= t).max(1) - 1).min(self.cells.len() - 1)
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.cell(t);
        let (coeffs, start) = &self.cells[i];
        start + real_antiderivative(coeffs, t) - real_antiderivative(coeffs, self.cuts[i])
    }

    fn density(&self, t: f64) -> f64 {
        let (coeffs, _) = &self.cells[self.cell(t)];
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

fn real_antiderivative(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (k + 1) as f64;
    }
    acc * t
}

/// `(∫_{mask} g_k Φ_s)_k`, exact per polynomial piece.
pub fn moment_residual(
    gs: &[PiecewiseComplexFunction],
    s: &SignPattern,
    mask: &IntervalMask,
) -> Vec<f64> {
    let intervals = s.intervals();
    gs.iter()
        .map(|g| {
            let mut total = 0.0;
            for &(a, b, sign) in &intervals {
                for (lo, hi) in mask.clip(a, b) {
                    total += sign * integrate_real_part(g, lo, hi);
                }
            }
            total
        })
        .collect()
}

fn integrate_real_part(g: &PiecewiseComplexFunction, a: f64, b: f64) -> f64 {
    let bp = g.breakpoints();
    let mut total = 0.0;
    for (i, piece) in g.pieces().iter().enumerate() {
        let lo = a.max(bp[i]);
        let hi = b.min(bp[i + 1]);
        if hi > lo {
            total += poly::definite_integral(piece, lo, hi).re;
        }
    }
    total
}

/// The moment map on the sphere.
///
/// With `alternating` set, interval `i` carries the sign `(−1)^i` whatever the sign of `x_i`.
/// That chart is smooth in `x` and still contains a zero: merge equal-sign neighbours of any
/// solution and pad with empty intervals at the end. The sign-of-coordinate chart is odd but
/// has spurious minima where equal-sign neighbours make a boundary invisible.
struct MomentMap {
    gs: Vec<MaskedAntiderivative>,
    alternating: bool,
}

impl MomentMap {
    fn signs(&self, x: &SphereCoordinates) -> Vec<f64> {
        if self.alternating {
            alternating(x.x.len())
        } else {
            x.signs()
        }
    }

    /// `F(x)` and its Jacobian `∂F_k/∂x_l` at fixed signs.
    fn eval(&self, x: &SphereCoordinates, with_jacobian: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
        let b = x.boundaries();
        let s = self.signs(x);
        let m1 = s.len();
        let mut f = vec![0.0; self.gs.len()];
        for (k, g) in self.gs.iter().enumerate() {
            let vals: Vec<f64> = b.iter().map(|&t| g.value(t)).collect();
            f[k] = (0..m1).map(|i| s[i] * (vals[i + 1] - vals[i])).sum();
        }
        if !with_jacobian {
            return (f, None);
        }
        let mut jac = DMatrix::zeros(self.gs.len(), m1);
        for (k, g) in self.gs.iter().enumerate() {
            // ∂F/∂b_i = (s_{i−1} − s_i) g̃(b_i); b_i depends on x_l for l < i.
            let mut tail = 0.0;
            for i in (1..m1).rev() {
                tail += (s[i - 1] - s[i]) * g.density(b[i]);
                jac[(k, i - 1)] = 2.0 * x.x[i - 1] * tail;
            }
        }
        (f, Some(jac))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// Levenberg–Marquardt on the sphere; returns the final point and its residual.
fn descend(
    map: &MomentMap,
    start: SphereCoordinates,
    opts: &HobbyRiceOptions,
) -> (SphereCoordinates, f64) {
    let m1 = start.x.len();
    let mut x = start;
    let (mut f, _) = map.eval(&x, false);
    let mut cost = sum_sq(&f);
    let mut mu = 1e-3;
    let mut polish = 0;
    for _ in 0..opts.max_iterations {
        if max_abs(&f) <= opts.tol {
            // Keep going a few steps: switch points then sit at roundoff level.
            polish += 1;
            if polish > 4 || max_abs(&f) < 1e-15 {
                break;
            }
        }
        let (_, jac) = map.eval(&x, true);
        let jac = jac.unwrap();
        let jt = jac.transpose();
        let mut normal = &jt * &jac;
        let grad = &jt * nalgebra::DVector::from_column_slice(&f);
        let xv = nalgebra::DVector::from_column_slice(&x.x);
        // The radial direction is not a search direction; pin it with a unit penalty.
        normal += &xv * xv.transpose();
        let mut improved = false;
        for _ in 0..12 {
            let mut a = normal.clone();
            let scale = (0..m1)
                .map(|i| normal[(i, i)])
                .fold(0.0, f64::max)
                .max(1e-300);
            for i in 0..m1 {
                a[(i, i)] += mu * scale;
            }
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Ok(mut step) = linalg::solve(a, &neg) else {
                mu *= 10.0;
                continue;
            };
            let radial: f64 = step.iter().zip(&x.x).map(|(s, v)| s * v).sum();
            for (s, v) in step.iter_mut().zip(&x.x) {
                *s -= radial * v;
            }
            let cand: Vec<f64> = x.x.iter().zip(&step).map(|(v, s)| v + s).collect();
            let Ok(cand) = SphereCoordinates::new(cand) else {
                mu *= 10.0;
                continue;
            };
            let (fc, _) = map.eval(&cand, false);
            let cc = sum_sq(&fc);
            if cc < cost {
                x = cand;
                f = fc;
                cost = cc;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, max_abs(&f))
}

/// Finds a sign pattern with at most `m = gs.len()` switches annihilating every `g_k` on `mask`.
///
/// Only the real parts of `gs` are used. Among converged seeds the pattern with the fewest
/// switches wins, then the lexicographically smallest switch vector; the leading sign is
/// normalized to `+1`.
pub fn solve_hobby_rice(
    gs: &[PiecewiseComplexFunction],
    mask: &IntervalMask,
    opts: &HobbyRiceOptions,
) -> Result<SignPattern> {
    if gs.is_empty() {
        return Err(Error::invalid("Hobby-Rice needs at least one function"));
    }
    if !(opts.tol > 0.0) || opts.seeds == 0 {
        return Err(Error::invalid(
            "Hobby-Rice needs tol > 0 and at least one seed",
        ));
    }
    let map = MomentMap {
        gs: gs
            .iter()
            .map(|g| MaskedAntiderivative::new(g, mask))
            .collect(),
        alternating: true,
    };
    let m1 = gs.len() + 1;
    let mut rng = Rng::seeded(opts.seed);
    let mut best: Option<(SignPattern, f64)> = None;
    let mut best_residual = f64::INFINITY;
    for seed in 0..opts.seeds {
        let start = if seed == 0 {
            // Equal lengths.
            vec![1.0; m1]
        } else {
            (0..m1).map(|_| rng.normal()).collect()
        };
        let Ok(start) = SphereCoordinates::new(start) else {
            continue;
        };
        let (x, _) = descend(&map, start, opts);
        let mut pattern = pattern_from(&x.boundaries(), &map.signs(&x));
        if pattern.leading_sign < 0 {
            pattern = pattern.negated();
        }
        let residual = max_abs(&moment_residual(gs, &pattern, mask));
        best_residual = best_residual.min(residual);
        if residual > opts.tol {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, _)) => {
                let (ns, nb) = (pattern.switch_points.len(), b.switch_points.len());
                ns < nb
                    || (ns == nb
                        && pattern
                            .switch_points
                            .iter()
                            .zip(&b.switch_points)
                            .find(|(p, q)| p != q)
                            .is_some_and(|(p, q)| p < q))
            }
        };
        if better {
            best = Some((pattern, residual));
        }
    }
    best.map(|(p, _)| p)
        .ok_or(Error::HobbyRice { best_residual })
}

/// Picks `φ# = (π/2)(1 − Φ)` or its flip `π − φ#`, whichever equals `π` at no more than
/// half of the boundary points.
///
/// `boundary` lists window edges in pairs `(t_j − δ, t_j + δ)`. Each edge is read from the
/// side facing away from its window: the left limit at a left edge, the value at a right edge.
pub fn select_phi_sharp(s: &SignPattern, boundary: &[f64]) -> StepPhase {
    let phi = s.to_phase();
    let n = boundary.len() / 2;
    let count = boundary_hits(&phi, boundary);
    if count > n {
        s.negated().to_phase()
    } else {
        phi
    }
}

fn boundary_hits(phi: &StepPhase, boundary: &[f64]) -> usize {
    boundary
        .iter()
        .enumerate()
        .filter(|&(i, &b)| {
            let v = if i % 2 == 0 {
                phi.value_left(b)
            } else {
                phi.value(b)
            };
            v != 0.0
        })
        .count()
}

/// Discontinuities of `φ·I_mask`: jumps strictly inside mask intervals plus mask endpoints
/// in `(0, 1)` where `φ`, read from inside the mask, is nonzero.
pub fn count_masked_discontinuities(phi: &StepPhase, mask: &IntervalMask) -> usize {
    let mut count = 0;
    for &(a, b) in mask.intervals() {
        count += phi
            .jump_locations()
            .iter()
            .filter(|&&l| l > a && l < b)
            .count();
        if a > 0.0 && phi.value(a) != 0.0 {
            count += 1;
        }
        if b < 1.0 && phi.value_left(b) != 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn poly(c: &[f64]) -> PiecewiseComplexFunction {
        PiecewiseComplexFunction::real_polynomial(c).unwrap()
    }

    #[test]
    fn moment_residual_examples() {
        let full = IntervalMask::full();
        let s = SignPattern::new(vec![0.5], 1).unwrap();
        assert!(moment_residual(&[poly(&[1.0])], &s, &full)[0].abs() < 1e-16);
        let s = SignPattern::new(vec![libm::sqrt(0.5)], 1).unwrap();
        assert!(moment_residual(&[poly(&[0.0, 1.0])], &s, &full)[0].abs() < 1e-15);
        let s = SignPattern::new(vec![0.25, 0.75], 1).unwrap();
        let r = moment_residual(&[poly(&[1.0]), poly(&[0.0, 1.0])], &s, &full);
        assert!(max_abs(&r) < 1e-16);
    }

    #[test]
    fn closed_forms() {
        let full = IntervalMask::full();
        let opts = HobbyRiceOptions::default();
        let s = solve_hobby_rice(&[poly(&[1.0])], &full, &opts).unwrap();
        assert_eq!(s.switch_points().len(), 1);
        assert!((s.switch_points()[0] - 0.5).abs() < 1e-10);

        let s = solve_hobby_rice(&[poly(&[0.0, 1.0])], &full, &opts).unwrap();
        assert!((s.switch_points()[0] - libm::sqrt(0.5)).abs() < 1e-10);

        let s = solve_hobby_rice(&[poly(&[1.0]), poly(&[0.0, 1.0])], &full, &opts).unwrap();
        assert_eq!(s.switch_points().len(), 2);
        assert!((s.switch_points()[0] - 0.25).abs() < 1e-10);
        assert!((s.switch_points()[1] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn moment_map_is_odd() {
        let map = MomentMap {
            gs: [poly(&[0.3, -1.0, 2.0]), poly(&[0.0, 1.0])]
                .iter()
                .map(|g| MaskedAntiderivative::new(g, &IntervalMask::full()))
                .collect(),
            alternating: false,
        };
        let x = SphereCoordinates::new(vec![0.3, -0.5, 0.8]).unwrap();
        let nx = SphereCoordinates::new(x.coords().iter().map(|v| -v).collect()).unwrap();
        let (f, _) = map.eval(&x, false);
        let (g, _) = map.eval(&nx, false);
        for (a, b) in f.iter().zip(&g) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mask = IntervalMask::new(vec![(0.0, 0.35), (0.5, 1.0)]).unwrap();
        let map = MomentMap {
            gs: [poly(&[0.3, -1.0, 2.0]), poly(&[1.0, 1.0])]
                .iter()
                .map(|g| MaskedAntiderivative::new(g, &mask))
                .collect(),
            alternating: false,
        };
        let x = SphereCoordinates {
            x: vec![0.4, -0.6, 0.5, 0.4],
        };
        let (_, jac) = map.eval(&x, true);
        let jac = jac.unwrap();
        let h = 1e-7;
        for l in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.x[l] += h;
            xm.x[l] -= h;
            let (fp, _) = map.eval(&xp, false);
            let (fm, _) = map.eval(&xm, false);
            for k in 0..2 {
                let fd = (fp[k] - fm[k]) / (2.0 * h);
                assert!(
                    (fd - jac[(k, l)]).abs() < 1e-6,
                    "k={k} l={l}: {fd} vs {}",
                    jac[(k, l)]
                );
            }
        }
    }

    #[test]
    fn masked_solve_annihilates_on_mask() {
        let mask = IntervalMask::complement_of_windows(&[0.3, 0.7], 0.05).unwrap();
        let gs = [
            PiecewiseComplexFunction::polynomial(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-2.0, 0.0),
            ])
            .unwrap(),
            poly(&[0.2, 0.0, 3.0]),
            poly(&[1.0]),
        ];
        let s = solve_hobby_rice(&gs, &mask, &HobbyRiceOptions::default()).unwrap();
        assert!(s.switch_points().len() <= 3);
        assert!(max_abs(&moment_residual(&gs, &s, &mask)) <= 1e-10);
    }

    #[test]
    fn select_phi_sharp_examples() {
        let plus = SignPattern::new(vec![], 1).unwrap();
        let phi = select_phi_sharp(&plus, &[0.2, 0.4]);
        assert!(phi.jump_locations().is_empty());
        assert_eq!(phi.base_value(), 0.0);

        let minus = SignPattern::new(vec![], -1).unwrap();
        let phi = select_phi_sharp(&minus, &[0.2, 0.4]);
        assert_eq!(phi.base_value(), 0.0);

        let half = SignPattern::new(vec![0.5], 1).unwrap();
        let phi = select_phi_sharp(&half, &[0.2, 0.4, 0.6, 0.8]);
        assert_eq!(phi.value(0.0), 0.0);
        assert_eq!(phi.value(0.7), PI);
    }

    #[test]
    fn count_examples() {
        let mask = IntervalMask::complement_of_windows(&[0.25], 0.05).unwrap();
        assert_eq!(
            count_masked_discontinuities(&StepPhase::constant(0.0, (0.0, 1.0)), &mask),
            0
        );
        let phi = SignPattern::new(vec![0.5], 1).unwrap().to_phase();
        assert_eq!(count_masked_discontinuities(&phi, &mask), 1);
        // Window sits inside the π region: both of its edges count.
        let mask = IntervalMask::complement_of_windows(&[0.75], 0.05).unwrap();
        assert_eq!(count_masked_discontinuities(&phi, &mask), 3);
    }
}
