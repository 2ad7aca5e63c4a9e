//! Complex piecewise polynomials on `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::mask::IntervalMask;
use crate::poly;
use crate::quadrature::{self, QuadratureConfig};
use crate::{Error, Result};

pub const MAX_DEGREE: usize = 12;

/// A complex-valued piecewise polynomial on `[0, 1]`.
///
/// Piece `i` lives on `[breakpoints[i], breakpoints[i+1])` and stores coefficients of a
/// polynomial in the global variable `t`, lowest degree first. Evaluation is
/// right-continuous, except at `t = 1` where the last piece is used.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseComplexFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<Complex64>>,
}

impl PiecewiseComplexFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<Complex64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("need at least two breakpoints"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::invalid("breakpoints must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(alloc::format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        for p in &pieces {
            if p.is_empty() || p.len() > MAX_DEGREE + 1 {
                return Err(Error::invalid(alloc::format!(
                    "each piece needs between 1 and {} coefficients",
                    MAX_DEGREE + 1
                )));
            }
            if p.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::invalid("coefficients must be finite"));
            }
        }
        Ok(PiecewiseComplexFunction {
            breakpoints,
            pieces,
        })
    }

    /// A single polynomial on all of `[0, 1]`.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![coeffs])
    }

    /// A real polynomial on all of `[0, 1]`.
    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        PiecewiseComplexFunction {
            breakpoints: vec![0.0, 1.0],
            pieces: vec![vec![c]],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<Complex64>] {
        &self.pieces
    }

    /// Interior breakpoints, i.e. the places where `f` may be discontinuous.
    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    #[inline]
    fn piece_index(&self, t: f64) -> usize {
        // Number of breakpoints <= t, minus one, clamped to the last piece.
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(alloc::format!("t = {t} is outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluation without the domain check; outside `[0,1]` the end pieces are extended.
    #[inline]
    pub fn eval_unchecked(&self, t: f64) -> Complex64 {
        poly::eval(&self.pieces[self.piece_index(t)], t)
    }

    /// Exact `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<Complex64> {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::domain(alloc::format!(
                "integration bounds [{a}, {b}] must satisfy 0 <= a <= b <= 1"
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, p) in self.pieces.iter().enumerate() {
            let lo = self.breakpoints[i].max(a);
            let hi = self.breakpoints[i + 1].min(b);
            if hi > lo {
                acc += poly::definite_integral(p, lo, hi);
            }
        }
        Ok(acc)
    }

    /// Exact `∫_{mask} f`.
    pub fn integrate_masked(&self, mask: &IntervalMask) -> Complex64 {
        mask.intervals()
            .iter()
            .map(|&(a, b)| self.integrate(a, b).expect("mask inside [0,1]"))
            .sum()
    }

    /// `‖f‖_{L¹}` by adaptive quadrature.
    pub fn l1_norm(&self, cfg: &QuadratureConfig) -> Result<f64> {
        // |f| has kinks where a real-valued (or purely imaginary) piece changes sign.
        let mut cuts = self.breakpoints.clone();
        for (i, p) in self.pieces.iter().enumerate() {
            let part: Option<fn(&Complex64) -> f64> = if p.iter().all(|c| c.im == 0.0) {
                Some(|c| c.re)
            } else if p.iter().all(|c| c.re == 0.0) {
                Some(|c| c.im)
            } else {
                None
            };
            if let Some(part) = part {
                let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
                let g = |t: f64| part(&poly::eval(p, t));
                cuts.extend(sign_changes(g, a, b));
            }
        }
        let panels = quadrature::panels_from_cuts(0.0, 1.0, &cuts);
        Ok(quadrature::integrate_real(|t| self.eval_unchecked(t).norm(), &panels, cfg)?.0)
    }

    /// Exact `⟨f, g⟩ = ∫₀¹ f ḡ`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let cuts = merge_breakpoints(&[self, other]);
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let p = &self.pieces[self.piece_index(mid)];
                let q = &other.pieces[other.piece_index(mid)];
                poly::definite_integral(&poly::mul_conj(p, q), w[0], w[1])
            })
            .sum()
    }

    pub fn is_real(&self) -> bool {
        self.pieces.iter().flatten().all(|c| c.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces
            .iter()
            .flatten()
            .all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn real_part(&self) -> Self {
        self.map_coeffs(|c| Complex64::new(c.re, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        self.map_coeffs(|c| Complex64::new(c.im, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_coeffs(|c| c * s)
    }

    fn map_coeffs(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        PiecewiseComplexFunction {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.iter().map(|&c| f(c)).collect())
                .collect(),
        }
    }

    /// `Σ_i w_i f_i` on the common refinement of the breakpoints.
    pub fn linear_combination(fs: &[Self], weights: &[Complex64]) -> Result<Self> {
        if fs.is_empty() || fs.len() != weights.len() {
            return Err(Error::invalid("need one weight per function"));
        }
        let cuts = merge_breakpoints(&fs.iter().collect::<Vec<_>>());
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut acc: Vec<Complex64> = Vec::new();
            for (f, &c) in fs.iter().zip(weights) {
                let p = &f.pieces[f.piece_index(mid)];
                if acc.len() < p.len() {
                    acc.resize(p.len(), Complex64::new(0.0, 0.0));
                }
                for (a, &b) in acc.iter_mut().zip(p) {
                    *a += b * c;
                }
            }
            pieces.push(acc);
        }
        Self::new(cuts, pieces)
    }

    /// `f · I_mask` as a piecewise polynomial (zero pieces off the mask).
    pub fn restrict(&self, mask: &IntervalMask) -> Self {
        let mut cuts: Vec<f64> = self.breakpoints.clone();
        cuts.extend(mask.endpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                if mask.contains(mid) {
                    self.pieces[self.piece_index(mid)].clone()
                } else {
                    vec![Complex64::new(0.0, 0.0)]
                }
            })
            .collect();
        PiecewiseComplexFunction {
            breakpoints: cuts,
            pieces,
        }
    }
}

/// Sign changes of `g` on `[a, b]`, located by sampling and bisection.
fn sign_changes(g: impl Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    const SAMPLES: usize = 64;
    let mut out = Vec::new();
    let mut lo = a;
    let mut glo = g(a);
    for k in 1..=SAMPLES {
        let hi = a + (b - a) * k as f64 / SAMPLES as f64;
        let ghi = g(hi);
        if ghi == 0.0 && hi < b {
            out.push(hi);
        } else if glo * ghi < 0.0 {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..100 {
                let m = 0.5 * (l + h);
                if !(m > l && m < h) {
                    break;
                }
                if (g(m) < 0.0) == (glo < 0.0) {
                    l = m;
                } else {
                    h = m;
                }
            }
            out.push(0.5 * (l + h));
        }
        lo = hi;
        glo = ghi;
    }
    out
}

/// Sorted union of the breakpoints of several functions.
pub fn merge_breakpoints(fs: &[&PiecewiseComplexFunction]) -> Vec<f64> {
    let mut cuts: Vec<f64> = fs
        .iter()
        .flat_map(|f| f.breakpoints.iter().copied())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Default relative pivot tolerance for [`independent_subset`].
pub const DEFAULT_GRAM_TOL: f64 = 1e-10;

/// Indices of a maximal linearly independent subset, scanning in order.
///
/// Runs a Cholesky factorisation of the exact `L²` Gram matrix, keeping `f_i` when its
/// pivot exceeds `tol` times the largest diagonal entry. Annihilating the kept functions
/// annihilates their span, which contains every input.
pub fn independent_subset(fs: &[PiecewiseComplexFunction], tol: f64) -> Vec<usize> {
    let n = fs.len();
    let gram: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| fs[i].inner(&fs[j])).collect())
        .collect();
    let scale = (0..n).map(|i| gram[i][i].re).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Vec::new();
    }
    let mut kept: Vec<usize> = Vec::new();
    // Row r of the Cholesky factor is conj(chol[r]) with diagonal diag[r].
    let mut chol: Vec<Vec<Complex64>> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    for i in 0..n {
        let mut y: Vec<Complex64> = Vec::with_capacity(kept.len());
        for (r, &kr) in kept.iter().enumerate() {
            let mut v = gram[kr][i];
            for s in 0..r {
                v -= chol[r][s].conj() * y[s];
            }
            y.push(v / diag[r]);
        }
        let pivot = gram[i][i].re - y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if pivot > tol * scale {
            let d = libm::sqrt(pivot);
            kept.push(i);
            chol.push(y);
            diag.push(d);
        }
    }
    kept
}

/// Combines real functions pairwise as `f_{2j-1} + i f_{2j}`; an odd leftover passes through.
///
/// Only valid for real multipliers: a real `Φ` annihilates the packed function exactly when
/// it annihilates both halves. This does not carry over to `e^{iθ}`.
pub fn pack_real_pairs(fs: &[PiecewiseComplexFunction]) -> Result<Vec<PiecewiseComplexFunction>> {
    if let Some(i) = fs.iter().position(|f| !f.is_real()) {
        return Err(Error::domain(alloc::format!(
            "function {i} is not real-valued"
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    fs.chunks(2)
        .map(|pair| match pair {
            [_, _] => {
                PiecewiseComplexFunction::linear_combination(pair, &[Complex64::new(1.0, 0.0), i])
            }
            [a] => Ok(a.clone()),
            _ => unreachable!(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn step() -> PiecewiseComplexFunction {
        PiecewiseComplexFunction::new(
            vec![0.0, 0.5, 1.0],
            vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]],
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let one = PiecewiseComplexFunction::constant(c(1.0, 0.0));
        assert_eq!(one.eval(0.3).unwrap(), c(1.0, 0.0));
        let f = PiecewiseComplexFunction::polynomial(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        assert!((f.eval(0.5).unwrap() - c(0.5, 0.25)).norm() < 1e-15);
        assert_eq!(step().eval(0.5).unwrap(), c(-1.0, 0.0));
        assert_eq!(step().eval(1.0).unwrap(), c(-1.0, 0.0));
        assert_eq!(step().eval(0.0).unwrap(), c(1.0, 0.0));
        assert!(matches!(step().eval(1.5), Err(Error::Domain(_))));
        assert!(step().eval(-0.1).is_err());
    }

    #[test]
    fn integrate_examples() {
        let one = PiecewiseComplexFunction::constant(c(1.0, 0.0));
        assert_eq!(one.integrate(0.0, 1.0).unwrap(), c(1.0, 0.0));
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        assert!((t.integrate(0.0, 1.0).unwrap() - c(0.5, 0.0)).norm() < 1e-16);
        let it2 = PiecewiseComplexFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        assert!((it2.integrate(0.0, 0.5).unwrap() - c(0.0, 1.0 / 24.0)).norm() < 1e-16);
        assert!(matches!(one.integrate(0.6, 0.5), Err(Error::Domain(_))));
        assert!((step().integrate(0.25, 0.75).unwrap()).norm() < 1e-16);
    }

    #[test]
    fn validation() {
        assert!(PiecewiseComplexFunction::new(vec![0.0, 0.5], vec![vec![c(1.0, 0.0)]]).is_err());
        assert!(PiecewiseComplexFunction::new(
            vec![0.0, 0.5, 0.5, 1.0],
            vec![vec![c(1.0, 0.0)]; 3]
        )
        .is_err());
        assert!(PiecewiseComplexFunction::new(vec![0.0, 1.0], vec![vec![]]).is_err());
        assert!(
            PiecewiseComplexFunction::new(vec![0.0, 1.0], vec![vec![c(f64::NAN, 0.0)]]).is_err()
        );
        assert!(
            PiecewiseComplexFunction::new(vec![0.0, 1.0], vec![vec![c(1.0, 0.0); 14]]).is_err()
        );
        assert!(PiecewiseComplexFunction::new(vec![0.0, 1.0], vec![vec![c(1.0, 0.0); 13]]).is_ok());
    }

    #[test]
    fn independent_subset_examples() {
        let one = PiecewiseComplexFunction::real_polynomial(&[1.0]).unwrap();
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        let one_t = PiecewiseComplexFunction::real_polynomial(&[1.0, 1.0]).unwrap();
        let two_t = PiecewiseComplexFunction::real_polynomial(&[0.0, 2.0]).unwrap();
        assert_eq!(
            independent_subset(&[one.clone(), t.clone(), one_t], DEFAULT_GRAM_TOL),
            vec![0, 1]
        );
        assert_eq!(
            independent_subset(core::slice::from_ref(&one), DEFAULT_GRAM_TOL),
            vec![0]
        );
        assert_eq!(
            independent_subset(&[t.clone(), two_t], DEFAULT_GRAM_TOL),
            vec![0]
        );
        let zero = PiecewiseComplexFunction::real_polynomial(&[0.0]).unwrap();
        assert!(independent_subset(&[zero], DEFAULT_GRAM_TOL).is_empty());
    }

    #[test]
    fn complex_multiple_is_dependent() {
        let f = PiecewiseComplexFunction::polynomial(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let g = f.scale(c(0.3, -2.0));
        assert_eq!(independent_subset(&[f, g], DEFAULT_GRAM_TOL), vec![0]);
    }

    #[test]
    fn pack_examples() {
        let one = PiecewiseComplexFunction::real_polynomial(&[1.0]).unwrap();
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        let t2 = PiecewiseComplexFunction::real_polynomial(&[0.0, 0.0, 1.0]).unwrap();
        let packed = pack_real_pairs(&[one.clone(), t.clone()]).unwrap();
        assert_eq!(packed.len(), 1);
        assert_eq!(packed[0].pieces()[0], vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(
            pack_real_pairs(core::slice::from_ref(&one)).unwrap(),
            vec![one.clone()]
        );
        let three = pack_real_pairs(&[one.clone(), t, t2.clone()]).unwrap();
        assert_eq!(three.len(), 2);
        assert_eq!(three[1], t2);
        let complex = PiecewiseComplexFunction::constant(c(0.0, 1.0));
        assert!(matches!(
            pack_real_pairs(&[one, complex]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn restrict_zeroes_outside_mask() {
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        let mask = IntervalMask::complement_of_windows(&[0.5], 0.1).unwrap();
        let r = t.restrict(&mask);
        assert_eq!(r.eval(0.5).unwrap(), c(0.0, 0.0));
        assert_eq!(r.eval(0.3).unwrap(), c(0.3, 0.0));
        let direct = t.integrate_masked(&mask);
        assert!((r.integrate(0.0, 1.0).unwrap() - direct).norm() < 1e-15);
    }

    #[test]
    fn inner_product_is_exact() {
        let t = PiecewiseComplexFunction::real_polynomial(&[0.0, 1.0]).unwrap();
        assert!((t.inner(&t) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let it = t.scale(c(0.0, 1.0));
        // ⟨t, it⟩ = ∫ t · conj(i t) = −i/3
        assert!((t.inner(&it) - c(0.0, -1.0 / 3.0)).norm() < 1e-15);
    }
}
