//! Dense complex polynomials in ascending-degree form.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

#[inline]
pub(crate) fn eval(coeffs: &[Complex64], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

/// Antiderivative vanishing at zero, evaluated at `t`.
#[inline]
pub(crate) fn eval_antiderivative(coeffs: &[Complex64], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (k as f64 + 1.0);
    }
    acc * t
}

pub(crate) fn definite_integral(coeffs: &[Complex64], a: f64, b: f64) -> Complex64 {
    eval_antiderivative(coeffs, b) - eval_antiderivative(coeffs, a)
}

/// Coefficients of `p(x + shift)` in `x`.
pub(crate) fn taylor_shift(coeffs: &[Complex64], shift: f64) -> Vec<Complex64> {
    // Repeated synthetic division.
    let mut b = coeffs.to_vec();
    let n = b.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = b[j + 1];
            b[j] += next * shift;
        }
    }
    b
}

/// Product `p · conj(q)` as a polynomial in `t` (real variable).
pub(crate) fn mul_conj(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b.conj();
        }
    }
    out
}

/// `∫_{x0}^{x1} |x|^m dx`.
pub(crate) fn abs_power_integral(m: usize, x0: f64, x1: f64) -> f64 {
    let prim = |x: f64| {
        let p = libm::pow(x.abs(), m as f64 + 1.0) / (m as f64 + 1.0);
        if x < 0.0 {
            -p
        } else {
            p
        }
    };
    prim(x1) - prim(x0)
}
