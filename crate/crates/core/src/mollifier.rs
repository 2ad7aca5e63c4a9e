//! The standard bump mollifier `ψ(t) = C·exp(−1/(1−t²))` on `(−1, 1)` and its CDF `Ψ`.
//!
//! Mollifying a unit step at `a` with `ψ_h(t) = ψ(t/h)/h` gives exactly `Ψ((t − a)/h)`, so
//! every smoothed phase in this crate is a finite sum of shifted, scaled copies of `Ψ`.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::quadrature::{GK15_NODES, GK15_WEIGHTS};

/// Cells of the `Ψ` table on `[−1, 0]`; the right half follows from symmetry.
const CELLS: usize = 2048;

#[derive(Debug, Clone)]
pub struct Mollifier {
    normalization: f64,
    // Ψ at x_i = −1 + i/CELLS, i = 0..=CELLS.
    cdf: Vec<f64>,
    first_abs_moment: f64,
}

fn bump(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / s)
    }
}

fn bump_deriv(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / s) * (-2.0 * x / (s * s))
    }
}

fn cell_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = GK15_WEIGHTS[7] * f(c);
    for j in 0..7 {
        let dx = h * GK15_NODES[j];
        acc += GK15_WEIGHTS[j] * (f(c - dx) + f(c + dx));
    }
    acc * h
}

static SHARED: OnceBox<Arc<Mollifier>> = OnceBox::new();

impl Mollifier {
    /// Builds the table. Prefer [`Mollifier::shared`], which builds it once per process.
    pub fn standard() -> Self {
        let h = 1.0 / CELLS as f64;
        let mut cum = Vec::with_capacity(CELLS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..CELLS {
            let a = -1.0 + i as f64 * h;
            acc += cell_integral(bump, a, a + h);
            cum.push(acc);
        }
        let half_mass = acc;
        let normalization = 0.5 / half_mass;
        let cdf = cum.iter().map(|v| v * normalization).collect();

        let mut moment = 0.0;
        for i in 0..CELLS {
            let a = i as f64 * h;
            moment += cell_integral(|x| x * bump(x), a, a + h);
        }
        Mollifier {
            normalization,
            cdf,
            first_abs_moment: 2.0 * normalization * moment,
        }
    }

    pub fn shared() -> Arc<Mollifier> {
        SHARED
            .get_or_init(|| Box::new(Arc::new(Mollifier::standard())))
            .clone()
    }

    /// `C` with `∫ψ = 1`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `‖ψ‖_∞ = ψ(0) = C/e`.
    pub fn sup_norm(&self) -> f64 {
        self.normalization * libm::exp(-1.0)
    }

    /// `∫|t|ψ(t)dt`, which also equals `∫_{−1}^{1} |H(t) − Ψ(t)| dt` for the unit step `H`.
    pub fn first_abs_moment(&self) -> f64 {
        self.first_abs_moment
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        self.normalization * bump(x)
    }

    #[inline]
    pub fn density_deriv(&self, x: f64) -> f64 {
        self.normalization * bump_deriv(x)
    }

    /// `Ψ(x) = ∫_{−1}^{x} ψ`.
    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else if x <= 0.0 {
            self.left_cdf(x)
        } else {
            1.0 - self.left_cdf(-x)
        }
    }

    fn left_cdf(&self, x: f64) -> f64 {
        let h = 1.0 / CELLS as f64;
        let pos = (x + 1.0) * CELLS as f64;
        let i = (pos as usize).min(CELLS - 1);
        let x0 = -1.0 + i as f64 * h;
        let x1 = x0 + h;
        let u = (x - x0) / h;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.density(x0) * h, self.density(x1) * h);
        let (s0, s1) = (
            self.density_deriv(x0) * h * h,
            self.density_deriv(x1) * h * h,
        );
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u3 * u;
        let u5 = u4 * u;
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 0.5 * (u3 - 2.0 * u4 + u5);
        y0 * h0 + d0 * h1 + s0 * h2 + y1 * h3 + d1 * h4 + s1 * h5
    }
}
