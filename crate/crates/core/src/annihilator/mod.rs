//! The annihilator construction: nodes, certified windows, the off-window phase `φ` and
//! the fixed point `T(z₀) = 0`.
//!
//! With nodes `t_j`, window half-width `δ` and window phases `θ_{δ,z_j}`, the assembled phase
//! `θ*_z` equals `φ` off the windows and `θ_{δ,z_j}((t − t_j)/δ) + 2π(j − 1)` on window `j`.
//! Then `T(z) = ∫₀¹ f e^{iθ*_z} = δQ(δ; z) + r`, and the certificates make
//! `z ↦ z − δ⁻¹M⁻¹T(z)` a self-map of the closed polydisk.

mod nodes;
mod phi;
mod window;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use nodes::{default_candidate_grid, select_nodes, NodeSelection};
pub use phi::{build_phi, phi_variation_bound, PhiConstruction};
pub use window::{
    compute_q, find_delta, polar_grid, sampled_margins, window_moment, window_moments,
    DeltaCertificate,
};

use crate::function::{
    independent_subset, pack_real_pairs, PiecewiseComplexFunction, DEFAULT_GRAM_TOL,
};
use crate::hobby_rice::HobbyRiceOptions;
use crate::linalg;
use crate::mask::IntervalMask;
use crate::mollifier::Mollifier;
use crate::phase::{window_phase, SmoothPhase};
use crate::quadrature::{integrate_family_against_phase, QuadratureConfig};
use crate::rng::Rng;
use crate::sobolev::{sobolev_report, NormReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorOptions {
    /// Target for `max_k |∫ f_k e^{iθ}|`.
    pub tol: f64,
    pub quadrature: QuadratureConfig,
    pub gram_tol: f64,
    /// Node candidates; `None` uses [`default_candidate_grid`].
    pub candidate_grid: Option<Vec<f64>>,
    pub grid_points_per_piece: usize,
    pub margin_threshold: f64,
    pub z_grid_resolution: usize,
    /// Certification gives up once `δ < min_delta_ratio·d`.
    pub min_delta_ratio: f64,
    pub damping: f64,
    pub max_iterations: usize,
    pub fallback_starts: usize,
    pub fallback_iterations: usize,
    pub hobby_rice: HobbyRiceOptions,
    /// Drives every multistart (Hobby–Rice seeds and fallback starts).
    pub seed: u64,
    /// Pack real inputs pairwise into complex functions. Only sound for real multipliers,
    /// so off by default.
    pub pack_real: bool,
    /// Exponent of the attached norm report.
    pub norm_p: f64,
}

impl Default for AnnihilatorOptions {
    fn default() -> Self {
        AnnihilatorOptions {
            tol: 1e-6,
            quadrature: QuadratureConfig::default(),
            gram_tol: DEFAULT_GRAM_TOL,
            candidate_grid: None,
            grid_points_per_piece: 8,
            margin_threshold: 0.4,
            z_grid_resolution: 17,
            min_delta_ratio: 1e-9,
            damping: 0.5,
            max_iterations: 200,
            fallback_starts: 8,
            fallback_iterations: 60,
            hobby_rice: HobbyRiceOptions::default(),
            seed: 0,
            pack_real: false,
            norm_p: 1.0,
        }
    }
}

impl AnnihilatorOptions {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping must lie in (0, 1]"));
        }
        if self.grid_points_per_piece == 0 || self.z_grid_resolution < 2 {
            return Err(Error::invalid("grid sizes must be positive"));
        }
        if !(self.norm_p >= 1.0) {
            return Err(Error::invalid("norm exponent must be at least 1"));
        }
        Ok(())
    }
}

/// `T(z)` computed directly and through the decomposition `δQ(δ; z) + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TEvaluation {
    pub direct: Vec<Complex64>,
    pub decomposed: Vec<Complex64>,
    pub discrepancy: f64,
}

/// Every evaluation of `T` along the solve is checked against its decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyLog {
    pub checks: usize,
    pub max_discrepancy: f64,
    pub limit: f64,
}

/// Certified construction data for a linearly independent working family.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    functions: Vec<PiecewiseComplexFunction>,
    nodes: NodeSelection,
    delta: DeltaCertificate,
    phi: PhiConstruction,
    quadrature: QuadratureConfig,
}

impl Pipeline {
    /// Runs node selection, `δ` certification and the `φ` construction.
    pub fn build(
        functions: Vec<PiecewiseComplexFunction>,
        opts: &AnnihilatorOptions,
    ) -> Result<Self> {
        opts.validate()?;
        let grid = match &opts.candidate_grid {
            Some(g) => g.clone(),
            None => default_candidate_grid(&functions, opts.grid_points_per_piece),
        };
        let nodes = select_nodes(&functions, &grid)?;
        let delta = find_delta(
            &functions,
            &nodes,
            opts.margin_threshold,
            opts.min_delta_ratio,
            opts.z_grid_resolution,
            &opts.quadrature,
        )?;
        let hr = HobbyRiceOptions {
            seed: derive_seed(opts.seed, 1),
            ..opts.hobby_rice.clone()
        };
        let phi = build_phi(
            &functions,
            &nodes,
            delta.delta,
            &hr,
            opts.gram_tol,
            &opts.quadrature,
        )?;
        Ok(Pipeline {
            functions,
            nodes,
            delta,
            phi,
            quadrature: opts.quadrature,
        })
    }

    pub fn functions(&self) -> &[PiecewiseComplexFunction] {
        &self.functions
    }

    pub fn nodes(&self) -> &NodeSelection {
        &self.nodes
    }

    pub fn delta(&self) -> &DeltaCertificate {
        &self.delta
    }

    pub fn phi(&self) -> &PhiConstruction {
        &self.phi
    }

    pub fn consistency_limit(&self) -> f64 {
        10.0 * self.quadrature.abs_tol
    }

    pub fn assemble(&self, z: &[Complex64]) -> Result<SmoothPhase> {
        assemble_theta_star(z, &self.phi.phi, &self.nodes, self.delta.delta)
    }

    pub fn compute_q(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        compute_q(
            &self.functions,
            &self.nodes,
            self.delta.delta,
            z,
            &self.quadrature,
        )
    }

    /// Both forms of `T(z)`; fails with [`Error::Consistency`] when they disagree by more than
    /// ten quadrature tolerances.
    pub fn residual_t(&self, z: &[Complex64]) -> Result<TEvaluation> {
        let theta = self.assemble(z)?;
        let direct = integrate_family_against_phase(
            &self.functions,
            &theta,
            &IntervalMask::full(),
            &self.quadrature,
        )?
        .values;
        let q = self.compute_q(z)?;
        let decomposed: Vec<Complex64> = q
            .iter()
            .zip(&self.phi.r)
            .map(|(q, r)| q * self.delta.delta + r)
            .collect();
        let discrepancy = direct
            .iter()
            .zip(&decomposed)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let limit = self.consistency_limit();
        if discrepancy > limit {
            return Err(Error::Consistency {
                direct,
                decomposed,
                discrepancy,
                limit,
            });
        }
        Ok(TEvaluation {
            direct,
            decomposed,
            discrepancy,
        })
    }

    /// `z − δ⁻¹M⁻¹T(z)` (unprojected).
    pub fn self_map(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let t = self.residual_t(z)?;
        Ok(self.step_from(z, &t.direct, 1.0))
    }

    fn step_from(&self, z: &[Complex64], t: &[Complex64], lambda: f64) -> Vec<Complex64> {
        let scaled = self.nodes.apply_inverse(t);
        z.iter()
            .zip(&scaled)
            .map(|(z, s)| z - s * (lambda / self.delta.delta))
            .collect()
    }

    /// Damped projected iteration from `z = 0`, then Levenberg–Marquardt on `‖δ⁻¹M⁻¹T‖²`
    /// from several starts if the iteration stalls.
    pub fn solve(&self, opts: &AnnihilatorOptions) -> Result<FixedPointOutcome> {
        let mut state = SolveState {
            pipeline: self,
            log: ConsistencyLog {
                checks: 0,
                max_discrepancy: 0.0,
                limit: self.consistency_limit(),
            },
            evaluations: 0,
            best: None,
        };
        let n = self.nodes.len();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut iterations = 0;
        let mut last_gain = 0;
        let mut reference = f64::INFINITY;
        while iterations < opts.max_iterations {
            let t = state.eval(&z)?;
            iterations += 1;
            let res = linalg::max_norm(&t);
            if res <= opts.tol {
                return Ok(state.finish(z, t, iterations, false));
            }
            if res < 0.5 * reference {
                reference = res;
                last_gain = iterations;
            } else if iterations - last_gain > 15 {
                break;
            }
            z = project(self.step_from(&z, &t, opts.damping));
        }

        let mut rng = Rng::seeded(derive_seed(opts.seed, 2));
        for start in 0..opts.fallback_starts {
            let z0 = if start == 0 {
                state
                    .best
                    .as_ref()
                    .map(|b| b.0.clone())
                    .unwrap_or_else(|| z.clone())
            } else {
                (0..n)
                    .map(|_| {
                        let r = libm::sqrt(rng.uniform());
                        Complex64::from_polar(r, 2.0 * core::f64::consts::PI * rng.uniform())
                    })
                    .collect()
            };
            let (done, its) = state.levenberg_marquardt(z0, opts)?;
            iterations += its;
            if let Some((z, t)) = done {
                return Ok(state.finish(z, t, iterations, true));
            }
        }
        let (best_z, best_t) = state.best.clone().expect("at least one evaluation");
        Err(Error::FixedPoint {
            best_residual: linalg::max_norm(&best_t),
            best_z,
            iterations,
        })
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn project(z: Vec<Complex64>) -> Vec<Complex64> {
    z.into_iter()
        .map(|w| {
            let r = w.norm();
            if r > 1.0 {
                w / r
            } else {
                w
            }
        })
        .collect()
}

/// Result of the fixed-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    pub z: Vec<Complex64>,
    pub t: Vec<Complex64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub fallback_used: bool,
    pub consistency: ConsistencyLog,
}

struct SolveState<'a> {
    pipeline: &'a Pipeline,
    log: ConsistencyLog,
    evaluations: usize,
    best: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

impl SolveState<'_> {
    fn eval(&mut self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let ev = self.pipeline.residual_t(z)?;
        self.log.checks += 1;
        self.log.max_discrepancy = self.log.max_discrepancy.max(ev.discrepancy);
        self.evaluations += 1;
        let res = linalg::max_norm(&ev.direct);
        if self
            .best
            .as_ref()
            .is_none_or(|b| res < linalg::max_norm(&b.1))
        {
            self.best = Some((z.to_vec(), ev.direct.clone()));
        }
        Ok(ev.direct)
    }

    fn finish(
        &self,
        z: Vec<Complex64>,
        t: Vec<Complex64>,
        iterations: usize,
        fallback_used: bool,
    ) -> FixedPointOutcome {
        FixedPointOutcome {
            z,
            t,
            iterations,
            evaluations: self.evaluations,
            fallback_used,
            consistency: self.log,
        }
    }

    /// Real residual vector `δ⁻¹M⁻¹T(z)` split into real and imaginary parts.
    fn scaled(&self, t: &[Complex64]) -> Vec<f64> {
        let s = self.pipeline.nodes.apply_inverse(t);
        let inv = 1.0 / self.pipeline.delta.delta;
        s.iter().flat_map(|c| [c.re * inv, c.im * inv]).collect()
    }

    #[allow(clippy::type_complexity)]
    fn levenberg_marquardt(
        &mut self,
        mut z: Vec<Complex64>,
        opts: &AnnihilatorOptions,
    ) -> Result<(Option<(Vec<Complex64>, Vec<Complex64>)>, usize)> {
        let n = z.len();
        let mut t = self.eval(&z)?;
        let mut r = self.scaled(&t);
        let mut cost: f64 = r.iter().map(|v| v * v).sum();
        let mut mu = 1e-3;
        for it in 0..opts.fallback_iterations {
            if linalg::max_norm(&t) <= opts.tol {
                return Ok((Some((z, t)), it + 1));
            }
            // Forward differences, stepping inward at the disk boundary.
            let h = 1e-7;
            let mut jac = DMatrix::zeros(2 * n, 2 * n);
            for col in 0..2 * n {
                let dir = if col % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                let mut zp = z.clone();
                let mut step = h;
                if (zp[col / 2] + dir * h).norm() > 1.0 {
                    step = -h;
                }
                zp[col / 2] += dir * step;
                let tp = self.eval(&zp)?;
                let rp = self.scaled(&tp);
                for row in 0..2 * n {
                    jac[(row, col)] = (rp[row] - r[row]) / step;
                }
            }
            let jt = jac.transpose();
            let normal = &jt * &jac;
            let grad = &jt * nalgebra::DVector::from_column_slice(&r);
            let mut accepted = false;
            for _ in 0..10 {
                let mut a = normal.clone();
                for i in 0..2 * n {
                    a[(i, i)] += mu * (1.0 + normal[(i, i)]);
                }
                let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
                let Ok(dx) = linalg::solve(a, &neg) else {
                    mu *= 10.0;
                    continue;
                };
                let cand = project(
                    (0..n)
                        .map(|j| z[j] + Complex64::new(dx[2 * j], dx[2 * j + 1]))
                        .collect(),
                );
                let tc = self.eval(&cand)?;
                let rc = self.scaled(&tc);
                let cc: f64 = rc.iter().map(|v| v * v).sum();
                if cc < cost {
                    z = cand;
                    t = tc;
                    r = rc;
                    cost = cc;
                    mu = (mu * 0.3).max(1e-12);
                    accepted = true;
                    break;
                }
                mu *= 10.0;
            }
            if !accepted {
                return Ok((None, it + 1));
            }
        }
        if linalg::max_norm(&t) <= opts.tol {
            return Ok((Some((z, t)), opts.fallback_iterations));
        }
        Ok((None, opts.fallback_iterations))
    }
}

/// `θ*_z`: `φ` plus, for every node, the window phase `θ_{δ,z_j}` moved onto
/// `[t_j − δ, t_j + δ]`. The offsets `2π(j − 1)` come from the full `2π` rise of the
/// windows to the left.
pub fn assemble_theta_star(
    z: &[Complex64],
    phi: &SmoothPhase,
    nodes: &NodeSelection,
    delta: f64,
) -> Result<SmoothPhase> {
    if z.len() != nodes.len() {
        return Err(Error::invalid("one z component per node"));
    }
    let m = Mollifier::shared();
    let mut theta = phi.clone();
    for (&t_j, &z_j) in nodes.nodes().iter().zip(z) {
        let w = window_phase(z_j, delta, m.clone())?;
        theta = theta.sum(&w.affine_image(delta, t_j));
    }
    Ok(theta)
}

/// Output of [`solve_annihilator`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorResult {
    pub z0: Vec<Complex64>,
    pub theta: SmoothPhase,
    /// `∫ f_k e^{iθ}` over the working family.
    pub residuals: Vec<Complex64>,
    /// `∫ f_k e^{iθ}` over the functions as given.
    pub input_residuals: Vec<Complex64>,
    /// Indices (into the possibly packed input) of the independent working family.
    pub working_indices: Vec<usize>,
    pub packed: bool,
    pub pipeline: Option<Pipeline>,
    pub norm_report: NormReport,
    pub iterations: usize,
    pub evaluations: usize,
    pub fallback_used: bool,
    pub consistency: ConsistencyLog,
}

impl AnnihilatorResult {
    pub fn max_residual(&self) -> f64 {
        linalg::max_norm(&self.residuals)
    }

    pub fn max_input_residual(&self) -> f64 {
        linalg::max_norm(&self.input_residuals)
    }
}

/// Builds a smooth `θ` with `|∫₀¹ f_k e^{iθ}| ≤ opts.tol` for every `k`.
pub fn solve_annihilator(
    fs: &[PiecewiseComplexFunction],
    opts: &AnnihilatorOptions,
) -> Result<AnnihilatorResult> {
    if fs.is_empty() {
        return Err(Error::invalid("need at least one function"));
    }
    opts.validate()?;
    let packed = opts.pack_real && fs.iter().all(|f| f.is_real()) && fs.len() > 1;
    let family = if packed {
        pack_real_pairs(fs)?
    } else {
        fs.to_vec()
    };
    let working_indices = independent_subset(&family, opts.gram_tol);
    let working: Vec<PiecewiseComplexFunction> =
        working_indices.iter().map(|&i| family[i].clone()).collect();
    let cfg = &opts.quadrature;

    if working.is_empty() {
        let theta = SmoothPhase::constant(0.0);
        let input_residuals =
            integrate_family_against_phase(fs, &theta, &IntervalMask::full(), cfg)?.values;
        return Ok(AnnihilatorResult {
            z0: Vec::new(),
            norm_report: sobolev_report(&theta, opts.norm_p, 0, cfg)?,
            theta,
            residuals: Vec::new(),
            input_residuals,
            working_indices,
            packed,
            pipeline: None,
            iterations: 0,
            evaluations: 0,
            fallback_used: false,
            consistency: ConsistencyLog {
                checks: 0,
                max_discrepancy: 0.0,
                limit: 10.0 * cfg.abs_tol,
            },
        });
    }

    let pipeline = Pipeline::build(working, opts)?;
    let outcome = pipeline.solve(opts)?;
    let theta = pipeline.assemble(&outcome.z)?;
    let input_residuals =
        integrate_family_against_phase(fs, &theta, &IntervalMask::full(), cfg)?.values;
    let norm_report = sobolev_report(&theta, opts.norm_p, pipeline.nodes.len(), cfg)?;
    Ok(AnnihilatorResult {
        z0: outcome.z,
        theta,
        residuals: outcome.t,
        input_residuals,
        working_indices,
        packed,
        pipeline: Some(pipeline),
        norm_report,
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        fallback_used: outcome.fallback_used,
        consistency: outcome.consistency,
    })
}
