//! Machine-readable reports. Nothing here depends on timing, so equal inputs give equal bytes.

use annihilator_core::annihilator::ConsistencyLog;
use annihilator_core::sobolev::ScalingLevel;
use annihilator_core::{AnnihilatorResult, NormReport, SignPattern, SmoothPhase};
use serde::Serialize;

use crate::dto::{complex_list, ComplexDto};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsDto {
    pub p: f64,
    pub n: usize,
    pub total_variation: f64,
    pub seminorm_phase: f64,
    pub norm_exp_phase: f64,
    pub norm_exp_phase_w11: f64,
    pub norm_phase: f64,
    pub max_abs_phase: f64,
    pub bound_tv: f64,
    pub bound_exp_w11: f64,
    pub bound_phase_w11: f64,
    pub bound_max_abs: f64,
    pub tv_satisfied: bool,
    pub exp_norm_satisfied: bool,
    pub phase_norm_satisfied: bool,
    pub max_abs_satisfied: bool,
}

impl From<&NormReport> for NormsDto {
    fn from(r: &NormReport) -> Self {
        NormsDto {
            p: r.p,
            n: r.n,
            total_variation: r.total_variation,
            seminorm_phase: r.seminorm_phase,
            norm_exp_phase: r.norm_exp_phase,
            norm_exp_phase_w11: r.norm_exp_phase_w11,
            norm_phase: r.norm_phase,
            max_abs_phase: r.max_abs_phase,
            bound_tv: r.bound_tv,
            bound_exp_w11: r.bound_5pin_plus_1,
            bound_phase_w11: r.bound_7n1_pi,
            bound_max_abs: r.bound_max_abs,
            tv_satisfied: r.tv_satisfied,
            exp_norm_satisfied: r.exp_norm_satisfied,
            phase_norm_satisfied: r.phase_norm_satisfied,
            max_abs_satisfied: r.max_abs_satisfied,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TermDto {
    pub center: f64,
    pub width: f64,
    pub jump: f64,
}

/// `θ(t) = base + Σ jump·Ψ((t − center)/width)`.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaDto {
    pub base: f64,
    pub terms: Vec<TermDto>,
}

impl From<&SmoothPhase> for ThetaDto {
    fn from(theta: &SmoothPhase) -> Self {
        ThetaDto {
            base: theta.base_value(),
            terms: theta
                .terms()
                .iter()
                .map(|t| TermDto {
                    center: t.center,
                    width: t.width,
                    jump: t.jump,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateDto {
    pub delta: f64,
    pub margin_sum: f64,
    pub margin_threshold: f64,
    pub per_node_margins: Vec<f64>,
    pub sampled_margins: Vec<f64>,
    pub z_grid_resolution: usize,
    pub margin_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiDto {
    pub eta: f64,
    pub eta_halvings: usize,
    pub scaled_offset: f64,
    pub switch_points: Vec<f64>,
    pub leading_sign: i8,
    pub hobby_rice_functions: usize,
    pub masked_discontinuities: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyDto {
    pub checks: usize,
    pub max_discrepancy: f64,
    pub limit: f64,
}

impl From<&ConsistencyLog> for ConsistencyDto {
    fn from(c: &ConsistencyLog) -> Self {
        ConsistencyDto {
            checks: c.checks,
            max_discrepancy: c.max_discrepancy,
            limit: c.limit,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub working_indices: Vec<usize>,
    pub packed: bool,
    pub nodes: Vec<f64>,
    pub z0: Vec<ComplexDto>,
    pub residuals: Vec<ComplexDto>,
    pub input_residuals: Vec<ComplexDto>,
    pub max_residual: f64,
    pub max_input_residual: f64,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub certificate: Option<CertificateDto>,
    pub phi: Option<PhiDto>,
    pub norms: NormsDto,
    pub iterations: usize,
    pub evaluations: usize,
    pub fallback_used: bool,
    pub consistency: ConsistencyDto,
    pub theta: ThetaDto,
}

impl From<&AnnihilatorResult> for Solution {
    fn from(r: &AnnihilatorResult) -> Self {
        let pl = r.pipeline.as_ref();
        Solution {
            working_indices: r.working_indices.clone(),
            packed: r.packed,
            nodes: pl.map(|p| p.nodes().nodes().to_vec()).unwrap_or_default(),
            z0: complex_list(&r.z0),
            residuals: complex_list(&r.residuals),
            input_residuals: complex_list(&r.input_residuals),
            max_residual: r.max_residual(),
            max_input_residual: r.max_input_residual(),
            delta: pl.map(|p| p.delta().delta),
            eta: pl.map(|p| p.phi().eta),
            certificate: pl.map(|p| {
                let c = p.delta();
                CertificateDto {
                    delta: c.delta,
                    margin_sum: c.margin_sum(),
                    margin_threshold: c.margin_threshold,
                    per_node_margins: c.per_node_margins.clone(),
                    sampled_margins: c.sampled_margins.clone(),
                    z_grid_resolution: c.z_grid_resolution,
                    margin_history: c.margin_history.clone(),
                }
            }),
            phi: pl.map(|p| {
                let phi = p.phi();
                PhiDto {
                    eta: phi.eta,
                    eta_halvings: phi.eta_halvings,
                    scaled_offset: phi.scaled_offset,
                    switch_points: phi.sign_pattern.switch_points().to_vec(),
                    leading_sign: phi.sign_pattern.leading_sign(),
                    hobby_rice_functions: phi.hobby_rice_functions,
                    masked_discontinuities: phi.masked_discontinuities,
                }
            }),
            norms: (&r.norm_report).into(),
            iterations: r.iterations,
            evaluations: r.evaluations,
            fallback_used: r.fallback_used,
            consistency: (&r.consistency).into(),
            theta: (&r.theta).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnihilateReport {
    pub mode: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub functions: usize,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HobbyRiceReport {
    pub mode: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Real and imaginary parts handed to the solver, in input order.
    pub parts: Vec<String>,
    pub switch_points: Vec<f64>,
    pub leading_sign: i8,
    pub residuals: Vec<f64>,
}

impl HobbyRiceReport {
    pub fn from_pattern(parts: Vec<String>, s: &SignPattern, residuals: Vec<f64>) -> Self {
        HobbyRiceReport {
            mode: "hobby-rice",
            status: Status::Ok,
            error: None,
            parts,
            switch_points: s.switch_points().to_vec(),
            leading_sign: s.leading_sign(),
            residuals,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDto {
    pub n: u32,
    pub theoretical_factor: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Upper bound on the infimum over all annihilators.
    pub seminorm_power: Option<f64>,
    pub identity_error: Option<f64>,
    pub membership_residual: Option<f64>,
    pub membership_bound: Option<f64>,
    pub solver_residual: Option<f64>,
    pub delta: Option<f64>,
}

impl From<&ScalingLevel> for LevelDto {
    fn from(l: &ScalingLevel) -> Self {
        let m = l.outcome.as_ref().ok();
        LevelDto {
            n: l.n,
            theoretical_factor: l.theoretical_factor,
            status: if m.is_some() {
                Status::Ok
            } else {
                Status::Failed
            },
            error: l.outcome.as_ref().err().map(|e| e.to_string()),
            seminorm_power: m.map(|m| m.seminorm_power),
            identity_error: m.map(|m| m.identity_error),
            membership_residual: m.map(|m| m.membership_residual),
            membership_bound: m.map(|m| m.membership_bound),
            solver_residual: m.map(|m| m.solver_residual),
            delta: m.map(|m| m.delta),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReportDto {
    pub mode: &'static str,
    pub status: Status,
    pub p: f64,
    pub seed: u64,
    pub note: &'static str,
    pub levels: Vec<LevelDto>,
    /// Consecutive seminorm ratios, `None` where a level failed.
    pub seminorm_ratios: Vec<Option<f64>>,
    pub strictly_increasing: bool,
}

pub const SEMINORM_NOTE: &str =
    "seminorms are those of the constructed annihilators: upper bounds on the infimum, not its value";

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}
