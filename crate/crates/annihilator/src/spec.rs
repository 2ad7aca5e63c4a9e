//! Problem files.

use annihilator_core::{AnnihilatorOptions, HobbyRiceOptions, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::dto::FunctionSpec;
use crate::error::InputError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Annihilate,
    HobbyRice,
    Scaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Target for `max_k |∫ f_k e^{iθ}|`.
    pub residual: f64,
    pub quadrature_abs: f64,
    pub quadrature_rel: f64,
    pub hobby_rice: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let a = AnnihilatorOptions::default();
        Tolerances {
            residual: a.tol,
            quadrature_abs: a.quadrature.abs_tol,
            quadrature_rel: a.quadrature.rel_tol,
            hobby_rice: a.hobby_rice.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub grid_points_per_piece: usize,
    pub margin_threshold: f64,
    pub z_grid_resolution: usize,
    pub damping: f64,
    pub max_iterations: usize,
    pub fallback_starts: usize,
    pub hobby_rice_seeds: usize,
    pub pack_real: bool,
    /// Exponent of the seminorm in annihilate reports.
    pub norm_p: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let a = AnnihilatorOptions::default();
        SolverOptions {
            grid_points_per_piece: a.grid_points_per_piece,
            margin_threshold: a.margin_threshold,
            z_grid_resolution: a.z_grid_resolution,
            damping: a.damping,
            max_iterations: a.max_iterations,
            fallback_starts: a.fallback_starts,
            hobby_rice_seeds: a.hobby_rice.seeds,
            pack_real: a.pack_real,
            norm_p: a.norm_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSpec {
    pub p: f64,
    pub levels: Vec<u32>,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec {
            p: 2.0,
            levels: (1..=6).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<String>,
    /// θ samples (annihilate) or the seminorm trend (scaling).
    pub csv: Option<String>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub functions: Vec<FunctionSpec>,
    pub mode: Mode,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: SolverOptions,
    #[serde(default)]
    pub scaling: ScalingSpec,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(functions: Vec<FunctionSpec>, mode: Mode) -> Self {
        ProblemSpec {
            functions,
            mode,
            tolerances: Tolerances::default(),
            options: SolverOptions::default(),
            scaling: ScalingSpec::default(),
            outputs: Outputs::default(),
            seed: 0,
        }
    }

    /// Parses JSON, reporting syntax and type errors with line and column.
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(InputError::from_json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem specs always serialize")
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if self.functions.is_empty() {
            return Err(InputError::Invalid(
                "at least one function is required".into(),
            ));
        }
        if self.mode == Mode::Scaling && self.functions.len() != 1 {
            return Err(InputError::Invalid(
                "scaling mode takes exactly one function".into(),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("quadrature_abs", t.quadrature_abs),
            ("quadrature_rel", t.quadrature_rel),
            ("hobby_rice", t.hobby_rice),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(InputError::Invalid(format!(
                    "tolerance {name} must be positive"
                )));
            }
        }
        if self.mode == Mode::Scaling {
            if !(self.scaling.p > 1.0 && self.scaling.p.is_finite()) {
                return Err(InputError::Invalid("scaling needs p > 1".into()));
            }
            if self.scaling.levels.is_empty() {
                return Err(InputError::Invalid(
                    "scaling needs at least one level".into(),
                ));
            }
        }
        if self.outputs.grid.is_some_and(|g| g < 2) {
            return Err(InputError::Invalid(
                "sample grid needs at least 2 points".into(),
            ));
        }
        for (i, f) in self.functions.iter().enumerate() {
            f.to_function()
                .map_err(|e| InputError::Invalid(format!("function {i}: {e}")))?;
        }
        self.annihilator_options()
            .validate()
            .map_err(|e| InputError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn annihilator_options(&self) -> AnnihilatorOptions {
        let o = &self.options;
        let t = &self.tolerances;
        AnnihilatorOptions {
            tol: t.residual,
            quadrature: QuadratureConfig {
                abs_tol: t.quadrature_abs,
                rel_tol: t.quadrature_rel,
                ..QuadratureConfig::default()
            },
            grid_points_per_piece: o.grid_points_per_piece,
            margin_threshold: o.margin_threshold,
            z_grid_resolution: o.z_grid_resolution,
            damping: o.damping,
            max_iterations: o.max_iterations,
            fallback_starts: o.fallback_starts,
            hobby_rice: self.hobby_rice_options(),
            seed: self.seed,
            pack_real: o.pack_real,
            norm_p: o.norm_p,
            ..AnnihilatorOptions::default()
        }
    }

    /// The default seed offset by `seed`, so seed 0 reproduces the library defaults.
    pub fn hobby_rice_options(&self) -> HobbyRiceOptions {
        let d = HobbyRiceOptions::default();
        HobbyRiceOptions {
            tol: self.tolerances.hobby_rice,
            seeds: self.options.hobby_rice_seeds,
            seed: d.seed.wrapping_add(self.seed),
            ..d
        }
    }
}

/// Parses a bare JSON array of functions.
pub fn functions_from_json(text: &str) -> Result<Vec<FunctionSpec>, InputError> {
    serde_json::from_str(text).map_err(InputError::from_json)
}

/// Parses one function.
pub fn function_from_json(text: &str) -> Result<FunctionSpec, InputError> {
    serde_json::from_str(text).map_err(InputError::from_json)
}

/// Accepts either a full problem spec or a bare function list, which gets `mode`.
pub fn problem_from_json(text: &str, mode: Mode) -> Result<ProblemSpec, InputError> {
    if text.trim_start().starts_with('[') {
        let spec = ProblemSpec::new(functions_from_json(text)?, mode);
        spec.validate()?;
        Ok(spec)
    } else {
        ProblemSpec::from_json(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_fills_defaults() {
        let spec = ProblemSpec::from_json(r#"{"functions":[1],"mode":"annihilate"}"#).unwrap();
        assert_eq!(spec.tolerances, Tolerances::default());
        assert_eq!(spec.annihilator_options(), AnnihilatorOptions::default());
    }

    #[test]
    fn syntax_error_has_position() {
        let err = ProblemSpec::from_json("{\n  \"functions\": [1,\n  \"mode\": }").unwrap_err();
        match err {
            InputError::Json { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_empty_and_bad_tolerances() {
        assert!(ProblemSpec::from_json(r#"{"functions":[],"mode":"annihilate"}"#).is_err());
        assert!(ProblemSpec::from_json(
            r#"{"functions":[1],"mode":"annihilate","tolerances":{"residual":0}}"#
        )
        .is_err());
        assert!(ProblemSpec::from_json(r#"{"functions":[1],"mode":"nope"}"#).is_err());
    }
}
