//! JSON forms of functions and small numeric values.

use annihilator_core::{Complex64, PiecewiseComplexFunction};
use serde::{Deserialize, Serialize};

/// A function as written in a problem file.
///
/// A bare number is shorthand for a real constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Constant(f64),
    Piecewise {
        breakpoints: Vec<f64>,
        pieces: Vec<PieceSpec>,
    },
}

/// Coefficients in ascending degree. A missing `im` means a real piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl FunctionSpec {
    pub fn to_function(&self) -> annihilator_core::Result<PiecewiseComplexFunction> {
        match self {
            FunctionSpec::Constant(c) => PiecewiseComplexFunction::real_polynomial(&[*c]),
            FunctionSpec::Piecewise {
                breakpoints,
                pieces,
            } => {
                let pieces = pieces
                    .iter()
                    .map(|p| {
                        let im = p.im.as_deref().unwrap_or(&[]);
                        let len = p.re.len().max(im.len());
                        (0..len)
                            .map(|k| {
                                Complex64::new(
                                    p.re.get(k).copied().unwrap_or(0.0),
                                    im.get(k).copied().unwrap_or(0.0),
                                )
                            })
                            .collect()
                    })
                    .collect();
                PiecewiseComplexFunction::new(breakpoints.clone(), pieces)
            }
        }
    }

    pub fn from_function(f: &PiecewiseComplexFunction) -> Self {
        let pieces = f
            .pieces()
            .iter()
            .map(|p| PieceSpec {
                re: p.iter().map(|c| c.re).collect(),
                im: p
                    .iter()
                    .any(|c| c.im != 0.0)
                    .then(|| p.iter().map(|c| c.im).collect()),
            })
            .collect();
        FunctionSpec::Piecewise {
            breakpoints: f.breakpoints().to_vec(),
            pieces,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDto {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexDto {
    fn from(c: Complex64) -> Self {
        ComplexDto { re: c.re, im: c.im }
    }
}

pub fn complex_list(v: &[Complex64]) -> Vec<ComplexDto> {
    v.iter().map(|&c| c.into()).collect()
}
