//! Plot-ready CSV samples.

use std::path::Path;

use annihilator_core::SmoothPhase;

use crate::error::OutputError;

/// `(t, θ, θ', cos θ, sin θ)` on `grid_size` uniform points including both endpoints.
pub fn sample_rows(theta: &SmoothPhase, grid_size: usize) -> Result<Vec<[f64; 5]>, OutputError> {
    if grid_size < 2 {
        return Err(OutputError::Grid(grid_size));
    }
    let last = (grid_size - 1) as f64;
    Ok((0..grid_size)
        .map(|i| {
            let t = if i + 1 == grid_size {
                1.0
            } else {
                i as f64 / last
            };
            let v = theta.eval(t);
            // `+ 0.0` turns −0 into 0.
            [t, v, theta.eval_deriv(t), v.cos(), v.sin()].map(|x| x + 0.0)
        })
        .collect())
}

pub fn export_samples(
    theta: &SmoothPhase,
    grid_size: usize,
    path: impl AsRef<Path>,
) -> Result<(), OutputError> {
    let path = path.as_ref();
    let rows = sample_rows(theta, grid_size)?;
    let csv_err = |source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "theta", "dtheta", "re", "im"])
        .map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}
