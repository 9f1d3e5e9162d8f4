use std::fs;
use std::path::Path;

use hyperball_core::hermitian::{validate_group, Flavor, MatrixJson, EPS_GRP};
use hyperball_core::series::LatticeConfig;
use hyperball_core::{BallPoint, GroupElement, C64};

use crate::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<MatrixJson, CliError> {
    let text = read_text(path)?;
    serde_json::from_str::<MatrixJson>(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Matrix file validated in `SU(n,1)`.
pub fn read_group(path: &Path) -> Result<GroupElement, CliError> {
    let m = read_matrix(path)?;
    Ok(validate_group(m.to_matrix()?, Flavor::SU, EPS_GRP)?)
}

pub fn read_lattice(path: &Path) -> Result<LatticeConfig, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `"re,im,re,im,..."` as a ball point.
pub fn parse_point(s: &str) -> Result<BallPoint, CliError> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("--z {s:?}: {e}")))?;
    if parts.is_empty() || parts.len() % 2 == 1 {
        return Err(CliError::Config(format!(
            "--z needs an even number of values, got {}",
            parts.len()
        )));
    }
    let coords = parts.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(BallPoint::new(coords)?)
}
