//! Fields as flat little-endian `f64` arrays with a JSON sidecar, and
//! experiment reports as JSON plus CSV.

use super::grid::Grid;
use super::pipeline::ExperimentReport;
use super::{NumericsError, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Describes `<name>.bin`: `components` blocks of `shape[0]·shape[1]·shape[2]`
/// values, each row-major with the third coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub name: String,
    pub dtype: String,
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    /// `[lo, hi]` node coordinates per axis.
    #[serde(rename = "box")]
    pub bounds: [[f64; 2]; 3],
    pub components: usize,
    pub data: String,
}

const DTYPE: &str = "f64-le";

impl FieldSidecar {
    pub fn grid(&self) -> Grid {
        Grid::new(self.shape, [0, 1, 2].map(|a| self.bounds[a][0]), self.spacing)
    }
}

fn json_err(e: serde_json::Error) -> NumericsError {
    NumericsError::Io(e.to_string())
}

/// Writes `<dir>/<name>.bin` and `<dir>/<name>.json`; returns the sidecar path.
pub fn write_field(dir: &Path, name: &str, grid: &Grid, components: &[&[f64]]) -> Result<PathBuf> {
    for c in components {
        if c.len() != grid.len() {
            return Err(NumericsError::ShapeMismatch(format!("component has {} values, grid {}", c.len(), grid.len())));
        }
    }
    fs::create_dir_all(dir)?;
    let data = format!("{name}.bin");
    let mut bytes = Vec::with_capacity(8 * grid.len() * components.len());
    for c in components {
        for v in c.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(dir.join(&data), bytes)?;
    let sidecar = FieldSidecar {
        name: name.into(),
        dtype: DTYPE.into(),
        shape: grid.n,
        spacing: grid.h,
        bounds: [0, 1, 2].map(|a| [grid.lo[a], grid.coord(a, grid.n[a] - 1)]),
        components: components.len(),
        data,
    };
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(&sidecar).map_err(json_err)?)?;
    Ok(path)
}

/// Reads a field back from its sidecar.
pub fn read_field(sidecar: &Path) -> Result<(FieldSidecar, Vec<Vec<f64>>)> {
    let meta: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar)?).map_err(json_err)?;
    if meta.dtype != DTYPE {
        return Err(NumericsError::Io(format!("unsupported dtype {}", meta.dtype)));
    }
    let dir = sidecar.parent().unwrap_or_else(|| Path::new("."));
    let bytes = fs::read(dir.join(&meta.data))?;
    let len = meta.shape.iter().product::<usize>();
    if bytes.len() != 8 * len * meta.components {
        return Err(NumericsError::Io(format!("{} holds {} bytes, expected {}", meta.data, bytes.len(), 8 * len * meta.components)));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8"))).collect();
    let comps = values.chunks(len.max(1)).take(meta.components).map(|c| c.to_vec()).collect();
    Ok((meta, comps))
}

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_JSON), serde_json::to_string_pretty(report).map_err(json_err)?)?;
    fs::write(dir.join(REPORT_CSV), report.to_csv())?;
    Ok(())
}

pub fn read_report(dir: &Path) -> Result<ExperimentReport> {
    serde_json::from_str(&fs::read_to_string(dir.join(REPORT_JSON))?).map_err(json_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let dir = std::env::temp_dir().join(format!("carnot-io-{}", std::process::id()));
        let grid = Grid::symmetric([5, 6, 7], [1.0, 2.0, 3.0], 1);
        let a = grid.sample(|p| p[0] + 10.0 * p[1] - p[2] * p[2]);
        let b: Vec<f64> = a.iter().map(|v| -v / 3.0).collect();
        let path = write_field(&dir, "phi", &grid, &[&a, &b]).unwrap();
        let (meta, comps) = read_field(&path).unwrap();
        assert_eq!(meta.grid(), grid);
        assert_eq!(comps, vec![a, b]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
