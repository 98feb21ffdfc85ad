//! Cost-landscape scans.
//!
//! [`grid_scan`] evaluates C(beta, gamma) on a Cartesian grid for
//! single-layer circuits; [`random_plane_scan`] projects deeper
//! parameter spaces onto a seeded random orthonormal plane through a
//! center point. Grids serialize to CSV with their full metadata so
//! every evaluated parameter point can be reconstructed from the file
//! alone.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::{QaoaObjective, QaoaParams};

#[derive(Debug, Error)]
pub enum LandscapeError {
    #[error("grid scans need a single layer; use a random-plane scan for p = {0}")]
    NotSingleLayer(usize),
    #[error("resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),
    #[error("random directions degenerate after orthonormalization; reseed")]
    DegenerateDirections,
    #[error("direction vectors must have dimension {expected}, got {got}")]
    DirectionDimension { expected: usize, got: usize },
    #[error("malformed scan file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scan axis: inclusive range sampled at `resolution` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub resolution: usize,
}

impl AxisSpec {
    pub fn new(name: &str, range: (f64, f64), resolution: usize) -> Self {
        Self {
            name: name.to_string(),
            start: range.0,
            end: range.1,
            resolution,
        }
    }

    /// Coordinate of grid index `k`. Index 0 is `start`, the last index
    /// is exactly `end`; reconstruction from a scan file uses this same
    /// formula, bit for bit.
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.resolution {
            self.end
        } else {
            self.start + (self.end - self.start) * k as f64 / (self.resolution - 1) as f64
        }
    }
}

/// Scan provenance carried in the CSV header.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanMetadata {
    /// Identifier of the scanned Hamiltonian.
    pub label: String,
    pub layers: usize,
    pub s: f64,
    pub penalty_factors: Vec<f64>,
    /// Seed of the direction draw (random-plane scans).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Plane center in flat parameter layout (random-plane scans).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<Vec<f64>>,
}

/// A scanned landscape: `values[i][j]` is the objective at axis-0 index
/// `i` and axis-1 index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub axis0: AxisSpec,
    pub axis1: AxisSpec,
    pub values: Vec<Vec<f64>>,
    pub metadata: ScanMetadata,
}

impl ScanGrid {
    /// Reconstruct the flat parameter point of one grid node.
    pub fn point(&self, i: usize, j: usize) -> Vec<f64> {
        let a = self.axis0.value(i);
        let b = self.axis1.value(j);
        match (&self.metadata.center, &self.metadata.theta1, &self.metadata.theta2) {
            (Some(center), Some(t1), Some(t2)) => center
                .iter()
                .zip(t1.iter().zip(t2))
                .map(|(c, (u, v))| c + a * u + b * v)
                .collect(),
            _ => vec![a, b],
        }
    }

    /// CSV layout: `# key=value` metadata comments, then a header row
    /// with the axis-1 coordinates, then one row per axis-0 coordinate.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# label={}", self.metadata.label)?;
        writeln!(w, "# layers={}", self.metadata.layers)?;
        writeln!(w, "# s={}", self.metadata.s)?;
        let joined = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(w, "# penalty_factors={}", joined(&self.metadata.penalty_factors))?;
        if let Some(seed) = self.metadata.seed {
            writeln!(w, "# seed={seed}")?;
        }
        if let Some(center) = &self.metadata.center {
            writeln!(w, "# center={}", joined(center))?;
        }
        if let Some(t1) = &self.metadata.theta1 {
            writeln!(w, "# theta1={}", joined(t1))?;
        }
        if let Some(t2) = &self.metadata.theta2 {
            writeln!(w, "# theta2={}", joined(t2))?;
        }
        for (axis, which) in [(&self.axis0, 0), (&self.axis1, 1)] {
            writeln!(
                w,
                "# axis{which} name={} start={} end={} resolution={}",
                axis.name, axis.start, axis.end, axis.resolution
            )?;
        }
        let header: Vec<String> = (0..self.axis1.resolution)
            .map(|j| self.axis1.value(j).to_string())
            .collect();
        writeln!(w, "{}\\{},{}", self.axis0.name, self.axis1.name, header.join(","))?;
        for (i, row) in self.values.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", self.axis0.value(i), cells.join(","))?;
        }
        Ok(())
    }

    /// Parse a grid back from its CSV form.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, LandscapeError> {
        let mut metadata = ScanMetadata::default();
        let mut axes: [Option<AxisSpec>; 2] = [None, None];
        let mut values: Vec<Vec<f64>> = Vec::new();
        let parse_list = |s: &str| -> Result<Vec<f64>, LandscapeError> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(';')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| LandscapeError::Malformed(format!("bad float {t}: {e}")))
                })
                .collect()
        };
        let mut header_seen = false;
        for line in r.lines() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some(spec) = rest.strip_prefix("axis") {
                    let (which, fields) = spec.split_once(' ').ok_or_else(|| {
                        LandscapeError::Malformed("axis line without fields".into())
                    })?;
                    let idx: usize = which
                        .parse()
                        .map_err(|e| LandscapeError::Malformed(format!("bad axis index: {e}")))?;
                    let mut axis = AxisSpec::new("", (0.0, 1.0), 2);
                    for field in fields.split(' ') {
                        let (k, v) = field.split_once('=').ok_or_else(|| {
                            LandscapeError::Malformed(format!("bad axis field {field}"))
                        })?;
                        match k {
                            "name" => axis.name = v.to_string(),
                            "start" => {
                                axis.start = v.parse().map_err(|e| {
                                    LandscapeError::Malformed(format!("bad start: {e}"))
                                })?
                            }
                            "end" => {
                                axis.end = v.parse().map_err(|e| {
                                    LandscapeError::Malformed(format!("bad end: {e}"))
                                })?
                            }
                            "resolution" => {
                                axis.resolution = v.parse().map_err(|e| {
                                    LandscapeError::Malformed(format!("bad resolution: {e}"))
                                })?
                            }
                            _ => {}
                        }
                    }
                    if idx < 2 {
                        axes[idx] = Some(axis);
                    }
                    continue;
                }
                if let Some((key, value)) = rest.split_once('=') {
                    match key {
                        "label" => metadata.label = value.to_string(),
                        "layers" => {
                            metadata.layers = value.parse().map_err(|e| {
                                LandscapeError::Malformed(format!("bad layers: {e}"))
                            })?
                        }
                        "s" => {
                            metadata.s = value
                                .parse()
                                .map_err(|e| LandscapeError::Malformed(format!("bad s: {e}")))?
                        }
                        "penalty_factors" => metadata.penalty_factors = parse_list(value)?,
                        "seed" => {
                            metadata.seed = Some(value.parse().map_err(|e| {
                                LandscapeError::Malformed(format!("bad seed: {e}"))
                            })?)
                        }
                        "center" => metadata.center = Some(parse_list(value)?),
                        "theta1" => metadata.theta1 = Some(parse_list(value)?),
                        "theta2" => metadata.theta2 = Some(parse_list(value)?),
                        _ => {}
                    }
                    continue;
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let row: Result<Vec<f64>, _> = line
                .split(',')
                .skip(1)
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| LandscapeError::Malformed(format!("bad value {t}: {e}")))
                })
                .collect();
            values.push(row?);
        }
        let axis0 = axes[0]
            .take()
            .ok_or_else(|| LandscapeError::Malformed("missing axis0".into()))?;
        let axis1 = axes[1]
            .take()
            .ok_or_else(|| LandscapeError::Malformed("missing axis1".into()))?;
        if values.len() != axis0.resolution
            || values.iter().any(|r| r.len() != axis1.resolution)
        {
            return Err(LandscapeError::Malformed(
                "matrix shape does not match axis resolutions".into(),
            ));
        }
        Ok(Self {
            axis0,
            axis1,
            values,
            metadata,
        })
    }
}

/// Evaluate C on a (beta, gamma) grid. Single-layer circuits only;
/// endpoints are inclusive. Grid nodes are independent and evaluated in
/// parallel.
pub fn grid_scan(
    objective: &QaoaObjective,
    beta_range: (f64, f64),
    gamma_range: (f64, f64),
    resolution: usize,
) -> Result<ScanGrid, LandscapeError> {
    if objective.layers() != 1 {
        return Err(LandscapeError::NotSingleLayer(objective.layers()));
    }
    if resolution < 2 {
        return Err(LandscapeError::ResolutionTooSmall(resolution));
    }
    let axis0 = AxisSpec::new("beta", beta_range, resolution);
    let axis1 = AxisSpec::new("gamma", gamma_range, resolution);
    let values: Vec<Vec<f64>> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let beta = axis0.value(i);
            (0..resolution)
                .map(|j| {
                    let gamma = axis1.value(j);
                    let params = QaoaParams::new(vec![beta], vec![gamma]).expect("p = 1");
                    objective.value_at(&params, (i * resolution + j) as u64)
                })
                .collect()
        })
        .collect();
    Ok(ScanGrid {
        axis0,
        axis1,
        values,
        metadata: ScanMetadata {
            layers: 1,
            ..ScanMetadata::default()
        },
    })
}

/// Scan the plane `center + a * theta1 + b * theta2` with explicitly
/// given directions (no orthonormalization is applied).
pub fn plane_scan_with_directions(
    objective: &QaoaObjective,
    center: &QaoaParams,
    theta1: &[f64],
    theta2: &[f64],
    a_range: (f64, f64),
    b_range: (f64, f64),
    resolution: usize,
) -> Result<ScanGrid, LandscapeError> {
    if resolution < 2 {
        return Err(LandscapeError::ResolutionTooSmall(resolution));
    }
    let dim = objective.dimension();
    for t in [theta1, theta2] {
        if t.len() != dim {
            return Err(LandscapeError::DirectionDimension {
                expected: dim,
                got: t.len(),
            });
        }
    }
    let center_flat = center.to_flat();
    if center_flat.len() != dim {
        return Err(LandscapeError::DirectionDimension {
            expected: dim,
            got: center_flat.len(),
        });
    }
    let axis0 = AxisSpec::new("a", a_range, resolution);
    let axis1 = AxisSpec::new("b", b_range, resolution);
    let values: Vec<Vec<f64>> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let a = axis0.value(i);
            (0..resolution)
                .map(|j| {
                    let b = axis1.value(j);
                    let flat: Vec<f64> = center_flat
                        .iter()
                        .zip(theta1.iter().zip(theta2))
                        .map(|(c, (u, v))| c + a * u + b * v)
                        .collect();
                    let params = QaoaParams::from_flat(&flat).expect("even dimension");
                    objective.value_at(&params, (i * resolution + j) as u64)
                })
                .collect()
        })
        .collect();
    Ok(ScanGrid {
        axis0,
        axis1,
        values,
        metadata: ScanMetadata {
            layers: objective.layers(),
            center: Some(center_flat),
            theta1: Some(theta1.to_vec()),
            theta2: Some(theta2.to_vec()),
            ..ScanMetadata::default()
        },
    })
}

/// Scan a seeded random orthonormal plane through `center`. The drawn
/// directions are recorded in the grid metadata.
pub fn random_plane_scan(
    objective: &QaoaObjective,
    center: &QaoaParams,
    seed: u64,
    a_range: (f64, f64),
    b_range: (f64, f64),
    resolution: usize,
) -> Result<ScanGrid, LandscapeError> {
    let dim = objective.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| rng.sample(StandardNormal)).collect()
    };
    let mut theta1 = draw(&mut rng);
    let norm1 = theta1.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm1 < 1e-12 {
        return Err(LandscapeError::DegenerateDirections);
    }
    theta1.iter_mut().for_each(|v| *v /= norm1);
    let mut theta2 = draw(&mut rng);
    let dot: f64 = theta1.iter().zip(&theta2).map(|(a, b)| a * b).sum();
    for (t2, t1) in theta2.iter_mut().zip(&theta1) {
        *t2 -= dot * t1;
    }
    let norm2 = theta2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm2 < 1e-12 {
        return Err(LandscapeError::DegenerateDirections);
    }
    theta2.iter_mut().for_each(|v| *v /= norm2);

    let mut grid = plane_scan_with_directions(
        objective, center, &theta1, &theta2, a_range, b_range, resolution,
    )?;
    grid.metadata.seed = Some(seed);
    Ok(grid)
}
