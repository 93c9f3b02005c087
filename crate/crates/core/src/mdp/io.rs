//! JSON wait-map files.
//!
//! Layout: `{format_version, grid{dims}, motion_model, config, arrays,
//! metadata, content_hash}`. Arrays run over every cell in row-major order
//! with `dx` outermost, the `Out` and `LoWC` cells last. `content_hash` is
//! the hex SHA-256 of the document serialized with an empty hash field.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::MdpConfig;
use super::grid::{Axis, StateGrid, AXIS_NAMES};
use super::kernel::Action;
use super::map::{MapMetadata, WaitMap};
use super::motion::IntruderMotionModel;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Dim {
    name: String,
    #[serde(flatten)]
    axis: Axis,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridDoc {
    dims: Vec<Dim>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigDoc {
    gamma: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    dt: f64,
    class_mix: f64,
    turn_bias: f64,
    /// Everything else, so the file alone rebuilds the same map.
    full: MdpConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct Arrays {
    action: Vec<u8>,
    wait_time_s: Vec<f64>,
    value: Vec<f64>,
    reach_prob: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MapDoc {
    format_version: u32,
    grid: GridDoc,
    motion_model: IntruderMotionModel,
    config: ConfigDoc,
    arrays: Arrays,
    metadata: MapMetadata,
    content_hash: String,
}

fn digest(doc: &MapDoc) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(doc)?)))
}

fn to_doc(map: &WaitMap) -> Result<MapDoc> {
    let dims = map
        .grid
        .axes()
        .iter()
        .zip(AXIS_NAMES)
        .map(|(a, name)| Dim {
            name: name.to_string(),
            axis: **a,
        })
        .collect();
    let mut doc = MapDoc {
        format_version: FORMAT_VERSION,
        grid: GridDoc { dims },
        motion_model: map.motion_model.clone(),
        config: ConfigDoc {
            gamma: map.config.gamma,
            c1: map.config.c1,
            c2: map.config.c2,
            c3: map.config.c3,
            dt: map.config.dt,
            class_mix: map.motion_model.class_mix,
            turn_bias: map.motion_model.turn_bias,
            full: map.config,
        },
        arrays: Arrays {
            action: map.action.iter().map(|a| a.code()).collect(),
            wait_time_s: map.wait_time.clone(),
            value: map.value.clone(),
            reach_prob: map.reach_prob.clone(),
        },
        metadata: map.metadata.clone(),
        content_hash: String::new(),
    };
    doc.content_hash = digest(&doc)?;
    Ok(doc)
}

/// Serialized form of a map, as written by [`save_map`].
pub fn map_to_string(map: &WaitMap) -> Result<String> {
    Ok(serde_json::to_string(&to_doc(map)?)?)
}

pub fn save_map(map: &WaitMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = map_to_string(map)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<WaitMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text, path)
}

/// Loads a map and checks that it was built on `expected`.
pub fn load_map_expecting(path: impl AsRef<Path>, expected: &StateGrid) -> Result<WaitMap> {
    let map = load_map(path)?;
    if map.grid != *expected {
        return Err(Error::DimensionMismatch {
            expected: expected.describe(),
            found: map.grid.describe(),
        });
    }
    Ok(map)
}

fn parse_map(text: &str, path: &Path) -> Result<WaitMap> {
    let corrupt = |reason: String| Error::CorruptFile {
        path: path.to_path_buf(),
        reason,
    };
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    let version = raw
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupt("missing format_version".into()))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: version as u32,
        });
    }
    let mut doc: MapDoc = serde_json::from_value(raw).map_err(|e| corrupt(e.to_string()))?;
    let stored = std::mem::take(&mut doc.content_hash);
    let actual = digest(&doc)?;
    if stored != actual {
        return Err(corrupt(format!("content hash {stored} does not match {actual}")));
    }
    if doc.grid.dims.len() != 6 {
        return Err(corrupt(format!("expected 6 grid dims, found {}", doc.grid.dims.len())));
    }
    for (d, name) in doc.grid.dims.iter().zip(AXIS_NAMES) {
        if d.name != name {
            return Err(corrupt(format!("grid dim {} out of order (expected {name})", d.name)));
        }
    }
    let a: Vec<Axis> = doc.grid.dims.iter().map(|d| d.axis).collect();
    let grid = StateGrid {
        dx: a[0],
        dy: a[1],
        dh: a[2],
        vi: a[3],
        vh: a[4],
        theta_i: a[5],
    };
    grid.validate().map_err(|e| corrupt(e.to_string()))?;
    let n = grid.cell_count();
    let arr = &doc.arrays;
    if [arr.action.len(), arr.wait_time_s.len(), arr.value.len(), arr.reach_prob.len()]
        .iter()
        .any(|&len| len != n)
    {
        return Err(corrupt(format!("array lengths do not match {n} cells")));
    }
    let action = arr
        .action
        .iter()
        .map(|&c| Action::from_code(c).ok_or_else(|| corrupt(format!("bad action code {c}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut config = doc.config.full;
    config.gamma = doc.config.gamma;
    config.c1 = doc.config.c1;
    config.c2 = doc.config.c2;
    config.c3 = doc.config.c3;
    config.dt = doc.config.dt;
    Ok(WaitMap {
        grid,
        motion_model: doc.motion_model,
        config,
        action,
        wait_time: doc.arrays.wait_time_s,
        value: doc.arrays.value,
        reach_prob: doc.arrays.reach_prob,
        metadata: doc.metadata,
    })
}
