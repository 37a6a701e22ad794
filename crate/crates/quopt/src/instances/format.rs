//! Instance file formats.
//!
//! The native format is a TOML document with `name`, `capacity`, `depot` and
//! a `[[nodes]]` list of `{id, x, y, demand}`. A minimal EUC_2D text format
//! (coordinate lines plus a demand section) is accepted for loading.

use super::CvrpInstance;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Supported instance file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Native,
    Euc2d,
}

#[derive(Serialize, Deserialize)]
struct NativeDoc {
    name: String,
    capacity: u32,
    depot: usize,
    nodes: Vec<NativeNode>,
}

#[derive(Serialize, Deserialize)]
struct NativeNode {
    id: usize,
    x: f64,
    y: f64,
    demand: u32,
}

/// Parses an instance from text in the declared format.
pub fn load_instance(text: &str, format: InstanceFormat) -> Result<CvrpInstance> {
    match format {
        InstanceFormat::Native => load_native(text),
        InstanceFormat::Euc2d => load_euc2d(text),
    }
}

/// Parses the native TOML format.
pub fn load_native(text: &str) -> Result<CvrpInstance> {
    let doc: NativeDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = doc.nodes.len();
    let mut coords = vec![None; n];
    let mut demands = vec![0u32; n];
    for node in &doc.nodes {
        if node.id >= n {
            return Err(Error::Parse(format!(
                "node id {} out of range; ids must cover 0..{n}",
                node.id
            )));
        }
        if coords[node.id].is_some() {
            return Err(Error::Parse(format!("node id {} listed twice", node.id)));
        }
        coords[node.id] = Some((node.x, node.y));
        demands[node.id] = node.demand;
    }
    let coords: Vec<(f64, f64)> = coords
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("node ids must cover 0..n without gaps".into()))?;
    CvrpInstance::from_coords(doc.name, coords, doc.depot, demands, doc.capacity)
}

/// Serializes an instance to the native TOML format.
///
/// Identical instances serialize to identical bytes, and loading the output
/// reproduces the instance exactly.
pub fn write_native(inst: &CvrpInstance) -> Result<String> {
    let coords = inst
        .coords
        .as_ref()
        .ok_or_else(|| Error::Invalid("native format requires coordinates".into()))?;
    let doc = NativeDoc {
        name: inst.name.clone(),
        capacity: inst.capacity,
        depot: inst.depot,
        nodes: coords
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| NativeNode {
                id,
                x,
                y,
                demand: inst.demands[id],
            })
            .collect(),
    };
    toml::to_string(&doc).map_err(|e| Error::Invalid(format!("serialization failed: {e}")))
}

/// Parses the minimal EUC_2D text format:
///
/// ```text
/// NAME: example          (optional)
/// CAPACITY: 5
/// DEPOT: 0               (optional; defaults to the unique zero-demand node)
/// NODE_COORD_SECTION
/// <id> <x> <y>
/// ...
/// DEMAND_SECTION
/// <id> <demand>
/// ...
/// EOF                    (optional)
/// ```
///
/// Node ids must form a contiguous run starting at 0 or 1.
pub fn load_euc2d(text: &str) -> Result<CvrpInstance> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        Coords,
        Demands,
    }
    let mut name = String::from("euc2d");
    let mut capacity: Option<u32> = None;
    let mut depot_id: Option<usize> = None;
    let mut coord_rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut demand_rows: Vec<(usize, u32)> = Vec::new();
    let mut section = Section::Header;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let at = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.eq_ignore_ascii_case("EOF") {
            break;
        }
        if line.eq_ignore_ascii_case("NODE_COORD_SECTION") {
            section = Section::Coords;
            continue;
        }
        if line.eq_ignore_ascii_case("DEMAND_SECTION") {
            section = Section::Demands;
            continue;
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once(':')
                    .ok_or_else(|| at(format!("expected `KEY: value`, found `{line}`")))?;
                let value = value.trim();
                match key.trim().to_ascii_uppercase().as_str() {
                    "NAME" => name = value.to_string(),
                    "CAPACITY" => {
                        capacity = Some(
                            value
                                .parse()
                                .map_err(|_| at(format!("bad capacity `{value}`")))?,
                        )
                    }
                    "DEPOT" => {
                        depot_id = Some(
                            value
                                .parse()
                                .map_err(|_| at(format!("bad depot id `{value}`")))?,
                        )
                    }
                    // Other TSPLIB-style header keys are ignored.
                    _ => {}
                }
            }
            Section::Coords => {
                let mut parts = line.split_whitespace();
                let id: usize = parts
                    .next()
                    .ok_or_else(|| at("missing node id".into()))?
                    .parse()
                    .map_err(|_| at(format!("bad node id in `{line}`")))?;
                let x: f64 = parts
                    .next()
                    .ok_or_else(|| at("missing x coordinate".into()))?
                    .parse()
                    .map_err(|_| at(format!("bad x coordinate in `{line}`")))?;
                let y: f64 = parts
                    .next()
                    .ok_or_else(|| at("missing y coordinate".into()))?
                    .parse()
                    .map_err(|_| at(format!("bad y coordinate in `{line}`")))?;
                coord_rows.push((id, x, y));
            }
            Section::Demands => {
                let mut parts = line.split_whitespace();
                let id: usize = parts
                    .next()
                    .ok_or_else(|| at("missing node id".into()))?
                    .parse()
                    .map_err(|_| at(format!("bad node id in `{line}`")))?;
                let d: u32 = parts
                    .next()
                    .ok_or_else(|| at("missing demand".into()))?
                    .parse()
                    .map_err(|_| at(format!("bad demand in `{line}`")))?;
                demand_rows.push((id, d));
            }
        }
    }

    let capacity = capacity.ok_or_else(|| Error::Parse("missing CAPACITY header".into()))?;
    if coord_rows.is_empty() {
        return Err(Error::Parse("no coordinate lines found".into()));
    }
    if demand_rows.len() != coord_rows.len() {
        return Err(Error::Parse(format!(
            "{} coordinate lines but {} demand lines",
            coord_rows.len(),
            demand_rows.len()
        )));
    }
    // Ids may be 0-based or 1-based; normalize to 0-based.
    let min_id = coord_rows.iter().map(|r| r.0).min().unwrap();
    if min_id > 1 {
        return Err(Error::Parse(format!(
            "node ids must start at 0 or 1, found {min_id}"
        )));
    }
    let n = coord_rows.len();
    let mut coords = vec![None; n];
    let mut demands = vec![None; n];
    for (id, x, y) in coord_rows {
        let idx = id
            .checked_sub(min_id)
            .filter(|&i| i < n)
            .ok_or_else(|| Error::Parse(format!("node id {id} out of range")))?;
        if coords[idx].replace((x, y)).is_some() {
            return Err(Error::Parse(format!("node id {id} listed twice")));
        }
    }
    for (id, d) in demand_rows {
        let idx = id
            .checked_sub(min_id)
            .filter(|&i| i < n)
            .ok_or_else(|| Error::Parse(format!("demand for unknown node id {id}")))?;
        if demands[idx].replace(d).is_some() {
            return Err(Error::Parse(format!(
                "demand for node id {id} listed twice"
            )));
        }
    }
    let coords: Vec<(f64, f64)> = coords.into_iter().collect::<Option<Vec<_>>>().unwrap();
    let demands: Vec<u32> = demands
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("demand section does not cover all nodes".into()))?;
    let depot = match depot_id {
        Some(id) => id
            .checked_sub(min_id)
            .filter(|&i| i < n)
            .ok_or_else(|| Error::Parse(format!("depot id {id} out of range")))?,
        None => {
            let zero: Vec<usize> = (0..n).filter(|&i| demands[i] == 0).collect();
            match zero.as_slice() {
                [only] => *only,
                [] => {
                    return Err(Error::Parse(
                        "no DEPOT header and no zero-demand node".into(),
                    ))
                }
                _ => {
                    return Err(Error::Parse(
                        "no DEPOT header and several zero-demand nodes".into(),
                    ))
                }
            }
        }
    };
    CvrpInstance::from_coords(name, coords, depot, demands, capacity)
}
