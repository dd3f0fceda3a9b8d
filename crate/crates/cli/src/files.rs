//! Reading and writing the JSON file formats.

use std::fs;
use std::path::{Path, PathBuf};

use compdyn::cset::CSetInstance;
use compdyn::modelspec::ModelSpec;
use compdyn::wiring::Diagram;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

/// An instance as read from disk, before any validity check.
pub fn read_instance(path: &Path) -> Result<CSetInstance, CliError> {
    CSetInstance::from_json(&read_json(path)?).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

pub fn read_diagram(path: &Path) -> Result<Diagram, CliError> {
    Diagram::from_instance(read_instance(path)?)
        .map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
}

pub fn read_model(path: &Path) -> Result<ModelSpec, CliError> {
    ModelSpec::from_json(&read_text(path)?).map_err(|source| CliError::Model { path: path.into(), source })
}

/// One key per line with compact values, so diffs stay readable and output
/// is byte-stable.
pub fn instance_text(x: &CSetInstance) -> String {
    let Value::Object(obj) = x.to_json() else { unreachable!("instances serialize to objects") };
    let lines: Vec<String> =
        obj.iter().map(|(k, v)| format!("  {}: {}", Value::String(k.clone()), v)).collect();
    format!("{{\n{}\n}}\n", lines.join(",\n"))
}

pub fn write_diagram(path: &Path, d: &Diagram) -> Result<(), CliError> {
    write_text(path, &instance_text(d.instance()))
}

/// Display names for boxes and, for undirected diagrams, junctions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Labels {
    #[serde(default)]
    pub boxes: Option<Vec<String>>,
    #[serde(default)]
    pub junctions: Option<Vec<String>>,
}

impl Labels {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn read_opt(path: Option<&PathBuf>) -> Result<Self, CliError> {
        path.map_or(Ok(Labels::default()), |p| Labels::read(p))
    }

    /// Box labels, defaulting to `b0, b1, ...`.
    pub fn box_names(&self, n: usize) -> Result<Vec<String>, CliError> {
        match &self.boxes {
            Some(b) if b.len() != n => {
                Err(CliError::invalid(format!("labels name {} boxes but the diagram has {n}", b.len())))
            }
            Some(b) => Ok(b.clone()),
            None => Ok((0..n).map(|i| format!("b{i}")).collect()),
        }
    }

    pub fn junction_names(&self, n: usize) -> Result<Option<&[String]>, CliError> {
        match &self.junctions {
            Some(j) if j.len() != n => {
                Err(CliError::invalid(format!("labels name {} junctions but the diagram has {n}", j.len())))
            }
            other => Ok(other.as_deref()),
        }
    }
}
