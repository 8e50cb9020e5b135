use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one run, written next to its primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    pub params: BTreeMap<String, Value>,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool: "foodlda".into(),
            tool_version: TOOL_VERSION.into(),
            subcommand: subcommand.into(),
            params: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            duration_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params
            .insert(key.into(), serde_json::to_value(value).expect("manifest values serialize"));
        self
    }

    pub fn input(&mut self, key: &str, path: &Path) -> &mut Self {
        self.inputs.insert(key.into(), path.to_path_buf());
        self
    }

    pub fn output(&mut self, key: &str, path: &Path) -> &mut Self {
        self.outputs.insert(key.into(), path.to_path_buf());
        self
    }

    pub fn write(&mut self, primary: &Path, elapsed: Duration) -> std::io::Result<PathBuf> {
        self.duration_seconds = elapsed.as_secs_f64();
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}
