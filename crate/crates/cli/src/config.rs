//! `--config` files: one flat JSON object whose keys mirror the long flags.
//! Flags given on the command line win over the file.

use std::path::Path;

use exobasin::family::ParamInput;
use exobasin::raster::Window;
use exobasin::{Error, MapParams};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: Option<ParamInput>,
    pub window: Option<Window>,
    pub resolution: Option<usize>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub recheck: Option<bool>,
    pub thin_factor: Option<f64>,
    pub check_stability: Option<bool>,
    pub newton_tol: Option<f64>,
    pub k: Option<f64>,
    pub event: Option<String>,
    pub bracket: Option<(f64, f64)>,
    pub k_range: Option<(f64, f64)>,
    pub w_range: Option<(f64, f64)>,
    pub nk: Option<usize>,
    pub nw: Option<usize>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Error> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))
    }

    pub fn map(&self) -> Result<Option<MapParams>, Error> {
        self.map.as_ref().map(|m| m.resolve()).transpose()
    }
}

/// Picks the flag value when present, else the config value, else `default`.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
