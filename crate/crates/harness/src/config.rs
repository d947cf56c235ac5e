//! TOML experiment files. Every key mirrors a CLI flag; flags win.
//!
//! ```toml
//! problem = "logreg"
//! n = 200
//! m = 100
//! kappa = 50.0
//! seed = 7
//! solvers = ["me", "gd-exact"]
//! eps = 1e-6
//! max_outer = 100000
//! out = "results"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{io_err, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub solvers: Option<Vec<String>>,
    pub eps: Option<f64>,
    pub max_outer: Option<u32>,
    pub out: Option<PathBuf>,
    pub companion_tol: Option<f64>,
    pub inner_tol: Option<f64>,
    pub max_inner: Option<u32>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }
}
