use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to repeat a run.
#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a serde_json::Value,
    config_sha256: String,
    seed: u64,
    quad_tol: f64,
    jobs: Option<usize>,
    outputs: &'a BTreeMap<String, String>,
    pass: bool,
}

/// Output directory that records the hash of every file written into it.
pub struct OutDir {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutDir { dir: dir.to_path_buf(), hashes: BTreeMap::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let p = self.dir.join(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, v: &S) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self, command: &str, config: &serde_json::Value, run: &crate::RunArgs, pass: bool) -> Result<(), CliError> {
        let canon = serde_json::to_string(config).map_err(|e| CliError::Io(e.to_string()))?;
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            config_sha256: sha256_hex(canon.as_bytes()),
            seed: run.seed,
            quad_tol: run.quad_tol,
            jobs: run.jobs,
            outputs: &self.hashes,
            pass,
        };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        let p = self.dir.join("manifest.json");
        std::fs::write(&p, s).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}

pub fn fmt_opt(x: Result<f64, conformal_euler::Error>) -> String {
    match x {
        Ok(v) if v.is_finite() => format!("{v:e}"),
        _ => String::new(),
    }
}
