//! Output directory handling and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    /// Inputs as given on the command line; outputs relative to the out directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments exactly as typed.
    pub argv: Vec<String>,
    /// Arguments with the config file folded in; what `rerun` executes.
    pub resolved_argv: Vec<String>,
    pub cwd: String,
    pub config_file: Option<FileDigest>,
    /// Every parsed option, defaults included.
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub threads: usize,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Invocation details handed from `main` to each command.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub argv: Vec<String>,
    pub resolved_argv: Vec<String>,
    pub config_file: Option<PathBuf>,
    pub threads: usize,
}

pub struct Run {
    out: PathBuf,
    manifest: RunManifest,
    started: Instant,
    phase: Instant,
}

impl Run {
    pub fn start(inv: &Invocation, command: &str, config: &impl Serialize, out: &Path) -> CliResult<Self> {
        if out.exists() && !out.is_dir() {
            return Err(CliError::Usage(format!("--out {} exists and is not a directory", out.display())));
        }
        fs::create_dir_all(out)?;
        let config_file = match &inv.config_file {
            Some(p) => Some(digest_file("config", p, &p.display().to_string())?),
            None => None,
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: inv.argv.clone(),
            resolved_argv: inv.resolved_argv.clone(),
            cwd: std::env::current_dir()?.display().to_string(),
            config_file,
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            threads: inv.threads,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: BTreeMap::new(),
        };
        let now = Instant::now();
        Ok(Self { out: out.to_path_buf(), manifest, started: now, phase: now })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.into(), seed);
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, role: &str, path: &Path) -> CliResult<Vec<u8>> {
        if !path.is_file() {
            return Err(CliError::Usage(format!("{role} file {} not found", path.display())));
        }
        let bytes = fs::read(path)?;
        self.manifest.inputs.push(FileDigest {
            role: role.into(),
            path: path.display().to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn load_dataset(&mut self, role: &str, path: &Path) -> CliResult<datawave::Dataset> {
        let bytes = self.read_input(role, path)?;
        Ok(datawave::Dataset::from_bytes(&bytes)?)
    }

    pub fn load_model(&mut self, role: &str, path: &Path) -> CliResult<datawave::Mps<f64>> {
        let bytes = self.read_input(role, path)?;
        Ok(datawave::Mps::from_bytes(&bytes)?)
    }

    /// Records the time since the previous mark under `name`.
    pub fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.manifest.timings.insert(name.into(), (now - self.phase).as_secs_f64());
        self.phase = now;
    }

    pub fn write(&mut self, role: &str, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.record_output(role, name, bytes);
        Ok(())
    }

    pub fn write_json(&mut self, role: &str, name: &str, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(role, name, text.as_bytes())
    }

    /// Records a file some library routine already wrote into the out directory.
    pub fn adopt(&mut self, role: &str, name: &str) -> CliResult<()> {
        let bytes = fs::read(self.out.join(name))?;
        self.record_output(role, name, &bytes);
        Ok(())
    }

    fn record_output(&mut self, role: &str, name: &str, bytes: &[u8]) {
        self.manifest.outputs.retain(|o| o.path != name);
        self.manifest.outputs.push(FileDigest {
            role: role.into(),
            path: name.into(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.timings.insert("total".into(), self.started.elapsed().as_secs_f64());
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(self.out.join(MANIFEST), text)?;
        Ok(self.manifest)
    }
}

pub fn digest_file(role: &str, path: &Path, shown: &str) -> CliResult<FileDigest> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(FileDigest { role: role.into(), path: shown.into(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
}
