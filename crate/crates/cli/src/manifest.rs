use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command, written next to its output.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn hash_file(path: &Path) -> std::io::Result<FileHash> {
    let bytes = std::fs::read(path)?;
    Ok(FileHash {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Collects a command's inputs and outputs while it runs.
pub struct Recorder {
    command: String,
    parameters: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<FileHash>,
    outputs: Vec<PathBuf>,
    anchor: Option<PathBuf>,
    start: Instant,
}

impl Recorder {
    /// The manifest goes to `<anchor>.manifest.json`; without an anchor,
    /// next to the first output.
    pub fn new(
        command: &str,
        parameters: serde_json::Value,
        seed: Option<u64>,
        anchor: Option<&Path>,
    ) -> Self {
        Recorder {
            command: command.into(),
            parameters,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            anchor: anchor.map(Path::to_path_buf),
            start: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> std::io::Result<()> {
        self.inputs.push(hash_file(path)?);
        Ok(())
    }

    /// Writes `content` to `path`, or to stdout when there is no path.
    pub fn emit(&mut self, path: Option<&Path>, content: &str) -> std::io::Result<()> {
        match path {
            Some(p) => {
                std::fs::write(p, content)?;
                self.outputs.push(p.to_path_buf());
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    /// Records a file written by someone else.
    pub fn output(&mut self, path: PathBuf) {
        self.outputs.push(path);
    }

    /// Writes the manifest; nothing when all output went to stdout.
    pub fn finish(self) -> std::io::Result<Option<PathBuf>> {
        let Some(first) = self.outputs.first() else {
            return Ok(None);
        };
        let mut name = self.anchor.as_ref().unwrap_or(first).as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let outputs = self
            .outputs
            .iter()
            .map(|p| hash_file(p))
            .collect::<std::io::Result<_>>()?;
        let m = RunManifest {
            command: self.command,
            parameters: self.parameters,
            inputs: self.inputs,
            outputs,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: self.seed,
            wall_time_secs: self.start.elapsed().as_secs_f64(),
        };
        std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
        Ok(Some(path))
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a run manifest: {e}", path.display()))
}
