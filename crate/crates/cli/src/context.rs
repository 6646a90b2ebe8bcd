//! Run bookkeeping: input and output registration and the run manifest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Command;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Entropy,
    /// The command is deterministic and no seed was given.
    Unused,
}

/// Everything needed to repeat a run. Output paths are relative to
/// `output_dir` unless the command was given an explicit location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: Command,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening manifest {}", path.display()))?;
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("reading manifest {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(create_file(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn create_file(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// Per-run state handed to every command.
pub struct Context {
    pub seed: u64,
    output_dir: PathBuf,
    inputs: Vec<(String, PathBuf)>,
    outputs: Vec<(String, PathBuf)>,
}

impl Context {
    pub fn new(seed: u64, output_dir: PathBuf) -> Self {
        Self { seed, output_dir, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn open(&mut self, path: &Path) -> Result<BufReader<File>> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        self.inputs.push((path.display().to_string(), path.to_owned()));
        Ok(BufReader::new(file))
    }

    /// Creates `name` inside the output directory.
    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.output_dir.join(name);
        let file = create_file(&path)?;
        self.outputs.push((name.to_owned(), path));
        Ok(BufWriter::new(file))
    }

    /// Creates a file at an explicit location outside the output directory.
    pub fn create_at(&mut self, path: &Path) -> Result<BufWriter<File>> {
        let file = create_file(path)?;
        self.outputs.push((path.display().to_string(), path.to_owned()));
        Ok(BufWriter::new(file))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn input_digests(&self) -> Result<Vec<FileDigest>> {
        digests(&self.inputs)
    }

    pub fn output_digests(&self) -> Result<Vec<FileDigest>> {
        digests(&self.outputs)
    }
}

fn digests(files: &[(String, PathBuf)]) -> Result<Vec<FileDigest>> {
    files
        .iter()
        .map(|(label, path)| Ok(FileDigest { path: label.clone(), sha256: sha256_file(path)? }))
        .collect()
}
