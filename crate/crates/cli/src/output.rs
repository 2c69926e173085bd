//! Output directories. Artifacts are written to a staging directory next to
//! the target and moved into place once the command has produced them all,
//! together with a manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    /// sha256 of the input corpus, or of each input when there are several.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every artifact, by relative path.
    pub artifacts: BTreeMap<String, String>,
}

pub struct OutputDir {
    target: PathBuf,
    staging: PathBuf,
    artifacts: BTreeMap<String, String>,
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::usage(format!("{}: {e}", path.display()))
}

impl OutputDir {
    /// Refuses to replace an existing directory that is not a previous
    /// output (one without a manifest), unless it is empty.
    pub fn create(target: &Path) -> Result<OutputDir, Failure> {
        if target.exists() {
            let replaceable = target.join(MANIFEST).is_file()
                || fs::read_dir(target)
                    .map_err(|e| io(target, e))?
                    .next()
                    .is_none();
            if !replaceable {
                return Err(Failure::usage(format!(
                    "{} exists and is not an output directory of this tool",
                    target.display()
                )));
            }
        }
        let name = target
            .file_name()
            .ok_or_else(|| {
                Failure::usage(format!("{} is not a usable output path", target.display()))
            })?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| io(&parent, e))?;
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| io(&staging, e))?;
        }
        fs::create_dir(&staging).map_err(|e| io(&staging, e))?;
        Ok(OutputDir {
            target: target.to_path_buf(),
            staging,
            artifacts: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<(), Failure> {
        let path = self.staging.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        fs::write(&path, contents).map_err(|e| io(&path, e))?;
        self.artifacts.insert(rel.to_owned(), sha256_hex(contents));
        Ok(())
    }

    /// Directory artifacts are written to before `commit`.
    pub fn staging(&self) -> &Path {
        &self.staging
    }

    /// Records a file or directory tree written directly under `staging()`.
    pub fn record(&mut self, rel: &str) -> Result<(), Failure> {
        let root = self.staging.clone();
        let mut stack = vec![root.join(rel)];
        while let Some(p) = stack.pop() {
            if p.is_dir() {
                for e in fs::read_dir(&p).map_err(|e| io(&p, e))? {
                    stack.push(e.map_err(|e| io(&p, e))?.path());
                }
            } else {
                let bytes = fs::read(&p).map_err(|e| io(&p, e))?;
                let rel = p
                    .strip_prefix(&root)
                    .expect("below staging")
                    .to_string_lossy()
                    .replace('\\', "/");
                self.artifacts.insert(rel, sha256_hex(&bytes));
            }
        }
        Ok(())
    }

    /// Writes the manifest and moves the directory into place.
    pub fn commit<C: Serialize>(
        self,
        command: &str,
        config: &C,
        inputs: BTreeMap<String, String>,
    ) -> Result<PathBuf, Failure> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            inputs,
            artifacts: self.artifacts.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialize");
        text.push('\n');
        let path = self.staging.join(MANIFEST);
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| io(&self.target, e))?;
        }
        fs::rename(&self.staging, &self.target).map_err(|e| io(&self.target, e))?;
        Ok(self.target.clone())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        // only reached with the staging directory still present on failure
        if self.staging.exists() {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
