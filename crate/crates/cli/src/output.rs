//! Output files and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Failure;

/// Everything needed to rerun a command and get the same files back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    /// Arguments after the program name, without `--out`.
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub exit_code: u8,
}

impl Manifest {
    pub fn file_name(command: &str) -> String {
        format!("{}.manifest.json", command.replace('-', "_"))
    }
}

/// Collects the files a command writes into its output directory.
pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Config(format!("creating {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes the manifest for a finished command.
    pub fn finish(
        mut self,
        command: &str,
        args: Vec<String>,
        seed: Option<u64>,
        exit_code: u8,
    ) -> Result<(), Failure> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: treepark::VERSION.to_string(),
            command: command.to_string(),
            args,
            seed,
            outputs: self.written.clone(),
            exit_code,
        };
        self.write_json(&Manifest::file_name(command), &manifest)
    }
}

/// Drops `--out <dir>` / `--out=<dir>` and the program name from `args`.
pub fn replayable_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}
