use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::CmdResult;

pub const RUN_CONFIG: &str = "run_config.json";

/// Artifacts are written into a sibling staging directory and moved into
/// the output directory only on [`commit`](Self::commit). Dropping an
/// uncommitted staging area deletes it, so a failed run leaves no partial
/// artifact set behind.
pub struct Staging {
    dir: PathBuf,
    out: PathBuf,
    files: Vec<String>,
    committed: bool,
}

impl Staging {
    /// Creates the staging area and writes `run_config.json` into it.
    pub fn begin(out: &Path, run_config: &impl Serialize) -> CmdResult<Self> {
        let name = out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let parent = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let dir = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut s = Staging {
            dir,
            out: out.to_path_buf(),
            files: Vec::new(),
            committed: false,
        };
        s.write_json(RUN_CONFIG, run_config)?;
        Ok(s)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CmdResult {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CmdResult {
        let mut text = serde_json::to_vec_pretty(value).context("serializing output")?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn commit(mut self) -> CmdResult {
        if !self.out.exists() {
            fs::rename(&self.dir, &self.out)
                .with_context(|| format!("moving results into {}", self.out.display()))?;
        } else {
            for f in &self.files {
                fs::rename(self.dir.join(f), self.out.join(f))
                    .with_context(|| format!("moving {f} into {}", self.out.display()))?;
            }
            fs::remove_dir_all(&self.dir)?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}
