use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

/// Write `path` once: fill a temporary file next to it, then rename.
/// `None` writes to stdout.
pub fn write_artifact<F>(path: Option<&Path>, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let Some(path) = path else {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        fill(&mut lock)?;
        lock.flush()?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Print the resolved invocation to stderr as one JSON line.
pub fn echo_config<T: Serialize>(command: &str, config: &T) -> Result<()> {
    let line = serde_json::json!({ "command": command, "config": config });
    eprintln!("{line}");
    Ok(())
}
