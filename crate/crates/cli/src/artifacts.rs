//! Artifact directories: staged in a sibling temp dir, then renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sibling(dir: &Path, tag: &str) -> Result<PathBuf, CliError> {
    let name = dir
        .file_name()
        .ok_or_else(|| CliError::Runtime(format!("output directory {} has no final component", dir.display())))?;
    let mut staged = std::ffi::OsString::from(".");
    staged.push(name);
    staged.push(format!(".{tag}-{}", std::process::id()));
    Ok(dir.with_file_name(staged))
}

/// Writes `files` into `dir` so that readers see either the previous
/// directory or the complete new one. An existing `dir` is replaced only if it
/// holds a manifest, i.e. was produced by an earlier run.
pub fn write_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    if dir.exists() && !dir.join(MANIFEST).is_file() {
        return Err(CliError::Runtime(format!(
            "{} exists and is not an artifact directory; refusing to replace it",
            dir.display()
        )));
    }
    let staged = sibling(dir, "tmp")?;
    if staged.exists() {
        fs::remove_dir_all(&staged)?;
    }
    fs::create_dir(&staged)?;
    let write = || -> std::io::Result<()> {
        for (name, bytes) in files {
            fs::write(staged.join(name), bytes)?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        let _ = fs::remove_dir_all(&staged);
        return Err(e.into());
    }
    if dir.exists() {
        let old = sibling(dir, "old")?;
        fs::rename(dir, &old)?;
        fs::rename(&staged, dir)?;
        fs::remove_dir_all(&old)?;
    } else {
        fs::rename(&staged, dir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn replaces_only_artifact_dirs() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("out");
        let files = |s: &str| vec![(MANIFEST.to_string(), b"{}".to_vec()), ("a.csv".to_string(), s.as_bytes().to_vec())];
        write_atomic(&dir, &files("1")).unwrap();
        write_atomic(&dir, &files("2")).unwrap();
        assert_eq!(fs::read_to_string(dir.join("a.csv")).unwrap(), "2");
        let leftovers: Vec<_> = fs::read_dir(root.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);

        let foreign = root.path().join("data");
        fs::create_dir(&foreign).unwrap();
        fs::write(foreign.join("keep.txt"), "x").unwrap();
        assert!(write_atomic(&foreign, &files("3")).is_err());
        assert!(foreign.join("keep.txt").exists());
    }
}
