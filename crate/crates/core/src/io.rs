//! Artifact plumbing: JSON writers, operator dumps, and the checksummed manifest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hilbert::{BlockedOperator, JointSpace};

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Sector table `(k, dim, members)` as JSON.
pub fn write_sector_table(joint: &JointSpace, path: &Path) -> Result<()> {
    write_json(path, &joint.sector_table())
}

/// Nonzero entries of every block as `k,row,col,re,im`, with rows and
/// columns local to the sector.
pub fn write_operator_blocks(op: &BlockedOperator, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "row", "col", "re", "im"])?;
    for (sector, block) in op.joint().sectors().iter().zip(op.blocks()) {
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                let z = block[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    w.write_record([
                        sector.k.to_string(),
                        i.to_string(),
                        j.to_string(),
                        format!("{:.17e}", z.re),
                        format!("{:.17e}", z.im),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub kind: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Every file a run produced, with checksums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            files: Vec::new(),
        }
    }

    /// Records `path` (inside `dir`) with its checksum.
    pub fn add(&mut self, dir: &Path, path: &Path, kind: &str) -> Result<()> {
        let rel = path
            .strip_prefix(dir)
            .map_err(|_| Error::invalid("manifest", format!("{} is outside {}", path.display(), dir.display())))?;
        let rel = rel.to_string_lossy().replace('\\', "/");
        self.files.retain(|e| e.path != rel);
        self.files.push(ManifestEntry {
            path: rel,
            kind: kind.to_string(),
            bytes: std::fs::metadata(path)?.len(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        write_json(&path, self)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_NAME))
    }

    /// Re-hashes every listed file; returns the paths whose checksum differs.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.files {
            if sha256_file(&dir.join(&e.path))? != e.sha256 {
                bad.push(e.path.clone());
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{interaction_hamiltonian, DickeSpace, FockSpace};
    use std::sync::Arc;

    #[test]
    fn sha256_of_known_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_round_trip_and_tamper_detection() {
        let dir = tempfile::tempdir().unwrap();
        let joint = Arc::new(JointSpace::new(DickeSpace::new(2).unwrap(), FockSpace::new(3)));
        let table = dir.path().join("sectors.json");
        let ops = dir.path().join("hamiltonian.csv");
        write_sector_table(&joint, &table).unwrap();
        write_operator_blocks(&interaction_hamiltonian(&joint), &ops).unwrap();
        let mut m = Manifest::new("test", Some(3));
        m.add(dir.path(), &table, "sector-table").unwrap();
        m.add(dir.path(), &ops, "operator-blocks").unwrap();
        m.write(dir.path()).unwrap();
        let back = Manifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        assert!(back.verify(dir.path()).unwrap().is_empty());
        std::fs::write(&ops, b"tampered").unwrap();
        assert_eq!(back.verify(dir.path()).unwrap(), vec!["hamiltonian.csv".to_string()]);
    }

    #[test]
    fn operator_dump_lists_off_diagonal_couplings() {
        let dir = tempfile::tempdir().unwrap();
        let joint = Arc::new(JointSpace::new(DickeSpace::new(1).unwrap(), FockSpace::new(1)));
        let ops = dir.path().join("h.csv");
        write_operator_blocks(&interaction_hamiltonian(&joint), &ops).unwrap();
        let text = std::fs::read_to_string(&ops).unwrap();
        // one two-level sector with coupling 1 in both off-diagonal slots
        assert_eq!(text.lines().count(), 3, "{text}");
    }
}
