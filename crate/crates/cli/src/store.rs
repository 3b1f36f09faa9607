//! Directory-backed memo for bracket expansions.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use poisson_verify_core::verify::{fingerprint, MemoStore};

/// One file per key, named by the key's digest. The first line holds the
/// full key so digest collisions read as misses.
pub struct DirStore {
    dir: PathBuf,
}

impl DirStore {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DirStore { dir })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.memo", fingerprint(key)))
    }
}

impl MemoStore for DirStore {
    fn get(&self, key: &str) -> Option<String> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let (stored, value) = text.split_once('\n')?;
        (stored == key).then(|| value.to_string())
    }

    fn put(&self, key: &str, value: &str) {
        if key.contains('\n') {
            return;
        }
        let target = self.path(key);
        let tmp = target.with_extension(format!("tmp{}", std::process::id()));
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(key.as_bytes())?;
            f.write_all(b"\n")?;
            f.write_all(value.as_bytes())
        });
        // A failed write only costs a recomputation later.
        if written.is_err() || fs::rename(&tmp, &target).is_err() {
            let _ = fs::remove_file(&tmp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let s = DirStore::open(dir.path()).unwrap();
        assert_eq!(s.get("k"), None);
        s.put("k", "x^2 + 1\nsecond line");
        assert_eq!(s.get("k").as_deref(), Some("x^2 + 1\nsecond line"));
        assert_eq!(s.get("other"), None);
    }
}
