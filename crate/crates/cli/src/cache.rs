//! On-disk cache of expensive results, keyed by a content hash of the input
//! lattice file and the command parameters.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use lat40::fixtures::sha256_hex;

pub struct Cache {
    dir: PathBuf,
}

/// Whether a cached value was reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Hit,
    Computed,
}

impl Cache {
    /// `$LAT40_CACHE`, else `$XDG_CACHE_HOME/lat40`, else `~/.cache/lat40`,
    /// else `.lat40-cache` in the working directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os("LAT40_CACHE")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| Path::new(&d).join("lat40")))
            .or_else(|| std::env::var_os("HOME").map(|h| Path::new(&h).join(".cache").join("lat40")))
            .unwrap_or_else(|| PathBuf::from(".lat40-cache"));
        Self { dir }
    }

    pub fn key(lattice_text: &str, params: &str) -> String {
        sha256_hex(format!("{lattice_text}\0{params}").as_bytes())
    }

    pub fn entry_path(&self, kind: &str, key: &str) -> PathBuf {
        self.dir.join(format!("{kind}-{key}.txt"))
    }

    /// Returns the cached text for `(kind, key)` when its checksum sidecar
    /// matches and `parse` accepts it; otherwise runs `build`, stores its
    /// text and returns its value. Holds an exclusive lock on the entry
    /// throughout so that concurrent runs never write the same entry.
    pub fn load_or_build<T>(
        &self,
        kind: &str,
        key: &str,
        parse: impl Fn(&str) -> lat40::Result<T>,
        build: impl FnOnce() -> lat40::Result<(T, String)>,
    ) -> lat40::Result<(T, Source)> {
        fs::create_dir_all(&self.dir)?;
        let path = self.entry_path(kind, key);
        let sum_path = path.with_extension("sha256");
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(path.with_extension("lock"))?;
        lock.lock()?;
        if let Some(value) = read_valid(&path, &sum_path, &parse) {
            return Ok((value, Source::Hit));
        }
        let (value, text) = build()?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, &text)?;
        fs::rename(&tmp, &path)?;
        fs::write(&sum_path, format!("{}\n", sha256_hex(text.as_bytes())))?;
        drop(lock);
        Ok((value, Source::Computed))
    }
}

fn read_valid<T>(path: &Path, sum_path: &Path, parse: &impl Fn(&str) -> lat40::Result<T>) -> Option<T> {
    let text = fs::read_to_string(path).ok()?;
    let want = fs::read_to_string(sum_path).ok()?;
    if want.trim() != sha256_hex(text.as_bytes()) {
        return None;
    }
    parse(&text).ok()
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut f = File::create(path)?;
    std::io::Write::write_all(&mut f, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_cache(name: &str) -> Cache {
        let dir = std::env::temp_dir().join(format!("lat40-cache-test-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        Cache { dir }
    }

    #[test]
    fn second_lookup_hits() {
        let c = temp_cache("hit");
        let parse = |s: &str| Ok(s.to_string());
        let (_, first) = c.load_or_build("t", "k", parse, || Ok(("x".into(), "x".into()))).unwrap();
        let (v, second) = c.load_or_build("t", "k", parse, || panic!("should not rebuild")).unwrap();
        assert_eq!((first, second, v.as_str()), (Source::Computed, Source::Hit, "x"));
    }

    #[test]
    fn corrupted_entry_is_rebuilt() {
        let c = temp_cache("corrupt");
        let parse = |s: &str| Ok(s.to_string());
        c.load_or_build("t", "k", parse, || Ok(("good".into(), "good".into()))).unwrap();
        fs::write(c.entry_path("t", "k"), "bad").unwrap();
        let (v, src) = c.load_or_build("t", "k", parse, || Ok(("good".into(), "good".into()))).unwrap();
        assert_eq!((v.as_str(), src), ("good", Source::Computed));
    }

    #[test]
    fn keys_depend_on_parameters() {
        assert_ne!(Cache::key("lat", "norm=4"), Cache::key("lat", "norm=6"));
    }
}
