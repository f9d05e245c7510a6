//! Output directory handling: atomic writes and the config-hash cache.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BANDSPEC_OUT_DIR";

#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// `--out`, else the config's `output`, else `$BANDSPEC_OUT_DIR`, else `.`.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag.or(config) {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("."),
    }
}

/// Record of one completed run: `<command>.manifest` listing the config hash
/// and the artifacts written. It is written last, so its presence means the
/// artifacts are complete.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub hash: String,
    pub exit_code: i32,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn path(dir: &Path, command: &str) -> PathBuf {
        dir.join(format!("{command}.manifest"))
    }

    pub fn render(&self) -> String {
        let mut s = format!("command = {}\nconfig_sha256 = {}\nexit_code = {}\n", self.command, self.hash, self.exit_code);
        for f in &self.files {
            s.push_str(&format!("file = {f}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut m = Manifest {
            command: String::new(),
            hash: String::new(),
            exit_code: -1,
            files: vec![],
        };
        for line in text.lines() {
            let (k, v) = line.split_once(" = ")?;
            match k {
                "command" => m.command = v.to_string(),
                "config_sha256" => m.hash = v.to_string(),
                "exit_code" => m.exit_code = v.parse().ok()?,
                "file" => m.files.push(v.to_string()),
                _ => return None,
            }
        }
        (!m.hash.is_empty()).then_some(m)
    }

    /// A manifest in `dir` for the same command and hash whose files all exist.
    pub fn lookup(dir: &Path, command: &str, hash: &str) -> Option<Self> {
        let text = fs::read_to_string(Self::path(dir, command)).ok()?;
        let m = Self::parse(&text)?;
        let complete = m.command == command && m.hash == hash && m.files.iter().all(|f| dir.join(f).is_file());
        complete.then_some(m)
    }

    pub fn store(&self, dir: &Path) -> Result<(), OutputError> {
        write_atomic(&Self::path(dir, &self.command), self.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(dir.path().join("sub")).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn manifest_round_trip_and_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            command: "eigs".into(),
            hash: "ab".into(),
            exit_code: 0,
            files: vec!["eigs.csv".into()],
        };
        assert_eq!(Manifest::parse(&m.render()), Some(m.clone()));
        m.store(dir.path()).unwrap();
        assert!(Manifest::lookup(dir.path(), "eigs", "ab").is_none(), "artifact missing");
        fs::write(dir.path().join("eigs.csv"), "k\n").unwrap();
        assert!(Manifest::lookup(dir.path(), "eigs", "ab").is_some());
        assert!(Manifest::lookup(dir.path(), "eigs", "cd").is_none());
    }

    #[test]
    fn out_dir_precedence() {
        assert_eq!(resolve_out_dir(Some(Path::new("a")), Some(Path::new("b"))), PathBuf::from("a"));
        assert_eq!(resolve_out_dir(None, Some(Path::new("b"))), PathBuf::from("b"));
    }
}
