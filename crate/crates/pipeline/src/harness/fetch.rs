//! Shallow clones and downloads into a per-artifact directory.

use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use url::Url;
use walkdir::WalkDir;

use repcheck_core::LinkKind;

use super::bundle::Tokenizer;
use super::links::HttpSettings;
use super::snapshot::{inventory, FetchStatus, RepositorySnapshot};

pub const DEFAULT_SIZE_CEILING: u64 = 512 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchConfig {
    pub size_ceiling_bytes: u64,
    /// Wall-clock limit for one clone or download.
    pub timeout_s: u64,
    pub git_binary: String,
    pub http: HttpSettings,
    /// Tokens of each text file kept in the inventory.
    pub per_file_token_budget: usize,
    /// Accept `file://` URLs and local paths. Off by default: paper-derived
    /// URLs must never read the host filesystem.
    pub allow_local: bool,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            size_ceiling_bytes: DEFAULT_SIZE_CEILING,
            timeout_s: 300,
            git_binary: "git".into(),
            http: HttpSettings::default(),
            per_file_token_budget: 1000,
            allow_local: false,
        }
    }
}

const GIT_HOSTS: [&str; 5] = ["github.com", "gitlab.com", "bitbucket.org", "codeberg.org", "gitee.com"];

/// Clone URL for a repository link: browse URLs on the big hosts
/// (`/tree/main/src`, `/blob/...`) are cut back to `owner/name`.
pub fn clone_url(url: &Url) -> String {
    let host = url.host_str().unwrap_or("").trim_start_matches("www.");
    if GIT_HOSTS.contains(&host) {
        let segs: Vec<&str> = url.path_segments().map(|s| s.filter(|x| !x.is_empty()).collect()).unwrap_or_default();
        if segs.len() >= 2 {
            return format!("{}://{}/{}/{}", url.scheme(), host, segs[0], segs[1]);
        }
    }
    url.as_str().to_string()
}

fn dir_size(path: &Path) -> u64 {
    WalkDir::new(path)
        .into_iter()
        .filter_map(Result::ok)
        .filter_map(|e| e.metadata().ok())
        .filter(|m| m.is_file())
        .map(|m| m.len())
        .sum()
}

fn git_failure(stderr: &str) -> FetchStatus {
    let s = stderr.to_ascii_lowercase();
    if s.contains("authentication") || s.contains("could not read username") || s.contains("terminal prompts disabled") {
        FetchStatus::AuthRequired
    } else if s.contains("not found") || s.contains("does not exist") || s.contains("not appear to be a git repository") {
        FetchStatus::NotFound
    } else {
        FetchStatus::Unreachable
    }
}

fn clone(url: &str, dest: &Path, cfg: &FetchConfig) -> Result<bool, (FetchStatus, String)> {
    let mut cmd = Command::new(&cfg.git_binary);
    cmd.env("GIT_TERMINAL_PROMPT", "0")
        .env("GIT_ASKPASS", "true")
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .arg("-c")
        .arg("credential.helper=")
        .arg("-c")
        .arg("protocol.allow=never")
        .arg("-c")
        .arg("protocol.https.allow=always")
        .arg("-c")
        .arg("protocol.http.allow=always");
    if cfg.allow_local {
        cmd.arg("-c").arg("protocol.file.allow=always");
    }
    cmd.args(["clone", "--depth", "1", "--quiet", "--no-tags", "--single-branch", "--"])
        .arg(url)
        .arg(dest)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    let mut child = cmd
        .spawn()
        .map_err(|e| (FetchStatus::Unreachable, format!("cannot run {}: {e}", cfg.git_binary)))?;
    let mut stderr = child.stderr.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let mut last_size_check = Instant::now();
    let mut over_ceiling = false;
    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| (FetchStatus::Unreachable, e.to_string()))? {
            break Some(status);
        }
        if start.elapsed() > Duration::from_secs(cfg.timeout_s) {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        if last_size_check.elapsed() > Duration::from_millis(500) {
            last_size_check = Instant::now();
            if dir_size(dest) > cfg.size_ceiling_bytes {
                over_ceiling = true;
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let stderr = reader.join().unwrap_or_default();
    match status {
        Some(s) if s.success() => Ok(false),
        Some(_) => Err((git_failure(&stderr), stderr.trim().to_string())),
        None if over_ceiling => Ok(true),
        None => Err((FetchStatus::Unreachable, "clone timed out".into())),
    }
}

fn http_failure(status: u16) -> FetchStatus {
    match status {
        401 | 403 => FetchStatus::AuthRequired,
        404 | 410 => FetchStatus::NotFound,
        _ => FetchStatus::Unreachable,
    }
}

/// Copies at most `limit` bytes; returns (bytes written, hit the limit).
fn copy_limited(src: &mut dyn Read, dst: &mut dyn Write, limit: u64) -> io::Result<(u64, bool)> {
    let copied = io::copy(&mut src.take(limit), dst)?;
    if copied < limit {
        return Ok((copied, false));
    }
    let mut probe = [0u8; 1];
    Ok((copied, src.read(&mut probe)? > 0))
}

fn file_name_for(url: &Url) -> String {
    url.path_segments()
        .and_then(|mut s| s.next_back().map(str::to_string))
        .filter(|s| !s.is_empty() && !s.starts_with('.'))
        .unwrap_or_else(|| "download".into())
}

fn download(url: &Url, dest: &Path, cfg: &FetchConfig) -> Result<(PathBuf, bool), (FetchStatus, String)> {
    fs::create_dir_all(dest).map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
    let target = dest.join(file_name_for(url));
    if url.scheme() == "file" {
        let src = url.to_file_path().map_err(|_| (FetchStatus::NotFound, "bad file URL".to_string()))?;
        let mut f = File::open(&src).map_err(|e| (FetchStatus::NotFound, e.to_string()))?;
        let mut out = File::create(&target).map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
        let (_, partial) =
            copy_limited(&mut f, &mut out, cfg.size_ceiling_bytes).map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
        return Ok((target, partial));
    }
    let client = cfg.http.client().map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
    let mut resp = client
        .get(url.as_str())
        .send()
        .map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
    if !resp.status().is_success() {
        return Err((http_failure(resp.status().as_u16()), format!("HTTP {}", resp.status())));
    }
    let mut out = File::create(&target).map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
    let (_, partial) =
        copy_limited(&mut resp, &mut out, cfg.size_ceiling_bytes).map_err(|e| (FetchStatus::Unreachable, e.to_string()))?;
    Ok((target, partial))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArchiveKind {
    Zip,
    Tar,
    TarGz,
}

fn archive_kind(path: &Path) -> Option<ArchiveKind> {
    let mut head = [0u8; 512];
    let n = File::open(path).and_then(|mut f| f.read(&mut head)).ok()?;
    let head = &head[..n];
    if head.starts_with(b"PK\x03\x04") {
        Some(ArchiveKind::Zip)
    } else if head.starts_with(&[0x1f, 0x8b]) {
        Some(ArchiveKind::TarGz)
    } else if n >= 262 && &head[257..262] == b"ustar" {
        Some(ArchiveKind::Tar)
    } else {
        None
    }
}

/// Unpacks one level into `dest`; archives inside the archive stay files.
/// Returns whether extraction stopped at the size ceiling.
fn unpack(archive: &Path, kind: ArchiveKind, dest: &Path, ceiling: u64) -> io::Result<bool> {
    fs::create_dir_all(dest)?;
    let mut budget = ceiling;
    match kind {
        ArchiveKind::Zip => {
            let mut zip = zip::ZipArchive::new(File::open(archive)?).map_err(io::Error::other)?;
            for i in 0..zip.len() {
                let mut entry = zip.by_index(i).map_err(io::Error::other)?;
                let Some(rel) = entry.enclosed_name() else {
                    continue;
                };
                let out = dest.join(rel);
                if entry.is_dir() {
                    fs::create_dir_all(&out)?;
                    continue;
                }
                if entry.size() > budget {
                    return Ok(true);
                }
                if let Some(parent) = out.parent() {
                    fs::create_dir_all(parent)?;
                }
                let (n, hit) = copy_limited(&mut entry, &mut File::create(&out)?, budget)?;
                budget -= n;
                if hit {
                    return Ok(true);
                }
            }
        }
        ArchiveKind::Tar | ArchiveKind::TarGz => {
            let file = File::open(archive)?;
            let reader: Box<dyn Read> = if kind == ArchiveKind::TarGz {
                Box::new(flate2::read::GzDecoder::new(file))
            } else {
                Box::new(file)
            };
            let mut tar = tar::Archive::new(reader);
            for entry in tar.entries()? {
                let mut entry = entry?;
                let ty = entry.header().entry_type();
                if !(ty.is_file() || ty.is_dir()) {
                    continue;
                }
                let size = entry.header().size()?;
                if size > budget {
                    return Ok(true);
                }
                budget -= size;
                entry.unpack_in(dest)?;
            }
        }
    }
    Ok(false)
}

fn is_git_source(url: &Url, kind: LinkKind) -> bool {
    kind == LinkKind::Repository
        || url.path().ends_with(".git")
        || (url.scheme() == "file" && url.to_file_path().is_ok_and(|p| p.join(".git").exists() || p.join("HEAD").exists()))
}

/// Fetches `url` under `work_dir` and inventories the result. Version-control
/// repositories are cloned shallowly into `work_dir/repo`; other URLs are
/// downloaded and, when they are archives, unpacked one level into
/// `work_dir/files`. Failures come back as the snapshot's fetch status.
pub fn fetch_artifact(
    url: &str,
    kind: LinkKind,
    work_dir: &Path,
    cfg: &FetchConfig,
    tokenizer: &dyn Tokenizer,
) -> RepositorySnapshot {
    let parsed = match Url::parse(url) {
        Ok(u) => u,
        Err(e) => return RepositorySnapshot::failed(url, FetchStatus::NotFound, e.to_string()),
    };
    let scheme_ok = match parsed.scheme() {
        "http" | "https" => true,
        "file" => cfg.allow_local,
        _ => false,
    };
    if !scheme_ok {
        return RepositorySnapshot::failed(url, FetchStatus::Unreachable, format!("scheme `{}` not allowed", parsed.scheme()));
    }
    if let Err(e) = fs::create_dir_all(work_dir) {
        return RepositorySnapshot::failed(url, FetchStatus::Unreachable, e.to_string());
    }

    let (root, mut partial) = if is_git_source(&parsed, kind) {
        let root = work_dir.join("repo");
        let source = if parsed.scheme() == "file" { parsed.as_str().to_string() } else { clone_url(&parsed) };
        match clone(&source, &root, cfg) {
            Ok(partial) => (root, partial),
            Err((status, detail)) => return RepositorySnapshot::failed(url, status, detail),
        }
    } else {
        let downloads = work_dir.join("download");
        let (file, partial) = match download(&parsed, &downloads, cfg) {
            Ok(r) => r,
            Err((status, detail)) => return RepositorySnapshot::failed(url, status, detail),
        };
        let root = work_dir.join("files");
        let extracted = match archive_kind(&file) {
            Some(k) if !partial => unpack(&file, k, &root, cfg.size_ceiling_bytes),
            _ => fs::create_dir_all(&root)
                .and_then(|_| fs::rename(&file, root.join(file.file_name().expect("named download"))))
                .map(|_| false),
        };
        match extracted {
            Ok(hit) => (root, partial || hit),
            Err(e) => return RepositorySnapshot::failed(url, FetchStatus::Unreachable, e.to_string()),
        }
    };

    match inventory(&root, url, cfg.size_ceiling_bytes, cfg.per_file_token_budget, tokenizer) {
        Ok(mut snap) => {
            partial |= snap.partial;
            snap.partial = partial;
            snap
        }
        Err(e) => RepositorySnapshot::failed(url, FetchStatus::Unreachable, e.to_string()),
    }
}
