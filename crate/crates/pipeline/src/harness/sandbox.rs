//! Bounded, isolated execution of a fetched artifact.
//!
//! Two backends share one contract. The container backend runs the command in
//! the checked-in image with networking disabled. The process backend, used
//! when no container runtime is present, forks into fresh mount and network
//! namespaces, remounts every filesystem read-only except the artifact
//! directory, drops all capabilities and applies resource limits.

use std::ffi::CString;
use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::entrypoint::{select_entrypoint, Entrypoint};
use super::snapshot::{FetchStatus, RepositorySnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandboxBackend {
    /// Container runtime when available, else the process backend.
    Auto,
    Container,
    Process,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SandboxConfig {
    pub backend: SandboxBackend,
    pub container_runtime: String,
    /// Image built from the recipe under `sandbox/`.
    pub image: String,
    pub limit_s: u64,
    /// Grace period for tearing the process tree down after the limit.
    pub slack_s: u64,
    pub memory_bytes: u64,
    pub cpus: f64,
    /// Where per-execution logs are kept; a `logs` directory next to the
    /// artifact when unset.
    pub log_dir: Option<PathBuf>,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        SandboxConfig {
            backend: SandboxBackend::Auto,
            container_runtime: "docker".into(),
            image: "repcheck-sandbox:latest".into(),
            limit_s: 300,
            slack_s: 5,
            memory_bytes: 4 << 30,
            cpus: 2.0,
            log_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Y,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecReason {
    ExitOk,
    NonzeroExit,
    Timeout,
    NoEntrypoint,
    SandboxError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub verdict: Verdict,
    pub reason: ExecReason,
    pub duration_s: f64,
    pub log_excerpt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entrypoint: Option<Entrypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<SandboxBackend>,
}

impl ExecutionResult {
    fn without_run(reason: ExecReason, message: impl Into<String>) -> Self {
        ExecutionResult {
            verdict: Verdict::N,
            reason,
            duration_s: 0.0,
            log_excerpt: message.into(),
            entrypoint: None,
            exit_code: None,
            log_path: None,
            backend: None,
        }
    }
}

const EXCERPT_BYTES: u64 = 4000;

fn runtime_available(runtime: &str) -> bool {
    Command::new(runtime)
        .arg("version")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

fn resolve_backend(cfg: &SandboxConfig) -> SandboxBackend {
    match cfg.backend {
        SandboxBackend::Auto if runtime_available(&cfg.container_runtime) => SandboxBackend::Container,
        SandboxBackend::Auto => SandboxBackend::Process,
        other => other,
    }
}

/// Mount points of the calling process, read before forking so the child
/// does not allocate.
fn mount_points() -> std::io::Result<Vec<CString>> {
    let info = fs::read_to_string("/proc/self/mountinfo")?;
    let mut out = Vec::new();
    for line in info.lines() {
        let Some(mp) = line.split(' ').nth(4) else {
            continue;
        };
        let mp = mp.replace("\\040", " ");
        let skip = mp.starts_with("/proc") || mp.starts_with("/sys") || mp == "/dev" || mp.starts_with("/dev/pts");
        if !skip {
            out.push(CString::new(mp).map_err(std::io::Error::other)?);
        }
    }
    // remount parents before children
    out.sort_by_key(|c| c.as_bytes().len());
    Ok(out)
}

fn check(rc: libc::c_int) -> std::io::Result<()> {
    if rc == 0 {
        Ok(())
    } else {
        Err(std::io::Error::last_os_error())
    }
}

fn isolate_process(cmd: &mut Command, workdir: &Path, cfg: &SandboxConfig) -> std::io::Result<()> {
    let mounts = mount_points()?;
    let work = CString::new(workdir.as_os_str().as_encoded_bytes()).map_err(std::io::Error::other)?;
    let root = CString::new("/").expect("static");
    let cpu_s = cfg.limit_s + cfg.slack_s;
    let memory = cfg.memory_bytes;
    // SAFETY: the closure runs between fork and exec and only issues raw
    // syscalls on data prepared above; it does not allocate.
    unsafe {
        cmd.pre_exec(move || {
            check(libc::setpgid(0, 0))?;
            check(libc::unshare(libc::CLONE_NEWNS | libc::CLONE_NEWNET | libc::CLONE_NEWIPC))?;
            check(libc::mount(
                std::ptr::null(),
                root.as_ptr(),
                std::ptr::null(),
                libc::MS_REC | libc::MS_PRIVATE,
                std::ptr::null(),
            ))?;
            check(libc::mount(
                work.as_ptr(),
                work.as_ptr(),
                std::ptr::null(),
                libc::MS_BIND | libc::MS_REC,
                std::ptr::null(),
            ))?;
            for mp in &mounts {
                let rc = libc::mount(
                    std::ptr::null(),
                    mp.as_ptr(),
                    std::ptr::null(),
                    libc::MS_REMOUNT | libc::MS_BIND | libc::MS_RDONLY,
                    std::ptr::null(),
                );
                // the root filesystem must become read-only; others are best effort
                if rc != 0 && mp.as_bytes() == b"/" {
                    return Err(std::io::Error::last_os_error());
                }
            }
            // the cwd was set before this hook ran and still points into the
            // read-only mount; re-enter through the writable bind
            check(libc::chdir(work.as_ptr()))?;
            let limits = [
                (libc::RLIMIT_AS, memory),
                (libc::RLIMIT_CPU, cpu_s),
                (libc::RLIMIT_CORE, 0),
            ];
            for (res, value) in limits {
                let lim = libc::rlimit {
                    rlim_cur: value as libc::rlim_t,
                    rlim_max: value as libc::rlim_t,
                };
                check(libc::setrlimit(res, &lim))?;
            }
            // An empty bounding set leaves a root child without capabilities
            // after exec, so it cannot undo the mounts.
            for cap in 0..64 {
                libc::prctl(libc::PR_CAPBSET_DROP, cap as libc::c_ulong, 0, 0, 0);
            }
            check(libc::prctl(libc::PR_SET_NO_NEW_PRIVS, 1 as libc::c_ulong, 0, 0, 0))?;
            Ok(())
        });
    }
    Ok(())
}

static RUN_COUNTER: AtomicU64 = AtomicU64::new(0);

fn container_name() -> String {
    format!("repcheck-{}-{}", std::process::id(), RUN_COUNTER.fetch_add(1, Ordering::Relaxed))
}

fn spawn(
    backend: SandboxBackend,
    command: &str,
    workdir: &Path,
    log: &File,
    cfg: &SandboxConfig,
) -> std::io::Result<(Child, Option<String>)> {
    let stdout = log.try_clone()?;
    let stderr = log.try_clone()?;
    match backend {
        SandboxBackend::Container => {
            let name = container_name();
            let mut cmd = Command::new(&cfg.container_runtime);
            cmd.args(["run", "--rm", "--name", &name, "--network", "none"])
                .arg(format!("--memory={}", cfg.memory_bytes))
                .arg(format!("--cpus={}", cfg.cpus))
                .args(["--pids-limit", "512", "--read-only", "--tmpfs", "/tmp"])
                .arg("-v")
                .arg(format!("{}:/work", workdir.display()))
                .args(["-w", "/work", "-e", "HOME=/work", &cfg.image, "sh", "-c", command])
                .stdin(Stdio::null())
                .stdout(stdout)
                .stderr(stderr);
            Ok((cmd.spawn()?, Some(name)))
        }
        _ => {
            let tmp = workdir.join(".tmp");
            fs::create_dir_all(&tmp)?;
            let mut cmd = Command::new("/bin/sh");
            cmd.arg("-c")
                .arg(command)
                .current_dir(workdir)
                .env_clear()
                .env("PATH", "/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin")
                .env("HOME", workdir)
                .env("TMPDIR", &tmp)
                .env("LANG", "C.UTF-8")
                .stdin(Stdio::null())
                .stdout(stdout)
                .stderr(stderr);
            isolate_process(&mut cmd, workdir, cfg)?;
            Ok((cmd.spawn()?, None))
        }
    }
}

fn kill_tree(child: &mut Child, container: Option<&str>, runtime: &str) {
    if let Some(name) = container {
        let _ = Command::new(runtime)
            .args(["kill", name])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status();
    } else {
        // SAFETY: signalling the process group created by setpgid in the child.
        unsafe {
            libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

fn excerpt(path: &Path) -> String {
    let Ok(mut f) = File::open(path) else {
        return String::new();
    };
    let len = f.metadata().map(|m| m.len()).unwrap_or(0);
    let _ = f.seek(SeekFrom::Start(len.saturating_sub(EXCERPT_BYTES)));
    let mut buf = Vec::new();
    let _ = f.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

fn log_file_name(origin: &str) -> String {
    let base: String = origin
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{}.log", base.trim_matches('_'))
}

/// Runs the artifact's entrypoint under the configured isolation and wall
/// clock limit. Verdict is `Y` only for exit status 0 within the limit.
pub fn attempt_execution(snapshot: &RepositorySnapshot, cfg: &SandboxConfig) -> ExecutionResult {
    let Some(root) = snapshot.root.as_deref().filter(|_| snapshot.fetch_status == FetchStatus::Ok) else {
        return ExecutionResult::without_run(ExecReason::SandboxError, "artifact was not fetched");
    };
    let Some(entry) = select_entrypoint(root) else {
        return ExecutionResult::without_run(ExecReason::NoEntrypoint, "no recognizable entrypoint");
    };
    run_command(root, &entry.command, &snapshot.origin_url, cfg).with_entrypoint(entry)
}

impl ExecutionResult {
    fn with_entrypoint(mut self, e: Entrypoint) -> Self {
        self.entrypoint = Some(e);
        self
    }
}

/// Runs `command` in `workdir` under the sandbox. The measured duration
/// covers process start to exit; image preparation is not included.
pub fn run_command(workdir: &Path, command: &str, origin: &str, cfg: &SandboxConfig) -> ExecutionResult {
    let workdir = match workdir.canonicalize() {
        Ok(p) => p,
        Err(e) => return ExecutionResult::without_run(ExecReason::SandboxError, e.to_string()),
    };
    let backend = resolve_backend(cfg);
    let log_dir = cfg
        .log_dir
        .clone()
        .unwrap_or_else(|| workdir.parent().unwrap_or(&workdir).join("logs"));
    let log_path = log_dir.join(log_file_name(origin));
    let log = match fs::create_dir_all(&log_dir).and_then(|_| File::create(&log_path)) {
        Ok(f) => f,
        Err(e) => return ExecutionResult::without_run(ExecReason::SandboxError, format!("log file: {e}")),
    };

    let start = Instant::now();
    let (mut child, container) = match spawn(backend, command, &workdir, &log, cfg) {
        Ok(c) => c,
        Err(e) => {
            let mut r = ExecutionResult::without_run(ExecReason::SandboxError, format!("isolation failed: {e}"));
            r.backend = Some(backend);
            return r;
        }
    };
    let limit = Duration::from_secs(cfg.limit_s);
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break Some(s),
            Ok(None) if start.elapsed() >= limit => {
                kill_tree(&mut child, container.as_deref(), &cfg.container_runtime);
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(_) => break None,
        }
    };
    let duration_s = start.elapsed().as_secs_f64();
    let exit_code = status.and_then(|s| s.code());
    let (verdict, reason) = match status {
        None => (Verdict::N, ExecReason::Timeout),
        Some(s) if s.success() => (Verdict::Y, ExecReason::ExitOk),
        // the runtime reports its own failures (missing image, daemon down) as 125
        Some(s) if container.is_some() && s.code() == Some(125) => (Verdict::N, ExecReason::SandboxError),
        Some(_) => (Verdict::N, ExecReason::NonzeroExit),
    };
    drop(log);
    ExecutionResult {
        verdict,
        reason,
        duration_s,
        log_excerpt: excerpt(&log_path),
        entrypoint: None,
        exit_code,
        log_path: Some(log_path),
        backend: Some(backend),
    }
}
