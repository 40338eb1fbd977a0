//! Choosing what to run in a fetched artifact.
//!
//! Priority: a run command documented in a README, then a conventional
//! entry file at the root, then a build script followed by the binary it
//! produces.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum EntrypointSource {
    Readme { file: String, line: usize },
    ConventionalFile { file: String },
    BuildScript { file: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entrypoint {
    /// Shell command run from the artifact root.
    pub command: String,
    #[serde(flatten)]
    pub source: EntrypointSource,
}

static RUN_COMMAND: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(python3?|bash|sh|Rscript|julia|java|node|make|\./[\w.\-/]+)(\s|$)").expect("valid regex")
});

/// Commands that install or fetch rather than run.
fn is_setup(cmd: &str) -> bool {
    ["pip ", "-m pip", "setup.py", "install", "git clone", "conda ", "apt", "wget ", "curl "]
        .iter()
        .any(|w| cmd.contains(w))
}

const CONVENTIONAL: [(&str, &str); 9] = [
    ("main.py", "python3 main.py"),
    ("run.py", "python3 run.py"),
    ("__main__.py", "python3 __main__.py"),
    ("app.py", "python3 app.py"),
    ("run.sh", "sh run.sh"),
    ("main.sh", "sh main.sh"),
    ("main.R", "Rscript main.R"),
    ("run.R", "Rscript run.R"),
    ("main.jl", "julia main.jl"),
];

/// Runs the newest executable the build produced.
const RUN_BUILT: &str = "f=$(find . -path ./.git -prune -o -type f -perm -u+x -newer .build-stamp -print | sort | head -n 1); \
[ -n \"$f\" ] && exec \"$f\"";

fn readme_command(root: &Path, root_files: &[String]) -> Option<Entrypoint> {
    let mut readmes: Vec<&String> = root_files
        .iter()
        .filter(|f| f.to_ascii_lowercase().starts_with("readme"))
        .collect();
    readmes.sort();
    for name in readmes {
        let Ok(text) = std::fs::read_to_string(root.join(name)) else {
            continue;
        };
        let mut in_fence = false;
        for (i, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.starts_with("```") || trimmed.starts_with("~~~") {
                in_fence = !in_fence;
                continue;
            }
            let prompted = ["$ ", "> ", "% "].iter().find_map(|p| trimmed.strip_prefix(p));
            let indented = raw.starts_with("    ") || raw.starts_with('\t');
            let candidate = match prompted {
                Some(c) => c.trim(),
                None if in_fence || indented => trimmed,
                None => continue,
            };
            if RUN_COMMAND.is_match(candidate) && !is_setup(candidate) {
                return Some(Entrypoint {
                    command: candidate.to_string(),
                    source: EntrypointSource::Readme {
                        file: name.clone(),
                        line: i + 1,
                    },
                });
            }
        }
    }
    None
}

/// Picks an entrypoint among the files directly under `root`.
pub fn select_entrypoint(root: &Path) -> Option<Entrypoint> {
    let mut root_files: Vec<String> = std::fs::read_dir(root)
        .ok()?
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    root_files.sort();

    if let Some(e) = readme_command(root, &root_files) {
        return Some(e);
    }
    for (file, command) in CONVENTIONAL {
        if root_files.iter().any(|f| f == file) {
            return Some(Entrypoint {
                command: command.to_string(),
                source: EntrypointSource::ConventionalFile { file: file.to_string() },
            });
        }
    }
    let build = if root_files.iter().any(|f| f == "Makefile" || f == "makefile") {
        Some(("Makefile", "make"))
    } else if root_files.iter().any(|f| f == "CMakeLists.txt") {
        Some(("CMakeLists.txt", "cmake -S . -B build && cmake --build build"))
    } else if root_files.iter().any(|f| f == "build.sh") {
        Some(("build.sh", "sh build.sh"))
    } else {
        None
    };
    build.map(|(file, cmd)| Entrypoint {
        command: format!("touch .build-stamp && sleep 1 && {cmd} && {RUN_BUILT}"),
        source: EntrypointSource::BuildScript { file: file.to_string() },
    })
}
