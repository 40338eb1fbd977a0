//! Modality of a fetched artifact from a census of its file kinds.

use serde::{Deserialize, Serialize};

use repcheck_core::modality::{modality_rule, ModalityEvidence};
use repcheck_core::Modality;

use super::snapshot::{FetchStatus, RepositorySnapshot};

const SOURCE_EXTENSIONS: [&str; 30] = [
    "py", "ipynb", "r", "jl", "m", "c", "h", "cc", "cpp", "cxx", "hpp", "java", "kt", "scala", "rs", "go", "js", "ts",
    "cs", "f", "f90", "for", "pl", "rb", "lua", "sh", "bash", "mod", "gms", "zpl",
];

const SOURCE_NAMES: [&str; 3] = ["makefile", "cmakelists.txt", "dockerfile"];

const DATA_EXTENSIONS: [&str; 32] = [
    "csv", "tsv", "dat", "json", "jsonl", "xlsx", "xls", "parquet", "feather", "h5", "hdf5", "npy", "npz", "pkl",
    "pickle", "mat", "arff", "rds", "rdata", "rda", "sqlite", "db", "txt", "out", "log", "tsp", "vrp", "sol", "cnf",
    "mps", "lp", "opt",
];

/// Plain-text files that are documentation rather than data.
const DOC_STEMS: [&str; 6] = ["readme", "license", "licence", "changelog", "requirements", "citation"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalityClassification {
    pub modality: Modality,
    pub code_files: usize,
    pub data_files: usize,
}

fn ext_and_stem(path: &str) -> (String, String) {
    let name = path.rsplit('/').next().unwrap_or(path).to_ascii_lowercase();
    match name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => (ext.to_string(), stem.to_string()),
        _ => (String::new(), name),
    }
}

pub fn is_source_file(path: &str) -> bool {
    let (ext, stem) = ext_and_stem(path);
    let name = path.rsplit('/').next().unwrap_or(path).to_ascii_lowercase();
    SOURCE_NAMES.contains(&name.as_str()) || (!ext.is_empty() && SOURCE_EXTENSIONS.contains(&ext.as_str()) && !stem.is_empty())
}

pub fn is_data_file(path: &str) -> bool {
    let (ext, stem) = ext_and_stem(path);
    if DOC_STEMS.iter().any(|d| stem.starts_with(d)) || is_source_file(path) {
        return false;
    }
    DATA_EXTENSIONS.contains(&ext.as_str())
}

/// Code when any source file is present, data when any data file is; a
/// fetched artifact with neither is `unspecified`. Without an artifact the
/// supplement decides between `pdf_only` and `none`.
pub fn classify_modality(snapshot: Option<&RepositorySnapshot>, has_supplementary_pdf: bool) -> ModalityClassification {
    let files = snapshot
        .filter(|s| s.fetch_status == FetchStatus::Ok)
        .map(|s| s.files.as_slice())
        .unwrap_or_default();
    let code_files = files.iter().filter(|f| is_source_file(&f.path)).count();
    let data_files = files.iter().filter(|f| is_data_file(&f.path)).count();
    let evidence = ModalityEvidence {
        has_artifact: snapshot.is_some(),
        has_code: code_files > 0,
        has_data: data_files > 0,
        has_supplementary_pdf,
    };
    ModalityClassification {
        modality: modality_rule(evidence),
        code_files,
        data_files,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_kinds() {
        assert!(is_source_file("src/solver.cpp"));
        assert!(is_source_file("Makefile"));
        assert!(!is_source_file("results.csv"));
        assert!(is_data_file("results/run1.csv"));
        assert!(is_data_file("instances/a280.tsp"));
        assert!(!is_data_file("README.txt"));
        assert!(!is_data_file("requirements.txt"));
        assert!(!is_data_file("paper.pdf"));
    }

    #[test]
    fn no_snapshot() {
        assert_eq!(classify_modality(None, false).modality, Modality::None);
        assert_eq!(classify_modality(None, true).modality, Modality::PdfOnly);
    }
}
