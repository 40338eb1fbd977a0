//! Host allowlists used to classify links and judge persistence.

use serde::{Deserialize, Serialize};
use url::Url;

use repcheck_core::LinkKind;

/// Allowlists as data; the defaults cover the common code-hosting, archival
/// and dataset services. Entries match the host exactly or any subdomain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HostRules {
    pub repository_hosts: Vec<String>,
    pub archive_hosts: Vec<String>,
    pub dataset_hosts: Vec<String>,
    /// DOI prefixes registered by archival services (`10.5281` is Zenodo).
    pub archival_doi_prefixes: Vec<String>,
    /// Hosts treated as persistent dissemination channels.
    pub persistent_hosts: Vec<String>,
    /// Publisher storage: host plus required path fragment, e.g.
    /// `dl.acm.org` with `/suppl`.
    pub publisher_supplement: Vec<PathRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRule {
    pub host: String,
    pub path_contains: String,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for HostRules {
    fn default() -> Self {
        HostRules {
            repository_hosts: strings(&[
                "github.com",
                "gitlab.com",
                "bitbucket.org",
                "codeberg.org",
                "sourceforge.net",
                "git.sr.ht",
                "gitee.com",
            ]),
            archive_hosts: strings(&[
                "zenodo.org",
                "figshare.com",
                "osf.io",
                "softwareheritage.org",
                "datadryad.org",
                "data.mendeley.com",
                "codeocean.com",
                "dataverse.harvard.edu",
            ]),
            dataset_hosts: strings(&[
                "kaggle.com",
                "archive.ics.uci.edu",
                "openml.org",
                "huggingface.co",
                "comopt.ifi.uni-heidelberg.de",
                "people.brunel.ac.uk",
            ]),
            archival_doi_prefixes: strings(&["10.5281", "10.6084", "10.5061", "10.17632", "10.24433", "10.17605"]),
            persistent_hosts: strings(&[
                "zenodo.org",
                "figshare.com",
                "osf.io",
                "softwareheritage.org",
                "datadryad.org",
                "data.mendeley.com",
                "codeocean.com",
                "dataverse.harvard.edu",
            ]),
            publisher_supplement: vec![PathRule {
                host: "dl.acm.org".into(),
                path_contains: "/suppl".into(),
            }],
        }
    }
}

fn host_matches(host: &str, entry: &str) -> bool {
    let host = host.trim_start_matches("www.");
    host == entry || host.ends_with(&format!(".{entry}"))
}

const ARCHIVE_EXTENSIONS: [&str; 7] = [".zip", ".tar", ".tar.gz", ".tgz", ".tar.bz2", ".tar.xz", ".7z"];
const DATA_EXTENSIONS: [&str; 6] = [".csv", ".tsv", ".json", ".dat", ".txt", ".xlsx"];

impl HostRules {
    fn any(list: &[String], host: &str) -> bool {
        list.iter().any(|e| host_matches(host, e))
    }

    fn doi_prefix(url: &Url) -> Option<&str> {
        let host = url.host_str()?;
        if !host_matches(host, "doi.org") {
            return None;
        }
        url.path().trim_start_matches('/').split('/').next()
    }

    pub fn classify(&self, url: &Url) -> LinkKind {
        let Some(host) = url.host_str() else {
            return LinkKind::Other;
        };
        let path = url.path().to_ascii_lowercase();
        if url.scheme() == "git" || path.ends_with(".git") || Self::any(&self.repository_hosts, host) {
            // a bare host page is not a repository
            if path.trim_matches('/').is_empty() {
                return LinkKind::Other;
            }
            return LinkKind::Repository;
        }
        if Self::any(&self.archive_hosts, host) || self.is_publisher_supplement(url) {
            return LinkKind::Archive;
        }
        if let Some(prefix) = Self::doi_prefix(url) {
            return if self.archival_doi_prefixes.iter().any(|p| p == prefix) {
                LinkKind::Archive
            } else {
                LinkKind::Other
            };
        }
        if Self::any(&self.dataset_hosts, host) {
            return LinkKind::Dataset;
        }
        if ARCHIVE_EXTENSIONS.iter().any(|e| path.ends_with(e)) {
            return LinkKind::Archive;
        }
        if DATA_EXTENSIONS.iter().any(|e| path.ends_with(e)) {
            return LinkKind::Dataset;
        }
        LinkKind::Other
    }

    fn is_publisher_supplement(&self, url: &Url) -> bool {
        let Some(host) = url.host_str() else {
            return false;
        };
        self.publisher_supplement
            .iter()
            .any(|r| host_matches(host, &r.host) && url.path().contains(&r.path_contains))
    }

    /// True for archival hosts, archival DOI prefixes and publisher
    /// supplementary storage.
    pub fn is_persistent(&self, url: &Url) -> bool {
        let Some(host) = url.host_str() else {
            return false;
        };
        if Self::any(&self.persistent_hosts, host) || self.is_publisher_supplement(url) {
            return true;
        }
        Self::doi_prefix(url).is_some_and(|p| self.archival_doi_prefixes.iter().any(|x| x == p))
    }
}

/// Persistence check on a raw URL string; malformed URLs are not persistent.
pub fn is_persistent_host(url: &str, rules: &HostRules) -> bool {
    Url::parse(url).is_ok_and(|u| rules.is_persistent(&u))
}
