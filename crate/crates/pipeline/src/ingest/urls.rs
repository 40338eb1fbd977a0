//! URL extraction and normalization over extracted paper text.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use url::Url;

use repcheck_core::LinkRef;

use super::hosts::HostRules;

/// Scheme forms, including the damaged `http//x` and `https:/x` variants
/// that text extraction sometimes produces.
static SCHEME_URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\b(https?|ftp)(:?)(/{1,2})([^\s<>"'`{}|\\^\[\]]+)"#).expect("valid regex")
});

const URL_BODY: &str = r#"[^\s<>"'`{}|\\^\[\]]*"#;

fn bare_host_regex(rules: &HostRules) -> Regex {
    let mut hosts: Vec<String> = rules
        .repository_hosts
        .iter()
        .chain(&rules.archive_hosts)
        .chain(&rules.dataset_hosts)
        .map(|h| regex::escape(h))
        .collect();
    hosts.push("doi\\.org".into());
    hosts.sort_by_key(|h| std::cmp::Reverse(h.len()));
    let pattern = format!(r"(?i)\b(?:www\.)?(?:{})/{URL_BODY}|\bwww\.[a-z0-9-]+(?:\.[a-z0-9-]+)+{URL_BODY}", hosts.join("|"));
    Regex::new(&pattern).expect("valid regex")
}

/// Strips trailing sentence punctuation and unbalanced closing brackets.
fn trim_trailing(s: &str) -> &str {
    let mut s = s;
    loop {
        let Some(last) = s.chars().last() else {
            return s;
        };
        let strip = match last {
            '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '*' => true,
            ')' => s.matches('(').count() < s.matches(')').count(),
            _ => false,
        };
        if !strip {
            return s;
        }
        s = &s[..s.len() - last.len_utf8()];
    }
}

/// Parses and canonicalizes a candidate; `None` when there is no host.
pub fn normalize_url(candidate: &str) -> Option<Url> {
    let mut url = Url::parse(candidate).ok()?;
    if !matches!(url.scheme(), "http" | "https" | "ftp") {
        return None;
    }
    let host = url.host_str()?;
    if !host.contains('.') {
        return None;
    }
    if url.path().len() > 1 && url.path().ends_with('/') {
        let trimmed = url.path().trim_end_matches('/').to_string();
        url.set_path(&trimmed);
    }
    Some(url)
}

/// Links with the default host rules.
pub fn extract_urls(text: &str) -> Vec<LinkRef> {
    extract_urls_with(text, &HostRules::default())
}

/// Finds URLs in `text`, deduplicated by normalized form in order of first
/// occurrence. Scheme-less forms on known hosts are promoted to https.
pub fn extract_urls_with(text: &str, rules: &HostRules) -> Vec<LinkRef> {
    let mut found: Vec<(usize, &str, String)> = Vec::new();
    let mut covered: Vec<(usize, usize)> = Vec::new();

    for caps in SCHEME_URL.captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let colon = !caps[2].is_empty();
        let slashes = caps[3].len();
        // "http/..." with neither colon nor double slash is not a URL
        if !colon && slashes < 2 {
            continue;
        }
        let raw = trim_trailing(whole.as_str());
        let rest = trim_trailing(&caps[4]);
        let candidate = format!("{}://{}", caps[1].to_ascii_lowercase(), rest);
        covered.push((whole.start(), whole.end()));
        found.push((whole.start(), raw, candidate));
    }

    for m in bare_host_regex(rules).find_iter(text) {
        if covered.iter().any(|&(a, b)| m.start() >= a && m.start() < b) {
            continue;
        }
        let raw = trim_trailing(m.as_str());
        found.push((m.start(), raw, format!("https://{raw}")));
    }
    found.sort_by_key(|f| f.0);

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (start, raw, candidate) in found {
        let Some(url) = normalize_url(&candidate) else {
            continue;
        };
        let key = url.to_string();
        if !seen.insert(key.clone()) {
            continue;
        }
        out.push(LinkRef {
            kind: rules.classify(&url),
            url: key,
            source_offset: text[..start].chars().count(),
            raw: raw.to_string(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_period_stripped() {
        let links = extract_urls("code at https://example.org/repo.");
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].url, "https://example.org/repo");
        assert_eq!(links[0].raw, "https://example.org/repo");
    }

    #[test]
    fn duplicates_collapse_to_first_occurrence() {
        let t = "see https://github.com/a/b and again https://github.com/a/b/.";
        let links = extract_urls(t);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].source_offset, 4);
    }

    #[test]
    fn schemeless_known_host_promoted() {
        let links = extract_urls("available at github.com/org/tool (MIT).");
        assert_eq!(links[0].url, "https://github.com/org/tool");
        assert_eq!(links[0].kind, repcheck_core::LinkKind::Repository);
    }

    #[test]
    fn balanced_parentheses_kept() {
        let links = extract_urls("(see https://en.wikipedia.org/wiki/Foo_(bar))");
        assert_eq!(links[0].url, "https://en.wikipedia.org/wiki/Foo_(bar)");
    }

    #[test]
    fn damaged_schemes_repaired() {
        let links = extract_urls("http//github.com/a/b and https:/zenodo.org/records/9");
        let urls: Vec<_> = links.iter().map(|l| l.url.as_str()).collect();
        assert_eq!(urls, ["http://github.com/a/b", "https://zenodo.org/records/9"]);
    }

    #[test]
    fn offsets_count_characters() {
        let t = "é https://example.org/x";
        assert_eq!(extract_urls(t)[0].source_offset, 2);
    }

    #[test]
    fn no_urls() {
        assert!(extract_urls("plain text, e.g. nothing here").is_empty());
    }
}
