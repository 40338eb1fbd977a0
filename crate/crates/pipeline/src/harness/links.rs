//! Link accessibility probing.

use std::error::Error as _;
use std::time::Duration;

use chrono::{DateTime, Utc};
use reqwest::blocking::Client;
use reqwest::redirect::Policy;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpSettings {
    pub timeout_s: u64,
    pub max_redirects: usize,
    pub user_agent: String,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            timeout_s: 20,
            max_redirects: 10,
            user_agent: concat!("repcheck/", env!("CARGO_PKG_VERSION")).into(),
        }
    }
}

impl HttpSettings {
    pub fn client(&self) -> reqwest::Result<Client> {
        Client::builder()
            .timeout(Duration::from_secs(self.timeout_s))
            .connect_timeout(Duration::from_secs(self.timeout_s.min(10)))
            .redirect(Policy::limited(self.max_redirects))
            .user_agent(self.user_agent.clone())
            .build()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusClass {
    Success,
    ClientError,
    ServerError,
    TooManyRedirects,
    DnsFailure,
    ConnectFailure,
    Timeout,
    InvalidUrl,
    OtherError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessibilityResult {
    pub url: String,
    pub accessible: bool,
    pub status_class: StatusClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub http_status: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_url: Option<String>,
    pub checked_at: DateTime<Utc>,
}

/// Classifies a transport error by walking its source chain.
pub(crate) fn error_class(e: &reqwest::Error) -> StatusClass {
    if e.is_redirect() {
        return StatusClass::TooManyRedirects;
    }
    if e.is_timeout() {
        return StatusClass::Timeout;
    }
    if e.is_builder() {
        return StatusClass::InvalidUrl;
    }
    let mut chain = String::new();
    let mut src: Option<&dyn std::error::Error> = e.source();
    while let Some(s) = src {
        chain.push_str(&s.to_string().to_ascii_lowercase());
        chain.push(' ');
        src = s.source();
    }
    if chain.contains("dns") || chain.contains("lookup") || chain.contains("name or service not known") {
        StatusClass::DnsFailure
    } else if e.is_connect() {
        StatusClass::ConnectFailure
    } else {
        StatusClass::OtherError
    }
}

/// Probes `url` with a bounded GET, following redirects up to the limit.
/// Accessible means the final response is 2xx. Failures are result states.
pub fn check_link(url: &str, settings: &HttpSettings) -> AccessibilityResult {
    let checked_at = Utc::now();
    let result = |class, status: Option<u16>, final_url: Option<String>| AccessibilityResult {
        url: url.to_string(),
        accessible: class == StatusClass::Success,
        status_class: class,
        http_status: status,
        final_url,
        checked_at,
    };
    if url::Url::parse(url).map(|u| u.host_str().is_none()).unwrap_or(true) {
        return result(StatusClass::InvalidUrl, None, None);
    }
    let client = match settings.client() {
        Ok(c) => c,
        Err(_) => return result(StatusClass::OtherError, None, None),
    };
    match client.get(url).send() {
        Ok(resp) => {
            let status = resp.status();
            let class = if status.is_success() {
                StatusClass::Success
            } else if status.is_client_error() {
                StatusClass::ClientError
            } else if status.is_server_error() {
                StatusClass::ServerError
            } else if status.is_redirection() {
                StatusClass::TooManyRedirects
            } else {
                StatusClass::OtherError
            };
            result(class, Some(status.as_u16()), Some(resp.url().to_string()))
        }
        Err(e) => result(error_class(&e), e.status().map(|s| s.as_u16()), None),
    }
}
