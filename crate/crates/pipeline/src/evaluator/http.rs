//! OpenAI-compatible chat-completions provider.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use repcheck_core::checklist::ProviderInfo;

use super::provider::{Provider, ProviderError, ProviderRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpProviderConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: u64,
    /// Transport-level retries for 429 and 5xx before giving up.
    pub transport_retries: u32,
    pub retry_wait_s: f64,
    /// Extra request-body fields such as `temperature`; empty leaves
    /// sampling at the provider's defaults.
    pub extra: BTreeMap<String, Value>,
}

impl Default for HttpProviderConfig {
    fn default() -> Self {
        HttpProviderConfig {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-5-nano".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_s: 300,
            transport_retries: 4,
            retry_wait_s: 5.0,
            extra: BTreeMap::new(),
        }
    }
}

pub struct HttpProvider {
    cfg: HttpProviderConfig,
    key: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(cfg: HttpProviderConfig) -> Result<Self, ProviderError> {
        let key = std::env::var(&cfg.api_key_env)
            .map_err(|_| ProviderError::Unavailable(format!("environment variable {} is not set", cfg.api_key_env)))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_s))
            .build()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        Ok(HttpProvider { cfg, key, client })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.endpoint.trim_end_matches('/'))
    }

    pub fn body(&self, request: &ProviderRequest) -> Value {
        let mut body = json!({
            "model": self.cfg.model,
            "messages": [
                { "role": "system", "content": request.system_prompt },
                { "role": "user", "content": request.user_content }
            ],
            "response_format": {
                "type": "json_schema",
                "json_schema": { "name": "field_answer", "strict": true, "schema": request.response_schema }
            },
            "max_completion_tokens": request.max_response_tokens
        });
        for (k, v) in &self.cfg.extra {
            body[k] = v.clone();
        }
        body
    }
}

/// Message content of the first choice.
pub(crate) fn completion_text(v: &Value) -> Option<String> {
    v["choices"][0]["message"]["content"].as_str().map(str::to_string)
}

impl Provider for HttpProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        let body = self.body(request);
        let mut last = String::new();
        for attempt in 0..=self.cfg.transport_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_secs_f64(self.cfg.retry_wait_s * f64::from(attempt)));
            }
            let resp = match self.client.post(self.url()).bearer_auth(&self.key).json(&body).send() {
                Ok(r) => r,
                Err(e) if e.is_timeout() || e.is_connect() => {
                    last = e.to_string();
                    continue;
                }
                Err(e) => return Err(ProviderError::Unavailable(e.to_string())),
            };
            let status = resp.status();
            if status.as_u16() == 429 || status.is_server_error() {
                last = format!("HTTP {status}");
                continue;
            }
            if status.as_u16() == 401 || status.as_u16() == 403 {
                return Err(ProviderError::Unavailable(format!("HTTP {status}: check the API key")));
            }
            let text = resp.text().map_err(|e| ProviderError::Unavailable(e.to_string()))?;
            if !status.is_success() {
                return Err(ProviderError::Rejected(format!("HTTP {status}: {text}")));
            }
            let v: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Rejected(e.to_string()))?;
            return completion_text(&v).ok_or_else(|| ProviderError::Rejected("response has no message content".into()));
        }
        Err(ProviderError::Unavailable(format!("gave up after retries: {last}")))
    }

    fn describe(&self) -> ProviderInfo {
        let mut settings: BTreeMap<String, String> =
            self.cfg.extra.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        settings.insert("endpoint".into(), self.cfg.endpoint.clone());
        ProviderInfo {
            provider: "openai-compatible".into(),
            model: self.cfg.model.clone(),
            settings,
        }
    }
}
