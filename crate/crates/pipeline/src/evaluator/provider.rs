//! The text-completion provider interface and request rate limiting.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use repcheck_core::checklist::ProviderInfo;

/// One field evaluation request. `user_content` always carries the whole
/// paper text; there is no chunking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub paper_id: String,
    pub item_id: String,
    pub system_prompt: String,
    /// JSON schema of the structured response: the item's allowed values
    /// plus a disambiguation string.
    pub response_schema: serde_json::Value,
    pub user_content: String,
    pub max_response_tokens: usize,
}

impl ProviderRequest {
    /// Values the response schema admits for `answer`.
    pub fn allowed_values(&self) -> Vec<String> {
        self.response_schema["properties"]["answer"]["enum"]
            .as_array()
            .map(|v| v.iter().filter_map(|x| x.as_str().map(str::to_string)).collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Network, authentication or quota failure; that paper is abandoned and
    /// can be resumed later.
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    /// The provider answered but refused this request; counts as a failed
    /// attempt.
    #[error("request rejected: {0}")]
    Rejected(String),
}

/// A text-completion backend. Implementations must be safe to call from
/// several worker threads.
pub trait Provider: Send + Sync {
    fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError>;
    fn describe(&self) -> ProviderInfo;
}

/// Global ceiling on request starts per minute, shared by all workers.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    /// `None` or zero disables limiting.
    pub fn per_minute(requests: Option<u32>) -> Self {
        let interval = match requests {
            Some(r) if r > 0 => Duration::from_secs_f64(60.0 / f64::from(r)),
            _ => Duration::ZERO,
        };
        RateLimiter {
            interval,
            next: Mutex::new(None),
        }
    }

    /// Blocks until the caller may start a request.
    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut next = self.next.lock().expect("rate limiter lock");
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

/// Wraps a provider so every request first passes a shared [`RateLimiter`].
pub struct RateLimited<P> {
    inner: P,
    limiter: std::sync::Arc<RateLimiter>,
}

impl<P: Provider> RateLimited<P> {
    pub fn new(inner: P, limiter: std::sync::Arc<RateLimiter>) -> Self {
        RateLimited { inner, limiter }
    }
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }

    fn describe(&self) -> ProviderInfo {
        (**self).describe()
    }
}

impl<P: Provider> Provider for RateLimited<P> {
    fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        self.limiter.acquire();
        self.inner.complete(request)
    }

    fn describe(&self) -> ProviderInfo {
        self.inner.describe()
    }
}
