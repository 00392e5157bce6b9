use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{Dimension, Scorer, ScorerError};

pub const DEFAULT_REQUESTS_PER_MINUTE: u32 = 60;

/// Sends one JSON request body and returns the response body.
pub trait Transport: Send + Sync {
    fn post(&self, url: &str, api_key: &str, body: &str) -> Result<String, ScorerError>;
}

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub base: Duration,
    pub factor: u32,
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            base: Duration::from_secs(1),
            factor: 2,
            max_attempts: 5,
        }
    }
}

impl RetryPolicy {
    /// Wait after the `attempt`-th failure (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        self.base * self.factor.saturating_pow(attempt.saturating_sub(1))
    }
}

#[derive(Debug, Clone)]
pub struct TokenBucket {
    capacity: f64,
    per_second: f64,
    tokens: f64,
    last: Duration,
}

impl TokenBucket {
    /// Starts full; holds at most one minute's worth of tokens.
    pub fn per_minute(requests: u32, now: Duration) -> Self {
        let capacity = f64::from(requests.max(1));
        TokenBucket {
            capacity,
            per_second: capacity / 60.0,
            tokens: capacity,
            last: now,
        }
    }

    /// Takes a token, or reports how long until one is available.
    pub fn try_take(&mut self, now: Duration) -> Result<(), Duration> {
        let elapsed = now.saturating_sub(self.last).as_secs_f64();
        self.tokens = (self.tokens + elapsed * self.per_second).min(self.capacity);
        self.last = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            Ok(())
        } else {
            Err(Duration::from_secs_f64((1.0 - self.tokens) / self.per_second))
        }
    }
}

/// Client for a Perspective-compatible `comments:analyze` endpoint.
pub struct RemoteScorer<T, C = SystemClock> {
    transport: T,
    clock: C,
    endpoint: String,
    api_key: String,
    model: String,
    retry: RetryPolicy,
    bucket: Mutex<TokenBucket>,
}

impl<T: Transport> RemoteScorer<T, SystemClock> {
    pub fn new(transport: T, endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self::with_clock(transport, SystemClock::default(), endpoint, api_key)
    }
}

impl<T: Transport, C: Clock> RemoteScorer<T, C> {
    pub fn with_clock(transport: T, clock: C, endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        let bucket = TokenBucket::per_minute(DEFAULT_REQUESTS_PER_MINUTE, clock.now());
        RemoteScorer {
            transport,
            clock,
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            model: "unversioned".into(),
            retry: RetryPolicy::default(),
            bucket: Mutex::new(bucket),
        }
    }

    pub fn requests_per_minute(self, n: u32) -> Self {
        let bucket = TokenBucket::per_minute(n, self.clock.now());
        RemoteScorer {
            bucket: Mutex::new(bucket),
            ..self
        }
    }

    pub fn retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Model version label folded into the scorer id.
    pub fn model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn request_body(text: &str) -> String {
        let attrs: serde_json::Map<String, Value> = Dimension::ALL
            .iter()
            .map(|d| (d.attribute().to_string(), json!({})))
            .collect();
        json!({
            "comment": { "text": text },
            "languages": ["en"],
            "requestedAttributes": attrs,
            "doNotStore": true,
        })
        .to_string()
    }

    pub fn parse_response(body: &str) -> Result<[f64; 6], ScorerError> {
        let v: Value = serde_json::from_str(body).map_err(|e| ScorerError::Permanent(format!("bad response: {e}")))?;
        let mut out = [0.0; 6];
        for d in Dimension::ALL {
            out[d.index()] = v["attributeScores"][d.attribute()]["summaryScore"]["value"]
                .as_f64()
                .ok_or_else(|| ScorerError::Permanent(format!("response lacks {}", d.attribute())))?;
        }
        Ok(out)
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.bucket.lock().unwrap_or_else(|p| p.into_inner());
                match bucket.try_take(self.clock.now()) {
                    Ok(()) => return,
                    Err(wait) => wait,
                }
            };
            self.clock.sleep(wait);
        }
    }
}

impl<T: Transport, C: Clock> Scorer for RemoteScorer<T, C> {
    fn id(&self) -> String {
        format!("remote:{}:{}", self.endpoint, self.model)
    }

    fn score(&self, text: &str) -> Result<[f64; 6], ScorerError> {
        let body = Self::request_body(text);
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.acquire();
            match self.transport.post(&self.endpoint, &self.api_key, &body) {
                Ok(resp) => return Self::parse_response(&resp),
                Err(ScorerError::Transient(_)) if attempt < self.retry.max_attempts => {
                    self.clock.sleep(self.retry.backoff(attempt));
                }
                Err(e) => return Err(e),
            }
        }
    }
}
