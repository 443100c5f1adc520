use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::{json, Value};

use super::record::{DurationMode, GenerationRecord};
use crate::formats::FormatKind;

pub const DEFAULT_API_KEY_ENV: &str = "ECOSTRUCT_API_KEY";

#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub model_id: &'a str,
    pub instance_id: &'a str,
    pub format: FormatKind,
    pub prompt: &'a str,
}

/// A completion plus its decode-phase measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub output_text: String,
    pub n_tokens: u64,
    pub duration_s: f64,
    pub duration_mode: DurationMode,
    pub energy_kwh: Option<f64>,
    pub ce_kg: Option<f64>,
    /// Fences were already removed upstream (replayed records).
    pub fence_stripped: bool,
    pub failed: bool,
    pub timestamp: DateTime<Utc>,
}

/// A live request that failed after every allowed attempt.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct BackendError {
    pub message: String,
    pub attempts: Vec<String>,
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "backend error: {}", self.message)?;
        for a in &self.attempts {
            write!(f, "\n  {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateError {
    ReplayMiss,
    Backend(BackendError),
}

pub trait Backend: Sync {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Generation, GenerateError>;
}

/// Serves stored records keyed by `(model_id, instance_id, format)`.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    records: HashMap<(String, String, FormatKind), GenerationRecord>,
}

impl ReplayBackend {
    /// Later records for the same key replace earlier ones.
    pub fn new(records: impl IntoIterator<Item = GenerationRecord>) -> Self {
        Self {
            records: records
                .into_iter()
                .map(|r| ((r.model_id.clone(), r.instance_id.clone(), r.format), r))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Generation, GenerateError> {
        let key = (req.model_id.to_string(), req.instance_id.to_string(), req.format);
        let r = self.records.get(&key).ok_or(GenerateError::ReplayMiss)?;
        Ok(Generation {
            output_text: r.output_text.clone(),
            n_tokens: r.n_tokens,
            duration_s: r.duration_s,
            duration_mode: r.duration_mode,
            energy_kwh: r.energy_kwh,
            ce_kg: r.ce_kg,
            fence_stripped: r.fence_stripped,
            failed: r.failed,
            timestamp: r.timestamp,
        })
    }
}

/// OpenAI-compatible chat-completions endpoint settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    /// Full URL of the chat-completions endpoint.
    pub url: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_s: f64,
    /// Total attempts per request, including the first.
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each retry.
    pub backoff_ms: u64,
    /// Stream the completion to time the decode phase alone.
    pub stream: bool,
    pub temperature: f64,
    /// Extra body fields passed through verbatim (top_p, max_tokens, seed, ...).
    pub sampling: BTreeMap<String, Value>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            url: "http://localhost:8000/v1/chat/completions".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout_s: 120.0,
            attempts: 3,
            backoff_ms: 500,
            stream: false,
            temperature: 0.0,
            sampling: BTreeMap::new(),
        }
    }
}

pub struct HttpBackend {
    cfg: HttpConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

/// Outcome of one attempt.
enum Attempt {
    Done(Generation),
    Retry(String),
    Fatal(String),
}

impl HttpBackend {
    /// Reads the API key from `cfg.api_key_env`, if set.
    pub fn new(cfg: HttpConfig) -> Self {
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_api_key(cfg, api_key)
    }

    pub fn with_api_key(cfg: HttpConfig, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_s.max(0.001))))
            .build()
            .new_agent();
        Self { cfg, api_key, agent }
    }

    fn body(&self, req: &GenerationRequest<'_>) -> Value {
        let mut body = json!({
            "model": req.model_id,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": self.cfg.temperature,
        });
        let obj = body.as_object_mut().expect("object literal");
        for (k, v) in &self.cfg.sampling {
            obj.insert(k.clone(), v.clone());
        }
        if self.cfg.stream {
            obj.insert("stream".into(), Value::Bool(true));
            obj.insert("stream_options".into(), json!({"include_usage": true}));
        }
        body
    }

    fn attempt(&self, body: &str) -> Attempt {
        let mut request = self
            .agent
            .post(&self.cfg.url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let started = Instant::now();
        let mut response = match request.send(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(format!("transport: {e}")),
        };
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let detail = response.body_mut().read_to_string().unwrap_or_default();
            let msg = format!("HTTP {status}: {}", detail.chars().take(200).collect::<String>());
            return if status == 429 || status >= 500 {
                Attempt::Retry(msg)
            } else {
                Attempt::Fatal(msg)
            };
        }
        let parsed = if self.cfg.stream {
            read_stream(BufReader::new(response.body_mut().as_reader()))
        } else {
            response
                .body_mut()
                .read_to_string()
                .map_err(|e| format!("reading body: {e}"))
                .and_then(|text| read_completion(&text))
                .map(|(text, n)| (text, n, started.elapsed().as_secs_f64()))
        };
        match parsed {
            Ok((output_text, n_tokens, duration_s)) => Attempt::Done(Generation {
                output_text,
                n_tokens,
                duration_s,
                duration_mode: if self.cfg.stream {
                    DurationMode::Decode
                } else {
                    DurationMode::Roundtrip
                },
                energy_kwh: None,
                ce_kg: None,
                fence_stripped: false,
                failed: false,
                timestamp: Utc::now(),
            }),
            Err(msg) => Attempt::Fatal(msg),
        }
    }
}

impl Backend for HttpBackend {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Generation, GenerateError> {
        let body = self.body(req).to_string();
        let attempts = self.cfg.attempts.max(1);
        let mut log = Vec::new();
        for n in 1..=attempts {
            match self.attempt(&body) {
                Attempt::Done(g) => return Ok(g),
                Attempt::Fatal(msg) => {
                    log.push(format!("attempt {n}: {msg}"));
                    break;
                }
                Attempt::Retry(msg) => {
                    log.push(format!("attempt {n}: {msg}"));
                    if n < attempts {
                        std::thread::sleep(Duration::from_millis(self.cfg.backoff_ms << (n - 1).min(16)));
                    }
                }
            }
        }
        Err(GenerateError::Backend(BackendError {
            message: format!(
                "{} ({}, {}) failed after {} attempt(s)",
                req.instance_id,
                req.format,
                self.cfg.url,
                log.len()
            ),
            attempts: log,
        }))
    }
}

fn completion_tokens(v: &Value) -> Option<u64> {
    v.get("usage")?.get("completion_tokens")?.as_u64()
}

/// `choices[0].message.content` and `usage.completion_tokens`.
fn read_completion(text: &str) -> Result<(String, u64), String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("response is not JSON: {e}"))?;
    let content = v
        .pointer("/choices/0/message/content")
        .ok_or("response lacks choices[0].message.content")?;
    let content = match content {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        _ => return Err("choices[0].message.content is not a string".into()),
    };
    let n = completion_tokens(&v).ok_or("response lacks usage.completion_tokens")?;
    Ok((content, n))
}

/// Server-sent events; duration runs from the first to the last content chunk.
fn read_stream(reader: impl BufRead) -> Result<(String, u64, f64), String> {
    let mut text = String::new();
    let mut tokens = None;
    let mut first: Option<Instant> = None;
    let mut last: Option<Instant> = None;
    for line in reader.lines() {
        let line = line.map_err(|e| format!("reading stream: {e}"))?;
        let Some(data) = line.strip_prefix("data:") else {
            continue;
        };
        let data = data.trim();
        if data == "[DONE]" {
            break;
        }
        let v: Value = serde_json::from_str(data).map_err(|e| format!("bad stream chunk: {e}"))?;
        if let Some(piece) = v.pointer("/choices/0/delta/content").and_then(Value::as_str) {
            if !piece.is_empty() {
                let now = Instant::now();
                first.get_or_insert(now);
                last = Some(now);
                text.push_str(piece);
            }
        }
        if let Some(n) = completion_tokens(&v) {
            tokens = Some(n);
        }
    }
    let n = tokens.ok_or("stream ended without usage.completion_tokens")?;
    let duration = match (first, last) {
        (Some(a), Some(b)) => (b - a).as_secs_f64(),
        _ => 0.0,
    };
    Ok((text, n, duration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// Serves the scripted `(status, body)` responses in order, one per
    /// connection, and keeps the request bodies.
    fn mock(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        std::thread::spawn(move || {
            for (status, body) in script {
                let (mut stream, _) = listener.accept().unwrap();
                log.lock().unwrap().push(read_request(&mut stream));
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (url, seen)
    }

    fn read_request(stream: &mut std::net::TcpStream) -> String {
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        loop {
            let n = stream.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
            let text = String::from_utf8_lossy(&buf).to_string();
            if let Some(end) = text.find("\r\n\r\n") {
                let len = text[..end]
                    .lines()
                    .find_map(|l| {
                        l.to_ascii_lowercase()
                            .strip_prefix("content-length:")
                            .map(|v| v.trim().to_string())
                    })
                    .and_then(|v| v.parse::<usize>().ok())
                    .unwrap_or(0);
                if buf.len() >= end + 4 + len {
                    return format!("{}\n{}", &text[..end], &text[end + 4..]);
                }
            }
            if n == 0 {
                return String::from_utf8_lossy(&buf).to_string();
            }
        }
    }

    fn cfg(url: String) -> HttpConfig {
        HttpConfig {
            url,
            backoff_ms: 1,
            timeout_s: 5.0,
            ..Default::default()
        }
    }

    fn req() -> GenerationRequest<'static> {
        GenerationRequest {
            model_id: "m1",
            instance_id: "i1",
            format: FormatKind::Json,
            prompt: "say hi",
        }
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"{\"a\":1}"}}],"usage":{"prompt_tokens":9,"completion_tokens":5}}"#;

    #[test]
    fn non_streaming_request() {
        let (url, seen) = mock(vec![(200, OK.into())]);
        let mut c = cfg(url);
        c.sampling.insert("top_p".into(), json!(0.9));
        let g = HttpBackend::with_api_key(c, Some("sk-test".into()))
            .generate(&req())
            .unwrap();
        assert_eq!(g.output_text, "{\"a\":1}");
        assert_eq!(g.n_tokens, 5);
        assert_eq!(g.duration_mode, DurationMode::Roundtrip);
        assert!(g.duration_s > 0.0);
        let request = seen.lock().unwrap()[0].clone();
        assert!(request.contains("Authorization: Bearer sk-test") || request.contains("authorization: Bearer sk-test"));
        let body: Value = serde_json::from_str(request.split_once('\n').unwrap().1.lines().last().unwrap()).unwrap();
        assert_eq!(body["model"], "m1");
        assert_eq!(body["messages"][0]["content"], "say hi");
        assert_eq!(body["temperature"].as_f64(), Some(0.0));
        assert_eq!(body["top_p"].as_f64(), Some(0.9));
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let (url, seen) = mock(vec![(503, "busy".into()), (429, "slow down".into()), (200, OK.into())]);
        let g = HttpBackend::with_api_key(cfg(url), None).generate(&req()).unwrap();
        assert_eq!(g.n_tokens, 5);
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn gives_up_after_three_5xx() {
        let (url, seen) = mock(vec![(500, "a".into()), (502, "b".into()), (503, "c".into())]);
        let Err(GenerateError::Backend(e)) = HttpBackend::with_api_key(cfg(url), None).generate(&req()) else {
            panic!("expected a backend error");
        };
        assert_eq!(e.attempts.len(), 3);
        assert!(e.attempts[2].contains("HTTP 503"));
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, seen) = mock(vec![(401, "no key".into())]);
        let Err(GenerateError::Backend(e)) = HttpBackend::with_api_key(cfg(url), None).generate(&req()) else {
            panic!("expected a backend error");
        };
        assert_eq!(e.attempts.len(), 1);
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn unreachable_backend_fails() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        drop(listener);
        let r = HttpBackend::with_api_key(cfg(url), None).generate(&req());
        assert!(matches!(r, Err(GenerateError::Backend(e)) if e.attempts.len() == 3));
    }

    #[test]
    fn streaming_measures_decode() {
        let sse = [
            r#"data: {"choices":[{"delta":{"role":"assistant"}}]}"#,
            r#"data: {"choices":[{"delta":{"content":"a: "}}]}"#,
            r#"data: {"choices":[{"delta":{"content":"1"}}]}"#,
            r#"data: {"choices":[],"usage":{"completion_tokens":3}}"#,
            "data: [DONE]",
        ]
        .join("\n\n");
        let (url, seen) = mock(vec![(200, sse)]);
        let mut c = cfg(url);
        c.stream = true;
        let g = HttpBackend::with_api_key(c, None).generate(&req()).unwrap();
        assert_eq!(g.output_text, "a: 1");
        assert_eq!(g.n_tokens, 3);
        assert_eq!(g.duration_mode, DurationMode::Decode);
        assert!(seen.lock().unwrap()[0].contains("\"stream\":true"));
    }

    #[test]
    fn malformed_completion_is_fatal() {
        assert!(read_completion("{}").is_err());
        assert!(read_completion(r#"{"choices":[{"message":{"content":"x"}}]}"#).is_err());
        assert_eq!(
            read_completion(r#"{"choices":[{"message":{"content":null}}],"usage":{"completion_tokens":0}}"#),
            Ok((String::new(), 0))
        );
    }
}
