//! Live chat-completions backend. One generic HTTP shape covers the
//! OpenRouter-compatible provider class; endpoint, key, and model come from
//! the environment or CLI flags.

use std::time::Duration;

use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::{BackendResponse, LlmBackend, LlmRequest};

pub const ENDPOINT_ENV: &str = "TRUSTDESC_LLM_ENDPOINT";
pub const API_KEY_ENV: &str = "TRUSTDESC_LLM_API_KEY";

const MAX_RETRIES: u32 = 3;

pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Backend(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            api_key,
            client,
        })
    }

    pub fn from_env() -> Result<Self> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| Error::Config(format!("{ENDPOINT_ENV} not set for live llm mode")))?;
        let api_key = std::env::var(API_KEY_ENV).ok();
        Self::new(endpoint, api_key)
    }

    fn call_once(&self, req: &LlmRequest) -> Result<BackendResponse> {
        let body = json!({
            "model": req.model,
            "temperature": req.temperature,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": req.purpose.as_str().replace('-', "_"),
                    "schema": req.response_schema,
                },
            },
        });
        let mut http = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            http = http.bearer_auth(key);
        }
        let resp = http.send().map_err(|e| Error::Backend(e.to_string()))?;
        let status = resp.status();
        let payload: Value = resp.json().map_err(|e| Error::Backend(e.to_string()))?;
        if !status.is_success() {
            return Err(Error::Backend(format!(
                "http {status}: {}",
                payload.to_string().chars().take(400).collect::<String>()
            )));
        }
        let text = payload["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| Error::Backend("response missing choices[0].message.content".into()))?
            .to_string();
        Ok(BackendResponse {
            text,
            prompt_tokens: payload["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            completion_tokens: payload["usage"]["completion_tokens"].as_u64().unwrap_or(0),
        })
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, req: &LlmRequest) -> Result<BackendResponse> {
        let mut delay = Duration::from_millis(500);
        let mut last_err = None;
        for _ in 0..MAX_RETRIES {
            match self.call_once(req) {
                Ok(resp) => return Ok(resp),
                Err(err) => {
                    last_err = Some(err);
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Backend("exhausted retries".into())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::LlmPurpose;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    /// Minimal one-shot chat-completions fixture: fails the first request with
    /// a 500, then serves a canned completion.
    fn spawn_fixture(fail_first: bool) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            let mut first = true;
            for stream in listener.incoming() {
                let mut stream = stream.unwrap();
                let mut buf = [0u8; 65536];
                let mut read = 0;
                loop {
                    let n = stream.read(&mut buf[read..]).unwrap_or(0);
                    read += n;
                    let text = String::from_utf8_lossy(&buf[..read]);
                    if n == 0 || text.contains("\r\n\r\n") {
                        if let Some(header_end) = text.find("\r\n\r\n") {
                            let cl = text
                                .lines()
                                .find(|l| l.to_ascii_lowercase().starts_with("content-length"))
                                .and_then(|l| l.split(':').nth(1))
                                .and_then(|v| v.trim().parse::<usize>().ok())
                                .unwrap_or(0);
                            if read >= header_end + 4 + cl {
                                break;
                            }
                        } else if n == 0 {
                            break;
                        }
                    }
                }
                let body = if fail_first && first {
                    first = false;
                    r#"{"error":"overloaded"}"#
                } else {
                    r#"{"choices":[{"message":{"content":"{\"ok\":true}"}}],"usage":{"prompt_tokens":7,"completion_tokens":3}}"#
                };
                let status = if fail_first && body.contains("error") {
                    "500 Internal Server Error"
                } else {
                    "200 OK"
                };
                let resp = format!(
                    "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
                if !(fail_first && body.contains("error")) {
                    break;
                }
            }
        });
        format!("http://{addr}/v1/chat/completions")
    }

    fn request() -> LlmRequest {
        LlmRequest::new(
            LlmPurpose::Judge,
            "sys",
            "user",
            serde_json::json!({"type":"object"}),
            "m",
        )
    }

    #[test]
    fn parses_completion_and_usage() {
        let endpoint = spawn_fixture(false);
        let backend = HttpBackend::new(endpoint, Some("key".into())).unwrap();
        let resp = backend.complete(&request()).unwrap();
        assert_eq!(resp.text, "{\"ok\":true}");
        assert_eq!(resp.prompt_tokens, 7);
        assert_eq!(resp.completion_tokens, 3);
    }

    #[test]
    fn retries_after_server_error() {
        let endpoint = spawn_fixture(true);
        let backend = HttpBackend::new(endpoint, None).unwrap();
        let resp = backend.complete(&request()).unwrap();
        assert_eq!(resp.text, "{\"ok\":true}");
    }
}
