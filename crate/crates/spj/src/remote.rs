//! Remote SPJ client: POST /spj {query, facts} -> {derivation}.
//!
//! Unparseable model outputs degrade to Null and are counted rather than
//! failing the query (parse failures were a small but real failure mode for
//! learned SPJ models, ~1-2% of outputs). Transport errors are retried,
//! then likewise degrade to Null under their own counter.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use factdb_core::{Database, Query, SupportSet};
use serde::{Deserialize, Serialize};

use crate::{parse_derivation, Derivation, SpjError, SpjOperator};

#[derive(Debug, Clone)]
pub struct RemoteSpjConfig {
    /// `host:port` of the SPJ service.
    pub endpoint: String,
    pub timeout: Duration,
    pub retries: u32,
    pub max_in_flight: usize,
}

impl Default for RemoteSpjConfig {
    fn default() -> Self {
        RemoteSpjConfig {
            endpoint: "127.0.0.1:8737".to_string(),
            timeout: Duration::from_secs(10),
            retries: 2,
            max_in_flight: 8,
        }
    }
}

#[derive(Serialize)]
struct SpjRequest<'a> {
    query: &'a str,
    facts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct SpjResponse {
    derivation: String,
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Gate {
        Gate { permits: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut p = self.permits.lock().unwrap();
        while *p == 0 {
            p = self.cv.wait(p).unwrap();
        }
        *p -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct RemoteSpj {
    config: RemoteSpjConfig,
    gate: Gate,
    parse_failures: AtomicU64,
    transport_failures: AtomicU64,
}

impl RemoteSpj {
    pub fn new(config: RemoteSpjConfig) -> RemoteSpj {
        let gate = Gate::new(config.max_in_flight);
        RemoteSpj { config, gate, parse_failures: AtomicU64::new(0), transport_failures: AtomicU64::new(0) }
    }

    pub fn transport_failures(&self) -> u64 {
        self.transport_failures.load(Ordering::Relaxed)
    }

    fn post_once(&self, path: &str, body: &str) -> Result<String, SpjError> {
        let transport = |e: std::io::Error| SpjError::Transport(e.to_string());
        let addr = self
            .config
            .endpoint
            .parse::<std::net::SocketAddr>()
            .map_err(|e| SpjError::Transport(format!("bad endpoint {}: {e}", self.config.endpoint)))?;
        let stream = TcpStream::connect_timeout(&addr, self.config.timeout).map_err(transport)?;
        stream.set_read_timeout(Some(self.config.timeout)).map_err(transport)?;
        stream.set_write_timeout(Some(self.config.timeout)).map_err(transport)?;
        let mut stream = stream;
        let request = format!(
            "POST {path} HTTP/1.1\r\nHost: {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            self.config.endpoint,
            body.len(),
        );
        stream.write_all(request.as_bytes()).map_err(transport)?;

        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).map_err(transport)?;
        let header_end = raw
            .windows(4)
            .position(|w| w == b"\r\n\r\n")
            .ok_or_else(|| SpjError::Transport("malformed HTTP response (no header end)".into()))?;
        let head = String::from_utf8_lossy(&raw[..header_end]);
        let status = head
            .lines()
            .next()
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|c| c.parse::<u16>().ok())
            .ok_or_else(|| SpjError::Transport("malformed HTTP status line".into()))?;
        if status != 200 {
            return Err(SpjError::Transport(format!("HTTP status {status}")));
        }
        let mut body_bytes = raw[header_end + 4..].to_vec();
        // Honor Content-Length when present (the connection may also just close).
        if let Some(len) = head.lines().skip(1).find_map(|l| {
            let (k, v) = l.split_once(':')?;
            k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse::<usize>().ok())?
        }) {
            body_bytes.truncate(len);
        }
        String::from_utf8(body_bytes)
            .map_err(|_| SpjError::Transport("response body is not UTF-8".into()))
    }

    fn post_with_retries(&self, path: &str, body: &str) -> Result<String, SpjError> {
        let _permit = self.gate.acquire();
        let mut last = None;
        for _ in 0..=self.config.retries {
            match self.post_once(path, body) {
                Ok(resp) => return Ok(resp),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| SpjError::Transport("unreachable".into())))
    }
}

impl SpjOperator for RemoteSpj {
    fn derive(
        &self,
        query: &Query,
        support: &SupportSet,
        db: &Database,
    ) -> Result<Derivation, SpjError> {
        let mut facts = Vec::with_capacity(support.len());
        for id in support.ids() {
            let fact = db.get(id).ok_or(SpjError::UnknownFact(id))?;
            facts.push(fact.text.as_str());
        }
        let body = serde_json::to_string(&SpjRequest { query: &query.text, facts })
            .map_err(|e| SpjError::Transport(e.to_string()))?;
        let raw = match self.post_with_retries("/spj", &body) {
            Ok(raw) => raw,
            Err(_) => {
                // Retries exhausted: degrade to Null, count the event.
                self.transport_failures.fetch_add(1, Ordering::Relaxed);
                return Ok(Derivation::Null);
            }
        };
        let parsed: SpjResponse = match serde_json::from_str(&raw) {
            Ok(p) => p,
            Err(_) => {
                self.parse_failures.fetch_add(1, Ordering::Relaxed);
                return Ok(Derivation::Null);
            }
        };
        match parse_derivation(&parsed.derivation) {
            Ok(d) => Ok(d),
            Err(_) => {
                self.parse_failures.fetch_add(1, Ordering::Relaxed);
                Ok(Derivation::Null)
            }
        }
    }

    fn parse_failures(&self) -> u64 {
        self.parse_failures.load(Ordering::Relaxed)
    }
}
