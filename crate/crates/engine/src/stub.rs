//! Loopback HTTP stub implementing both remote protocols for demos and
//! tests: `POST /encode` answers with deterministic hashed bag-of-words
//! vectors (an idf-free cousin of the built-in lexical encoder), and
//! `POST /spj` either abstains with NULL or returns deliberately malformed
//! derivations to exercise the parse-failure pathway.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::str::FromStr;

use factdb_ssg::tokenize;
use serde::Deserialize;
use serde_json::json;

use crate::error::EngineError;

/// What the stub answers on `/spj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpjBehavior {
    /// Always `{"derivation": "NULL"}` — a well-formed abstention.
    Null,
    /// A syntactically invalid derivation string, so every call is counted
    /// as a parse failure by the client and degrades to Null.
    Garbage,
}

impl FromStr for SpjBehavior {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<SpjBehavior, EngineError> {
        match s {
            "null" => Ok(SpjBehavior::Null),
            "garbage" => Ok(SpjBehavior::Garbage),
            other => Err(EngineError::Usage(format!(
                "unknown spj behavior {other:?} (expected null|garbage)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StubOptions {
    pub dim: usize,
    pub spj: SpjBehavior,
}

impl Default for StubOptions {
    fn default() -> StubOptions {
        StubOptions { dim: factdb_ssg::DEFAULT_DIM, spj: SpjBehavior::Null }
    }
}

fn fnv1a(token: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn normalize(mut v: Vec<f32>) -> Vec<f32> {
    let norm = v.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        for x in &mut v {
            *x = (f64::from(*x) / norm) as f32;
        }
    }
    v
}

fn content_bag(dim: usize, tokens: &[String]) -> Vec<f32> {
    let mut v = vec![0.0f32; dim];
    for token in tokens {
        v[(fnv1a(token) % (dim as u64 - 1)) as usize] += 1.0;
    }
    v
}

/// Deterministic stand-in for a trained encoder. Fact texts hash into the
/// first dim-1 coordinates; `[STOP]` is the final basis vector; state texts
/// (`query [SEP] fact ...`) encode the residual query tokens not covered by
/// the facts, with the final coordinate carrying the coverage so the STOP
/// score rises as a state covers the question.
pub fn stub_encode(dim: usize, text: &str) -> Vec<f32> {
    assert!(dim >= 2, "stub dim must be at least 2");
    if text == super::remote::STOP_TEXT {
        let mut v = vec![0.0f32; dim];
        v[dim - 1] = 1.0;
        return v;
    }
    let Some((query, rest)) = text.split_once(super::remote::STATE_SEP) else {
        return normalize(content_bag(dim, &tokenize(text)));
    };

    let query_tokens = tokenize(query);
    let covered: std::collections::BTreeSet<String> = rest
        .split(super::remote::STATE_SEP)
        .flat_map(|fact| tokenize(fact))
        .collect();
    let residual: Vec<String> =
        query_tokens.iter().filter(|t| !covered.contains(*t)).cloned().collect();
    if query_tokens.is_empty() || residual.is_empty() {
        let mut v = vec![0.0f32; dim];
        v[dim - 1] = 1.0;
        return v;
    }

    let full = content_bag(dim, &query_tokens);
    let left = content_bag(dim, &residual);
    let norm = |v: &[f32]| v.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    let coverage = (1.0 - norm(&left) / norm(&full)).clamp(0.0, 1.0);
    let mut v = normalize(left);
    let scale = (1.0 - coverage * coverage).sqrt() as f32;
    for x in &mut v {
        *x *= scale;
    }
    v[dim - 1] = coverage as f32;
    normalize(v)
}

#[derive(Deserialize)]
struct EncodeRequest {
    texts: Vec<String>,
}

fn respond(stream: &mut TcpStream, status: &str, body: &str) -> std::io::Result<()> {
    let reply = format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len(),
    );
    stream.write_all(reply.as_bytes())
}

fn handle(mut stream: TcpStream, opts: StubOptions) -> std::io::Result<()> {
    let mut raw = Vec::new();
    let mut buf = [0u8; 4096];
    let header_end = loop {
        let n = stream.read(&mut buf)?;
        if n == 0 {
            return Ok(());
        }
        raw.extend_from_slice(&buf[..n]);
        if let Some(pos) = raw.windows(4).position(|w| w == b"\r\n\r\n") {
            break pos;
        }
        if raw.len() > 1 << 20 {
            return respond(&mut stream, "431 Request Header Fields Too Large", "{}");
        }
    };

    let mut headers = [httparse::EMPTY_HEADER; 32];
    let mut request = httparse::Request::new(&mut headers);
    if request.parse(&raw[..header_end + 4]).is_err() {
        return respond(&mut stream, "400 Bad Request", "{}");
    }
    let method = request.method.unwrap_or("");
    let path = request.path.unwrap_or("");
    let content_length: usize = request
        .headers
        .iter()
        .find(|h| h.name.eq_ignore_ascii_case("content-length"))
        .and_then(|h| std::str::from_utf8(h.value).ok())
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0);

    let mut body = raw[header_end + 4..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut buf)?;
        if n == 0 {
            break;
        }
        body.extend_from_slice(&buf[..n]);
    }
    let body = String::from_utf8_lossy(&body[..body.len().min(content_length)]).into_owned();

    match (method, path) {
        ("POST", "/encode") => match serde_json::from_str::<EncodeRequest>(&body) {
            Ok(req) => {
                let vectors: Vec<Vec<f32>> =
                    req.texts.iter().map(|t| stub_encode(opts.dim, t)).collect();
                respond(&mut stream, "200 OK", &json!({ "vectors": vectors }).to_string())
            }
            Err(e) => respond(&mut stream, "400 Bad Request", &json!({ "error": e.to_string() }).to_string()),
        },
        ("POST", "/spj") => {
            let derivation = match opts.spj {
                SpjBehavior::Null => "NULL",
                SpjBehavior::Garbage => "BROKEN((",
            };
            respond(&mut stream, "200 OK", &json!({ "derivation": derivation }).to_string())
        }
        _ => respond(&mut stream, "404 Not Found", "{}"),
    }
}

/// Accept loop; one short-lived thread per connection. Runs until the
/// listener is closed by the OS (i.e. forever under the CLI).
pub fn serve(listener: TcpListener, opts: StubOptions) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        std::thread::spawn(move || {
            let _ = handle(stream, opts);
        });
    }
    Ok(())
}

/// Bind an ephemeral loopback port and serve the stub on a background
/// thread; returns the `host:port` endpoint. Test helper.
pub fn spawn_stub(opts: StubOptions) -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let endpoint = listener.local_addr()?.to_string();
    std::thread::spawn(move || {
        let _ = serve(listener, opts);
    });
    Ok(endpoint)
}
