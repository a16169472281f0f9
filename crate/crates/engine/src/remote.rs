//! Client for the remote bi-encoder service.
//!
//! Wire protocol: `POST /encode` with `{"texts": ["..."]}` answered by
//! `{"vectors": [[f32; dim], ...]}`, one vector per input text, each of the
//! configured dimension. Fact vectors are fetched once per database; state
//! vectors are fetched per expansion step by [`RemoteScorer`].

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::time::Duration;

use factdb_core::{Database, Fact, FactId, Query, SupportSet};
use factdb_ssg::{
    build_index, mips, Action, BiEncoder, EmbeddingVector, IndexedDatabase, SsgConfig, SsgError,
    SupportScorer,
};
use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// Separator between the query and the facts of a partial support set in
/// the state text sent to the encoder.
pub const STATE_SEP: &str = " [SEP] ";
/// Text whose encoding is used as the STOP action row.
pub const STOP_TEXT: &str = "[STOP]";
/// Fact texts per `/encode` request when prefetching a database.
const ENCODE_BATCH: usize = 64;

/// Minimal HTTP/1.1 POST over a fresh connection; returns the response body
/// on status 200.
pub(crate) fn http_post(
    endpoint: &str,
    path: &str,
    body: &str,
    timeout: Duration,
) -> Result<String, EngineError> {
    let remote = |e: String| EngineError::Remote(format!("{endpoint}{path}: {e}"));
    let addr = endpoint
        .parse::<std::net::SocketAddr>()
        .map_err(|e| remote(format!("bad endpoint: {e}")))?;
    let mut stream =
        TcpStream::connect_timeout(&addr, timeout).map_err(|e| remote(e.to_string()))?;
    stream.set_read_timeout(Some(timeout)).map_err(|e| remote(e.to_string()))?;
    stream.set_write_timeout(Some(timeout)).map_err(|e| remote(e.to_string()))?;
    let request = format!(
        "POST {path} HTTP/1.1\r\nHost: {endpoint}\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len(),
    );
    stream.write_all(request.as_bytes()).map_err(|e| remote(e.to_string()))?;
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).map_err(|e| remote(e.to_string()))?;

    let header_end = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .ok_or_else(|| remote("malformed HTTP response".into()))?;
    let head = String::from_utf8_lossy(&raw[..header_end]);
    let status = head
        .lines()
        .next()
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|c| c.parse::<u16>().ok())
        .ok_or_else(|| remote("malformed HTTP status line".into()))?;
    if status != 200 {
        return Err(remote(format!("HTTP status {status}")));
    }
    String::from_utf8(raw[header_end + 4..].to_vec()).map_err(|e| remote(e.to_string()))
}

#[derive(Serialize)]
struct EncodeRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EncodeResponse {
    vectors: Vec<Vec<f32>>,
}

/// Blocking client for the `/encode` endpoint with bounded retries.
#[derive(Debug, Clone)]
pub struct EncoderClient {
    pub endpoint: String,
    pub dim: usize,
    pub timeout: Duration,
    pub retries: u32,
}

impl EncoderClient {
    pub fn new(endpoint: impl Into<String>, dim: usize) -> EncoderClient {
        EncoderClient {
            endpoint: endpoint.into(),
            dim,
            timeout: Duration::from_secs(10),
            retries: 2,
        }
    }

    /// Encode a batch of texts; one unit vector per text, re-normalized
    /// defensively on the client side.
    pub fn encode(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EngineError> {
        let body = serde_json::to_string(&EncodeRequest { texts })?;
        let mut last = EngineError::Remote("no attempt made".into());
        for _ in 0..=self.retries {
            match http_post(&self.endpoint, "/encode", &body, self.timeout) {
                Ok(reply) => return self.parse_reply(&reply, texts.len()),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn parse_reply(&self, reply: &str, expected: usize) -> Result<Vec<EmbeddingVector>, EngineError> {
        let parsed: EncodeResponse = serde_json::from_str(reply)
            .map_err(|e| EngineError::Remote(format!("bad /encode reply: {e}")))?;
        if parsed.vectors.len() != expected {
            return Err(EngineError::Remote(format!(
                "/encode returned {} vectors for {expected} texts",
                parsed.vectors.len()
            )));
        }
        parsed
            .vectors
            .into_iter()
            .map(|row| {
                if row.len() != self.dim {
                    return Err(EngineError::Remote(format!(
                        "/encode returned dimension {}, configured dim is {}",
                        row.len(),
                        self.dim
                    )));
                }
                EmbeddingVector::normalized(row)
                    .map_err(|e| EngineError::Remote(format!("bad /encode vector: {e}")))
            })
            .collect()
    }
}

/// [`BiEncoder`] over vectors prefetched from the remote service; used only
/// to build the MIPS index. State encoding goes through [`RemoteScorer`],
/// so `encode_state` here is never called and returns the STOP row.
struct PrefetchedEncoder {
    dim: usize,
    rows: BTreeMap<FactId, EmbeddingVector>,
    stop: EmbeddingVector,
}

impl BiEncoder for PrefetchedEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode_fact(&self, fact: &Fact) -> EmbeddingVector {
        self.rows.get(&fact.id).cloned().unwrap_or_else(|| self.stop.clone())
    }

    fn encode_state(&self, _query: &Query, _facts: &[&Fact]) -> EmbeddingVector {
        self.stop.clone()
    }

    fn stop_vector(&self) -> EmbeddingVector {
        self.stop.clone()
    }
}

/// Fetch every fact vector plus the STOP vector and build the MIPS index.
pub fn build_remote_index<'a>(
    db: &'a Database,
    client: &EncoderClient,
) -> Result<IndexedDatabase<'a>, EngineError> {
    let mut rows = BTreeMap::new();
    let facts = db.facts();
    for chunk in facts.chunks(ENCODE_BATCH) {
        let texts: Vec<String> = chunk.iter().map(|f| f.text.clone()).collect();
        let vectors = client.encode(&texts)?;
        for (fact, vector) in chunk.iter().zip(vectors) {
            rows.insert(fact.id, vector);
        }
    }
    let stop = client
        .encode(&[STOP_TEXT.to_string()])?
        .pop()
        .expect("length checked by encode");
    let encoder = PrefetchedEncoder { dim: client.dim, rows, stop };
    Ok(build_index(db, &encoder)?)
}

/// The text a state (query + partial support set) is encoded from: the
/// query followed by the member facts in id order, `[SEP]`-joined.
pub fn state_text(query: &Query, state: &SupportSet, db: &Database) -> String {
    let mut text = query.text.clone();
    for id in state.ids() {
        text.push_str(STATE_SEP);
        match db.get(id) {
            Some(fact) => text.push_str(&fact.text),
            None => text.push_str("<unknown>"),
        }
    }
    text
}

/// Support scorer that encodes states remotely and scores actions against
/// the prefetched index via exact MIPS.
pub struct RemoteScorer<'a> {
    pub index: &'a IndexedDatabase<'a>,
    pub client: &'a EncoderClient,
}

impl SupportScorer for RemoteScorer<'_> {
    fn propose(
        &self,
        query: &Query,
        state: &SupportSet,
        cfg: &SsgConfig,
    ) -> Result<Vec<Action>, SsgError> {
        for id in state.ids() {
            if !self.index.db().contains(id) {
                return Err(SsgError::UnknownFact(id));
            }
        }
        let text = state_text(query, state, self.index.db());
        let vector = self
            .client
            .encode(&[text])
            .map_err(|e| SsgError::Embedding(e.to_string()))?
            .pop()
            .expect("length checked by encode");
        mips(self.index, &vector, cfg)
    }
}
