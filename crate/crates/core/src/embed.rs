//! Sentence embeddings behind a provider contract.
//!
//! [`HashedBagProvider`] is the built-in default: lowercase alphanumeric
//! tokens are hashed with 64-bit FNV-1a into [`DEFAULT_DIM`] buckets, bucket
//! weights are token counts and the vector is L2-normalized. Text without
//! tokens embeds to the zero vector.
//!
//! [`RemoteProvider`] speaks `POST {base}/embed` with `{"texts": [...]}` and
//! expects `{"dim": n, "vectors": [[...], ...]}` back.

use std::sync::{Condvar, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIM: usize = 1024;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("embedding provider failure: {0}")]
    Failure(String),
}

pub trait EmbeddingProvider: Send + Sync {
    fn id(&self) -> String;
    fn dim(&self) -> usize;
    /// One unit-norm (or zero) vector per text, in input order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn bucket(token: &str, dim: usize) -> usize {
    (fnv1a(token.as_bytes()) % dim as u64) as usize
}

pub fn default_embed(text: &str) -> Vec<f64> {
    hashed_embed(text, DEFAULT_DIM)
}

pub fn hashed_embed(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for t in tokens(text) {
        v[bucket(&t, dim)] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Dot product of two embeddings; 0 when either is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct HashedBagProvider {
    pub dim: usize,
}

impl Default for HashedBagProvider {
    fn default() -> Self {
        HashedBagProvider { dim: DEFAULT_DIM }
    }
}

impl EmbeddingProvider for HashedBagProvider {
    fn id(&self) -> String {
        format!("hashed-bag-fnv1a-{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| hashed_embed(t, self.dim)).collect())
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) {
        let mut free = self.free.lock().expect("gate poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate poisoned");
        }
        *free -= 1;
    }

    fn release(&self) {
        *self.free.lock().expect("gate poisoned") += 1;
        self.cv.notify_one();
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

pub struct RemoteProvider {
    endpoint: String,
    dim: usize,
    agent: ureq::Agent,
    gate: Gate,
}

impl RemoteProvider {
    /// `base_url` is the service root; requests go to `{base_url}/embed`.
    pub fn new(base_url: &str, dim: usize, max_in_flight: usize) -> Self {
        RemoteProvider {
            endpoint: format!("{}/embed", base_url.trim_end_matches('/')),
            dim,
            agent: ureq::Agent::new_with_defaults(),
            gate: Gate {
                free: Mutex::new(max_in_flight.max(1)),
                cv: Condvar::new(),
            },
        }
    }

    fn request(&self, texts: &[String]) -> Result<EmbedResponse, ProviderError> {
        let fail = |e: ureq::Error| ProviderError::Failure(format!("{}: {e}", self.endpoint));
        self.agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { texts })
            .map_err(fail)?
            .body_mut()
            .read_json::<EmbedResponse>()
            .map_err(fail)
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn id(&self) -> String {
        format!("remote:{}", self.endpoint)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        self.gate.acquire();
        let resp = self.request(texts);
        self.gate.release();
        let resp = resp?;
        if resp.dim != self.dim {
            return Err(ProviderError::Failure(format!(
                "dimension {} does not match configured {}",
                resp.dim, self.dim
            )));
        }
        if resp.vectors.len() != texts.len() {
            return Err(ProviderError::Failure(format!(
                "{} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        Ok(resp.vectors)
    }
}

/// Checks a provider batch: dimensions, finiteness, unit norm (zero allowed).
pub fn check_vectors(vs: &[Vec<f64>], dim: usize) -> Result<(), ProviderError> {
    for v in vs {
        if v.len() != dim {
            return Err(ProviderError::Failure(format!("vector of length {} (expected {dim})", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ProviderError::Failure("non-finite vector component".into()));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm != 0.0 && (norm - 1.0).abs() > NORM_TOL {
            return Err(ProviderError::Failure(format!("vector norm {norm} is not 1")));
        }
    }
    Ok(())
}
