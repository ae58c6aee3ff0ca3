//! HTTP client for the masked-LM inference service.
//!
//! Endpoints (JSON, UTF-8):
//!
//! * `POST /v1/predict_mask` `{"text", "top_k"}` -> `{"predictions": [{"token", "logprob"}]}`
//! * `POST /v1/embed_mask` `{"text"}` -> `{"vector": [f32; dim]}`
//! * `GET /v1/info` -> `{"dim", "model"}`

use std::sync::OnceLock;
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::{canonicalize, check_top_k, LmClient, MaskPrediction};
use crate::error::{Error, Result};
use crate::probing::ProbeQuery;

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    pub timeout: Duration,
    /// Total attempts per request, including the first.
    pub attempts: u32,
    /// Delay before the first retry; doubles on each subsequent one.
    pub backoff: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            timeout: Duration::from_secs(30),
            attempts: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    text: &'a str,
    top_k: usize,
}

#[derive(Deserialize)]
struct PredictResponse {
    predictions: Vec<MaskPrediction>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f32>,
}

#[derive(Deserialize)]
struct InfoResponse {
    dim: usize,
}

pub struct RemoteLm {
    config: RemoteConfig,
    agent: Agent,
    dim: OnceLock<usize>,
}

impl RemoteLm {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            agent,
            dim: OnceLock::new(),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.config.endpoint
    }

    fn transport(&self, message: String, retryable: bool) -> Error {
        Error::LmTransport {
            endpoint: self.config.endpoint.clone(),
            message,
            retryable,
        }
    }

    fn with_retries<T>(&self, mut op: impl FnMut() -> Result<T>) -> Result<T> {
        let mut delay = self.config.backoff;
        let mut attempt = 1;
        loop {
            match op() {
                Err(e) if e.is_retryable() && attempt < self.config.attempts => {
                    log::warn!("attempt {attempt} failed: {e}; retrying in {delay:?}");
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn decode<T: DeserializeOwned>(
        &self,
        path: &str,
        response: std::result::Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<T> {
        let mut response = response.map_err(|e| self.transport(format!("{path}: {e}"), true))?;
        let status = response.status().as_u16();
        if status != 200 {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            // 5xx and 429 are transient; other statuses mean the request itself is bad.
            let retryable = status >= 500 || status == 429;
            return Err(self.transport(format!("{path}: HTTP {status}: {body}"), retryable));
        }
        response
            .body_mut()
            .read_json::<T>()
            .map_err(|e| self.transport(format!("{path}: bad response body: {e}"), false))
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}{path}", self.config.endpoint);
        self.with_retries(|| self.decode(path, self.agent.post(&url).send_json(body)))
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let url = format!("{}{path}", self.config.endpoint);
        self.with_retries(|| self.decode(path, self.agent.get(&url).call()))
    }
}

impl LmClient for RemoteLm {
    fn dim(&self) -> Result<usize> {
        if let Some(&d) = self.dim.get() {
            return Ok(d);
        }
        let info: InfoResponse = self.get("/v1/info")?;
        Ok(*self.dim.get_or_init(|| info.dim))
    }

    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        check_top_k(top_k)?;
        let resp: PredictResponse = self.post(
            "/v1/predict_mask",
            &PredictRequest {
                text: query.text(),
                top_k,
            },
        )?;
        Ok(canonicalize(resp.predictions, top_k))
    }

    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        let resp: EmbedResponse =
            self.post("/v1/embed_mask", &EmbedRequest { text: query.text() })?;
        if let Some(&d) = self.dim.get() {
            if resp.vector.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: resp.vector.len(),
                });
            }
        }
        Ok(resp.vector)
    }
}
