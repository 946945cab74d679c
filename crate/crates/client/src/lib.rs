//! Typed async client for the estranet HTTP service.
//!
//! ```no_run
//! # async fn demo() -> Result<(), estranet_client::ClientError> {
//! use estranet_client::{api::*, Client};
//!
//! let client = Client::new("http://127.0.0.1:8080")?;
//! let doc = client
//!     .detect(&DetectRequest {
//!         input: SnapshotSource::Text("0 a b\n0 b c\n".into()),
//!         delta: 0.05,
//!         config: Default::default(),
//!     })
//!     .await?;
//! println!("{}", doc.to_json());
//! # Ok(())
//! # }
//! ```

use estranet_core::api::*;
use estranet_core::ResultDocument;
use reqwest::Method;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use estranet_core::api;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{}", .detail.message)]
    Api { status: u16, detail: ErrorDetail },
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("invalid base url `{0}`")]
    BadUrl(String),
    #[error("unexpected response ({status}): {body}")]
    Unexpected { status: u16, body: String },
}

impl ClientError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ClientError::Api { detail, .. } => detail.kind,
            ClientError::BadUrl(_) => ErrorKind::Usage,
            ClientError::Transport(_) | ClientError::Unexpected { .. } => ErrorKind::Internal,
        }
    }

    /// Source line of a parse error, when the service reported one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ClientError::Api { detail, .. } => detail.line,
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Result<Self, ClientError> {
        let base = base.into().trim_end_matches('/').to_owned();
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(ClientError::BadUrl(base));
        }
        Ok(Self {
            base,
            http: reqwest::Client::new(),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// Sends `req`, turning non-success responses into errors.
    async fn send(&self, req: reqwest::RequestBuilder) -> Result<reqwest::Response, ClientError> {
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().await?;
        Err(match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => ClientError::Api {
                status: status.as_u16(),
                detail: body.error,
            },
            Err(_) => ClientError::Unexpected {
                status: status.as_u16(),
                body: text,
            },
        })
    }

    async fn call<B, R>(&self, method: Method, path: &str, body: Option<&B>) -> Result<R, ClientError>
    where
        B: Serialize + ?Sized,
        R: DeserializeOwned,
    {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(body) = body {
            req = req.json(body);
        }
        Ok(self.send(req).await?.json().await?)
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        self.send(self.http.get(format!("{}/health", self.base))).await?;
        Ok(())
    }

    pub async fn detect(&self, req: &DetectRequest) -> Result<ResultDocument, ClientError> {
        self.call(Method::POST, "/v1/detect", Some(req)).await
    }

    pub async fn sweep(&self, req: &SweepRequest) -> Result<SweepResponse, ClientError> {
        self.call(Method::POST, "/v1/sweep", Some(req)).await
    }

    pub async fn chart(&self, req: &ChartRequest) -> Result<ChartResponse, ClientError> {
        self.call(Method::POST, "/v1/chart", Some(req)).await
    }

    pub async fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, ClientError> {
        self.call(Method::POST, "/v1/generate", Some(req)).await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionInfo, ClientError> {
        self.call(Method::POST, "/v1/sessions", Some(req)).await
    }

    pub async fn append(&self, id: &str, req: &AppendRequest) -> Result<AppendResponse, ClientError> {
        self.call(Method::POST, &format!("/v1/sessions/{id}/snapshots"), Some(req))
            .await
    }

    pub async fn session(&self, id: &str) -> Result<SessionView, ClientError> {
        self.call::<(), _>(Method::GET, &format!("/v1/sessions/{id}"), None)
            .await
    }

    pub async fn delete_session(&self, id: &str) -> Result<(), ClientError> {
        let url = format!("{}/v1/sessions/{id}", self.base);
        self.send(self.http.delete(url)).await?;
        Ok(())
    }
}
