//! Request and response bodies of the HTTP service.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::io::{parse_snapshot_files, parse_snapshots, SnapshotSeries};
use crate::pipeline::{PipelineConfig, ResultDocument, SnapshotDocument};
use crate::sweep::SweepRow;
use crate::synthetic::HiddenGroupSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Bad parameters or request shape.
    Usage,
    /// Input data that cannot be parsed or solved on.
    Data,
    /// The optimizer failed.
    Solver,
    NotFound,
    Internal,
}

impl ErrorKind {
    pub fn of(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::NotConverged { .. } => ErrorKind::Solver,
            _ if e.is_data_error() => ErrorKind::Data,
            _ => ErrorKind::Internal,
        }
    }

    /// Process exit code used by the command-line client.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data | ErrorKind::NotFound => 2,
            ErrorKind::Solver | ErrorKind::Internal => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

impl From<&Error> for ErrorDetail {
    fn from(e: &Error) -> Self {
        ErrorDetail {
            kind: ErrorKind::of(e),
            message: e.to_string(),
            line: match e {
                Error::Parse { line, .. } => Some(*line),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub t: u64,
    pub text: String,
}

/// Snapshot input: single-file text or directory-mode files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotSource {
    Text(String),
    Files(Vec<SnapshotFile>),
}

impl SnapshotSource {
    pub fn parse(&self) -> Result<SnapshotSeries, Error> {
        match self {
            SnapshotSource::Text(text) => parse_snapshots(text),
            SnapshotSource::Files(files) => {
                parse_snapshot_files(files.iter().map(|f| (f.t, f.text.clone())).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRequest {
    pub input: SnapshotSource,
    pub delta: f64,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub input: SnapshotSource,
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRequest {
    pub result: ResultDocument,
    #[serde(default)]
    pub cell_size: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartResponse {
    pub tsv: String,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateRequest {
    #[serde(default)]
    pub spec: HiddenGroupSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    /// Snapshots in the single-file format.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub delta: f64,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub delta: f64,
    pub seed: u64,
    pub snapshots: usize,
    pub labels_issued: usize,
    pub last_t: Option<u64>,
}

/// One or more snapshots, in the single-file format, to append to a session.
/// Timestamps must be later than any already processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendResponse {
    pub session: SessionInfo,
    pub snapshots: Vec<SnapshotDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session: SessionInfo,
    pub result: ResultDocument,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_and_exit_codes() {
        let parse = Error::Parse { line: 3, message: "bad".into() };
        let detail = ErrorDetail::from(&parse);
        assert_eq!(detail.kind, ErrorKind::Data);
        assert_eq!(detail.line, Some(3));
        assert_eq!(ErrorKind::of(&Error::InvalidParameter("x".into())).exit_code(), 1);
        assert_eq!(ErrorKind::of(&Error::EmptyGraph).exit_code(), 2);
        let solver = Error::NotConverged { sweeps: 1, last: crate::graph::Partition::uniform(1) };
        assert_eq!(ErrorKind::of(&solver).exit_code(), 3);
    }

    #[test]
    fn source_encoding() {
        let text = SnapshotSource::Text("0 a b\n".into());
        assert_eq!(serde_json::to_string(&text).unwrap(), r#"{"text":"0 a b\n"}"#);
        let files: SnapshotSource =
            serde_json::from_str(r#"{"files":[{"t":1,"text":"a b 2"},{"t":0,"text":"a c"}]}"#).unwrap();
        let series = files.parse().unwrap();
        assert_eq!(series.graphs.len(), 2);
        assert_eq!(series.graphs[0].t(), 0);
    }

    #[test]
    fn requests_default_their_config() {
        let req: DetectRequest = serde_json::from_str(r#"{"input":{"text":""},"delta":0.1}"#).unwrap();
        assert_eq!(req.config, PipelineConfig::default());
        let gen: GenerateRequest = serde_json::from_str("{}").unwrap();
        assert_eq!(gen.spec, HiddenGroupSpec::default());
    }
}
