use std::net::SocketAddr;

use estranet_client::api::*;
use estranet_client::{Client, ClientError};
use estranet_core::{HiddenGroupSpec, PipelineConfig};

async fn client() -> Client {
    let addr = estranet_server::spawn(SocketAddr::from(([127, 0, 0, 1], 0)))
        .await
        .unwrap();
    Client::new(format!("http://{addr}/")).unwrap()
}

fn quick() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.solver.seed = 11;
    cfg.solver.final_runs = 8;
    cfg.solver.max_runs = 8;
    cfg
}

fn small_spec() -> HiddenGroupSpec {
    HiddenGroupSpec {
        n_snapshots: 4,
        phases: vec![
            estranet_core::Phase { snapshots: 0..2, members: (0..10).collect() },
            estranet_core::Phase { snapshots: 2..4, members: (9..20).collect() },
        ],
        ..HiddenGroupSpec::with_seed(5)
    }
}

#[tokio::test]
async fn detect_is_reproducible_and_chartable() {
    let c = client().await;
    c.health().await.unwrap();
    let text = c.generate(&GenerateRequest { spec: small_spec() }).await.unwrap().text;
    let req = DetectRequest {
        input: SnapshotSource::Text(text),
        delta: 0.05,
        config: quick(),
    };
    let a = c.detect(&req).await.unwrap();
    let b = c.detect(&req).await.unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.snapshots.iter().all(|s| s.e <= 0.05 + 1e-9));

    let chart = c.chart(&ChartRequest { result: a, cell_size: Some(4) }).await.unwrap();
    assert_eq!(chart.tsv.lines().count(), 41);
    assert!(chart.svg.contains(r#"width="4""#));
}

#[tokio::test]
async fn sweep_rows_follow_the_request() {
    let c = client().await;
    let text = c.generate(&GenerateRequest { spec: small_spec() }).await.unwrap().text;
    let resp = c
        .sweep(&SweepRequest {
            input: SnapshotSource::Text(text),
            deltas: vec![0.0, 1.0],
            config: quick(),
        })
        .await
        .unwrap();
    assert_eq!(resp.rows.len(), 2);
    assert_eq!(resp.rows[0].avg_e, 0.0);
    assert_eq!(resp.rows[1].avg_q_loss, 0.0);
}

#[tokio::test]
async fn errors_map_to_kinds() {
    let c = client().await;
    let err = c
        .detect(&DetectRequest {
            input: SnapshotSource::Text("0 a\n".into()),
            delta: 0.1,
            config: quick(),
        })
        .await
        .unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    assert_eq!(err.kind().exit_code(), 2);
    assert_eq!(err.line(), Some(1));

    let err = c.session("missing").await.unwrap_err();
    assert!(matches!(err, ClientError::Api { status: 404, .. }));

    assert!(matches!(Client::new("localhost:1"), Err(ClientError::BadUrl(_))));
    let dead = Client::new("http://127.0.0.1:1").unwrap();
    assert_eq!(dead.health().await.unwrap_err().kind(), ErrorKind::Internal);
}

#[tokio::test]
async fn online_session_matches_batch_run() {
    let c = client().await;
    let text = c.generate(&GenerateRequest { spec: small_spec() }).await.unwrap().text;
    let batch = c
        .detect(&DetectRequest {
            input: SnapshotSource::Text(text.clone()),
            delta: 0.05,
            config: quick(),
        })
        .await
        .unwrap();

    let info = c
        .create_session(&CreateSessionRequest { delta: 0.05, config: quick() })
        .await
        .unwrap();
    let mut chunks: Vec<String> = Vec::new();
    for line in text.lines() {
        let t = line.split_whitespace().next().unwrap();
        match chunks.last_mut() {
            Some(chunk) if chunk.starts_with(&format!("{t} ")) => chunk.push_str(&format!("{line}\n")),
            _ => chunks.push(format!("{line}\n")),
        }
    }
    for chunk in &chunks {
        c.append(&info.id, &AppendRequest { text: chunk.clone() }).await.unwrap();
    }
    let view = c.session(&info.id).await.unwrap();
    assert_eq!(view.session.snapshots, 4);
    assert_eq!(view.result.to_json(), batch.to_json());
    c.delete_session(&info.id).await.unwrap();
}
