use std::net::SocketAddr;

use estranet_core::api::{ErrorBody, ErrorKind};
use serde_json::{json, Value};

const TRIANGLES: &str = "0 a b\n0 b c\n0 a c\n0 c d\n0 d e\n0 e f\n0 d f\n\
                         1 a b\n1 b c\n1 a c\n1 c d\n1 d e\n1 e f\n1 d f\n";

fn quick_config() -> Value {
    json!({ "solver": { "seed": 3, "final_runs": 8, "max_runs": 8 } })
}

async fn start() -> String {
    let addr = estranet_server::spawn(SocketAddr::from(([127, 0, 0, 1], 0)))
        .await
        .unwrap();
    format!("http://{addr}")
}

async fn post(base: &str, path: &str, body: Value) -> (u16, Value) {
    let resp = reqwest::Client::new()
        .post(format!("{base}{path}"))
        .json(&body)
        .send()
        .await
        .unwrap();
    let status = resp.status().as_u16();
    (status, resp.json().await.unwrap())
}

#[tokio::test]
async fn health_reports_ok() {
    let base = start().await;
    let body: Value = reqwest::get(format!("{base}/health")).await.unwrap().json().await.unwrap();
    assert_eq!(body, json!({ "status": "ok" }));
}

#[tokio::test]
async fn detect_returns_result_document() {
    let base = start().await;
    let (status, doc) = post(
        &base,
        "/v1/detect",
        json!({ "input": { "text": TRIANGLES }, "delta": 0.0, "config": quick_config() }),
    )
    .await;
    assert_eq!(status, 200);
    assert_eq!(doc["delta"], json!(0.0));
    assert_eq!(doc["seed"], json!(3));
    let snaps = doc["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 2);
    for s in snaps {
        for key in ["t", "lambda_star", "final_lambda", "Q", "E", "fallback", "labels"] {
            assert!(s.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(snaps[0]["labels"], snaps[1]["labels"]);
    assert!((snaps[1]["Q"].as_f64().unwrap() - 5.0 / 14.0).abs() < 1e-12);
}

#[tokio::test]
async fn parse_errors_carry_line_numbers() {
    let base = start().await;
    let (status, body) = post(
        &base,
        "/v1/detect",
        json!({ "input": { "text": "0 a b\n0 a b nope\n" }, "delta": 0.1 }),
    )
    .await;
    assert_eq!(status, 422);
    let err: ErrorBody = serde_json::from_value(body).unwrap();
    assert_eq!(err.error.kind, ErrorKind::Data);
    assert_eq!(err.error.line, Some(2));
}

#[tokio::test]
async fn bad_parameters_are_usage_errors() {
    let base = start().await;
    let (status, body) = post(&base, "/v1/detect", json!({ "input": { "text": TRIANGLES }, "delta": 2.0 })).await;
    assert_eq!(status, 400);
    assert_eq!(body["error"]["kind"], json!("usage"));

    let (status, body) = post(&base, "/v1/detect", json!({ "delta": 0.1 })).await;
    assert_eq!(status, 422);
    assert_eq!(body["error"]["kind"], json!("usage"));

    let (status, _) = post(&base, "/v1/sweep", json!({ "input": { "text": TRIANGLES }, "deltas": [] })).await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn generate_then_chart() {
    let base = start().await;
    let (status, gen) = post(
        &base,
        "/v1/generate",
        json!({ "spec": { "n_snapshots": 2, "phases": [
            { "snapshots": { "start": 0, "end": 2 }, "members": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9] }
        ] } }),
    )
    .await;
    assert_eq!(status, 200, "{gen}");
    let text = gen["text"].as_str().unwrap();
    assert_eq!(text.lines().count(), 200);

    let (status, doc) = post(
        &base,
        "/v1/detect",
        json!({ "input": { "text": text }, "delta": 0.05, "config": quick_config() }),
    )
    .await;
    assert_eq!(status, 200);
    let (status, chart) = post(&base, "/v1/chart", json!({ "result": doc })).await;
    assert_eq!(status, 200);
    assert!(chart["tsv"].as_str().unwrap().starts_with("node\t0\t1\n"));
    assert!(chart["svg"].as_str().unwrap().starts_with("<svg"));
}

#[tokio::test]
async fn session_lifecycle() {
    let base = start().await;
    let (status, info) = post(&base, "/v1/sessions", json!({ "delta": 0.0, "config": quick_config() })).await;
    assert_eq!(status, 201);
    let id = info["id"].as_str().unwrap().to_owned();

    let first: String = TRIANGLES.lines().take(7).map(|l| format!("{l}\n")).collect();
    let second: String = TRIANGLES.lines().skip(7).map(|l| format!("{l}\n")).collect();
    let (status, a) = post(&base, &format!("/v1/sessions/{id}/snapshots"), json!({ "text": first })).await;
    assert_eq!(status, 200);
    let (status, b) = post(&base, &format!("/v1/sessions/{id}/snapshots"), json!({ "text": second })).await;
    assert_eq!(status, 200);
    assert_eq!(a["snapshots"][0]["labels"], b["snapshots"][0]["labels"]);
    assert_eq!(b["session"]["snapshots"], json!(2));

    let (status, again) = post(&base, &format!("/v1/sessions/{id}/snapshots"), json!({ "text": "1 a b\n" })).await;
    assert_eq!(status, 400, "{again}");

    let view: Value = reqwest::get(format!("{base}/v1/sessions/{id}")).await.unwrap().json().await.unwrap();
    assert_eq!(view["result"]["snapshots"].as_array().unwrap().len(), 2);

    let http = reqwest::Client::new();
    let del = http.delete(format!("{base}/v1/sessions/{id}")).send().await.unwrap();
    assert_eq!(del.status().as_u16(), 204);
    let gone = http.delete(format!("{base}/v1/sessions/{id}")).send().await.unwrap();
    assert_eq!(gone.status().as_u16(), 404);
}
