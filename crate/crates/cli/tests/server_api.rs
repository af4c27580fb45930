//! The assessment HTTP API, driven in-process through the router.

mod support;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use support::{s, toy, zhnp};
use zhnp::assessment::SessionStore;
use zhnp::classifier::CorpusIndex;
use zhnp::corpus::{load_corpus, read_dataset};
use zhnp::{AnnotatedNP, AssessmentRecord};
use zhnp_cli::server::router;

fn gold() -> Vec<AnnotatedNP> {
    read_dataset(toy("gold.jsonl")).unwrap()
}

fn app(root: &Path) -> Router {
    let index = CorpusIndex::new(load_corpus(toy("corpus.jsonl")).unwrap());
    router(SessionStore::open(root, gold(), index).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String, Option<String>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap(), ctype)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text, _) = call(app, method, uri, body.map(|b| b.to_string())).await;
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn session(id: &str, protocol: &str, context: bool) -> Value {
    json!({
        "id": id,
        "protocol": protocol,
        "sample_size": 10,
        "annotators": ["ann-a", "ann-b"],
        "annotators_per_item": 2,
        "seed": 3,
        "include_context": context,
    })
}

fn a1_record(item: &str, annotator: &str, plurality_ok: &str) -> Value {
    json!({
        "item_id": item,
        "annotator_id": annotator,
        "protocol": "A1",
        "np_ok": "yes",
        "plurality_ok": plurality_ok,
        "definiteness_ok": "yes",
        "timestamp": 1_700_000_000u64,
    })
}

/// Takes items until the server says done and answers each with `answer`.
/// Returns the payloads and the final completed count.
async fn annotate_all(app: &Router, id: &str, annotator: &str, answer: impl Fn(&Value) -> Value) -> (Vec<Value>, u64) {
    let mut seen: Vec<Value> = Vec::new();
    loop {
        let (status, next) = call_json(app, "GET", &format!("/sessions/{id}/next?annotator={annotator}"), None).await;
        assert_eq!(status, StatusCode::OK);
        if next["status"] == "done" {
            return (seen, next["completed"].as_u64().unwrap());
        }
        assert_eq!(next["status"], "item");
        if let Some(prev) = seen.last() {
            assert!(next["position"].as_u64() > prev["position"].as_u64());
        }
        let (status, _) = call_json(app, "POST", &format!("/sessions/{id}/records"), Some(answer(&next))).await;
        assert_eq!(status, StatusCode::CREATED, "{next}");
        seen.push(next);
    }
}

async fn export(app: &Router, id: &str) -> (String, Vec<AssessmentRecord>) {
    let (status, text, ctype) = call(app, "GET", &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("application/x-ndjson"));
    let records = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    (text, records)
}

fn score(dir: &Path, exported: &str) -> Value {
    let records = dir.join("records.jsonl");
    let out = dir.join("report.json");
    fs::write(&records, exported).unwrap();
    let dataset = toy("gold.jsonl");
    zhnp(&[
        "assess-score",
        "--records",
        s(&records),
        "--dataset",
        s(&dataset),
        "--out",
        s(&out),
    ])
    .unwrap();
    let report: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    report["report"]["protocols"][0].clone()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn a1_session_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir.path().join("sessions"));

    let (status, created) = call_json(&app, "POST", "/sessions", Some(session("pilot", "A1", false))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["items"], 10);
    assert_eq!(created["workload"], json!({"ann-a": 10, "ann-b": 10}));

    // ann-b rejects the plurality of the first item it sees, nothing else.
    let ((a, done_a), (b, done_b)) = tokio::join!(
        annotate_all(&app, "pilot", "ann-a", |p| a1_record(
            p["item_id"].as_str().unwrap(),
            "ann-a",
            "yes"
        )),
        annotate_all(&app, "pilot", "ann-b", |p| {
            let pl = if p["position"] == 0 { "no" } else { "yes" };
            a1_record(p["item_id"].as_str().unwrap(), "ann-b", pl)
        }),
    );
    assert_eq!((done_a, done_b), (10, 10));
    let positions: Vec<u64> = a.iter().map(|p| p["position"].as_u64().unwrap()).collect();
    assert_eq!(positions, (0..10).collect::<Vec<u64>>());
    let dataset: HashMap<String, AnnotatedNP> = gold().into_iter().map(|np| (np.id.clone(), np)).collect();
    for payload in a.iter().chain(&b) {
        assert_eq!(payload["total"], 10);
        let keys: Vec<&str> = payload["questions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|q| q["key"].as_str().unwrap())
            .collect();
        assert_eq!(keys, ["np_ok", "plurality_ok", "definiteness_ok"]);
        let np = &dataset[payload["item_id"].as_str().unwrap()];
        assert_eq!(payload["np_text"], np.zh_text);
        assert_eq!(
            payload["np_span"],
            json!({"start": np.zh_span.start, "end": np.zh_span.end})
        );
        assert!(payload.get("context").is_none());
    }
    let ids = |v: &[Value]| {
        v.iter()
            .map(|p| p["item_id"].as_str().unwrap().to_string())
            .collect::<BTreeSet<_>>()
    };
    assert_eq!(ids(&a), ids(&b));
    assert_eq!(ids(&a).len(), 10);

    let (status, progress) = call_json(&app, "GET", "/sessions/pilot", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(progress["records"], 20);
    assert_eq!(progress["complete"], true);
    assert_eq!(
        progress["annotators"]["ann-b"],
        json!({"assigned": 10, "completed": 10})
    );

    let (text, records) = export(&app, "pilot").await;
    assert_eq!(records.len(), 20);
    let pairs: BTreeSet<(String, String)> = records
        .iter()
        .map(|r| (r.item_id.clone(), r.annotator_id.clone()))
        .collect();
    assert_eq!(pairs.len(), 20);

    let report = score(dir.path(), &text);
    assert_eq!(report["protocol"], "A1");
    assert_eq!(report["records"], 20);
    let rows = report["rows"].as_array().unwrap();
    let dims: Vec<&str> = rows.iter().map(|r| r["dimension"].as_str().unwrap()).collect();
    assert_eq!(dims, ["np", "plurality", "definiteness"]);
    for row in rows {
        assert_eq!(row["items"], 10);
        assert_eq!(row["acc_any"], 1.0);
    }
    assert_eq!(rows[0]["acc_both"], 1.0);
    assert_eq!(rows[1]["acc_both"], 0.9);
    assert_eq!(rows[1]["iaa_percent"], 0.9);
    assert_eq!(rows[2]["acc_both"], 1.0);
}

#[tokio::test]
async fn a2_payloads_carry_no_labels() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir.path().join("sessions"));
    let (status, _) = call_json(&app, "POST", "/sessions", Some(session("direct", "A2", true))).await;
    assert_eq!(status, StatusCode::CREATED);

    let dataset: HashMap<String, AnnotatedNP> = gold().into_iter().map(|np| (np.id.clone(), np)).collect();
    let answer = |annotator: &'static str| {
        let dataset = dataset.clone();
        move |p: &Value| {
            let np = &dataset[p["item_id"].as_str().unwrap()];
            json!({
                "item_id": np.id,
                "annotator_id": annotator,
                "protocol": "A2",
                "plurality_label": np.plurality.as_str(),
                "definiteness_label": np.definiteness.as_str(),
                "timestamp": 1_700_000_000u64,
            })
        }
    };
    let (mut payloads, _) = annotate_all(&app, "direct", "ann-a", answer("ann-a")).await;
    payloads.extend(annotate_all(&app, "direct", "ann-b", answer("ann-b")).await.0);
    assert_eq!(payloads.len(), 20);
    let allowed: BTreeSet<&str> = [
        "status",
        "session_id",
        "item_id",
        "protocol",
        "tokens",
        "np_span",
        "np_text",
        "position",
        "total",
        "context",
    ]
    .into();
    for p in &payloads {
        let keys: BTreeSet<&str> = p.as_object().unwrap().keys().map(String::as_str).collect();
        assert!(keys.is_subset(&allowed), "{keys:?}");
        assert!(p["context"]["before"].is_array() && p["context"]["after"].is_array());
        let text = p.to_string();
        for label in ["singular", "plural", "definite"] {
            assert!(!text.contains(label), "payload leaks {label}: {text}");
        }
    }

    let (text, records) = export(&app, "direct").await;
    assert_eq!(records.len(), 20);
    let report = score(dir.path(), &text);
    assert_eq!(report["protocol"], "A2");
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["acc_both"], 1.0);
        assert_eq!(row["iaa_percent"], 1.0);
    }
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir.path().join("sessions"));
    let (status, _) = call_json(&app, "POST", "/sessions", Some(session("s1", "A1", false))).await;
    assert_eq!(status, StatusCode::CREATED);

    let cases: Vec<(&str, String, Option<String>, StatusCode)> = vec![
        ("GET", "/sessions/nope".into(), None, StatusCode::NOT_FOUND),
        (
            "GET",
            "/sessions/nope/next?annotator=ann-a".into(),
            None,
            StatusCode::NOT_FOUND,
        ),
        (
            "GET",
            "/sessions/s1/next?annotator=mallory".into(),
            None,
            StatusCode::FORBIDDEN,
        ),
        (
            "POST",
            "/sessions".into(),
            Some(session("s1", "A1", false).to_string()),
            StatusCode::CONFLICT,
        ),
        (
            "POST",
            "/sessions".into(),
            Some("{not json".into()),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            "POST",
            "/sessions".into(),
            Some(json!({"protocol": "A1", "sample_size": 10, "annotators": ["x"], "colour": 1}).to_string()),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            "POST",
            "/sessions".into(),
            Some(json!({"protocol": "A1", "sample_size": 100000, "annotators": ["x", "y"]}).to_string()),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            "POST",
            "/sessions/s1/records".into(),
            Some("[]".into()),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
    ];
    for (method, uri, body, want) in cases {
        let (status, text, _) = call(&app, method, &uri, body).await;
        assert_eq!(status, want, "{method} {uri}: {text}");
        if status.is_client_error() {
            let err: Value = serde_json::from_str(&text).unwrap();
            assert!(err["error"].is_string());
        }
    }

    let (_, next) = call_json(&app, "GET", "/sessions/s1/next?annotator=ann-a", None).await;
    let served = next["item_id"].as_str().unwrap().to_string();
    // Both annotators hold every item, in the same order.
    let (_, next_b) = call_json(&app, "GET", "/sessions/s1/next?annotator=ann-b", None).await;
    assert_eq!(next_b["item_id"], served.as_str());
    let (status, _) = call_json(
        &app,
        "POST",
        "/sessions/s1/records",
        Some(a1_record(&served, "ann-a", "yes")),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    // Served to ann-a but not to ann-b.
    let (_, second) = call_json(&app, "GET", "/sessions/s1/next?annotator=ann-a", None).await;
    let second = second["item_id"].as_str().unwrap().to_string();

    let mut a2 = a1_record(&served, "ann-b", "yes");
    a2["protocol"] = json!("A2");
    let submits = [
        (a1_record(&served, "ann-a", "yes"), StatusCode::CONFLICT),
        (a1_record(&served, "mallory", "yes"), StatusCode::FORBIDDEN),
        (a1_record("s9:0-1", "ann-a", "yes"), StatusCode::UNPROCESSABLE_ENTITY),
        (a1_record(&second, "ann-b", "yes"), StatusCode::UNPROCESSABLE_ENTITY),
        (a2, StatusCode::UNPROCESSABLE_ENTITY),
        (a1_record(&served, "ann-b", "maybe"), StatusCode::UNPROCESSABLE_ENTITY),
    ];
    for (record, want) in submits {
        let (status, body) = call_json(&app, "POST", "/sessions/s1/records", Some(record.clone())).await;
        assert_eq!(status, want, "{record}: {body}");
    }
    let (_, records) = export(&app, "s1").await;
    assert_eq!(records.len(), 1);
}

#[tokio::test]
async fn restart_keeps_records_and_reserves_open_items() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("sessions");
    let first;
    {
        let app = app(&root);
        let (status, _) = call_json(&app, "POST", "/sessions", Some(session("durable", "A1", false))).await;
        assert_eq!(status, StatusCode::CREATED);
        let (_, a) = call_json(&app, "GET", "/sessions/durable/next?annotator=ann-a", None).await;
        let (_, b) = call_json(&app, "GET", "/sessions/durable/next?annotator=ann-a", None).await;
        first = a["item_id"].as_str().unwrap().to_string();
        let answered = b["item_id"].as_str().unwrap();
        let (status, _) = call_json(
            &app,
            "POST",
            "/sessions/durable/records",
            Some(a1_record(answered, "ann-a", "yes")),
        )
        .await;
        assert_eq!(status, StatusCode::CREATED);
    }

    let app = app(&root);
    let (_, ids) = call_json(&app, "GET", "/sessions", None).await;
    assert_eq!(ids, json!(["durable"]));
    let (_, progress) = call_json(&app, "GET", "/sessions/durable", None).await;
    assert_eq!(progress["records"], 1);
    assert_eq!(progress["annotators"]["ann-a"]["completed"], 1);
    let (_, again) = call_json(&app, "GET", "/sessions/durable/next?annotator=ann-a", None).await;
    assert_eq!(again["item_id"], first.as_str());
    assert_eq!(again["position"], 0);
    let (status, _) = call_json(
        &app,
        "POST",
        "/sessions/durable/records",
        Some(a1_record(&first, "ann-a", "yes")),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let (rest, completed) = annotate_all(&app, "durable", "ann-a", |p| {
        a1_record(p["item_id"].as_str().unwrap(), "ann-a", "yes")
    })
    .await;
    assert_eq!((rest.len(), completed), (8, 10));
    let (_, records) = export(&app, "durable").await;
    assert_eq!(records.len(), 10);
}
