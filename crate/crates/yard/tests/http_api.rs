mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use common::*;
use http_body_util::BodyExt;
use semwiki_core::infer::{prove, Goal, Limits, Verdict};
use semwiki_yard::{router, AppState, Clock, SimClock};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Api {
    app: Router,
    state: AppState,
    clock: SimClock,
}

impl Api {
    fn new() -> Api {
        let clock = SimClock::new(1_000);
        let state = AppState::new(yard(), Arc::new(clock.clone()) as Arc<dyn Clock>);
        Api {
            app: router(state.clone()),
            state,
            clock,
        }
    }

    async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header(header::CONTENT_TYPE, "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, value)
    }

    async fn engine(&self, name: &str, caps: &[&str]) -> (String, String) {
        let (s, v) = self
            .call(Method::POST, "/engines", None, Some(json!({ "name": name, "capabilities": caps })))
            .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        (v["id"].as_str().unwrap().into(), v["token"].as_str().unwrap().into())
    }
}

#[tokio::test]
async fn full_round_trip_for_a_provable_problem() {
    let api = Api::new();
    let (s, p) = api.call(Method::POST, "/problems", None, Some(json!({ "source": EXPONENT2 }))).await;
    assert_eq!(s, StatusCode::CREATED, "{p}");
    assert_eq!(p["id"], "p1");
    assert_eq!(p["state"], "pending");
    assert_eq!(p["created_at"], 1_000);

    let (id, token) = api.engine("n", &["native"]).await;
    let (s, task) = api.call(Method::GET, &format!("/engines/{id}/tasks"), Some(&token), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(task["task_id"], "t1");
    assert_eq!(task["kind"], "native");
    assert_eq!(task["lease_expires_at"], 1_000 + LEASE);

    // the engine works from the payload alone
    let goal: Goal = serde_json::from_value(task["goal"].clone()).unwrap();
    let limits: Limits = serde_json::from_value(task["limits"].clone()).unwrap();
    let kb = api.state.lock().kb().clone();
    let verdict: Verdict = prove(&goal, &kb, &limits);
    assert_eq!(verdict.kind(), "proved");

    api.clock.advance(500);
    let (s, r) = api
        .call(Method::POST, "/tasks/t1/result", Some(&token), Some(json!(verdict)))
        .await;
    assert_eq!((s, r["status"].as_str()), (StatusCode::OK, Some("accepted")));
    let (s, r) = api
        .call(Method::POST, "/tasks/t1/result", Some(&token), Some(json!(verdict)))
        .await;
    assert_eq!((s, r["status"].as_str()), (StatusCode::OK, Some("ignored")));

    let (s, p) = api.call(Method::GET, "/problems/p1", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p["state"], "resolved");
    assert_eq!(p["resolved_at"], 1_500);
    assert_eq!(p["final"]["kind"], "proved");
    assert!(p["outline"].as_str().unwrap().contains("$b*a=c$"));

    let (s, v) = api.call(Method::GET, &format!("/engines/{id}/tasks"), Some(&token), None).await;
    assert_eq!((s, v), (StatusCode::NO_CONTENT, Value::Null));
}

#[tokio::test]
async fn errors_carry_codes_and_statuses() {
    let api = Api::new();
    let cases: Vec<(Value, StatusCode, &str)> = vec![
        (json!({ "source": "Let $G$ be a group." }), StatusCode::BAD_REQUEST, "E_PARSE"),
        (
            json!({ "source": "Let $G$ be a group.\nProve that\n    $G$ is a wombat." }),
            StatusCode::UNPROCESSABLE_ENTITY,
            "E_UNTRANSLATED",
        ),
        (json!({ "text": "x" }), StatusCode::BAD_REQUEST, "E_INVALID"),
    ];
    for (body, status, code) in cases {
        let (s, v) = api.call(Method::POST, "/problems", None, Some(body)).await;
        assert_eq!((s, v["code"].as_str()), (status, Some(code)), "{v}");
    }
    let (_, v) = api
        .call(Method::POST, "/problems", None, Some(json!({ "source": "Let $G$ be a group." })))
        .await;
    assert_eq!(v["detail"], "E_NO_CONCLUSION");
    let (_, v) = api
        .call(
            Method::POST,
            "/problems",
            None,
            Some(json!({ "source": "Let $G$ be a group.\nProve that\n    $G$ is a wombat." })),
        )
        .await;
    assert_eq!(v["sentences"][0]["index"], 1);

    let (s, v) = api.call(Method::GET, "/problems/p404", None, None).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("E_NOT_FOUND")));

    let (id, _) = api.engine("n", &["native"]).await;
    let (s, v) = api.call(Method::GET, &format!("/engines/{id}/tasks"), Some("bad"), None).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNAUTHORIZED, Some("E_AUTH")));
    let (s, _) = api.call(Method::GET, &format!("/engines/{id}/tasks"), None, None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);

    let (s, v) = api
        .call(Method::POST, "/engines", None, Some(json!({ "name": "x", "capabilities": ["magic"] })))
        .await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("E_INVALID")));
}

#[tokio::test]
async fn disambiguation_over_http() {
    let api = Api::new();
    let (_, p) = api.call(Method::POST, "/problems", None, Some(json!({ "source": AMBIGUOUS }))).await;
    assert_eq!(p["state"], "needs_disambiguation");
    assert_eq!(p["ambiguities"][0]["candidates"].as_array().unwrap().len(), 2);

    let (s, v) = api
        .call(Method::POST, "/problems/p1/disambiguate", None, Some(json!({ "choices": { "1": 5 } })))
        .await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("E_BAD_CHOICE")));
    let (s, v) = api
        .call(Method::POST, "/problems/p1/disambiguate", None, Some(json!({ "choices": { "x": 0 } })))
        .await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("E_INVALID")));

    let (s, p) = api
        .call(Method::POST, "/problems/p1/disambiguate", None, Some(json!({ "choices": { "1": 1 } })))
        .await;
    assert_eq!((s, p["state"].as_str()), (StatusCode::OK, Some("pending")));
    assert_eq!(p["choices"]["1"], 1);
    let (s, v) = api
        .call(Method::POST, "/problems/p1/disambiguate", None, Some(json!({ "choices": { "1": 1 } })))
        .await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::CONFLICT, Some("E_WRONG_STATE")));
}

#[tokio::test]
async fn bad_proof_and_missing_lease_are_refused() {
    let api = Api::new();
    api.call(Method::POST, "/problems", None, Some(json!({ "source": EXPONENT2 }))).await;
    api.call(Method::POST, "/problems", None, Some(json!({ "source": GROUP }))).await;
    let (a, ta) = api.engine("a", &["native"]).await;
    let (_b, tb) = api.engine("b", &["native", "tptp"]).await;

    let goal = api.state.lock().problem("p1").unwrap().goal.clone().unwrap();
    let kb = api.state.lock().kb().clone();
    let proof = prove(&goal, &kb, &Limits::default());

    let (s, v) = api.call(Method::POST, "/tasks/t3/result", Some(&tb), Some(json!(proof))).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::CONFLICT, Some("E_NO_LEASE")));

    api.call(Method::GET, &format!("/engines/{a}/tasks"), Some(&ta), None).await;
    let (_, t) = api.call(Method::GET, &format!("/engines/{a}/tasks"), Some(&ta), None).await;
    assert_eq!(t["task_id"], "t3");
    let (s, v) = api.call(Method::POST, "/tasks/t3/result", Some(&ta), Some(json!(proof))).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("E_BAD_PROOF")));
    let (s, v) = api
        .call(Method::POST, "/tasks/t3/result", Some(&ta), Some(json!({ "kind": "maybe" })))
        .await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("E_INVALID")));

    let (_, p) = api.call(Method::GET, "/problems/p2", None, None).await;
    assert_eq!(p["state"], "dispatched");
    assert_eq!(p["final"], Value::Null);
}

#[tokio::test]
async fn rules_export_and_symbols() {
    let api = Api::new();
    let rule = json!({
        "id": "abelian",
        "pattern": r"\d+ is abelian",
        "template": "commutative(#{1}).",
        "examples": ["$H$ is abelian"],
    });
    let (s, v) = api.call(Method::POST, "/rules", None, Some(rule.clone())).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    assert_eq!(v["report"]["rule_id"], "abelian");

    let mut bad = rule;
    bad["id"] = json!("abelian2");
    bad["examples"] = json!(["$H$ is a wombat"]);
    let (s, v) = api.call(Method::POST, "/rules", None, Some(bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    assert!(v["report"]["outcomes"].is_array());

    // the new rule reads a conclusion straight away
    let (s, p) = api
        .call(
            Method::POST,
            "/problems",
            None,
            Some(json!({ "source": "Let $G$ be a group.\nProve that\n    $G$ is abelian." })),
        )
        .await;
    assert_eq!(s, StatusCode::CREATED, "{p}");

    let (s, v) = api.call(Method::GET, "/kb/export?format=native", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.is_object());
    let (s, v) = api.call(Method::GET, "/kb/export?format=tptp", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_str().unwrap().contains("fof("));
    let (s, _) = api.call(Method::GET, "/kb/export?format=xml", None, None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = api.call(Method::GET, "/symbols?q=prod&limit=3", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let hits = v.as_array().unwrap();
    assert!(!hits.is_empty() && hits.len() <= 3);
}

#[tokio::test]
async fn local_engine_and_scheduler_resolve_problems() {
    let api = Api::new();
    semwiki_yard::spawn_local_engine(api.state.clone());
    api.call(Method::POST, "/problems", None, Some(json!({ "source": EXPONENT2 }))).await;
    api.call(Method::POST, "/problems", None, Some(json!({ "source": GROUP }))).await;
    for _ in 0..200 {
        let (_, a) = api.call(Method::GET, "/problems/p1", None, None).await;
        let (_, b) = api.call(Method::GET, "/problems/p2", None, None).await;
        if a["state"] == "resolved" && b["state"] == "resolved" {
            assert_eq!(a["final"]["kind"], "proved");
            assert_eq!(b["final"]["kind"], "unknown");
            let (_, engines) = api.call(Method::GET, "/engines", None, None).await;
            assert_eq!(engines[0]["local"], true);
            assert!(engines[0].get("token").is_none());
            return;
        }
        tokio::time::sleep(std::time::Duration::from_millis(50)).await;
    }
    panic!("problems not resolved by the local engine");
}
