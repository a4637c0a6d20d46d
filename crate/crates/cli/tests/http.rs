//! The session API through the router, without a socket.

mod common;

use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use common::corpus;
use http_body_util::BodyExt;
use pbisim_cli::model::Model;
use pbisim_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> axum::Router {
    let mut models = BTreeMap::new();
    for (name, file) in [("fig2", "fig2.plts"), ("example21", "example21.ppda"), ("example53", "example53.afa")] {
        models.insert(name.to_string(), Model::load(&corpus(file)).unwrap());
    }
    router(AppState::new(models))
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

fn index(names: &Value, name: &str) -> u64 {
    names.as_array().unwrap().iter().position(|n| n == name).unwrap() as u64
}

fn find_move(view: &Value, pred: impl Fn(&Value) -> bool) -> Value {
    view["legal_moves"].as_array().unwrap().iter().find(|m| pred(m)).cloned().expect("legal move")
}

#[tokio::test]
async fn scripted_replay_reaches_attacker_win() {
    let app = app();
    let (st, models) = call(&app, Method::GET, "/models", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(models.as_array().unwrap().len(), 3);

    let body = json!({"model": "fig2", "left": "s", "right": "u", "human": "attacker", "horizon": 2});
    let (st, v) = call(&app, Method::POST, "/session", Some(body)).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    let id = v["id"].as_u64().unwrap();
    assert_eq!(v["position"]["kind"], "pair");
    assert_eq!(v["to_move"], "attacker");
    let states = v["state_names"].clone();
    let b = index(&v["action_names"], "b");
    let (t2, u) = (index(&states, "t2"), index(&states, "u"));

    let open = find_move(&v, |m| m["kind"] == "transition" && m["side"] == "left" && m["action"] == b);
    // Rationals travel as {"num", "den"} objects.
    let weight = &open["target"][0][1];
    assert!(weight["num"].is_i64() && weight["den"].is_i64(), "{open}");
    let uri = format!("/session/{id}/move");
    let (st, v) = call(&app, Method::POST, &uri, Some(open)).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["position"]["kind"], "dist_pair");
    let (_, v) = call(&app, Method::POST, &uri, Some(json!({"kind": "subset", "side": "right", "subset": [t2]}))).await;
    assert_eq!(v["position"]["kind"], "set_pair");
    let (_, v) = call(&app, Method::POST, &uri, Some(json!({"kind": "pick", "side": "left", "state": u}))).await;
    assert_eq!(v["position"], json!({"kind": "pair", "left": u, "right": t2}));
    assert_eq!(v["rounds_played"], 1);
    let last = find_move(&v, |m| m["kind"] == "transition" && m["side"] == "left" && m["action"] == b);
    let (_, v) = call(&app, Method::POST, &uri, Some(last)).await;
    assert_eq!(v["outcome"], "attacker_wins");
    assert_eq!(v["legal_moves"], json!([]));

    let (st, again) = call(&app, Method::GET, &format!("/session/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(again, v);
    let (st, err) = call(&app, Method::POST, &uri, Some(json!({"kind": "pick_response", "state": 0}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert!(err["error"].is_string());
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let (st, e) = call(&app, Method::GET, "/session/42", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert!(e["error"].as_str().unwrap().contains("42"));
    let (st, _) = call(&app, Method::POST, "/session/42/move", Some(json!({"kind": "pick_response", "state": 0}))).await;
    assert_eq!(st, StatusCode::NOT_FOUND);

    let bad = [
        json!({"model": "nope", "left": "s", "right": "u", "human": "attacker", "horizon": 2}),
        json!({"model": "fig2", "left": "s", "right": "zz", "human": "attacker", "horizon": 2}),
        json!({"model": "fig2", "left": "s", "right": "u", "human": "referee", "horizon": 2}),
        json!({"model": "fig2", "left": "s", "right": "u", "human": "attacker", "horizon": 1000}),
        json!({"model": "example53", "left": "q0", "right": "q1", "human": "attacker", "horizon": 2}),
    ];
    for b in bad {
        let (st, e) = call(&app, Method::POST, "/session", Some(b.clone())).await;
        assert_eq!(st, StatusCode::BAD_REQUEST, "{b}: {e}");
        assert!(e["error"].is_string());
    }

    let body = json!({"model": "fig2", "left": "s", "right": "u", "human": "attacker", "horizon": 2});
    let (_, v) = call(&app, Method::POST, "/session", Some(body)).await;
    let uri = format!("/session/{}/move", v["id"]);
    let (st, e) = call(&app, Method::POST, &uri, Some(json!({"kind": "pick_response", "state": 0}))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(e["error"].as_str().unwrap().starts_with("illegal move"));
    let (st, _) = call(&app, Method::POST, &uri, Some(json!({"kind": "teleport"}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn pushdown_sessions_unfold_the_configurations() {
    let app = app();
    let body = json!({"model": "example21", "left": "pXZ", "right": "rX", "human": "defender", "horizon": 3});
    let (st, mut v) = call(&app, Method::POST, "/session", Some(body)).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    let names = v["state_names"].as_array().unwrap();
    assert!(names.iter().any(|n| n == "pXZ") && names.iter().any(|n| n == "rX"));
    let id = v["id"].as_u64().unwrap();
    while v["outcome"].is_null() {
        let mv = v["legal_moves"][0].clone();
        let (st, next) = call(&app, Method::POST, &format!("/session/{id}/move"), Some(mv)).await;
        assert_eq!(st, StatusCode::OK, "{next}");
        v = next;
    }
    // The configurations are 3-bisimilar, so the engine cannot win.
    assert!(v["outcome"] == "defender_survives" || v["outcome"] == "defender_wins", "{v}");
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let app = app();
    let mut handles = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let body = json!({"model": "fig2", "left": "s", "right": "u", "human": "defender", "horizon": 2});
            let (_, mut v) = call(&app, Method::POST, "/session", Some(body)).await;
            let id = v["id"].as_u64().unwrap();
            while v["outcome"].is_null() {
                let mv = v["legal_moves"][0].clone();
                v = call(&app, Method::POST, &format!("/session/{id}/move"), Some(mv)).await.1;
            }
            (id, v["outcome"].clone())
        }));
    }
    let mut ids = Vec::new();
    for h in handles {
        let (id, outcome) = h.await.unwrap();
        assert_eq!(outcome, "attacker_wins");
        ids.push(id);
    }
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 8);
}
