use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use evasilab::{builtin, solve, PositionTable};
use evasilab_cli::server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(Duration::from_secs(3600)))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/api/game", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn bob_game_against_complete() {
    let app = app();
    let id = create(&app, json!({"n": 5, "property": "builtin:complete", "role": "bob"})).await;
    let (_, v) = call(&app, Method::GET, &format!("/api/game/{id}"), None).await;
    assert_eq!(v["status"], "ongoing");
    assert_eq!(v["questions_used"], 0);
    assert_eq!(
        v["reachable_in"].as_u64().unwrap() + v["reachable_out"].as_u64().unwrap(),
        34
    );
    assert_eq!(v["edges"].as_array().unwrap().len(), 10);

    let (_, hint) = call(&app, Method::GET, &format!("/api/game/{id}/hint"), None).await;
    assert_eq!(hint, json!({"edge": [1, 2], "worst_case_remaining": 10}));

    let mut last = v;
    for u in 1..=5 {
        for w in u + 1..=5 {
            let (status, r) = call(
                &app,
                Method::POST,
                &format!("/api/game/{id}/ask"),
                Some(json!({"edge": [u, w]})),
            )
            .await;
            assert_eq!(status, StatusCode::OK, "{r}");
            assert_eq!(r["answer"], "present");
            let s = &r["state"];
            assert!(s["reachable_in"].as_u64() <= last["reachable_in"].as_u64());
            assert!(s["reachable_out"].as_u64() <= last["reachable_out"].as_u64());
            last = s.clone();
        }
    }
    assert_eq!(last["status"], "decided_in");
    assert_eq!(last["reachable_out"], 0);
    assert_eq!(last["questions_used"], 10);
    assert_eq!(last["exhausted"], true);

    let (status, _) = call(&app, Method::GET, &format!("/api/game/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn alice_game_against_e() {
    let app = app();
    let doc = json!({"n": 5, "classes": [4, 7, 8, 9, 10, 11, 14, 16, 18, 22, 25]});
    let id = create(&app, json!({"n": 5, "property": doc, "role": "alice"})).await;
    let (_, v) = call(&app, Method::GET, &format!("/api/game/{id}"), None).await;
    assert_eq!(v["pending_question"], json!([1, 2]));
    let mut questions = 0;
    loop {
        let (status, r) = call(
            &app,
            Method::POST,
            &format!("/api/game/{id}/answer"),
            Some(json!({"answer": "present"})),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{r}");
        questions += 1;
        if r["state"]["status"] != "ongoing" {
            assert_eq!(r["next_question"], Value::Null);
            break;
        }
        assert_eq!(r["next_question"], r["state"]["pending_question"]);
    }
    assert!(questions <= 9);
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/api/game/{id}/answer"),
        Some(json!({"answer": "absent"})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn trivial_property_is_decided_at_once() {
    let app = app();
    let (status, v) = call(
        &app,
        Method::POST,
        "/api/game",
        Some(json!({"n": 5, "property": {"n": 5, "classes": []}, "role": "bob"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["status"], "decided_out");
    assert_eq!(v["reachable_in"], 0);
}

#[tokio::test]
async fn bad_requests() {
    let app = app();
    let post = |body: Value| call(&app, Method::POST, "/api/game", Some(body));
    assert_eq!(
        post(json!({"n": 5, "property": "builtin:nope", "role": "bob"})).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        post(json!({"n": 5, "property": "/etc/passwd", "role": "bob"})).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        post(json!({"n": 5, "property": "builtin:connected", "role": "carol"}))
            .await
            .0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        post(json!({"n": 9, "property": "builtin:connected", "role": "bob"}))
            .await
            .0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        post(json!({"n": 5, "property": {"n": 4, "classes": [1]}, "role": "bob"}))
            .await
            .0,
        StatusCode::BAD_REQUEST
    );

    let id = create(&app, json!({"n": 5, "property": "builtin:connected", "role": "bob"})).await;
    let ask_uri = format!("/api/game/{id}/ask");
    let ask = |edge: Value| call(&app, Method::POST, &ask_uri, Some(json!({ "edge": edge })));
    assert_eq!(ask(json!([2, 1])).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(ask(json!([1, 6])).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(ask(json!([1, 2])).await.0, StatusCode::OK);
    let (status, body) = ask(json!([1, 2])).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(body["error"].is_string());
    let (_, v) = call(&app, Method::GET, &format!("/api/game/{id}"), None).await;
    assert_eq!(v["questions_used"], 1);

    // Wrong role.
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/api/game/{id}/answer"),
        Some(json!({"answer": "present"})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);

    let alice = create(&app, json!({"n": 5, "property": "builtin:connected", "role": "alice"})).await;
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/api/game/{alice}/answer"),
        Some(json!({"answer": "yes"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, Method::GET, "/api/game/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::new(Duration::ZERO);
    let app = router(state.clone());
    let id = create(&app, json!({"n": 4, "property": "builtin:connected", "role": "bob"})).await;
    tokio::time::sleep(Duration::from_millis(5)).await;
    let (status, _) = call(&app, Method::GET, &format!("/api/game/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let state = AppState::new(Duration::from_millis(1));
    let app = router(state.clone());
    create(&app, json!({"n": 4, "property": "builtin:connected", "role": "bob"})).await;
    assert_eq!(state.session_count(), 1);
    tokio::time::sleep(Duration::from_millis(5)).await;
    assert_eq!(state.expire(std::time::Instant::now()), 1);
    assert_eq!(state.session_count(), 0);
}

#[tokio::test]
async fn service_numbers_match_the_solver() {
    let app = app();
    let table = PositionTable::shared(5).unwrap();
    for name in ["connected", "planar", "triangle-free"] {
        let depth = solve(&builtin(name, 5).unwrap(), table).unwrap().depth();
        let id = create(
            &app,
            json!({"n": 5, "property": format!("builtin:{name}"), "role": "bob"}),
        )
        .await;
        let (_, hint) = call(&app, Method::GET, &format!("/api/game/{id}/hint"), None).await;
        assert_eq!(hint["worst_case_remaining"], depth);
    }
}
