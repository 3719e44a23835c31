use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use prodclarify_core::agent::{Agent, AgentConfig, Answer, SessionMemory, TurnOutput, UserInput};
use prodclarify_core::catalog::{generate_synthetic_catalog, Catalog, FacetId, ProductItem, SyntheticSpec};
use prodclarify_core::simbench::SimulatedUser;
use prodclarify_service::api::router;
use prodclarify_service::sessions::{SessionResource, SessionState, SessionStore};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(catalog: Catalog) -> (Router, Arc<Agent>) {
    let agent = Arc::new(Agent::from_catalog(catalog, AgentConfig::default()).unwrap());
    let store = Arc::new(SessionStore::new(Arc::clone(&agent), Duration::from_secs(1800)));
    (router(store, None), agent)
}

fn app() -> (Router, Arc<Agent>) {
    app_with(generate_synthetic_catalog(8, SyntheticSpec::new(3, 80, 8)).unwrap())
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = call_raw(app, method, uri, body).await;
    let value = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap_or(Value::String(text)) };
    (status, value)
}

fn resource(v: Value) -> SessionResource {
    serde_json::from_value(v).unwrap()
}

fn answers_json(answers: &[Answer]) -> Value {
    let list: Vec<Value> = answers
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut o = json!({"question_index": i, "selected": a.selected});
            if let Some(t) = &a.free_text {
                o["free_text"] = json!(t);
            }
            o
        })
        .collect();
    json!({ "answers": list })
}

#[tokio::test]
async fn create_returns_first_turn() {
    let (app, _) = app();
    let (status, body) = call(&app, Method::POST, "/sessions", Some(json!({"category": "canvas shoes"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let r = resource(body);
    assert_eq!(r.state, SessionState::AwaitingAnswers);
    assert_eq!(r.category.as_deref(), Some("Canvas shoes"));
    let turn = r.turn.unwrap();
    assert_eq!(turn.turn, 1);
    assert_eq!(turn.questions.len(), 3);
    assert!(turn.items.len() <= 10);
    assert!(turn.questions.iter().all(|q| q.candidates.last().map(String::as_str) == Some("Other")));

    let (_, other) = call(&app, Method::POST, "/sessions", Some(json!({"category": "Canvas shoes"}))).await;
    assert_ne!(resource(other).session_id, r.session_id);

    let (status, got) = call(&app, Method::GET, &format!("/sessions/{}", r.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resource(got).state, SessionState::AwaitingAnswers);
}

#[tokio::test]
async fn error_statuses() {
    let (app, _) = app();
    let (status, body) = call(&app, Method::POST, "/sessions", Some(json!({"category": "Hats"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "unknown_category");
    assert_eq!(body["available_categories"], json!(["Canvas shoes", "Casual pants", "Sports shoes"]));

    let (status, body) = call(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "session_not_found");

    let (status, _) = call(&app, Method::POST, "/sessions", Some(json!({"categry": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, body) = call(&app, Method::POST, "/sessions", Some(json!({"category": "Casual pants"}))).await;
    let id = resource(body).session_id;
    let uri = format!("/sessions/{id}/answers");
    let (status, body) = call(&app, Method::POST, &uri, Some(json!({"answers": [{"question_index": 0, "selected": ["Other"]}]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "validation");

    let (status, _) = call(&app, Method::POST, &uri, Some(json!({"answers": [], "turn": 4}))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (s1, first) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    let (s2, second) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(first, second);
    assert_eq!(resource(first).state, SessionState::Closed);
    let (_, got) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(resource(got).state, SessionState::Closed);

    let others = answers_json(&[Answer::other(), Answer::other(), Answer::other()]);
    let (status, body) = call(&app, Method::POST, &uri, Some(others)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "conflict");
}

#[tokio::test]
async fn category_can_follow_creation() {
    let (app, _) = app();
    let (status, body) = call(&app, Method::POST, "/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let r = resource(body);
    assert_eq!(r.state, SessionState::AwaitingCategory);
    assert!(r.turn.is_none());
    let uri = format!("/sessions/{}/category", r.session_id);
    let (status, body) = call(&app, Method::POST, &uri, Some(json!({"category": "Sports shoes"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resource(body).state, SessionState::AwaitingAnswers);
    let (status, _) = call(&app, Method::POST, &uri, Some(json!({"category": "Sports shoes"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

fn sports_catalog() -> Catalog {
    let scenarios = [["Outdoor", "Basketball"], ["Running", "Outdoor"], ["Basketball", "Indoor"], ["Tennis", "Running"]];
    let colors = ["Black", "Green", "White", "Red"];
    let materials = ["Mesh", "Leather", "Rubber", "Mesh"];
    let items = (0..12).map(|i| {
        ProductItem::new(format!("s{i:02}"), format!("Sports shoe {i}"), "Sports shoes")
            .with(FacetId::ApplicableScenario, &scenarios[i % 4])
            .with(FacetId::Color, &[colors[(i / 4 + i) % 4]])
            .with(FacetId::Material, &[materials[i % 4]])
    });
    Catalog::from_items(items).unwrap()
}

#[tokio::test]
async fn answers_grow_demands() {
    let (app, _) = app_with(sports_catalog());
    let (_, body) = call(&app, Method::POST, "/sessions", Some(json!({"category": "Sports shoes"}))).await;
    let r = resource(body);
    let turn = r.turn.unwrap();
    let scenario = turn.questions.iter().position(|q| q.facet == Some(FacetId::ApplicableScenario)).unwrap();
    let color = turn.questions.iter().position(|q| q.facet == Some(FacetId::Color)).unwrap();
    let answers: Vec<Value> = (0..turn.questions.len())
        .map(|i| {
            if i == scenario {
                json!({"question_index": i, "selected": ["Outdoor", "Basketball"]})
            } else if i == color {
                json!({"question_index": i, "free_text": "I like green"})
            } else {
                json!({"question_index": i, "selected": ["Other"]})
            }
        })
        .collect();
    let uri = format!("/sessions/{}/answers", r.session_id);
    let (status, body) = call(&app, Method::POST, &uri, Some(json!({"answers": answers, "turn": 1}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let next = resource(body);
    assert_eq!(next.turn.as_ref().unwrap().turn, 2);
    let d = &next.demands;
    assert_eq!(d.len(), 3);
    let scen = d.iter().find(|x| x.facet == Some(FacetId::ApplicableScenario)).unwrap();
    assert_eq!(scen.chosen_options, ["Outdoor", "Basketball"]);
    let col = d.iter().find(|x| x.facet == Some(FacetId::Color)).unwrap();
    assert!(col.chosen_options.is_empty());
    assert_eq!(col.free_text.as_deref(), Some("I like green"));

    let (status, _) = call(&app, Method::GET, &format!("/sessions/{}/transcript", r.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
}

fn library_session(agent: &Agent, id: &str, user: &SimulatedUser, turns: usize) -> Vec<TurnOutput> {
    let mut memory = SessionMemory::new(id, agent.config().seed);
    let mut outputs = Vec::new();
    let mut input = UserInput::category(user.truth.category.clone());
    for _ in 0..turns {
        let out = agent.step(&mut memory, input).unwrap();
        input = UserInput::Answers(user.simulate_answer(&out.questions));
        let done = out.exhausted;
        outputs.push(out);
        if done {
            break;
        }
    }
    outputs
}

#[tokio::test]
async fn api_matches_library_byte_for_byte() {
    let (app, agent) = app();
    for pick in [0usize, 97, 203] {
        let truth = agent.catalog().items()[pick].clone();
        let user = SimulatedUser::new(truth.clone());
        let (_, body) = call_raw(&app, Method::POST, "/sessions", Some(json!({"category": truth.category}))).await;
        let mut bodies = vec![body];
        let mut r = resource(serde_json::from_str(&bodies[0]).unwrap());
        let id = r.session_id.clone();
        while bodies.len() < 5 && r.state == SessionState::AwaitingAnswers {
            let answers = user.simulate_answer(&r.turn.as_ref().unwrap().questions);
            let (status, body) = call_raw(&app, Method::POST, &format!("/sessions/{id}/answers"), Some(answers_json(&answers))).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            r = resource(serde_json::from_str(&body).unwrap());
            bodies.push(body);
        }
        let lib_turns = library_session(&agent, &id, &user, 5);
        assert_eq!(bodies.len(), lib_turns.len());
        for (body, turn) in bodies.iter().zip(&lib_turns) {
            let encoded = format!("\"turn\":{}", serde_json::to_string(turn).unwrap());
            assert!(body.contains(&encoded), "turn {} of {} differs", turn.turn, truth.id);
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn one_step_per_session_at_a_time() {
    let (app, _) = app();
    let (_, body) = call(&app, Method::POST, "/sessions", Some(json!({"category": "Casual pants"}))).await;
    let r = resource(body);
    let n = r.turn.unwrap().questions.len();
    let others: Vec<Value> = (0..n).map(|i| json!({"question_index": i, "selected": ["Other"]})).collect();
    let uri = format!("/sessions/{}/answers", r.session_id);
    let body = json!({"answers": others, "turn": 1});
    let (a, b) = tokio::join!(
        call(&app, Method::POST, &uri, Some(body.clone())),
        call(&app, Method::POST, &uri, Some(body.clone()))
    );
    let mut statuses = [a.0, b.0];
    statuses.sort();
    assert_eq!(statuses, [StatusCode::OK, StatusCode::CONFLICT]);
    let (_, got) = call(&app, Method::GET, &format!("/sessions/{}", r.session_id), None).await;
    assert_eq!(resource(got).turn.unwrap().turn, 2);

    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { call(&app, Method::POST, "/sessions", Some(json!({"category": "Sports shoes"}))).await })
        })
        .collect();
    for h in handles {
        assert_eq!(h.await.unwrap().0, StatusCode::CREATED);
    }
}

#[tokio::test]
async fn health_categories_and_static_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let agent = Arc::new(Agent::from_catalog(sports_catalog(), AgentConfig::default()).unwrap());
    let store = Arc::new(SessionStore::new(agent, Duration::from_secs(60)));
    let app = router(store, Some(dir.path().to_path_buf()));

    let (status, body) = call(&app, Method::GET, "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok", "items": 12, "sessions": 0}));
    let (_, body) = call(&app, Method::GET, "/categories", None).await;
    assert_eq!(body, json!([{"name": "Sports shoes", "items": 12}]));
    let (status, body) = call(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<html>ui</html>".into()));
    let (status, _) = call(&app, Method::GET, "/app.js", None).await;
    assert_eq!(status, StatusCode::OK);
}
