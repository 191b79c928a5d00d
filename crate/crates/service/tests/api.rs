use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tagscope_core::analytics::{self, CountMode, Scope, TagFilter};
use tagscope_core::fixtures;
use tagscope_core::model::{load_project, to_canonical_json, Project, Span};
use tagscope_core::similarity::{similarity_matrix, MatrixOptions};
use tagscope_service::{remote_fixture_router, router, Service, StoreError};
use tower::ServiceExt;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, String) {
    call(app, Method::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, String) {
    call(app, Method::POST, uri, Some(body)).await
}

fn json_of(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn project_doc(p: &Project) -> Value {
    json!({ "project": serde_json::to_value(p).unwrap() })
}

async fn app_with(dir: &Path, projects: &[Project]) -> (Service, Router) {
    let svc = Service::open(dir, 2).unwrap();
    let app = router(svc.clone());
    for p in projects {
        let (status, body) = post(&app, "/import", project_doc(p)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
    }
    (svc, app)
}

#[tokio::test(flavor = "multi_thread")]
async fn empty_store_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(dir.path(), &[]).await;
    assert_eq!(get(&app, "/projects").await, (StatusCode::OK, "[]".into()));
    assert_eq!(get(&app, "/boards").await, (StatusCode::OK, "[]".into()));
    let (status, body) = get(&app, "/projects/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json_of(&body)["code"], "unknown_project");
    let (status, body) = get(&app, "/no/such/route").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json_of(&body)["code"], "not_found");
}

#[tokio::test(flavor = "multi_thread")]
async fn import_documents() {
    let dir = tempfile::tempdir().unwrap();
    let glory = fixtures::glory_poem();
    let (_, app) = app_with(dir.path(), std::slice::from_ref(&glory)).await;
    let (status, body) = post(&app, "/import", project_doc(&glory)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["changed"], false);
    assert_eq!(
        get(&app, "/projects/glory").await.1,
        to_canonical_json(&glory)
    );

    let (_, body) = get(&app, "/projects/glory/texts/glory-1").await;
    let text = json_of(&body);
    assert_eq!(text["length"], 240);
    assert_eq!(text["annotations"].as_array().unwrap().len(), 12);

    let mut bad = glory.clone();
    bad.annotations[0].ranges = vec![Span::new(0, 500)];
    let (status, body) = post(&app, "/import", project_doc(&bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&body)["code"], "invalid_project");
    let (status, body) = post(&app, "/import", json!({"nonsense": 1})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json_of(&body)["code"], "invalid_argument");
}

#[tokio::test(flavor = "multi_thread")]
async fn charts_are_analytics_output_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let glory = fixtures::glory_poem();
    let piyyut = fixtures::gallery_corpus();
    let (_, app) = app_with(dir.path(), &[glory.clone(), piyyut.clone()]).await;

    let expected =
        serde_json::to_string(&analytics::gantt(&glory, "glory-1", &TagFilter::all()).unwrap())
            .unwrap();
    assert_eq!(
        get(&app, "/charts/gantt?project=glory&text=glory-1")
            .await
            .1,
        expected
    );
    let only = TagFilter::only(["epithet"]);
    let expected =
        serde_json::to_string(&analytics::gantt(&glory, "glory-1", &only).unwrap()).unwrap();
    assert_eq!(
        get(
            &app,
            "/charts/gantt?project=glory&text=glory-1&tags=epithet"
        )
        .await
        .1,
        expected
    );

    let expected =
        serde_json::to_string(&analytics::stacked_area(&glory, "glory-1", Some(20)).unwrap())
            .unwrap();
    assert_eq!(
        get(&app, "/charts/stacked?project=glory&text=glory-1&bin=20")
            .await
            .1,
        expected
    );
    let (status, _) = get(&app, "/charts/stacked?project=glory&text=glory-1&bin=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let expected = serde_json::to_string(
        &analytics::sunburst(&glory, &Scope::Project, CountMode::Occurrences).unwrap(),
    )
    .unwrap();
    assert_eq!(
        get(&app, "/charts/sunburst?project=glory").await.1,
        expected
    );
    let expected = serde_json::to_string(
        &analytics::sunburst(
            &glory,
            &Scope::Text("glory-1".into()),
            CountMode::Characters,
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(
        get(
            &app,
            "/charts/sunburst?project=glory&scope=text:glory-1&mode=characters"
        )
        .await
        .1,
        expected
    );

    let expected = serde_json::to_string(&analytics::gallery(&piyyut, &TagFilter::all())).unwrap();
    assert_eq!(
        get(&app, "/charts/gallery?project=piyyut").await.1,
        expected
    );
    let (status, body) = get(&app, "/charts/gallery?project=piyyut&tags=nope").await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::NOT_FOUND, json!("unknown_tag"))
    );
    let (status, body) = get(&app, "/charts/gantt?project=glory&text=ghost").await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::NOT_FOUND, json!("unknown_text"))
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn matrix_is_cached_and_invalidated() {
    let dir = tempfile::tempdir().unwrap();
    let piyyut = fixtures::gallery_corpus();
    let (svc, app) = app_with(dir.path(), std::slice::from_ref(&piyyut)).await;
    let uri = "/similarity/matrix?project=piyyut&tag=metaphor&radius=1";

    let t0 = Instant::now();
    let (status, first) = get(&app, uri).await;
    let cold = t0.elapsed();
    assert_eq!(status, StatusCode::OK);
    let t1 = Instant::now();
    let (_, second) = get(&app, uri).await;
    let warm = t1.elapsed();
    assert_eq!(first, second);
    assert!(warm * 10 <= cold, "cold {cold:?} warm {warm:?}");
    let engine = similarity_matrix(&piyyut, "metaphor", MatrixOptions::default()).unwrap();
    assert_eq!(first, serde_json::to_string(&engine).unwrap());
    assert_eq!(svc.cached_matrix_count(), 1);

    let mut changed = piyyut.clone();
    let a = changed
        .annotations
        .iter_mut()
        .find(|a| a.tag.as_str() == "metaphor")
        .unwrap();
    a.ranges = vec![Span::new(a.ranges[0].start, a.ranges[0].start + 1)];
    assert_eq!(
        post(&app, "/import", project_doc(&changed)).await.0,
        StatusCode::CREATED
    );
    assert_eq!(svc.cached_matrix_count(), 0);
    let (_, third) = get(&app, uri).await;
    let engine = similarity_matrix(&changed, "metaphor", MatrixOptions::default()).unwrap();
    assert_eq!(third, serde_json::to_string(&engine).unwrap());
    assert_ne!(third, first);

    let (status, body) = get(&app, "/similarity/matrix?project=piyyut&tag=nope").await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::NOT_FOUND, json!("unknown_tag"))
    );

    let (_, body) = get(
        &app,
        "/similarity/rank?project=piyyut&tag=metaphor&target=poem-00",
    )
    .await;
    let ranked = json_of(&body);
    assert_eq!(ranked.as_array().unwrap().len(), 11);
    let scores: Vec<f64> = ranked
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["score"].as_f64().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test(flavor = "multi_thread")]
async fn jobs_complete_and_concurrent_readers_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(dir.path(), &[fixtures::gallery_corpus()]).await;
    let (status, body) = post(
        &app,
        "/similarity/jobs",
        json!({"project": "piyyut", "tag": "epithet", "radius": 2}),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let id = json_of(&body)["id"].as_str().unwrap().to_owned();
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let job = json_of(&get(&app, &format!("/similarity/jobs/{id}")).await.1);
        match job["status"].as_str().unwrap() {
            "done" => break,
            "queued" | "running" => {}
            other => panic!("job ended {other}: {job}"),
        }
        assert!(Instant::now() < deadline);
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    let (status, _) = get(&app, "/similarity/jobs/job-999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let uri = "/similarity/matrix?project=piyyut&tag=simile&radius=3";
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { get(&app, uri).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (status, body) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        bodies.push(body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test(flavor = "multi_thread")]
async fn boards_move_texts_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(dir.path(), &[fixtures::gallery_corpus()]).await;
    let (status, body) = post(
        &app,
        "/boards",
        json!({"project": "piyyut", "name": "sorting", "categories": ["late poems", "early"]}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let board = json_of(&body);
    let id = board["id"].as_str().unwrap().to_owned();
    assert_eq!(board["uncategorized"].as_array().unwrap().len(), 12);

    let mv = |text: &str, category: Value| json!({"text": text, "category": category});
    let (_, body) = post(
        &app,
        &format!("/boards/{id}/move"),
        mv("poem-05", json!("late poems")),
    )
    .await;
    let b = json_of(&body);
    assert_eq!(b["categories"][0]["texts"], json!(["poem-05"]));
    assert_eq!(b["uncategorized"].as_array().unwrap().len(), 11);
    let (_, body) = post(
        &app,
        &format!("/boards/{id}/move"),
        mv("poem-05", Value::Null),
    )
    .await;
    assert_eq!(json_of(&body)["categories"][0]["texts"], json!([]));

    let (status, body) = post(
        &app,
        &format!("/boards/{id}/move"),
        mv("poem-05", json!("nope")),
    )
    .await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::NOT_FOUND, json!("unknown_category"))
    );
    let (status, _) = post(
        &app,
        &format!("/boards/{id}/move"),
        mv("ghost", Value::Null),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let racers: Vec<_> = ["late poems", "early"]
        .into_iter()
        .cycle()
        .take(16)
        .map(|c| {
            let app = app.clone();
            let uri = format!("/boards/{id}/move");
            tokio::spawn(async move {
                post(&app, &uri, json!({"text": "poem-07", "category": c})).await
            })
        })
        .collect();
    for r in racers {
        assert_eq!(r.await.unwrap().0, StatusCode::OK);
    }
    let b = json_of(&get(&app, &format!("/boards/{id}")).await.1);
    let placements = b["categories"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c["texts"].as_array().unwrap().clone())
        .chain(b["uncategorized"].as_array().unwrap().clone())
        .filter(|t| t == "poem-07")
        .count();
    assert_eq!(placements, 1);

    let (status, body) = call(
        &app,
        Method::PUT,
        &format!("/boards/{id}"),
        Some(json!({"categories": ["early"], "name": "renamed"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let b = json_of(&body);
    assert_eq!(b["name"], "renamed");
    assert_eq!(b["categories"].as_array().unwrap().len(), 1);
    assert_eq!(
        get(&app, "/boards?project=piyyut")
            .await
            .1
            .matches("\"id\"")
            .count(),
        1
    );
    assert_eq!(get(&app, "/boards?project=other").await.1, "[]");
    assert_eq!(
        call(&app, Method::DELETE, &format!("/boards/{id}"), None)
            .await
            .0,
        StatusCode::NO_CONTENT
    );
    assert_eq!(
        get(&app, &format!("/boards/{id}")).await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn evaluation_session_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(
        dir.path(),
        &[fixtures::gallery_corpus(), fixtures::glory_poem()],
    )
    .await;
    let (status, body) = post(
        &app,
        "/evaluation/trials",
        json!({"project": "piyyut", "tag": "metaphor", "seed": 7}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert!(!body.contains("provenance") && !body.contains("top3") && !body.contains("score"));
    let session = json_of(&body);
    let sid = session["id"].as_str().unwrap().to_owned();
    assert_eq!(session["trials"].as_array().unwrap().len(), 12);
    let again = post(
        &app,
        "/evaluation/trials",
        json!({"project": "piyyut", "tag": "metaphor", "seed": 7}),
    )
    .await
    .1;
    assert_eq!(again, body);
    assert_eq!(
        get(&app, &format!("/evaluation/trials/{sid}")).await.1,
        body
    );

    for trial in session["trials"].as_array().unwrap() {
        let ranking = trial["candidates"].clone();
        let (status, body) = post(
            &app,
            "/evaluation/responses",
            json!({"session": sid, "trial": trial["id"], "rater": "scholar", "ranking": ranking}),
        )
        .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
    }
    let t0 = &session["trials"][0];
    let (status, body) = post(
        &app,
        "/evaluation/responses",
        json!({"session": sid, "trial": t0["id"], "rater": "scholar", "ranking": [t0["candidates"][0]]}),
    )
    .await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::UNPROCESSABLE_ENTITY, json!("invalid_ranking"))
    );

    let report = json_of(
        &get(&app, &format!("/evaluation/report?session={sid}"))
            .await
            .1,
    );
    assert_eq!(report["trial_count"], 12);
    let (_, csv) = get(
        &app,
        &format!("/evaluation/report?session={sid}&format=csv"),
    )
    .await;
    assert_eq!(csv.lines().count(), 13);

    let (status, body) = post(
        &app,
        "/evaluation/trials",
        json!({"project": "glory", "tag": "metaphor", "seed": 1}),
    )
    .await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::UNPROCESSABLE_ENTITY, json!("corpus_too_small"))
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn state_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let uri = "/similarity/matrix?project=piyyut&tag=metaphor";
    let (matrix, board, session) = {
        let (_, app) = app_with(dir.path(), &[fixtures::gallery_corpus()]).await;
        let matrix = get(&app, uri).await.1;
        let b = json_of(
            &post(
                &app,
                "/boards",
                json!({"project": "piyyut", "name": "b", "categories": ["x"]}),
            )
            .await
            .1,
        );
        let id = b["id"].as_str().unwrap();
        let board = post(
            &app,
            &format!("/boards/{id}/move"),
            json!({"text": "poem-01", "category": "x"}),
        )
        .await
        .1;
        let session = post(
            &app,
            "/evaluation/trials",
            json!({"project": "piyyut", "tag": "metaphor", "seed": 3}),
        )
        .await
        .1;
        (matrix, board, session)
    };
    let svc = Service::open(dir.path(), 1).unwrap();
    assert_eq!(svc.cached_matrix_count(), 1);
    let app = router(svc);
    assert_eq!(get(&app, uri).await.1, matrix);
    let id = json_of(&board)["id"].as_str().unwrap().to_owned();
    assert_eq!(get(&app, &format!("/boards/{id}")).await.1, board);
    let sid = json_of(&session)["id"].as_str().unwrap().to_owned();
    assert_eq!(
        get(&app, &format!("/evaluation/trials/{sid}")).await.1,
        session
    );
    let b2 = json_of(
        &post(&app, "/boards", json!({"project": "piyyut", "name": "c"}))
            .await
            .1,
    );
    assert_ne!(b2["id"].as_str().unwrap(), id);
}

#[test]
fn corrupt_store_refuses_to_open() {
    let dir = tempfile::tempdir().unwrap();
    drop(Service::open(dir.path(), 1).unwrap());
    std::fs::write(dir.path().join("boards/board-1.json"), "{\"id\": ").unwrap();
    match Service::open(dir.path(), 1) {
        Err(StoreError::Corrupt { entity, .. }) => assert_eq!(entity, "boards/board-1.json"),
        Err(other) => panic!("{other}"),
        Ok(_) => panic!("opened a corrupt store"),
    }

    std::fs::remove_file(dir.path().join("boards/board-1.json")).unwrap();
    let orphan = json!({"id": "board-1", "project": "ghost", "name": "b", "categories": [], "uncategorized": []});
    std::fs::write(dir.path().join("boards/board-1.json"), orphan.to_string()).unwrap();
    match Service::open(dir.path(), 1) {
        Err(StoreError::Corrupt { entity, reason }) => {
            assert_eq!(entity, "boards/board-1");
            assert!(reason.contains("ghost"));
        }
        Err(other) => panic!("{other}"),
        Ok(_) => panic!("opened a store with a dangling board"),
    }
}

async fn spawn_remote() -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(
            listener,
            remote_fixture_router(fixtures_dir().join("remote")),
        )
        .await
        .unwrap();
    });
    format!("http://{addr}")
}

#[tokio::test(flavor = "multi_thread")]
async fn http_import_through_fixture_remote() {
    let endpoint = spawn_remote().await;
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(dir.path(), &[]).await;
    let req = |key: &str, id: &str| json!({"endpoint": endpoint, "api_key": key, "remote_id": id});

    let (status, body) = post(&app, "/import", req("fixture-key", "piyyut-remote")).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let golden = load_project(fixtures_dir().join("golden/piyyut-remote.json")).unwrap();
    assert_eq!(
        get(&app, "/projects/piyyut-remote").await.1,
        to_canonical_json(&golden)
    );
    let (status, body) = post(&app, "/import", req("fixture-key", "piyyut-remote")).await;
    assert_eq!(
        (status, json_of(&body)["changed"].clone()),
        (StatusCode::OK, json!(false))
    );

    let (status, body) = post(&app, "/import", req("wrong-key", "piyyut-remote")).await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::UNAUTHORIZED, json!("authentication"))
    );
    assert!(!body.contains("wrong-key"));
    let (status, body) = post(&app, "/import", req("fixture-key", "missing")).await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::NOT_FOUND, json!("unknown_remote_project"))
    );

    let stored = std::fs::read_to_string(dir.path().join("projects/piyyut-remote.json")).unwrap();
    assert!(!stored.contains("fixture-key"));
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_remote_is_a_gateway_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app_with(dir.path(), &[]).await;
    let (status, body) = post(
        &app,
        "/import",
        json!({"endpoint": format!("http://{addr}"), "api_key": "k", "remote_id": "x"}),
    )
    .await;
    assert_eq!(
        (status, json_of(&body)["code"].clone()),
        (StatusCode::BAD_GATEWAY, json!("network"))
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn second_instance_on_same_port_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = tagscope_service::Config {
        addr: "127.0.0.1:0".parse().unwrap(),
        data_dir: dir.path().to_owned(),
        workers: 1,
    };
    let (listener, _svc) = tagscope_service::bind(&config).await.unwrap();
    let taken = tagscope_service::Config {
        addr: listener.local_addr().unwrap(),
        ..config
    };
    assert!(matches!(
        tagscope_service::bind(&taken).await,
        Err(tagscope_service::ServeError::Bind { .. })
    ));
}
