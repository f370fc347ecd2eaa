//! Runs a whole mining session through the HTTP API in-process, answering
//! each pending test with the responses of `proper.fsm`.
//!
//! cargo run -p oraclemine-service --example http_walkthrough

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request};
use axum::Router;
use http_body_util::BodyExt;
use oraclemine::format::parse_fsm;
use oraclemine::fsm::{format_word, parse_word};
use oraclemine_service::{router, Service, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json");
    let body = body.map_or(Body::empty(), |b| Body::from(b.to_string()));
    let response = app
        .clone()
        .oneshot(request.body(body).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value: Value = serde_json::from_slice(&bytes).unwrap();
    assert!(status.is_success(), "{method} {uri}: {status} {value}");
    value
}

fn word(v: &Value) -> String {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect()
}

#[tokio::main]
async fn main() {
    let app = router(Arc::new(Service::new(ServiceConfig::default())));
    let expert = parse_fsm(include_str!("../../core/examples/data/proper.fsm")).unwrap();

    let fsm = include_str!("../../core/examples/data/imprecise.fsm");
    let mut state = call(
        &app,
        "POST",
        "/api/v1/sessions",
        Some(json!({"fsm": fsm, "initial_tests": ["babaab"]})),
    )
    .await;
    let id = state["id"].as_str().unwrap().to_owned();
    println!("session {id}");

    while state["status"] == "awaiting_choice" {
        let test = word(&state["pending_test"]);
        let offered: Vec<String> = state["offered_responses"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| word(&o["response"]))
            .collect();
        let answer = format_word(&expert.response(&parse_word(&test)).unwrap());
        println!(
            "{} candidates | {test}: offered {} -> {answer}",
            state["candidate_count_remaining"],
            offered.join(" ")
        );
        state = call(
            &app,
            "POST",
            &format!("/api/v1/sessions/{id}/choice"),
            Some(json!({"test": test, "response": answer})),
        )
        .await;
        println!("  removed {}", state["removed_last"]);
    }

    let result = call(&app, "GET", &format!("/api/v1/sessions/{id}/result"), None).await;
    println!(
        "\nadequate tests: {}",
        result["adequate_tests"]
            .as_array()
            .unwrap()
            .iter()
            .map(word)
            .collect::<Vec<_>>()
            .join(" ")
    );
    print!("{}", result["mined_text"].as_str().unwrap());
}
