//! HTTP contract tests: serve an index from the CLI and exercise
//! /recommend and /health with a real client.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::time::Duration;

struct Server {
    child: Child,
    base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start_server() -> (tempfile::TempDir, Server) {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_i2i");
    let data = dir.path().join("train.tsv");
    let mut f = std::fs::File::create(&data).unwrap();
    // overlapping users with long histories: the last two interactions per
    // user are held out, so items a..e still appear in the train stream
    for (u, items) in [
        ("u1", ["a", "b", "c", "d", "e", "f"]),
        ("u2", ["a", "b", "c", "d", "g", "h"]),
        ("u3", ["a", "b", "c", "e", "f", "g"]),
    ] {
        for (ts, i) in items.iter().enumerate() {
            writeln!(f, "{u}\t{i}\t{}\tclick", ts + 1).unwrap();
        }
    }
    let config_path = dir.path().join("config.toml");
    std::fs::write(
        &config_path,
        format!(
            "[data]\ninteractions = {:?}\noutput_dir = {:?}\n",
            data.display().to_string(),
            dir.path().join("out").display().to_string()
        ),
    )
    .unwrap();
    let c = config_path.to_str().unwrap();
    for args in [
        vec!["build-backend", "--config", c],
        vec!["build-index", "--config", c],
    ] {
        let out = Command::new(bin).args(&args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {:?}", out);
    }
    let mut child = Command::new(bin)
        .args(["serve", "--config", c, "--bind", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let stdout = child.stdout.take().unwrap();
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();
    (
        dir,
        Server {
            child,
            base: format!("http://{addr}"),
        },
    )
}

fn client() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(10))
        .build()
        .unwrap()
}

#[test]
fn serve_contract() {
    let (_dir, server) = start_server();
    let client = client();

    let health: serde_json::Value = client
        .get(format!("{}/health", server.base))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(health["version"], 1);
    assert_eq!(health["k"], 200);
    assert!(health["item_count"].as_u64().unwrap() >= 4);

    let resp = client
        .post(format!("{}/recommend", server.base))
        .json(&serde_json::json!({"recent_item_ids": ["a", "b"], "n": 5}))
        .send()
        .unwrap();
    assert_eq!(resp.status(), 200);
    let body: serde_json::Value = resp.json().unwrap();
    let items = body["items"].as_array().unwrap();
    assert!(!items.is_empty());
    // query items never come back
    for item in items {
        let id = item[0].as_str().unwrap();
        assert!(id != "a" && id != "b");
    }
    assert_eq!(body["stats"]["keys_hit"], 2);
    assert!(body["stats"]["candidates_before_dedup"].as_u64().unwrap() > 0);

    // unknown keys are a soft miss, not an error
    let body: serde_json::Value = client
        .post(format!("{}/recommend", server.base))
        .json(&serde_json::json!({"recent_item_ids": ["nope"], "n": 5}))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(body["stats"]["keys_missed"], 1);
    assert_eq!(body["items"].as_array().unwrap().len(), 0);

    // malformed body -> 400 with a message
    let resp = client
        .post(format!("{}/recommend", server.base))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .unwrap();
    assert_eq!(resp.status(), 400);
    let err: serde_json::Value = resp.json().unwrap();
    assert!(err["error"].as_str().unwrap().contains("invalid request body"));

    // unknown route -> 404
    let resp = client
        .get(format!("{}/nothing-here", server.base))
        .send()
        .unwrap();
    assert_eq!(resp.status(), 404);
}

#[test]
fn identical_requests_get_identical_bytes() {
    let (_dir, server) = start_server();
    let client = client();
    let payload = serde_json::json!({"recent_item_ids": ["a", "b", "c"], "n": 10});
    let fetch = || {
        client
            .post(format!("{}/recommend", server.base))
            .json(&payload)
            .send()
            .unwrap()
            .bytes()
            .unwrap()
    };
    let first = fetch();
    for _ in 0..5 {
        assert_eq!(fetch(), first);
    }
}
