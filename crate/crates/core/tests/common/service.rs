//! Service checks: crash/replay against the real binary and an in-process write race.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use revgraph::align::AlignConfig;
use revgraph::corpus::load_corpus;
use revgraph::service::{router, Store};
use revgraph::similarity::TrigramEmbedder;
use serde_json::{json, Value};
use tower::ServiceExt;

use super::criteria::Outcome;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/three")
}

/// Copy the three-sentence fixture corpus into `dir`.
pub fn stage_fixture(dir: &Path) -> PathBuf {
    for f in ["old.json", "new.json", "manifest.json", "embeddings.json"] {
        std::fs::copy(fixture_dir().join(f), dir.join(f)).unwrap();
    }
    dir.join("manifest.json")
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

struct Server {
    child: Child,
    base: String,
}

impl Server {
    fn start(manifest: &Path, journal: &Path) -> Result<Server, String> {
        let port = free_port();
        let child = Command::new(env!("CARGO_BIN_EXE_revgraph"))
            .args(["serve", "--manifest"])
            .arg(manifest)
            .arg("--journal")
            .arg(journal)
            .args(["--addr", &format!("127.0.0.1:{port}")])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| e.to_string())?;
        let server = Server { child, base: format!("http://127.0.0.1:{port}") };
        let deadline = Instant::now() + Duration::from_secs(30);
        while Instant::now() < deadline {
            if reqwest::blocking::get(format!("{}/pairs", server.base)).is_ok_and(|r| r.status().is_success()) {
                return Ok(server);
            }
            std::thread::sleep(Duration::from_millis(50));
        }
        Err("server did not come up".into())
    }

    fn get(&self, path: &str) -> Value {
        reqwest::blocking::get(format!("{}{path}", self.base)).unwrap().json().unwrap()
    }

    fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = reqwest::blocking::Client::new().post(format!("{}{path}", self.base)).json(&body).send().unwrap();
        (r.status().as_u16(), r.json().unwrap_or(Value::Null))
    }

    fn kill(mut self) {
        // SIGKILL: no graceful shutdown, no chance to flush anything
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

pub fn kill_and_replay() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = stage_fixture(dir.path());
    let journal = dir.path().join("journal");
    let s = Server::start(&manifest, &journal)?;
    let initial = s.get("/pairs/three");
    if initial["revision"] != 0 {
        return Err(format!("fresh revision {}", initial["revision"]));
    }
    let (st, body) = s.post(
        "/pairs/three/corrections",
        json!({"expected_revision": 0, "ops": [{"op": "add_link", "new": "three:new:p0.s0", "old": "three:old:p0.s0"}]}),
    );
    if st != 200 || body["revision"] != 1 {
        return Err(format!("first write: {st} {body}"));
    }
    let edit_id = body["edits"][0]["id"].as_str().unwrap_or_default().to_string();
    let (st, body) = s.post(
        "/pairs/three/labels",
        json!({"expected_revision": 1, "labels": [{"edit_id": edit_id, "intent": "Claim"}]}),
    );
    if st != 200 || body["revision"] != 2 {
        return Err(format!("label write: {st} {body}"));
    }
    let (st, _) = s.post("/pairs/three/corrections", json!({"expected_revision": 1, "ops": []}));
    if st != 409 {
        return Err(format!("stale write gave {st}"));
    }
    let (st, _) = s.post(
        "/pairs/three/corrections",
        json!({"expected_revision": 2, "ops": [{"op": "add_link", "new": "three:new:p0.s9", "old": "three:old:p0.s0"}]}),
    );
    if st != 422 {
        return Err(format!("unknown node gave {st}"));
    }
    let before = s.get("/pairs/three");
    s.kill();

    let s = Server::start(&manifest, &journal)?;
    let after = s.get("/pairs/three");
    s.kill();
    if before["edits"] != after["edits"] || before["revision"] != after["revision"] {
        return Err(format!("replay differs:\nbefore {before}\nafter {after}"));
    }
    Ok(format!("revision {} and {} edits reproduced after SIGKILL", after["revision"], after["edits"].as_array().map_or(0, Vec::len)))
}

async fn post(app: axum::Router, path: String, body: Value) -> (StatusCode, Value) {
    let req = Request::post(path).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

pub fn write_race() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = stage_fixture(dir.path());
    let corpus = load_corpus(&manifest).map_err(|e| e.to_string())?;
    let store = Store::open(corpus, &dir.path().join("journal"), &AlignConfig::default(), &TrigramEmbedder::default())
        .map_err(|e| e.to_string())?;
    let app = router(Arc::new(store), None);
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
    let rounds = 25;
    rt.block_on(async {
        for rev in 0..rounds {
            let body = |intent: &str| {
                json!({"expected_revision": rev, "ops": [{"op": "set_intent", "node": "three:new:p0.s2", "intent": intent}]})
            };
            let a = tokio::spawn(post(app.clone(), "/pairs/three/corrections".into(), body("Claim")));
            let b = tokio::spawn(post(app.clone(), "/pairs/three/corrections".into(), body("Other")));
            let (a, b) = (a.await.unwrap(), b.await.unwrap());
            let mut codes = [a.0.as_u16(), b.0.as_u16()];
            codes.sort();
            if codes != [200, 409] {
                return Err(format!("round {rev}: statuses {codes:?}"));
            }
            let loser = if a.0 == StatusCode::CONFLICT { &a.1 } else { &b.1 };
            if loser["current"]["revision"] != rev + 1 {
                return Err(format!("round {rev}: 409 body {loser}"));
            }
        }
        Ok(format!("{rounds} racing rounds: exactly one 200 and one 409 each"))
    })
}
