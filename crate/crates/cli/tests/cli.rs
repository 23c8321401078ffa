//! End-to-end runs of the `tylr` binary.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn grammar() -> PathBuf {
    root().join("grammars/hazel.json")
}

fn tylr(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tylr"))
        .arg("--grammar")
        .arg(grammar())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn parse_text() {
    assert_eq!(stdout(&tylr(&["parse"], "let x = 4")), "let x = 4 [in] ⬚\n");
    assert_eq!(stdout(&tylr(&["parse"], "")), "⬚\n");
    assert_eq!(stdout(&tylr(&["parse"], "2 3")), "2 ⟐ 3\n");
    assert_eq!(stdout(&tylr(&["--ascii", "parse"], "2 3 +")), "2 <> 3 + _\n");
    assert_eq!(stdout(&tylr(&["parse"], "1 + ! 2")), "1 + !!! 2\n");
}

#[test]
fn parse_json_nests_by_precedence() {
    let v: Value = serde_json::from_str(&stdout(&tylr(&["parse", "--format", "json"], "2 + 3 * 4"))).unwrap();
    let text = |v: &Value| v["text"].as_str().map(str::to_string);
    // The root is the `+` form; its last child is the `*` form.
    let kids = v["children"].as_array().unwrap();
    assert_eq!(kids.len(), 3);
    assert_eq!(text(&kids[1]).as_deref(), Some("+"));
    let right = kids[2]["children"].as_array().unwrap();
    assert_eq!(text(&right[1]).as_deref(), Some("*"));
}

#[test]
fn parse_debug_and_trace() {
    let o = tylr(&["parse", "--format", "debug", "--trace"], "let x");
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("let x [=] ⬚ [in] ⬚"));
    assert!(out.starts_with("let\t⧏ ⋖ let\n"));
    let trace: Vec<Value> = String::from_utf8(o.stderr).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(trace.len(), 2);
    assert_eq!(trace[1]["chosen"]["sort"], "P");
    assert_eq!(trace[1]["candidates"].as_array().unwrap().len(), 3);
}

#[test]
fn relations_and_elab_dumps() {
    let tsv = stdout(&tylr(&["relations"], ""));
    assert!(tsv.starts_with("left\top\tslot\tright\n"));
    assert!(tsv.lines().all(|l| l.split('\t').count() == 4));
    assert!(stdout(&tylr(&["relations", "--dot"], "")).starts_with("digraph"));
    let cfg = stdout(&tylr(&["elab"], ""));
    assert!(cfg.lines().any(|l| l.contains("INFIX:E")));
}

#[test]
fn coherence_of_bundled_grammar() {
    assert_eq!(stdout(&tylr(&["coherence"], "")), "coherent; 0 lemma violations\n");
}

#[test]
fn invalid_grammar_exits_nonzero() {
    let dir = std::env::temp_dir().join(format!("tylr-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"root":"E","sorts":{"E":[{"prec":0,"forms":["'a' Q"]}]}}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tylr")).arg("--grammar").arg(&bad).arg("parse").stdin(Stdio::null()).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = Command::new(env!("CARGO_BIN_EXE_tylr")).env_remove("TYLR_GRAMMAR").arg("coherence").output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn grammar_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_tylr"))
        .env("TYLR_GRAMMAR", grammar())
        .args(["parse"])
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "⬚\n");
}

#[test]
fn session_transcript() {
    let script = root().join("crates/core/tests/golden/incomplete_infix.jsonl");
    let events = std::fs::read_to_string(&script).unwrap().lines().filter(|l| !l.trim().is_empty()).count();
    let out = stdout(&tylr(&["session", script.to_str().unwrap()], ""));
    let models: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(models.len(), events + 1);
    assert_eq!(models[0]["text"], "⬚");
    assert_eq!(models.last().unwrap()["text"], "2 + 3 * ⬚");
    let golden: Value = serde_json::from_str(
        &std::fs::read_to_string(root().join("crates/core/tests/golden/incomplete_infix.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(models.last().unwrap(), &golden);
    // Empty script: the initial render only. Tab on no ghost: no change.
    assert_eq!(stdout(&tylr(&["session"], "")).lines().count(), 1);
    let out = stdout(&tylr(&["session"], "{\"kind\":\"insert\",\"text\":\"1\"}\n{\"kind\":\"tab\"}\n"));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1], lines[2]);
    let o = tylr(&["session"], "{\"kind\":\"tab\"}\n{\"kind\":\n");
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn serve_over_stdio() {
    let input = [
        json!({"type": "hello", "v": 1}),
        json!({"type": "event", "event": {"kind": "insert", "text": "2"}}),
        json!({"type": "event", "event": {"kind": "insert", "text": " "}}),
        json!({"type": "event", "event": {"kind": "insert", "text": "+"}}),
    ]
    .iter()
    .map(|v| v.to_string() + "\n")
    .collect::<String>();
    let out = stdout(&tylr(&["serve"], &input));
    let replies: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies.len(), 4);
    assert_eq!(replies[0]["v"], 1);
    assert_eq!(replies[3]["model"]["text"], "2 + ⬚");
}

#[test]
fn bench_csv() {
    let out = stdout(&tylr(&["bench", "--sizes", "50,100", "--seed", "5"], ""));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "size,parse_ms,edit_ms");
    assert!(lines[1].starts_with("50,") && lines[2].starts_with("100,"));
    assert!(lines[3].starts_with("# fitted exponent: "));
    assert_eq!(stdout(&tylr(&["bench", "--sizes"], "")), "size,parse_ms,edit_ms\n");
}

#[tokio::test]
async fn serve_over_websocket() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tylr"))
        .arg("--grammar")
        .arg(grammar())
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut banner = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut banner).unwrap();
    let url = banner.trim().strip_prefix("listening on ").unwrap().to_string();

    // Two concurrent sessions keep independent states.
    let (mut a, _) = tokio_tungstenite::connect_async(url.as_str()).await.unwrap();
    let (mut b, _) = tokio_tungstenite::connect_async(url.as_str()).await.unwrap();
    async fn ask<S>(ws: &mut S, v: Value) -> Value
    where
        S: SinkExt<Message> + StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
        <S as futures_util::Sink<Message>>::Error: std::fmt::Debug,
    {
        ws.send(Message::Text(v.to_string().into())).await.unwrap();
        match ws.next().await.unwrap().unwrap() {
            Message::Text(t) => serde_json::from_str(&t).unwrap(),
            other => panic!("unexpected {other:?}"),
        }
    }
    let hello = ask(&mut a, json!({"type": "hello", "v": 1})).await;
    assert_eq!(hello, json!({"type": "hello", "v": 1, "root": "E"}));
    for c in ["l", "e", "t", " "] {
        ask(&mut a, json!({"type": "event", "event": {"kind": "insert", "text": c}})).await;
    }
    let r = ask(&mut b, json!({"type": "event", "event": {"kind": "insert", "text": "7"}})).await;
    assert_eq!(r["model"]["text"], "7");
    let r = ask(&mut a, json!({"type": "render"})).await;
    assert_eq!(r["model"]["text"], "let ⬚ [=] ⬚ [in] ⬚");
    let r = ask(&mut a, json!({"type": "event", "event": {"kind": "tab"}})).await;
    assert_eq!(r["type"], "render");
    child.kill().unwrap();
    child.wait().unwrap();
}
