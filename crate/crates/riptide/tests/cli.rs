use std::process::{Command, Output};

use serde_json::Value;

fn riptide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riptide"))
        .args(args)
        .env_remove("RIPTIDE_FORMAT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn query_two_steps() {
    let v = json(&riptide(&["query", "--expr", r#"s "bd sn""#, "--begin", "0", "--end", "1", "--format", "json"]));
    let events = v.as_array().unwrap();
    assert_eq!(events.len(), 2);
    assert_eq!(events[0]["active"], serde_json::json!({"begin": "0/1", "end": "1/2"}));
    assert_eq!(events[1]["active"], serde_json::json!({"begin": "1/2", "end": "1/1"}));
    assert_eq!(events[1]["value"]["sound"], "sn");
}

#[test]
fn unterminated_string_exits_2() {
    let out = riptide(&["query", "--expr", r#"s "bd"#, "--begin", "0", "--end", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unterminated string"), "{stderr}");
    assert!(stderr.contains("1:3"), "{stderr}");
}

#[test]
fn eval_error_exits_2() {
    let out = riptide(&["query", "--expr", r#"s "bd" |> wobble"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown function 'wobble'"));
}

#[test]
fn applicative_sum() {
    let v = json(&riptide(&["query", "--expr", r#"n "1 2" |+| n "10 20 30""#, "--begin", "0", "--end", "1"]));
    let ns: Vec<i64> = v.as_array().unwrap().iter().map(|e| e["value"]["n"].as_i64().unwrap()).collect();
    assert_eq!(ns, [11, 21, 22, 32]);
}

#[test]
fn fractional_span_and_table() {
    let out = riptide(&["query", "--expr", r#"s "a b c d""#, "--begin", "1/4", "--end", "0.75", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("whole"));
    assert!(lines[1].contains("{sound: b}") && lines[2].contains("{sound: c}"));
}

#[test]
fn flags_read_from_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_riptide"))
        .arg("query")
        .env("RIPTIDE_EXPR", r#"s "bd""#)
        .env("RIPTIDE_END", "2")
        .env("RIPTIDE_FORMAT", "json")
        .output()
        .unwrap();
    assert_eq!(json(&out).as_array().unwrap().len(), 2);
}

#[test]
fn bad_fraction_is_a_usage_error() {
    let out = riptide(&["query", "--expr", r#"s "bd""#, "--begin", "x"]);
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn play_for_a_moment() {
    let socket = std::net::UdpSocket::bind("127.0.0.1:0").unwrap();
    socket.set_read_timeout(Some(std::time::Duration::from_secs(5))).unwrap();
    let target = socket.local_addr().unwrap().to_string();
    let out = riptide(&["play", "--expr", r#"s "bd*8""#, "--cps", "2", "--osc", &target, "--duration", "0.3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut buf = [0u8; 1024];
    let n = socket.recv(&mut buf).unwrap();
    assert!(buf[..n].starts_with(b"#bundle\0"));
    assert!(buf[..n].windows(10).any(|w| w == b"/dirt/play"));
}
