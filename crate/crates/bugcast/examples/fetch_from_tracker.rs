//! Pull issues from a tracker search endpoint with paging and retries, then
//! feed them through the export parser. A throwaway HTTP server on localhost
//! stands in for the tracker; the first request fails on purpose to show the
//! retry path.
//!
//!     cargo run --example fetch_from_tracker

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use bugcast::ingest::fetch::{fetch_issues, FetchConfig};
use bugcast::ingest::{parse_bug_export, ExportFormat, ParseOptions};

fn issue(key: &str, created: &str) -> serde_json::Value {
    serde_json::json!({
        "key": key,
        "fields": {
            "issuetype": {"name": "Bug"},
            "created": created,
            "versions": [{"name": "helium"}]
        }
    })
}

fn main() -> anyhow::Result<()> {
    let issues = vec![
        issue("MOCK-1", "2023-02-01T08:00:00.000+0000"),
        issue("MOCK-2", "2023-02-02T08:00:00.000+0000"),
        issue("MOCK-3", "2023-02-03T08:00:00.000+0000"),
    ];

    let listener = TcpListener::bind("127.0.0.1:0")?;
    let port = listener.local_addr()?.port();
    let served = Arc::new(AtomicUsize::new(0));
    let issues_srv = issues.clone();
    let served_srv = served.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut buf = [0u8; 2048];
            let _ = stream.read(&mut buf);
            let request = String::from_utf8_lossy(&buf);
            let n = served_srv.fetch_add(1, Ordering::SeqCst);
            let response = if n == 0 {
                // first hit: simulate a flaky tracker
                "HTTP/1.1 503 Service Unavailable\r\ncontent-length: 0\r\n\r\n".to_string()
            } else {
                let start_at: usize = request
                    .split("start_at=")
                    .nth(1)
                    .and_then(|s| s.split('&').next())
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(0);
                let page: Vec<_> = issues_srv.iter().skip(start_at).take(2).cloned().collect();
                let body = serde_json::json!({"total": issues_srv.len(), "issues": page}).to_string();
                format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
                    body.len(),
                    body
                )
            };
            let _ = stream.write_all(response.as_bytes());
        }
    });

    let mut cfg = FetchConfig::new(format!("http://127.0.0.1:{port}/search"));
    cfg.page_size = 2;
    cfg.backoff = std::time::Duration::from_millis(50);
    cfg.params.push(("jql".into(), "type = Bug".into()));

    println!("fetching from the mock tracker on port {port}...");
    let fetched = fetch_issues(&cfg)?;
    println!(
        "{} issues over {} requests (one of them deliberately failed)",
        fetched.len(),
        served.load(Ordering::SeqCst)
    );

    let export = serde_json::json!({"issues": fetched}).to_string();
    let outcome = parse_bug_export(export.as_bytes(), ExportFormat::Json, &ParseOptions::default())?;
    for bug in &outcome.bugs {
        println!("  {} created {} affects {:?}", bug.key, bug.created, bug.affected_releases);
    }
    Ok(())
}
