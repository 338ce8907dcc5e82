//! Paged retrieval of issues from a tracker search endpoint.
//!
//! The endpoint is expected to answer GET requests carrying `start_at` and
//! `max_results` query parameters with a JSON body of the shape
//! `{"total": N, "issues": [...]}`.

use std::time::Duration;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FetchConfig {
    /// Search endpoint URL without paging parameters.
    pub base_url: String,
    /// Extra query parameters forwarded on every page request.
    pub params: Vec<(String, String)>,
    pub page_size: usize,
    pub max_retries: u32,
    /// Initial retry delay, doubled after each failed attempt.
    pub backoff: Duration,
}

impl FetchConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        FetchConfig {
            base_url: base_url.into(),
            params: Vec::new(),
            page_size: 100,
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

/// Fetch every issue the endpoint reports, page by page. Transient failures
/// (transport errors, non-2xx statuses, unparseable bodies, short pages) are
/// retried with exponential backoff before becoming hard errors. The result
/// is sorted by issue key so reruns produce identical output.
pub fn fetch_issues(cfg: &FetchConfig) -> Result<Vec<serde_json::Value>> {
    if cfg.page_size == 0 {
        return Err(Error::Validation("fetch page_size must be positive".into()));
    }
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_secs(30))
        .build();

    let mut issues: Vec<serde_json::Value> = Vec::new();
    let mut start_at = 0usize;
    loop {
        let page = fetch_page(&agent, cfg, start_at)?;
        let got = page.issues.len();
        issues.extend(page.issues);
        if start_at + got >= page.total {
            break;
        }
        if got == 0 {
            return Err(Error::Http(format!(
                "endpoint reports {} issues but returned an empty page at offset {start_at}",
                page.total
            )));
        }
        start_at += got;
    }

    issues.sort_by_cached_key(|v| {
        v.get("key")
            .and_then(|k| k.as_str())
            .unwrap_or_default()
            .to_string()
    });
    Ok(issues)
}

struct Page {
    total: usize,
    issues: Vec<serde_json::Value>,
}

fn fetch_page(agent: &ureq::Agent, cfg: &FetchConfig, start_at: usize) -> Result<Page> {
    let mut delay = cfg.backoff;
    let mut last_err = String::new();
    for attempt in 0..=cfg.max_retries {
        if attempt > 0 {
            std::thread::sleep(delay);
            delay = delay.saturating_mul(2);
        }
        match request_page(agent, cfg, start_at) {
            Ok(page) => {
                // A page shorter than requested while more issues remain means
                // the server truncated it; retrying usually heals that.
                let remaining = page.total.saturating_sub(start_at);
                let expected = cfg.page_size.min(remaining);
                if page.issues.len() < expected {
                    last_err = format!(
                        "short page at offset {start_at}: got {} of {expected} expected issues",
                        page.issues.len()
                    );
                    continue;
                }
                return Ok(page);
            }
            Err(e) => last_err = e,
        }
    }
    Err(Error::Http(format!(
        "page at offset {start_at} failed after {} attempts: {last_err}",
        cfg.max_retries + 1
    )))
}

fn request_page(agent: &ureq::Agent, cfg: &FetchConfig, start_at: usize) -> std::result::Result<Page, String> {
    let mut req = agent
        .get(&cfg.base_url)
        .query("start_at", &start_at.to_string())
        .query("max_results", &cfg.page_size.to_string());
    for (k, v) in &cfg.params {
        req = req.query(k, v);
    }
    let response = req.call().map_err(|e| e.to_string())?;
    let body: serde_json::Value = response
        .into_json()
        .map_err(|e| format!("body is not JSON: {e}"))?;
    let total = body
        .get("total")
        .and_then(|t| t.as_u64())
        .ok_or("response has no numeric 'total'")? as usize;
    let issues = body
        .get("issues")
        .and_then(|i| i.as_array())
        .ok_or("response has no 'issues' array")?
        .clone();
    Ok(Page { total, issues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Minimal scripted HTTP server: each connection is answered by the
    /// handler, which sees the request path with query string.
    fn serve<F>(handler: F) -> String
    where
        F: Fn(usize, &str) -> (u16, String) + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                if reader.read_line(&mut line).is_err() {
                    continue;
                }
                loop {
                    let mut h = String::new();
                    match reader.read_line(&mut h) {
                        Ok(_) if h.trim().is_empty() => break,
                        Ok(0) | Err(_) => break,
                        _ => {}
                    }
                }
                let path = line.split_whitespace().nth(1).unwrap_or("/").to_string();
                let n = hits.fetch_add(1, Ordering::SeqCst);
                let (status, body) = handler(n, &path);
                let reason = if status == 200 { "OK" } else { "ERR" };
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
        format!("http://{addr}/search")
    }

    fn query_param(path: &str, name: &str) -> usize {
        path.split(['?', '&'])
            .find_map(|p| p.strip_prefix(&format!("{name}=")))
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    }

    fn issue(n: usize) -> String {
        format!(r#"{{"key": "T-{n:03}", "fields": {{"issuetype": {{"name": "Bug"}}}}}}"#)
    }

    fn page_body(total: usize, start: usize, len: usize) -> String {
        let items: Vec<String> = (start..(start + len).min(total)).map(issue).collect();
        format!(r#"{{"total": {total}, "issues": [{}]}}"#, items.join(","))
    }

    fn quick(base_url: String, page_size: usize) -> FetchConfig {
        FetchConfig {
            base_url,
            params: vec![],
            page_size,
            max_retries: 2,
            backoff: Duration::from_millis(1),
        }
    }

    #[test]
    fn pages_are_walked_and_concatenated() {
        let url = serve(|_, path| {
            let start = query_param(path, "start_at");
            (200, page_body(23, start, 10))
        });
        let issues = fetch_issues(&quick(url, 10)).unwrap();
        assert_eq!(issues.len(), 23);
        assert_eq!(issues[0]["key"], "T-000");
        assert_eq!(issues[22]["key"], "T-022");
        let keys: Vec<&str> = issues.iter().map(|i| i["key"].as_str().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted, "output must be key-sorted");
    }

    #[test]
    fn transient_server_errors_are_retried() {
        let url = serve(|n, path| {
            if n == 0 {
                (500, r#"{"oops": true}"#.to_string())
            } else {
                let start = query_param(path, "start_at");
                (200, page_body(5, start, 10))
            }
        });
        let issues = fetch_issues(&quick(url, 10)).unwrap();
        assert_eq!(issues.len(), 5);
    }

    #[test]
    fn persistently_short_pages_become_hard_errors() {
        let url = serve(|_, path| {
            let start = query_param(path, "start_at");
            // Claims 50 issues but always truncates the page to 3.
            (200, page_body(50, start, 3))
        });
        let err = fetch_issues(&quick(url, 10)).unwrap_err();
        match err {
            Error::Http(msg) => assert!(msg.contains("short page"), "{msg}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unreachable_endpoint_is_an_error() {
        // Port 1 is essentially guaranteed closed.
        let cfg = quick("http://127.0.0.1:1/search".into(), 10);
        assert!(matches!(fetch_issues(&cfg), Err(Error::Http(_))));
    }

    #[test]
    fn garbage_body_is_retried_then_fails() {
        let url = serve(|_, _| (200, "not json at all".to_string()));
        let err = fetch_issues(&quick(url, 10)).unwrap_err();
        assert!(matches!(err, Error::Http(_)));
    }
}
