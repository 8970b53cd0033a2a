//! HTTP clients against a throwaway local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use semtk_core::embed::{Embedder, EmbeddingProviderConfig, Provider};
use semtk_core::llm::{ChatConfig, ChatMessage, ChatModel, ChatRequest, HttpChat};
use semtk_core::transport::RetryPolicy;
use semtk_core::Error;
use serde_json::{json, Value};

type Handler = dyn Fn(usize, &str, &Value) -> (u16, String) + Send + Sync;

struct Server {
    url: String,
    calls: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
}

/// Serve each connection once with `handler(call_index, path, body)`.
fn serve(handler: Box<Handler>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let calls = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (c, b) = (calls.clone(), bodies.clone());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        len = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body).unwrap();
            let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
            let i = c.fetch_add(1, Ordering::SeqCst);
            b.lock().unwrap().push(body.clone());
            let (status, text) = handler(i, &path, &body);
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    Server { url, calls, bodies }
}

/// Vector derived from the prompt text, returned in reversed index order.
fn embeddings_reply(body: &Value) -> String {
    let inputs = body["input"].as_array().unwrap();
    let data: Vec<Value> = inputs
        .iter()
        .enumerate()
        .rev()
        .map(|(i, t)| {
            let t = t.as_str().unwrap();
            json!({"object": "embedding", "index": i, "embedding": [t.len() as f64, 1.0, t.bytes().map(f64::from).sum::<f64>() / 1000.0]})
        })
        .collect();
    json!({"object": "list", "data": data, "model": "m"}).to_string()
}

fn http_cfg(url: &str) -> EmbeddingProviderConfig {
    EmbeddingProviderConfig {
        retry_backoff: Duration::from_millis(1),
        ..EmbeddingProviderConfig::http(url, "test-model")
    }
}

#[test]
fn embeddings_order_instruction_and_chunking() {
    let server = serve(Box::new(|_, path, body| {
        assert_eq!(path, "/v1/embeddings");
        (200, embeddings_reply(body))
    }));
    let cfg = EmbeddingProviderConfig {
        batch_size: 2,
        max_in_flight: 2,
        ..http_cfg(&server.url)
    }
    .with_instruction("Represent the purpose:");
    let p = Provider::from_config(&cfg).unwrap();
    let texts = ["a", "bb", "ccc", "dddd", "eeeee"];
    let vs = p.embed_batch(&texts).unwrap();
    assert_eq!(server.calls.load(Ordering::SeqCst), 3);
    for (t, v) in texts.iter().zip(&vs) {
        let prompt = format!("Represent the purpose: {t}");
        assert_eq!(v.values()[0], prompt.len() as f64);
        assert_eq!(v.provider_id(), "test-model");
        assert_eq!(v.instruction(), "Represent the purpose:");
    }
    let bodies = server.bodies.lock().unwrap();
    assert!(bodies.iter().all(|b| b["model"] == "test-model"));
    let mut sent: Vec<String> = bodies
        .iter()
        .flat_map(|b| b["input"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()))
        .collect();
    sent.sort();
    assert_eq!(sent[0], "Represent the purpose: a");
}

#[test]
fn cache_round_trip_issues_no_second_call() {
    let server = serve(Box::new(|_, _, body| (200, embeddings_reply(body))));
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.jsonl");
    let cfg = EmbeddingProviderConfig {
        cache_path: Some(cache.clone()),
        ..http_cfg(&server.url)
    };
    let texts = ["order a pizza", "play jazz", "order a pizza"];
    let first = Provider::from_config(&cfg).unwrap().embed_batch(&texts).unwrap();
    let after_first = server.calls.load(Ordering::SeqCst);
    assert_eq!(after_first, 1);
    assert_eq!(first[0], first[2]);

    // Same process, same provider, then a fresh provider reading the file.
    let p = Provider::from_config(&cfg).unwrap();
    assert_eq!(p.embed_batch(&texts).unwrap(), first);
    assert_eq!(p.embed_batch(&texts).unwrap(), first);
    assert_eq!(server.calls.load(Ordering::SeqCst), after_first);
}

#[test]
fn server_errors_are_retried() {
    let server = serve(Box::new(|i, _, body| {
        if i == 0 {
            (503, "{\"error\":\"busy\"}".into())
        } else {
            (200, embeddings_reply(body))
        }
    }));
    let p = Provider::from_config(&http_cfg(&server.url)).unwrap();
    assert_eq!(p.embed_batch(&["x"]).unwrap().len(), 1);
    assert_eq!(server.calls.load(Ordering::SeqCst), 2);
}

#[test]
fn client_errors_fail_fast_and_retries_are_bounded() {
    let server = serve(Box::new(|_, _, _| (400, "{\"error\":\"bad\"}".into())));
    let p = Provider::from_config(&http_cfg(&server.url)).unwrap();
    match p.embed_batch(&["x"]) {
        Err(Error::Transport { attempts, .. }) => assert_eq!(attempts, 1),
        other => panic!("{other:?}"),
    }
    assert_eq!(server.calls.load(Ordering::SeqCst), 1);

    let server = serve(Box::new(|_, _, _| (500, "{}".into())));
    let p = Provider::from_config(&http_cfg(&server.url)).unwrap();
    match p.embed_batch(&["x"]) {
        Err(Error::Transport { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("{other:?}"),
    }
    assert_eq!(server.calls.load(Ordering::SeqCst), 3);
}

#[test]
fn inconsistent_dimension_is_rejected() {
    let server = serve(Box::new(|_, _, _| {
        (200, json!({"data": [{"index": 0, "embedding": [1.0, 2.0]}, {"index": 1, "embedding": [1.0]}]}).to_string())
    }));
    let p = Provider::from_config(&http_cfg(&server.url)).unwrap();
    assert!(matches!(p.embed_batch(&["a", "b"]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn chat_completion_round_trip() {
    let server = serve(Box::new(|_, path, body| {
        assert_eq!(path, "/v1/chat/completions");
        let last = body["messages"].as_array().unwrap().last().unwrap()["content"].as_str().unwrap().to_uppercase();
        (200, json!({"id": "c", "choices": [{"index": 0, "message": {"role": "assistant", "content": last}, "finish_reason": "stop"}]}).to_string())
    }));
    let chat = HttpChat::new(&ChatConfig {
        retry: RetryPolicy {
            attempts: 2,
            backoff: Duration::from_millis(1),
        },
        ..ChatConfig::new(&server.url, "gpt-test")
    })
    .unwrap();
    let req = ChatRequest::new("", vec![ChatMessage::user("hello")]);
    assert_eq!(chat.complete(&req).unwrap(), "HELLO");
    let sent = server.bodies.lock().unwrap()[0].clone();
    assert_eq!(sent["model"], "gpt-test");
    assert_eq!(sent["temperature"], 0.0);
}
