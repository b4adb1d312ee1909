//! Client for a model served by an external process.
//!
//! The child speaks newline-delimited JSON on its standard streams:
//!
//! ```text
//! engine -> model   {"op":"hello","version":1}
//! model  -> engine  {"ok":true,"classes":2}
//! engine -> model   {"op":"predict","features":[3,0]}
//! model  -> engine  {"class":1}
//! ```
//!
//! Any reply lacking an integer `"class"` in `{0,1}` is a protocol error.
//! Requests are serialized internally, so the client can be shared across
//! threads; batches are pipelined (all request lines written, then all
//! replies read in order).

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError, SyncSender};
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::PredictionModel;
use crate::tabular::{ClassId, Instance};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ExternalModelConfig {
    /// Command line spawned through `sh -c`.
    pub command: String,
    /// Per-reply timeout in milliseconds. Must be positive.
    pub timeout_ms: u64,
}

pub struct ExternalModel {
    inner: Mutex<Inner>,
}

struct Inner {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<String>,
    timeout: Duration,
    timeout_ms: u64,
}

impl ExternalModel {
    /// Spawn the model process and perform the hello handshake.
    pub fn spawn(cfg: &ExternalModelConfig) -> Result<ExternalModel> {
        if cfg.timeout_ms == 0 {
            return Err(Error::Config("model timeout must be positive".into()));
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&cfg.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");

        // Reader thread: forwards stdout lines until EOF. A disconnected
        // channel therefore means the child is gone.
        let (tx, rx): (SyncSender<String>, Receiver<String>) = std::sync::mpsc::sync_channel(1024);
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut line = String::new();
            loop {
                line.clear();
                match reader.read_line(&mut line) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        if tx.send(line.trim_end().to_string()).is_err() {
                            break;
                        }
                    }
                }
            }
        });

        let mut inner = Inner {
            child,
            stdin,
            replies: rx,
            timeout: Duration::from_millis(cfg.timeout_ms),
            timeout_ms: cfg.timeout_ms,
        };
        inner.handshake()?;
        Ok(ExternalModel { inner: Mutex::new(inner) })
    }

    /// Send the whole batch, then read replies in request order.
    pub fn predict_external(&self, batch: &[Instance]) -> Result<Vec<ClassId>> {
        let mut inner = self.inner.lock().expect("model client poisoned");
        for x in batch {
            inner.send(&json!({"op": "predict", "features": x.values()}))?;
        }
        batch.iter().map(|_| inner.read_class()).collect()
    }
}

impl Inner {
    fn handshake(&mut self) -> Result<()> {
        self.send(&json!({"op": "hello", "version": PROTOCOL_VERSION}))?;
        let reply = self.recv_line()?;
        let value: Value =
            serde_json::from_str(&reply).map_err(|e| Error::Protocol(format!("handshake: {e}")))?;
        if value.get("ok").and_then(Value::as_bool) != Some(true) {
            return Err(Error::Protocol(format!("handshake rejected: {reply}")));
        }
        if value.get("classes").and_then(Value::as_u64) != Some(2) {
            return Err(Error::Protocol(format!("model is not a binary classifier: {reply}")));
        }
        Ok(())
    }

    fn send(&mut self, request: &Value) -> Result<()> {
        let mut line = request.to_string();
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|_| Error::ChildExited)
    }

    fn recv_line(&mut self) -> Result<String> {
        match self.replies.recv_timeout(self.timeout) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(self.timeout_ms)),
            Err(RecvTimeoutError::Disconnected) => Err(Error::ChildExited),
        }
    }

    fn read_class(&mut self) -> Result<ClassId> {
        let line = self.recv_line()?;
        let value: Value =
            serde_json::from_str(&line).map_err(|e| Error::Protocol(format!("{e} in reply '{line}'")))?;
        match value.get("class").and_then(Value::as_i64) {
            Some(0) => Ok(0),
            Some(1) => Ok(1),
            _ => Err(Error::Protocol(format!("reply lacks a 0/1 \"class\": {line}"))),
        }
    }
}

impl Drop for Inner {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl PredictionModel for ExternalModel {
    fn predict(&self, x: &Instance) -> Result<ClassId> {
        Ok(self.predict_external(std::slice::from_ref(x))?[0])
    }

    fn predict_batch(&self, xs: &[Instance]) -> Result<Vec<ClassId>> {
        self.predict_external(xs)
    }
}
